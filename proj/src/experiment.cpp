#include "bioid/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "bioid/csv.hpp"
#include "bioid/errors.hpp"
#include "bioid/eval.hpp"
#include "bioid/rng.hpp"

namespace bioid {

namespace {

constexpr const char* kNa = "NA";

struct RunOutcome {
  double ident_rate = 0.0;
  double min_dcf = 0.0;
  bool stalled = false;
};

RunOutcome execute_run(Scheme scheme, const LabeledDataset& train_norm,
                       const LabeledDataset& test, const Normalizer& norm,
                       const MlpTopology& topology, std::uint64_t run_seed,
                       const ExperimentConfig& cfg) {
  const TrainConfig& tcfg_base =
      (train_scheme_of(scheme) == TrainScheme::kMse) ? cfg.mse : cfg.msereg;
  const int members = is_committee(scheme) ? kCommitteeMembers : 1;

  std::vector<MlpModel> models;
  models.reserve(static_cast<std::size_t>(members));
  RunOutcome out;
  for (int m = 0; m < members; ++m) {
    const std::uint64_t member_seed =
        cfg.force_identical_member_seeds ? rng::derive_seed(run_seed, 0)
                                         : rng::derive_seed(run_seed, m);
    TrainConfig tcfg = tcfg_base;
    tcfg.seed = member_seed;
    const MlpModel m0 = init_weights(topology, member_seed);
    auto [model, report] = (tcfg.scheme == TrainScheme::kMse)
                               ? train_lm(m0, train_norm, tcfg)
                               : train_lm_bayes(m0, train_norm, tcfg);
    out.stalled = out.stalled || report.stalled;
    models.push_back(std::move(model));
  }

  const Scorer scorer = (members == 1)
                            ? make_scorer(models.front())
                            : make_scorer(Committee(std::move(models)));
  const SimilarityTensor tensor = build_tensor(scorer, test, norm);
  out.ident_rate = identification_rate(tensor);
  const ScoreSplit split = split_scores(tensor);
  out.min_dcf = min_dcf(split, cfg.c_miss, cfg.c_fa, cfg.p_true).min_dcf;
  return out;
}

std::vector<const RunRecord*> valid_records(std::span<const RunRecord> records) {
  std::vector<const RunRecord*> out;
  for (const auto& r : records) {
    if (!r.stalled) out.push_back(&r);
  }
  return out;
}

}  // namespace

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kMseSingle: return "mse_single";
    case Scheme::kMseregSingle: return "msereg_single";
    case Scheme::kMseCommittee: return "mse_committee";
    case Scheme::kMseregCommittee: return "msereg_committee";
  }
  throw std::invalid_argument("scheme_name: bad scheme");
}

char scheme_letter(Scheme s) {
  switch (s) {
    case Scheme::kMseSingle: return 'a';
    case Scheme::kMseregSingle: return 'b';
    case Scheme::kMseCommittee: return 'c';
    case Scheme::kMseregCommittee: return 'd';
  }
  throw std::invalid_argument("scheme_letter: bad scheme");
}

Scheme parse_scheme(const std::string& token) {
  if (token == "a" || token == "mse_single") return Scheme::kMseSingle;
  if (token == "b" || token == "msereg_single") return Scheme::kMseregSingle;
  if (token == "c" || token == "mse_committee") return Scheme::kMseCommittee;
  if (token == "d" || token == "msereg_committee") {
    return Scheme::kMseregCommittee;
  }
  throw std::invalid_argument("unknown scheme '" + token +
                              "' (use a|b|c|d or the long names)");
}

bool is_committee(Scheme s) {
  return s == Scheme::kMseCommittee || s == Scheme::kMseregCommittee;
}

TrainScheme train_scheme_of(Scheme s) {
  return (s == Scheme::kMseSingle || s == Scheme::kMseCommittee)
             ? TrainScheme::kMse
             : TrainScheme::kMsereg;
}

std::vector<RunRecord> run_scheme(Scheme scheme, const LabeledDataset& train,
                                  const LabeledDataset& test,
                                  const ExperimentConfig& cfg) {
  if (cfg.n_runs < 2) {
    throw std::invalid_argument("run_scheme: need n_runs >= 2");
  }
  if (train.samples.empty() || test.samples.empty()) {
    throw std::invalid_argument("run_scheme: empty split");
  }
  if (train.n_people != test.n_people || train.dims() != test.dims()) {
    throw std::invalid_argument("run_scheme: train/test splits do not match");
  }

  const Normalizer norm = fit_normalizer(train);
  const LabeledDataset train_norm = apply_normalizer(norm, train);
  const MlpTopology topology{train.dims(), cfg.hidden_dim, train.n_people};

  std::vector<RunRecord> records(static_cast<std::size_t>(cfg.n_runs));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  const auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= cfg.n_runs) return;
      try {
        const std::uint64_t run_seed = rng::derive_seed(cfg.base_seed, i);
        const RunOutcome out = execute_run(scheme, train_norm, test, norm,
                                           topology, run_seed, cfg);
        records[static_cast<std::size_t>(i)] =
            RunRecord{scheme, i, run_seed, out.ident_rate, out.min_dcf,
                      out.stalled};
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };

  const int jobs = std::clamp(cfg.jobs, 1, cfg.n_runs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

SchemeSummary summarize(std::span<const RunRecord> records) {
  const auto valid = valid_records(records);
  if (valid.size() < 2) {
    throw std::invalid_argument("summarize: need at least 2 valid records");
  }
  for (const auto* r : valid) {
    if (r->scheme != valid.front()->scheme) {
      throw std::invalid_argument("summarize: mixed schemes");
    }
  }
  std::vector<double> ident, dcf;
  ident.reserve(valid.size());
  dcf.reserve(valid.size());
  for (const auto* r : valid) {
    ident.push_back(r->ident_rate);
    dcf.push_back(r->min_dcf);
  }
  SchemeSummary s;
  s.scheme = valid.front()->scheme;
  s.run_count = static_cast<int>(valid.size());
  s.excluded = static_cast<int>(records.size() - valid.size());
  s.ident = stats::mean_std(ident);
  s.dcf = stats::mean_std(dcf);
  s.corr = stats::pearson(ident, dcf);
  s.line = stats::ols_fit(ident, dcf);
  return s;
}

std::vector<MetricHistogram> emit_histograms(std::span<const RunRecord> records,
                                             int bins) {
  const auto valid = valid_records(records);
  std::vector<double> ident, dcf;
  for (const auto* r : valid) {
    ident.push_back(r->ident_rate);
    dcf.push_back(r->min_dcf);
  }
  return {{"ident_rate", stats::histogram(ident, bins)},
          {"min_dcf", stats::histogram(dcf, bins)}};
}

ScatterData emit_scatter(std::span<const RunRecord> records) {
  const auto valid = valid_records(records);
  if (valid.size() < 2) {
    throw std::invalid_argument("emit_scatter: need at least 2 valid records");
  }
  ScatterData out;
  std::vector<double> ident, dcf;
  for (const auto* r : valid) {
    out.points.emplace_back(r->ident_rate, r->min_dcf);
    ident.push_back(r->ident_rate);
    dcf.push_back(r->min_dcf);
  }
  out.line = stats::ols_fit(ident, dcf);
  return out;
}

void write_records_csv(std::span<const RunRecord> records,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "run_index,seed,ident_rate,min_dcf,stalled\n";
  for (const auto& r : records) {
    out << r.run_index << "," << r.run_seed << "," << csv::fmt(r.ident_rate)
        << "," << csv::fmt(r.min_dcf) << "," << (r.stalled ? 1 : 0) << "\n";
  }
}

void write_histogram_csv(const MetricHistogram& h,
                         const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "bin_lo,bin_hi,count\n";
  const double width = h.hist.bin_width();
  for (std::size_t b = 0; b < h.hist.counts.size(); ++b) {
    const double lo = h.hist.lo + width * static_cast<double>(b);
    const double hi = (b + 1 == h.hist.counts.size())
                          ? h.hist.hi
                          : h.hist.lo + width * static_cast<double>(b + 1);
    out << csv::fmt(lo) << "," << csv::fmt(hi) << "," << h.hist.counts[b]
        << "\n";
  }
}

void write_scatter_csv(const ScatterData& s, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "ident_rate,min_dcf\n";
  for (const auto& [x, y] : s.points) {
    out << csv::fmt(x) << "," << csv::fmt(y) << "\n";
  }
}

void write_summary_csv(std::span<const SchemeSummary> summaries,
                       const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "scheme,runs,excluded,ident_mean,ident_std,dcf_mean,dcf_std,corr,"
         "ols_slope,ols_intercept\n";
  for (const auto& s : summaries) {
    out << scheme_name(s.scheme) << "," << s.run_count << "," << s.excluded
        << "," << csv::fmt(s.ident.mean) << "," << csv::fmt(s.ident.stddev)
        << "," << csv::fmt(s.dcf.mean) << "," << csv::fmt(s.dcf.stddev) << ",";
    if (s.corr) {
      out << csv::fmt(*s.corr);
    } else {
      out << kNa;
    }
    out << ",";
    if (s.line) {
      out << csv::fmt(s.line->slope) << "," << csv::fmt(s.line->intercept);
    } else {
      out << kNa << "," << kNa;
    }
    out << "\n";
  }
}

}  // namespace bioid
