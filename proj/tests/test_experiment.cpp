#include <doctest.h>

#include <fstream>
#include <sstream>

#include "bioid/experiment.hpp"
#include "oracles.hpp"

using namespace bioid;

namespace {

struct SmallStudy {
  LabeledDataset train;
  LabeledDataset test;
  ExperimentConfig cfg;
};

// Small, fast setup: 3 people, 3 dims, 20 trials (10/10 split) so the
// regularized scheme has more residuals than parameters.
SmallStudy small_study(std::uint64_t data_seed, double spread) {
  SmallStudy s;
  const auto ds = generate_synthetic(3, 20, 3, data_seed, spread);
  auto [train, test] = split_train_test(ds, 10);
  s.train = std::move(train);
  s.test = std::move(test);
  s.cfg.n_runs = 4;
  s.cfg.base_seed = 99;
  s.cfg.hidden_dim = 6;
  s.cfg.jobs = 2;
  s.cfg.mse.epochs = 4;
  s.cfg.msereg.epochs = 6;
  return s;
}

RunRecord record_of(Scheme scheme, int idx, double ident, double dcf,
                    bool stalled = false) {
  return RunRecord{scheme, idx, 0, ident, dcf, stalled};
}

}  // namespace

TEST_CASE("scheme names, letters, and parsing") {
  CHECK(scheme_name(Scheme::kMseSingle) == "mse_single");
  CHECK(scheme_letter(Scheme::kMseregCommittee) == 'd');
  CHECK(parse_scheme("a") == Scheme::kMseSingle);
  CHECK(parse_scheme("b") == Scheme::kMseregSingle);
  CHECK(parse_scheme("c") == Scheme::kMseCommittee);
  CHECK(parse_scheme("msereg_committee") == Scheme::kMseregCommittee);
  CHECK_THROWS_AS(parse_scheme("z"), std::invalid_argument);
  CHECK(is_committee(Scheme::kMseCommittee));
  CHECK(!is_committee(Scheme::kMseregSingle));
  CHECK(train_scheme_of(Scheme::kMseCommittee) == TrainScheme::kMse);
  CHECK(train_scheme_of(Scheme::kMseregCommittee) == TrainScheme::kMsereg);
}

TEST_CASE("run_scheme is deterministic and thread-count independent") {
  const auto s = small_study(7, 2.0);
  const auto a = run_scheme(Scheme::kMseSingle, s.train, s.test, s.cfg);

  auto cfg_serial = s.cfg;
  cfg_serial.jobs = 1;
  const auto b = run_scheme(Scheme::kMseSingle, s.train, s.test, cfg_serial);

  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].run_index == static_cast<int>(i));
    CHECK(a[i].run_seed == b[i].run_seed);
    CHECK(a[i].ident_rate == b[i].ident_rate);
    CHECK(a[i].min_dcf == b[i].min_dcf);
    CHECK(a[i].stalled == b[i].stalled);
  }
}

TEST_CASE("a committee of clones reproduces the single scheme run-for-run") {
  const auto s = small_study(13, 2.0);
  const auto singles = run_scheme(Scheme::kMseSingle, s.train, s.test, s.cfg);

  auto clone_cfg = s.cfg;
  clone_cfg.force_identical_member_seeds = true;
  const auto clones =
      run_scheme(Scheme::kMseCommittee, s.train, s.test, clone_cfg);

  REQUIRE(singles.size() == clones.size());
  for (std::size_t i = 0; i < singles.size(); ++i) {
    CHECK(clones[i].ident_rate == singles[i].ident_rate);
    CHECK(clones[i].min_dcf == singles[i].min_dcf);
  }

  const auto reg_singles =
      run_scheme(Scheme::kMseregSingle, s.train, s.test, s.cfg);
  const auto reg_clones =
      run_scheme(Scheme::kMseregCommittee, s.train, s.test, clone_cfg);
  for (std::size_t i = 0; i < reg_singles.size(); ++i) {
    CHECK(reg_clones[i].ident_rate == reg_singles[i].ident_rate);
    CHECK(reg_clones[i].min_dcf == reg_singles[i].min_dcf);
  }
}

TEST_CASE("easy synthetic data puts every scheme at or above the baseline") {
  auto s = small_study(21, 10.0);
  const double baseline = oracles::nearest_mean_rate(s.train, s.test);
  CHECK(baseline >= 0.95);
  for (const auto scheme : {Scheme::kMseSingle, Scheme::kMseregSingle,
                            Scheme::kMseCommittee, Scheme::kMseregCommittee}) {
    const auto records = run_scheme(scheme, s.train, s.test, s.cfg);
    const auto summary = summarize(records);
    CHECK(summary.ident.mean >= 0.95);
  }
}

TEST_CASE("run_scheme validates its inputs") {
  const auto s = small_study(3, 2.0);
  auto bad = s.cfg;
  bad.n_runs = 1;
  CHECK_THROWS_AS(run_scheme(Scheme::kMseSingle, s.train, s.test, bad),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_scheme(Scheme::kMseSingle, s.train, LabeledDataset{},
                             s.cfg),
                  std::invalid_argument);
}

TEST_CASE("summarize: moments, correlation, and exclusions") {
  SUBCASE("two records with opposite slopes correlate at -1") {
    std::vector<RunRecord> recs = {
        record_of(Scheme::kMseSingle, 0, 0.9, 0.03),
        record_of(Scheme::kMseSingle, 1, 0.95, 0.02)};
    const auto s = summarize(recs);
    REQUIRE(s.corr.has_value());
    CHECK(*s.corr == doctest::Approx(-1.0));
    CHECK(s.ident.mean == doctest::Approx(0.925));
    CHECK(s.run_count == 2);
    CHECK(s.excluded == 0);
  }
  SUBCASE("identical metrics leave the correlation undefined") {
    std::vector<RunRecord> recs = {
        record_of(Scheme::kMseSingle, 0, 0.9, 0.05),
        record_of(Scheme::kMseSingle, 1, 0.9, 0.05),
        record_of(Scheme::kMseSingle, 2, 0.9, 0.05)};
    const auto s = summarize(recs);
    CHECK(s.ident.stddev == 0.0);
    CHECK(!s.corr.has_value());
    CHECK(!s.line.has_value());
  }
  SUBCASE("stalled records are excluded and counted") {
    std::vector<RunRecord> recs = {
        record_of(Scheme::kMseSingle, 0, 0.9, 0.05),
        record_of(Scheme::kMseSingle, 1, 0.0, 0.9, /*stalled=*/true),
        record_of(Scheme::kMseSingle, 2, 0.8, 0.06)};
    const auto s = summarize(recs);
    CHECK(s.run_count == 2);
    CHECK(s.excluded == 1);
    CHECK(s.ident.mean == doctest::Approx(0.85));
  }
  SUBCASE("fewer than two valid records is an error") {
    std::vector<RunRecord> recs = {
        record_of(Scheme::kMseSingle, 0, 0.9, 0.05),
        record_of(Scheme::kMseSingle, 1, 0.0, 0.9, /*stalled=*/true)};
    CHECK_THROWS_AS(summarize(recs), std::invalid_argument);
  }
  SUBCASE("mixed schemes are rejected") {
    std::vector<RunRecord> recs = {
        record_of(Scheme::kMseSingle, 0, 0.9, 0.05),
        record_of(Scheme::kMseCommittee, 1, 0.9, 0.05)};
    CHECK_THROWS_AS(summarize(recs), std::invalid_argument);
  }
}

TEST_CASE("histograms conserve record mass") {
  std::vector<RunRecord> recs;
  for (int i = 0; i < 57; ++i) {
    recs.push_back(record_of(Scheme::kMseSingle, i, 0.5 + 0.005 * i,
                             0.2 - 0.001 * i));
  }
  recs.push_back(record_of(Scheme::kMseSingle, 57, 0.1, 0.9, /*stalled=*/true));

  const auto hists = emit_histograms(recs, 8);
  REQUIRE(hists.size() == 2);
  for (const auto& h : hists) {
    long total = 0;
    for (long c : h.hist.counts) total += c;
    CHECK(total == 57);  // stalled record not binned
  }
  CHECK(hists[0].metric == "ident_rate");
  CHECK(hists[1].metric == "min_dcf");
}

TEST_CASE("scatter data carries an exact two-point line") {
  std::vector<RunRecord> recs = {record_of(Scheme::kMseSingle, 0, 0.8, 0.1),
                                 record_of(Scheme::kMseSingle, 1, 0.9, 0.05)};
  const auto sc = emit_scatter(recs);
  REQUIRE(sc.points.size() == 2);
  REQUIRE(sc.line.has_value());
  CHECK(sc.line->slope * 0.8 + sc.line->intercept == doctest::Approx(0.1));
  CHECK(sc.line->slope * 0.9 + sc.line->intercept == doctest::Approx(0.05));
}

TEST_CASE("slope sign matches correlation sign on real records") {
  const auto s = small_study(31, 2.0);
  const auto records = run_scheme(Scheme::kMseSingle, s.train, s.test, s.cfg);
  const auto summary = summarize(records);
  if (summary.corr && summary.line) {
    CHECK((*summary.corr < 0) == (summary.line->slope < 0));
  }
}

TEST_CASE("experiment CSV writers emit the documented columns") {
  const auto dir = oracles::scratch_dir("experiment_csv");
  std::vector<RunRecord> recs = {record_of(Scheme::kMseSingle, 0, 0.8, 0.1),
                                 record_of(Scheme::kMseSingle, 1, 0.9, 0.05)};

  write_records_csv(recs, dir / "records.csv");
  std::ifstream in(dir / "records.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "run_index,seed,ident_rate,min_dcf,stalled");
  int rows = 0;
  std::string line;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 2);

  const auto summary = summarize(recs);
  write_summary_csv(std::vector<SchemeSummary>{summary}, dir / "summary.csv");
  std::ifstream sin(dir / "summary.csv");
  std::getline(sin, header);
  CHECK(header ==
        "scheme,runs,excluded,ident_mean,ident_std,dcf_mean,dcf_std,corr,"
        "ols_slope,ols_intercept");
  std::getline(sin, line);
  CHECK(line.rfind("mse_single,2,0,", 0) == 0);

  const auto hists = emit_histograms(recs, 4);
  write_histogram_csv(hists[0], dir / "hist.csv");
  std::ifstream hin(dir / "hist.csv");
  std::getline(hin, header);
  CHECK(header == "bin_lo,bin_hi,count");
}
