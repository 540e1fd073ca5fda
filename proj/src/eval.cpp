#include "bioid/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "bioid/csv.hpp"
#include "bioid/errors.hpp"
#include "bioid/stats.hpp"

namespace bioid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distinct observed scores plus the +/-inf sentinels, ascending.
std::vector<double> candidate_thresholds(const std::vector<double>& intra_sorted,
                                         const std::vector<double>& inter_sorted) {
  std::vector<double> all;
  all.reserve(intra_sorted.size() + inter_sorted.size() + 2);
  all.push_back(-kInf);
  std::merge(intra_sorted.begin(), intra_sorted.end(), inter_sorted.begin(),
             inter_sorted.end(), std::back_inserter(all));
  all.push_back(kInf);
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return all;
}

// P_fa = fraction of impostor scores >= t, P_miss = fraction of genuine
// scores < t; both lists sorted ascending.
std::pair<double, double> rates_sorted(const std::vector<double>& intra_sorted,
                                       const std::vector<double>& inter_sorted,
                                       double threshold) {
  const auto below_intra = static_cast<double>(
      std::lower_bound(intra_sorted.begin(), intra_sorted.end(), threshold) -
      intra_sorted.begin());
  const auto below_inter = static_cast<double>(
      std::lower_bound(inter_sorted.begin(), inter_sorted.end(), threshold) -
      inter_sorted.begin());
  const double p_miss = below_intra / static_cast<double>(intra_sorted.size());
  const double p_fa = (static_cast<double>(inter_sorted.size()) - below_inter) /
                      static_cast<double>(inter_sorted.size());
  return {p_fa, p_miss};
}

double probit_clamped(double p, std::size_t n) {
  const double lo = 1.0 / (2.0 * static_cast<double>(n));
  return stats::inverse_normal_cdf(std::clamp(p, lo, 1.0 - lo));
}

void check_split(const ScoreSplit& split, const char* what) {
  if (split.intra.empty() || split.inter.empty()) {
    throw std::invalid_argument(std::string(what) + ": empty score split");
  }
}

}  // namespace

SimilarityTensor::SimilarityTensor(int n_people, int n_trials)
    : n_(n_people), k_(n_trials) {
  if (n_people < 1 || n_trials < 1) {
    throw std::invalid_argument("SimilarityTensor: dimensions must be >= 1");
  }
  s_.assign(static_cast<std::size_t>(n_people) * n_people * n_trials, 0.0);
}

Scorer make_scorer(const MlpModel& m) {
  return [m](const Eigen::VectorXd& x) { return forward(m, x); };
}

Scorer make_scorer(const Committee& c) {
  return [c](const Eigen::VectorXd& x) { return combine(c, x); };
}

SimilarityTensor build_tensor(const Scorer& scorer, const LabeledDataset& test,
                              const Normalizer& normalizer) {
  if (test.samples.empty()) {
    throw DataError("build_tensor: empty test set");
  }
  const auto trials = test.trials_per_person();
  if (!trials) {
    throw DataError("build_tensor: ragged trials per person");
  }
  SimilarityTensor t(test.n_people, *trials);
  // Samples are sorted by (person, trial); k is the per-person rank of the
  // trial, not the raw trial_id (test splits start above the train trials).
  int prev_person = -1;
  int k = 0;
  for (const auto& s : test.samples) {
    k = (s.person_id == prev_person) ? k + 1 : 0;
    prev_person = s.person_id;
    const Eigen::VectorXd scores = scorer(normalizer.apply(s.features));
    if (scores.size() != test.n_people) {
      throw std::invalid_argument(
          "build_tensor: scorer output dimension does not match people count");
    }
    if (!scores.allFinite()) {
      throw std::invalid_argument("build_tensor: non-finite score");
    }
    for (int j = 0; j < test.n_people; ++j) {
      t.at(s.person_id, j, k) = scores(j);
    }
  }
  return t;
}

double identification_rate(const SimilarityTensor& t) {
  const int n = t.n_people();
  const int trials = t.n_trials();
  long successes = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < trials; ++k) {
      const double own = t.at(i, i, k);
      bool win = true;
      for (int j = 0; j < n && win; ++j) {
        if (j != i && !(own > t.at(i, j, k))) win = false;  // ties are errors
      }
      if (win) ++successes;
    }
  }
  return static_cast<double>(successes) / (static_cast<double>(n) * trials);
}

ScoreSplit split_scores(const SimilarityTensor& t) {
  const int n = t.n_people();
  if (n < 2) {
    throw DataError("split_scores: verification undefined for N=1");
  }
  const int trials = t.n_trials();
  ScoreSplit split;
  split.intra.reserve(static_cast<std::size_t>(n) * trials);
  split.inter.reserve(static_cast<std::size_t>(n) * (n - 1) * trials);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < trials; ++k) {
        (i == j ? split.intra : split.inter).push_back(t.at(i, j, k));
      }
    }
  }
  return split;
}

std::pair<double, double> far_frr_at(const ScoreSplit& split, double threshold) {
  check_split(split, "far_frr_at");
  double above_inter = 0.0;
  for (double s : split.inter) {
    if (s >= threshold) ++above_inter;
  }
  double below_intra = 0.0;
  for (double s : split.intra) {
    if (s < threshold) ++below_intra;
  }
  return {above_inter / static_cast<double>(split.inter.size()),
          below_intra / static_cast<double>(split.intra.size())};
}

DetCurve det_curve(const ScoreSplit& split) {
  check_split(split, "det_curve");
  std::vector<double> intra = split.intra;
  std::vector<double> inter = split.inter;
  std::sort(intra.begin(), intra.end());
  std::sort(inter.begin(), inter.end());

  DetCurve curve;
  for (double t : candidate_thresholds(intra, inter)) {
    const auto [p_fa, p_miss] = rates_sorted(intra, inter, t);
    OperatingPoint pt;
    pt.threshold = t;
    pt.p_fa = p_fa;
    pt.p_miss = p_miss;
    pt.probit_fa = probit_clamped(p_fa, inter.size());
    pt.probit_miss = probit_clamped(p_miss, intra.size());
    curve.points.push_back(pt);
  }
  return curve;
}

DcfResult min_dcf(const ScoreSplit& split, double c_miss, double c_fa,
                  double p_true) {
  check_split(split, "min_dcf");
  if (!(c_miss > 0.0) || !(c_fa > 0.0) || !(p_true > 0.0 && p_true < 1.0)) {
    throw std::invalid_argument(
        "min_dcf: costs must be positive and p_true in (0,1)");
  }
  std::vector<double> intra = split.intra;
  std::vector<double> inter = split.inter;
  std::sort(intra.begin(), intra.end());
  std::sort(inter.begin(), inter.end());

  DcfResult best;
  best.c_miss = c_miss;
  best.c_fa = c_fa;
  best.p_true = p_true;
  best.min_dcf = std::numeric_limits<double>::max();
  // Ascending sweep with strict improvement keeps the lowest threshold on
  // ties.
  for (double t : candidate_thresholds(intra, inter)) {
    const auto [p_fa, p_miss] = rates_sorted(intra, inter, t);
    const double dcf = c_miss * p_miss * p_true + c_fa * p_fa * (1.0 - p_true);
    if (dcf < best.min_dcf) {
      best.min_dcf = dcf;
      best.threshold = t;
    }
  }
  return best;
}

void write_det_csv(const DetCurve& curve, std::ostream& out) {
  out << "threshold,p_fa,p_miss,probit_fa,probit_miss\n";
  for (const auto& pt : curve.points) {
    out << csv::fmt(pt.threshold) << "," << csv::fmt(pt.p_fa) << ","
        << csv::fmt(pt.p_miss) << "," << csv::fmt(pt.probit_fa) << ","
        << csv::fmt(pt.probit_miss) << "\n";
  }
}

void write_det_svg(const DetCurve& curve, std::ostream& out) {
  constexpr int kSize = 600;
  constexpr int kMargin = 50;
  double lo = -4.0, hi = 4.0;
  for (const auto& pt : curve.points) {
    lo = std::min({lo, pt.probit_fa, pt.probit_miss});
    hi = std::max({hi, pt.probit_fa, pt.probit_miss});
  }
  const double span = hi - lo;
  const auto sx = [&](double v) {
    return kMargin + (v - lo) / span * (kSize - 2 * kMargin);
  };
  const auto sy = [&](double v) {
    return kSize - kMargin - (v - lo) / span * (kSize - 2 * kMargin);
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize
      << "\" height=\"" << kSize << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\""
      << kSize - 2 * kMargin << "\" height=\"" << kSize - 2 * kMargin
      << "\" fill=\"none\" stroke=\"black\"/>\n"
      << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 12
      << "\" text-anchor=\"middle\">probit(P_fa)</text>\n"
      << "<text x=\"14\" y=\"" << kSize / 2
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << kSize / 2
      << ")\">probit(P_miss)</text>\n"
      << "<polyline fill=\"none\" stroke=\"crimson\" stroke-width=\"1.5\" "
         "points=\"";
  for (const auto& pt : curve.points) {
    out << csv::fmt(sx(pt.probit_fa), 8) << "," << csv::fmt(sy(pt.probit_miss), 8)
        << " ";
  }
  out << "\"/>\n</svg>\n";
}

}  // namespace bioid
