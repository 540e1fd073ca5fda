#pragma once

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <utility>
#include <vector>

#include "bioid/committee.hpp"
#include "bioid/dataset.hpp"
#include "bioid/mlp.hpp"

namespace bioid {

// N x N x K score array: at(i, j, k) is the similarity of trial k of
// person i against person j's output unit. Higher means more similar.
class SimilarityTensor {
 public:
  SimilarityTensor(int n_people, int n_trials);

  double& at(int i, int j, int k) { return s_[index(i, j, k)]; }
  double at(int i, int j, int k) const { return s_[index(i, j, k)]; }

  int n_people() const { return n_; }
  int n_trials() const { return k_; }

 private:
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * n_ + j) * k_ + k;
  }

  int n_ = 0;
  int k_ = 0;
  std::vector<double> s_;
};

// Maps a normalized feature vector to N similarity scores.
using Scorer = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

Scorer make_scorer(const MlpModel& m);
Scorer make_scorer(const Committee& c);

// Requires exactly K trials per person; k indexes each person's trials in
// ascending trial_id order.
SimilarityTensor build_tensor(const Scorer& scorer, const LabeledDataset& test,
                              const Normalizer& normalizer);

// Fraction of (person, trial) pairs whose diagonal score strictly beats
// every off-diagonal score in its row; ties count as errors.
double identification_rate(const SimilarityTensor& t);

// Genuine (diagonal) and impostor (off-diagonal) scores, flattened in
// (i, j, k) order. |intra| = N*K, |inter| = N*(N-1)*K.
struct ScoreSplit {
  std::vector<double> intra;
  std::vector<double> inter;
};

ScoreSplit split_scores(const SimilarityTensor& t);

// Accept iff score >= threshold. Returns (P_fa, P_miss).
std::pair<double, double> far_frr_at(const ScoreSplit& split,
                                     double threshold);

struct OperatingPoint {
  double threshold = 0.0;
  double p_fa = 0.0;
  double p_miss = 0.0;
  double probit_fa = 0.0;
  double probit_miss = 0.0;
};

// Operating points at every distinct observed score plus -inf/+inf
// sentinels, ordered by increasing threshold. Probit coordinates clamp
// probabilities to [1/(2n), 1 - 1/(2n)] before the transform.
struct DetCurve {
  std::vector<OperatingPoint> points;
};

DetCurve det_curve(const ScoreSplit& split);

struct DcfResult {
  double min_dcf = 0.0;
  double threshold = 0.0;
  double c_miss = 1.0;
  double c_fa = 1.0;
  double p_true = 0.5;
};

// DCF(t) = C_miss*P_miss(t)*P_true + C_fa*P_fa(t)*(1 - P_true), minimized
// over every distinct observed score and the +/-inf sentinels (the DCF is
// piecewise constant between observed scores, so this sweep is exact).
// Ties resolve to the lowest threshold.
DcfResult min_dcf(const ScoreSplit& split, double c_miss = 1.0,
                  double c_fa = 1.0, double p_true = 0.5);

// CSV: threshold,p_fa,p_miss,probit_fa,probit_miss
void write_det_csv(const DetCurve& curve, std::ostream& out);

// Minimal polyline plot on probit axes.
void write_det_svg(const DetCurve& curve, std::ostream& out);

}  // namespace bioid
