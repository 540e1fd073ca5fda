#include "bioid/committee.hpp"

#include <stdexcept>

#include "bioid/rng.hpp"
#include "bioid/train.hpp"

namespace bioid {

Committee::Committee(std::vector<MlpModel> members)
    : experts(std::move(members)) {
  if (experts.empty()) {
    throw std::invalid_argument("Committee: needs at least one expert");
  }
  for (const auto& e : experts) {
    if (!(e.topology == experts.front().topology)) {
      throw std::invalid_argument("Committee: experts must share one topology");
    }
  }
}

Eigen::VectorXd combine(const Committee& c, const Eigen::VectorXd& x) {
  Eigen::VectorXd sum = forward(c.experts.front(), x);
  for (std::size_t i = 1; i < c.experts.size(); ++i) {
    sum += forward(c.experts[i], x);
  }
  return sum / static_cast<double>(c.experts.size());
}

double average_expert_mse(const Committee& c, const LabeledDataset& data) {
  double acc = 0.0;
  for (const auto& e : c.experts) acc += mse(e, data);
  return acc / static_cast<double>(c.experts.size());
}

double committee_mse(const Committee& c, const LabeledDataset& data) {
  if (data.samples.empty()) {
    throw std::invalid_argument("committee_mse: empty dataset");
  }
  const int n = c.topology().output_dim;
  if (data.n_people != n || data.dims() != c.topology().input_dim) {
    throw std::invalid_argument("committee_mse: dataset does not match topology");
  }
  double sse = 0.0;
  for (const auto& s : data.samples) {
    const Eigen::VectorXd err =
        encode_target(s.person_id, n) - combine(c, s.features);
    sse += err.squaredNorm();
  }
  return sse / (static_cast<double>(data.samples.size()) * n);
}

double bem_reduction_check(int m_experts, long n_draws, std::uint64_t seed,
                           bool correlated) {
  if (m_experts < 1 || n_draws < 1) {
    throw std::invalid_argument("bem_reduction_check: need M >= 1, draws >= 1");
  }
  rng::Engine eng(seed);
  const double m = static_cast<double>(m_experts);
  double sum_avg_sq = 0.0;
  double sum_ind_sq = 0.0;
  for (long d = 0; d < n_draws; ++d) {
    double sum = 0.0;
    if (correlated) {
      const double v = rng::normal(eng);
      sum = m * v;
      sum_ind_sq += m * v * v;
    } else {
      for (int i = 0; i < m_experts; ++i) {
        const double v = rng::normal(eng);
        sum += v;
        sum_ind_sq += v * v;
      }
    }
    const double avg = sum / m;
    sum_avg_sq += avg * avg;
  }
  const double mse_avg = sum_avg_sq / static_cast<double>(n_draws);
  const double mean_mse = sum_ind_sq / (static_cast<double>(n_draws) * m);
  return mse_avg / mean_mse;
}

}  // namespace bioid
