#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "bioid/dataset.hpp"
#include "bioid/mlp.hpp"

namespace bioid {

// Ordered set of experts sharing one topology; outputs are combined by
// plain ensemble averaging.
struct Committee {
  std::vector<MlpModel> experts;

  explicit Committee(std::vector<MlpModel> members);

  int size() const { return static_cast<int>(experts.size()); }
  const MlpTopology& topology() const { return experts.front().topology; }
};

// Elementwise mean of the expert outputs.
Eigen::VectorXd combine(const Committee& c, const Eigen::VectorXd& x);

// Mean of the members' individual MSEs.
double average_expert_mse(const Committee& c, const LabeledDataset& data);

// MSE of the averaged output; never exceeds average_expert_mse.
double committee_mse(const Committee& c, const LabeledDataset& data);

// Monte-Carlo check of the 1/M ensemble error reduction: draws M zero-mean
// unit-variance error streams (one shared stream when correlated) and
// returns MSE[mean of streams] / mean(MSE[stream]). Expected 1/M under
// independence, 1 for fully correlated streams.
double bem_reduction_check(int m_experts, long n_draws, std::uint64_t seed,
                           bool correlated = false);

}  // namespace bioid
