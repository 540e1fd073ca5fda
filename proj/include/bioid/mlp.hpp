#pragma once

#include <Eigen/Core>

#include <cstdint>

namespace bioid {

struct MlpTopology {
  int input_dim = 9;
  int hidden_dim = 30;
  int output_dim = 22;

  int param_count() const {
    return hidden_dim * input_dim + hidden_dim + output_dim * hidden_dim +
           output_dim;
  }
};

bool operator==(const MlpTopology& a, const MlpTopology& b);

// Two-layer perceptron, tanh hidden units, linear outputs:
//   O = w2 * tanh(w1 * x + b1) + b2.
// The flattened parameter order is fixed: w1 row-major, b1, w2 row-major,
// b2. Checkpoints and the training Jacobian both rely on it.
struct MlpModel {
  MlpTopology topology;
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // output x hidden
  Eigen::VectorXd b2;  // output

  Eigen::VectorXd flatten() const;
  static MlpModel unflatten(const MlpTopology& topology,
                            const Eigen::VectorXd& params);
};

// Uniform weights in [-a, a], a = 1/sqrt(fan_in) per layer; draw order is
// the flattening order, so models are a pure function of (topology, seed).
MlpModel init_weights(const MlpTopology& topology, std::uint64_t seed);

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x);

// d O[j] / d theta_w, rows = outputs, columns in flattening order.
Eigen::MatrixXd jacobian(const MlpModel& m, const Eigen::VectorXd& x);
void jacobian_into(const MlpModel& m, const Eigen::VectorXd& x,
                   Eigen::Ref<Eigen::MatrixXd> out);

}  // namespace bioid
