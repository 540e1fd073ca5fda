#include "bioid/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "bioid/rng.hpp"

namespace bioid {

namespace {

void check_topology(const MlpTopology& t) {
  if (t.input_dim < 1 || t.hidden_dim < 1 || t.output_dim < 1) {
    throw std::invalid_argument("MlpTopology: all dimensions must be >= 1");
  }
}

}  // namespace

bool operator==(const MlpTopology& a, const MlpTopology& b) {
  return a.input_dim == b.input_dim && a.hidden_dim == b.hidden_dim &&
         a.output_dim == b.output_dim;
}

Eigen::VectorXd MlpModel::flatten() const {
  const int h = topology.hidden_dim;
  const int p = topology.input_dim;
  const int n = topology.output_dim;
  Eigen::VectorXd v(topology.param_count());
  int at = 0;
  for (int u = 0; u < h; ++u)
    for (int j = 0; j < p; ++j) v(at++) = w1(u, j);
  for (int u = 0; u < h; ++u) v(at++) = b1(u);
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < h; ++u) v(at++) = w2(i, u);
  for (int i = 0; i < n; ++i) v(at++) = b2(i);
  return v;
}

MlpModel MlpModel::unflatten(const MlpTopology& topology,
                             const Eigen::VectorXd& params) {
  check_topology(topology);
  if (params.size() != topology.param_count()) {
    throw std::invalid_argument(
        "unflatten: expected " + std::to_string(topology.param_count()) +
        " parameters, got " + std::to_string(params.size()));
  }
  const int h = topology.hidden_dim;
  const int p = topology.input_dim;
  const int n = topology.output_dim;
  MlpModel m;
  m.topology = topology;
  m.w1.resize(h, p);
  m.b1.resize(h);
  m.w2.resize(n, h);
  m.b2.resize(n);
  int at = 0;
  for (int u = 0; u < h; ++u)
    for (int j = 0; j < p; ++j) m.w1(u, j) = params(at++);
  for (int u = 0; u < h; ++u) m.b1(u) = params(at++);
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < h; ++u) m.w2(i, u) = params(at++);
  for (int i = 0; i < n; ++i) m.b2(i) = params(at++);
  return m;
}

MlpModel init_weights(const MlpTopology& topology, std::uint64_t seed) {
  check_topology(topology);
  rng::Engine eng(seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(topology.input_dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(topology.hidden_dim));
  Eigen::VectorXd params(topology.param_count());
  const int layer1 = topology.hidden_dim * topology.input_dim + topology.hidden_dim;
  int at = 0;
  for (; at < layer1; ++at) params(at) = rng::uniform(eng, -a1, a1);
  for (; at < params.size(); ++at) params(at) = rng::uniform(eng, -a2, a2);
  return MlpModel::unflatten(topology, params);
}

Eigen::VectorXd forward(const MlpModel& m, const Eigen::VectorXd& x) {
  if (x.size() != m.topology.input_dim) {
    throw std::invalid_argument("forward: input has " +
                                std::to_string(x.size()) + " entries, expected " +
                                std::to_string(m.topology.input_dim));
  }
  if (!x.allFinite()) {
    throw std::invalid_argument("forward: non-finite input");
  }
  const Eigen::VectorXd hidden = (m.w1 * x + m.b1).array().tanh();
  return m.w2 * hidden + m.b2;
}

void jacobian_into(const MlpModel& m, const Eigen::VectorXd& x,
                   Eigen::Ref<Eigen::MatrixXd> out) {
  const int h = m.topology.hidden_dim;
  const int p = m.topology.input_dim;
  const int n = m.topology.output_dim;
  if (x.size() != p || !x.allFinite()) {
    throw std::invalid_argument("jacobian: bad input vector");
  }
  if (out.rows() != n || out.cols() != m.topology.param_count()) {
    throw std::invalid_argument("jacobian: bad output shape");
  }

  const Eigen::VectorXd hidden = (m.w1 * x + m.b1).array().tanh();
  const Eigen::VectorXd dhidden =
      (1.0 - hidden.array().square()).matrix();  // tanh'

  out.setZero();
  // dO[i]/dw1(u,j) = w2(i,u) * tanh'(u) * x(j); dO[i]/db1(u) drops x(j).
  const Eigen::MatrixXd gate = m.w2 * dhidden.asDiagonal();  // n x h
  for (int u = 0; u < h; ++u) {
    out.block(0, u * p, n, p).noalias() = gate.col(u) * x.transpose();
  }
  out.block(0, h * p, n, h) = gate;
  // dO[i]/dw2(i,u) = hidden(u); dO[i]/db2(i) = 1.
  const int w2_base = h * p + h;
  for (int i = 0; i < n; ++i) {
    out.block(i, w2_base + i * h, 1, h) = hidden.transpose();
    out(i, w2_base + n * h + i) = 1.0;
  }
}

Eigen::MatrixXd jacobian(const MlpModel& m, const Eigen::VectorXd& x) {
  Eigen::MatrixXd out(m.topology.output_dim, m.topology.param_count());
  jacobian_into(m, x, out);
  return out;
}

}  // namespace bioid
