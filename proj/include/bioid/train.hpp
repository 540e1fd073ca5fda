#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "bioid/dataset.hpp"
#include "bioid/mlp.hpp"

namespace bioid {

enum class TrainScheme { kMse, kMsereg };

struct TrainConfig {
  TrainScheme scheme = TrainScheme::kMse;
  int epochs = 10;  // accepted LM updates; 50 is the usual MSEREG budget
  double mu0 = 1e-3;
  double mu_up = 10.0;
  double mu_down = 0.1;
  double mu_max = 1e10;
  std::uint64_t seed = 0;  // weight-init seed, recorded for provenance

  static TrainConfig defaults_for(TrainScheme scheme);
};

// One attempted epoch. For kMse the objective is the training MSE; for
// kMsereg it is beta*E_D + alpha*E_W under the hyperparameters in effect
// during that epoch's accept decision.
struct EpochRecord {
  int epoch = 0;
  double objective_before = 0.0;
  double objective_after = 0.0;
  double mu = 0.0;  // damping that produced the accepted step
  bool accepted = false;
  int rejected_tries = 0;
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;  // effective parameters; kMsereg only
};

struct TrainReport {
  TrainScheme scheme = TrainScheme::kMse;
  std::vector<EpochRecord> epochs;
  double final_train_mse = 0.0;
  int accepted_steps = 0;
  int rejected_steps = 0;
  bool stalled = false;
  std::uint64_t seed = 0;
  // kMsereg only
  double final_alpha = 0.0;
  double final_beta = 1.0;
  double final_gamma = 0.0;
};

// Mean over all samples and all outputs of (target - output)^2, targets
// being the +/-1 encoding of each sample's person_id.
double mse(const MlpModel& m, const LabeledDataset& data);

// Stacked residuals e = target - output (sample-major, output-minor) and
// the matching model Jacobian.
void assemble_system(const MlpModel& m, const LabeledDataset& data,
                     Eigen::MatrixXd& jac, Eigen::VectorXd& resid);

// Solves (beta*JtJ + (alpha+mu) I) delta = beta*Jte - alpha*theta using the
// lower triangle of JtJ. Plain LM is alpha=0, beta=1.
Eigen::VectorXd lm_step(const Eigen::MatrixXd& jtj, const Eigen::VectorXd& jte,
                        const Eigen::VectorXd& theta, double mu, double alpha,
                        double beta);

// Levenberg-Marquardt on the plain MSE objective.
std::pair<MlpModel, TrainReport> train_lm(const MlpModel& m0,
                                          const LabeledDataset& data,
                                          const TrainConfig& cfg);

// Levenberg-Marquardt with Bayesian regularization: minimizes
// beta*E_D + alpha*E_W with (alpha, beta, gamma) re-estimated after every
// accepted step from the Gauss-Newton Hessian approximation.
std::pair<MlpModel, TrainReport> train_lm_bayes(const MlpModel& m0,
                                                const LabeledDataset& data,
                                                const TrainConfig& cfg);

// CSV: epoch,objective,mu,accepted
void write_report_csv(const TrainReport& report, std::ostream& out);

}  // namespace bioid
