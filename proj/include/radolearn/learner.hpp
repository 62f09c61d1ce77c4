#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <string>
#include <vector>

#include "radolearn/dataset.hpp"
#include "radolearn/rado.hpp"

namespace rado {

struct Model {
    Eigen::VectorXd theta;
    std::string trained_on;  // "peer_<j>", "drl", "oracle", ...
    double gamma_used = 0.0;

    /// sign(theta . x) with sign(0) = +1.
    double predict(const Eigen::VectorXd& x) const { return theta.dot(x) >= 0.0 ? 1.0 : -1.0; }

    nlohmann::json to_json() const;
    static Model from_json(const nlohmann::json& j);
};

/// Diagonal SPD regularization matrix.
struct Regularizer {
    Eigen::VectorXd diag;

    void validate() const;
};

Regularizer uniform_regularizer(int dim, double gamma);

/// Diagonal 1 on shared features, gamma on non-shared ones: estimates tied to
/// shared features are far more reliable than the rest, so they are penalized
/// at a fixed unit rate while gamma tunes the others.
Regularizer make_drl_regularizer(int dim, const std::vector<int>& shared_idx, double gamma);

/// (1/m) sum (1 - y_i theta.x_i)^2 + theta'Gamma theta
double square_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& theta, const Regularizer& reg);
double square_loss(const Dataset& data, const Eigen::VectorXd& theta, const Regularizer& reg);

/// Mean-variance criterion over a collection of observations:
///   -(E[theta.pi] - Var[theta.pi])
/// with population-normalized variance. With this scaling the square loss over
/// a sample equals 1 + (4/m) times the loss over its full 2^m observation set.
double m_loss(const std::vector<Eigen::VectorXd>& rados, const Eigen::VectorXd& theta);
double m_loss(const RadoSet& rados, const Eigen::VectorXd& theta);

/// m_loss plus (|rados|/4) * theta'Gamma theta, the regularized form matching
/// the square-loss identity above.
double m_loss_regularized(const RadoSet& rados, const Eigen::VectorXd& theta,
                          const Regularizer& reg);

/// Closed-form minimizer of the regularized square loss:
/// theta = (X X' + m Gamma)^{-1} pi_y, solved by Cholesky with diagonal
/// jitter escalation (1e-12, x10 per retry, 3 retries).
Model solve_examples(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Regularizer& reg,
                     const std::string& descriptor = "examples");
Model solve_examples(const Dataset& data, const Regularizer& reg,
                     const std::string& descriptor = "examples");

/// Closed-form minimizer of the regularized mean-variance loss over all
/// subset-sums of the crafted blocks: theta = (B B' + m* Gamma)^{-1} B 1,
/// where B stacks the block vectors in columns.
Model solve_rados(const RadoSet& rados, const Regularizer& reg,
                  const std::string& descriptor = "drl");

/// Square loss of the surrogate sample whose edge vectors are the blocks;
/// solve_rados returns its exact minimizer. Exposed for gradient checks.
double surrogate_square_loss(const RadoSet& rados, const Eigen::VectorXd& theta,
                             const Regularizer& reg);

/// Picks gamma from the grid by 10-fold cross-validation on the blocks: train
/// on 9 folds, score the held-out blocks with the regularized mean-variance
/// loss, average, take the argmin (ties to the smallest gamma).
double cv_gamma_rados(const RadoSet& rados, const std::vector<double>& grid, int folds,
                      std::uint64_t seed);

/// Inner gamma selection for example learners: stratified k-fold validation
/// error under gamma*I, argmin with ties to the smallest gamma.
double select_gamma_examples(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<double>& grid, int folds, std::uint64_t seed);

struct CvExamplesResult {
    Model model;                      // trained on all rows with the selected gamma
    std::vector<double> fold_errors;  // held-out error per outer fold
};

/// Local-peer protocol: outer stratified 10-fold CV on the peer's rows with
/// gamma re-selected per fold by an inner CV on the training part.
CvExamplesResult cv_peer_baseline(const PeerView& view, const std::vector<double>& grid, int folds,
                                  std::uint64_t seed);

/// Same CV protocol on an explicit example matrix (used by the peer baseline
/// and by the entity-resolved full-sample learner).
CvExamplesResult cv_examples(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<double>& grid, int folds, std::uint64_t seed,
                             const std::string& descriptor);

}  // namespace rado
