#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "radolearn/dataset.hpp"

namespace rado {

struct Model;

struct FoldErrors {
    std::string learner;
    std::vector<double> errors;  // one held-out error per fold, in [0,1]
};

/// Fraction of rows misclassified by sign(theta . x), with sign(0) = +1.
double test_error(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                  const Eigen::VectorXd& y);
double test_error(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Mean error of the aggregate learner minus the best peer's mean error;
/// negative means it beats every peer.
double delta_metric(double drl_error, const std::vector<double>& peer_errors);

/// One-sided paired t-test p-value for H1: mean(a - b) < 0. A zero-variance
/// difference vector yields 0 if the mean difference is negative, else 1.
double paired_t_pvalue_less(const std::vector<double>& a, const std::vector<double>& b);

/// Benjamini-Hochberg step-up at level alpha: reject the k smallest p-values
/// where k = max{ k : p_(k) <= k * alpha / n }. Returns per-input decisions.
std::vector<bool> bh_reject(const std::vector<double>& pvalues, double alpha);

/// Fraction of peers whose fold errors are significantly higher than the
/// aggregate learner's, under BH-corrected one-sided paired t-tests.
double q_metric(const FoldErrors& drl, const std::vector<FoldErrors>& peers, double alpha = 0.05);

/// The entity-resolved ceiling: the same CV protocol as the peers, run on the
/// complete feature space.
FoldErrors oracle_baseline(const Dataset& data, const std::vector<double>& grid, int folds,
                           std::uint64_t seed);

}  // namespace rado
