#include "radolearn/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <numeric>

#include "radolearn/learner.hpp"

namespace rado {

double test_error(const Eigen::VectorXd& theta, const Eigen::MatrixXd& x,
                  const Eigen::VectorXd& y) {
    if (x.rows() == 0) throw std::invalid_argument("test_error: empty test set");
    if (x.cols() != theta.size() || x.rows() != y.size())
        throw std::invalid_argument("test_error: dimension mismatch");
    Eigen::Index wrong = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double pred = theta.dot(x.row(i).transpose()) >= 0.0 ? 1.0 : -1.0;
        if (pred != y(i)) ++wrong;
    }
    return static_cast<double>(wrong) / static_cast<double>(x.rows());
}

double test_error(const Model& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    return test_error(model.theta, x, y);
}

double delta_metric(double drl_error, const std::vector<double>& peer_errors) {
    if (peer_errors.empty()) throw std::invalid_argument("delta_metric: no peers");
    return drl_error - *std::min_element(peer_errors.begin(), peer_errors.end());
}

double paired_t_pvalue_less(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("paired t-test: unequal fold counts");
    const std::size_t n = a.size();
    if (n < 2) throw std::invalid_argument("paired t-test: need at least 2 folds");

    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dev = (a[i] - b[i]) - mean;
        ss += dev * dev;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return mean < 0.0 ? 0.0 : 1.0;

    const double t = mean / (sd / std::sqrt(static_cast<double>(n)));
    const boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::cdf(dist, t);
}

std::vector<bool> bh_reject(const std::vector<double>& pvalues, double alpha) {
    const std::size_t n = pvalues.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return pvalues[i] < pvalues[j]; });

    std::size_t cutoff = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        if (pvalues[order[k - 1]] <=
            static_cast<double>(k) * alpha / static_cast<double>(n)) {
            cutoff = k;
        }
    }
    std::vector<bool> reject(n, false);
    for (std::size_t k = 0; k < cutoff; ++k) reject[order[k]] = true;
    return reject;
}

double q_metric(const FoldErrors& drl, const std::vector<FoldErrors>& peers, double alpha) {
    if (peers.empty()) throw std::invalid_argument("q_metric: no peers");
    std::vector<double> pvalues;
    for (const FoldErrors& peer : peers) {
        pvalues.push_back(paired_t_pvalue_less(drl.errors, peer.errors));
    }
    const std::vector<bool> reject = bh_reject(pvalues, alpha);
    const auto rejected = std::count(reject.begin(), reject.end(), true);
    return static_cast<double>(rejected) / static_cast<double>(peers.size());
}

FoldErrors oracle_baseline(const Dataset& data, const std::vector<double>& grid, int folds,
                           std::uint64_t seed) {
    const CvExamplesResult cv = cv_examples(data.x, data.y, grid, folds, seed, "oracle");
    return {"oracle", cv.fold_errors};
}

}  // namespace rado
