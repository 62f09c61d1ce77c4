#include "radolearn/learner.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>

#include "radolearn/common.hpp"
#include "radolearn/eval.hpp"

namespace rado {

nlohmann::json Model::to_json() const {
    return {{"theta", std::vector<double>(theta.data(), theta.data() + theta.size())},
            {"trained_on", trained_on},
            {"gamma", gamma_used}};
}

Model Model::from_json(const nlohmann::json& j) {
    Model m;
    const auto t = j.at("theta").get<std::vector<double>>();
    m.theta = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    m.trained_on = j.at("trained_on").get<std::string>();
    m.gamma_used = j.at("gamma").get<double>();
    return m;
}

void Regularizer::validate() const {
    if (diag.size() == 0) throw std::invalid_argument("Regularizer: empty diagonal");
    for (Eigen::Index i = 0; i < diag.size(); ++i) {
        if (!(diag(i) > 0.0)) throw std::invalid_argument("Regularizer: diagonal must be > 0");
    }
}

Regularizer uniform_regularizer(int dim, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("uniform_regularizer: gamma must be > 0");
    Regularizer r;
    r.diag = Eigen::VectorXd::Constant(dim, gamma);
    return r;
}

Regularizer make_drl_regularizer(int dim, const std::vector<int>& shared_idx, double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("make_drl_regularizer: gamma must be > 0");
    Regularizer r;
    r.diag = Eigen::VectorXd::Constant(dim, gamma);
    for (int k : shared_idx) {
        if (k < 0 || k >= dim)
            throw std::invalid_argument("make_drl_regularizer: shared index out of range");
        r.diag(k) = 1.0;
    }
    return r;
}

double square_loss(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& theta, const Regularizer& reg) {
    if (x.rows() != y.size() || x.cols() != theta.size() || theta.size() != reg.diag.size())
        throw std::invalid_argument("square_loss: dimension mismatch");
    if (x.rows() == 0) throw std::invalid_argument("square_loss: empty sample");
    double data_term = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double margin = 1.0 - y(i) * theta.dot(x.row(i).transpose());
        data_term += margin * margin;
    }
    return data_term / static_cast<double>(x.rows()) +
           theta.dot(reg.diag.cwiseProduct(theta));
}

double square_loss(const Dataset& data, const Eigen::VectorXd& theta, const Regularizer& reg) {
    return square_loss(data.x, data.y, theta, reg);
}

double m_loss(const std::vector<Eigen::VectorXd>& rados, const Eigen::VectorXd& theta) {
    if (rados.empty()) throw std::invalid_argument("m_loss: empty observation list");
    const double n = static_cast<double>(rados.size());
    double mean = 0.0;
    for (const Eigen::VectorXd& pi : rados) mean += theta.dot(pi);
    mean /= n;
    double var = 0.0;
    for (const Eigen::VectorXd& pi : rados) {
        const double dev = theta.dot(pi) - mean;
        var += dev * dev;
    }
    var /= n;
    return -(mean - var);
}

double m_loss(const RadoSet& rados, const Eigen::VectorXd& theta) {
    std::vector<Eigen::VectorXd> vs;
    vs.reserve(rados.blocks.size());
    for (const BlockRado& b : rados.blocks) vs.push_back(b.v);
    return m_loss(vs, theta);
}

double m_loss_regularized(const RadoSet& rados, const Eigen::VectorXd& theta,
                          const Regularizer& reg) {
    return m_loss(rados, theta) + static_cast<double>(rados.blocks.size()) / 4.0 *
                                      theta.dot(reg.diag.cwiseProduct(theta));
}

namespace {

// Solves (A + jitter*I) theta = b with escalating jitter, and verifies the
// residual of the returned solution.
Eigen::VectorXd spd_solve(Eigen::MatrixXd a, const Eigen::VectorXd& b) {
    const double bnorm = b.norm();
    double jitter = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd lhs = a;
        if (jitter > 0.0) lhs.diagonal().array() += jitter;
        const Eigen::LLT<Eigen::MatrixXd> llt(lhs);
        if (llt.info() == Eigen::Success) {
            Eigen::VectorXd theta = llt.solve(b);
            const double resid = (lhs * theta - b).norm();
            const double scale = std::max({bnorm, lhs.norm() * theta.norm(), 1e-300});
            if (resid <= 1e-8 * scale && theta.allFinite()) return theta;
        }
        jitter = jitter == 0.0 ? 1e-12 : jitter * 10.0;
    }
    throw std::runtime_error("spd_solve: system not positive definite after jitter escalation");
}

}  // namespace

Model solve_examples(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Regularizer& reg,
                     const std::string& descriptor) {
    reg.validate();
    if (x.rows() == 0) throw std::invalid_argument("solve_examples: empty sample");
    if (x.rows() != y.size() || x.cols() != reg.diag.size())
        throw std::invalid_argument("solve_examples: dimension mismatch");

    const Eigen::Index d = x.cols();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const Eigen::VectorXd xi = x.row(i).transpose();
        a.noalias() += xi * xi.transpose();
        rhs += y(i) * xi;
    }
    a.diagonal() += static_cast<double>(x.rows()) * reg.diag;

    Model model;
    model.theta = spd_solve(std::move(a), rhs);
    model.trained_on = descriptor;
    return model;
}

Model solve_examples(const Dataset& data, const Regularizer& reg, const std::string& descriptor) {
    return solve_examples(data.x, data.y, reg, descriptor);
}

Model solve_rados(const RadoSet& rados, const Regularizer& reg, const std::string& descriptor) {
    reg.validate();
    if (rados.blocks.empty()) throw std::invalid_argument("solve_rados: empty block set");
    const Eigen::Index d = rados.blocks.front().v.size();
    if (d != reg.diag.size()) throw std::invalid_argument("solve_rados: dimension mismatch");

    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(d);
    for (const BlockRado& b : rados.blocks) {
        a.noalias() += b.v * b.v.transpose();
        rhs += b.v;
    }
    a.diagonal() += static_cast<double>(rados.blocks.size()) * reg.diag;

    Model model;
    model.theta = spd_solve(std::move(a), rhs);
    model.trained_on = descriptor;
    return model;
}

double surrogate_square_loss(const RadoSet& rados, const Eigen::VectorXd& theta,
                             const Regularizer& reg) {
    if (rados.blocks.empty()) throw std::invalid_argument("surrogate_square_loss: empty set");
    double data_term = 0.0;
    for (const BlockRado& b : rados.blocks) {
        const double margin = 1.0 - theta.dot(b.v);
        data_term += margin * margin;
    }
    return data_term / static_cast<double>(rados.blocks.size()) +
           theta.dot(reg.diag.cwiseProduct(theta));
}

double cv_gamma_rados(const RadoSet& rados, const std::vector<double>& grid, int folds,
                      std::uint64_t seed) {
    if (grid.empty()) throw std::invalid_argument("cv_gamma_rados: empty grid");
    const std::size_t n = rados.blocks.size();
    if (n < 2) {
        warn("cv_gamma_rados: fewer than 2 blocks, returning smallest gamma");
        return *std::min_element(grid.begin(), grid.end());
    }
    if (static_cast<std::size_t>(folds) > n) {
        warn("cv_gamma_rados: reducing folds to the number of blocks");
        folds = static_cast<int>(n);
    }
    const std::vector<int> fold = plain_folds(n, folds, seed);

    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());

    double best_gamma = sorted_grid.front();
    double best_score = std::numeric_limits<double>::infinity();
    for (double gamma : sorted_grid) {
        const Regularizer reg = make_drl_regularizer(rados.dim, rados.shared_idx, gamma);
        double score = 0.0;
        int used = 0;
        for (int f = 0; f < folds; ++f) {
            RadoSet train, test;
            train.dim = test.dim = rados.dim;
            train.shared_idx = test.shared_idx = rados.shared_idx;
            for (std::size_t i = 0; i < n; ++i) {
                (fold[i] == f ? test : train).blocks.push_back(rados.blocks[i]);
            }
            if (train.blocks.empty() || test.blocks.empty()) continue;
            const Model model = solve_rados(train, reg);
            score += m_loss_regularized(test, model.theta, reg);
            ++used;
        }
        if (used == 0) continue;
        score /= used;
        if (score < best_score) {  // ties keep the smaller gamma
            best_score = score;
            best_gamma = gamma;
        }
    }
    return best_gamma;
}

double select_gamma_examples(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<double>& grid, int folds, std::uint64_t seed) {
    if (grid.empty()) throw std::invalid_argument("select_gamma_examples: empty grid");
    const std::vector<int> fold =
        stratified_folds(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                         folds, seed);

    std::vector<double> sorted_grid = grid;
    std::sort(sorted_grid.begin(), sorted_grid.end());

    double best_gamma = sorted_grid.front();
    double best_err = std::numeric_limits<double>::infinity();
    for (double gamma : sorted_grid) {
        const Regularizer reg = uniform_regularizer(static_cast<int>(x.cols()), gamma);
        double err = 0.0;
        int used = 0;
        for (int f = 0; f < folds; ++f) {
            std::vector<Eigen::Index> train_rows, test_rows;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                (fold[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
            }
            if (train_rows.empty() || test_rows.empty()) continue;
            Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_rows.size()), x.cols());
            Eigen::VectorXd yt(static_cast<Eigen::Index>(train_rows.size()));
            for (std::size_t i = 0; i < train_rows.size(); ++i) {
                xt.row(static_cast<Eigen::Index>(i)) = x.row(train_rows[i]);
                yt(static_cast<Eigen::Index>(i)) = y(train_rows[i]);
            }
            const Model model = solve_examples(xt, yt, reg);
            double wrong = 0.0;
            for (Eigen::Index i : test_rows) {
                if (model.predict(x.row(i).transpose()) != y(i)) wrong += 1.0;
            }
            err += wrong / static_cast<double>(test_rows.size());
            ++used;
        }
        if (used == 0) continue;
        err /= used;
        if (err < best_err) {
            best_err = err;
            best_gamma = gamma;
        }
    }
    return best_gamma;
}

CvExamplesResult cv_examples(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             const std::vector<double>& grid, int folds, std::uint64_t seed,
                             const std::string& descriptor) {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < y.size(); ++i) (y(i) > 0 ? pos : neg) = true;
    if (!pos || !neg) throw std::invalid_argument("cv_examples: single-class data");

    const std::vector<int> fold =
        stratified_folds(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                         folds, derive_seed(seed, 1));

    CvExamplesResult out;
    for (int f = 0; f < folds; ++f) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            (fold[static_cast<std::size_t>(i)] == f ? test_rows : train_rows).push_back(i);
        }
        if (test_rows.empty()) continue;
        Eigen::MatrixXd xt(static_cast<Eigen::Index>(train_rows.size()), x.cols());
        Eigen::VectorXd yt(static_cast<Eigen::Index>(train_rows.size()));
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            xt.row(static_cast<Eigen::Index>(i)) = x.row(train_rows[i]);
            yt(static_cast<Eigen::Index>(i)) = y(train_rows[i]);
        }
        const double gamma =
            select_gamma_examples(xt, yt, grid, folds, derive_seed(seed, 2, static_cast<std::uint64_t>(f)));
        Model model = solve_examples(xt, yt, uniform_regularizer(static_cast<int>(x.cols()), gamma),
                                     descriptor);
        model.gamma_used = gamma;
        double wrong = 0.0;
        for (Eigen::Index i : test_rows) {
            if (model.predict(x.row(i).transpose()) != y(i)) wrong += 1.0;
        }
        out.fold_errors.push_back(wrong / static_cast<double>(test_rows.size()));
    }

    const double gamma = select_gamma_examples(x, y, grid, folds, derive_seed(seed, 3));
    out.model = solve_examples(x, y, uniform_regularizer(static_cast<int>(x.cols()), gamma),
                               descriptor);
    out.model.gamma_used = gamma;
    return out;
}

CvExamplesResult cv_peer_baseline(const PeerView& view, const std::vector<double>& grid, int folds,
                                  std::uint64_t seed) {
    return cv_examples(view.x, view.y, grid, folds, seed,
                       "peer_" + std::to_string(view.peer_id));
}

}  // namespace rado
