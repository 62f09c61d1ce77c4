#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <nlohmann/json.hpp>

#include "radolearn/common.hpp"
#include "radolearn/eval.hpp"
#include "radolearn/learner.hpp"
#include "radolearn/protocol.hpp"

using namespace rado;

namespace {

// Values on a coarse dyadic grid keep every sum exact in double, so the
// observation-set identities can be asserted bit for bit.
Dataset dyadic_dataset(int m, int d, std::uint64_t seed) {
    Rng rng(seed);
    Dataset ds;
    ds.x.resize(m, d);
    ds.y.resize(m);
    for (int i = 0; i < m; ++i) {
        for (int k = 0; k < d; ++k) {
            ds.x(i, k) = (static_cast<double>(rng.bounded(9)) - 4.0) / 4.0;
        }
        ds.y(i) = rng.bounded(2) ? 1.0 : -1.0;
    }
    for (int k = 0; k < d; ++k) ds.feature_names.push_back("f" + std::to_string(k));
    return ds;
}

Eigen::VectorXd dyadic_vector(int d, Rng& rng) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = (static_cast<double>(rng.bounded(17)) - 8.0) / 4.0;
    return v;
}

Eigen::VectorXd pi_y(const Dataset& ds) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(ds.d());
    for (Eigen::Index i = 0; i < ds.m(); ++i) out += ds.y(i) * ds.x.row(i).transpose();
    return out;
}

// Central finite differences of an arbitrary scalar objective.
template <typename F>
Eigen::VectorXd fd_gradient(const F& f, const Eigen::VectorXd& theta, double h = 1e-6) {
    Eigen::VectorXd grad(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        Eigen::VectorXd hi = theta, lo = theta;
        hi(i) += h;
        lo(i) -= h;
        grad(i) = (f(hi) - f(lo)) / (2.0 * h);
    }
    return grad;
}

// Plain gradient descent on the quadratic surrogate; independent of the
// Cholesky route.
Eigen::VectorXd gd_minimize_surrogate(const RadoSet& set, const Regularizer& reg) {
    const Eigen::Index d = set.blocks.front().v.size();
    const double n = static_cast<double>(set.blocks.size());
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd lin = Eigen::VectorXd::Zero(d);
    for (const BlockRado& b : set.blocks) {
        hess.noalias() += 2.0 / n * b.v * b.v.transpose();
        lin += 2.0 / n * b.v;
    }
    hess += 2.0 * reg.diag.asDiagonal().toDenseMatrix();

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    const double step = 2.0 / (eig.eigenvalues().minCoeff() + eig.eigenvalues().maxCoeff());

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(d);
    const double g0 = lin.norm();
    for (int it = 0; it < 500000; ++it) {
        const Eigen::VectorXd grad = hess * theta - lin;
        if (grad.norm() <= 1e-12 * std::max(1.0, g0)) break;
        theta -= step * grad;
    }
    return theta;
}

RadoSet random_rado_set(int n_blocks, int d, std::uint64_t seed) {
    Rng rng(seed);
    RadoSet set;
    set.dim = d;
    set.shared_idx = {d - 1};
    for (int i = 0; i < n_blocks; ++i) {
        BlockRado b;
        b.sig = {{rng.unit()}, rng.bounded(2) ? +1 : -1};
        b.u = 1.0;
        b.v.resize(d);
        for (int k = 0; k < d; ++k) b.v(k) = rng.unit() * 4.0 - 2.0;
        b.counts = {1, 1};
        set.blocks.push_back(std::move(b));
    }
    return set;
}

}  // namespace

TEST_CASE("square_loss basics") {
    Eigen::MatrixXd x(1, 2);
    x << 1, 0;
    Eigen::VectorXd y(1);
    y << 1;

    CHECK(square_loss(x, y, Eigen::Vector2d(0, 0), uniform_regularizer(2, 1e-3)) == 1.0);

    // perfectly scored example: only the penalty remains
    const Eigen::Vector2d theta(1, 3);
    const double eps = 1e-4;
    CHECK(square_loss(x, y, theta, uniform_regularizer(2, eps)) ==
          doctest::Approx(eps * 10.0).epsilon(1e-14));

    CHECK_THROWS(square_loss(x, y, Eigen::Vector3d(0, 0, 0), uniform_regularizer(3, 1.0)));
}

TEST_CASE("square_loss matches an independent summation oracle") {
    const Dataset ds = dyadic_dataset(15, 4, 3);
    Rng rng(8);
    const Eigen::VectorXd theta = dyadic_vector(4, rng);
    const Regularizer reg = uniform_regularizer(4, 0.5);

    // re-sum in reverse order with long double accumulation
    long double acc = 0.0L;
    for (Eigen::Index i = ds.m() - 1; i >= 0; --i) {
        const long double margin = 1.0L - static_cast<long double>(ds.y(i)) *
                                              static_cast<long double>(theta.dot(ds.x.row(i).transpose()));
        acc += margin * margin;
    }
    acc /= static_cast<long double>(ds.m());
    for (int k = 0; k < 4; ++k) {
        acc += static_cast<long double>(theta(k)) * 0.5L * static_cast<long double>(theta(k));
    }
    CHECK(square_loss(ds, theta, reg) ==
          doctest::Approx(static_cast<double>(acc)).epsilon(1e-13));
}

TEST_CASE("m_loss: zero classifier scores zero, empty list throws") {
    const Dataset ds = dyadic_dataset(4, 3, 5);
    const auto rados = enumerate_all_rados(ds);
    CHECK(m_loss(rados, Eigen::Vector3d::Zero()) == 0.0);
    CHECK_THROWS(m_loss(std::vector<Eigen::VectorXd>{}, Eigen::Vector3d::Zero()));
}

TEST_CASE("exhaustive observation set: mean and variance identities, exact") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const Dataset ds = dyadic_dataset(8, 4, seed);
        Rng rng(seed + 100);
        const Eigen::VectorXd theta = dyadic_vector(4, rng);
        const auto rados = enumerate_all_rados(ds);
        const double n = static_cast<double>(rados.size());

        double mean = 0.0;
        for (const auto& pi : rados) mean += theta.dot(pi);
        mean /= n;
        CHECK(mean == 0.5 * theta.dot(pi_y(ds)));  // exact on dyadic data

        double var = 0.0;
        for (const auto& pi : rados) {
            const double dev = theta.dot(pi) - mean;
            var += dev * dev;
        }
        var /= n;
        double quarter_sq = 0.0;
        for (Eigen::Index i = 0; i < ds.m(); ++i) {
            const double v = theta.dot(ds.x.row(i).transpose());
            quarter_sq += v * v;
        }
        CHECK(var == 0.25 * quarter_sq);
    }
}

TEST_CASE("exhaustive m_loss equals (m/4)(square_loss - 1)") {
    for (std::uint64_t seed : {4u, 5u}) {
        const Dataset ds = dyadic_dataset(9, 3, seed);
        Rng rng(seed + 50);
        const Eigen::VectorXd theta = dyadic_vector(3, rng);
        const auto rados = enumerate_all_rados(ds);
        const double m = static_cast<double>(ds.m());
        const double sql = square_loss(ds, theta, uniform_regularizer(3, 1.0)) -
                           theta.dot(theta);  // strip the penalty: Gamma = 0
        CHECK(m_loss(rados, theta) == doctest::Approx(m / 4.0 * (sql - 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("square loss identity with regularization holds on random instances") {
    Rng rng(2024);
    for (int trial = 0; trial < 40; ++trial) {
        const int m = 2 + static_cast<int>(rng.bounded(11));
        const int d = 2 + static_cast<int>(rng.bounded(5));
        Dataset ds;
        ds.x.resize(m, d);
        ds.y.resize(m);
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < d; ++k) ds.x(i, k) = rng.unit() * 2.0 - 1.0;
            ds.y(i) = rng.bounded(2) ? 1.0 : -1.0;
        }
        for (int k = 0; k < d; ++k) ds.feature_names.push_back("f");
        Eigen::VectorXd theta(d);
        for (int k = 0; k < d; ++k) theta(k) = rng.unit() * 4.0 - 2.0;
        Regularizer reg;
        reg.diag.resize(d);
        for (int k = 0; k < d; ++k) reg.diag(k) = 0.01 + rng.unit() * 10.0;

        const double lhs = square_loss(ds.x, ds.y, theta, reg);
        const double penalty = theta.dot(reg.diag.cwiseProduct(theta));
        const double rhs = 1.0 + 4.0 / m *
                                     (m_loss(enumerate_all_rados(ds), theta) +
                                      m / 4.0 * penalty);
        CHECK(std::abs(lhs - rhs) <= 1e-9 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("solve_examples: hand-checked system") {
    Eigen::MatrixXd x(2, 2);
    x << 1, 0, 0, 1;
    Eigen::VectorXd y(2);
    y << 1, -1;
    const Model m = solve_examples(x, y, uniform_regularizer(2, 1.0));
    CHECK(m.theta(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    CHECK(m.theta(1) == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));

    Eigen::MatrixXd empty(0, 2);
    Eigen::VectorXd no_y(0);
    CHECK_THROWS(solve_examples(empty, no_y, uniform_regularizer(2, 1.0)));
}

TEST_CASE("solve_examples: vanishing finite-difference gradient at the optimum") {
    const Dataset ds = dyadic_dataset(20, 5, 17);
    Regularizer reg;
    reg.diag.resize(5);
    Rng rng(18);
    for (int k = 0; k < 5; ++k) reg.diag(k) = 0.1 + rng.unit();
    const Model model = solve_examples(ds.x, ds.y, reg);

    auto objective = [&](const Eigen::VectorXd& t) { return square_loss(ds.x, ds.y, t, reg); };
    const double at_opt = fd_gradient(objective, model.theta).norm();
    const double at_zero = fd_gradient(objective, Eigen::VectorXd::Zero(5)).norm();
    CHECK(at_opt <= 1e-6 * at_zero);
}

TEST_CASE("solve_rados: single block matches the rank-one closed form") {
    RadoSet set = random_rado_set(1, 4, 31);
    const Eigen::VectorXd pi = set.blocks[0].v;
    const Model m = solve_rados(set, uniform_regularizer(4, 1.0));
    const Eigen::VectorXd expected = pi / (1.0 + pi.squaredNorm());
    CHECK((m.theta - expected).norm() < 1e-12);

    set.blocks.clear();
    CHECK_THROWS(solve_rados(set, uniform_regularizer(4, 1.0)));
}

TEST_CASE("solve_rados agrees with a gradient-descent oracle on the surrogate") {
    for (std::uint64_t seed : {7u, 8u, 9u}) {
        const RadoSet set = random_rado_set(6, 4, seed);
        Regularizer reg;
        reg.diag.resize(4);
        Rng rng(seed + 1);
        for (int k = 0; k < 4; ++k) reg.diag(k) = 0.2 + rng.unit() * 2.0;

        const Model closed = solve_rados(set, reg);
        const Eigen::VectorXd gd = gd_minimize_surrogate(set, reg);
        CHECK((closed.theta - gd).norm() <= 1e-6);

        auto objective = [&](const Eigen::VectorXd& t) {
            return surrogate_square_loss(set, t, reg);
        };
        const double at_opt = fd_gradient(objective, closed.theta).norm();
        const double at_zero = fd_gradient(objective, Eigen::VectorXd::Zero(4)).norm();
        CHECK(at_opt <= 1e-6 * at_zero);
    }
}

TEST_CASE("singleton blocks reduce the rado solver to the example solver") {
    // one high-resolution shared feature: every row becomes its own block
    Dataset raw = dyadic_dataset(16, 5, 23);
    for (int i = 0; i < 16; ++i) raw.x(i, 4) = i;
    raw = raw.with_shared({4});
    const BinningRule rule = fit_bins(raw, 16);
    const Dataset binned = apply_bins(raw, rule);
    const auto views = split_peers(binned, 2, 0.0, 3);
    const RadoSet set = craft_blocks(views);
    REQUIRE(set.size() == 16);

    const Regularizer reg = make_drl_regularizer(5, {4}, 0.7);
    const Model from_rados = solve_rados(set, reg);
    const Model from_examples = solve_examples(binned.x, binned.y, reg);
    CHECK((from_rados.theta - from_examples.theta).lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("make_drl_regularizer shapes the diagonal") {
    const Regularizer r = make_drl_regularizer(3, {2}, 100.0);
    CHECK(r.diag == Eigen::Vector3d(100, 100, 1));
    CHECK(make_drl_regularizer(4, {}, 1.0).diag == Eigen::Vector4d::Ones());
    CHECK_THROWS(make_drl_regularizer(3, {2}, 0.0));
    CHECK_THROWS(make_drl_regularizer(3, {2}, -1.0));
}

TEST_CASE("cv_gamma_rados: degenerate grids") {
    const RadoSet set = random_rado_set(12, 4, 55);
    CHECK(cv_gamma_rados(set, {1.0}, 10, 1) == 1.0);
    CHECK(cv_gamma_rados(set, {1.0, 1.0, 1.0}, 10, 1) == 1.0);
    CHECK_THROWS(cv_gamma_rados(set, {}, 10, 1));
}

TEST_CASE("cv_gamma_rados picks the heavy penalty when non-shared noise dominates") {
    // blocks whose shared coordinate is informative and whose non-shared
    // coordinates are large noise: gamma = 100 must win the grid
    Rng rng(71);
    RadoSet set;
    set.dim = 5;
    set.shared_idx = {4};
    for (int i = 0; i < 40; ++i) {
        BlockRado b;
        const int klass = rng.bounded(2) ? +1 : -1;
        b.sig = {{1.0}, klass};
        b.u = 1.0;
        b.v.resize(5);
        for (int k = 0; k < 4; ++k) b.v(k) = (rng.unit() * 2.0 - 1.0) * 60.0;
        b.v(4) = klass * 1.0;
        b.counts = {1, 1};
        set.blocks.push_back(std::move(b));
    }
    const double best = cv_gamma_rados(set, {0.01, 1.0, 100.0}, 10, 5);

    // exhaustive verification with the same folds is what the routine does;
    // here we simply confirm the selected value is the top of the grid
    CHECK(best == 100.0);
}

TEST_CASE("cv_peer_baseline: separable data scores near zero") {
    PeerView view;
    view.peer_id = 0;
    view.feature_idx = {0, 1};
    view.own_idx = {0};
    view.own_pos = {0};
    view.shared_pos = {1};
    const int m = 60;
    view.x.resize(m, 2);
    view.y.resize(m);
    Rng rng(91);
    for (int i = 0; i < m; ++i) {
        const double cls = i % 2 ? 1.0 : -1.0;
        view.x(i, 0) = cls * (1.0 + rng.unit());
        view.x(i, 1) = rng.unit();
        view.y(i) = cls;
    }
    const CvExamplesResult cv = cv_peer_baseline(view, {0.01, 1.0, 100.0}, 10, 4);
    double mean = 0.0;
    for (double e : cv.fold_errors) mean += e;
    mean /= static_cast<double>(cv.fold_errors.size());
    CHECK(mean <= 0.05);
    CHECK(cv.model.trained_on == "peer_0");
}

TEST_CASE("cv_peer_baseline: shuffled labels hover near chance") {
    double total = 0.0;
    const int seeds = 20;
    for (int s = 0; s < seeds; ++s) {
        PeerView view;
        view.peer_id = 0;
        view.feature_idx = {0, 1, 2};
        view.own_idx = {0, 1};
        view.own_pos = {0, 1};
        view.shared_pos = {2};
        const int m = 50;
        view.x.resize(m, 3);
        view.y.resize(m);
        Rng rng(static_cast<std::uint64_t>(s) + 500);
        for (int i = 0; i < m; ++i) {
            for (int k = 0; k < 3; ++k) view.x(i, k) = rng.unit() * 2.0 - 1.0;
            view.y(i) = i % 2 ? 1.0 : -1.0;  // labels carry no signal
        }
        const CvExamplesResult cv =
            cv_peer_baseline(view, {0.01, 1.0, 100.0}, 10, static_cast<std::uint64_t>(s));
        double mean = 0.0;
        for (double e : cv.fold_errors) mean += e;
        total += mean / static_cast<double>(cv.fold_errors.size());
    }
    CHECK(total / seeds == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("cv_peer_baseline: best wine peer lands in the expected error band") {
    Dataset wine =
        load_csv(std::string(RADOLEARN_SOURCE_DIR) + "/data/wine.csv", "target", "pos");
    const auto order = shared_candidate_order(wine);
    wine = wine.with_shared({order[0], order[1]});
    const BinningRule rule = fit_bins(wine, 4);
    const Dataset binned = apply_bins(wine, rule);

    double best = 1.0;
    for (const PeerView& view : split_peers(binned, 3, 0.0, 2)) {
        const CvExamplesResult cv = cv_peer_baseline(view, {0.01, 1.0, 100.0}, 10, 11);
        double mean = 0.0;
        for (double e : cv.fold_errors) mean += e;
        best = std::min(best, mean / static_cast<double>(cv.fold_errors.size()));
    }
    CHECK(best == doctest::Approx(0.07).epsilon(1.0));  // 0.07 +- 0.07 band
    CHECK(best < 0.14);
}

TEST_CASE("cv_peer_baseline rejects single-class data") {
    PeerView view;
    view.peer_id = 0;
    view.feature_idx = {0, 1};
    view.own_idx = {0};
    view.own_pos = {0};
    view.shared_pos = {1};
    view.x = Eigen::MatrixXd::Random(10, 2);
    view.y = Eigen::VectorXd::Ones(10);
    CHECK_THROWS(cv_peer_baseline(view, {1.0}, 10, 1));
}

TEST_CASE("finer shared partitions pull the rado solution toward the example one") {
    const Dataset raw = dyadic_dataset(48, 8, 1234);
    const std::vector<int> candidates = {7, 6, 5, 4};
    double coarsest = -1.0, finest = -1.0;
    for (int dim_j : {1, 4}) {
        const std::vector<int> shared(candidates.begin(), candidates.begin() + dim_j);
        const Dataset with_j = raw.with_shared(shared);
        const BinningRule rule = fit_bins(with_j, 4);
        const Dataset binned = apply_bins(with_j, rule);
        const auto views = split_peers(binned, 2, 0.0, 9);
        const RadoSet set = craft_blocks(views);
        const Regularizer reg = uniform_regularizer(8, 1.0);
        const double dist = (solve_rados(set, reg).theta -
                             solve_examples(binned.x, binned.y, reg).theta)
                                .norm();
        (dim_j == 1 ? coarsest : finest) = dist;
    }
    CHECK(finest < coarsest);
}

TEST_CASE("model JSON round-trip") {
    Model m;
    m.theta = Eigen::Vector3d(0.25, -1.5, 3.0);
    m.trained_on = "drl";
    m.gamma_used = 0.01;
    const Model back = Model::from_json(m.to_json());
    CHECK(back.theta == m.theta);
    CHECK(back.trained_on == m.trained_on);
    CHECK(back.gamma_used == m.gamma_used);
}
