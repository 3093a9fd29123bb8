#include "sysid/metrics.hpp"
#include "sysid/rng.hpp"
#include "sysid/solvers.hpp"

#include <Eigen/SVD>
#include <doctest.h>

#include <cmath>

using namespace sysid;

namespace {

ImpulseResponse geometric_response(Index n, double pole) {
    Eigen::VectorXd v(2 * n - 1);
    for (Index t = 0; t < v.size(); ++t) v[t] = std::pow(pole, double(t));
    return ImpulseResponse::scalar(v);
}

Eigen::MatrixXd random_matrix(Index rows, Index cols, std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd M(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) M(i, j) = rng.next_gaussian();
    return M;
}

} // namespace

TEST_CASE("singular value thresholding") {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
    M(0, 0) = 3.0;
    M(1, 1) = 1.0;
    const Eigen::MatrixXd S = svt(M, 2.0);
    CHECK(S(0, 0) == doctest::Approx(1.0));
    CHECK(S(1, 1) == doctest::Approx(0.0).epsilon(1e-12));

    const Eigen::MatrixXd R = random_matrix(4, 3, 5);
    CHECK(svt(R, 0.0).isApprox(R));
    CHECK_THROWS_AS(svt(R, -1.0), std::domain_error);

    // prox property: each singular value solves min_x 1/2 (x - s)^2 + tau*x
    // over x >= 0; check against a dense scan of that scalar problem.
    const double tau = 0.8;
    const Eigen::JacobiSVD<Eigen::MatrixXd> before(R);
    const Eigen::VectorXd sv_after = Eigen::JacobiSVD<Eigen::MatrixXd>(svt(R, tau)).singularValues();
    for (Index i = 0; i < before.singularValues().size(); ++i) {
        const double s = before.singularValues()[i];
        double best_x = 0.0, best_f = 0.5 * s * s;
        for (double x = 0.0; x <= s + 1.0; x += 1e-4) {
            const double f = 0.5 * (x - s) * (x - s) + tau * x;
            if (f < best_f) {
                best_f = f;
                best_x = x;
            }
        }
        CHECK(sv_after[i] == doctest::Approx(best_x).epsilon(1e-3));
        CHECK(sv_after[i] == doctest::Approx(std::max(s - tau, 0.0)).epsilon(1e-10));
    }
}

TEST_CASE("least squares with identity regressors returns the response") {
    const Index n = 4;
    const ImpulseResponse h = geometric_response(n, 0.6);
    RolloutData data;
    data.n = n;
    data.p = 1;
    data.m = 1;
    data.regressors = Eigen::MatrixXd::Identity(2 * n - 1, 2 * n - 1);
    data.outputs = h.flat();
    const SolveResult r = solve_ols(data);
    CHECK((r.h_hat.flat() - h.flat()).norm() <= 1e-12);
    CHECK_FALSE(r.rank_deficient);
}

TEST_CASE("least squares solves noiseless and degenerate problems") {
    const ImpulseResponse h = geometric_response(6, 0.7);
    RolloutData data = gen_multi_rollout(h, 30, false, 0.0, 9);
    const SolveResult r = solve_ols(data);
    CHECK(ir_error(r.h_hat, h) <= 1e-8);

    data.outputs.setZero();
    CHECK(solve_ols(data).h_hat.norm() == 0.0);

    // underdetermined with full row rank: minimum-norm interpolator, the
    // rank flag stays clear (rank equals the min dimension)
    const RolloutData wide = gen_multi_rollout(h, 4, false, 0.0, 10);
    const SolveResult rw = solve_ols(wide);
    CHECK_FALSE(rw.rank_deficient);
    CHECK((wide.regressors * rw.h_hat.flat() - wide.outputs.col(0)).norm() <= 1e-8);

    // genuinely rank-deficient: duplicated rollout rows
    RolloutData dup = gen_multi_rollout(h, 12, false, 0.0, 11);
    for (Index t = 6; t < 12; ++t) {
        dup.regressors.row(t) = dup.regressors.row(t - 6);
        dup.outputs.row(t) = dup.outputs.row(t - 6);
    }
    CHECK(solve_ols(dup).rank_deficient);
}

TEST_CASE("penalized solve at lambda zero is the least-squares path") {
    const ImpulseResponse h = geometric_response(5, 0.5);
    const RolloutData data = gen_multi_rollout(h, 25, false, 0.1, 4);
    SolverOptions o;
    o.lambda = 0.0;
    const SolveResult a = solve_hnn(data, o);
    const SolveResult b = solve_ols(data);
    CHECK(a.h_hat.flat() == b.h_hat.flat());

    SolverOptions bad;
    bad.lambda = -1.0;
    CHECK_THROWS_AS(solve_hnn(data, bad), std::domain_error);
}

TEST_CASE("zero outputs give the zero estimate for any lambda") {
    const ImpulseResponse h = geometric_response(4, 0.5);
    RolloutData data = gen_multi_rollout(h, 10, true, 0.0, 6);
    data.outputs.setZero();
    SolverOptions o;
    o.lambda = 2.5;
    const SolveResult r = solve_hnn(data, o);
    CHECK(r.h_hat.norm() <= 1e-12);
    CHECK(r.converged);
}

TEST_CASE("tiny-lambda noiseless shaped instance recovers the response") {
    const Index n = 16;
    const ImpulseResponse h = geometric_response(n, 0.9);
    const RolloutData data = gen_multi_rollout(h, 12, true, 0.0, 17);
    SolverOptions o;
    o.lambda = 1e-6;
    o.rho = 1e-3;
    o.max_iter = 20000;
    o.over_relaxation = 1.7;
    const SolveResult r = solve_hnn(data, o);
    CHECK(ir_error(r.h_hat, h) / h.norm() <= 1e-3);
}

TEST_CASE("penalized objective never exceeds the truth on noiseless data") {
    const ImpulseResponse h = geometric_response(8, 0.8);
    const RolloutData data = gen_multi_rollout(h, 40, true, 0.0, 23);
    SolverOptions o;
    o.lambda = 1e-5;
    o.rho = 1e-2;
    o.max_iter = 20000;
    o.over_relaxation = 1.7;
    const SolveResult r = solve_hnn(data, o);
    const double truth = objective(h, data, o.lambda);
    CHECK(r.objective <= truth + 1e-6 * (1.0 + truth));
    CHECK(r.converged);
    CHECK(r.primal_residual <= o.tol_primal);
}

TEST_CASE("stationarity certificate holds at converged solutions") {
    const ImpulseResponse h = geometric_response(8, 0.7);
    const RolloutData data = gen_multi_rollout(h, 40, true, 0.05, 31);
    SolverOptions o;
    o.lambda = 0.2;
    o.max_iter = 50000;
    const SolveResult r = solve_hnn(data, o);
    REQUIRE(r.converged);
    const double gap = stationarity_gap(r, data, o.lambda);
    const double scale = (data.regressors.transpose() * data.outputs.col(0)).norm() + 1.0;
    CHECK(gap <= 10.0 * o.tol_primal * scale);
}

TEST_CASE("numerical Hankel rank is non-increasing along the lambda path") {
    const ImpulseResponse h = geometric_response(10, 0.8);
    const RolloutData data = gen_multi_rollout(h, 30, true, 0.1, 53);
    const double center = default_lambda(0.1, 1, 10, 30);
    Index prev_rank = 1000;
    for (double lambda : {center * 1e-2, center * 3e-2, center * 1e-1, center * 0.3, center,
                          center * 3.0, center * 10.0, center * 30.0, center * 1e2,
                          center * 3e2}) {
        SolverOptions o;
        o.lambda = lambda;
        o.rho = -35.0;
        o.over_relaxation = 1.7;
        o.max_iter = 30000;
        const SolveResult r = solve_hnn(data, o);
        const Index rank = numerical_rank(hankel_map(r.h_hat).data, 1e-6);
        CHECK(rank <= prev_rank);
        prev_rank = rank;
    }
}

TEST_CASE("multi-output solves decompose channel by channel bitwise") {
    Rng rng(71);
    const Index n = 5;
    ImpulseResponse h(n, 1, 2);
    for (Index i = 0; i < h.dim(); ++i) h.flat()[i] = rng.next_gaussian();
    const RolloutData data = gen_multi_rollout(h, 20, true, 0.1, 99);

    SolverOptions o;
    o.lambda = 0.3;
    const SolveResult joint = solve_hnn(data, o);

    for (Index ch = 0; ch < 2; ++ch) {
        RolloutData single = data;
        single.m = 1;
        single.outputs = data.outputs.col(ch);
        const SolveResult part = solve_hnn(single, o);
        for (Index j = 0; j < h.num_blocks(); ++j)
            for (Index c = 0; c < h.p(); ++c)
                CHECK(joint.h_hat.at(j, ch, c) == part.h_hat.at(j, 0, c));
    }
}

TEST_CASE("constrained solve handles the degenerate deltas") {
    const Index n = 4;
    const ImpulseResponse h = geometric_response(n, 0.5);
    const RolloutData data = gen_multi_rollout(h, 2 * n - 1, false, 0.0, 3);

    // delta large enough that zero is feasible
    SolverOptions o;
    const double big = data.outputs.norm() * 2.0;
    const SolveResult zero = solve_hnn_constrained(data, big, o);
    CHECK(zero.h_hat.norm() <= 1e-6);

    // delta = 0 with square invertible regressors pins the solution
    SolverOptions tight;
    tight.max_iter = 50000;
    tight.over_relaxation = 1.7;
    const SolveResult exact = solve_hnn_constrained(data, 0.0, tight);
    CHECK(ir_error(exact.h_hat, h) <= 1e-5 * (1.0 + h.norm()));

    CHECK_THROWS_AS(solve_hnn_constrained(data, -1.0, o), std::domain_error);

    RolloutData mimo = data;
    mimo.m = 2;
    mimo.outputs = Eigen::MatrixXd::Zero(data.samples(), 2);
    CHECK_THROWS_AS(solve_hnn_constrained(mimo, 0.1, o), std::invalid_argument);
}

TEST_CASE("constrained solve recovers a shaped noiseless instance") {
    const Index n = 12;
    const ImpulseResponse h = geometric_response(n, 0.85);
    const RolloutData data = gen_multi_rollout(h, 10, true, 0.0, 12);
    SolverOptions o;
    o.max_iter = 20000;
    o.over_relaxation = 1.7;
    const SolveResult r = solve_hnn_constrained(data, 1e-8, o);
    CHECK(ir_error(r.h_hat, h) / h.norm() <= 1e-4);
}

TEST_CASE("lambda rule evaluates C sigma sqrt(pn/T) log n") {
    const double expected = 0.1 * std::sqrt(45.0 / 40.0) * std::log(45.0);
    CHECK(default_lambda(0.1, 1, 45, 40, 1.0) == doctest::Approx(expected).epsilon(1e-14));
    CHECK(expected == doctest::Approx(0.4038).epsilon(1e-3));
    CHECK(default_lambda(0.0, 1, 45, 40) == 0.0);
    CHECK(default_lambda(0.1, 1, 45, 80) ==
          doctest::Approx(expected / std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS_AS(default_lambda(0.1, 0, 45, 40), std::domain_error);
}

TEST_CASE("objective assembles fit and nuclear terms") {
    const Index n = 5;
    ImpulseResponse zero(n, 1, 1);
    RolloutData data = gen_multi_rollout(geometric_response(n, 0.5), 10, false, 0.0, 8);
    data.outputs.setZero();
    CHECK(objective(zero, data, 1.0) == 0.0);

    const ImpulseResponse h = geometric_response(n, 0.6);
    const RolloutData d2 = gen_multi_rollout(h, 10, false, 0.2, 9);
    const double fit = 0.5 * (d2.regressors * h.flat() - d2.outputs.col(0)).squaredNorm();
    CHECK(objective(h, d2, 0.0) == doctest::Approx(fit).epsilon(1e-12));

    const double nuc =
        Eigen::JacobiSVD<Eigen::MatrixXd>(hankel_map(h).data).singularValues().sum();
    CHECK(objective(h, d2, 2.0) == doctest::Approx(fit + 2.0 * nuc).epsilon(1e-12));
}

TEST_CASE("errors shrink with more data in the noisy shaped regime") {
    // scaled-down rate check: total error at T=400 beats T=200
    const Index n = 16;
    double err200 = 0.0, err400 = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const StateSpace sys = random_system(2, 1, 1, 0.9, 300 + trial);
        const ImpulseResponse h = impulse_response(sys, n);
        const double sz = sigma_z_for_snr(100.0, n, 1, 1, true);
        for (Index T : {200, 400}) {
            const RolloutData data = gen_multi_rollout(h, T, true, sz, derive_seed(7, trial, T));
            SolverOptions o;
            o.lambda = default_lambda(sigma_from_snr(100.0), 1, n, T);
            o.rho = -35.0;
            o.over_relaxation = 1.7;
            const SolveResult r = solve_hnn(data, o);
            (T == 200 ? err200 : err400) += hankel_spectral_error(r.h_hat, h);
        }
    }
    CHECK(err400 < err200);
}
