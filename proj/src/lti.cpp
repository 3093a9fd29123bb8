#include "sysid/lti.hpp"

#include "sysid/rng.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sysid {

void StateSpace::validate() const {
    const Index R = A.rows();
    if (A.cols() != R) throw std::invalid_argument("A must be square");
    if (B.rows() != R) throw std::invalid_argument("B row count must match the state dimension");
    if (C.cols() != R) throw std::invalid_argument("C column count must match the state dimension");
    if (D.rows() != C.rows() || D.cols() != B.cols())
        throw std::invalid_argument("D must be outputs x inputs");
}

double StateSpace::spectral_radius() const {
    if (A.rows() == 0) return 0.0;
    return A.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd to_regression_matrix(const ImpulseResponse& h) {
    Eigen::MatrixXd H(h.num_blocks() * h.p(), h.m());
    for (Index j = 0; j < h.num_blocks(); ++j)
        H.middleRows(j * h.p(), h.p()) = h.block(j).transpose();
    return H;
}

ImpulseResponse from_regression_matrix(const Eigen::MatrixXd& H, Index n, Index p, Index m) {
    if (H.rows() != (2 * n - 1) * p || H.cols() != m)
        throw std::invalid_argument("regression matrix shape mismatch");
    ImpulseResponse h(n, p, m);
    for (Index j = 0; j < h.num_blocks(); ++j)
        h.block(j) = H.middleRows(j * p, p).transpose();
    return h;
}

ImpulseResponse impulse_response(const StateSpace& sys, Index n) {
    sys.validate();
    ImpulseResponse h(n, sys.inputs(), sys.outputs());
    h.block(0) = sys.D;
    if (h.num_blocks() > 1) {
        Eigen::MatrixXd AkB = sys.B; // A^k B, k = 0,1,...
        for (Index j = 1; j < h.num_blocks(); ++j) {
            h.block(j) = sys.C * AkB;
            AkB = sys.A * AkB;
        }
    }
    return h;
}

Eigen::MatrixXd simulate(const StateSpace& sys, const Eigen::MatrixXd& u,
                         const Eigen::MatrixXd& noise) {
    sys.validate();
    if (u.rows() != sys.inputs()) throw std::invalid_argument("input dimension mismatch");
    const bool noisy = noise.size() > 0;
    if (noisy && (noise.rows() != sys.outputs() || noise.cols() != u.cols()))
        throw std::invalid_argument("noise dimension mismatch");

    Eigen::MatrixXd y(sys.outputs(), u.cols());
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.order());
    for (Index t = 0; t < u.cols(); ++t) {
        y.col(t) = sys.C * x + sys.D * u.col(t);
        if (noisy) y.col(t) += noise.col(t);
        x = sys.A * x + sys.B * u.col(t);
    }
    return y;
}

Eigen::MatrixXd convolve_output(const ImpulseResponse& h, const Eigen::MatrixXd& u,
                                const Eigen::MatrixXd& noise) {
    if (u.rows() != h.p()) throw std::invalid_argument("input dimension mismatch");
    const bool noisy = noise.size() > 0;
    if (noisy && (noise.rows() != h.m() || noise.cols() != u.cols()))
        throw std::invalid_argument("noise dimension mismatch");

    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(h.m(), u.cols());
    const Index L = h.num_blocks();
    for (Index t = 0; t < u.cols(); ++t) {
        // lag = t - i below; only lags 0..L-1 are stored
        const Index first = std::max<Index>(0, t - (L - 1));
        for (Index i = first; i <= t; ++i) y.col(t) += h.block(t - i) * u.col(i);
        if (noisy) y.col(t) += noise.col(t);
    }
    return y;
}

RolloutData gen_multi_rollout(const ImpulseResponse& h, Index T, bool shaped, double sigma_z,
                              std::uint64_t seed) {
    if (T < 1) throw std::invalid_argument("need at least one rollout");
    const Index n = h.n(), p = h.p(), m = h.m();
    const ShapingWeights w = shaping_weights(n);

    RolloutData data;
    data.mode = RolloutData::Mode::multi_rollout;
    data.shaped = shaped;
    data.sigma_z = sigma_z;
    data.seed = seed;
    data.n = n;
    data.p = p;
    data.m = m;
    data.regressors.resize(T, (2 * n - 1) * p);
    data.outputs.resize(T, m);

    const Eigen::MatrixXd H = to_regression_matrix(h);
    for (Index i = 0; i < T; ++i) {
        Rng rng(seed + std::uint64_t(i));
        for (Index j = 0; j < 2 * n - 1; ++j) {
            const double scale = shaped ? w.k[j] : 1.0;
            for (Index c = 0; c < p; ++c)
                data.regressors(i, j * p + c) = scale * rng.next_gaussian();
        }
        Eigen::RowVectorXd z(m);
        for (Index c = 0; c < m; ++c) z[c] = sigma_z * rng.next_gaussian();
        data.outputs.row(i) = data.regressors.row(i) * H + z;
    }
    return data;
}

RolloutData gen_single_rollout(const ImpulseResponse& h, Index T, double sigma_z,
                               std::uint64_t seed, const std::optional<StateSpace>& sys) {
    if (T < 1) throw std::invalid_argument("need at least one output sample");
    const Index n = h.n(), p = h.p(), m = h.m();
    const Index len = 2 * n - 2 + T; // u_1 .. u_{2n+T-2}

    Rng rng(seed);
    Eigen::MatrixXd u(p, len);
    for (Index t = 0; t < len; ++t)
        for (Index c = 0; c < p; ++c) u(c, t) = rng.next_gaussian();
    Eigen::MatrixXd z(m, len);
    for (Index t = 0; t < len; ++t)
        for (Index c = 0; c < m; ++c) z(c, t) = sigma_z * rng.next_gaussian();

    const Eigen::MatrixXd y = sys ? simulate(*sys, u, z) : convolve_output(h, u, z);

    RolloutData data;
    data.mode = RolloutData::Mode::single_rollout;
    data.shaped = false;
    data.sigma_z = sigma_z;
    data.seed = seed;
    data.n = n;
    data.p = p;
    data.m = m;
    data.regressors.resize(T, (2 * n - 1) * p);
    data.outputs.resize(T, m);
    for (Index t = 0; t < T; ++t) {
        // window [u_{2n-2+t+1}, ..., u_{t+1}] in 1-based time, descending
        for (Index j = 0; j < 2 * n - 1; ++j)
            data.regressors.row(t).segment(j * p, p) = u.col(t + (2 * n - 2) - j).transpose();
        data.outputs.row(t) = y.col(t + 2 * n - 2).transpose();
    }
    return data;
}

StateSpace random_system(Index R, Index p, Index m, double rho_target, std::uint64_t seed,
                         FeedthroughMode feedthrough) {
    if (R < 1) throw std::invalid_argument("order must be >= 1");
    if (!(rho_target > 0.0 && rho_target < 1.0))
        throw std::invalid_argument("rho_target must lie in (0, 1)");

    Rng rng(seed);
    StateSpace sys;
    if (R == 1) {
        sys.A = Eigen::MatrixXd::Constant(1, 1, rho_target);
        rng.next_gaussian(); // keep the draw count independent of the branch
    } else {
        sys.A.resize(R, R);
        for (Index i = 0; i < R; ++i)
            for (Index j = 0; j < R; ++j) sys.A(i, j) = rng.next_gaussian();
        const double rho = sys.A.eigenvalues().cwiseAbs().maxCoeff();
        sys.A *= rho_target / rho;
    }
    sys.B.resize(R, p);
    for (Index i = 0; i < R; ++i)
        for (Index j = 0; j < p; ++j) sys.B(i, j) = rng.next_gaussian();
    sys.C.resize(m, R);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < R; ++j) sys.C(i, j) = rng.next_gaussian();

    if (feedthrough == FeedthroughMode::matched) {
        // Continues the exponential family backwards one step: with
        // h_1 = C A^{-1} B the stored window has Hankel rank exactly R.
        sys.D = sys.C * sys.A.partialPivLu().solve(sys.B);
    } else {
        sys.D = Eigen::MatrixXd::Zero(m, p);
    }
    return sys;
}

double snr(const RolloutData& data) {
    if (data.sigma_z == 0.0) return std::numeric_limits<double>::infinity();
    // E||u||^2 over one window: sum of per-step variances times p.
    double input_energy = 0.0;
    if (data.shaped) {
        const Eigen::VectorXd k = shaping_weights(data.n).k;
        input_energy = k.squaredNorm() * double(data.p);
    } else {
        input_energy = double(2 * data.n - 1) * double(data.p);
    }
    const double noise_energy = data.sigma_z * data.sigma_z * double(data.m);
    return input_energy / double(data.n) / noise_energy;
}

double sigma_from_snr(double snr_value) { return 1.0 / std::sqrt(snr_value); }

double sigma_z_for_snr(double snr_target, Index n, Index p, Index m, bool shaped) {
    if (!(snr_target > 0.0)) throw std::domain_error("snr must be positive");
    const double input_energy =
        shaped ? shaping_weights(n).k.squaredNorm() * double(p) : double(2 * n - 1) * double(p);
    return std::sqrt(input_energy / double(n) / (snr_target * double(m)));
}

double truncation_error_bound(double rho, Index n) {
    if (!(rho < 1.0) || rho < 0.0) throw std::domain_error("rho must lie in [0, 1)");
    if (n < 1) throw std::domain_error("n must be >= 1");
    if (rho == 0.0) return 0.0;
    return std::pow(rho, 2.0 * double(n)) / (1.0 - std::pow(rho, double(n)));
}

} // namespace sysid
