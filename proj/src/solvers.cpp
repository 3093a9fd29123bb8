#include "sysid/solvers.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <stdexcept>

namespace sysid {

namespace {

struct ThinSvd {
    Eigen::MatrixXd U;
    Eigen::VectorXd s;
    Eigen::MatrixXd V;
};

ThinSvd thin_svd(const Eigen::MatrixXd& M) {
    // Jacobi for small blocks (exact two-sided rotations), divide-and-conquer
    // beyond that.
    if (std::min(M.rows(), M.cols()) <= 16) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
        return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw std::runtime_error("SVD did not converge");
    return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

// Per-position expansion of c_j / w_j^2 (p entries per block); equals the
// diagonal of O* O for the w-weighted Hankel operator.
Eigen::VectorXd operator_diag(const ShapingWeights& w, Index p) {
    const Eigen::VectorXi c = antidiagonal_multiplicity(w.n);
    Eigen::VectorXd d(c.size() * p);
    for (Index j = 0; j < c.size(); ++j)
        d.segment(j * p, p).setConstant(double(c[j]) / (w.k[j] * w.k[j]));
    return d;
}

// w-weighted Hankel map of a flat MISO vector (m = 1).
Eigen::MatrixXd op_map(const Eigen::VectorXd& x, const ShapingWeights& w, Index p) {
    ImpulseResponse b(w.n, p, 1);
    b.flat() = x;
    return weighted_hankel_map(b, w).data;
}

Eigen::VectorXd op_adjoint(const Eigen::MatrixXd& M, const ShapingWeights& w, Index p) {
    return weighted_hankel_adjoint(M, w, p, 1).flat();
}

struct MisoProblem {
    Eigen::MatrixXd U;       // working regressors (already rescaled in beta coords)
    Eigen::VectorXd y;
    ShapingWeights weights;  // identity weights when solving in h coordinates
    Index n, p;
    bool beta_coords;        // result must be divided by k blockwise
};

MisoProblem make_miso(const RolloutData& data, Index channel, bool shaped_variable) {
    MisoProblem prob;
    prob.n = data.n;
    prob.p = data.p;
    prob.y = data.outputs.col(channel);
    prob.beta_coords = shaped_variable;
    if (shaped_variable) {
        prob.weights = shaping_weights(data.n);
        prob.U = data.regressors;
        for (Index j = 0; j < 2 * data.n - 1; ++j)
            prob.U.middleCols(j * data.p, data.p) /= prob.weights.k[j];
    } else {
        prob.weights = ShapingWeights::identity(data.n);
        prob.U = data.regressors;
    }
    return prob;
}

ImpulseResponse unpack_solution(const Eigen::VectorXd& x, const MisoProblem& prob) {
    ImpulseResponse h(prob.n, prob.p, 1);
    h.flat() = x;
    if (prob.beta_coords)
        for (Index j = 0; j < h.num_blocks(); ++j) h.block(j) /= prob.weights.k[j];
    return h;
}

SolveResult solve_hnn_miso(const MisoProblem& prob, const SolverOptions& opts) {
    const double lambda = opts.lambda;
    const double rho = opts.effective_rho();
    const double alpha = opts.over_relaxation;
    const Index dim = prob.U.cols();

    const Eigen::VectorXd diag = operator_diag(prob.weights, prob.p);
    Eigen::MatrixXd G = prob.U.transpose() * prob.U;
    G.diagonal() += rho * diag;
    const Eigen::LDLT<Eigen::MatrixXd> factor(G);
    const Eigen::VectorXd rhs0 = prob.U.transpose() * prob.y;
    const double grad_scale = std::max(1.0, rhs0.norm());

    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(prob.weights.n, prob.weights.n * prob.p);
    Eigen::MatrixXd W = M;

    SolveResult res;
    res.converged = false;
    double primal_rel = 0.0, dual_rel = 0.0;
    Index it = 0;
    for (it = 1; it <= opts.max_iter; ++it) {
        x = factor.solve(rhs0 + rho * op_adjoint(M - W, prob.weights, prob.p));
        const Eigen::MatrixXd Hx = op_map(x, prob.weights, prob.p);
        const Eigen::MatrixXd Hx_relaxed = alpha == 1.0 ? Hx : alpha * Hx + (1.0 - alpha) * M;
        const Eigen::MatrixXd M_new = svt(Hx_relaxed + W, lambda / rho);
        const Eigen::VectorXd dual_step = rho * op_adjoint(M_new - M, prob.weights, prob.p);
        W += Hx_relaxed - M_new;
        M = M_new;

        const double primal = (Hx - M).norm();
        const double pscale = std::max({1.0, Hx.norm(), M.norm()});
        const double dscale =
            std::max(grad_scale, rho * op_adjoint(W, prob.weights, prob.p).norm());
        primal_rel = primal / pscale;
        dual_rel = dual_step.norm() / dscale;
        if (primal_rel <= opts.tol_primal && dual_rel <= opts.tol_dual) {
            res.converged = true;
            break;
        }
    }
    res.iterations = std::min(it, opts.max_iter);
    res.primal_residual = primal_rel;
    res.dual_residual = dual_rel;
    res.h_hat = unpack_solution(x, prob);
    res.dual_certificate = (rho / lambda) * W;
    return res;
}

SolveResult solve_constrained_miso(const MisoProblem& prob, double delta,
                                   const SolverOptions& opts) {
    const double rho = opts.effective_rho();
    const double alpha = opts.over_relaxation;
    const Index dim = prob.U.cols();
    const Index T = prob.U.rows();

    const Eigen::VectorXd diag = operator_diag(prob.weights, prob.p);
    Eigen::MatrixXd G = prob.U.transpose() * prob.U;
    G.diagonal() += diag;
    const Eigen::LDLT<Eigen::MatrixXd> factor(G);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(prob.weights.n, prob.weights.n * prob.p);
    Eigen::MatrixXd W = M;
    Eigen::VectorXd r = Eigen::VectorXd::Zero(T);
    Eigen::VectorXd w = r;

    SolveResult res;
    res.converged = false;
    double primal_rel = 0.0, dual_rel = 0.0;
    Index it = 0;
    for (it = 1; it <= opts.max_iter; ++it) {
        x = factor.solve(op_adjoint(M - W, prob.weights, prob.p) +
                         prob.U.transpose() * (prob.y + r - w));
        const Eigen::MatrixXd Hx = op_map(x, prob.weights, prob.p);
        const Eigen::VectorXd res_vec = prob.U * x - prob.y;
        const Eigen::MatrixXd Hx_relaxed = alpha == 1.0 ? Hx : alpha * Hx + (1.0 - alpha) * M;
        const Eigen::VectorXd res_relaxed =
            alpha == 1.0 ? res_vec : Eigen::VectorXd(alpha * res_vec + (1.0 - alpha) * r);

        const Eigen::MatrixXd M_new = svt(Hx_relaxed + W, 1.0 / rho);
        Eigen::VectorXd v = res_relaxed + w;
        const double vn = v.norm();
        const Eigen::VectorXd r_new = vn > delta ? Eigen::VectorXd(v * (delta / vn)) : v;

        const Eigen::VectorXd dual_step =
            rho * (op_adjoint(M_new - M, prob.weights, prob.p) + prob.U.transpose() * (r_new - r));
        W += Hx_relaxed - M_new;
        w += res_relaxed - r_new;
        M = M_new;
        r = r_new;

        const double primal = std::sqrt((Hx - M).squaredNorm() + (res_vec - r).squaredNorm());
        const double pscale = std::max({1.0, Hx.norm(), M.norm(), res_vec.norm()});
        const double dscale =
            std::max(1.0, rho * (op_adjoint(W, prob.weights, prob.p) + prob.U.transpose() * w).norm());
        primal_rel = primal / pscale;
        dual_rel = dual_step.norm() / dscale;
        if (primal_rel <= opts.tol_primal && dual_rel <= opts.tol_dual) {
            res.converged = true;
            break;
        }
    }
    res.iterations = std::min(it, opts.max_iter);
    res.primal_residual = primal_rel;
    res.dual_residual = dual_rel;
    res.h_hat = unpack_solution(x, prob);
    res.objective = nuclear_norm(hankel_map(res.h_hat).data);
    res.dual_certificate = rho * W;
    return res;
}

} // namespace

void SolverOptions::validate() const {
    if (lambda < 0.0) throw std::domain_error("lambda must be >= 0");
    if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
    if (!(tol_primal > 0.0) || !(tol_dual > 0.0))
        throw std::invalid_argument("tolerances must be positive");
}

SolveResult solve_ols(const RolloutData& data) {
    if (data.samples() < 1) throw std::invalid_argument("empty data");
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(data.regressors);
    const Eigen::MatrixXd H = cod.solve(data.outputs);

    SolveResult res;
    res.h_hat = from_regression_matrix(H, data.n, data.p, data.m);
    res.converged = true;
    res.iterations = 0;
    res.rank_deficient = cod.rank() < std::min(data.regressors.rows(), data.regressors.cols());
    res.objective = 0.5 * (data.regressors * H - data.outputs).squaredNorm();
    return res;
}

Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double tau) {
    if (tau < 0.0) throw std::domain_error("threshold must be >= 0");
    if (tau == 0.0) return M;
    ThinSvd svd = thin_svd(M);
    const Eigen::VectorXd shrunk = (svd.s.array() - tau).max(0.0);
    return svd.U * shrunk.asDiagonal() * svd.V.transpose();
}

double nuclear_norm(const Eigen::MatrixXd& M) {
    if (std::min(M.rows(), M.cols()) <= 16)
        return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues().sum();
    return Eigen::BDCSVD<Eigen::MatrixXd>(M).singularValues().sum();
}

SolveResult solve_hnn(const RolloutData& data, const SolverOptions& opts) {
    opts.validate();
    if (opts.lambda == 0.0) return solve_ols(data);

    const bool shaped_variable = opts.use_shaped_variable.value_or(data.shaped);
    SolveResult out;
    out.h_hat = ImpulseResponse(data.n, data.p, data.m);
    out.converged = true;

    // One single-output problem per channel; all diagnostics are worst-case
    // over channels.
    for (Index ch = 0; ch < data.m; ++ch) {
        const MisoProblem prob = make_miso(data, ch, shaped_variable);
        SolveResult part = solve_hnn_miso(prob, opts);
        for (Index j = 0; j < out.h_hat.num_blocks(); ++j)
            out.h_hat.block(j).row(ch) = part.h_hat.block(j);
        out.iterations = std::max(out.iterations, part.iterations);
        out.primal_residual = std::max(out.primal_residual, part.primal_residual);
        out.dual_residual = std::max(out.dual_residual, part.dual_residual);
        out.converged = out.converged && part.converged;
        if (data.m == 1) out.dual_certificate = part.dual_certificate;
    }
    out.objective = objective(out.h_hat, data, opts.lambda);
    return out;
}

SolveResult solve_hnn_constrained(const RolloutData& data, double delta,
                                  const SolverOptions& opts) {
    opts.validate();
    if (delta < 0.0) throw std::domain_error("delta must be >= 0");
    if (data.m != 1) throw std::invalid_argument("constrained solve is single-output only");

    const bool shaped_variable = opts.use_shaped_variable.value_or(data.shaped);
    return solve_constrained_miso(make_miso(data, 0, shaped_variable), delta, opts);
}

double default_lambda(double sigma, Index p, Index n, Index T, double C) {
    if (p < 1 || n < 1 || T < 1 || sigma < 0.0)
        throw std::domain_error("default_lambda arguments out of range");
    return C * sigma * std::sqrt(double(p) * double(n) / double(T)) * std::log(double(n));
}

double objective(const ImpulseResponse& h, const RolloutData& data, double lambda) {
    if (h.n() != data.n || h.p() != data.p || h.m() != data.m)
        throw std::invalid_argument("geometry mismatch");
    const double fit =
        0.5 * (data.regressors * to_regression_matrix(h) - data.outputs).squaredNorm();
    return lambda == 0.0 ? fit : fit + lambda * nuclear_norm(hankel_map(h).data);
}

double stationarity_gap(const SolveResult& result, const RolloutData& data, double lambda) {
    if (data.m != 1) throw std::invalid_argument("certificate check is single-output only");
    const ImpulseResponse& h = result.h_hat;
    const Eigen::VectorXd grad =
        data.regressors.transpose() * (data.regressors * h.flat() - data.outputs.col(0));

    const Eigen::MatrixXd Hm = hankel_map(h).data;
    ThinSvd svd = thin_svd(Hm);
    Index r = 0;
    while (r < svd.s.size() && svd.s[r] > 1e-6 * svd.s[0]) ++r;
    const Eigen::MatrixXd V1 = svd.U.leftCols(r);
    const Eigen::MatrixXd V2 = svd.V.leftCols(r);

    Eigen::MatrixXd sub = V1 * V2.transpose();
    if (result.dual_certificate.size() > 0) {
        const Eigen::MatrixXd& Z = result.dual_certificate;
        Eigen::MatrixXd Wpart = Z - V1 * (V1.transpose() * Z);
        Wpart -= (Wpart * V2) * V2.transpose();
        const double wn = Eigen::JacobiSVD<Eigen::MatrixXd>(Wpart).singularValues()(0);
        if (wn > 1.0) Wpart /= wn;
        sub += Wpart;
    }
    const Eigen::VectorXd adj = hankel_adjoint(sub, data.n, data.p, 1).flat();
    return (grad + lambda * adj).norm();
}

} // namespace sysid
