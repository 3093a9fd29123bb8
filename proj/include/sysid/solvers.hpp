#ifndef SYSID_SOLVERS_HPP
#define SYSID_SOLVERS_HPP

#include "sysid/lti.hpp"

#include <optional>

namespace sysid {

struct SolverOptions {
    double lambda = 0.0; // nuclear-norm weight, >= 0
    /// ADMM penalty. Positive: used as is. Zero: defaults to lambda (or 1
    /// when lambda = 0). Negative: |rho| * lambda, a per-candidate scaling
    /// for grid sweeps.
    double rho = 0.0;
    Index max_iter = 5000;
    double tol_primal = 1e-8; // relative
    double tol_dual = 1e-8;   // relative
    /// Over-relaxation factor in [1, 2); 1 disables it. Fixed per solve,
    /// so iterate paths stay deterministic.
    double over_relaxation = 1.0;
    /// Solve in the rescaled variable beta = K h with the weighted operator.
    /// Unset: follow data.shaped.
    std::optional<bool> use_shaped_variable;

    void validate() const;
    double effective_rho() const {
        if (rho > 0.0) return rho;
        if (rho < 0.0 && lambda > 0.0) return -rho * lambda;
        return lambda > 0.0 ? lambda : 1.0;
    }
};

struct SolveResult {
    ImpulseResponse h_hat;
    Index iterations = 0;
    double primal_residual = 0.0; // final, relative to its scale
    double dual_residual = 0.0;
    bool converged = true;
    double objective = 0.0;
    bool rank_deficient = false; // least-squares path: numerical rank < min dimension

    /// Nuclear-norm subgradient certificate (rho/lambda times the final ADMM
    /// dual matrix, in Hankel coordinates). Empty for the least-squares path.
    Eigen::MatrixXd dual_certificate;
};

/// Minimum-Frobenius-norm least squares h = pinv(U) y via a rank-revealing
/// complete orthogonal decomposition.
SolveResult solve_ols(const RolloutData& data);

/// Singular value soft-thresholding, the proximal operator of tau * ||.||_*.
Eigen::MatrixXd svt(const Eigen::MatrixXd& M, double tau);

/// Sum of singular values.
double nuclear_norm(const Eigen::MatrixXd& M);

/// Penalized estimator: argmin_h 1/2 ||U h - y||_F^2 + lambda ||H(h)||_*,
/// by ADMM on the splitting M = H(h). The multiplicity identity
/// H*H = diag(c) makes the h-update a pre-factored positive-definite solve.
/// Multi-output data is solved channel by channel and concatenated.
/// lambda = 0 delegates to solve_ols.
SolveResult solve_hnn(const RolloutData& data, const SolverOptions& opts);

/// Constrained variant: min ||G(beta)||_* s.t. ||U beta - y|| <= delta,
/// single-output only. Same ADMM with an extra Euclidean-ball projection on
/// the residual variable. The result is reported in h coordinates; its
/// `objective` field holds the attained nuclear norm ||H(h_hat)||_*.
SolveResult solve_hnn_constrained(const RolloutData& data, double delta,
                                  const SolverOptions& opts);

/// Theory choice lambda = C sigma sqrt(p n / T) log(n); log is natural.
double default_lambda(double sigma, Index p, Index n, Index T, double C = 1.0);

/// 1/2 ||U h - y||_F^2 + lambda ||H(h)||_* on the given data.
double objective(const ImpulseResponse& h, const RolloutData& data, double lambda);

/// Stationarity gap of a candidate solution of the penalized problem:
/// || U^T (U h - y) + lambda H*(D) ||_2 with the subgradient D assembled
/// from the SVD of H(h_hat) (rank at rel. threshold 1e-6) plus the
/// projection of the solver's dual certificate onto the orthogonal carrier.
double stationarity_gap(const SolveResult& result, const RolloutData& data, double lambda);

} // namespace sysid

#endif
