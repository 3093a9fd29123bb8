#ifndef SYSID_LTI_HPP
#define SYSID_LTI_HPP

#include "sysid/hankel.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace sysid {

/// State-space realization x_{t+1} = A x_t + B u_t, y_t = C x_t + D u_t + z_t
/// with x at the first input step equal to zero.
struct StateSpace {
    Eigen::MatrixXd A; // R x R
    Eigen::MatrixXd B; // R x p
    Eigen::MatrixXd C; // m x R
    Eigen::MatrixXd D; // m x p

    Index order() const { return A.rows(); }
    Index inputs() const { return B.cols(); }
    Index outputs() const { return C.rows(); }

    /// Throws on mutually inconsistent dimensions.
    void validate() const;

    double spectral_radius() const;
    bool is_stable() const { return spectral_radius() < 1.0; }
};

/// Regression view of acquired data. Row i of `regressors` is the input
/// window [u_{2n-1}, ..., u_1] flattened (descending time, p entries per
/// step), so position j pairs with stored block h_j and
/// y_row = sum_j h_j u_{2n-j}. `outputs` holds one m-vector per row.
struct RolloutData {
    enum class Mode { multi_rollout, single_rollout };

    Eigen::MatrixXd regressors; // T x (2n-1)p
    Eigen::MatrixXd outputs;    // T x m
    Mode mode = Mode::multi_rollout;
    bool shaped = false;
    double sigma_z = 0.0;
    std::uint64_t seed = 0;
    Index n = 0, p = 0, m = 0;

    Index samples() const { return regressors.rows(); }
};

/// Stacks a block vector into the ((2n-1)p) x m regression coefficient
/// matrix (block row j is h_j^T), so outputs = regressors * matrix.
Eigen::MatrixXd to_regression_matrix(const ImpulseResponse& h);
ImpulseResponse from_regression_matrix(const Eigen::MatrixXd& H, Index n, Index p, Index m);

/// First 2n-1 Markov-parameter blocks [D, CB, CAB, ..., CA^{2n-3}B].
ImpulseResponse impulse_response(const StateSpace& sys, Index n);

/// Runs the state recursion over the input sequence; `noise` (same length,
/// m rows per step) may be empty for the noiseless case. Inputs are columns
/// of `u` (p x len), outputs columns of the returned matrix (m x len).
Eigen::MatrixXd simulate(const StateSpace& sys, const Eigen::MatrixXd& u,
                         const Eigen::MatrixXd& noise = Eigen::MatrixXd());

/// FIR output y_t = sum_{i=1}^{t} h_{t+1-i} u_i + z_t using only the stored
/// 2n-1 blocks; contributions beyond the stored window are truncated.
Eigen::MatrixXd convolve_output(const ImpulseResponse& h, const Eigen::MatrixXd& u,
                                const Eigen::MatrixXd& noise = Eigen::MatrixXd());

/// T independent rollouts, one output sample each. When `shaped`, the input
/// at time t is drawn N(0, k_t^2 I); otherwise N(0, I). Output noise is
/// N(0, sigma_z^2 I_m). Rollout i draws from substream seed + i, values in
/// position order followed by the noise vector, so any prefix of rows is
/// reproducible and rows can be generated concurrently.
RolloutData gen_multi_rollout(const ImpulseResponse& h, Index T, bool shaped, double sigma_z,
                              std::uint64_t seed);

/// One continuous iid-input trajectory of length 2n+T-2; row t of the
/// regressor matrix is the sliding window ending at time 2n-2+t and the
/// matching output is y_{2n-2+t}. Ground truth comes from the exact state
/// recursion when `sys` is supplied (so FIR truncation error is physically
/// present); otherwise from the FIR model, which is then exact.
RolloutData gen_single_rollout(const ImpulseResponse& h, Index T, double sigma_z,
                               std::uint64_t seed,
                               const std::optional<StateSpace>& sys = std::nullopt);

enum class FeedthroughMode {
    matched, // D = C A^{-1} B: the stored 2n-1 blocks form a pure
             // sum-of-exponentials, so rank(H(h)) equals the order
    zero,
};

/// Random minimal system with spectral radius rescaled to rho_target.
/// B, C are iid Gaussian; A is iid Gaussian rescaled (for order 1, A is
/// exactly [rho_target]).
StateSpace random_system(Index R, Index p, Index m, double rho_target, std::uint64_t seed,
                         FeedthroughMode feedthrough = FeedthroughMode::matched);

/// Population signal-to-noise ratio E[||u||_F^2 / n] / E[||z||_F^2] computed
/// from the generating parameters; +infinity when sigma_z = 0.
double snr(const RolloutData& data);

/// Noise level at a given SNR: sigma = 1/sqrt(snr).
double sigma_from_snr(double snr_value);

/// Output-noise standard deviation that realizes a target population SNR
/// for the given acquisition geometry.
double sigma_z_for_snr(double snr_target, Index n, Index p, Index m, bool shaped);

/// FIR truncation error scale rho^{2n} (1 - rho^n)^{-1} for a pole of
/// magnitude rho.
double truncation_error_bound(double rho, Index n);

} // namespace sysid

#endif
