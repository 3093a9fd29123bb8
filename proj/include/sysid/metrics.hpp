#ifndef SYSID_METRICS_HPP
#define SYSID_METRICS_HPP

#include "sysid/hankel.hpp"

#include <string>

namespace sysid {

struct SandwichCheck {
    bool ok = false;
    double lower = 0.0;    // ||d||_F / sqrt(2)
    double spectral = 0.0; // ||H(d)||
    double upper = 0.0;    // sqrt(n) ||d||_F
};

struct RateValue {
    double value = 0.0;
    std::string regime; // "large-T", "small-T", or "below-theory"
};

struct ErrorReport {
    double ir_error = 0.0;
    double hankel_spectral_error = 0.0;
    bool sandwich_ok = false;
    double predicted_rate = 0.0;
};

double ir_error(const ImpulseResponse& h_hat, const ImpulseResponse& h);

double hankel_spectral_error(const ImpulseResponse& h_hat, const ImpulseResponse& h);

/// ||d||_F / sqrt(2) <= ||H(d)|| <= sqrt(n) ||d||_F, with both slack values.
SandwichCheck check_norm_sandwich(const ImpulseResponse& d);

/// Least-squares spectral rate sigma_z sqrt(m n p / T) log(np); the log is
/// floored at 1 so the SISO n=1 corner stays meaningful.
double ls_rate(double sigma_z, Index m, Index n, Index p, Index T);

/// Regularized-estimator rate with Rbar = min(R^2 log^2 n, n):
/// sigma sqrt(np/T) log n above Rbar samples, sigma sqrt(Rnp/T) log n
/// between R and Rbar. Plain comparisons, no hidden constants.
RateValue hnn_rate(double sigma, Index R, Index n, Index p, Index T);

/// max_j |DFT(d)_j| over the length-(2n-1) transform; an upper bound on
/// ||H(d)|| because the Hankel matrix embeds in the circulant with that
/// spectrum. Scalar geometry only.
double circulant_spectral_bound(const ImpulseResponse& d);

ErrorReport error_report(const ImpulseResponse& h_hat, const ImpulseResponse& h,
                         double predicted_rate = 0.0);

} // namespace sysid

#endif
