#ifndef SYSID_REALIZATION_HPP
#define SYSID_REALIZATION_HPP

#include "sysid/lti.hpp"

namespace sysid {

struct OrderDetection {
    Index order = 0;
    double best_gap_ratio = 0.0;
    bool confident = false;
};

struct RealizationResult {
    StateSpace sys;
    Index order_used = 0;
    Eigen::VectorXd singular_values; // spectrum of the factored Hankel, descending
    double reconstruction_error = 0.0; // ||h - impulse_response(sys)||_F over the window
};

/// Singular values of hankel_map(h), descending.
Eigen::VectorXd hankel_spectrum(const ImpulseResponse& h);

/// Largest relative gap sv_i / sv_{i+1} among significant values
/// (sv_i / sv_1 > 1e-6). Confident only when the best ratio reaches
/// gap_ratio_threshold; otherwise returns the significant count. The rule is
/// a heuristic; the gap location is what the spectrum plots make visible.
OrderDetection detect_order(const Eigen::VectorXd& sv, double gap_ratio_threshold);

/// Balanced-coordinate Ho-Kalman. The feedthrough block h_1 is read off
/// directly and excluded from the factorization, which uses the
/// (n-1) x (n-1)-block Hankel of h_2, h_3, ...; A comes from the shifted
/// observability solve. Requires 1 <= R <= n-1. The reconstruction is
/// meaningful only up to similarity, so compare through Markov parameters.
RealizationResult ho_kalman(const ImpulseResponse& h, Index R);

} // namespace sysid

#endif
