#ifndef SYSID_MODEL_SELECT_HPP
#define SYSID_MODEL_SELECT_HPP

#include "sysid/solvers.hpp"

#include <vector>

namespace sysid {

struct ValidationError {
    double raw = 0.0;        // squared Frobenius residual on the validation set
    double normalized = 0.0; // raw / ||y_val||_F^2
};

struct CandidateRecord {
    double lambda = 0.0;
    SolveResult result;
    double train_error = 0.0; // squared residual on the training set
    ValidationError val_error;
};

/// Output of the joint train-and-validate procedure. chosen_index minimizes
/// the raw validation error; ties go to the smallest lambda.
struct ModelSelectionReport {
    std::vector<CandidateRecord> candidates;
    std::size_t chosen_index = 0;
    ImpulseResponse chosen_h;
    Index T = 0, T_val = 0;
};

ValidationError validation_error(const ImpulseResponse& h_hat, const RolloutData& val);

/// Trains one model per grid value on the training rollouts only, scores
/// each on the held-out validation rollouts, and returns the argmin record
/// along with every per-lambda solve (including non-converged ones).
ModelSelectionReport run_algorithm1(const RolloutData& train, const RolloutData& val,
                                    const std::vector<double>& lambda_grid,
                                    const SolverOptions& opts);

/// Validation-size guidance ceil((T log^2(|grid|/P) / (R log^2 n))^{1/3}),
/// floored at 1. Surfaced in reports, not enforced.
Index required_validation_size(Index T, Index R, Index n, Index grid_size, double P);

/// Grid of `count` logarithmically spaced multiples of center spanning
/// [lo_factor, hi_factor] * center, ascending.
std::vector<double> log_lambda_grid(double center, double lo_factor = 1e-2,
                                    double hi_factor = 1e2, Index count = 15);

/// Diagnostic sweep of the online protocol: refit with growing total sample
/// budget (split T : T_val per `val_fraction`) until the normalized
/// validation error drops below `stop_threshold`. Heuristic; the stopping
/// threshold is the caller's choice.
struct SampleSweepPoint {
    Index total_samples = 0;
    Index T = 0, T_val = 0;
    double best_val_error_normalized = 0.0;
    double chosen_lambda = 0.0;
};

std::vector<SampleSweepPoint> sweep_total_samples(const ImpulseResponse& h, bool shaped,
                                                  double sigma_z, std::uint64_t seed,
                                                  const std::vector<Index>& totals,
                                                  double val_fraction,
                                                  const std::vector<double>& lambda_grid,
                                                  const SolverOptions& opts,
                                                  double stop_threshold);

} // namespace sysid

#endif
