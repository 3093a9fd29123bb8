#ifndef SYSID_EXPERIMENTS_HPP
#define SYSID_EXPERIMENTS_HPP

#include "sysid/dataset.hpp"
#include "sysid/model_select.hpp"
#include "sysid/report.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sysid {

struct LambdaGridSpec {
    double lo_factor = 1e-2;
    double hi_factor = 1e2;
    Index count = 15;
    double lambda_c = 1.0; // constant C of the lambda rule
};

/// One JSON document drives every experiment; CLI flags mirror config keys
/// and override file values. Unused fields are ignored by drivers that do
/// not need them.
struct ExperimentConfig {
    std::string kind; // slow_decay | scaling | phase_transition | spectrum |
                      // gaussian_norm | dataset_fit

    // system
    Index R = 1, p = 1, m = 1;
    double rho = 0.98;
    std::uint64_t seed = 1;

    // geometry and sampling
    Index n = 45;
    std::vector<Index> n_list;
    std::vector<Index> p_list;
    std::vector<Index> T_list;
    Index T = 40;
    Index T_val = 800;
    double sigma_z = 0.1;
    double snr = 0.0; // > 0 overrides sigma_z via the population SNR
    bool shaped = true;
    Index trials = 10;

    LambdaGridSpec grid;
    SolverOptions solver;

    // phase transition
    double success_threshold = 1e-3;
    double delta = 1e-8;
    Index T_scan_max = 0; // 0: scan up to 2n-1
    std::string instance = "ones"; // or "random"

    // spectrum / realization
    double gap_ratio_threshold = 10.0;

    // dataset fit
    std::string dataset_path;
    std::vector<Index> input_columns{0};
    std::vector<Index> output_columns{1};
    Index skip_rows = 0;

    // output
    std::string out_path;
    std::string format = "json";
    bool no_timestamp = false;
    Index threads = 0; // 0: hardware concurrency

    void validate() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentReport run_slow_decay(const ExperimentConfig& cfg);
ExperimentReport run_scaling(const ExperimentConfig& cfg);
ExperimentReport run_phase_transition(const ExperimentConfig& cfg);
ExperimentReport run_spectrum(const ExperimentConfig& cfg);
ExperimentReport run_gaussian_norm(const ExperimentConfig& cfg);
ExperimentReport run_dataset_fit(const ExperimentConfig& cfg);

/// Dispatches on cfg.kind.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Deterministic work fan-out: every index is processed exactly once and
/// results land in caller-indexed slots, so the merge order never depends
/// on scheduling.
void parallel_for(Index count, Index threads, const std::function<void(Index)>& fn);

/// Canonical pole system with impulse response h_t = rho^{t-1}
/// (A = [rho], B = [1], C = [rho], D = [1]).
StateSpace pole_system(double rho);

/// All-ones scalar impulse response of half-size n (rank-1 Hankel).
ImpulseResponse ones_response(Index n);

} // namespace sysid

#endif
