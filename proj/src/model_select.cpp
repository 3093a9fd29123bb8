#include "sysid/model_select.hpp"

#include "sysid/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace sysid {

ValidationError validation_error(const ImpulseResponse& h_hat, const RolloutData& val) {
    if (h_hat.n() != val.n || h_hat.p() != val.p || h_hat.m() != val.m)
        throw std::invalid_argument("geometry mismatch");
    ValidationError e;
    e.raw = (val.regressors * to_regression_matrix(h_hat) - val.outputs).squaredNorm();
    const double denom = val.outputs.squaredNorm();
    e.normalized = denom > 0.0 ? e.raw / denom
                               : (e.raw > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    return e;
}

ModelSelectionReport run_algorithm1(const RolloutData& train, const RolloutData& val,
                                    const std::vector<double>& lambda_grid,
                                    const SolverOptions& opts) {
    if (lambda_grid.empty()) throw std::domain_error("lambda grid must be non-empty");
    if (train.n != val.n || train.p != val.p || train.m != val.m)
        throw std::invalid_argument("train/validation geometry mismatch");

    ModelSelectionReport report;
    report.T = train.samples();
    report.T_val = val.samples();
    report.candidates.reserve(lambda_grid.size());

    for (double lambda : lambda_grid) {
        SolverOptions o = opts;
        o.lambda = lambda;
        CandidateRecord rec;
        rec.lambda = lambda;
        rec.result = solve_hnn(train, o);
        rec.train_error =
            (train.regressors * to_regression_matrix(rec.result.h_hat) - train.outputs)
                .squaredNorm();
        rec.val_error = validation_error(rec.result.h_hat, val);
        report.candidates.push_back(std::move(rec));
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < report.candidates.size(); ++i) {
        const auto& cand = report.candidates[i];
        const auto& incumbent = report.candidates[best];
        if (cand.val_error.raw < incumbent.val_error.raw ||
            (cand.val_error.raw == incumbent.val_error.raw && cand.lambda < incumbent.lambda))
            best = i;
    }
    report.chosen_index = best;
    report.chosen_h = report.candidates[best].result.h_hat;
    return report;
}

Index required_validation_size(Index T, Index R, Index n, Index grid_size, double P) {
    if (T < 1 || R < 1 || n < 1 || grid_size < 1)
        throw std::domain_error("sizes must be positive");
    if (!(P > 0.0 && P < 1.0)) throw std::domain_error("P must lie in (0, 1)");
    const double lg = std::log(double(grid_size) / P);
    const double ln = std::log(double(n));
    const double value = std::cbrt(double(T) * lg * lg / (double(R) * ln * ln));
    return std::max<Index>(1, Index(std::ceil(value)));
}

std::vector<double> log_lambda_grid(double center, double lo_factor, double hi_factor,
                                    Index count) {
    if (!(center > 0.0) || !(lo_factor > 0.0) || hi_factor <= lo_factor || count < 1)
        throw std::domain_error("bad grid specification");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = center * std::sqrt(lo_factor * hi_factor);
        return grid;
    }
    const double step = std::log(hi_factor / lo_factor) / double(count - 1);
    for (Index i = 0; i < count; ++i)
        grid[i] = center * lo_factor * std::exp(double(i) * step);
    return grid;
}

std::vector<SampleSweepPoint> sweep_total_samples(const ImpulseResponse& h, bool shaped,
                                                  double sigma_z, std::uint64_t seed,
                                                  const std::vector<Index>& totals,
                                                  double val_fraction,
                                                  const std::vector<double>& lambda_grid,
                                                  const SolverOptions& opts,
                                                  double stop_threshold) {
    if (!(val_fraction > 0.0 && val_fraction < 1.0))
        throw std::domain_error("val_fraction must lie in (0, 1)");
    std::vector<SampleSweepPoint> points;
    for (std::size_t i = 0; i < totals.size(); ++i) {
        const Index total = totals[i];
        const Index T_val = std::max<Index>(1, Index(std::floor(double(total) * val_fraction)));
        const Index T = std::max<Index>(1, total - T_val);
        const RolloutData train =
            gen_multi_rollout(h, T, shaped, sigma_z, derive_seed(seed, i, 0));
        const RolloutData val =
            gen_multi_rollout(h, T_val, shaped, sigma_z, derive_seed(seed, i, 1));
        const ModelSelectionReport rep = run_algorithm1(train, val, lambda_grid, opts);
        SampleSweepPoint pt;
        pt.total_samples = total;
        pt.T = T;
        pt.T_val = T_val;
        pt.best_val_error_normalized =
            rep.candidates[rep.chosen_index].val_error.normalized;
        pt.chosen_lambda = rep.candidates[rep.chosen_index].lambda;
        points.push_back(pt);
        if (pt.best_val_error_normalized < stop_threshold) break;
    }
    return points;
}

} // namespace sysid
