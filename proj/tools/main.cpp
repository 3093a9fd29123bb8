// Command-line driver: config-driven experiments plus a synthetic data
// generator and a quick self-check. Every flag mirrors a config key; flags
// override values loaded with --config.

#include "sysid/experiments.hpp"
#include "sysid/metrics.hpp"
#include "sysid/rng.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace sysid;

struct CliOverrides {
    std::string config_path;
    std::string out;
    std::string format;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool no_timestamp = false;
    Index threads = -1;
    Index trials = -1;
};

ExperimentConfig assemble_config(const std::string& kind, const CliOverrides& cli,
                                 const nlohmann::json& extra) {
    nlohmann::json j = nlohmann::json::object();
    if (!cli.config_path.empty()) {
        std::ifstream in(cli.config_path);
        if (!in) throw std::invalid_argument("cannot open config " + cli.config_path);
        in >> j;
    }
    for (const auto& [key, value] : extra.items()) j[key] = value;
    ExperimentConfig cfg = config_from_json(j);
    cfg.kind = kind;
    if (cli.seed_set) cfg.seed = cli.seed;
    if (!cli.out.empty()) cfg.out_path = cli.out;
    if (!cli.format.empty()) cfg.format = cli.format;
    if (cli.no_timestamp) cfg.no_timestamp = true;
    if (cli.threads >= 0) cfg.threads = cli.threads;
    if (cli.trials >= 0) cfg.trials = cli.trials;
    return cfg;
}

int run_and_emit(const ExperimentConfig& cfg) {
    const ExperimentReport report = run_experiment(cfg);
    if (cfg.out_path.empty()) {
        std::cout << report.doc.dump(2) << std::endl;
    } else {
        emit_report(report, cfg.out_path, parse_format(cfg.format));
        std::cerr << "wrote " << cfg.out_path << "\n";
    }
    return 0;
}

int run_selftest() {
    int failures = 0;
    auto check = [&](const char* name, bool ok) {
        std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
        if (!ok) ++failures;
    };

    const ShapingWeights w = shaping_weights(6);
    const Eigen::VectorXi c = antidiagonal_multiplicity(6);
    bool mult_ok = true;
    for (Index j = 0; j < c.size(); ++j)
        if (std::abs(w.k[j] * w.k[j] - double(c[j])) > 1e-12) mult_ok = false;
    check("shaping weights square to antidiagonal counts", mult_ok);

    Rng rng(7);
    ImpulseResponse h(5, 2, 1);
    for (Index i = 0; i < h.dim(); ++i) h.flat()[i] = rng.next_gaussian();
    Eigen::MatrixXd M(5, 10);
    for (Index i = 0; i < M.size(); ++i) M(i / 10, i % 10) = rng.next_gaussian();
    const double lhs = (hankel_map(h).data.array() * M.array()).sum();
    const double rhs = block_dot(h, hankel_adjoint(M, 5, 2, 1));
    check("Hankel adjoint identity", std::abs(lhs - rhs) <= 1e-10 * (1.0 + std::abs(lhs)));

    const ShapingWeights k5 = shaping_weights(5);
    check("weighted operator is an isometry",
          std::abs(weighted_hankel_map(h, k5).data.norm() - h.norm()) <= 1e-10 * h.norm());

    const StateSpace sys = random_system(2, 1, 1, 0.8, 11);
    const ImpulseResponse ir = impulse_response(sys, 8);
    check("rank of the exact Hankel equals the order",
          numerical_rank(hankel_map(ir).data) == 2);

    const RolloutData data = gen_multi_rollout(ir, 40, true, 0.0, 3);
    check("noiseless rollouts satisfy y = U h",
          (data.regressors * to_regression_matrix(ir) - data.outputs).norm() <= 1e-10);

    const SolveResult ols = solve_ols(data);
    check("least squares recovers the noiseless response",
          ir_error(ols.h_hat, ir) <= 1e-8 * (1.0 + ir.norm()));

    return failures == 0 ? 0 : 2;
}

int run_gen_data(const ExperimentConfig& cfg, Index len) {
    if (cfg.out_path.empty()) throw std::invalid_argument("gen-data needs --out");
    const StateSpace sys = random_system(cfg.R, cfg.p, cfg.m, cfg.rho, cfg.seed);
    Rng rng(derive_seed(cfg.seed, 0xDA7A));
    Eigen::MatrixXd u(cfg.p, len);
    for (Index t = 0; t < len; ++t)
        for (Index c = 0; c < cfg.p; ++c) u(c, t) = rng.next_gaussian();
    Eigen::MatrixXd z(cfg.m, len);
    for (Index t = 0; t < len; ++t)
        for (Index c = 0; c < cfg.m; ++c) z(c, t) = cfg.sigma_z * rng.next_gaussian();
    const Eigen::MatrixXd y = simulate(sys, u, z);

    Eigen::MatrixXd table(len, cfg.p + cfg.m);
    table.leftCols(cfg.p) = u.transpose();
    table.rightCols(cfg.m) = y.transpose();
    write_numeric_table(cfg.out_path, table);
    std::cerr << "wrote " << cfg.out_path << " (" << len << " rows, inputs first)\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hankel-regularized system identification experiments"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    CliOverrides cli;
    app.add_option("--config", cli.config_path, "JSON config file");
    auto* seed_opt = app.add_option("--seed", cli.seed, "RNG seed");
    app.add_option("--out", cli.out, "output report path");
    app.add_option("--format", cli.format, "report format: json or csv");
    app.add_flag("--no-timestamp", cli.no_timestamp, "omit the timestamp field");
    app.add_option("--threads", cli.threads, "worker threads (0 = hardware)");
    app.add_option("--trials", cli.trials, "Monte Carlo trials");

    nlohmann::json extra = nlohmann::json::object();

    auto* slow = app.add_subcommand("slow-decay", "single-rollout slow-decay comparison");
    double sd_rho = -1.0;
    Index sd_n = -1, sd_T = -1, sd_Tval = -1;
    double sd_sigma = -1.0;
    slow->add_option("--rho", sd_rho, "pole magnitude");
    slow->add_option("--n", sd_n, "regularized Hankel half-size");
    slow->add_option("--T", sd_T, "training samples");
    slow->add_option("--T-val", sd_Tval, "validation samples");
    slow->add_option("--sigma-z", sd_sigma, "output noise level");

    auto* scaling = app.add_subcommand("scaling", "error vs sample size for both estimators");
    std::vector<Index> sc_Tlist;
    double sc_snr = -1.0;
    Index sc_R = -1, sc_n = -1;
    scaling->add_option("--T-list", sc_Tlist, "sample sizes")->expected(-1);
    scaling->add_option("--snr", sc_snr, "population SNR");
    scaling->add_option("--R", sc_R, "system order");
    scaling->add_option("--n", sc_n, "Hankel half-size");

    auto* phase = app.add_subcommand("phase", "noiseless recovery phase transition");
    std::vector<Index> ph_nlist;
    phase->add_option("--n-list", ph_nlist, "Hankel half-sizes")->expected(-1);

    auto* spectrum = app.add_subcommand("spectrum", "Hankel spectra of fitted models");
    Index sp_R = -1, sp_T = -1;
    spectrum->add_option("--R", sp_R, "system order");
    spectrum->add_option("--T", sp_T, "training samples");

    auto* gauss = app.add_subcommand("gauss-norm", "Monte Carlo weighted-Hankel norm growth");
    std::vector<Index> gn_nlist, gn_plist;
    gauss->add_option("--n-list", gn_nlist, "Hankel half-sizes")->expected(-1);
    gauss->add_option("--p-list", gn_plist, "input channel counts")->expected(-1);

    auto* fit = app.add_subcommand("fit", "fit a recorded dataset");
    std::string fit_path;
    std::vector<Index> fit_in, fit_out;
    Index fit_n = -1, fit_T = -1, fit_Tval = -1, fit_skip = -1;
    fit->add_option("--data", fit_path, "numeric text file");
    fit->add_option("--input-cols", fit_in, "input column indices")->expected(-1);
    fit->add_option("--output-cols", fit_out, "output column indices")->expected(-1);
    fit->add_option("--n", fit_n, "Hankel half-size");
    fit->add_option("--T", fit_T, "training samples");
    fit->add_option("--T-val", fit_Tval, "validation samples");
    fit->add_option("--skip-rows", fit_skip, "header rows to skip");

    auto* gen = app.add_subcommand("gen-data", "write a synthetic single-rollout dataset");
    Index gen_len = 1000, gen_R = -1, gen_p = -1, gen_m = -1;
    double gen_rho = -1.0, gen_sigma = -1.0;
    gen->add_option("--len", gen_len, "trajectory length");
    gen->add_option("--R", gen_R, "system order");
    gen->add_option("--p", gen_p, "input channels");
    gen->add_option("--m", gen_m, "output channels");
    gen->add_option("--rho", gen_rho, "spectral radius");
    gen->add_option("--sigma-z", gen_sigma, "output noise level");

    auto* selftest = app.add_subcommand("selftest", "quick operator and solver sanity checks");

    CLI11_PARSE(app, argc, argv);
    cli.seed_set = seed_opt->count() > 0;

    try {
        if (selftest->parsed()) return run_selftest();

        if (slow->parsed()) {
            if (sd_rho >= 0) extra["rho"] = sd_rho;
            if (sd_n >= 0) extra["n"] = sd_n;
            if (sd_T >= 0) extra["T"] = sd_T;
            if (sd_Tval >= 0) extra["T_val"] = sd_Tval;
            if (sd_sigma >= 0) extra["sigma_z"] = sd_sigma;
            return run_and_emit(assemble_config("slow_decay", cli, extra));
        }
        if (scaling->parsed()) {
            if (!sc_Tlist.empty()) extra["T_list"] = sc_Tlist;
            if (sc_snr > 0) extra["snr"] = sc_snr;
            if (sc_R >= 1) extra["R"] = sc_R;
            if (sc_n >= 1) extra["n"] = sc_n;
            if (!extra.contains("T_list")) extra["T_list"] = {200, 400, 800};
            return run_and_emit(assemble_config("scaling", cli, extra));
        }
        if (phase->parsed()) {
            if (!ph_nlist.empty()) extra["n_list"] = ph_nlist;
            return run_and_emit(assemble_config("phase_transition", cli, extra));
        }
        if (spectrum->parsed()) {
            if (sp_R >= 1) extra["R"] = sp_R;
            if (sp_T >= 1) extra["T"] = sp_T;
            return run_and_emit(assemble_config("spectrum", cli, extra));
        }
        if (gauss->parsed()) {
            if (!gn_nlist.empty()) extra["n_list"] = gn_nlist;
            if (!gn_plist.empty()) extra["p_list"] = gn_plist;
            return run_and_emit(assemble_config("gaussian_norm", cli, extra));
        }
        if (fit->parsed()) {
            if (!fit_path.empty()) extra["dataset"] = fit_path;
            if (!fit_in.empty()) extra["input_columns"] = fit_in;
            if (!fit_out.empty()) extra["output_columns"] = fit_out;
            if (fit_n >= 1) extra["n"] = fit_n;
            if (fit_T >= 1) extra["T"] = fit_T;
            if (fit_Tval >= 0) extra["T_val"] = fit_Tval;
            if (fit_skip >= 0) extra["skip_rows"] = fit_skip;
            return run_and_emit(assemble_config("dataset_fit", cli, extra));
        }
        if (gen->parsed()) {
            if (gen_R >= 1) extra["R"] = gen_R;
            if (gen_p >= 1) extra["p"] = gen_p;
            if (gen_m >= 1) extra["m"] = gen_m;
            if (gen_rho > 0) extra["rho"] = gen_rho;
            if (gen_sigma >= 0) extra["sigma_z"] = gen_sigma;
            ExperimentConfig cfg = assemble_config("gen_data", cli, extra);
            return run_gen_data(cfg, gen_len);
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
