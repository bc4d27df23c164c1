#include "chaosrates/cli.hpp"

#include "chaosrates/config.hpp"
#include "chaosrates/errors.hpp"
#include "chaosrates/instruments.hpp"
#include "chaosrates/kernel.hpp"
#include "chaosrates/stats.hpp"
#include "chaosrates/term_structure.hpp"
#include "chaosrates/validation.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

namespace chaosrates {

namespace {

namespace fs = std::filesystem;

// All CSV floats use 12 significant digits so identical runs are
// byte-identical.
std::string fmt12(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

void require_blocks(const RunConfig& cfg, bool spec, bool grid, bool mc) {
    if (spec && !cfg.has_spec) throw ConfigError("config: missing block 'spec'");
    if (grid && !cfg.has_grid) throw ConfigError("config: missing block 'grid'");
    if (mc && !cfg.has_mc) throw ConfigError("config: missing block 'mc'");
}

void write_manifest(const RunConfig& cfg, const std::string& verb, int threads) {
    nlohmann::json manifest{{"command", verb},
                            {"engine_version", kEngineVersion},
                            {"threads", threads},
                            {"config", cfg.raw}};
    write_file(fs::path(cfg.outputs) / "manifest.json", manifest.dump(2) + "\n");
}

int cmd_simulate(const RunConfig& cfg, int threads) {
    require_blocks(cfg, true, true, true);
    const TimeGrid grid = make_grid(cfg.grid.t_max, cfg.grid.n_steps, cfg.grid.tail_factor);
    const ChaosModel model(cfg.spec, grid);
    const PathEnsemble ensemble = sample_paths(grid, cfg.mc.n_paths, cfg.mc.seed, cfg.mc.antithetic);
    const Eigen::Index nh = grid.horizon_index + 1;

    const Eigen::Index n_blocks = (ensemble.n_paths + kStatBlock - 1) / kStatBlock;
    std::vector<ArrayStat> pi_partial(static_cast<std::size_t>(n_blocks));
    std::vector<ArrayStat> rho_partial(static_cast<std::size_t>(n_blocks));
    for_each_block(ensemble.n_paths, threads, [&](Eigen::Index b, Eigen::Index lo, Eigen::Index hi) {
        for (Eigen::Index i = lo; i < hi; ++i) {
            const KernelPath k = kernel_path(model, ensemble.path(i));
            pi_partial[static_cast<std::size_t>(b)].add(k.pi);
            rho_partial[static_cast<std::size_t>(b)].add(k.rho);
        }
    });
    ArrayStat pi_stat, rho_stat;
    for (Eigen::Index b = 0; b < n_blocks; ++b) {
        pi_stat.merge(pi_partial[static_cast<std::size_t>(b)]);
        rho_stat.merge(rho_partial[static_cast<std::size_t>(b)]);
    }

    std::string summary = "t,mean_pi,se_pi,mean_rho,se_rho\n";
    const Eigen::ArrayXd pi_se = pi_stat.std_error(), rho_se = rho_stat.std_error();
    for (Eigen::Index i = 0; i < nh; ++i)
        summary += fmt12(grid.times[i]) + "," + fmt12(pi_stat.mean[i]) + "," + fmt12(pi_se[i]) +
                   "," + fmt12(rho_stat.mean[i]) + "," + fmt12(rho_se[i]) + "\n";
    write_file(fs::path(cfg.outputs) / "summary.csv", summary);

    std::string dump = "path_id,t,sigma_sq,pi,short_rate,bank,rho\n";
    const Eigen::Index n_dump = std::min(cfg.dump_paths, ensemble.n_paths);
    for (Eigen::Index p = 0; p < n_dump; ++p) {
        const KernelPath k = kernel_path(model, ensemble.path(p));
        for (Eigen::Index i = 0; i < nh; ++i)
            dump += std::to_string(p) + "," + fmt12(k.times[i]) + "," + fmt12(k.sigma_sq[i]) + "," +
                    fmt12(k.pi[i]) + "," + fmt12(k.short_rate[i]) + "," + fmt12(k.bank[i]) + "," +
                    fmt12(k.rho[i]) + "\n";
    }
    write_file(fs::path(cfg.outputs) / "kernel_paths.csv", dump);
    return 0;
}

int cmd_curve(const RunConfig& cfg, int threads) {
    (void)threads;
    require_blocks(cfg, true, true, false);
    if (cfg.maturities.empty()) throw ConfigError("config: 'maturities' required for curve");
    const TimeGrid grid = make_grid(cfg.grid.t_max, cfg.grid.n_steps, cfg.grid.tail_factor);
    const ChaosModel model(cfg.spec, grid);
    const Eigen::Map<const Eigen::ArrayXd> maturities(cfg.maturities.data(),
                                                      static_cast<Eigen::Index>(cfg.maturities.size()));
    const DiscountCurve curve = initial_curve(model, maturities);

    std::string out = "maturity,discount,forward\n";
    for (Eigen::Index i = 0; i < curve.maturities.size(); ++i)
        out += fmt12(curve.maturities[i]) + "," + fmt12(curve.discounts[i]) + "," +
               fmt12(initial_forward(model, curve.maturities[i])) + "\n";
    write_file(fs::path(cfg.outputs) / "curve.csv", out);
    return 0;
}

int cmd_validate(const RunConfig& cfg, int threads) {
    require_blocks(cfg, true, true, true);
    const TimeGrid grid = make_grid(cfg.grid.t_max, cfg.grid.n_steps, cfg.grid.tail_factor);
    const ChaosModel model(cfg.spec, grid);
    const PathEnsemble ensemble = sample_paths(grid, cfg.mc.n_paths, cfg.mc.seed, cfg.mc.antithetic);

    ValidationOptions opt;
    opt.threads = threads;
    opt.times = cfg.validate_times;
    for (double t : opt.times) grid.index_of(t); // surface bad times as config errors

    const ValidationReport report = run_all(model, ensemble, opt);
    write_file(fs::path(cfg.outputs) / "validation.csv", report_csv(report));
    print_report(report, std::cout);
    return report.all_pass() ? 0 : 1;
}

int cmd_price(const RunConfig& cfg, int threads) {
    require_blocks(cfg, true, true, true);
    if (!cfg.has_option) throw ConfigError("config: 'option' block required for price");
    const TimeGrid grid = make_grid(cfg.grid.t_max, cfg.grid.n_steps, cfg.grid.tail_factor);
    const ChaosModel model(cfg.spec, grid);
    const PathEnsemble ensemble = sample_paths(grid, cfg.mc.n_paths, cfg.mc.seed, cfg.mc.antithetic);

    std::string out = "instrument,value,std_error,n_paths\n";
    char name[96];
    {
        const PriceEstimate est = price_bond_option(model, ensemble, cfg.option.t, cfg.option.T,
                                                    cfg.option.K, threads);
        std::snprintf(name, sizeof(name), "bond_option t=%g T=%g K=%g", cfg.option.t, cfg.option.T,
                      cfg.option.K);
        out += std::string(name) + "," + fmt12(est.value) + "," + fmt12(est.std_error) + "," +
               std::to_string(est.n_paths) + "\n";
    }
    if (cfg.has_cashflow) {
        CashflowSpec cf;
        cf.pay_time = cfg.cashflow.pay_time;
        cf.payoff = ConstantPayoff{cfg.cashflow.amount};
        const PriceEstimate est = price_single_cashflow(model, ensemble, 0.0, cf, threads);
        std::snprintf(name, sizeof(name), "cashflow T=%g amount=%g", cfg.cashflow.pay_time,
                      cfg.cashflow.amount);
        out += std::string(name) + "," + fmt12(est.value) + "," + fmt12(est.std_error) + "," +
               std::to_string(est.n_paths) + "\n";
    }
    write_file(fs::path(cfg.outputs) / "prices.csv", out);

    if (cfg.surface_paths > 0) {
        std::string surface = "path_id,s,price_sample\n";
        const Eigen::Index it = grid.index_of(cfg.option.t);
        const Eigen::Index n_surface = std::min(cfg.surface_paths, ensemble.n_paths);
        for (Eigen::Index p = 0; p < n_surface; ++p) {
            const Eigen::ArrayXd samples = bond_option_price_samples(
                model, ensemble.path(p), cfg.option.t, cfg.option.T, cfg.option.K);
            for (Eigen::Index i = 0; i < it; ++i)
                surface += std::to_string(p) + "," + fmt12(grid.times[i]) + "," +
                           fmt12(samples[i]) + "\n";
        }
        write_file(fs::path(cfg.outputs) / "option_surface.csv", surface);
    }
    return 0;
}

int cmd_calibrate(const RunConfig& cfg, int threads) {
    (void)threads;
    if (cfg.curve_file.empty()) throw ConfigError("config: 'curve_file' required for calibrate");
    const DiscountCurve input = load_curve_file(cfg.curve_file);

    std::vector<Eigen::Index> flat_segments;
    const FirstChaos fitted = calibrate_first_chaos(input, &flat_segments);
    for (Eigen::Index j : flat_segments)
        std::cerr << "warning: flat curve segment starting at maturity "
                  << input.maturities[j] << " implies a zero-rate interval\n";

    const ChaosModel model(fitted, make_grid(input.maturities[input.maturities.size() - 1], 1, 1.0));
    const DiscountCurve repriced = initial_curve(model, input.maturities);

    std::string out = "maturity,input,repriced,abs_error\n";
    for (Eigen::Index i = 0; i < input.maturities.size(); ++i)
        out += fmt12(input.maturities[i]) + "," + fmt12(input.discounts[i]) + "," +
               fmt12(repriced.discounts[i]) + "," +
               fmt12(std::abs(repriced.discounts[i] - input.discounts[i])) + "\n";
    write_file(fs::path(cfg.outputs) / "roundtrip.csv", out);
    write_file(fs::path(cfg.outputs) / "calibrated_spec.json",
               nlohmann::json{{"spec", spec_to_json(ChaosSpec{fitted})}}.dump(2) + "\n");
    return 0;
}

} // namespace

int run_command(const std::string& verb, const std::string& config_path,
                const std::string& out_override, int threads) {
    try {
        RunConfig cfg = load_config(config_path);
        if (!out_override.empty()) cfg.outputs = out_override;
        fs::create_directories(cfg.outputs);
        write_manifest(cfg, verb, threads);

        if (verb == "simulate") return cmd_simulate(cfg, threads);
        if (verb == "curve") return cmd_curve(cfg, threads);
        if (verb == "validate") return cmd_validate(cfg, threads);
        if (verb == "price") return cmd_price(cfg, threads);
        if (verb == "calibrate") return cmd_calibrate(cfg, threads);
        std::cerr << "error: unknown command '" << verb << "'\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidCurveError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DegenerateSpecError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DivergentMassError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace chaosrates
