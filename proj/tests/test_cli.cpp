#include <doctest.h>

#include "test_support.hpp"

#include <chaosrates/cli.hpp>
#include <chaosrates/config.hpp>

#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace chaosrates;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

json base_config() {
    return json{
        {"spec", {{"family", "first_chaos"}, {"sigma", {{"form", "exp"}, {"a", 1.0}, {"b", 0.5}}}}},
        {"grid", {{"t_max", 2.0}, {"n_steps", 100}, {"tail_factor", 2.0}}},
        {"mc", {{"n_paths", 256}, {"seed", 7}, {"antithetic", false}}},
    };
}

std::string write_json(const fs::path& dir, const std::string& name, const json& j) {
    const fs::path p = dir / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("config: spec families parse and serialize") {
    const json j = base_config();
    const RunConfig cfg = parse_config(j);
    CHECK(cfg.has_spec);
    CHECK(cfg.has_grid);
    CHECK(cfg.mc.n_paths == 256);
    CHECK(std::holds_alternative<FirstChaos>(cfg.spec));
    CHECK(cfg.raw == j);

    const json gbm{{"spec", {{"family", "gbm_exponential"}, {"r", 0.05}, {"lambda", 0.2}}}};
    CHECK(std::holds_alternative<GbmExponential>(parse_config(gbm).spec));

    const json second{{"spec",
                       {{"family", "second_chaos"},
                        {"psi", {{"form", "exp"}, {"a", 0.8}, {"b", 0.7}}},
                        {"g", {{"form", "exp"}, {"a", 0.5}, {"b", 0.3}}},
                        {"h", {{"form", "exp"}, {"a", 1.0}, {"b", 0.9}}}}}};
    CHECK(std::holds_alternative<SecondChaos>(parse_config(second).spec));

    const json custom{{"spec",
                       {{"family", "custom"},
                        {"integrand", {{"kind", "gbm_sigma"}, {"r", 0.05}, {"lambda", 0.2}}},
                        {"n_inner", 64},
                        {"eps_tail", 0.01}}}};
    const RunConfig ccfg = parse_config(custom);
    const auto& ci = std::get<CustomIntegrand>(ccfg.spec);
    CHECK(ci.n_inner == 64);
    CHECK(ci.eps_tail == 0.01);
    CHECK(ci.label == "gbm_sigma");

    // piecewise round trip through json
    PiecewiseConstFn pw;
    pw.knots = Eigen::ArrayXd::LinSpaced(3, 0.0, 2.0);
    pw.values = Eigen::ArrayXd::Constant(2, 0.3);
    pw.tail_amplitude = 0.1;
    pw.tail_rate = 0.4;
    const json round = detfn_to_json(pw);
    const DetFn back = detfn_from_json(round, "spec.sigma");
    CHECK(std::get<PiecewiseConstFn>(back).values[1] == 0.3);
    CHECK(std::get<PiecewiseConstFn>(back).tail_rate == 0.4);
}

TEST_CASE("config: unknown and missing keys are rejected") {
    json j = base_config();
    j["extra"] = 1;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = base_config();
    j["grid"]["n_step"] = 100;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = base_config();
    j["spec"].erase("sigma");
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = base_config();
    j["spec"]["family"] = "third_chaos";
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = base_config();
    j["mc"].erase("seed");
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    j = base_config();
    j["mc"]["n_paths"] = 12.5;
    CHECK_THROWS_AS(parse_config(j), ConfigError);

    // custom without n_inner
    json custom{{"spec",
                 {{"family", "custom"},
                  {"integrand", {{"kind", "gbm_sigma"}, {"r", 0.05}, {"lambda", 0.2}}}}}};
    CHECK_THROWS_AS(parse_config(custom), ConfigError);
}

TEST_CASE("cli simulate: outputs, manifest, and byte-identical reruns") {
    const fs::path dir = testsup::fresh_dir("simulate");
    json j = base_config();
    j["outputs"] = (dir / "out").string();
    j["dump_paths"] = 3;
    const std::string cfg = write_json(dir, "run.json", j);

    CHECK(run_command("simulate", cfg, "", 1) == 0);
    const std::string summary = slurp(dir / "out" / "summary.csv");
    CHECK(summary.rfind("t,mean_pi,se_pi,mean_rho,se_rho\n", 0) == 0);
    // flat model: mean_rho = 1 with zero SE on every row
    std::istringstream rows(summary);
    std::string line;
    std::getline(rows, line);
    int n_rows = 0;
    while (std::getline(rows, line)) {
        ++n_rows;
        const auto last_comma = line.rfind(',');
        const auto second_last = line.rfind(',', last_comma - 1);
        const double mean_rho = std::stod(line.substr(second_last + 1, last_comma - second_last - 1));
        CHECK(mean_rho == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(n_rows == 101);

    const std::string paths_csv = slurp(dir / "out" / "kernel_paths.csv");
    CHECK(paths_csv.rfind("path_id,t,sigma_sq,pi,short_rate,bank,rho\n", 0) == 0);
    CHECK(paths_csv.find("\n2,") != std::string::npos);
    CHECK(paths_csv.find("\n3,") == std::string::npos);

    const json manifest = json::parse(slurp(dir / "out" / "manifest.json"));
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("engine_version") == kEngineVersion);
    CHECK(manifest.at("config") == j);

    // identical config + seed: byte-identical CSVs
    json j2 = j;
    j2["outputs"] = (dir / "out2").string();
    const std::string cfg2 = write_json(dir, "run2.json", j2);
    CHECK(run_command("simulate", cfg2, "", 2) == 0);
    CHECK(slurp(dir / "out2" / "summary.csv") == summary);
    CHECK(slurp(dir / "out2" / "kernel_paths.csv") == paths_csv);
}

TEST_CASE("cli curve: discounts and forwards for the flat family") {
    const fs::path dir = testsup::fresh_dir("curve");
    json j = base_config();
    j["outputs"] = (dir / "out").string();
    j["maturities"] = {0.0, 0.5, 1.0, 2.0};
    const std::string cfg = write_json(dir, "run.json", j);
    CHECK(run_command("curve", cfg, "", 1) == 0);

    const std::string curve = slurp(dir / "out" / "curve.csv");
    std::istringstream rows(curve);
    std::string line;
    std::getline(rows, line);
    CHECK(line == "maturity,discount,forward");
    double maturity, discount, forward;
    char comma;
    while (std::getline(rows, line)) {
        std::istringstream row(line);
        row >> maturity >> comma >> discount >> comma >> forward;
        CHECK(discount == doctest::Approx(std::exp(-maturity)).epsilon(1e-10));
        CHECK(forward == doctest::Approx(1.0).epsilon(1e-10));
    }

    json bad = j;
    bad["maturities"] = {0.0, 2.0, 1.0};
    CHECK(run_command("curve", write_json(dir, "bad.json", bad), "", 1) == 2);

    // gbm family: discount(10) lands on e^{-0.5} to the printed precision
    json gbm = j;
    gbm["spec"] = {{"family", "gbm_exponential"}, {"r", 0.05}, {"lambda", 0.2}};
    gbm["grid"] = {{"t_max", 10.0}, {"n_steps", 100}};
    gbm["maturities"] = {0.0, 10.0};
    gbm["outputs"] = (dir / "gbm").string();
    CHECK(run_command("curve", write_json(dir, "gbm.json", gbm), "", 1) == 0);
    const std::string gbm_curve = slurp(dir / "gbm" / "curve.csv");
    const auto last_row = gbm_curve.find("\n10,");
    REQUIRE(last_row != std::string::npos);
    const double d10 = std::stod(gbm_curve.substr(last_row + 4));
    CHECK(std::abs(d10 - std::exp(-0.5)) < 1e-10);
}

TEST_CASE("cli validate: pass and fail exit codes") {
    const fs::path dir = testsup::fresh_dir("validate");
    json j = base_config();
    j["outputs"] = (dir / "out").string();
    j["mc"] = {{"n_paths", 512}, {"seed", 11}};
    const std::string cfg = write_json(dir, "run.json", j);
    CHECK(run_command("validate", cfg, "", 2) == 0);
    const std::string csv = slurp(dir / "out" / "validation.csv");
    CHECK(csv.rfind("test,time,estimate,std_error,target,tolerance,verdict\n", 0) == 0);
    CHECK(csv.find("fail") == std::string::npos);

    // truncation-broken custom spec: some verdicts fail, exit code 1
    json broken = j;
    broken["outputs"] = (dir / "broken").string();
    broken["spec"] = {{"family", "custom"},
                      {"integrand", {{"kind", "gbm_sigma"}, {"r", 0.05}, {"lambda", 0.2}}},
                      {"n_inner", 16},
                      {"eps_tail", 0.8}};
    broken["grid"] = {{"t_max", 1.0}, {"n_steps", 20}, {"tail_factor", 1.25}};
    broken["mc"] = {{"n_paths", 64}, {"seed", 11}};
    CHECK(run_command("validate", write_json(dir, "broken.json", broken), "", 2) == 1);
    CHECK(slurp(dir / "broken" / "validation.csv").find("fail") != std::string::npos);
}

TEST_CASE("cli price: deterministic bond option and cash flow rows") {
    const fs::path dir = testsup::fresh_dir("price");
    json j = base_config();
    j["outputs"] = (dir / "out").string();
    j["option"] = {{"t", 1.0}, {"T", 2.0}, {"K", 0.3}};
    j["cashflow"] = {{"pay_time", 2.0}, {"amount", 1.0}};
    const std::string cfg = write_json(dir, "run.json", j);
    CHECK(run_command("price", cfg, "", 1) == 0);

    const std::string prices = slurp(dir / "out" / "prices.csv");
    CHECK(prices.rfind("instrument,value,std_error,n_paths\n", 0) == 0);
    std::istringstream rows(prices);
    std::string line;
    std::getline(rows, line);
    std::getline(rows, line);
    const double option_value = std::stod(line.substr(line.find(',') + 1));
    CHECK(option_value ==
          doctest::Approx(std::exp(-2.0) - 0.3 * std::exp(-1.0)).epsilon(1e-10));
    std::getline(rows, line);
    const double cashflow_value = std::stod(line.substr(line.find(',') + 1));
    CHECK(cashflow_value == doctest::Approx(std::exp(-2.0)).epsilon(1e-10));

    json bad = j;
    bad.erase("option");
    CHECK(run_command("price", write_json(dir, "bad.json", bad), "", 1) == 2);

    // per-path conditional price surface on request
    json with_surface = j;
    with_surface["outputs"] = (dir / "surface").string();
    with_surface["surface_paths"] = 2;
    CHECK(run_command("price", write_json(dir, "surface.json", with_surface), "", 1) == 0);
    const std::string surface = slurp(dir / "surface" / "option_surface.csv");
    CHECK(surface.rfind("path_id,s,price_sample\n", 0) == 0);
    CHECK(surface.find("\n1,") != std::string::npos);
    CHECK(surface.find("\n2,") == std::string::npos);
}

TEST_CASE("cli calibrate: round trip file and non-monotone rejection") {
    const fs::path dir = testsup::fresh_dir("calibrate");
    {
        std::ofstream out(dir / "curve.csv");
        out << "maturity,discount\n";
        for (int i = 0; i <= 30; ++i) out << i << "," << std::exp(-0.03 * i) << "\n";
    }
    json j{{"curve_file", (dir / "curve.csv").string()}, {"outputs", (dir / "out").string()}};
    const std::string cfg = write_json(dir, "run.json", j);
    CHECK(run_command("calibrate", cfg, "", 1) == 0);

    const std::string roundtrip = slurp(dir / "out" / "roundtrip.csv");
    CHECK(roundtrip.rfind("maturity,input,repriced,abs_error\n", 0) == 0);
    std::istringstream rows(roundtrip);
    std::string line;
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        const double abs_error = std::stod(line.substr(line.rfind(',') + 1));
        CHECK(abs_error < 1e-8);
    }

    const json fitted = json::parse(slurp(dir / "out" / "calibrated_spec.json"));
    CHECK(fitted.at("spec").at("family") == "first_chaos");
    CHECK(fitted.at("spec").at("sigma").at("form") == "piecewise");

    {
        std::ofstream out(dir / "bad_curve.csv");
        out << "maturity,discount\n0,1\n1,0.9\n2,0.95\n";
    }
    json bad{{"curve_file", (dir / "bad_curve.csv").string()},
             {"outputs", (dir / "out_bad").string()}};
    CHECK(run_command("calibrate", write_json(dir, "bad.json", bad), "", 1) == 2);

    json missing{{"curve_file", (dir / "nope.csv").string()},
                 {"outputs", (dir / "out_missing").string()}};
    CHECK(run_command("calibrate", write_json(dir, "missing.json", missing), "", 1) == 2);
}

TEST_CASE("cli: config errors and unknown verbs") {
    const fs::path dir = testsup::fresh_dir("cli_errors");
    CHECK(run_command("simulate", (dir / "absent.json").string(), "", 1) == 2);

    json no_spec = base_config();
    no_spec.erase("spec");
    CHECK(run_command("simulate", write_json(dir, "no_spec.json", no_spec), "", 1) == 2);

    json degenerate = base_config();
    degenerate["spec"] = {{"family", "gbm_exponential"}, {"r", -0.05}, {"lambda", 0.2}};
    degenerate["outputs"] = (dir / "out").string();
    CHECK(run_command("simulate", write_json(dir, "degenerate.json", degenerate), "", 1) == 2);

    CHECK(run_command("inspect", write_json(dir, "ok.json", base_config()), "", 1) == 2);

    // runtime failures (kernel positivity floor) exit with 3, not 2
    json dying = base_config();
    dying["spec"] = {{"family", "custom"},
                     {"integrand",
                      {{"kind", "deterministic"},
                       {"sigma",
                        {{"form", "piecewise"},
                         {"knots", {0.0, 0.5}},
                         {"values", {1.0}},
                         {"tail_value", 0.0},
                         {"tail_rate", 0.0}}}}},
                     {"n_inner", 2}};
    dying["grid"] = {{"t_max", 1.0}, {"n_steps", 10}};
    dying["mc"] = {{"n_paths", 4}, {"seed", 3}};
    dying["outputs"] = (dir / "dying").string();
    CHECK(run_command("simulate", write_json(dir, "dying.json", dying), "", 1) == 3);
}

TEST_CASE("cli binary: exit-code contract end to end") {
    const fs::path dir = testsup::fresh_dir("cli_binary");
    json j = base_config();
    j["outputs"] = (dir / "out").string();
    j["mc"] = {{"n_paths", 64}, {"seed", 5}};
    const std::string cfg = write_json(dir, "run.json", j);

    const std::string binary = CHAOSRATES_CLI_PATH;
    auto run = [&](const std::string& args) {
        const int status = std::system((binary + " " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    CHECK(run("validate --config " + cfg) == 0);
    CHECK(run("simulate --config " + cfg) == 0);
    CHECK(run("simulate --config " + (dir / "absent.json").string()) == 2);
    CHECK(run("simulate") == 2);             // missing required flag
    CHECK(run("unknown-verb --config x") == 2);
    CHECK(run("--help") == 0);
}
