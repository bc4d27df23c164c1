#include "chaosrates/config.hpp"

#include <cmath>
#include <fstream>

namespace chaosrates {

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
    }
}

const json& require(const json& obj, const char* key, const std::string& where) {
    const auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(where + ": missing key '" + key + "'");
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + ": expected a number");
    return v.get<double>();
}

Eigen::Index integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + ": expected an integer");
    return v.get<Eigen::Index>();
}

Eigen::ArrayXd number_array(const json& v, const std::string& where) {
    if (!v.is_array()) throw ConfigError(where + ": expected an array of numbers");
    Eigen::ArrayXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& x : v) out[i++] = number(x, where);
    return out;
}

} // namespace

DetFn detfn_from_json(const json& j, const std::string& where) {
    check_keys(j, {"form", "a", "b", "knots", "values", "tail_value", "tail_rate"}, where);
    const auto form = require(j, "form", where).get<std::string>();
    if (form == "exp") {
        check_keys(j, {"form", "a", "b"}, where);
        return ExpFn{number(require(j, "a", where), where + ".a"),
                     number(require(j, "b", where), where + ".b")};
    }
    if (form == "piecewise") {
        check_keys(j, {"form", "knots", "values", "tail_value", "tail_rate"}, where);
        PiecewiseConstFn fn;
        fn.knots = number_array(require(j, "knots", where), where + ".knots");
        fn.values = number_array(require(j, "values", where), where + ".values");
        fn.tail_amplitude = number(require(j, "tail_value", where), where + ".tail_value");
        fn.tail_rate = number(require(j, "tail_rate", where), where + ".tail_rate");
        return fn;
    }
    throw ConfigError(where + ": unknown form '" + form + "' (want exp | piecewise)");
}

json detfn_to_json(const DetFn& fn) {
    if (const auto* e = std::get_if<ExpFn>(&fn)) return json{{"form", "exp"}, {"a", e->amplitude}, {"b", e->rate}};
    const auto& p = std::get<PiecewiseConstFn>(fn);
    json out{{"form", "piecewise"},
             {"tail_value", p.tail_amplitude},
             {"tail_rate", p.tail_rate}};
    out["knots"] = std::vector<double>(p.knots.data(), p.knots.data() + p.knots.size());
    out["values"] = std::vector<double>(p.values.data(), p.values.data() + p.values.size());
    return out;
}

ChaosSpec spec_from_json(const json& j) {
    const std::string where = "spec";
    if (!j.is_object()) throw ConfigError("spec: expected an object");
    const auto family = require(j, "family", where).get<std::string>();
    if (family == "first_chaos") {
        check_keys(j, {"family", "sigma"}, where);
        return FirstChaos{detfn_from_json(require(j, "sigma", where), "spec.sigma")};
    }
    if (family == "second_chaos") {
        check_keys(j, {"family", "psi", "g", "h"}, where);
        return SecondChaos{detfn_from_json(require(j, "psi", where), "spec.psi"),
                           detfn_from_json(require(j, "g", where), "spec.g"),
                           detfn_from_json(require(j, "h", where), "spec.h")};
    }
    if (family == "gbm_exponential") {
        check_keys(j, {"family", "r", "lambda"}, where);
        return GbmExponential{number(require(j, "r", where), "spec.r"),
                              number(require(j, "lambda", where), "spec.lambda")};
    }
    if (family == "custom") {
        check_keys(j, {"family", "integrand", "n_inner", "eps_tail"}, where);
        const json& integrand = require(j, "integrand", where);
        check_keys(integrand, {"kind", "r", "lambda", "sigma"}, "spec.integrand");
        const auto kind = require(integrand, "kind", "spec.integrand").get<std::string>();
        CustomIntegrand ci;
        if (kind == "gbm_sigma") {
            check_keys(integrand, {"kind", "r", "lambda"}, "spec.integrand");
            ci.evaluator =
                gbm_sigma_functional(number(require(integrand, "r", "spec.integrand"), "spec.integrand.r"),
                                     number(require(integrand, "lambda", "spec.integrand"), "spec.integrand.lambda"));
        } else if (kind == "deterministic") {
            check_keys(integrand, {"kind", "sigma"}, "spec.integrand");
            ci.evaluator = deterministic_sigma_functional(
                detfn_from_json(require(integrand, "sigma", "spec.integrand"), "spec.integrand.sigma"));
        } else {
            throw ConfigError("spec.integrand: unknown kind '" + kind +
                              "' (want gbm_sigma | deterministic)");
        }
        ci.label = kind;
        ci.n_inner = integer(require(j, "n_inner", where), "spec.n_inner");
        if (j.contains("eps_tail")) ci.eps_tail = number(j.at("eps_tail"), "spec.eps_tail");
        return ci;
    }
    throw ConfigError("spec.family: unknown family '" + family + "'");
}

json spec_to_json(const ChaosSpec& spec) {
    if (const auto* fc = std::get_if<FirstChaos>(&spec))
        return json{{"family", "first_chaos"}, {"sigma", detfn_to_json(fc->sigma)}};
    if (const auto* sc = std::get_if<SecondChaos>(&spec))
        return json{{"family", "second_chaos"},
                    {"psi", detfn_to_json(sc->psi)},
                    {"g", detfn_to_json(sc->g)},
                    {"h", detfn_to_json(sc->h)}};
    if (const auto* gbm = std::get_if<GbmExponential>(&spec))
        return json{{"family", "gbm_exponential"}, {"r", gbm->rate}, {"lambda", gbm->lambda}};
    const auto& ci = std::get<CustomIntegrand>(spec);
    return json{{"family", "custom"},
                {"integrand", ci.label.empty() ? "opaque" : ci.label},
                {"n_inner", ci.n_inner},
                {"eps_tail", ci.eps_tail}};
}

RunConfig parse_config(const json& j) {
    RunConfig cfg;
    cfg.raw = j;
    check_keys(j,
               {"spec", "grid", "mc", "outputs", "maturities", "option", "cashflow", "curve_file",
                "validate_times", "dump_paths", "surface_paths"},
               "config");

    if (j.contains("spec")) {
        cfg.spec = spec_from_json(j.at("spec"));
        cfg.has_spec = true;
    }
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        check_keys(g, {"t_max", "n_steps", "tail_factor"}, "grid");
        cfg.grid.t_max = number(require(g, "t_max", "grid"), "grid.t_max");
        cfg.grid.n_steps = integer(require(g, "n_steps", "grid"), "grid.n_steps");
        if (g.contains("tail_factor")) cfg.grid.tail_factor = number(g.at("tail_factor"), "grid.tail_factor");
        cfg.has_grid = true;
    }
    if (j.contains("mc")) {
        const json& m = j.at("mc");
        check_keys(m, {"n_paths", "seed", "antithetic"}, "mc");
        cfg.mc.n_paths = integer(require(m, "n_paths", "mc"), "mc.n_paths");
        const json& seed = require(m, "seed", "mc");
        if (!seed.is_number_integer()) throw ConfigError("mc.seed: expected an integer");
        cfg.mc.seed = seed.get<std::uint64_t>();
        if (m.contains("antithetic")) {
            if (!m.at("antithetic").is_boolean()) throw ConfigError("mc.antithetic: expected a boolean");
            cfg.mc.antithetic = m.at("antithetic").get<bool>();
        }
        cfg.has_mc = true;
    }
    if (j.contains("outputs")) {
        if (!j.at("outputs").is_string()) throw ConfigError("outputs: expected a string path");
        cfg.outputs = j.at("outputs").get<std::string>();
    }
    if (j.contains("maturities")) {
        const Eigen::ArrayXd m = number_array(j.at("maturities"), "maturities");
        cfg.maturities.assign(m.data(), m.data() + m.size());
    }
    if (j.contains("option")) {
        const json& o = j.at("option");
        check_keys(o, {"t", "T", "K"}, "option");
        cfg.option.t = number(require(o, "t", "option"), "option.t");
        cfg.option.T = number(require(o, "T", "option"), "option.T");
        cfg.option.K = number(require(o, "K", "option"), "option.K");
        cfg.has_option = true;
    }
    if (j.contains("cashflow")) {
        const json& c = j.at("cashflow");
        check_keys(c, {"pay_time", "amount"}, "cashflow");
        cfg.cashflow.pay_time = number(require(c, "pay_time", "cashflow"), "cashflow.pay_time");
        if (c.contains("amount")) cfg.cashflow.amount = number(c.at("amount"), "cashflow.amount");
        cfg.has_cashflow = true;
    }
    if (j.contains("curve_file")) {
        if (!j.at("curve_file").is_string()) throw ConfigError("curve_file: expected a string path");
        cfg.curve_file = j.at("curve_file").get<std::string>();
    }
    if (j.contains("validate_times")) {
        const Eigen::ArrayXd t = number_array(j.at("validate_times"), "validate_times");
        cfg.validate_times.assign(t.data(), t.data() + t.size());
    }
    if (j.contains("dump_paths")) cfg.dump_paths = integer(j.at("dump_paths"), "dump_paths");
    if (j.contains("surface_paths"))
        cfg.surface_paths = integer(j.at("surface_paths"), "surface_paths");
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

} // namespace chaosrates
