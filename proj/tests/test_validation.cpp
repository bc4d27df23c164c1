#include <doctest.h>

#include "test_support.hpp"

#include <chaosrates/chaos.hpp>
#include <chaosrates/validation.hpp>

#include <cmath>
#include <sstream>

using namespace chaosrates;

namespace {

FirstChaos flat_unit_rate() { return FirstChaos{ExpFn{1.0, 0.5}}; }

SecondChaos sample_second_chaos() {
    return SecondChaos{ExpFn{0.8, 0.7}, ExpFn{0.5, 0.3}, ExpFn{1.0, 0.9}};
}

// GBM-shaped custom integrand whose conditional moments truncate at T_tail;
// eps_tail set to the true missing mass e^{-r T_tail}.
CustomIntegrand truncated_gbm(double r, double l, const TimeGrid& grid, Eigen::Index n_inner) {
    CustomIntegrand ci;
    ci.evaluator = gbm_sigma_functional(r, l);
    ci.n_inner = n_inner;
    ci.eps_tail = std::exp(-r * grid.tail_horizon());
    ci.label = "truncated_gbm";
    return ci;
}

const ValidationRow& find_row(const ReportEntry& entry, const std::string& name) {
    for (const auto& row : entry.rows)
        if (row.test == name) return row;
    REQUIRE(false);
    return entry.rows.front();
}

} // namespace

TEST_CASE("potential test: closed-form families pass, exact for first chaos") {
    const TimeGrid grid = make_grid(2.0, 100, 2.0);
    const PathEnsemble ens = sample_paths(grid, 4000, 111, false);
    for (const ChaosSpec spec :
         {ChaosSpec{flat_unit_rate()}, ChaosSpec{GbmExponential{0.05, 0.2}},
          ChaosSpec{sample_second_chaos()}}) {
        const ReportEntry entry = test_potential(ChaosModel(spec, grid), ens);
        CHECK(entry.pass);
    }

    // deterministic family reports zero standard errors
    const ReportEntry fc = test_potential(ChaosModel(flat_unit_rate(), grid), ens);
    CHECK(find_row(fc, "potential_mean_pi").std_error == 0.0);
    CHECK(find_row(fc, "potential_positive").estimate > 0.0);
}

TEST_CASE("potential test: vanishing sigma is a hard positivity failure") {
    const TimeGrid grid = make_grid(1.0, 20, 1.0);
    PiecewiseConstFn box;
    box.knots = Eigen::ArrayXd::LinSpaced(2, 0.0, 0.5);
    box.values = Eigen::ArrayXd::Ones(1);
    box.tail_amplitude = 0.0;
    box.tail_rate = 0.0;
    CustomIntegrand ci;
    ci.evaluator = deterministic_sigma_functional(box);
    ci.n_inner = 2;
    const ChaosModel model(ci, grid);
    const PathEnsemble ens = sample_paths(grid, 32, 7, false);
    const ReportEntry entry = test_potential(model, ens);
    CHECK(!entry.pass);
    CHECK(!find_row(entry, "potential_positive").pass);
}

TEST_CASE("rho martingale: passes for well-built families") {
    const TimeGrid grid = make_grid(2.0, 200, 3.0);
    const PathEnsemble ens = sample_paths(grid, 8000, 303, false);
    for (const ChaosSpec spec :
         {ChaosSpec{flat_unit_rate()}, ChaosSpec{GbmExponential{0.05, 0.2}},
          ChaosSpec{sample_second_chaos()}}) {
        const ReportEntry entry = test_rho_martingale(ChaosModel(spec, grid), ens);
        CHECK(entry.pass);
    }
}

TEST_CASE("rho martingale: truncation-broken spec fails equality, keeps the margin") {
    const TimeGrid grid = make_grid(2.0, 50, 1.25);
    const ChaosModel model(truncated_gbm(0.05, 0.2, grid, 48), grid);
    const PathEnsemble ens = sample_paths(grid, 160, 127, false);
    const ReportEntry entry = test_rho_martingale(model, ens);
    CHECK(!entry.pass);
    bool equality_failed = false;
    bool margin_held = true;
    for (const auto& row : entry.rows) {
        if (row.test == "rho_martingale" && !row.pass) equality_failed = true;
        if (row.test == "rho_supermartingale_margin" && !row.pass) margin_held = false;
    }
    CHECK(equality_failed);
    CHECK(margin_held);
}

TEST_CASE("integrability condition: closed-form values and stability") {
    const TimeGrid grid = make_grid(2.0, 200, 2.0);
    const PathEnsemble ens = sample_paths(grid, 4000, 131, false);

    // flat model: E int_0^1 pi dB = mass ln(mass/m2(1)) = 1 exactly
    const ReportEntry fc = test_integrability_condition(ChaosModel(flat_unit_rate(), grid), ens, 1.0);
    CHECK(fc.pass);
    const ValidationRow& value = find_row(fc, "integrability_value");
    CHECK(value.estimate == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(value.target == doctest::Approx(1.0).epsilon(1e-12));

    const ReportEntry gbm =
        test_integrability_condition(ChaosModel(GbmExponential{0.05, 0.2}, grid), ens, 1.0);
    CHECK(gbm.pass);
    CHECK(find_row(gbm, "integrability_value").target == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("integrability condition: heavy truncated tail is unstable") {
    const TimeGrid grid = make_grid(1.0, 20, 2.0);
    CustomIntegrand ci;
    ci.evaluator = deterministic_sigma_functional(ExpFn{1.0, 0.025});
    ci.n_inner = 2;
    ci.eps_tail = 0.0; // deliberately mis-certified heavy tail
    ci.label = "heavy_tail";
    const ChaosModel model(ci, grid);
    const PathEnsemble ens = sample_paths(grid, 64, 137, false);
    const ReportEntry entry = test_integrability_condition(model, ens, 0.5);
    CHECK(!entry.pass);
    CHECK(!find_row(entry, "integrability_double_tail").pass);
}

TEST_CASE("quotient lemma: exact for first chaos, statistical for the rest") {
    // dt fine enough that the left-endpoint bias sits well inside 3 SE
    const TimeGrid grid = make_grid(2.0, 400, 3.0);
    const PathEnsemble ens = sample_paths(grid, 8000, 139, false);
    for (double t : {0.0, 1.0}) {
        const ReportEntry fc = test_quotient_lemma(ChaosModel(flat_unit_rate(), grid), ens, t);
        CHECK(fc.pass);
        CHECK(std::abs(find_row(fc, "quotient_lemma").estimate - 1.0) < 1e-8);

        CHECK(test_quotient_lemma(ChaosModel(GbmExponential{0.05, 0.2}, grid), ens, t).pass);
        CHECK(test_quotient_lemma(ChaosModel(sample_second_chaos(), grid), ens, t).pass);
    }
}

TEST_CASE("quotient lemma: noisy nested denominator biases the ratio upward") {
    const TimeGrid grid = make_grid(1.0, 25, 3.0);
    CustomIntegrand ci;
    ci.evaluator = gbm_sigma_functional(0.3, 0.9); // volatile integrand
    ci.n_inner = 2;                                // deliberately tiny inner sample
    ci.eps_tail = std::exp(-0.3 * grid.tail_horizon());
    const ChaosModel model(ci, grid);
    const PathEnsemble ens = sample_paths(grid, 512, 149, false);
    const ReportEntry entry = test_quotient_lemma(model, ens, 0.52);
    CHECK(!entry.pass);
    CHECK(find_row(entry, "quotient_lemma").estimate > 1.0);
}

TEST_CASE("conditional variance identity across families") {
    const TimeGrid grid = make_grid(2.0, 100, 3.0);
    const PathEnsemble ens = sample_paths(grid, 8000, 151, false);
    for (double t : {0.0, 1.0}) {
        CHECK(test_conditional_variance_identity(ChaosModel(flat_unit_rate(), grid), ens, t).pass);
        CHECK(test_conditional_variance_identity(ChaosModel(GbmExponential{0.05, 0.2}, grid), ens, t)
                  .pass);
        CHECK(test_conditional_variance_identity(ChaosModel(sample_second_chaos(), grid), ens, t).pass);
    }
}

TEST_CASE("conditional variance identity flags a mis-certified tail") {
    const TimeGrid grid = make_grid(1.0, 25, 1.5);
    CustomIntegrand ci;
    ci.evaluator = deterministic_sigma_functional(ExpFn{1.0, 0.05});
    ci.n_inner = 2;
    ci.eps_tail = 5.0; // wildly overstated tail mass
    const ChaosModel model(ci, grid);
    const PathEnsemble ens = sample_paths(grid, 256, 157, false);
    CHECK(!test_conditional_variance_identity(model, ens, 0.0).pass);
}

TEST_CASE("bank finiteness: constant-rate families are refinement-exact") {
    const TimeGrid grid = make_grid(1.0, 50, 2.0);
    for (const ChaosSpec spec : {ChaosSpec{flat_unit_rate()}, ChaosSpec{GbmExponential{0.3, 0.4}}}) {
        const ReportEntry entry = test_bank_finiteness(spec, grid, 128, 163);
        CHECK(entry.pass);
        CHECK(find_row(entry, "bank_cauchy").estimate < 1e-3);
    }
    const ReportEntry sc = test_bank_finiteness(sample_second_chaos(), grid, 128, 163);
    CHECK(sc.pass);
}

TEST_CASE("bank finiteness: a dying kernel surfaces as a failed entry") {
    const TimeGrid grid = make_grid(1.0, 10, 1.0);
    PiecewiseConstFn box;
    box.knots = Eigen::ArrayXd::LinSpaced(2, 0.0, 0.5);
    box.values = Eigen::ArrayXd::Ones(1);
    box.tail_amplitude = 0.0;
    box.tail_rate = 0.0;
    CustomIntegrand ci;
    ci.evaluator = deterministic_sigma_functional(box);
    ci.n_inner = 2;
    const ReportEntry entry = test_bank_finiteness(ChaosSpec{ci}, grid, 8, 3);
    CHECK(!entry.pass);
    CHECK(!entry.note.empty());
}

TEST_CASE("rotation invariance holds bit-exactly, and flips do move sigma") {
    const TimeGrid grid = make_grid(1.0, 40, 2.0);
    const PathEnsemble ens = sample_paths(grid, 64, 167, false);
    for (const ChaosSpec spec :
         {ChaosSpec{flat_unit_rate()}, ChaosSpec{GbmExponential{0.3, 0.4}},
          ChaosSpec{sample_second_chaos()}}) {
        const ChaosModel model(spec, grid);
        const ReportEntry entry = test_rotation_invariance(model, ens);
        CHECK(entry.pass);
        CHECK(find_row(entry, "rotation_kernel").estimate == 0.0);
        CHECK(find_row(entry, "rotation_bonds").estimate == 0.0);

        // x_sample genuinely changes under a half-interval flip, so the
        // invariance above is not vacuous
        const ChaosModel flipped(spec, grid, SignFlip{0.0, 0.5});
        CHECK(model.x_sample(ens.path(0)) != flipped.x_sample(ens.path(0)));

        // and the conditional-variance verdict is indifferent to the flip
        const PathEnsemble big = sample_paths(grid, 4000, 171, false);
        CHECK(test_conditional_variance_identity(model, big, 0.5).pass);
        CHECK(test_conditional_variance_identity(flipped, big, 0.5).pass);
    }
}

TEST_CASE("run_all: entries sorted by name, reproducible, csv stable") {
    const TimeGrid grid = make_grid(1.0, 50, 2.0);
    const PathEnsemble ens = sample_paths(grid, 1024, 173, false);
    const ChaosModel model(GbmExponential{0.05, 0.2}, grid);

    const ValidationReport a = run_all(model, ens);
    const ValidationReport b = run_all(model, ens);
    CHECK(a.all_pass());
    REQUIRE(a.entries.size() == b.entries.size());
    for (std::size_t i = 0; i + 1 < a.entries.size(); ++i)
        CHECK(a.entries[i].name <= a.entries[i + 1].name);
    CHECK(report_csv(a) == report_csv(b));

    const std::string csv = report_csv(a);
    CHECK(csv.rfind("test,time,estimate,std_error,target,tolerance,verdict\n", 0) == 0);
    CHECK(csv.find("rho_martingale") != std::string::npos);
    CHECK(csv.find("fail") == std::string::npos);

    std::ostringstream table;
    print_report(a, table);
    CHECK(table.str().find("ALL PASS") != std::string::npos);
}
