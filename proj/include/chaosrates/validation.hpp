#pragma once

#include "chaosrates/chaos.hpp"
#include "chaosrates/paths.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace chaosrates {

// One tested quantity at one time. `pass` is |estimate - target| <= tolerance
// for two-sided rows and estimate <= target + tolerance for one-sided rows
// (test names ending in "_margin", "_tail" or "_positive").
struct ValidationRow {
    std::string test;
    double time = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool pass = true;
};

struct ReportEntry {
    std::string name;
    std::vector<ValidationRow> rows;
    bool pass = true;
    Eigen::Index n_paths = 0;
    std::uint64_t seed = 0;
    std::string note;
};

struct ValidationReport {
    std::vector<ReportEntry> entries;
    bool all_pass() const;
};

struct ValidationOptions {
    std::vector<double> times; // conditioning times; default {0, h/4, h/2}
    int threads = 1;
    Eigen::Index report_points = 11; // checkpoints reported for trajectory tests
};

// Potential property: pi > 0 pathwise (hard), ensemble mean non-increasing
// within 3 SE slack, mean at T_tail under the family tail bound, and (for
// closed-form families) mean pi(t) against int_t^inf E[sigma^2].
ReportEntry test_potential(const ChaosModel& model, const PathEnsemble& ensemble,
                           const ValidationOptions& opt = {});

// mean rho(t) = rho(0) within 3 SE at checkpoints, plus the one-sided
// supermartingale margin rho(t) - rho(0) <= +3 SE reported separately.
ReportEntry test_rho_martingale(const ChaosModel& model, const PathEnsemble& ensemble,
                                const ValidationOptions& opt = {});

// E[int_0^t pi dB]: value (with closed-form target where one exists) and
// stability under doubling the path count and doubling T_tail (< 5% move).
ReportEntry test_integrability_condition(const ChaosModel& model, const PathEnsemble& ensemble,
                                         double t, const ValidationOptions& opt = {});

// mean over paths of (int_t^inf sigma^2 du) / pi_t = 1.
ReportEntry test_quotient_lemma(const ChaosModel& model, const PathEnsemble& ensemble, double t,
                                const ValidationOptions& opt = {});

// E[(X - X_t)^2] (tail-corrected square of the Ito sum past t) against the
// ensemble mean of pi_t, within 3 combined SE.
ReportEntry test_conditional_variance_identity(const ChaosModel& model,
                                               const PathEnsemble& ensemble, double t,
                                               const ValidationOptions& opt = {});

// Grid-refinement Cauchy check of max_t B = B(horizon) on dt, dt/2, dt/4 with
// a common Brownian refinement; pass when the two finest levels agree to 5%.
ReportEntry test_bank_finiteness(const ChaosSpec& spec, const TimeGrid& base_grid,
                                 Eigen::Index n_paths, std::uint64_t seed,
                                 const ValidationOptions& opt = {});

// Sign flips of sigma (global and on a sub-interval) leave pi, r, B, rho and
// bond prices bit-identical.
ReportEntry test_rotation_invariance(const ChaosModel& model, const PathEnsemble& ensemble,
                                     const ValidationOptions& opt = {});

// Full battery, entries sorted by name.
ValidationReport run_all(const ChaosModel& model, const PathEnsemble& ensemble,
                         const ValidationOptions& opt = {});

// "test,time,estimate,std_error,target,tolerance,verdict" records.
std::string report_csv(const ValidationReport& report);
void print_report(const ValidationReport& report, std::ostream& out);

} // namespace chaosrates
