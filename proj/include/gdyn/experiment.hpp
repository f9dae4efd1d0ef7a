#pragma once

// Experiment layer: config-driven runs of the convergence triangle
//   Kuramoto --(N = nM)--> VFPE^K --(K)--> VFPE^infinity
// with CSV / manifest / SVG outputs and the trend checks behind
// `triangle --check`.

#include "gdyn/coupling.hpp"
#include "gdyn/graphop.hpp"
#include "gdyn/summability.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace gdyn {

struct ExperimentConfig {
    // operator: ones | band | shift | mixture (see make_graphop)
    std::string graphop = "ones";
    double shift_r = 0.25;
    double band_r = 0.0;
    double band_halfwidth = 0.1;
    double band_height = 5.0;
    int graphop_grid = 400; // must be >= 8*(max K + 1) for the regularizer

    std::string kernel = "fejer"; // fejer | gaussian
    std::vector<int> k_schedule{4, 9, 19, 49};
    std::vector<std::pair<int, int>> nm_schedule{{8, 25}, {16, 50}, {32, 100}};
    int scaling_k = 19; // the fixed K of run_discrete_scaling

    std::string rho0 = "bump";   // uniform | bump
    std::string coupling = "sine"; // sine | sine_pair
    double strength = 1.0;         // C
    double beta = 0.0;             // second harmonic weight for sine_pair

    double T = 1.0;
    double dt = 0.0;    // <= 0: auto, min(1e-2, 0.1/(C*gamma_A))
    double alpha = 0.0; // <= 0: auto, 2Cb + b*gamma_A + 2
    double tol = 1e-4;
    int solver_particles = 200; // quantile atoms per fiber in VFPE solves

    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    std::string out_dir = "out";
    int threads = 1;
};

/// Parse a JSON config file. Unknown keys are rejected (typo guard). Missing
/// keys keep their defaults.
ExperimentConfig load_config(const std::string& path);

/// Structural validation (schedules, variants, admissibility). Throws
/// std::invalid_argument with a readable message.
void validate_config(const ExperimentConfig& cfg);

Graphop make_graphop(const ExperimentConfig& cfg);
SummabilityKernel make_kernel(const ExperimentConfig& cfg, int K);
CouplingSpec make_coupling(const ExperimentConfig& cfg);
std::function<double(double, double)> make_rho0(const ExperimentConfig& cfg);
double effective_dt(const ExperimentConfig& cfg, const Graphop& A);
double effective_alpha(const ExperimentConfig& cfg, const Graphop& A);

struct TriangleRow {
    int n = 0, M = 0, K = 0;
    std::uint64_t seed = 0;
    double emp_vs_vfpek = 0.0;     // sup_t d^{b,m}(empirical, VFPE^K)
    double vfpek_vs_vfpeinf = 0.0; // sup_t d^{b,m}(VFPE^K, VFPE^inf)
    double emp_vs_vfpeinf = 0.0;   // sup_t d^{b,m}(empirical, VFPE^inf)
    bool ok = true;
    std::string error;
};

struct ReportAggregate {
    int n = 0, M = 0, K = 0;
    double med_emp_vfpek = 0.0, med_vfpek_vfpeinf = 0.0, med_emp_vfpeinf = 0.0;
    int count = 0; // rows (seeds) aggregated
};

struct ConvergenceReport {
    std::vector<TriangleRow> rows;

    /// Per-(n, M, K) medians over the ok rows, in first-appearance order.
    std::vector<ReportAggregate> medians() const;
    /// Frozen 7-column schema; failed rows carry nan gaps.
    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;
    bool all_ok() const;
};

/// Full triangle: for every (n, M) x K x seed, sample the discrete model from
/// the K-regularized operator, solve the VFPE for A^K and for A, and record
/// the three gap columns. Sub-run failures are recorded per row and the run
/// continues.
ConvergenceReport run_triangle(const ExperimentConfig& cfg);

/// The N -> infinity edge at fixed K = cfg.scaling_k over the (n, M)
/// schedule. Produces full triangle rows; the first column is the one whose
/// medians check_scaling_trend inspects.
ConvergenceReport run_discrete_scaling(const ExperimentConfig& cfg);

/// One log-scale median-vs-parameter SVG per gap column (parameter = K when
/// it varies, else N = nM). Deterministic bytes, self-contained, data table
/// embedded as a comment. Empty report: stderr warning, no files. Returns the
/// written paths.
std::vector<std::string> emit_plots(const ConvergenceReport& rep, const std::string& out_dir,
                                    const std::string& prefix);

/// JSON manifest echoing the configuration plus produced artifacts, enough to
/// reproduce the run.
void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& artifacts,
                    const std::string& path);

struct TrendCheck {
    bool passed = true;
    std::vector<std::string> violations;
};

/// Triangle consistency on every ok row, and per-(n, M) middle-column medians
/// non-increasing along the K schedule (1e-9 slack). If middle_ceiling > 0,
/// every middle-column median must also stay below it (identity-regularization
/// instances).
TrendCheck check_triangle_trends(const ConvergenceReport& rep,
                                 const std::vector<int>& k_schedule,
                                 double middle_ceiling = -1.0);

/// First-column medians strictly decreasing along the (n, M) schedule, plus
/// row-level triangle consistency.
TrendCheck check_scaling_trend(const ConvergenceReport& rep,
                               const std::vector<std::pair<int, int>>& nm_schedule);

} // namespace gdyn
