#pragma once

// Mean-field side of the model: the characteristic field V[A,mu,x], the
// characteristic flow, the Neunzert fixed-point (Picard) solver for the
// fiber-measure VFPE, and an independent finite-volume transport oracle.

#include "gdyn/coupling.hpp"
#include "gdyn/graphop.hpp"
#include "gdyn/measures.hpp"
#include "gdyn/metrics.hpp"

#include <functional>
#include <vector>

namespace gdyn {

/// V[A, mu, x](t, u) = C * integral of D(v - u) against the mixed fiber
/// (A mu_t)^x. The mixing and the pairing with harmonic D reduce to
/// per-harmonic moment sums cached per time stamp; between stamps the
/// moments (hence V) are interpolated linearly. Every evaluation enforces
/// the |V| <= C*sup|D|*b*gamma_A bound.
class FieldEvaluator {
  public:
    FieldEvaluator(const Graphop& A, const CouplingSpec& coupling, int cells, double b = 1.0);

    /// cache mixed moments of a measure trajectory (strictly increasing stamps)
    void set_trajectory(std::vector<double> stamps, const std::vector<MeasureFamily>& families);

    double operator()(double t, double u, int cell) const;
    double field_at(double t, double u, double x) const; // x in node space
    double field_bound() const { return bound_; }
    int cells() const { return n_; }
    double mass_cap() const { return b_; }
    const Graphop& graphop() const { return A_; }

  private:
    void interp_row(double t, int cell, double* out) const;
    double eval_row(const double* row, double u) const;

    Graphop A_;
    CouplingSpec cpl_;
    int n_;
    double b_;
    double bound_;
    std::vector<std::vector<double>> mix_;
    std::vector<double> stamps_;
    std::vector<std::vector<double>> moments_; // [stamp][cell*2J + 2(j-1)] = P_j, Q_j
};

/// One classical 4th-order step of every particle along the frozen field.
MeasureFamily flow_step(const FieldEvaluator& field, const MeasureFamily& fam,
                        double t, double dt);

/// Integrate a single characteristic from t0 to t1 in fixed steps dt.
double flow_map(const FieldEvaluator& field, int cell, double u0, double t0, double t1,
                double dt);

struct PicardResult {
    std::vector<double> stamps;
    std::vector<MeasureFamily> trajectory;
    std::vector<double> gap_history;   // d_alpha(kappa^{k}, kappa^{k-1})
    std::vector<double> ratio_history; // successive gap ratios
    int iterations = 0;
    bool converged = false;
    double alpha = 0.0;
    double contraction_bound = 0.0; // 2Cb / (alpha - b*gamma)
};

/// Neunzert fixed-point iteration kappa -> mu0 o T_{0,t}[A, kappa, x].
/// Requires gamma_A <= 1 and alpha > 2Cb + b*gamma_A; iterates until the
/// d_alpha gap falls below tol. `start` overrides the default constant-in-t
/// initial trajectory (it must match the solver's stamp grid).
PicardResult picard_solve(const Graphop& A, const MeasureFamily& mu0,
                          const CouplingSpec& coupling, double T, double dt, double alpha,
                          double tol = 1e-4, int max_iter = 25,
                          const std::vector<MeasureFamily>* start = nullptr);

struct FvResult {
    std::vector<double> stamps;
    std::vector<std::vector<std::vector<double>>> densities; // [stamp][fiber][u-cell]
    int cells = 0;
    int u_cells = 0;
};

/// Self-consistent first-order upwind finite-volume solution of the VFPE,
/// used as an independent oracle for picard_solve. Rejects steps violating
/// the CFL bound |V| dt / du <= 0.9.
FvResult fv_transport_solve(const Graphop& A, const std::function<double(double, double)>& rho0,
                            const CouplingSpec& coupling, double T, double dt, int n,
                            int u_resolution);

/// Quantile-atom family of one stored FV stamp (atoms of weight 1/Q).
MeasureFamily fv_family(const FvResult& fv, int stamp, int Q);

struct ContinuityReport {
    std::vector<double> per_stamp;    // max adjacent-fiber d_BL per stamp
    std::vector<double> per_boundary; // max over stamps per cyclic boundary
    double overall = 0.0;
};

/// Diagnostic modulus of continuity in x of a family trajectory.
ContinuityReport continuity_in_x_diagnostic(const std::vector<MeasureFamily>& trajectory);

} // namespace gdyn
