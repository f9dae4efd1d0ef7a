#pragma once

// Bounded-Lipschitz metric between particle measures on the circle, the
// graphop-weighted fiber metrics, and the extended operator action on
// measure families.

#include "gdyn/graphop.hpp"
#include "gdyn/measures.hpp"

#include <utility>
#include <vector>

namespace gdyn {

/// d_BL(mu, nu) = sup { integral of f d(mu - nu) : f circle -> [0,1],
/// 1-Lipschitz }. Computed exactly as a linear program over the union of
/// particle positions; the LP is solved through its dual, a min-cost flow on
/// the support cycle with a unit-cost disposal hub (two signed runs, max).
double d_bl(const PhaseMeasure& mu, const PhaseMeasure& nu);

/// Per-cell d_BL between corresponding fibers.
std::vector<double> fiber_distance_profile(const MeasureFamily& mu,
                                           const MeasureFamily& ka);

/// Extended graphop action (A mu)^x = integral of mu^y over nu_x(dy):
/// cell-averaged fiber mixture with the operator's mixing weights. Output
/// fiber masses obey the Lemma 2.2 bound cap * gamma_A.
MeasureFamily extended_apply(const Graphop& A, const MeasureFamily& mu);

/// d^{b,A,x}: the nu_x-integral of the per-fiber d_BL profile, at one cell.
double d_fiber(const Graphop& A, const MeasureFamily& mu, const MeasureFamily& ka,
               int cell);

/// d^{b,A} = max over cells of d_fiber.
double d_bA(const Graphop& A, const MeasureFamily& mu, const MeasureFamily& ka);

/// d^{b,m}: node-averaged per-fiber d_BL (the mean-field pseudometric).
double d_bm(const MeasureFamily& mu, const MeasureFamily& ka);

using TimedFamily = std::pair<double, MeasureFamily>;

/// d_alpha = max over shared stamps of exp(-alpha t) * d^{b,A}(mu_t, ka_t).
double d_alpha(const std::vector<TimedFamily>& mu_traj,
               const std::vector<TimedFamily>& ka_traj, const Graphop& A,
               double alpha);

} // namespace gdyn
