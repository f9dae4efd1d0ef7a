#pragma once

// Circle arithmetic for the two tori used throughout: the node space
// Omega = R/Z carrying Haar (Lebesgue) measure, and the phase circle
// T = R/2piZ where oscillator states live.

#include <cmath>
#include <stdexcept>
#include <vector>

namespace gdyn {

inline constexpr double kNodePeriod = 1.0;
inline constexpr double kPhasePeriod = 6.283185307179586476925286766559; // 2*pi

/// Reduce x into [0, period). Throws on non-finite x or period <= 0.
double wrap(double x, double period);

/// Geodesic distance on R/(period Z): min(|a-b| mod, period - |a-b| mod).
double circle_dist(double a, double b, double period);

/// A point on a circle of given circumference. The period tag keeps node-space
/// values (period 1) from being mixed up with phase values (period 2pi).
struct TorusPoint {
    double value = 0.0;
    double period = kNodePeriod;

    TorusPoint() = default;
    TorusPoint(double v, double p) : value(wrap(v, p)), period(p) {}
};

double circle_dist(const TorusPoint& a, const TorusPoint& b);

/// Uniform partition of a circle into n half-open cells [i/n, (i+1)/n) * period.
class TorusGrid {
  public:
    TorusGrid(int resolution, double period);

    int resolution() const { return n_; }
    double period() const { return period_; }
    double cell_width() const { return period_ / n_; }

    /// Midpoint of cell i.
    double midpoint(int i) const;
    /// All midpoints in cell order.
    std::vector<double> midpoints() const;
    /// Index of the cell containing x (x wrapped first).
    int cell_of(double x) const;
    /// Haar measure of one cell as a fraction of the whole circle: 1/n.
    double cell_measure() const { return 1.0 / n_; }

  private:
    int n_;
    double period_;
};

/// Nested pair of node-space partitions: fine resolution N = n*M refines the
/// coarse one, fine cell j sitting inside coarse cell j / M.
struct NestedPartition {
    TorusGrid coarse;
    TorusGrid fine;
    int M;

    int coarse_of(int fine_cell) const;
};

NestedPartition nested_partition(int n, int M, double period = kNodePeriod);

} // namespace gdyn
