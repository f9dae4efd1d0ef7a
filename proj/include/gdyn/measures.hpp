#pragma once

// Finite measures on the phase circle represented as weighted particles, and
// piecewise-constant-in-x families of such measures over a node-space grid.

#include "gdyn/torus.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gdyn {

struct Particle {
    double position = 0.0; // on [0, period)
    double weight = 0.0;   // >= 0
};

/// Finite nonnegative measure on a circle, a finite sum of weighted atoms.
class PhaseMeasure {
  public:
    PhaseMeasure() = default;
    explicit PhaseMeasure(std::vector<Particle> particles, double period = kPhasePeriod);

    static PhaseMeasure dirac(double position, double weight = 1.0,
                              double period = kPhasePeriod);

    const std::vector<Particle>& particles() const { return particles_; }
    double period() const { return period_; }
    double total_mass() const { return mass_; }
    bool empty() const { return particles_.empty(); }
    std::size_t size() const { return particles_.size(); }

  private:
    std::vector<Particle> particles_;
    double period_ = kPhasePeriod;
    double mass_ = 0.0;
};

/// One phase measure per node-space cell: the computable stand-in for a
/// measurable family x -> mu^x with sup_x mu^x(T) <= cap.
class MeasureFamily {
  public:
    MeasureFamily(TorusGrid grid, std::vector<PhaseMeasure> fibers, double cap = 1.0);

    const TorusGrid& grid() const { return grid_; }
    int cells() const { return grid_.resolution(); }
    double cap() const { return cap_; }
    const PhaseMeasure& fiber(int cell) const;
    const std::vector<PhaseMeasure>& fibers() const { return fibers_; }

  private:
    TorusGrid grid_;
    std::vector<PhaseMeasure> fibers_;
    double cap_;
};

/// Columnar text serialization: header comments, then one row per particle
/// (cell_index position weight). Doubles are written exactly (17 digits).
void save_measure_family(std::ostream& out, const MeasureFamily& fam, double time_stamp);
void save_measure_family(const std::string& path, const MeasureFamily& fam, double time_stamp);
MeasureFamily load_measure_family(std::istream& in, double* time_stamp = nullptr);
MeasureFamily load_measure_family(const std::string& path, double* time_stamp = nullptr);

/// Cell-average a family down to a coarser node grid (resolution must divide
/// the fine one): coarse fiber = mean of its constituent fine fibers.
MeasureFamily coarsen_family(const MeasureFamily& fam, int n_coarse);

} // namespace gdyn
