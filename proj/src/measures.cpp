#include "gdyn/measures.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gdyn {

PhaseMeasure::PhaseMeasure(std::vector<Particle> particles, double period)
    : particles_(std::move(particles)), period_(period) {
    if (!(period > 0.0) || !std::isfinite(period))
        throw std::invalid_argument("PhaseMeasure: bad period");
    long double m = 0.0L;
    for (auto& p : particles_) {
        if (!std::isfinite(p.position) || !std::isfinite(p.weight))
            throw std::invalid_argument("PhaseMeasure: non-finite particle");
        if (p.weight < 0.0)
            throw std::invalid_argument("PhaseMeasure: negative weight");
        p.position = wrap(p.position, period_);
        m += p.weight;
    }
    mass_ = static_cast<double>(m);
}

PhaseMeasure PhaseMeasure::dirac(double position, double weight, double period) {
    return PhaseMeasure({{position, weight}}, period);
}

MeasureFamily::MeasureFamily(TorusGrid grid, std::vector<PhaseMeasure> fibers, double cap)
    : grid_(grid), fibers_(std::move(fibers)), cap_(cap) {
    if (!(cap > 0.0) || !std::isfinite(cap))
        throw std::invalid_argument("MeasureFamily: cap must be positive");
    if (static_cast<int>(fibers_.size()) != grid_.resolution())
        throw std::invalid_argument("MeasureFamily: fiber count does not match grid");
    for (const auto& f : fibers_) {
        if (f.period() != fibers_.front().period())
            throw std::invalid_argument("MeasureFamily: fibers on different circles");
        // small slack for quadrature round-off in mass computations
        if (f.total_mass() > cap_ * (1.0 + 1e-9) + 1e-12)
            throw std::invalid_argument("MeasureFamily: fiber mass exceeds cap");
    }
}

const PhaseMeasure& MeasureFamily::fiber(int cell) const {
    if (cell < 0 || cell >= static_cast<int>(fibers_.size()))
        throw std::out_of_range("MeasureFamily::fiber: cell out of range");
    return fibers_[cell];
}

void save_measure_family(std::ostream& out, const MeasureFamily& fam, double time_stamp) {
    char buf[64];
    out << "# measure_family v1\n";
    out << "# grid_resolution " << fam.grid().resolution() << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", fam.grid().period());
    out << "# node_period " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g",
                  fam.cells() > 0 ? fam.fiber(0).period() : kPhasePeriod);
    out << "# phase_period " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", fam.cap());
    out << "# cap " << buf << "\n";
    std::snprintf(buf, sizeof buf, "%.17g", time_stamp);
    out << "# time " << buf << "\n";
    out << "# columns: cell_index position weight\n";
    for (int i = 0; i < fam.cells(); ++i) {
        for (const auto& p : fam.fiber(i).particles()) {
            char row[160];
            std::snprintf(row, sizeof row, "%d %.17g %.17g\n", i, p.position, p.weight);
            out << row;
        }
    }
}

void save_measure_family(const std::string& path, const MeasureFamily& fam, double time_stamp) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_measure_family: cannot open " + path);
    save_measure_family(out, fam, time_stamp);
}

MeasureFamily load_measure_family(std::istream& in, double* time_stamp) {
    int resolution = -1;
    double node_period = kNodePeriod, phase_period = kPhasePeriod, cap = 1.0, t = 0.0;
    std::string line;
    std::vector<std::vector<Particle>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string key;
            hs >> key;
            if (key == "grid_resolution") hs >> resolution;
            else if (key == "node_period") hs >> node_period;
            else if (key == "phase_period") hs >> phase_period;
            else if (key == "cap") hs >> cap;
            else if (key == "time") hs >> t;
            continue;
        }
        std::istringstream rs(line);
        int cell;
        Particle p;
        if (!(rs >> cell >> p.position >> p.weight))
            throw std::runtime_error("load_measure_family: malformed row: " + line);
        if (resolution <= 0)
            throw std::runtime_error("load_measure_family: rows before grid_resolution header");
        if (cell < 0 || cell >= resolution)
            throw std::runtime_error("load_measure_family: cell index out of range");
        if (rows.empty()) rows.resize(resolution);
        rows[cell].push_back(p);
    }
    if (resolution <= 0)
        throw std::runtime_error("load_measure_family: missing grid_resolution header");
    if (rows.empty()) rows.resize(resolution);
    std::vector<PhaseMeasure> fibers;
    fibers.reserve(resolution);
    for (auto& r : rows) fibers.emplace_back(std::move(r), phase_period);
    if (time_stamp) *time_stamp = t;
    return MeasureFamily(TorusGrid(resolution, node_period), std::move(fibers), cap);
}

MeasureFamily load_measure_family(const std::string& path, double* time_stamp) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_measure_family: cannot open " + path);
    return load_measure_family(in, time_stamp);
}

MeasureFamily coarsen_family(const MeasureFamily& fam, int n_coarse) {
    const int n = fam.cells();
    if (n_coarse < 1 || n % n_coarse != 0)
        throw std::invalid_argument("coarsen_family: " + std::to_string(n_coarse) +
                                    " does not divide the fine resolution " + std::to_string(n));
    const int ratio = n / n_coarse;
    std::vector<PhaseMeasure> fibers;
    fibers.reserve(n_coarse);
    for (int I = 0; I < n_coarse; ++I) {
        std::vector<Particle> atoms;
        for (int r = 0; r < ratio; ++r)
            for (const auto& p : fam.fiber(I * ratio + r).particles())
                atoms.push_back(Particle{p.position, p.weight / ratio});
        fibers.emplace_back(std::move(atoms), fam.fiber(0).period());
    }
    return MeasureFamily(TorusGrid(n_coarse, fam.grid().period()), std::move(fibers), fam.cap());
}

} // namespace gdyn
