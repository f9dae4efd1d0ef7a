#pragma once

// Graphops represented through their fiber-measure families {nu_x}: each node
// x sees a finite measure on the node space, (Af)(x) = integral of f against
// nu_x. Shipped constructors: graphon kernels (pure density), atomic shifts
// (pure atoms at x +- r), arc bands (annular band kernels), and nonnegative
// mixtures. All variants are self-adjoint and positivity preserving.

#include "gdyn/measures.hpp"
#include "gdyn/torus.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace gdyn {

/// Materialized fiber measure nu_x: exact atoms plus an optional
/// piecewise-constant density on the evaluation grid.
struct FiberMeasure {
    std::vector<Particle> atoms;  // locations on Omega (period 1)
    std::vector<double> density;  // per-cell values; empty if purely atomic
    double total_mass = 0.0;
};

class Graphop {
  public:
    /// Graphon kernel from a callable, sampled at cell midpoints and
    /// symmetrized as (W + W^T)/2; warns on stderr if the asymmetry of the
    /// samples exceeds 1e-9.
    static Graphop graphon(const TorusGrid& grid,
                           const std::function<double(double, double)>& W);
    /// Graphon kernel from an explicit row-major matrix (resolution^2 values).
    static Graphop graphon_matrix(const TorusGrid& grid, std::vector<double> W);
    /// nu_x = 1/2 delta_{x+r} + 1/2 delta_{x-r}.
    static Graphop atomic_shift(const TorusGrid& grid, double r);
    /// Annular band kernel W(x,y) = height/2 on circle_dist(y, x+r) < eps plus
    /// the mirrored band at x-r; fiber mass = 2*eps*height independent of r.
    /// Materialized as an exact (cell-averaged in y) circulant kernel matrix.
    static Graphop arc_band(const TorusGrid& grid, double r, double halfwidth,
                            double height);
    /// Nonnegative combination sum_k coeff_k * A_k on a common grid.
    static Graphop mixture(std::vector<std::pair<double, Graphop>> parts);

    const TorusGrid& grid() const { return grid_; }

    /// Materialize nu_{x_i} for grid cell i.
    FiberMeasure fiber(int cell) const;

    /// Degrees x -> nu_x(Omega) per cell, and their supremum gamma_A.
    const std::vector<double>& degrees() const { return degrees_; }
    double degree(int cell) const { return degrees_.at(cell); }
    double gamma() const { return gamma_; }

    /// If all degrees agree within tol, returns the common value c.
    std::optional<double> check_c_regular(double tol) const;

    /// ||A||_{1->1}: equals c for c-regular graphops (Cor. 5.3); otherwise a
    /// grid upper estimate over normalized cell-indicator test functions.
    double norm_1_to_1() const;

    /// (Af)(x_i) at all cell midpoints; atoms evaluated exactly through the
    /// callable, densities by midpoint quadrature.
    std::vector<double> apply(const std::function<double(double)>& f) const;
    /// (Af)(x) at an arbitrary point. Atomic parts are exact in x; kernel
    /// parts use the stored row of the cell containing x unless an exact
    /// kernel closure is attached (see with_kernel_fn).
    double apply_at(const std::function<double(double)>& f, double x) const;
    /// (Af) for a grid function given by midpoint values (piecewise-constant
    /// interpretation: atoms read the value of their containing cell).
    std::vector<double> apply_grid(const std::vector<double>& f) const;

    /// Cell-averaged fiber masses at resolution n: M[i][j] = n * integral over
    /// x in cell_i of nu_x(cell_j). Symmetric for all shipped variants; this
    /// is the operator as seen by piecewise-constant measure families and the
    /// source of sampled weight matrices.
    std::vector<std::vector<double>> mixing_matrix(int n) const;

    /// Attach an exact kernel closure (used by regularization so that the
    /// smooth kernel can be evaluated off-grid); returns a copy.
    Graphop with_kernel_fn(std::function<double(double, double)> kernel_fn) const;
    const std::function<double(double, double)>& kernel_fn() const { return kernel_fn_; }

    /// Access to the raw kernel matrix (empty for purely atomic variants).
    const std::vector<double>& kernel_matrix() const;
    bool is_atomic() const;

    std::string describe() const;

  private:
    struct GraphonData {
        std::vector<double> W; // row-major resolution^2
    };
    struct ShiftData {
        double r;
    };
    struct MixtureData {
        std::vector<std::pair<double, Graphop>> parts;
    };
    using Variant = std::variant<GraphonData, ShiftData, MixtureData>;

    Graphop(TorusGrid grid, Variant v, std::string label);
    void finalize(); // degree cache

    TorusGrid grid_;
    std::shared_ptr<const Variant> data_;
    std::function<double(double, double)> kernel_fn_; // optional exact kernel
    std::vector<double> degrees_;
    double gamma_ = 0.0;
    std::string label_;
};

} // namespace gdyn
