#pragma once

// Summability kernels on the unit circle, their convolution action K_n, and
// the graphon regularization K_n A K_n with an explicit kernel matrix.

#include "gdyn/graphop.hpp"
#include "gdyn/torus.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gdyn {

/// Positive symmetric summability kernel k_n with unit integral. Shipped
/// families: Fejer (bandlimited, multiplier (1 - |j|/(n+1))_+) and wrapped
/// Gaussian with bandwidth schedule sigma_n = 1/(2(n+1)).
class SummabilityKernel {
  public:
    enum class Family { Fejer, WrappedGaussian };

    static SummabilityKernel fejer(int n);
    static SummabilityKernel wrapped_gaussian(int n);

    /// k_n(x), period 1, any real x.
    double operator()(double x) const;
    /// Fourier coefficient of e^{2 pi i j x} (real, symmetric in j).
    double fourier_coefficient(int j) const;

    int index() const { return n_; }
    /// minimal grid resolution for which convolution quadrature is trusted
    int min_grid() const { return 8 * (n_ + 1); }
    /// degree beyond which Fourier coefficients are (numerically) zero
    int max_harmonic() const { return max_harmonic_; }
    Family family() const { return family_; }
    std::string name() const;

  private:
    SummabilityKernel(Family f, int n);

    Family family_;
    int n_ = 0;
    double sigma_ = 0.0; // WrappedGaussian only
    int max_harmonic_ = 0;
};

/// (K_n f)(x_i) = (1/G) sum_j k_n(x_i - x_j) f(x_j) on the grid midpoints.
/// Rejects grids coarser than 8(n+1) cells.
std::vector<double> convolve(const SummabilityKernel& k, const TorusGrid& grid,
                             const std::vector<double>& f);

/// K_n A K_n as a graphon on A's evaluation grid. The returned operator
/// carries an exact kernel closure (valid at arbitrary first argument, cell
/// lookup in the second), so regularized operators can be probed off-grid.
Graphop regularize(const Graphop& A, const SummabilityKernel& k);

/// max over test functions of sup |A_reg f - A f| over the probe set
/// consisting of all cell midpoints and all cell boundaries of A's grid.
double o_convergence_gap(const Graphop& A, const Graphop& A_reg,
                         const std::vector<std::function<double(double)>>& test_fns);

/// {1} plus cos/sin harmonics up to the given degree.
std::vector<std::function<double(double)>> default_test_functions(int max_harmonic = 3);

} // namespace gdyn
