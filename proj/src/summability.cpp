#include "gdyn/summability.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace gdyn {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

// largest degree with exp(-2 pi^2 sigma^2 m^2) above double dust
int gaussian_truncation(double sigma) {
    double m = std::sqrt(18.0 * std::log(10.0) / (2.0 * kPi * kPi)) / sigma;
    return static_cast<int>(std::ceil(m)) + 1;
}

} // namespace

SummabilityKernel::SummabilityKernel(Family f, int n) : family_(f), n_(n) {
    if (n < 0)
        throw std::invalid_argument("SummabilityKernel: index must be >= 0, got " +
                                    std::to_string(n));
    if (family_ == Family::WrappedGaussian) {
        sigma_ = 1.0 / (2.0 * (n_ + 1));
        max_harmonic_ = gaussian_truncation(sigma_);
    } else {
        max_harmonic_ = n_;
    }
}

SummabilityKernel SummabilityKernel::fejer(int n) {
    return SummabilityKernel(Family::Fejer, n);
}

SummabilityKernel SummabilityKernel::wrapped_gaussian(int n) {
    return SummabilityKernel(Family::WrappedGaussian, n);
}

double SummabilityKernel::operator()(double x) const {
    double t = wrap(x, 1.0);
    if (family_ == Family::Fejer) {
        double s = std::sin(kPi * t);
        if (std::fabs(s) < 1e-4) {
            // closed form divides two near-zero sines here; the coefficient
            // series is short and unconditionally stable
            long double acc = 1.0L;
            for (int j = 1; j <= n_; ++j)
                acc += 2.0L * (1.0 - static_cast<double>(j) / (n_ + 1)) *
                       std::cos(2.0 * kPi * j * t);
            return static_cast<double>(acc);
        }
        double q = std::sin((n_ + 1) * kPi * t) / s;
        return q * q / (n_ + 1);
    }
    // wrapped Gaussian: a handful of images covers all shipped bandwidths
    long double acc = 0.0L;
    for (int m = -6; m <= 6; ++m) {
        double d = (t - m) / sigma_;
        acc += std::exp(-0.5 * d * d);
    }
    return static_cast<double>(acc / (sigma_ * std::sqrt(2.0 * kPi)));
}

double SummabilityKernel::fourier_coefficient(int j) const {
    double a = std::fabs(static_cast<double>(j));
    if (family_ == Family::Fejer)
        return std::max(0.0, 1.0 - a / (n_ + 1));
    return std::exp(-2.0 * kPi * kPi * sigma_ * sigma_ * a * a);
}

std::string SummabilityKernel::name() const {
    const char* fam = family_ == Family::Fejer ? "fejer" : "wrapped_gaussian";
    return std::string(fam) + "(" + std::to_string(n_) + ")";
}

std::vector<double> convolve(const SummabilityKernel& k, const TorusGrid& grid,
                             const std::vector<double>& f) {
    const int G = grid.resolution();
    if (grid.period() != 1.0)
        throw std::invalid_argument("convolve: expected the unit-period node grid");
    if (G < k.min_grid())
        throw std::invalid_argument(
            "convolve: grid resolution " + std::to_string(G) + " under-resolves " +
            k.name() + "; need at least " + std::to_string(k.min_grid()) + " cells");
    if (static_cast<int>(f.size()) != G)
        throw std::invalid_argument("convolve: value vector size " +
                                    std::to_string(f.size()) + " != resolution " +
                                    std::to_string(G));

    std::vector<double> kvals(G);
    for (int d = 0; d < G; ++d)
        kvals[d] = k(static_cast<double>(d) / G); // midpoint differences are exact d/G

    std::vector<double> out(G);
    for (int i = 0; i < G; ++i) {
        long double acc = 0.0L;
        for (int j = 0; j < G; ++j)
            acc += static_cast<long double>(kvals[(i - j + G) % G]) * f[j];
        out[i] = static_cast<double>(acc / G);
    }
    return out;
}

namespace {

// Trig-polynomial representation of the regularized kernel: for each target
// cell j the map x -> W(x, cell j) is a trig poly of degree <= M, stored as
// coef[j * (2M+1)] = a_0, then (a_m, b_m) pairs. Rebuilding W(x, z) from it
// costs O(M) per evaluation via the angle-addition recurrence.
struct TrigKernelTable {
    TorusGrid grid;
    int max_deg;
    std::vector<double> coef;

    TrigKernelTable(const TorusGrid& g, int m)
        : grid(g), max_deg(m),
          coef(static_cast<std::size_t>(g.resolution()) * (2 * m + 1), 0.0) {}

    double eval(double x, double z) const {
        const int j = grid.cell_of(z);
        const double* c = coef.data() + static_cast<std::size_t>(j) * (2 * max_deg + 1);
        double acc = c[0];
        const double cs = std::cos(2.0 * kPi * x);
        const double sn = std::sin(2.0 * kPi * x);
        double cm = 1.0, sm = 0.0;
        for (int m = 1; m <= max_deg; ++m) {
            const double cn = cm * cs - sm * sn;
            sm = sm * cs + cm * sn;
            cm = cn;
            acc += c[2 * m - 1] * cm + c[2 * m] * sm;
        }
        return acc;
    }
};

} // namespace

Graphop regularize(const Graphop& A, const SummabilityKernel& k) {
    const TorusGrid& grid = A.grid();
    const int G = grid.resolution();
    if (G < k.min_grid())
        throw std::invalid_argument(
            "regularize: operator grid resolution " + std::to_string(G) +
            " under-resolves " + k.name() + "; need at least " +
            std::to_string(k.min_grid()) + " cells");

    const int M = std::min(k.max_harmonic(), (G - 1) / 2);

    // H[a][j] = (A k(x_j - .))(y_a), one apply per column
    std::vector<std::vector<double>> Hcol(G);
    for (int j = 0; j < G; ++j) {
        const double xj = grid.midpoint(j);
        Hcol[j] = A.apply([&](double w) { return k(xj - w); });
    }

    // project x -> (1/G) sum_a k(x - y_a) H[a][j] onto its harmonics:
    // a_0 = c_0 * mean_a H, (a_m, b_m) = 2 c_m * (<cos_m, H>, <sin_m, H>)/G
    std::vector<double> ctab(static_cast<std::size_t>(M + 1) * G), stab(ctab.size());
    for (int m = 0; m <= M; ++m)
        for (int a = 0; a < G; ++a) {
            const double ang = 2.0 * kPi * m * grid.midpoint(a);
            ctab[static_cast<std::size_t>(m) * G + a] = std::cos(ang);
            stab[static_cast<std::size_t>(m) * G + a] = std::sin(ang);
        }

    auto table = std::make_shared<TrigKernelTable>(grid, M);
    for (int j = 0; j < G; ++j) {
        double* c = table->coef.data() + static_cast<std::size_t>(j) * (2 * M + 1);
        for (int m = 0; m <= M; ++m) {
            long double pa = 0.0L, pb = 0.0L;
            const double* cr = ctab.data() + static_cast<std::size_t>(m) * G;
            const double* sr = stab.data() + static_cast<std::size_t>(m) * G;
            for (int a = 0; a < G; ++a) {
                pa += static_cast<long double>(cr[a]) * Hcol[j][a];
                pb += static_cast<long double>(sr[a]) * Hcol[j][a];
            }
            const double scale = (m == 0 ? 1.0 : 2.0) * k.fourier_coefficient(m) / G;
            if (m == 0) {
                c[0] = static_cast<double>(pa) * scale;
            } else {
                c[2 * m - 1] = static_cast<double>(pa) * scale;
                c[2 * m] = static_cast<double>(pb) * scale;
            }
        }
    }

    std::vector<double> W(static_cast<std::size_t>(G) * G);
    for (int i = 0; i < G; ++i) {
        const double xi = grid.midpoint(i);
        for (int j = 0; j < G; ++j) {
            double v = table->eval(xi, grid.midpoint(j));
            // k*A*k is nonnegative; sub-dust negatives are quadrature noise
            if (v < 0.0 && v > -1e-10) v = 0.0;
            W[static_cast<std::size_t>(i) * G + j] = v;
        }
    }

    Graphop reg = Graphop::graphon_matrix(grid, W);
    return reg.with_kernel_fn(
        [table](double x, double z) { return table->eval(x, z); });
}

double o_convergence_gap(const Graphop& A, const Graphop& A_reg,
                         const std::vector<std::function<double(double)>>& test_fns) {
    if (test_fns.empty())
        throw std::invalid_argument("o_convergence_gap: need at least one test function");
    if (A.grid().period() != A_reg.grid().period())
        throw std::invalid_argument("o_convergence_gap: operators live on different node circles");

    // midpoints and cell boundaries of both grids; boundaries catch extrema
    // that midpoint grids straddle (x = 0 in particular)
    std::vector<double> probes;
    for (const Graphop* op : {&A, &A_reg}) {
        const TorusGrid& g = op->grid();
        probes.reserve(probes.size() + 2 * g.resolution());
        for (int i = 0; i < g.resolution(); ++i) {
            probes.push_back(g.midpoint(i));
            probes.push_back(i * g.cell_width());
        }
    }

    double worst = 0.0;
    for (const auto& f : test_fns)
        for (double x : probes) {
            const double d = std::fabs(A_reg.apply_at(f, x) - A.apply_at(f, x));
            if (d > worst) worst = d;
        }
    return worst;
}

std::vector<std::function<double(double)>> default_test_functions(int max_harmonic) {
    if (max_harmonic < 0)
        throw std::invalid_argument("default_test_functions: negative harmonic bound");
    std::vector<std::function<double(double)>> fns;
    fns.push_back([](double) { return 1.0; });
    for (int j = 1; j <= max_harmonic; ++j) {
        fns.push_back([j](double x) { return std::cos(2.0 * kPi * j * x); });
        fns.push_back([j](double x) { return std::sin(2.0 * kPi * j * x); });
    }
    return fns;
}

} // namespace gdyn
