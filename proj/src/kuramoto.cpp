#include "gdyn/kuramoto.hpp"

#include "gdyn/torus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace gdyn {

namespace {

// inverse CDF of a piecewise-constant circle density: cum holds cell mass
// prefix sums, h the cell width; target in [0, cum.back())
double inv_cdf(const std::vector<double>& cum, double h, double target) {
    auto it = std::upper_bound(cum.begin(), cum.end(), target);
    int i = static_cast<int>(it - cum.begin());
    if (i >= static_cast<int>(cum.size())) i = static_cast<int>(cum.size()) - 1;
    const double before = i > 0 ? cum[i - 1] : 0.0;
    const double mass = cum[i] - before;
    const double frac = mass > 0.0 ? (target - before) / mass : 0.5;
    return wrap((i + frac) * h, kPhasePeriod);
}

std::vector<double> mass_prefix(const std::vector<double>& density, double h) {
    std::vector<double> cum(density.size());
    long double acc = 0.0L;
    for (std::size_t i = 0; i < density.size(); ++i) {
        acc += static_cast<long double>(density[i]) * h;
        cum[i] = static_cast<double>(acc);
    }
    return cum;
}

double u53(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

} // namespace

OscillatorState make_oscillator_state(std::vector<double> phases,
                                      std::vector<double> weights) {
    const int N = static_cast<int>(phases.size());
    if (N < 1) throw std::invalid_argument("oscillator state: need at least one phase");
    if (weights.size() != static_cast<std::size_t>(N) * N)
        throw std::invalid_argument("oscillator state: weight matrix size " +
                                    std::to_string(weights.size()) + " != N^2 for N=" +
                                    std::to_string(N));
    double wmax = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w)) throw std::invalid_argument("oscillator state: non-finite weight");
        wmax = std::max(wmax, std::fabs(w));
    }
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < i; ++j)
            if (std::fabs(weights[static_cast<std::size_t>(i) * N + j] -
                          weights[static_cast<std::size_t>(j) * N + i]) >
                1e-9 * (1.0 + wmax))
                throw std::invalid_argument("oscillator state: weight matrix not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
    for (double& w : weights) {
        if (w < -1e-12)
            throw std::invalid_argument("oscillator state: negative weight " + std::to_string(w));
        if (w < 0.0) w = 0.0;
    }
    for (double& u : phases) {
        if (!std::isfinite(u)) throw std::invalid_argument("oscillator state: non-finite phase");
        u = wrap(u, kPhasePeriod);
    }
    return OscillatorState{N, std::move(phases), std::move(weights)};
}

std::vector<double> sample_weights(const Graphop& W, int N) {
    if (N < 1) throw std::invalid_argument("sample_weights: N must be >= 1");
    const auto& K = W.kernel_matrix();
    if (K.empty())
        throw std::invalid_argument("sample_weights: operator has no graphon kernel (" +
                                    W.describe() + ")");
    const int G = W.grid().resolution();
    std::vector<double> A(static_cast<std::size_t>(N) * N);

    if (G % N == 0) {
        const int s = G / N; // exact block averages of the pw-constant kernel
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j) {
                long double acc = 0.0L;
                for (int a = i * s; a < (i + 1) * s; ++a)
                    for (int b = j * s; b < (j + 1) * s; ++b)
                        acc += K[static_cast<std::size_t>(a) * G + b];
                const double v = static_cast<double>(acc / (static_cast<long double>(s) * s));
                A[static_cast<std::size_t>(i) * N + j] = v;
                A[static_cast<std::size_t>(j) * N + i] = v;
            }
    } else {
        // midpoint sampling; exact when cells nest the other way (N % G == 0)
        for (int i = 0; i < N; ++i) {
            const int ci = W.grid().cell_of((i + 0.5) / N);
            for (int j = 0; j < N; ++j)
                A[static_cast<std::size_t>(i) * N + j] =
                    K[static_cast<std::size_t>(ci) * G + W.grid().cell_of((j + 0.5) / N)];
        }
    }
    return A;
}

std::vector<double> cell_averaged_density(const std::function<double(double, double)>& rho0,
                                          int n, int cell, int u_resolution) {
    if (n < 1 || cell < 0 || cell >= n)
        throw std::invalid_argument("cell_averaged_density: bad cell index");
    if (u_resolution < 8)
        throw std::invalid_argument("cell_averaged_density: u_resolution too small");
    const int XQ = 16; // x-midpoint quadrature inside the node cell
    const double h = kPhasePeriod / u_resolution;

    std::vector<double> dens(u_resolution);
    for (int i = 0; i < u_resolution; ++i) {
        const double u = (i + 0.5) * h;
        long double acc = 0.0L;
        for (int q = 0; q < XQ; ++q)
            acc += rho0(u, (cell + (q + 0.5) / XQ) / n);
        double v = static_cast<double>(acc / XQ);
        if (!std::isfinite(v) || v < -1e-12)
            throw std::invalid_argument("cell_averaged_density: negative/non-finite density in cell " +
                                        std::to_string(cell) + " near u=" + std::to_string(u));
        dens[i] = std::max(0.0, v);
    }

    long double mass = 0.0L;
    for (double v : dens) mass += static_cast<long double>(v) * h;
    const double defect = std::fabs(static_cast<double>(mass) - 1.0);
    if (defect > 1e-4)
        throw std::invalid_argument("cell_averaged_density: cell " + std::to_string(cell) +
                                    " mass defect " + std::to_string(defect) +
                                    " (density must integrate to 1 in u)");
    for (double& v : dens) v = static_cast<double>(v / mass);
    return dens;
}

std::vector<double> quantile_atoms(const std::vector<double>& density, int Q) {
    if (Q < 1) throw std::invalid_argument("quantile_atoms: Q must be >= 1");
    if (density.empty()) throw std::invalid_argument("quantile_atoms: empty density");
    for (double v : density)
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("quantile_atoms: density must be nonnegative");
    const double h = kPhasePeriod / density.size();
    auto cum = mass_prefix(density, h);
    if (!(cum.back() > 0.0)) throw std::invalid_argument("quantile_atoms: zero total mass");

    std::vector<double> atoms(Q);
    for (int q = 0; q < Q; ++q)
        atoms[q] = inv_cdf(cum, h, (q + 0.5) / Q * cum.back());
    return atoms;
}

std::vector<double> sample_initial(const std::function<double(double, double)>& rho0,
                                   int n, int M, std::uint64_t seed, int u_resolution) {
    if (n < 1 || M < 1) throw std::invalid_argument("sample_initial: n and M must be >= 1");
    std::mt19937_64 gen(seed);
    const double h = kPhasePeriod / u_resolution;

    std::vector<double> phases(static_cast<std::size_t>(n) * M);
    for (int j = 0; j < n; ++j) {
        auto cum = mass_prefix(cell_averaged_density(rho0, n, j, u_resolution), h);
        for (int m = 0; m < M; ++m)
            phases[static_cast<std::size_t>(j) * M + m] = inv_cdf(cum, h, u53(gen) * cum.back());
    }
    return phases;
}

MeasureFamily density_family(const std::function<double(double, double)>& rho0,
                             int n, int Q, int u_resolution) {
    if (n < 1) throw std::invalid_argument("density_family: n must be >= 1");
    std::vector<PhaseMeasure> fibers;
    fibers.reserve(n);
    for (int j = 0; j < n; ++j) {
        auto atoms = quantile_atoms(cell_averaged_density(rho0, n, j, u_resolution), Q);
        std::vector<Particle> ps(atoms.size());
        for (std::size_t q = 0; q < atoms.size(); ++q)
            ps[q] = Particle{atoms[q], 1.0 / Q};
        fibers.emplace_back(std::move(ps));
    }
    return MeasureFamily(TorusGrid(n, kNodePeriod), std::move(fibers));
}

namespace {

// pairwise coupling sum via per-harmonic moment matvecs: no trig inside the
// O(N^2) loop
struct KuramotoRhs {
    const OscillatorState& st;
    const CouplingSpec& cpl;
    std::vector<double> sv, cv;

    explicit KuramotoRhs(const OscillatorState& s, const CouplingSpec& c)
        : st(s), cpl(c), sv(s.N), cv(s.N) {}

    void operator()(const std::vector<double>& u, std::vector<double>& du) {
        const int N = st.N;
        const auto& omega = cpl.frequencies();
        for (int i = 0; i < N; ++i) du[i] = omega.empty() ? 0.0 : omega[i];
        const double scale = cpl.strength() / N;
        const auto& ps = cpl.sin_coefficients();
        const auto& qs = cpl.cos_coefficients();
        for (int j = 1; j <= static_cast<int>(ps.size()); ++j) {
            const double pj = ps[j - 1], qj = qs[j - 1];
            if (pj == 0.0 && qj == 0.0) continue;
            for (int v = 0; v < N; ++v) {
                sv[v] = std::sin(j * u[v]);
                cv[v] = std::cos(j * u[v]);
            }
            for (int i = 0; i < N; ++i) {
                const double* row = st.weights.data() + static_cast<std::size_t>(i) * N;
                double Si = 0.0, Ci = 0.0;
                for (int v = 0; v < N; ++v) {
                    Si += row[v] * sv[v];
                    Ci += row[v] * cv[v];
                }
                du[i] += scale * (pj * (cv[i] * Si - sv[i] * Ci) +
                                  qj * (cv[i] * Ci + sv[i] * Si));
            }
        }
    }
};

} // namespace

Trajectory integrate(const OscillatorState& state, const CouplingSpec& coupling,
                     double T, double dt, int stride) {
    const int N = state.N;
    if (static_cast<int>(state.phases.size()) != N ||
        state.weights.size() != static_cast<std::size_t>(N) * N)
        throw std::invalid_argument("integrate: inconsistent oscillator state");
    if (!(dt > 0.0) || !std::isfinite(dt) || !(T >= 0.0) || !std::isfinite(T))
        throw std::invalid_argument("integrate: bad T or dt");
    if (!coupling.frequencies().empty() &&
        static_cast<int>(coupling.frequencies().size()) != N)
        throw std::invalid_argument("integrate: frequency vector size != N");
    const long long steps = std::llround(T / dt);
    if (std::fabs(steps * dt - T) > 1e-9 * std::max(1.0, std::fabs(T)))
        throw std::invalid_argument("integrate: T must be an integer multiple of dt");
    long long out = stride;
    if (out <= 0) out = std::max<long long>(1, steps / 50);

    KuramotoRhs rhs(state, coupling);
    std::vector<double> u = state.phases;
    std::vector<double> k1(N), k2(N), k3(N), k4(N), tmp(N);

    Trajectory traj;
    traj.times.push_back(0.0);
    traj.phases.push_back(u);

    for (long long s = 1; s <= steps; ++s) {
        rhs(u, k1);
        for (int i = 0; i < N; ++i) tmp[i] = u[i] + 0.5 * dt * k1[i];
        rhs(tmp, k2);
        for (int i = 0; i < N; ++i) tmp[i] = u[i] + 0.5 * dt * k2[i];
        rhs(tmp, k3);
        for (int i = 0; i < N; ++i) tmp[i] = u[i] + dt * k3[i];
        rhs(tmp, k4);
        for (int i = 0; i < N; ++i) {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (!std::isfinite(u[i]))
                throw std::runtime_error("integrate: non-finite phase at step " +
                                         std::to_string(s) + ", oscillator " + std::to_string(i));
            u[i] = wrap(u[i], kPhasePeriod);
        }
        if (s % out == 0 || s == steps) {
            traj.times.push_back(s * dt);
            traj.phases.push_back(u);
        }
    }
    return traj;
}

MeasureFamily empirical_family(const std::vector<double>& phases, int n, int M) {
    if (n < 1 || M < 1) throw std::invalid_argument("empirical_family: n and M must be >= 1");
    if (phases.size() != static_cast<std::size_t>(n) * M)
        throw std::invalid_argument("empirical_family: phase count " +
                                    std::to_string(phases.size()) + " != n*M = " +
                                    std::to_string(static_cast<std::size_t>(n) * M));
    std::vector<PhaseMeasure> fibers;
    fibers.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<Particle> ps(M);
        for (int m = 0; m < M; ++m)
            ps[m] = Particle{phases[static_cast<std::size_t>(i) * M + m], 1.0 / M};
        fibers.emplace_back(std::move(ps));
    }
    return MeasureFamily(TorusGrid(n, kNodePeriod), std::move(fibers));
}

} // namespace gdyn
