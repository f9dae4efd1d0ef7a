#pragma once

// Finite Kuramoto-type model on a sampled weighted graph: weight matrices
// from graphon kernels, seeded initial phases, fixed-step 4th-order
// integration, and empirical measure-family extraction.

#include "gdyn/coupling.hpp"
#include "gdyn/graphop.hpp"
#include "gdyn/measures.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace gdyn {

struct OscillatorState {
    int N = 0;
    std::vector<double> phases;  // wrapped to [0, 2pi)
    std::vector<double> weights; // N x N row-major, symmetric, nonnegative
};

/// Validates symmetry/nonnegativity/sizes and wraps the phases.
OscillatorState make_oscillator_state(std::vector<double> phases,
                                      std::vector<double> weights);

/// A_ij = N^2 int_{cell_i x cell_j} W. Exact block averages when the kernel
/// grid resolution is a multiple of N; otherwise midpoint sampling of the
/// piecewise-constant kernel (exact again when N is a multiple of the
/// resolution, O(1/resolution) bias in the truly incommensurate case).
std::vector<double> sample_weights(const Graphop& W, int N);

/// Phase density u -> rho(u, x) averaged over node cell j of an n-grid,
/// discretized on u_resolution equal phase cells (left-edge convention).
/// Rejects negative or non-normalized input (defect beyond 1e-4).
std::vector<double> cell_averaged_density(const std::function<double(double, double)>& rho0,
                                          int n, int cell, int u_resolution = 2048);

/// Q equal-weight quantile atoms (inverse CDF at (q+1/2)/Q) of a nonnegative
/// piecewise-constant density on the phase circle.
std::vector<double> quantile_atoms(const std::vector<double>& density, int Q);

/// nM i.i.d. phases, block j drawn from the cell-j averaged density by
/// inverse CDF; byte-deterministic for a fixed seed.
std::vector<double> sample_initial(const std::function<double(double, double)>& rho0,
                                   int n, int M, std::uint64_t seed,
                                   int u_resolution = 2048);

/// Deterministic continuum proxy: fiber j carries Q quantile atoms of the
/// cell-j averaged density, each of weight 1/Q.
MeasureFamily density_family(const std::function<double(double, double)>& rho0,
                             int n, int Q, int u_resolution = 2048);

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> phases; // one snapshot per stamp
};

/// u̇_i = omega_i + (C/N) sum_j A_ij D(u_j - u_i), classical 4th-order
/// fixed-step integration, snapshots every `stride` steps (0 picks ~50
/// output intervals) plus the final state.
Trajectory integrate(const OscillatorState& state, const CouplingSpec& coupling,
                     double T, double dt, int stride = 0);

/// Block empirical family: fiber i of an n-cell node grid holds M atoms of
/// weight 1/M at the phases of oscillators iM..iM+M-1.
MeasureFamily empirical_family(const std::vector<double>& phases, int n, int M);

} // namespace gdyn
