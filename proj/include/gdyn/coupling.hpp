#pragma once

// Coupling law D and strength C of the oscillator model. D is stored through
// its harmonic coefficients so both the discrete right-hand side and the
// mean-field evaluator can turn pairwise interactions into per-harmonic
// moment sums instead of O(N^2) trig calls.

#include <vector>

namespace gdyn {

class CouplingSpec {
  public:
    /// D(u) = sin u
    static CouplingSpec sine(double C);
    /// D(u) proportional to sin u + beta sin(2u)/2, |beta| <= 1, rescaled so
    /// that max(sup|D|, sup|D'|) = 1
    static CouplingSpec sine_pair(double C, double beta);
    /// D(u) = sum_j s[j-1] sin(ju) + c[j-1] cos(ju); rejected unless
    /// sup|D| <= 1 and Lip(D) <= 1 (Kuramoto normalization)
    static CouplingSpec harmonics(double C, std::vector<double> sin_coef,
                                  std::vector<double> cos_coef);

    double strength() const { return C_; }
    double operator()(double u) const;

    const std::vector<double>& sin_coefficients() const { return sin_; }
    const std::vector<double>& cos_coefficients() const { return cos_; }
    int max_harmonic() const { return static_cast<int>(sin_.size()); }

    /// numerically determined sup|D| and sup|D'| (cached at construction)
    double sup_abs() const { return sup_abs_; }
    double lipschitz() const { return lip_; }

    /// per-oscillator natural frequencies; empty means identically zero
    CouplingSpec with_frequencies(std::vector<double> omega) const;
    const std::vector<double>& frequencies() const { return omega_; }

  private:
    CouplingSpec() = default;

    double C_ = 1.0;
    std::vector<double> sin_, cos_; // index j-1 <-> harmonic j
    std::vector<double> omega_;
    double sup_abs_ = 0.0, lip_ = 0.0;
};

} // namespace gdyn
