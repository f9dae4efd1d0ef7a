#pragma once

// Adaptive Dormand-Prince 5(4) reference integrator for oracle use in tests.
// Deliberately independent of the library's fixed-step scheme.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace testsupport {

template <class F>
std::vector<double> rk45_integrate(F&& f, std::vector<double> y, double t0, double t1,
                                   double rtol = 1e-10, double atol = 1e-12) {
    const std::size_t n = y.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n);

    double t = t0;
    double h = (t1 - t0) / 100.0;
    if (!(h > 0.0)) throw std::invalid_argument("rk45: need t1 > t0");

    auto stage = [&](const std::vector<double>& base, std::vector<double>& out) {
        f(base, out);
    };
    stage(y, k1);

    for (long iter = 0; iter < 2000000; ++iter) {
        if (t >= t1 - 1e-14 * std::max(1.0, std::fabs(t1))) return y;
        if (t + h > t1) h = t1 - t;

        for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (1.0 / 5.0) * k1[i];
        stage(tmp, k2);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (3.0 / 40.0 * k1[i] + 9.0 / 40.0 * k2[i]);
        stage(tmp, k3);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (44.0 / 45.0 * k1[i] - 56.0 / 15.0 * k2[i] + 32.0 / 9.0 * k3[i]);
        stage(tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (19372.0 / 6561.0 * k1[i] - 25360.0 / 2187.0 * k2[i] +
                                 64448.0 / 6561.0 * k3[i] - 212.0 / 729.0 * k4[i]);
        stage(tmp, k5);
        for (std::size_t i = 0; i < n; ++i)
            tmp[i] = y[i] + h * (9017.0 / 3168.0 * k1[i] - 355.0 / 33.0 * k2[i] +
                                 46732.0 / 5247.0 * k3[i] + 49.0 / 176.0 * k4[i] -
                                 5103.0 / 18656.0 * k5[i]);
        stage(tmp, k6);
        for (std::size_t i = 0; i < n; ++i)
            y5[i] = y[i] + h * (35.0 / 384.0 * k1[i] + 500.0 / 1113.0 * k3[i] +
                                125.0 / 192.0 * k4[i] - 2187.0 / 6784.0 * k5[i] +
                                11.0 / 84.0 * k6[i]);
        stage(y5, k7);

        double errnorm = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double e4 =
                y[i] + h * (5179.0 / 57600.0 * k1[i] + 7571.0 / 16695.0 * k3[i] +
                            393.0 / 640.0 * k4[i] - 92097.0 / 339200.0 * k5[i] +
                            187.0 / 2100.0 * k6[i] + 1.0 / 40.0 * k7[i]);
            const double sc = atol + rtol * std::max(std::fabs(y[i]), std::fabs(y5[i]));
            const double e = (y5[i] - e4) / sc;
            errnorm += e * e;
        }
        errnorm = std::sqrt(errnorm / n);

        if (errnorm <= 1.0) {
            t += h;
            y = y5;
            k1 = k7; // FSAL
        }
        const double fac = errnorm > 0.0 ? 0.9 * std::pow(errnorm, -0.2) : 5.0;
        h *= std::min(5.0, std::max(0.2, fac));
        if (!(h > 0.0) || !std::isfinite(h)) throw std::runtime_error("rk45: step size collapsed");
    }
    throw std::runtime_error("rk45: step budget exhausted");
}

} // namespace testsupport
