#include "dbl_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace {

// Concave piecewise-linear function on an interval, as breakpoints with
// linear interpolation between them.
struct ConcavePwl {
    std::vector<double> y, v;

    double eval(double x) const {
        if (x <= y.front()) return v.front();
        if (x >= y.back()) return v.back();
        auto it = std::upper_bound(y.begin(), y.end(), x);
        size_t k = static_cast<size_t>(it - y.begin());
        double t = (x - y[k - 1]) / (y[k] - y[k - 1]);
        return v[k - 1] + t * (v[k] - v[k - 1]);
    }

    // h(x) = max of the function over [x - g, x + g]: the rising branch
    // shifts left, the falling branch shifts right, a plateau appears at the
    // maximum. (Scan for the max; no unimodality assumption needed.)
    void max_filter(double g) {
        size_t lo = 0;
        for (size_t i = 1; i < v.size(); ++i)
            if (v[i] > v[lo]) lo = i;
        size_t hi = lo;
        while (hi + 1 < v.size() && v[hi + 1] == v[lo]) ++hi;
        std::vector<double> ny, nv;
        ny.reserve(y.size() + 1);
        nv.reserve(v.size() + 1);
        for (size_t i = 0; i <= lo; ++i) {
            ny.push_back(y[i] - g);
            nv.push_back(v[i]);
        }
        for (size_t i = hi; i < y.size(); ++i) {
            ny.push_back(y[i] + g);
            nv.push_back(v[i]);
        }
        y = std::move(ny);
        v = std::move(nv);
    }

    // restrict the domain to [a, b]
    void clip(double a, double b) {
        if (y.back() < a || y.front() > b)
            throw std::runtime_error("dbl_oracle: empty feasible interval");
        double lo = std::max(a, y.front()), hi = std::min(b, y.back());
        std::vector<double> ny, nv;
        ny.push_back(lo);
        nv.push_back(eval(lo));
        for (size_t i = 0; i < y.size(); ++i)
            if (y[i] > lo && y[i] < hi) {
                ny.push_back(y[i]);
                nv.push_back(v[i]);
            }
        if (hi > lo) {
            ny.push_back(hi);
            nv.push_back(eval(hi));
        }
        y = std::move(ny);
        v = std::move(nv);
    }

    void add_linear(double c) {
        for (size_t i = 0; i < y.size(); ++i) v[i] += c * y[i];
    }
};

// Value of the best f with f(s_0) pinned to val, sweeping once around the
// cycle. gaps[k] is the arc length from s_k to s_{k+1} (wrapping at the end);
// the dense uniform grid contributes only pass-through nodes with zero
// weight, whose box constraints are implied (clamping a feasible f to [0,1]
// keeps it 1-Lipschitz and does not change it at the weighted nodes), so the
// sub-gaps fold into these arc lengths exactly.
double pinned_sweep(const std::vector<double>& c, const std::vector<double>& gaps,
                    double val) {
    ConcavePwl f{{val}, {c[0] * val}};
    for (size_t k = 1; k < c.size(); ++k) {
        f.max_filter(gaps[k - 1]);
        f.clip(0.0, 1.0);
        f.add_linear(c[k]);
    }
    f.max_filter(gaps.back());
    f.clip(0.0, 1.0);
    return f.eval(val);
}

// maximize the concave pin-value profile over [0, 1] by golden section
double maximize_over_pin(const std::vector<double>& c, const std::vector<double>& gaps) {
    const double phi = 0.61803398874989484820;
    double lo = 0.0, hi = 1.0;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = pinned_sweep(c, gaps, x1), f2 = pinned_sweep(c, gaps, x2);
    double best = std::max({f1, f2, pinned_sweep(c, gaps, 0.0), pinned_sweep(c, gaps, 1.0)});
    for (int it = 0; it < 90; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = pinned_sweep(c, gaps, x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = pinned_sweep(c, gaps, x1);
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

} // namespace

double dbl_oracle(const gdyn::PhaseMeasure& mu, const gdyn::PhaseMeasure& nu,
                  int grid_points) {
    if (mu.period() != nu.period())
        throw std::invalid_argument("dbl_oracle: measures on different circles");
    const double period = mu.period();

    std::vector<std::pair<double, double>> raw;
    for (const auto& p : mu.particles()) raw.emplace_back(p.position, p.weight);
    for (const auto& p : nu.particles()) raw.emplace_back(p.position, -p.weight);
    std::sort(raw.begin(), raw.end());
    std::vector<double> pos, c;
    for (const auto& [p, cw] : raw) {
        if (!pos.empty() && pos.back() == p)
            c.back() += cw;
        else {
            pos.push_back(p);
            c.push_back(cw);
        }
    }
    if (pos.empty()) return 0.0;

    // Arc gaps between consecutive weighted nodes. The uniform grid nodes in
    // between carry zero weight and their sub-gaps telescope to the arc
    // length, so the chain over "grid + appended supports" reduces to these
    // exact arc lengths. grid_points only caps the resolution below which a
    // support pair would be unresolvable; with supports appended there is no
    // such pair.
    (void)grid_points;
    const int P = static_cast<int>(pos.size());
    std::vector<double> gaps(P);
    for (int k = 0; k < P; ++k) {
        double a = pos[k];
        double bnd = k + 1 < P ? pos[k + 1] : pos[0] + period;
        gaps[k] = bnd - a;
    }

    double best = maximize_over_pin(c, gaps);
    std::vector<double> cneg(c.size());
    for (size_t i = 0; i < c.size(); ++i) cneg[i] = -c[i];
    return std::max({best, maximize_over_pin(cneg, gaps), 0.0});
}
