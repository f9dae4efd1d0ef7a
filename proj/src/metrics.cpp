#include "gdyn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gdyn {

namespace {

// The primal LP behind d_BL: maximize sum c_i f(p_i) over f(p_i) in [0,1]
// with |f(p_i) - f(p_j)| <= circle_dist(p_i, p_j). For sorted supports the
// adjacent-pair constraints with raw arc gaps imply the full constraint set
// (path sums give both arcs, hence the circle distance), so the dual is a
// min-cost flow on the support cycle plus a hub: cycle arcs cost their arc
// gap, disposing supply at the hub costs 1 (that is "f = 1 there"), drawing
// missing mass from the hub costs 0. Solved by successive shortest paths
// with node potentials; all arc capacities are infinite except undo arcs.
double wheel_lp(const std::vector<double>& pos, const std::vector<double>& cin,
                double period) {
    const int P = static_cast<int>(pos.size());
    if (P == 0) return 0.0;
    const int HUB = P;
    const double INF = std::numeric_limits<double>::infinity();

    std::vector<long double> b(P + 1, 0.0L);
    long double total = 0.0L, scale = 0.0L;
    for (int i = 0; i < P; ++i) {
        b[i] = cin[i];
        total += cin[i];
        scale += std::fabs(static_cast<long double>(cin[i]));
    }
    b[HUB] = -total;

    std::vector<double> gap(P, 0.0);
    for (int i = 0; i + 1 < P; ++i) gap[i] = std::max(pos[i + 1] - pos[i], 0.0);
    if (P > 1) gap[P - 1] = std::max(period - pos[P - 1] + pos[0], 0.0);

    std::vector<double> w(P, 0.0); // net flow on cycle arc i -> i+1
    std::vector<double> h(P, 0.0); // net flow on spoke i -> hub
    std::vector<double> pi(P + 1, 0.0);
    std::vector<double> dist(P + 1, 0.0);
    std::vector<int> ptype(P + 1, 0), pidx(P + 1, 0);

    // residual arc costs/capacities as functions of the current signed flows
    auto cost_cw = [&](int i) { return w[i] < 0.0 ? -gap[i] : gap[i]; };
    auto cap_cw = [&](int i) { return w[i] < 0.0 ? -w[i] : INF; };
    auto cost_ccw = [&](int i) { return w[i] > 0.0 ? -gap[i] : gap[i]; };
    auto cap_ccw = [&](int i) { return w[i] > 0.0 ? w[i] : INF; };
    auto cost_up = [&](int i) { return h[i] < 0.0 ? 0.0 : 1.0; }; // i -> hub
    auto cap_up = [&](int i) { return h[i] < 0.0 ? -h[i] : INF; };
    auto cost_dn = [&](int i) { return h[i] > 0.0 ? -1.0 : 0.0; }; // hub -> i
    auto cap_dn = [&](int i) { return h[i] > 0.0 ? h[i] : INF; };

    const long double stop_tol = 1e-15L * (scale + 1.0L);
    const int max_aug = 50 * (P + 2) + 100;

    for (int aug = 0;; ++aug) {
        bool have_supply = false;
        for (int i = 0; i <= P && !have_supply; ++i)
            if (b[i] > stop_tol) have_supply = true;
        if (!have_supply) break;
        if (aug >= max_aug)
            throw std::runtime_error("d_bl: min-cost flow did not converge");

        // multi-source shortest paths over reduced costs, by directional
        // sweeps (simple residual paths are cycle segments joined at the hub)
        std::fill(dist.begin(), dist.end(), INF);
        std::fill(ptype.begin(), ptype.end(), -2);
        for (int i = 0; i <= P; ++i)
            if (b[i] > stop_tol) {
                dist[i] = 0.0;
                ptype[i] = -1;
            }
        auto relax = [&](int u, int v, double cost, int type, int idx) -> bool {
            if (dist[u] == INF) return false;
            double rc = std::max(cost + pi[u] - pi[v], 0.0);
            double nd = dist[u] + rc;
            if (nd < dist[v] - 1e-15) {
                dist[v] = nd;
                ptype[v] = type;
                pidx[v] = idx;
                return true;
            }
            return false;
        };
        bool settled = false;
        for (int round = 0; round < 40 && !settled; ++round) {
            bool changed = false;
            if (P > 1) {
                for (int rep = 0; rep < 2; ++rep)
                    for (int i = 0; i < P; ++i)
                        changed |= relax(i, (i + 1) % P, cost_cw(i), 0, i);
                for (int rep = 0; rep < 2; ++rep)
                    for (int i = P - 1; i >= 0; --i)
                        changed |= relax((i + 1) % P, i, cost_ccw(i), 1, i);
            }
            for (int i = 0; i < P; ++i) {
                changed |= relax(i, HUB, cost_up(i), 2, i);
                changed |= relax(HUB, i, cost_dn(i), 3, i);
            }
            settled = !changed;
        }
        if (!settled) throw std::runtime_error("d_bl: shortest-path sweeps stalled");

        int t = -1;
        for (int i = 0; i <= P; ++i)
            if (b[i] < -stop_tol && (t < 0 || dist[i] < dist[t])) t = i;
        if (t < 0) break; // only rounding dust remains unrouted

        // trace back, collect the bottleneck, then push
        long double delta = -b[t];
        int v = t;
        while (ptype[v] != -1) {
            int i = pidx[v], ty = ptype[v];
            double cap = ty == 0 ? cap_cw(i) : ty == 1 ? cap_ccw(i) : ty == 2 ? cap_up(i) : cap_dn(i);
            if (cap < delta) delta = cap;
            v = ty == 0 ? i : ty == 1 ? (i + 1) % P : ty == 2 ? i : HUB;
        }
        if (b[v] < delta) delta = b[v];
        if (!(delta > 0.0L))
            throw std::runtime_error("d_bl: degenerate augmentation");

        int u = t;
        while (ptype[u] != -1) {
            int i = pidx[u], ty = ptype[u];
            double d = static_cast<double>(delta);
            if (ty == 0) w[i] += d;
            else if (ty == 1) w[i] -= d;
            else if (ty == 2) h[i] += d;
            else h[i] -= d;
            u = ty == 0 ? i : ty == 1 ? (i + 1) % P : ty == 2 ? i : HUB;
        }
        b[u] -= delta;
        b[t] += delta;
        for (int i = 0; i <= P; ++i)
            if (dist[i] < INF) pi[i] += dist[i];
    }

    long double value = 0.0L;
    for (int i = 0; i < P; ++i) {
        value += std::fabs(static_cast<long double>(w[i])) * gap[i];
        if (h[i] > 0.0) value += h[i];
    }
    return static_cast<double>(value);
}

struct SignedSupport {
    std::vector<double> pos; // sorted, distinct
    std::vector<double> c;   // net signed weight per position
};

SignedSupport collect_support(const PhaseMeasure& mu, const PhaseMeasure& nu) {
    std::vector<std::pair<double, double>> raw;
    raw.reserve(mu.size() + nu.size());
    for (const auto& p : mu.particles()) raw.emplace_back(p.position, p.weight);
    for (const auto& p : nu.particles()) raw.emplace_back(p.position, -p.weight);
    std::sort(raw.begin(), raw.end());
    SignedSupport s;
    for (const auto& [p, cw] : raw) {
        if (!s.pos.empty() && s.pos.back() == p)
            s.c.back() += cw;
        else {
            s.pos.push_back(p);
            s.c.push_back(cw);
        }
    }
    // zero net weight never moves the optimum; drop those nodes
    size_t k = 0;
    for (size_t i = 0; i < s.pos.size(); ++i)
        if (s.c[i] != 0.0) {
            s.pos[k] = s.pos[i];
            s.c[k] = s.c[i];
            ++k;
        }
    s.pos.resize(k);
    s.c.resize(k);
    return s;
}

void check_same_grid(const MeasureFamily& a, const MeasureFamily& b) {
    if (a.cells() != b.cells() || a.grid().period() != b.grid().period())
        throw std::invalid_argument("measure families on different grids");
    if (a.cells() > 0 && a.fiber(0).period() != b.fiber(0).period())
        throw std::invalid_argument("measure families on different phase circles");
}

} // namespace

double d_bl(const PhaseMeasure& mu, const PhaseMeasure& nu) {
    if (mu.period() != nu.period())
        throw std::invalid_argument("d_bl: measures on different circles");
    SignedSupport s = collect_support(mu, nu);
    if (s.pos.empty()) return 0.0;
    double v1 = wheel_lp(s.pos, s.c, mu.period());
    for (double& x : s.c) x = -x;
    double v2 = wheel_lp(s.pos, s.c, mu.period());
    return std::max({v1, v2, 0.0});
}

std::vector<double> fiber_distance_profile(const MeasureFamily& mu,
                                           const MeasureFamily& ka) {
    check_same_grid(mu, ka);
    std::vector<double> e(mu.cells());
    for (int i = 0; i < mu.cells(); ++i) e[i] = d_bl(mu.fiber(i), ka.fiber(i));
    return e;
}

MeasureFamily extended_apply(const Graphop& A, const MeasureFamily& mu) {
    if (mu.grid().period() != kNodePeriod)
        throw std::invalid_argument("extended_apply: family not on the node space");
    const int n = mu.cells();
    auto M = A.mixing_matrix(n);
    double phase_period = n > 0 ? mu.fiber(0).period() : kPhasePeriod;
    double mass_bound = mu.cap() * A.gamma();
    std::vector<PhaseMeasure> fibers;
    fibers.reserve(n);
    for (int i = 0; i < n; ++i) {
        std::vector<Particle> parts;
        for (int j = 0; j < n; ++j) {
            double lam = M[i][j]; // cell-averaged nu_x(cell_j)
            if (lam <= 0.0) continue;
            for (const auto& p : mu.fiber(j).particles())
                parts.push_back({p.position, lam * p.weight});
        }
        PhaseMeasure out(std::move(parts), phase_period);
        if (out.total_mass() > mass_bound * (1.0 + 1e-9) + 1e-12)
            throw std::runtime_error("extended_apply: fiber mass exceeds cap*gamma");
        fibers.push_back(std::move(out));
    }
    return MeasureFamily(mu.grid(), std::move(fibers),
                         mu.cap() * std::max(1.0, A.gamma()));
}

double d_fiber(const Graphop& A, const MeasureFamily& mu, const MeasureFamily& ka,
               int cell) {
    check_same_grid(mu, ka);
    const int n = mu.cells();
    if (cell < 0 || cell >= n) throw std::out_of_range("d_fiber: cell out of range");
    auto e = fiber_distance_profile(mu, ka);
    auto M = A.mixing_matrix(n);
    long double s = 0.0L;
    for (int j = 0; j < n; ++j) s += M[cell][j] * e[j];
    return static_cast<double>(s);
}

double d_bA(const Graphop& A, const MeasureFamily& mu, const MeasureFamily& ka) {
    check_same_grid(mu, ka);
    const int n = mu.cells();
    auto e = fiber_distance_profile(mu, ka);
    auto M = A.mixing_matrix(n);
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        long double s = 0.0L;
        for (int j = 0; j < n; ++j) s += M[i][j] * e[j];
        best = std::max(best, static_cast<double>(s));
    }
    return best;
}

double d_bm(const MeasureFamily& mu, const MeasureFamily& ka) {
    auto e = fiber_distance_profile(mu, ka);
    long double s = 0.0L;
    for (double v : e) s += v;
    return e.empty() ? 0.0 : static_cast<double>(s / e.size());
}

double d_alpha(const std::vector<TimedFamily>& mu_traj,
               const std::vector<TimedFamily>& ka_traj, const Graphop& A,
               double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("d_alpha: alpha must be positive");
    if (mu_traj.size() != ka_traj.size())
        throw std::invalid_argument("d_alpha: trajectories of different length");
    double best = 0.0;
    for (size_t k = 0; k < mu_traj.size(); ++k) {
        double t = mu_traj[k].first;
        if (std::fabs(t - ka_traj[k].first) > 1e-12 * (1.0 + std::fabs(t)))
            throw std::invalid_argument("d_alpha: mismatched time stamps");
        best = std::max(best,
                        std::exp(-alpha * t) * d_bA(A, mu_traj[k].second, ka_traj[k].second));
    }
    return best;
}

} // namespace gdyn
