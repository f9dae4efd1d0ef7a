#include "gdyn/vfpe.hpp"

#include "gdyn/kuramoto.hpp"
#include "gdyn/torus.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace gdyn {

namespace {

std::vector<TimedFamily> timed(const std::vector<double>& ts,
                               const std::vector<MeasureFamily>& fs) {
    std::vector<TimedFamily> v;
    v.reserve(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) v.emplace_back(ts[i], fs[i]);
    return v;
}

std::string fmt_history(const std::vector<double>& g) {
    std::ostringstream os;
    for (std::size_t i = 0; i < g.size(); ++i) os << (i ? ", " : "") << g[i];
    return os.str();
}

} // namespace

FieldEvaluator::FieldEvaluator(const Graphop& A, const CouplingSpec& coupling, int cells,
                               double b)
    : A_(A), cpl_(coupling), n_(cells), b_(b) {
    if (cells < 1) throw std::invalid_argument("field: need at least one cell");
    if (!(b > 0.0) || !std::isfinite(b))
        throw std::invalid_argument("field: mass cap b must be positive");
    bound_ = cpl_.strength() * cpl_.sup_abs() * b_ * A_.gamma();
    mix_ = A_.mixing_matrix(cells);
}

void FieldEvaluator::set_trajectory(std::vector<double> stamps,
                                    const std::vector<MeasureFamily>& families) {
    if (stamps.empty() || stamps.size() != families.size())
        throw std::invalid_argument("field: stamp/family count mismatch");
    for (std::size_t s = 1; s < stamps.size(); ++s)
        if (!(stamps[s] > stamps[s - 1]))
            throw std::invalid_argument("field: stamps must be strictly increasing");

    const int J = cpl_.max_harmonic();
    std::vector<double> raw(static_cast<std::size_t>(n_) * 2 * J);
    moments_.assign(stamps.size(), std::vector<double>(raw.size(), 0.0));

    for (std::size_t s = 0; s < families.size(); ++s) {
        const MeasureFamily& fam = families[s];
        if (fam.cells() != n_)
            throw std::invalid_argument("field: family resolution " +
                                        std::to_string(fam.cells()) + " != " +
                                        std::to_string(n_));
        std::fill(raw.begin(), raw.end(), 0.0);
        for (int c = 0; c < n_; ++c) {
            const PhaseMeasure& nu = fam.fiber(c);
            if (nu.total_mass() > b_ * (1.0 + 1e-9) + 1e-12)
                throw std::invalid_argument("field: fiber mass " +
                                            std::to_string(nu.total_mass()) +
                                            " exceeds cap b=" + std::to_string(b_));
            double* r = raw.data() + static_cast<std::size_t>(c) * 2 * J;
            for (const auto& p : nu.particles())
                for (int j = 1; j <= J; ++j) {
                    r[2 * (j - 1)] += p.weight * std::sin(j * p.position);
                    r[2 * (j - 1) + 1] += p.weight * std::cos(j * p.position);
                }
        }
        double* mom = moments_[s].data();
        for (int i = 0; i < n_; ++i)
            for (int c = 0; c < n_; ++c) {
                const double m = mix_[i][c];
                if (m == 0.0) continue;
                const double* r = raw.data() + static_cast<std::size_t>(c) * 2 * J;
                double* o = mom + static_cast<std::size_t>(i) * 2 * J;
                for (int k = 0; k < 2 * J; ++k) o[k] += m * r[k];
            }
    }
    stamps_ = std::move(stamps);
}

void FieldEvaluator::interp_row(double t, int cell, double* out) const {
    if (moments_.empty()) throw std::runtime_error("field: no trajectory cached");
    if (cell < 0 || cell >= n_) throw std::invalid_argument("field: cell index out of range");
    const int J2 = 2 * cpl_.max_harmonic();
    const double slack = 1e-9 * (1.0 + std::fabs(t));
    if (t < stamps_.front() - slack || t > stamps_.back() + slack)
        throw std::invalid_argument("field: t=" + std::to_string(t) +
                                    " outside cached stamp range [" +
                                    std::to_string(stamps_.front()) + ", " +
                                    std::to_string(stamps_.back()) + "]");
    if (stamps_.size() == 1) {
        const double* a = moments_[0].data() + static_cast<std::size_t>(cell) * J2;
        std::copy(a, a + J2, out);
        return;
    }
    auto it = std::upper_bound(stamps_.begin(), stamps_.end(), t);
    std::size_t k = it == stamps_.begin() ? 0 : static_cast<std::size_t>(it - stamps_.begin()) - 1;
    if (k > stamps_.size() - 2) k = stamps_.size() - 2;
    double th = (t - stamps_[k]) / (stamps_[k + 1] - stamps_[k]);
    th = std::min(1.0, std::max(0.0, th));
    const double* a = moments_[k].data() + static_cast<std::size_t>(cell) * J2;
    const double* b = moments_[k + 1].data() + static_cast<std::size_t>(cell) * J2;
    for (int m = 0; m < J2; ++m) out[m] = (1.0 - th) * a[m] + th * b[m];
}

double FieldEvaluator::eval_row(const double* row, double u) const {
    const auto& ps = cpl_.sin_coefficients();
    const auto& qs = cpl_.cos_coefficients();
    double acc = 0.0;
    for (std::size_t j = 1; j <= ps.size(); ++j) {
        const double P = row[2 * (j - 1)], Q = row[2 * (j - 1) + 1];
        const double sj = std::sin(j * u), cj = std::cos(j * u);
        acc += ps[j - 1] * (P * cj - Q * sj) + qs[j - 1] * (Q * cj + P * sj);
    }
    const double V = cpl_.strength() * acc;
    if (!std::isfinite(V) || std::fabs(V) > bound_ * (1.0 + 1e-9) + 1e-12)
        throw std::runtime_error("field bound violated: |V|=" + std::to_string(V) +
                                 " > C*supD*b*gamma=" + std::to_string(bound_));
    return V;
}

double FieldEvaluator::operator()(double t, double u, int cell) const {
    double row[64];
    const int J2 = 2 * cpl_.max_harmonic();
    if (J2 > 64) throw std::runtime_error("field: harmonic count above the stack budget");
    interp_row(t, cell, row);
    return eval_row(row, u);
}

double FieldEvaluator::field_at(double t, double u, double x) const {
    const int cell = std::min(n_ - 1, static_cast<int>(wrap(x, kNodePeriod) * n_));
    return (*this)(t, u, cell);
}

MeasureFamily flow_step(const FieldEvaluator& field, const MeasureFamily& fam, double t,
                        double dt) {
    if (fam.cells() != field.cells())
        throw std::invalid_argument("flow_step: family resolution mismatch");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("flow_step: bad dt");

    std::vector<PhaseMeasure> out;
    out.reserve(fam.cells());
    for (int c = 0; c < fam.cells(); ++c) {
        std::vector<Particle> ps = fam.fiber(c).particles();
        for (auto& p : ps) {
            const double u = p.position;
            const double k1 = field(t, u, c);
            const double k2 = field(t + 0.5 * dt, u + 0.5 * dt * k1, c);
            const double k3 = field(t + 0.5 * dt, u + 0.5 * dt * k2, c);
            const double k4 = field(t + dt, u + dt * k3, c);
            p.position = wrap(u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), kPhasePeriod);
        }
        out.emplace_back(std::move(ps), fam.fiber(c).period());
    }
    return MeasureFamily(fam.grid(), std::move(out), fam.cap());
}

double flow_map(const FieldEvaluator& field, int cell, double u0, double t0, double t1,
                double dt) {
    if (!(dt > 0.0) || !(t1 >= t0))
        throw std::invalid_argument("flow_map: need t1 >= t0 and dt > 0");
    const long long steps = std::llround((t1 - t0) / dt);
    if (std::fabs(t0 + steps * dt - t1) > 1e-9 * std::max(1.0, std::fabs(t1)))
        throw std::invalid_argument("flow_map: (t1-t0) must be an integer multiple of dt");
    double u = u0;
    for (long long s = 0; s < steps; ++s) {
        const double t = t0 + s * dt;
        const double k1 = field(t, u, cell);
        const double k2 = field(t + 0.5 * dt, u + 0.5 * dt * k1, cell);
        const double k3 = field(t + 0.5 * dt, u + 0.5 * dt * k2, cell);
        const double k4 = field(t + dt, u + dt * k3, cell);
        u = wrap(u + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), kPhasePeriod);
    }
    return u;
}

PicardResult picard_solve(const Graphop& A, const MeasureFamily& mu0,
                          const CouplingSpec& coupling, double T, double dt, double alpha,
                          double tol, int max_iter, const std::vector<MeasureFamily>* start) {
    const int n = mu0.cells();
    if (mu0.grid().period() != kNodePeriod)
        throw std::invalid_argument("picard_solve: family must live on the unit node circle");
    const double gamma = A.gamma();
    if (gamma > 1.0 + 1e-6)
        throw std::invalid_argument("picard_solve: gamma_A = " + std::to_string(gamma) +
                                    " exceeds 1 (outside the admissible graphop class)");
    const double b = mu0.cap();
    const double C = coupling.strength();
    if (!(alpha > 2.0 * C * b + b * gamma))
        throw std::invalid_argument("picard_solve: alpha must exceed 2Cb + b*gamma = " +
                                    std::to_string(2.0 * C * b + b * gamma));
    if (!(tol > 0.0) || max_iter < 1)
        throw std::invalid_argument("picard_solve: bad tol/max_iter");
    if (!(dt > 0.0) || !(T >= 0.0) || !std::isfinite(T))
        throw std::invalid_argument("picard_solve: bad T or dt");
    const long long steps = std::llround(T / dt);
    if (std::fabs(steps * dt - T) > 1e-9 * std::max(1.0, std::fabs(T)))
        throw std::invalid_argument("picard_solve: T must be an integer multiple of dt");

    PicardResult res;
    res.alpha = alpha;
    res.contraction_bound = 2.0 * C * b / (alpha - b * gamma);

    const long long stride = std::max<long long>(1, steps / 50);
    std::vector<double> stamp_times{0.0};
    for (long long s = stride; s < steps; s += stride) stamp_times.push_back(s * dt);
    if (steps > 0) stamp_times.push_back(steps * dt);

    if (steps == 0) {
        res.stamps = stamp_times;
        res.trajectory = {mu0};
        res.converged = true;
        return res;
    }

    std::vector<MeasureFamily> prev;
    if (start) {
        if (start->size() != stamp_times.size())
            throw std::invalid_argument("picard_solve: warm start has " +
                                        std::to_string(start->size()) + " stamps, need " +
                                        std::to_string(stamp_times.size()));
        prev = *start;
    } else {
        prev.assign(stamp_times.size(), mu0);
    }

    for (int iter = 1; iter <= max_iter; ++iter) {
        FieldEvaluator field(A, coupling, n, b);
        field.set_trajectory(stamp_times, prev);

        std::vector<MeasureFamily> next;
        next.reserve(stamp_times.size());
        next.push_back(mu0);
        MeasureFamily cur = mu0;
        for (long long s = 0; s < steps; ++s) {
            cur = flow_step(field, cur, s * dt, dt);
            if ((s + 1) % stride == 0 || s + 1 == steps) {
                if (static_cast<long long>(next.size()) < static_cast<long long>(stamp_times.size()))
                    next.push_back(cur);
            }
        }

        const double gap = d_alpha(timed(stamp_times, prev), timed(stamp_times, next), A, alpha);
        res.gap_history.push_back(gap);
        res.iterations = iter;
        const std::size_t k = res.gap_history.size();
        if (k >= 2 && res.gap_history[k - 2] > 0.0) {
            const double ratio = gap / res.gap_history[k - 2];
            res.ratio_history.push_back(ratio);
            // the theorem's rate governs the pre-asymptotic regime; once gaps
            // sit at float dust the quotient is meaningless
            if (res.gap_history[k - 2] > tol && gap > tol &&
                ratio > res.contraction_bound + 0.1)
                throw std::runtime_error(
                    "picard_solve: contraction ratio " + std::to_string(ratio) +
                    " exceeds the theorem bound " + std::to_string(res.contraction_bound) +
                    " (+0.1 slack); gap history: " + fmt_history(res.gap_history));
        }
        prev = std::move(next);
        if (gap <= tol) {
            res.converged = true;
            break;
        }
    }
    if (!res.converged)
        throw std::runtime_error("picard_solve: no convergence within " +
                                 std::to_string(max_iter) + " iterations; gap history: " +
                                 fmt_history(res.gap_history));
    res.stamps = stamp_times;
    res.trajectory = std::move(prev);
    return res;
}

FvResult fv_transport_solve(const Graphop& A, const std::function<double(double, double)>& rho0,
                            const CouplingSpec& coupling, double T, double dt, int n,
                            int u_resolution) {
    if (n < 1) throw std::invalid_argument("fv_transport_solve: need n >= 1");
    if (u_resolution < 8) throw std::invalid_argument("fv_transport_solve: u_resolution too small");
    if (!(dt > 0.0) || !(T >= 0.0))
        throw std::invalid_argument("fv_transport_solve: bad T or dt");
    const long long steps = std::llround(T / dt);
    if (std::fabs(steps * dt - T) > 1e-9 * std::max(1.0, std::fabs(T)))
        throw std::invalid_argument("fv_transport_solve: T must be an integer multiple of dt");

    const int U = u_resolution;
    const double h = kPhasePeriod / U;
    const auto mix = A.mixing_matrix(n);
    const double C = coupling.strength();
    const auto& ps = coupling.sin_coefficients();
    const auto& qs = coupling.cos_coefficients();
    const int J = coupling.max_harmonic();
    const double vbound = C * coupling.sup_abs() * A.gamma(); // b = 1: unit-mass fibers

    std::vector<std::vector<double>> rho(n);
    for (int c = 0; c < n; ++c) rho[c] = cell_averaged_density(rho0, n, c, U);

    // trig tables at cell midpoints (moments) and left edges (fluxes)
    std::vector<double> smid(static_cast<std::size_t>(J) * U), cmid(smid.size());
    std::vector<double> sedge(smid.size()), cedge(smid.size());
    for (int j = 1; j <= J; ++j)
        for (int i = 0; i < U; ++i) {
            smid[(j - 1) * U + i] = std::sin(j * (i + 0.5) * h);
            cmid[(j - 1) * U + i] = std::cos(j * (i + 0.5) * h);
            sedge[(j - 1) * U + i] = std::sin(j * i * h);
            cedge[(j - 1) * U + i] = std::cos(j * i * h);
        }

    const long long stride = std::max<long long>(1, steps / 50);
    FvResult out;
    out.cells = n;
    out.u_cells = U;
    out.stamps.push_back(0.0);
    out.densities.push_back(rho);

    std::vector<double> raw(static_cast<std::size_t>(n) * 2 * J);
    std::vector<double> mixed(raw.size());
    std::vector<double> V(U), flux(U), rnew(U);

    for (long long s = 0; s < steps; ++s) {
        std::fill(raw.begin(), raw.end(), 0.0);
        for (int c = 0; c < n; ++c)
            for (int j = 1; j <= J; ++j) {
                const double* sm = smid.data() + static_cast<std::size_t>(j - 1) * U;
                const double* cm = cmid.data() + static_cast<std::size_t>(j - 1) * U;
                double P = 0.0, Q = 0.0;
                for (int i = 0; i < U; ++i) {
                    P += sm[i] * rho[c][i];
                    Q += cm[i] * rho[c][i];
                }
                raw[static_cast<std::size_t>(c) * 2 * J + 2 * (j - 1)] = P * h;
                raw[static_cast<std::size_t>(c) * 2 * J + 2 * (j - 1) + 1] = Q * h;
            }
        std::fill(mixed.begin(), mixed.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < n; ++c) {
                const double m = mix[i][c];
                if (m == 0.0) continue;
                for (int k = 0; k < 2 * J; ++k)
                    mixed[static_cast<std::size_t>(i) * 2 * J + k] +=
                        m * raw[static_cast<std::size_t>(c) * 2 * J + k];
            }

        for (int c = 0; c < n; ++c) {
            const double* mm = mixed.data() + static_cast<std::size_t>(c) * 2 * J;
            double vmax = 0.0;
            for (int e = 0; e < U; ++e) {
                double acc = 0.0;
                for (int j = 1; j <= J; ++j) {
                    const double P = mm[2 * (j - 1)], Q = mm[2 * (j - 1) + 1];
                    acc += ps[j - 1] * (P * cedge[(j - 1) * U + e] - Q * sedge[(j - 1) * U + e]) +
                           qs[j - 1] * (Q * cedge[(j - 1) * U + e] + P * sedge[(j - 1) * U + e]);
                }
                V[e] = C * acc;
                vmax = std::max(vmax, std::fabs(V[e]));
                if (!std::isfinite(V[e]) || std::fabs(V[e]) > vbound * (1.0 + 1e-9) + 1e-12)
                    throw std::runtime_error("fv_transport_solve: field bound violated");
            }
            if (vmax * dt / h > 0.9)
                throw std::runtime_error("fv_transport_solve: CFL violation |V|dt/du = " +
                                         std::to_string(vmax * dt / h) + " > 0.9 at step " +
                                         std::to_string(s) + "; reduce dt below " +
                                         std::to_string(0.9 * h / vmax));
            for (int e = 0; e < U; ++e)
                flux[e] = V[e] >= 0.0 ? V[e] * rho[c][(e - 1 + U) % U] : V[e] * rho[c][e];
            for (int i = 0; i < U; ++i)
                rnew[i] = rho[c][i] - dt / h * (flux[(i + 1) % U] - flux[i]);
            rho[c] = rnew;
        }

        if ((s + 1) % stride == 0 || s + 1 == steps) {
            out.stamps.push_back((s + 1) * dt);
            out.densities.push_back(rho);
        }
    }
    return out;
}

MeasureFamily fv_family(const FvResult& fv, int stamp, int Q) {
    if (stamp < 0 || stamp >= static_cast<int>(fv.densities.size()))
        throw std::invalid_argument("fv_family: stamp index out of range");
    std::vector<PhaseMeasure> fibers;
    fibers.reserve(fv.cells);
    for (int c = 0; c < fv.cells; ++c) {
        auto atoms = quantile_atoms(fv.densities[stamp][c], Q);
        std::vector<Particle> ps(atoms.size());
        for (std::size_t q = 0; q < atoms.size(); ++q) ps[q] = Particle{atoms[q], 1.0 / Q};
        fibers.emplace_back(std::move(ps));
    }
    return MeasureFamily(TorusGrid(fv.cells, kNodePeriod), std::move(fibers));
}

ContinuityReport continuity_in_x_diagnostic(const std::vector<MeasureFamily>& trajectory) {
    if (trajectory.empty())
        throw std::invalid_argument("continuity diagnostic: empty trajectory");
    const int n = trajectory.front().cells();
    ContinuityReport rep;
    rep.per_boundary.assign(n, 0.0);
    for (const auto& fam : trajectory) {
        if (fam.cells() != n)
            throw std::invalid_argument("continuity diagnostic: inconsistent resolutions");
        double worst = 0.0;
        for (int c = 0; c < n; ++c) {
            const double d = d_bl(fam.fiber(c), fam.fiber((c + 1) % n));
            rep.per_boundary[c] = std::max(rep.per_boundary[c], d);
            worst = std::max(worst, d);
        }
        rep.per_stamp.push_back(worst);
        rep.overall = std::max(rep.overall, worst);
    }
    return rep;
}

} // namespace gdyn
