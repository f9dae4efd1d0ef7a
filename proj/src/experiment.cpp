#include "gdyn/experiment.hpp"

#include "gdyn/kuramoto.hpp"
#include "gdyn/metrics.hpp"
#include "gdyn/torus.hpp"
#include "gdyn/vfpe.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace gdyn {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double median_of(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

void run_pool(int threads, std::size_t count, const std::function<void(std::size_t)>& work) {
    threads = std::max(1, threads);
    if (threads == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    const int spawn = static_cast<int>(std::min<std::size_t>(threads, count));
    for (int t = 0; t < spawn; ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < count;) work(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("config: parse error in '" + path + "': " + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config: top level must be a JSON object");

    static const std::set<std::string> known{
        "graphop",    "shift_r",   "band_r",     "band_halfwidth", "band_height",
        "graphop_grid", "kernel",  "k_schedule", "nm_schedule",    "scaling_k",
        "rho0",       "coupling",  "strength",   "beta",           "T",
        "dt",         "alpha",     "tol",        "solver_particles", "seeds",
        "out_dir",    "threads"};
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw std::invalid_argument("config: unknown key '" + item.key() + "'");

    ExperimentConfig cfg;
    try {
        auto get = [&j](const char* key, auto& slot) {
            if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
        };
        get("graphop", cfg.graphop);
        get("shift_r", cfg.shift_r);
        get("band_r", cfg.band_r);
        get("band_halfwidth", cfg.band_halfwidth);
        get("band_height", cfg.band_height);
        get("graphop_grid", cfg.graphop_grid);
        get("kernel", cfg.kernel);
        get("k_schedule", cfg.k_schedule);
        if (j.contains("nm_schedule")) {
            cfg.nm_schedule.clear();
            for (const auto& e : j.at("nm_schedule")) {
                if (!e.is_array() || e.size() != 2)
                    throw std::invalid_argument("config: nm_schedule entries must be [n, M]");
                cfg.nm_schedule.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
            }
        }
        get("scaling_k", cfg.scaling_k);
        get("rho0", cfg.rho0);
        get("coupling", cfg.coupling);
        get("strength", cfg.strength);
        get("beta", cfg.beta);
        get("T", cfg.T);
        get("dt", cfg.dt);
        get("alpha", cfg.alpha);
        get("tol", cfg.tol);
        get("solver_particles", cfg.solver_particles);
        get("seeds", cfg.seeds);
        get("out_dir", cfg.out_dir);
        get("threads", cfg.threads);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("config: bad field type: ") + e.what());
    }
    return cfg;
}

Graphop make_graphop(const ExperimentConfig& cfg) {
    TorusGrid grid(cfg.graphop_grid, kNodePeriod);
    if (cfg.graphop == "ones")
        return Graphop::graphon(grid, [](double, double) { return 1.0; });
    if (cfg.graphop == "band")
        return Graphop::arc_band(grid, cfg.band_r, cfg.band_halfwidth, cfg.band_height);
    if (cfg.graphop == "shift") return Graphop::atomic_shift(grid, cfg.shift_r);
    if (cfg.graphop == "mixture")
        return Graphop::mixture(
            {{0.5, Graphop::atomic_shift(grid, cfg.shift_r)},
             {0.5, Graphop::graphon(grid, [](double, double) { return 1.0; })}});
    throw std::invalid_argument("config: unknown graphop variant '" + cfg.graphop + "'");
}

SummabilityKernel make_kernel(const ExperimentConfig& cfg, int K) {
    if (cfg.kernel == "fejer") return SummabilityKernel::fejer(K);
    if (cfg.kernel == "gaussian") return SummabilityKernel::wrapped_gaussian(K);
    throw std::invalid_argument("config: unknown kernel family '" + cfg.kernel + "'");
}

CouplingSpec make_coupling(const ExperimentConfig& cfg) {
    if (cfg.coupling == "sine") return CouplingSpec::sine(cfg.strength);
    if (cfg.coupling == "sine_pair") return CouplingSpec::sine_pair(cfg.strength, cfg.beta);
    throw std::invalid_argument("config: unknown coupling '" + cfg.coupling + "'");
}

std::function<double(double, double)> make_rho0(const ExperimentConfig& cfg) {
    if (cfg.rho0 == "uniform")
        return [](double, double) { return 1.0 / kTwoPi; };
    if (cfg.rho0 == "bump") {
        const double norm = kTwoPi * std::cyl_bessel_i(0.0, 1.0);
        return [norm](double u, double x) { return std::exp(std::cos(u - kTwoPi * x)) / norm; };
    }
    throw std::invalid_argument("config: unknown rho0 '" + cfg.rho0 + "'");
}

double effective_dt(const ExperimentConfig& cfg, const Graphop& A) {
    if (cfg.dt > 0.0) return cfg.dt;
    const double speed = cfg.strength * A.gamma();
    return speed > 0.0 ? std::min(1e-2, 0.1 / speed) : 1e-2;
}

double effective_alpha(const ExperimentConfig& cfg, const Graphop& A) {
    if (cfg.alpha > 0.0) return cfg.alpha;
    return 2.0 * cfg.strength + A.gamma() + 2.0; // b = 1
}

void validate_config(const ExperimentConfig& cfg) {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    if (cfg.k_schedule.empty()) fail("k_schedule must be non-empty");
    for (std::size_t i = 0; i < cfg.k_schedule.size(); ++i) {
        if (cfg.k_schedule[i] < 0) fail("kernel indices must be >= 0");
        if (i && cfg.k_schedule[i] <= cfg.k_schedule[i - 1])
            fail("k_schedule must be strictly increasing");
    }
    if (cfg.scaling_k < 0) fail("scaling_k must be >= 0");
    if (cfg.nm_schedule.empty()) fail("nm_schedule must be non-empty");
    long long prev_N = 0;
    for (auto& [n, M] : cfg.nm_schedule) {
        if (n < 1 || M < 1) fail("nm_schedule entries need n, M >= 1");
        const long long N = static_cast<long long>(n) * M;
        if (N <= prev_N) fail("nm_schedule must have strictly increasing N = n*M");
        prev_N = N;
    }
    const int k_max = std::max(cfg.k_schedule.back(), cfg.scaling_k);
    if (cfg.graphop_grid < 8 * (k_max + 1))
        fail("graphop_grid " + std::to_string(cfg.graphop_grid) +
             " cannot resolve the kernel schedule; need at least " +
             std::to_string(8 * (k_max + 1)) + " cells");
    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) fail("T must be positive");
    if (cfg.dt < 0.0 || !std::isfinite(cfg.dt)) fail("dt must be >= 0 (0 = auto)");
    if (cfg.alpha < 0.0 || !std::isfinite(cfg.alpha)) fail("alpha must be >= 0 (0 = auto)");
    if (!(cfg.tol > 0.0)) fail("tol must be positive");
    if (!(cfg.strength > 0.0)) fail("strength must be positive");
    if (cfg.solver_particles < 1) fail("solver_particles must be >= 1");
    if (cfg.seeds.empty()) fail("seeds must be non-empty");
    if (cfg.threads < 1) fail("threads must be >= 1");

    Graphop A = make_graphop(cfg); // also validates the variant parameters
    make_kernel(cfg, cfg.k_schedule.front());
    make_coupling(cfg);
    make_rho0(cfg);
    const double gamma = A.gamma();
    if (gamma > 1.0 + 1e-6)
        fail("graphop has gamma_A = " + std::to_string(gamma) + " > 1; rescale it");
    const double alpha = effective_alpha(cfg, A);
    if (!(alpha > 2.0 * cfg.strength + gamma))
        fail("alpha = " + std::to_string(alpha) + " must exceed 2Cb + b*gamma = " +
             std::to_string(2.0 * cfg.strength + gamma));
    const double dt = effective_dt(cfg, A);
    const long long steps = std::llround(cfg.T / dt);
    if (steps < 1 || std::fabs(steps * dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
        fail("T must be a positive integer multiple of dt");
}

std::vector<ReportAggregate> ConvergenceReport::medians() const {
    std::vector<ReportAggregate> out;
    std::map<std::tuple<int, int, int>, std::size_t> index;
    std::vector<std::array<std::vector<double>, 3>> cols;
    for (const auto& r : rows) {
        const auto key = std::make_tuple(r.n, r.M, r.K);
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, out.size()).first;
            out.push_back(ReportAggregate{r.n, r.M, r.K, 0.0, 0.0, 0.0, 0});
            cols.emplace_back();
        }
        if (!r.ok) continue;
        auto& c = cols[it->second];
        c[0].push_back(r.emp_vs_vfpek);
        c[1].push_back(r.vfpek_vs_vfpeinf);
        c[2].push_back(r.emp_vs_vfpeinf);
        out[it->second].count += 1;
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].med_emp_vfpek = median_of(cols[i][0]);
        out[i].med_vfpek_vfpeinf = median_of(cols[i][1]);
        out[i].med_emp_vfpeinf = median_of(cols[i][2]);
    }
    return out;
}

void ConvergenceReport::write_csv(std::ostream& out) const {
    out << "n,M,K,seed,d_emp_vfpeK,d_vfpeK_vfpeInf,d_emp_vfpeInf\n";
    for (const auto& r : rows) {
        out << r.n << ',' << r.M << ',' << r.K << ',' << r.seed << ',';
        if (r.ok)
            out << fmt17(r.emp_vs_vfpek) << ',' << fmt17(r.vfpek_vs_vfpeinf) << ','
                << fmt17(r.emp_vs_vfpeinf) << '\n';
        else
            out << "nan,nan,nan\n";
    }
}

void ConvergenceReport::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write_csv(out);
}

bool ConvergenceReport::all_ok() const {
    for (const auto& r : rows)
        if (!r.ok) return false;
    return true;
}

namespace {

// one VFPE solve outcome; err non-empty means the solve is unusable
struct OpSolve {
    std::vector<double> stamps;
    std::vector<MeasureFamily> traj;
    std::string err;
};

double sup_dbm(const std::vector<MeasureFamily>& a, const std::vector<MeasureFamily>& b) {
    double worst = 0.0;
    for (std::size_t s = 0; s < a.size(); ++s) worst = std::max(worst, d_bm(a[s], b[s]));
    return worst;
}

ConvergenceReport run_grid(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const Graphop A = make_graphop(cfg);
    const auto cpl = make_coupling(cfg);
    const auto rho = make_rho0(cfg);
    const double dt = effective_dt(cfg, A);
    const double alpha = effective_alpha(cfg, A);

    std::vector<int> ns;
    for (auto& [n, M] : cfg.nm_schedule)
        if (std::find(ns.begin(), ns.end(), n) == ns.end()) ns.push_back(n);

    // regularized operators; -1 keys the un-regularized limit
    std::map<int, Graphop> ops;
    std::map<int, std::string> op_err;
    ops.emplace(-1, A);
    for (int K : cfg.k_schedule) {
        try {
            ops.emplace(K, regularize(A, make_kernel(cfg, K)));
        } catch (const std::exception& e) {
            op_err[K] = e.what();
        }
    }

    // continuum solves, one per (operator, node resolution); deterministic
    std::map<std::pair<int, int>, OpSolve> sol;
    for (int n : ns) {
        const auto mu0 = density_family(rho, n, cfg.solver_particles);
        for (const auto& [K, op] : ops) {
            OpSolve s;
            try {
                auto res = picard_solve(op, mu0, cpl, cfg.T, dt, alpha, cfg.tol);
                s.stamps = std::move(res.stamps);
                s.traj = std::move(res.trajectory);
            } catch (const std::exception& e) {
                s.err = std::string("vfpe(") + (K < 0 ? "inf" : std::to_string(K)) +
                        ", n=" + std::to_string(n) + "): " + e.what();
            }
            sol.emplace(std::make_pair(K, n), std::move(s));
        }
    }

    // middle column is seed-independent: compute once per (K, n)
    std::map<std::pair<int, int>, double> middle;
    for (int n : ns)
        for (int K : cfg.k_schedule) {
            const auto& sk = sol.at({K, n});
            const auto& si = sol.at({-1, n});
            if (sk.err.empty() && si.err.empty())
                middle[{K, n}] = sup_dbm(sk.traj, si.traj);
        }

    // sampled weight matrices are deterministic: one per (K, N)
    std::map<std::pair<int, long long>, std::vector<double>> weights;
    std::map<std::pair<int, long long>, std::string> weight_err;
    for (auto& [n, M] : cfg.nm_schedule) {
        const long long N = static_cast<long long>(n) * M;
        for (int K : cfg.k_schedule) {
            if (weights.count({K, N}) || weight_err.count({K, N})) continue;
            if (op_err.count(K)) {
                weight_err[{K, N}] = "regularize(K=" + std::to_string(K) + "): " + op_err[K];
                continue;
            }
            try {
                weights[{K, N}] = sample_weights(ops.at(K), static_cast<int>(N));
            } catch (const std::exception& e) {
                weight_err[{K, N}] = std::string("sample_weights: ") + e.what();
            }
        }
    }

    ConvergenceReport rep;
    for (auto& [n, M] : cfg.nm_schedule)
        for (int K : cfg.k_schedule)
            for (std::uint64_t seed : cfg.seeds) {
                TriangleRow r;
                r.n = n;
                r.M = M;
                r.K = K;
                r.seed = seed;
                rep.rows.push_back(std::move(r));
            }

    run_pool(cfg.threads, rep.rows.size(), [&](std::size_t i) {
        TriangleRow& r = rep.rows[i];
        try {
            const long long N = static_cast<long long>(r.n) * r.M;
            if (auto it = weight_err.find({r.K, N}); it != weight_err.end())
                throw std::runtime_error(it->second);
            const auto& sk = sol.at({r.K, r.n});
            const auto& si = sol.at({-1, r.n});
            if (!sk.err.empty()) throw std::runtime_error(sk.err);
            if (!si.err.empty()) throw std::runtime_error(si.err);

            auto state = make_oscillator_state(sample_initial(rho, r.n, r.M, r.seed),
                                               weights.at({r.K, N}));
            auto traj = integrate(state, cpl, cfg.T, dt);
            if (traj.times.size() != sk.stamps.size())
                throw std::runtime_error("stamp grids of simulator and solver disagree");
            for (std::size_t s = 0; s < traj.times.size(); ++s)
                if (std::fabs(traj.times[s] - sk.stamps[s]) > 1e-9)
                    throw std::runtime_error("stamp grids of simulator and solver disagree");

            double c1 = 0.0, c3 = 0.0;
            for (std::size_t s = 0; s < traj.times.size(); ++s) {
                const auto emp = empirical_family(traj.phases[s], r.n, r.M);
                c1 = std::max(c1, d_bm(emp, sk.traj[s]));
                c3 = std::max(c3, d_bm(emp, si.traj[s]));
            }
            r.emp_vs_vfpek = c1;
            r.emp_vs_vfpeinf = c3;
            r.vfpek_vs_vfpeinf = middle.at({r.K, r.n});
        } catch (const std::exception& e) {
            r.ok = false;
            r.error = e.what();
            r.emp_vs_vfpek = r.vfpek_vs_vfpeinf = r.emp_vs_vfpeinf =
                std::numeric_limits<double>::quiet_NaN();
        }
    });
    return rep;
}

} // namespace

ConvergenceReport run_triangle(const ExperimentConfig& cfg) { return run_grid(cfg); }

ConvergenceReport run_discrete_scaling(const ExperimentConfig& cfg) {
    ExperimentConfig fixed = cfg;
    fixed.k_schedule = {cfg.scaling_k};
    return run_grid(fixed);
}

namespace {

struct PlotPoint {
    double x, y;
};

std::string render_svg(const std::string& title, const std::string& xlabel,
                       std::vector<PlotPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const PlotPoint& a, const PlotPoint& b) {
        return a.x < b.x;
    });
    const double W = 480, H = 320, L = 64, R = 16, Tm = 36, B = 44;
    double xmin = pts.front().x, xmax = pts.back().x;
    if (xmax <= xmin) {
        xmin -= 1.0;
        xmax += 1.0;
    }
    // log scale for the gap axis, floored to keep exact zeros plottable
    auto logy = [](double v) { return std::log10(std::max(v, 1e-16)); };
    double ymin = logy(pts.front().y), ymax = ymin;
    for (const auto& p : pts) {
        ymin = std::min(ymin, logy(p.y));
        ymax = std::max(ymax, logy(p.y));
    }
    if (ymax - ymin < 0.5) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    auto X = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto Y = [&](double v) { return H - B - (logy(v) - ymin) / (ymax - ymin) * (H - Tm - B); };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    s << "<!-- data (" << xlabel << ", gap):";
    for (const auto& p : pts) s << ' ' << fmt6(p.x) << ',' << fmt17(p.y);
    s << " -->\n";
    s << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"monospace\" "
         "font-size=\"13\">"
      << title << "</text>\n";
    // axes
    s << "<line x1=\"" << L << "\" y1=\"" << Tm << "\" x2=\"" << L << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\""
      << H - B << "\" stroke=\"black\"/>\n";
    // y ticks at integer decades
    for (int d = static_cast<int>(std::ceil(ymin)); d <= static_cast<int>(std::floor(ymax));
         ++d) {
        const double y = H - B - (d - ymin) / (ymax - ymin) * (H - Tm - B);
        s << "<line x1=\"" << L - 4 << "\" y1=\"" << y << "\" x2=\"" << L << "\" y2=\"" << y
          << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << L - 8 << "\" y=\"" << y + 4
          << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"10\">1e" << d
          << "</text>\n";
    }
    // x ticks at the data points
    for (const auto& p : pts) {
        s << "<line x1=\"" << X(p.x) << "\" y1=\"" << H - B << "\" x2=\"" << X(p.x)
          << "\" y2=\"" << H - B + 4 << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << X(p.x) << "\" y=\"" << H - B + 16
          << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"10\">" << fmt6(p.x)
          << "</text>\n";
    }
    s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 8
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" << xlabel
      << "</text>\n";
    s << "<text x=\"14\" y=\"" << (Tm + H - B) / 2
      << "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\" "
         "transform=\"rotate(-90 14 "
      << (Tm + H - B) / 2 << ")\">gap</text>\n";
    if (pts.size() >= 2) {
        s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < pts.size(); ++i)
            s << (i ? " " : "") << X(pts[i].x) << ',' << Y(pts[i].y);
        s << "\"/>\n";
    }
    for (const auto& p : pts)
        s << "<circle cx=\"" << X(p.x) << "\" cy=\"" << Y(p.y)
          << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace

std::vector<std::string> emit_plots(const ConvergenceReport& rep, const std::string& out_dir,
                                    const std::string& prefix) {
    const auto ag = rep.medians();
    std::vector<ReportAggregate> usable;
    for (const auto& a : ag)
        if (a.count > 0) usable.push_back(a);
    if (usable.empty()) {
        std::cerr << "emit_plots: empty report, nothing to plot\n";
        return {};
    }
    bool k_varies = false;
    for (const auto& a : usable) k_varies |= a.K != usable.front().K;
    const std::string xlabel = k_varies ? "K" : "N = n*M";
    auto xval = [&](const ReportAggregate& a) {
        return k_varies ? static_cast<double>(a.K)
                        : static_cast<double>(a.n) * static_cast<double>(a.M);
    };

    const char* names[3] = {"emp_vfpeK", "vfpeK_vfpeInf", "emp_vfpeInf"};
    const char* titles[3] = {"sup_t gap(empirical, VFPE^K)", "sup_t gap(VFPE^K, VFPE^inf)",
                             "sup_t gap(empirical, VFPE^inf)"};
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    for (int c = 0; c < 3; ++c) {
        std::vector<PlotPoint> pts;
        for (const auto& a : usable) {
            const double y = c == 0   ? a.med_emp_vfpek
                             : c == 1 ? a.med_vfpek_vfpeinf
                                      : a.med_emp_vfpeinf;
            pts.push_back({xval(a), y});
        }
        const std::string path = out_dir + "/" + prefix + "_" + names[c] + ".svg";
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << render_svg(titles[c], xlabel, std::move(pts));
        written.push_back(path);
    }
    return written;
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& artifacts,
                    const std::string& path) {
    nlohmann::json j;
    j["config"] = {{"graphop", cfg.graphop},
                   {"shift_r", cfg.shift_r},
                   {"band_r", cfg.band_r},
                   {"band_halfwidth", cfg.band_halfwidth},
                   {"band_height", cfg.band_height},
                   {"graphop_grid", cfg.graphop_grid},
                   {"kernel", cfg.kernel},
                   {"k_schedule", cfg.k_schedule},
                   {"scaling_k", cfg.scaling_k},
                   {"rho0", cfg.rho0},
                   {"coupling", cfg.coupling},
                   {"strength", cfg.strength},
                   {"beta", cfg.beta},
                   {"T", cfg.T},
                   {"dt", cfg.dt},
                   {"alpha", cfg.alpha},
                   {"tol", cfg.tol},
                   {"solver_particles", cfg.solver_particles},
                   {"seeds", cfg.seeds},
                   {"out_dir", cfg.out_dir},
                   {"threads", cfg.threads}};
    auto& nm = j["config"]["nm_schedule"] = nlohmann::json::array();
    for (auto& [n, M] : cfg.nm_schedule) nm.push_back({n, M});
    j["artifacts"] = artifacts;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

TrendCheck check_triangle_trends(const ConvergenceReport& rep,
                                 const std::vector<int>& k_schedule, double middle_ceiling) {
    TrendCheck tc;
    auto flag = [&tc](const std::string& m) {
        tc.passed = false;
        tc.violations.push_back(m);
    };
    for (const auto& r : rep.rows) {
        if (!r.ok) continue;
        if (r.emp_vs_vfpeinf > r.emp_vs_vfpek + r.vfpek_vs_vfpeinf + 1e-9)
            flag("triangle inequality violated at n=" + std::to_string(r.n) +
                 " M=" + std::to_string(r.M) + " K=" + std::to_string(r.K) +
                 " seed=" + std::to_string(r.seed));
    }
    const auto ag = rep.medians();
    std::map<std::pair<int, int>, std::map<int, double>> by_nm; // (n,M) -> K -> med2
    for (const auto& a : ag) {
        if (a.count == 0) {
            flag("no successful rows at n=" + std::to_string(a.n) + " M=" + std::to_string(a.M) +
                 " K=" + std::to_string(a.K));
            continue;
        }
        by_nm[{a.n, a.M}][a.K] = a.med_vfpek_vfpeinf;
    }
    for (const auto& [nm, per_k] : by_nm) {
        double prev = std::numeric_limits<double>::infinity();
        for (int K : k_schedule) {
            auto it = per_k.find(K);
            if (it == per_k.end()) continue;
            if (it->second > prev + 1e-9)
                flag("middle column increases at n=" + std::to_string(nm.first) +
                     " M=" + std::to_string(nm.second) + " K=" + std::to_string(K) + " (" +
                     fmt6(it->second) + " > " + fmt6(prev) + ")");
            if (middle_ceiling > 0.0 && it->second > middle_ceiling)
                flag("middle column " + fmt6(it->second) + " above ceiling " +
                     fmt6(middle_ceiling) + " at K=" + std::to_string(K));
            prev = it->second;
        }
    }
    return tc;
}

TrendCheck check_scaling_trend(const ConvergenceReport& rep,
                               const std::vector<std::pair<int, int>>& nm_schedule) {
    TrendCheck tc;
    auto flag = [&tc](const std::string& m) {
        tc.passed = false;
        tc.violations.push_back(m);
    };
    for (const auto& r : rep.rows) {
        if (!r.ok) continue;
        if (r.emp_vs_vfpeinf > r.emp_vs_vfpek + r.vfpek_vs_vfpeinf + 1e-9)
            flag("triangle inequality violated at n=" + std::to_string(r.n) +
                 " M=" + std::to_string(r.M) + " seed=" + std::to_string(r.seed));
    }
    const auto ag = rep.medians();
    std::map<std::pair<int, int>, double> med1;
    for (const auto& a : ag) {
        if (a.count == 0) {
            flag("no successful rows at n=" + std::to_string(a.n) + " M=" + std::to_string(a.M));
            continue;
        }
        med1[{a.n, a.M}] = a.med_emp_vfpek;
    }
    double prev = std::numeric_limits<double>::infinity();
    bool have_prev = false;
    for (const auto& nm : nm_schedule) {
        auto it = med1.find(nm);
        if (it == med1.end()) continue;
        if (have_prev && !(it->second < prev))
            flag("first column does not decrease at n=" + std::to_string(nm.first) +
                 " M=" + std::to_string(nm.second) + " (" + fmt6(it->second) +
                 " >= " + fmt6(prev) + ")");
        prev = it->second;
        have_prev = true;
    }
    return tc;
}

} // namespace gdyn
