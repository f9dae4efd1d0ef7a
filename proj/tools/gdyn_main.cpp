// Command line front end: simulate / solve / regularize / triangle / metrics.
// Exit codes: 0 ok, 2 config error, 3 numerical failure, 4 trend violation
// in `triangle --check`.

#include <CLI11.hpp>

#include "gdyn/experiment.hpp"
#include "gdyn/kuramoto.hpp"
#include "gdyn/measures.hpp"
#include "gdyn/metrics.hpp"
#include "gdyn/summability.hpp"
#include "gdyn/vfpe.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace gdyn;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTrend = 4;

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) { std::filesystem::create_directories(dir); }

// rows that failed keep the CSV schema intact; the reasons land next to it
void write_error_sidecar(const ConvergenceReport& rep, const std::string& path,
                         std::vector<std::string>& artifacts) {
    std::vector<std::string> lines;
    for (const auto& r : rep.rows)
        if (!r.ok)
            lines.push_back("n=" + std::to_string(r.n) + " M=" + std::to_string(r.M) +
                            " K=" + std::to_string(r.K) + " seed=" + std::to_string(r.seed) +
                            ": " + r.error);
    if (lines.empty()) return;
    std::ofstream out(path);
    for (const auto& l : lines) out << l << '\n';
    artifacts.push_back(path);
}

int cmd_simulate(const ExperimentConfig& cfg, int k_flag) {
    validate_config(cfg);
    const Graphop A = make_graphop(cfg);
    const auto cpl = make_coupling(cfg);
    const auto rho = make_rho0(cfg);
    const double dt = effective_dt(cfg, A);
    const int K = k_flag >= 0 ? k_flag : cfg.k_schedule.front();
    const auto [n, M] = cfg.nm_schedule.front();
    const int N = n * M;

    const Graphop AK = regularize(A, make_kernel(cfg, K));
    auto state = make_oscillator_state(sample_initial(rho, n, M, cfg.seeds.front()),
                                       sample_weights(AK, N));
    auto traj = integrate(state, cpl, cfg.T, dt);

    ensure_dir(cfg.out_dir);
    const std::string fam_path = join_path(cfg.out_dir, "simulate_final.txt");
    save_measure_family(fam_path, empirical_family(traj.phases.back(), n, M),
                        traj.times.back());
    write_manifest(cfg, {fam_path}, join_path(cfg.out_dir, "simulate_manifest.json"));
    std::cout << "simulated " << N << " oscillators (n=" << n << ", M=" << M << ", K=" << K
              << ", seed=" << cfg.seeds.front() << ") over " << traj.times.size()
              << " stamps; final empirical family -> " << fam_path << "\n";
    return kExitOk;
}

int cmd_solve(const ExperimentConfig& cfg, int k_flag) {
    validate_config(cfg);
    const Graphop A = make_graphop(cfg);
    const auto cpl = make_coupling(cfg);
    const auto rho = make_rho0(cfg);
    const double dt = effective_dt(cfg, A);
    const double alpha = effective_alpha(cfg, A);
    const auto [n, M] = cfg.nm_schedule.front();
    (void)M;

    Graphop op = k_flag >= 0 ? regularize(A, make_kernel(cfg, k_flag)) : A;
    const auto mu0 = density_family(rho, n, cfg.solver_particles);
    PicardResult res = picard_solve(op, mu0, cpl, cfg.T, dt, alpha, cfg.tol);

    ensure_dir(cfg.out_dir);
    const std::string fam_path = join_path(cfg.out_dir, "solve_final.txt");
    save_measure_family(fam_path, res.trajectory.back(), res.stamps.back());
    const std::string gap_path = join_path(cfg.out_dir, "solve_gaps.csv");
    {
        std::ofstream out(gap_path);
        out << "iteration,gap\n";
        for (std::size_t i = 0; i < res.gap_history.size(); ++i)
            out << i + 1 << ',' << res.gap_history[i] << '\n';
    }
    write_manifest(cfg, {fam_path, gap_path}, join_path(cfg.out_dir, "solve_manifest.json"));
    std::cout << "solved " << op.describe() << " on " << n << " fibers in " << res.iterations
              << " iterations (alpha=" << alpha << ", contraction bound "
              << res.contraction_bound << ");\n  gap history:";
    for (double g : res.gap_history) std::cout << ' ' << g;
    std::cout << "\n  final family -> " << fam_path << "\n";
    return kExitOk;
}

int cmd_regularize(const ExperimentConfig& cfg, int k_flag) {
    validate_config(cfg);
    const Graphop A = make_graphop(cfg);
    const int K = k_flag >= 0 ? k_flag : cfg.k_schedule.front();
    const Graphop AK = regularize(A, make_kernel(cfg, K));
    const auto& W = AK.kernel_matrix();
    const int G = AK.grid().resolution();

    ensure_dir(cfg.out_dir);
    const std::string path =
        join_path(cfg.out_dir, "regularized_k" + std::to_string(K) + ".csv");
    std::ofstream out(path);
    char buf[40];
    for (int i = 0; i < G; ++i) {
        for (int j = 0; j < G; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", W[static_cast<std::size_t>(i) * G + j]);
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
    write_manifest(cfg, {path}, join_path(cfg.out_dir, "regularize_manifest.json"));
    std::cout << "wrote " << G << "x" << G << " kernel grid of " << AK.describe() << " -> "
              << path << "\n";
    return kExitOk;
}

int cmd_metrics(const std::string& file_a, const std::string& file_b) {
    MeasureFamily mu = [&] {
        try {
            return load_measure_family(file_a);
        } catch (const std::exception& e) {
            throw std::invalid_argument("cannot read '" + file_a + "': " + e.what());
        }
    }();
    MeasureFamily ka = [&] {
        try {
            return load_measure_family(file_b);
        } catch (const std::exception& e) {
            throw std::invalid_argument("cannot read '" + file_b + "': " + e.what());
        }
    }();
    if (mu.cells() != ka.cells())
        throw std::invalid_argument("families live on different node grids (" +
                                    std::to_string(mu.cells()) + " vs " +
                                    std::to_string(ka.cells()) + " cells)");
    const auto profile = fiber_distance_profile(mu, ka);
    std::cout << "d_bm = " << d_bm(mu, ka) << "\n";
    for (std::size_t i = 0; i < profile.size(); ++i)
        std::cout << "  fiber " << i << ": d_BL = " << profile[i] << "\n";
    return kExitOk;
}

int cmd_triangle(const ExperimentConfig& cfg) {
    validate_config(cfg);
    ensure_dir(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();
    ConvergenceReport rep = run_triangle(cfg);

    std::vector<std::string> artifacts;
    const std::string csv = join_path(cfg.out_dir, "report.csv");
    rep.write_csv(csv);
    artifacts.push_back(csv);
    for (auto& p : emit_plots(rep, cfg.out_dir, "triangle")) artifacts.push_back(p);
    write_error_sidecar(rep, join_path(cfg.out_dir, "report_errors.txt"), artifacts);
    write_manifest(cfg, artifacts, join_path(cfg.out_dir, "manifest.json"));

    std::cout << "triangle run: " << rep.rows.size() << " rows in " << now_seconds(t0)
              << " s -> " << csv << "\n";
    for (const auto& a : rep.medians())
        std::cout << "  n=" << a.n << " M=" << a.M << " K=" << a.K << ": med(emp,VFPE^K)="
                  << a.med_emp_vfpek << " med(VFPE^K,VFPE^inf)=" << a.med_vfpek_vfpeinf
                  << " med(emp,VFPE^inf)=" << a.med_emp_vfpeinf << " [" << a.count
                  << " seeds]\n";

    if (!rep.all_ok()) {
        for (const auto& r : rep.rows)
            if (!r.ok)
                std::cerr << "row n=" << r.n << " M=" << r.M << " K=" << r.K
                          << " seed=" << r.seed << " failed: " << r.error << "\n";
        return kExitNumerical;
    }
    // every emitted report carries the pseudometric triangle invariant
    for (const auto& r : rep.rows)
        if (r.emp_vs_vfpeinf > r.emp_vs_vfpek + r.vfpek_vs_vfpeinf + 1e-9) {
            std::cerr << "triangle invariant violated at n=" << r.n << " M=" << r.M
                      << " K=" << r.K << " seed=" << r.seed << "\n";
            return kExitNumerical;
        }
    return kExitOk;
}

int cmd_triangle_check(const ExperimentConfig& base) {
    ensure_dir(base.out_dir);
    bool numerical_failure = false;
    bool trend_failure = false;
    std::vector<std::string> artifacts;
    const auto t_all = std::chrono::steady_clock::now();

    // the default instance set: operator structure x initial profile
    const char* graphops[] = {"ones", "band", "shift", "mixture"};
    const char* profiles[] = {"bump", "uniform"};
    for (const char* g : graphops)
        for (const char* r : profiles) {
            ExperimentConfig icfg = base;
            icfg.graphop = g;
            icfg.rho0 = r;
            icfg.shift_r = 0.25;
            icfg.band_r = 0.0;
            icfg.band_halfwidth = 0.1;
            icfg.band_height = 5.0;
            icfg.nm_schedule = {base.nm_schedule.front()};
            validate_config(icfg);

            const auto t0 = std::chrono::steady_clock::now();
            ConvergenceReport rep = run_triangle(icfg);
            const std::string tag = std::string("check_") + g + "_" + r;
            const std::string csv = join_path(base.out_dir, tag + ".csv");
            rep.write_csv(csv);
            artifacts.push_back(csv);
            for (auto& p : emit_plots(rep, base.out_dir, tag)) artifacts.push_back(p);
            write_error_sidecar(rep, join_path(base.out_dir, tag + "_errors.txt"), artifacts);

            // Fejer smoothing fixes W = 1, so its middle column must sit at
            // solver-tolerance scale; structured operators only need the trend
            const double ceiling =
                std::string(g) == "ones" ? 2.0 * icfg.tol : -1.0;
            TrendCheck tc = check_triangle_trends(rep, icfg.k_schedule, ceiling);
            const bool ok = rep.all_ok() && tc.passed;
            numerical_failure |= !rep.all_ok();
            trend_failure |= !tc.passed;
            std::cout << (ok ? "[PASS]" : "[FAIL]") << " triangle " << g << " x " << r << " ("
                      << now_seconds(t0) << " s)\n";
            for (const auto& v : tc.violations) std::cout << "       " << v << "\n";
            for (const auto& row : rep.rows)
                if (!row.ok)
                    std::cout << "       row seed=" << row.seed << " K=" << row.K << ": "
                              << row.error << "\n";
        }

    // discrete scaling clause: N grows along the (n, M) schedule at fixed K
    {
        ExperimentConfig scfg = base;
        scfg.graphop = "ones";
        scfg.rho0 = "bump";
        validate_config(scfg);
        const auto t0 = std::chrono::steady_clock::now();
        ConvergenceReport rep = run_discrete_scaling(scfg);
        const std::string csv = join_path(base.out_dir, "check_scaling.csv");
        rep.write_csv(csv);
        artifacts.push_back(csv);
        for (auto& p : emit_plots(rep, base.out_dir, "check_scaling")) artifacts.push_back(p);
        write_error_sidecar(rep, join_path(base.out_dir, "check_scaling_errors.txt"),
                            artifacts);
        TrendCheck tc = check_scaling_trend(rep, scfg.nm_schedule);
        const bool ok = rep.all_ok() && tc.passed;
        numerical_failure |= !rep.all_ok();
        trend_failure |= !tc.passed;
        std::cout << (ok ? "[PASS]" : "[FAIL]") << " scaling ones x bump (K=" << scfg.scaling_k
                  << ", " << now_seconds(t0) << " s)\n";
        for (const auto& v : tc.violations) std::cout << "       " << v << "\n";
    }

    write_manifest(base, artifacts, join_path(base.out_dir, "check_manifest.json"));
    std::cout << "check finished in " << now_seconds(t_all) << " s\n";
    if (numerical_failure) return kExitNumerical;
    if (trend_failure) return kExitTrend;
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"graphop Kuramoto workbench: discrete simulation, mean-field VFPE, "
                 "regularization, and the convergence triangle"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed_flag = 0;
    int threads_flag = 0;
    std::string out_dir_flag;
    app.add_option("--config", config_path, "JSON experiment configuration");
    auto* seed_opt = app.add_option("--seed", seed_flag, "replace the seed list by one seed");
    auto* threads_opt = app.add_option("--threads", threads_flag, "row work-pool width");
    auto* out_opt = app.add_option("--out-dir", out_dir_flag, "output directory");

    int sim_k = -1, solve_k = -1, reg_k = -1;
    auto* sim = app.add_subcommand("simulate", "run the discrete model once");
    sim->add_option("--k", sim_k, "kernel stage for the sampled weights");
    auto* solve = app.add_subcommand("solve", "solve the VFPE by Picard iteration");
    solve->add_option("--k", solve_k, "solve the K-regularized operator (-1: A itself)");
    auto* reg = app.add_subcommand("regularize", "emit the regularized kernel grid");
    reg->add_option("--k", reg_k, "kernel stage");
    auto* tri = app.add_subcommand("triangle", "run the convergence-triangle experiment");
    bool check = false;
    tri->add_flag("--check", check, "run the built-in default instance set with trend checks");
    auto* met = app.add_subcommand("metrics", "compare two stored measure families");
    std::string file_a, file_b;
    met->add_option("a", file_a, "first family file")->required();
    met->add_option("b", file_b, "second family file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        ExperimentConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (seed_opt->count()) cfg.seeds = {seed_flag};
        if (threads_opt->count()) cfg.threads = threads_flag;
        if (out_opt->count()) cfg.out_dir = out_dir_flag;

        if (sim->parsed()) return cmd_simulate(cfg, sim_k);
        if (solve->parsed()) return cmd_solve(cfg, solve_k);
        if (reg->parsed()) return cmd_regularize(cfg, reg_k);
        if (tri->parsed()) return check ? cmd_triangle_check(cfg) : cmd_triangle(cfg);
        if (met->parsed()) return cmd_metrics(file_a, file_b);
        return kExitConfig; // unreachable: a subcommand is required
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::runtime_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}
