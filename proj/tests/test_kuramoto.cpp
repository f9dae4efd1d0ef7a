#include "gdyn/kuramoto.hpp"

#include "gdyn/metrics.hpp"
#include "gdyn/torus.hpp"
#include "support/reference_ode.hpp"

#include <cmath>
#include <doctest.h>
#include <random>
#include <vector>

using namespace gdyn;

namespace {

constexpr double TWO_PI = 6.283185307179586476925286766559;

double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

double uniform_rho(double, double) { return 1.0 / TWO_PI; }

} // namespace

TEST_CASE("coupling spec: shipped laws satisfy the Kuramoto normalization") {
    auto sine = CouplingSpec::sine(2.5);
    CHECK(sine.strength() == 2.5);
    CHECK(sine(TWO_PI / 4.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sine.sup_abs() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(sine.lipschitz() == doctest::Approx(1.0).epsilon(1e-8));

    auto pair = CouplingSpec::sine_pair(1.0, 1.0);
    CHECK(pair.sup_abs() <= 1.0 + 1e-9);
    CHECK(pair.lipschitz() <= 1.0 + 1e-9);
    // normalization is tight: one of the two bounds is active
    CHECK(std::max(pair.sup_abs(), pair.lipschitz()) == doctest::Approx(1.0).epsilon(1e-6));

    std::mt19937_64 gen(404);
    for (int t = 0; t < 200; ++t) {
        const double u = TWO_PI * u01(gen), v = TWO_PI * u01(gen);
        for (const auto* cpl : {&sine, &pair})
            CHECK(std::fabs((*cpl)(u) - (*cpl)(v)) <=
                  circle_dist(u, v, TWO_PI) * (1.0 + 1e-9) + 1e-12);
    }

    CHECK_THROWS_AS(CouplingSpec::sine(0.0), std::invalid_argument);
    CHECK_THROWS_AS(CouplingSpec::sine(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(CouplingSpec::sine_pair(1.0, 1.5), std::invalid_argument);
    // raw second harmonic slope 1+beta violates Lip(D) <= 1
    CHECK_THROWS_AS(CouplingSpec::harmonics(1.0, {1.0, 0.5}, {}), std::invalid_argument);
    CHECK_THROWS_AS(CouplingSpec::harmonics(1.0, {2.0}, {}), std::invalid_argument);
}

TEST_CASE("sample_weights: exact block integrals of pw-constant kernels") {
    TorusGrid g64(64, 1.0);
    auto ones = Graphop::graphon(g64, [](double, double) { return 1.0; });
    auto A = sample_weights(ones, 8);
    REQUIRE(A.size() == 64);
    for (double v : A) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));

    // W = 4 on [0,1/2)^2, zero elsewhere
    auto blocky = [](double x, double y) { return (x < 0.5 && y < 0.5) ? 4.0 : 0.0; };
    for (int G : {2, 64}) {
        auto W = Graphop::graphon(TorusGrid(G, 1.0), blocky);
        auto B = sample_weights(W, 2);
        CHECK(B[0] == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(std::fabs(B[1]) <= 1e-14);
        CHECK(std::fabs(B[2]) <= 1e-14);
        CHECK(std::fabs(B[3]) <= 1e-14);
    }

    // exact symmetry for a random symmetric kernel, both sampling paths
    std::mt19937_64 gen(2025);
    const int G = 48;
    std::vector<double> M(static_cast<std::size_t>(G) * G);
    for (int i = 0; i < G; ++i)
        for (int j = 0; j <= i; ++j)
            M[i * G + j] = M[j * G + i] = u01(gen);
    auto W = Graphop::graphon_matrix(TorusGrid(G, 1.0), M);
    for (int N : {12, 7}) {
        auto S = sample_weights(W, N);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                CHECK(S[i * N + j] == S[j * N + i]);
    }

    CHECK_THROWS_AS(sample_weights(Graphop::atomic_shift(g64, 0.25), 8),
                    std::invalid_argument);
}

TEST_CASE("sample_initial: laws, determinism, rejection") {
    // uniform law: CLT band for the first circular moment at N = 10^4
    auto phases = sample_initial(uniform_rho, 4, 2500, 20260815);
    REQUIRE(phases.size() == 10000);
    long double mc = 0.0L, ms = 0.0L;
    for (double u : phases) {
        mc += std::cos(u);
        ms += std::sin(u);
    }
    CHECK(std::fabs(static_cast<double>(mc) / 10000.0) <= 3.0 / std::sqrt(2.0e4));
    CHECK(std::fabs(static_cast<double>(ms) / 10000.0) <= 3.0 / std::sqrt(2.0e4));

    // narrow von Mises bump at pi: support containment
    const double I0 = std::cyl_bessel_i(0.0, 50.0);
    auto bump = [I0](double u, double) {
        return std::exp(50.0 * std::cos(u - TWO_PI / 2.0)) / (TWO_PI * I0);
    };
    auto spiky = sample_initial(bump, 2, 500, 77);
    for (double u : spiky) CHECK(circle_dist(u, TWO_PI / 2.0, TWO_PI) < 1.0);

    auto again = sample_initial(uniform_rho, 4, 2500, 20260815);
    CHECK(again == phases); // byte-identical for equal seeds
    auto other = sample_initial(uniform_rho, 4, 2500, 20260816);
    CHECK(other != phases);

    auto halfmass = [](double, double) { return 0.5 / TWO_PI; };
    CHECK_THROWS_WITH_AS(sample_initial(halfmass, 2, 10, 1),
                         doctest::Contains("mass defect"), std::invalid_argument);
    auto negative = [](double u, double) { return std::cos(u) / TWO_PI; };
    CHECK_THROWS_AS(sample_initial(negative, 2, 10, 1), std::invalid_argument);
}

TEST_CASE("quantile atoms of a uniform density sit at equispaced quantiles") {
    std::vector<double> flat(8, 1.0 / TWO_PI);
    auto atoms = quantile_atoms(flat, 4);
    REQUIRE(atoms.size() == 4);
    for (int q = 0; q < 4; ++q)
        CHECK(atoms[q] == doctest::Approx((q + 0.5) / 4.0 * TWO_PI).epsilon(1e-12));

    CHECK_THROWS_AS(quantile_atoms(std::vector<double>(4, 0.0), 2), std::invalid_argument);
    CHECK_THROWS_AS(quantile_atoms(flat, 0), std::invalid_argument);
}

TEST_CASE("integrate: two-oscillator closed form and basic symmetries") {
    auto st = make_oscillator_state({0.0, TWO_PI / 4.0}, {1.0, 1.0, 1.0, 1.0});
    auto cpl = CouplingSpec::sine(1.0);

    auto traj = integrate(st, cpl, 1.0, 1e-3);
    const auto& uT = traj.phases.back();
    const double phi = wrap(uT[1] - uT[0], TWO_PI);
    // phase difference obeys phi' = -sin phi, phi(0) = pi/2
    const double expect = 2.0 * std::atan(std::exp(-1.0));
    CHECK(phi == doctest::Approx(expect).epsilon(1e-6));
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(1.0).epsilon(1e-12));

    // CouplingSpec::sine rejects zero strength; emulate the decoupled
    // system with zero weights instead
    auto frozen = integrate(make_oscillator_state({0.3, 2.2}, {0.0, 0.0, 0.0, 0.0}),
                            cpl, 0.5, 1e-2);
    CHECK(frozen.phases.back()[0] == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(frozen.phases.back()[1] == doctest::Approx(2.2).epsilon(1e-15));

    // translation equivariance
    std::mt19937_64 gen(5150);
    std::vector<double> u0(3), w(9);
    for (auto& v : u0) v = TWO_PI * u01(gen);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j)
            w[i * 3 + j] = w[j * 3 + i] = 2.0 * u01(gen);
    const double c = 1.234;
    auto base = integrate(make_oscillator_state(u0, w), cpl, 1.0, 1e-2);
    auto shifted_u0 = u0;
    for (auto& v : shifted_u0) v += c;
    auto shifted = integrate(make_oscillator_state(shifted_u0, w), cpl, 1.0, 1e-2);
    for (std::size_t s = 0; s < base.times.size(); ++s)
        for (int i = 0; i < 3; ++i)
            CHECK(circle_dist(base.phases[s][i] + c, shifted.phases[s][i], TWO_PI) <= 1e-12);

    CHECK_THROWS_AS(integrate(st, cpl, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(integrate(st, cpl, 1.0, 3e-4), std::invalid_argument); // T/dt not integral
    CHECK_THROWS_AS(integrate(st, cpl.with_frequencies({1.0, 2.0, 3.0}), 1.0, 1e-2),
                    std::invalid_argument);
}

TEST_CASE("integrate: fourth-order convergence on the closed-form instance") {
    auto st = make_oscillator_state({0.0, TWO_PI / 4.0}, {1.0, 1.0, 1.0, 1.0});
    auto cpl = CouplingSpec::sine(1.0);
    const double expect = 2.0 * std::atan(std::exp(-1.0));

    std::vector<double> errs;
    for (double dt : {0.02, 0.01, 0.005}) {
        auto traj = integrate(st, cpl, 1.0, dt);
        const auto& uT = traj.phases.back();
        errs.push_back(std::fabs(wrap(uT[1] - uT[0], TWO_PI) - expect));
    }
    for (std::size_t i = 1; i < errs.size(); ++i) {
        const double order = std::log2(errs[i - 1] / errs[i]);
        CHECK(order > 3.5);
        CHECK(order < 4.5);
    }
}

TEST_CASE("integrate agrees with an adaptive reference on a random system") {
    const int N = 5;
    std::mt19937_64 gen(909);
    std::vector<double> u0(N), w(N * N), om(N);
    for (auto& v : u0) v = TWO_PI * u01(gen);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j <= i; ++j)
            w[i * N + j] = w[j * N + i] = 2.0 * u01(gen);
    for (auto& v : om) v = u01(gen) - 0.5;

    auto cpl = CouplingSpec::sine_pair(1.3, 0.7).with_frequencies(om);
    auto st = make_oscillator_state(u0, w);
    auto traj = integrate(st, cpl, 1.0, 1e-3);

    // independent right-hand side: direct pairwise loop through D itself
    auto rhs = [&](const std::vector<double>& u, std::vector<double>& du) {
        for (int i = 0; i < N; ++i) {
            double acc = 0.0;
            for (int j = 0; j < N; ++j) acc += w[i * N + j] * cpl(u[j] - u[i]);
            du[i] = om[i] + cpl.strength() / N * acc;
        }
    };
    auto ref = testsupport::rk45_integrate(rhs, st.phases, 0.0, 1.0, 1e-11, 1e-13);
    for (int i = 0; i < N; ++i)
        CHECK(circle_dist(traj.phases.back()[i], wrap(ref[i], TWO_PI), TWO_PI) <= 1e-8);
}

TEST_CASE("empirical_family: block structure and mass") {
    std::vector<double> phases{0.1, 0.2, 0.3, 4.0, 4.1, 4.2};
    auto fam = empirical_family(phases, 2, 3);
    CHECK(fam.grid().resolution() == 2);
    for (int i = 0; i < 2; ++i)
        CHECK(fam.fibers()[i].total_mass() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(fam.fibers()[1].particles()[0].position == doctest::Approx(4.0));

    auto diracs = empirical_family({1.0, 2.0}, 2, 1);
    CHECK(diracs.fibers()[0].size() == 1);
    CHECK(diracs.fibers()[0].particles()[0].weight == 1.0);

    CHECK_THROWS_AS(empirical_family(phases, 4, 2), std::invalid_argument);
}

TEST_CASE("empirical families approach the sampled law as M grows") {
    auto proxy = density_family(uniform_rho, 2, 256);
    std::vector<double> mean_gap;
    for (int M : {10, 100, 1000}) {
        double acc = 0.0;
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            auto fam = empirical_family(sample_initial(uniform_rho, 2, M, seed), 2, M);
            acc += d_bm(fam, proxy);
        }
        mean_gap.push_back(acc / 5.0);
    }
    CHECK(mean_gap[1] < mean_gap[0]);
    CHECK(mean_gap[2] < mean_gap[1]);
}
