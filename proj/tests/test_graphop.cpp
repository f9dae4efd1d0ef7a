#include "doctest.h"

#include "gdyn/graphop.hpp"

#include <cmath>
#include <random>

using namespace gdyn;

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double u01(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

// random trigonometric polynomial of degree <= deg with |coeffs| <= scale
std::function<double(double)> random_trig(std::mt19937_64& g, int deg, double scale) {
    std::vector<double> a(deg + 1), b(deg + 1);
    for (int j = 0; j <= deg; ++j) {
        a[j] = scale * (2.0 * u01(g) - 1.0);
        b[j] = scale * (2.0 * u01(g) - 1.0);
    }
    return [a, b, deg](double x) {
        double s = a[0];
        for (int j = 1; j <= deg; ++j)
            s += a[j] * std::cos(kTwoPi * j * x) + b[j] * std::sin(kTwoPi * j * x);
        return s;
    };
}

} // namespace

TEST_CASE("atomic shift acts as the cosine Fourier multiplier") {
    TorusGrid grid(64, kNodePeriod);
    double r = 0.3;
    Graphop A = Graphop::atomic_shift(grid, r);
    for (int j : {1, 2, 3}) {
        auto cosj = [j](double x) { return std::cos(kTwoPi * j * x); };
        auto sinj = [j](double x) { return std::sin(kTwoPi * j * x); };
        double mult = std::cos(kTwoPi * j * r);
        auto Ac = A.apply(cosj);
        auto As = A.apply(sinj);
        for (int i = 0; i < 64; ++i) {
            double x = grid.midpoint(i);
            CHECK(Ac[i] == doctest::Approx(mult * std::cos(kTwoPi * j * x)).epsilon(1e-12));
            CHECK(As[i] == doctest::Approx(mult * std::sin(kTwoPi * j * x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("quarter shift annihilates the first harmonic and flips the second") {
    TorusGrid grid(64, kNodePeriod);
    Graphop A = Graphop::atomic_shift(grid, 0.25);
    auto A1 = A.apply([](double x) { return std::cos(kTwoPi * x); });
    auto A2 = A.apply([](double x) { return std::cos(2.0 * kTwoPi * x); });
    for (int i = 0; i < 64; ++i) {
        CHECK(std::fabs(A1[i]) <= 1e-15);
        CHECK(A2[i] == doctest::Approx(-std::cos(2.0 * kTwoPi * grid.midpoint(i)))
                           .epsilon(1e-13));
    }
    CHECK(A.is_atomic());
    auto f = A.fiber(3);
    REQUIRE(f.atoms.size() == 2);
    CHECK(f.atoms[0].weight == 0.5);
    CHECK(f.total_mass == 1.0);
}

TEST_CASE("constant graphon is Markov and kills oscillation") {
    TorusGrid grid(64, kNodePeriod);
    Graphop A = Graphop::graphon(grid, [](double, double) { return 1.0; });
    auto c = A.check_c_regular(1e-12);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(A.gamma() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(A.norm_1_to_1() == doctest::Approx(1.0).epsilon(1e-12));
    auto Af = A.apply([](double x) { return std::cos(kTwoPi * x); });
    for (double v : Af) CHECK(std::fabs(v) <= 1e-13);
}

TEST_CASE("cosine kernel: exact action on the first harmonic") {
    TorusGrid grid(64, kNodePeriod);
    auto W = [](double x, double y) { return 1.0 + 0.5 * std::cos(kTwoPi * (x - y)); };
    Graphop A = Graphop::graphon(grid, W);
    auto c = A.check_c_regular(1e-12);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(1.0).epsilon(1e-13));

    // A cos(2*pi*.) = 1/4 cos(2*pi*.)  (midpoint quadrature exact here)
    auto Af = A.apply([](double y) { return std::cos(kTwoPi * y); });
    for (int i = 0; i < 64; ++i)
        CHECK(Af[i] == doctest::Approx(0.25 * std::cos(kTwoPi * grid.midpoint(i)))
                           .epsilon(1e-12));

    // with an exact kernel closure attached, off-grid evaluation is exact too
    Graphop Ak = A.with_kernel_fn(W);
    double x = 0.13;
    double got = Ak.apply_at([](double y) { return std::cos(kTwoPi * y); }, x);
    CHECK(got == doctest::Approx(0.25 * std::cos(kTwoPi * x)).epsilon(1e-12));

    auto fib = A.fiber(5);
    CHECK(fib.atoms.empty());
    REQUIRE(fib.density.size() == 64);
    CHECK(fib.total_mass == doctest::Approx(A.degree(5)).epsilon(1e-15));
}

TEST_CASE("asymmetric samples are symmetrized") {
    TorusGrid grid(32, kNodePeriod);
    // (W + W^T)/2 of x - y + 1 is identically 1
    Graphop A = Graphop::graphon(grid, [](double x, double y) { return x - y + 1.0; });
    for (double d : A.degrees()) CHECK(d == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("arc band has constant fiber mass 2*eps*h") {
    TorusGrid grid(64, kNodePeriod);
    Graphop A = Graphop::arc_band(grid, 0.2, 0.05, 5.0);
    auto c = A.check_c_regular(1e-10);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(A.norm_1_to_1() == doctest::Approx(0.5).epsilon(1e-12));
    for (double w : A.kernel_matrix()) CHECK(w >= 0.0);

    // r = 0: the two mirrored bands coincide and heights add up to h
    Graphop B = Graphop::arc_band(grid, 0.0, 0.1, 5.0);
    auto cb = B.check_c_regular(1e-10);
    REQUIRE(cb.has_value());
    CHECK(*cb == doctest::Approx(1.0).epsilon(1e-12));
    // a cell well inside the band sees the full height
    CHECK(B.kernel_matrix()[1] == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("mixtures combine degrees linearly") {
    TorusGrid grid(64, kNodePeriod);
    Graphop S = Graphop::atomic_shift(grid, 0.25);
    Graphop U = Graphop::graphon(grid, [](double, double) { return 1.0; });
    Graphop M = Graphop::mixture({{0.5, S}, {0.25, U}});
    auto c = M.check_c_regular(1e-12);
    REQUIRE(c.has_value());
    CHECK(*c == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(M.norm_1_to_1() == doctest::Approx(0.75).epsilon(1e-12));

    auto fib = M.fiber(3);
    REQUIRE(fib.atoms.size() == 2);
    CHECK(fib.atoms[0].weight == doctest::Approx(0.25).epsilon(1e-15));
    REQUIRE(fib.density.size() == 64);
    CHECK(fib.density[0] == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(fib.total_mass == doctest::Approx(0.75).epsilon(1e-13));

    CHECK_THROWS_AS(Graphop::mixture({{-0.5, S}}), std::invalid_argument);
    CHECK_THROWS_AS(Graphop::mixture({}), std::invalid_argument);
    TorusGrid other(32, kNodePeriod);
    CHECK_THROWS_AS(Graphop::mixture({{0.5, S}, {0.5, Graphop::atomic_shift(other, 0.1)}}),
                    std::invalid_argument);
}

TEST_CASE("non-regular graphon: the 1->1 norm estimate matches gamma") {
    TorusGrid grid(64, kNodePeriod);
    Graphop A = Graphop::graphon(grid, [](double x, double y) { return 4.0 * x * y; });
    CHECK_FALSE(A.check_c_regular(1e-3).has_value());
    // symmetric kernel: max column mass equals the degree supremum
    CHECK(A.norm_1_to_1() == doctest::Approx(A.gamma()).epsilon(1e-12));
    CHECK(A.gamma() == doctest::Approx(2.0 * grid.midpoint(63)).epsilon(1e-13));
}

TEST_CASE("mixing matrix: aligned quarter shift permutes cells") {
    TorusGrid grid(64, kNodePeriod);
    Graphop A = Graphop::atomic_shift(grid, 0.25);
    auto M = A.mixing_matrix(4);
    CHECK(M[0][1] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(M[0][3] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(std::fabs(M[0][0]) <= 1e-14);
    CHECK(std::fabs(M[0][2]) <= 1e-14);

    // misaligned shift splits mass across neighbouring cells
    Graphop B = Graphop::atomic_shift(grid, 0.125);
    auto Mb = B.mixing_matrix(4);
    CHECK(Mb[0][0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(Mb[0][1] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(Mb[0][3] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(std::fabs(Mb[0][2]) <= 1e-14);
    CHECK(Mb[1][0] == doctest::Approx(Mb[0][1]).epsilon(1e-14));
    for (int i = 0; i < 4; ++i) {
        double s = 0.0;
        for (int j = 0; j < 4; ++j) s += Mb[i][j];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
    }
}

TEST_CASE("mixing matrix: kernel variants, incommensurate resolution") {
    TorusGrid grid(64, kNodePeriod);
    Graphop U = Graphop::graphon(grid, [](double, double) { return 1.0; });
    auto Mu = U.mixing_matrix(4);
    for (auto& row : Mu)
        for (double v : row) CHECK(v == doctest::Approx(0.25).epsilon(1e-13));

    Graphop A = Graphop::graphon(
        grid, [](double x, double y) { return 1.0 + 0.5 * std::cos(kTwoPi * (x - y)); });
    auto M = A.mixing_matrix(5); // 5 does not divide 64
    for (int i = 0; i < 5; ++i) {
        double s = 0.0;
        for (int j = 0; j < 5; ++j) {
            s += M[i][j];
            CHECK(M[i][j] == doctest::Approx(M[j][i]).epsilon(1e-12));
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-3)); // cell-averaged degrees
    }
}

TEST_CASE("apply_grid on the shift reads containing cells") {
    TorusGrid grid(8, kNodePeriod);
    Graphop A = Graphop::atomic_shift(grid, 0.25);
    std::vector<double> f{1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    auto Af = A.apply_grid(f);
    for (int i = 0; i < 8; ++i)
        CHECK(Af[i] == doctest::Approx(0.5 * (f[(i + 2) % 8] + f[(i + 6) % 8])).epsilon(1e-15));
    CHECK_THROWS_AS(A.apply_grid({1.0, 2.0}), std::invalid_argument);
}

TEST_CASE("self-adjointness, positivity, and sup-norm contraction") {
    TorusGrid grid(64, kNodePeriod);
    std::vector<Graphop> ops;
    ops.push_back(Graphop::atomic_shift(grid, 0.3));
    ops.push_back(Graphop::graphon(
        grid, [](double x, double y) { return 1.0 + 0.5 * std::cos(kTwoPi * (x - y)); }));
    ops.push_back(Graphop::arc_band(grid, 0.2, 0.05, 5.0));
    ops.push_back(Graphop::mixture({{0.5, ops[0]}, {0.5, ops[1]}}));

    std::mt19937_64 rng(20260815);
    for (const auto& A : ops) {
        for (int trial = 0; trial < 20; ++trial) {
            auto f = random_trig(rng, 5, 0.5);
            auto g = random_trig(rng, 5, 0.5);
            auto Af = A.apply(f);
            auto Ag = A.apply(g);
            long double lhs = 0.0L, rhs = 0.0L;
            for (int i = 0; i < 64; ++i) {
                double x = grid.midpoint(i);
                lhs += Af[i] * g(x);
                rhs += f(x) * Ag[i];
            }
            CHECK(std::fabs(static_cast<double>(lhs - rhs)) / 64.0 <= 1e-8);

            // contraction in sup norm by gamma
            double supfg = 0.0, supAfg = 0.0;
            for (int i = 0; i < 4096; ++i) {
                double x = (i + 0.5) / 4096.0;
                supfg = std::max(supfg, std::fabs(f(x) - g(x)));
            }
            for (int i = 0; i < 64; ++i) supAfg = std::max(supAfg, std::fabs(Af[i] - Ag[i]));
            CHECK(supAfg <= A.gamma() * supfg + 1e-10);
        }
        // positivity on a manifestly nonnegative function
        auto Ap = A.apply([](double x) { return 1.0 + std::cos(kTwoPi * x); });
        for (double v : Ap) CHECK(v >= -1e-12);
    }
}

TEST_CASE("graphon construction rejects bad input") {
    TorusGrid grid(8, kNodePeriod);
    CHECK_THROWS_AS(Graphop::graphon_matrix(grid, std::vector<double>(10, 1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(Graphop::graphon(grid, [](double, double) { return -1.0; }),
                    std::invalid_argument);
    CHECK_THROWS_AS(Graphop::arc_band(grid, 0.1, 0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Graphop::arc_band(grid, 0.1, 0.6, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Graphop::arc_band(grid, 0.1, 0.05, -1.0), std::invalid_argument);
}
