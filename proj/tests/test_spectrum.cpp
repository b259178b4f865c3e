#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "grushin/asymptotics.hpp"
#include "grushin/spectrum.hpp"

using namespace grushin::spectrum;

namespace {

// Number of Dirichlet eigenvalues of -u'' + n^2 x^2 u below E: zeros in (-1,1)
// of the solution with u(-1) = 0, u'(-1) = 1 (Sturm oscillation).
int shooting_count(double n, double E) {
    const int steps = 200000;
    const double h = 2.0 / steps;
    double u = 0.0, p = 1.0;
    auto acc = [&](double x, double v) { return (n * n * x * x - E) * v; };
    int zeros = 0;
    for (int k = 0; k < steps - 1; ++k) {
        const double x = -1.0 + k * h, xm = x + 0.5 * h, x1 = x + h;
        const double k1u = p, k1p = acc(x, u);
        const double k2u = p + 0.5 * h * k1p, k2p = acc(xm, u + 0.5 * h * k1u);
        const double k3u = p + 0.5 * h * k2p, k3p = acc(xm, u + 0.5 * h * k2u);
        const double k4u = p + h * k3p, k4p = acc(x1, u + h * k3u);
        const double next = u + h / 6.0 * (k1u + 2 * k2u + 2 * k3u + k4u);
        p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
        if (k > 0 && (next > 0.0) != (u > 0.0)) ++zeros;
        u = next;
    }
    return zeros;
}

SpectrumOptions small_options(int M = 1000) {
    SpectrumOptions o;
    o.grids = {M, 2 * M};
    return o;
}

}  // namespace

TEST_CASE("grid nodes and spacing") {
    DirichletGrid g(3);
    CHECK(g.spacing() == doctest::Approx(0.5));
    CHECK(g.node(0) == doctest::Approx(-0.5));
    CHECK(g.node(2) == doctest::Approx(0.5));
    DirichletGrid big(4000);
    CHECK(big.spacing() * 4001 == doctest::Approx(2.0).epsilon(1e-15));
    for (double x : big.nodes()) {
        CHECK(x > -1.0);
        CHECK(x < 1.0);
    }
}

TEST_CASE("raw entries on the M=3 grid") {
    auto op = tridiagonal_entries(0, DirichletGrid(3));
    CHECK(op.diag == std::vector<double>{8, 8, 8});
    CHECK(op.offdiag == std::vector<double>{-4, -4});
}

TEST_CASE("assembly rejects coarse grids") {
    CHECK_THROWS_AS(assemble_operator(1, DirichletGrid(15)), ResolutionError);
    CHECK_NOTHROW(assemble_operator(1, DirichletGrid(16)));
}

TEST_CASE("potential vanishes at the origin") {
    DirichletGrid g(101);
    auto op = assemble_operator(2, g);
    CHECK(g.node(50) == doctest::Approx(0.0));
    CHECK(op.diag[50] == doctest::Approx(2.0 / (g.spacing() * g.spacing())));
}

TEST_CASE("n=1 lowest eigenvalue is above the whole-line value") {
    auto pairs = eigen_lowest(assemble_operator(1, DirichletGrid(4000)), 1);
    CHECK(pairs[0].lambda_sq >= 1.0);
}

TEST_CASE("n=0 reproduces the Dirichlet Laplacian to second order") {
    DirichletGrid g(2000);
    const double dx = g.spacing();
    auto pairs = eigen_lowest(assemble_operator(0, g), 8);
    for (int k = 1; k <= 8; ++k) {
        const double exact = std::pow(k * std::numbers::pi / 2.0, 2);
        CHECK(std::abs(pairs[k - 1].lambda_sq - exact) <= exact * exact * dx * dx / 12.0 * 1.01);
    }
}

TEST_CASE("count above M/4 is rejected") {
    auto op = assemble_operator(3, DirichletGrid(40));
    CHECK_NOTHROW(eigen_lowest(op, 10));
    CHECK_THROWS_AS(eigen_lowest(op, 11), std::invalid_argument);
}

TEST_CASE("n=10 ground state against the shooting oracle") {
    SpectrumOptions o;
    o.grids = {1000, 2000, 4000};
    auto e = ground_state(10, o);
    CHECK(e.pair.lambda_sq >= 10.0);
    const double shoot = 10.0 * grushin::asym::mu_of_w(10.0);
    CHECK(std::abs(e.pair.lambda_sq - shoot) <= 5e-6 * shoot);
    CHECK(e.pair.lambda_sq == doctest::Approx(10.003056039514422).epsilon(1e-9));
}

TEST_CASE("whole-line levels") {
    CHECK(whole_line_levels(3, 3) == std::vector<double>{3, 9, 15});
    CHECK(whole_line_levels(-3, 3) == whole_line_levels(3, 3));
    CHECK(whole_line_levels(1, 5) == std::vector<double>{1, 3, 5, 7, 9});
    CHECK_THROWS_AS(whole_line_levels(0, 2), std::invalid_argument);
}

TEST_CASE("eigenvectors are orthonormal and signed") {
    DirichletGrid g(801);
    for (int n : {0, 4, 17}) {
        auto pairs = eigen_lowest(assemble_operator(n, g), 6);
        for (std::size_t a = 0; a < pairs.size(); ++a) {
            for (std::size_t b = 0; b < pairs.size(); ++b) {
                double s = 0.0;
                for (int i = 0; i < g.interior_count(); ++i) s += pairs[a].vector[i] * pairs[b].vector[i];
                s *= g.spacing();
                CHECK(std::abs(s - (a == b ? 1.0 : 0.0)) <= 1e-10);
            }
            if (a > 0) CHECK(pairs[a].lambda_sq > pairs[a - 1].lambda_sq);
        }
        CHECK(pairs[0].vector[400] > 0.0);
        for (double v : pairs[0].vector) CHECK(v > 0.0);
    }
}

TEST_CASE("eigenvalues converge at second order") {
    const int n = 6;
    double lam[3];
    int idx = 0;
    for (int M : {500, 1001, 2003}) lam[idx++] = eigen_lowest(assemble_operator(n, DirichletGrid(M)), 1)[0].lambda_sq;
    const double ratio = (lam[0] - lam[1]) / (lam[1] - lam[2]);
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
}

TEST_CASE("richardson removes an exact quadratic error") {
    std::vector<double> dx{0.1, 0.05};
    std::vector<double> v{3.0 + 2.0 * 0.01, 3.0 + 2.0 * 0.0025};
    auto r = richardson(v, dx);
    CHECK(r.value == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("sturm count brackets eigenvalues") {
    auto op = assemble_operator(5, DirichletGrid(300));
    auto pairs = eigen_lowest(op, 4);
    for (int m = 0; m < 4; ++m) {
        CHECK(sturm_count(op, pairs[m].lambda_sq * (1 - 1e-9)) == m);
        CHECK(sturm_count(op, pairs[m].lambda_sq * (1 + 1e-9)) == m + 1);
    }
}

TEST_CASE("comparison principle on a small table") {
    std::vector<int> modes{0, 1, 2, 3, 4, 5, 6, 7, 8};
    auto table = build_table_by_count(modes, 5, small_options());
    CHECK(verify_comparison(table).empty());
    for (const auto& [key, e] : table.entries()) CHECK(std::abs(key.first) <= e.pair.lambda_sq + e.richardson_err);

    table.set_lambda_sq(5, 0, 4.9);
    auto v = verify_comparison(table);
    REQUIRE(v.size() == 1);
    CHECK(v[0].n == 5);
    CHECK(v[0].m == 0);
}

TEST_CASE("n=0 entries are never reported") {
    std::vector<int> modes{0};
    auto table = build_table_by_count(modes, 3, small_options(200));
    table.set_lambda_sq(0, 0, -100.0);
    CHECK(verify_comparison(table).empty());
}

TEST_CASE("weyl counts") {
    std::vector<int> modes{1, 8};
    auto table = build_table_below(modes, 100.0, small_options());
    CHECK(weyl_count(table, 8, 64.0) <= 4);
    CHECK(weyl_count(table, 8, 1.0) == 0);
    CHECK(weyl_count(table, 1, 100.0) == shooting_count(1.0, 100.0));
    CHECK_THROWS_AS(weyl_count(table, 1, 200.0), std::domain_error);

    auto counted = build_table_by_count(modes, 2, small_options());
    CHECK_THROWS_AS(weyl_count(counted, 1, 100.0), std::domain_error);
}

TEST_CASE("weyl count near the whole-line level count") {
    // (2m+1) n <= tau^2 admits floor((tau^2/n + 1)/2) levels, which exceeds
    // tau^2/(2n) whenever the fractional part of tau^2/(2n) is >= 1/2
    std::vector<int> modes{64};
    auto table = build_table_below(modes, 2000.0, small_options(2000));
    CHECK(shooting_count(64.0, 2000.0) == 16);
    CHECK(weyl_count(table, 64, 2000.0) == 16);
    CHECK(weyl_count(table, 64, 2000.0) <= 2000.0 / 128.0 + 0.5);
}

TEST_CASE("random modes satisfy the comparison bound") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> pick(1, 80);
    std::vector<int> modes;
    for (int i = 0; i < 6; ++i) modes.push_back(pick(rng));
    std::sort(modes.begin(), modes.end());
    modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
    auto table = build_table_by_count(modes, 4, small_options(1200));
    CHECK(verify_comparison(table).empty());
}

TEST_CASE("table csv layout") {
    std::vector<int> modes{2, 1};
    auto table = build_table_by_count(modes, 2, small_options(100));
    auto text = table.to_csv();
    CHECK(text.rfind("n,m,lambda_sq,richardson_err,grid_M\n1,0,", 0) == 0);
    CHECK(text.find("\n2,1,") != std::string::npos);
}

TEST_CASE("parallel build matches serial build") {
    std::vector<int> modes{1, 2, 3, 4, 5, 6};
    auto serial = build_table_by_count(modes, 3, small_options(400));
    auto o = small_options(400);
    o.threads = 4;
    auto parallel = build_table_by_count(modes, 3, o);
    CHECK(serial.to_csv() == parallel.to_csv());
}
