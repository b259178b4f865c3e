#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "grushin/field.hpp"

using namespace grushin;
using namespace grushin::field;

namespace {

const BasisPtr& small_basis() {
    static const BasisPtr b = build_basis(6, 60.0, DirichletGrid(600));
    return b;
}

double max_coeff_diff(const ModalField& a, const ModalField& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.coefficients().size(); ++i) {
        d = std::max(d, std::abs(a.coefficients()[i] - b.coefficients()[i]));
    }
    return d;
}

}  // namespace

TEST_CASE("basis preconditions") {
    CHECK_THROWS_AS(build_basis(0, 10.0, DirichletGrid(100)), std::invalid_argument);
    CHECK_THROWS_AS(build_basis(2, 2.0, DirichletGrid(100)), std::invalid_argument);
}

TEST_CASE("N=1, Lambda=3 basis membership") {
    auto b = build_basis(1, 3.0, DirichletGrid(1000));
    auto s = b->find(0, 0);
    REQUIRE(s);
    CHECK(b->lambda_sq(*s) == doctest::Approx(std::numbers::pi * std::numbers::pi / 4.0).epsilon(1e-8));
    CHECK_FALSE(b->find(0, 1));
    // lambda^2_{0,1} is about 1.07, inside the cap
    CHECK(b->find(1, 0));
    CHECK(b->find(-1, 0));
    CHECK(b->lambda_sq(b->slot(1, 0)) <= 3.0);
}

TEST_CASE("basis members satisfy |n| <= lambda^2 and weyl counts") {
    auto b = build_basis(64, 300.0, DirichletGrid(800));
    for (std::size_t s = 0; s < b->size(); ++s) {
        CHECK(std::abs(b->mode_of(s)) <= b->lambda_sq(s) + b->grid_error(s));
    }
    for (int n = 1; n <= 64; ++n) CHECK(b->slots_of_mode(n).size() <= 300.0 / (2.0 * n));
}

TEST_CASE("evolve is a phase rotation") {
    std::mt19937_64 rng(5);
    auto u = random_field(small_basis(), rng);
    CHECK(max_coeff_diff(evolve(u, 0.0), u) == 0.0);
    auto a = evolve(evolve(u, 0.7), 1.9);
    auto b = evolve(u, 2.6);
    CHECK(max_coeff_diff(a, b) <= 1e-12 * std::sqrt(mass(u)));
    for (std::size_t i = 0; i < u.coefficients().size(); ++i) {
        CHECK(std::abs(evolve(u, 3.0).coefficients()[i]) == doctest::Approx(std::abs(u.coefficients()[i])));
    }
}

TEST_CASE("ground mode phase after unit time") {
    ModalField u(small_basis());
    u.set(0, 0, 1.0);
    auto v = evolve(u, 1.0);
    const double lam = small_basis()->lambda_sq(small_basis()->slot(0, 0));
    CHECK(std::arg(v.at(0, 0)) == doctest::Approx(std::remainder(-lam, 2 * std::numbers::pi)));
    CHECK(lam == doctest::Approx(std::numbers::pi * std::numbers::pi / 4.0).epsilon(1e-7));
}

TEST_CASE("synthesize of a unit coefficient") {
    ModalField u(small_basis());
    u.set(0, 0, 1.0);
    auto g = synthesize(u);
    auto k0 = g.mode_index(0);
    REQUIRE(k0);
    auto phi = small_basis()->vector(small_basis()->slot(0, 0));
    for (std::size_t k = 0; k < g.modes().size(); ++k) {
        auto vals = g.mode_values(k);
        for (int i = 0; i < g.interior(); ++i) {
            const cplx expect = k == *k0 ? cplx(phi[i]) : cplx(0.0);
            CHECK(std::abs(vals[i] - expect) <= 1e-15);
        }
    }
}

TEST_CASE("analyze inverts synthesize") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 5; ++trial) {
        auto u = random_field(small_basis(), rng);
        CHECK(max_coeff_diff(analyze(synthesize(u)), u) <= 1e-10);
        CHECK(max_coeff_diff(analyze(synthesize(u), small_basis()), u) <= 1e-10);
    }
}

TEST_CASE("profiles orthogonal to the basis analyze to zero") {
    // highest grid mode of the n=0 block: orthogonal to the retained low levels
    const auto& b = small_basis();
    const auto& grid = b->grid();
    GridField g(grid, b->modes(), b);
    auto k0 = *g.mode_index(0);
    auto vals = g.mode_values(k0);
    const int M = grid.interior_count();
    for (int i = 0; i < M; ++i) vals[i] = std::sin(M * std::numbers::pi * (i + 1) / (M + 1.0));
    auto u = analyze(g);
    for (std::size_t s : b->slots_of_mode(0)) CHECK(std::abs(u.coefficients()[s]) <= 1e-6);
}

TEST_CASE("analyze rejects mismatched bases and unknown modes") {
    auto other = build_basis(2, 20.0, DirichletGrid(600));
    std::mt19937_64 rng(1);
    auto g = synthesize(random_field(small_basis(), rng));
    CHECK_THROWS_AS(analyze(g, other), std::invalid_argument);
    auto coarse = build_basis(2, 20.0, DirichletGrid(300));
    GridField h(DirichletGrid(600), {0});
    CHECK_THROWS_AS(analyze(h, coarse), std::invalid_argument);
    GridField stray(DirichletGrid(600), {40});
    stray.mode_values(0)[3] = 1.0;
    CHECK_THROWS_AS(analyze(stray, small_basis()), std::invalid_argument);
    GridField bare(DirichletGrid(600), {0});
    CHECK_THROWS_AS(analyze(bare), std::invalid_argument);
}

TEST_CASE("set outside the basis throws") {
    ModalField u(small_basis());
    CHECK_THROWS_AS(u.set(99, 0, 1.0), std::out_of_range);
}

TEST_CASE("unit coefficient mass and energy") {
    const auto& b = small_basis();
    for (auto [n, m] : {std::pair{0, 0}, std::pair{3, 1}, std::pair{-5, 0}}) {
        ModalField u(b);
        u.set(n, m, 1.0);
        CHECK(mass(u) == doctest::Approx(2 * std::numbers::pi));
        CHECK(energy_grushin(u) == doctest::Approx(2 * std::numbers::pi * b->lambda_sq(b->slot(n, m))));
    }
}

TEST_CASE("finite-difference energy matches modal energy") {
    auto b = build_basis(4, 40.0, DirichletGrid(1000));
    std::mt19937_64 rng(3);
    auto u = random_field(b, rng);
    auto g = synthesize(u);
    const double dx = g.grid().spacing();
    double e = 0.0;
    for (std::size_t k = 0; k < g.modes().size(); ++k) {
        const double n = g.modes()[k];
        auto v = g.mode_values(k);
        const int M = g.interior();
        for (int i = 0; i <= M; ++i) {
            const cplx left = i == 0 ? cplx{} : v[i - 1];
            const cplx right = i == M ? cplx{} : v[i];
            e += std::norm((right - left) / dx) * dx;
        }
        for (int i = 0; i < M; ++i) e += std::norm(g.grid().node(i) * n * v[i]) * dx;
    }
    e *= 2 * std::numbers::pi;
    CHECK(std::abs(e - energy_grushin(u)) / energy_grushin(u) <= 40.0 * dx * dx);
}

TEST_CASE("conservation under evolve") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        auto u = random_field(small_basis(), rng);
        for (double t : {0.1, 1.0, 10.0, 100.0}) {
            auto v = evolve(u, t);
            CHECK(std::abs(mass(v) - mass(u)) <= 1e-12 * mass(u));
            CHECK(std::abs(energy_grushin(v) - energy_grushin(u)) <= 1e-12 * energy_grushin(u));
        }
    }
}

TEST_CASE("parseval between modal and grid mass") {
    std::mt19937_64 rng(21);
    auto u = random_field(small_basis(), rng);
    CHECK(std::abs(grid_mass(synthesize(u)) - mass(u)) <= 1e-10 * mass(u));
}

TEST_CASE("coercivity gap") {
    const auto& b = small_basis();
    CHECK(coercivity_gap(ModalField(b)) == 0.0);
    for (std::size_t s = 0; s < b->size(); ++s) {
        ModalField u(b);
        u.coefficients()[s] = 1.0;
        CHECK(coercivity_gap(u) >= -b->grid_error(s) * 2 * std::numbers::pi);
    }
    std::mt19937_64 rng(8);
    for (int i = 0; i < 50; ++i) CHECK(coercivity_gap(random_field(b, rng)) >= -1e-8);
}

TEST_CASE("csv layouts") {
    auto b = build_basis(1, 3.0, DirichletGrid(100));
    ModalField u(b);
    u.set(0, 0, cplx(0.5, -0.25));
    auto text = u.to_csv();
    CHECK(text.rfind("n,m,re,im\n", 0) == 0);
    CHECK(text.find("0,0,0.5,-0.25\n") != std::string::npos);
    auto g = synthesize(u);
    CHECK(g.to_csv().rfind("n,x_index,re,im\n-1,1,", 0) == 0);
}
