#include <doctest.h>

#include <cmath>
#include <numbers>

#include "grushin/beam.hpp"

using namespace grushin;
using namespace grushin::beam;
using spectrum::DirichletGrid;

namespace {

constexpr double kPi = std::numbers::pi;

struct Family {
    double h;
    DirichletGrid grid;
    std::vector<GroundStateRecord> band;
    field::BasisPtr basis;
    field::ModalField u;

    explicit Family(double h_)
        : h(h_),
          grid(required_interior(h_)),
          band(build_ground_band(h_, grid)),
          basis(band_basis(band, grid)),
          u(build_beam(BeamParams(h_), band, basis)) {}
};

const Family& family32() {
    static const Family f(1.0 / 32.0);
    return f;
}

}  // namespace

TEST_CASE("bump values") {
    CHECK(bump_chi(1.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(bump_chi(0.5) == 0.0);
    CHECK(bump_chi(2.0) == 0.0);
    CHECK(bump_chi(0.3) == 0.0);
    CHECK(bump_chi(0.51) > 0.0);
    CHECK(bump_chi(0.51) == doctest::Approx(std::exp(1.0 - 0.5625 / (0.01 * 1.49))));
    CHECK(bump_chi(1.0) < 1.0);
    CHECK(bump_chi(1.0) == doctest::Approx(std::exp(1.0 - 0.5625 / 0.5)));
}

TEST_CASE("gaussian weight") {
    CHECK(gaussian_weight(0.25, 0.0) == doctest::Approx(0.5 / std::sqrt(2 * kPi)));
    CHECK(gaussian_weight(0.125, 8.0) == doctest::Approx(std::sqrt(0.125 / (2 * kPi)) * std::exp(-0.5)));
    CHECK_THROWS_AS(gaussian_weight(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(gaussian_weight(1.0, 1.0), std::invalid_argument);
    // sum over all integers of g_h(w)^2 is 1 / (2 sqrt(pi)) up to exp(-pi^2 / h^2)
    for (double h : {0.25, 0.125, 0.03125}) {
        double s = 0.0;
        for (int w = -4000; w <= 4000; ++w) s += std::pow(gaussian_weight(h, w), 2);
        CHECK(s == doctest::Approx(0.5 / std::sqrt(kPi)).epsilon(1e-12));
    }
}

TEST_CASE("band frequencies") {
    auto ks = band_frequencies(0.125);
    REQUIRE(ks.size() == 11);
    CHECK(ks.front() == 5);
    CHECK(ks.back() == 15);
    CHECK(band_frequencies(1.0 / 64).front() == 33);
    CHECK(band_frequencies(1.0 / 64).back() == 127);
}

TEST_CASE("coarse grids are rejected with the required size") {
    const int need = required_interior(0.125);
    CHECK(need == 159);
    try {
        build_ground_band(0.125, DirichletGrid(need - 1));
        FAIL("expected ResolutionError");
    } catch (const spectrum::ResolutionError& e) {
        CHECK(e.required_interior() == need);
        CHECK(std::string(e.what()).find("M >= 159") != std::string::npos);
    }
    CHECK_THROWS_AS(BeamParams(0.3), std::invalid_argument);
}

TEST_CASE("band ground states") {
    const Family f(0.125);
    REQUIRE(f.band.size() == 11);
    for (const auto& r : f.band) {
        CHECK(r.lambda >= r.k);
        CHECK(r.nu == doctest::Approx(r.lambda / r.k - 1.0));
        CHECK(r.mass_outside_half >= 0.0);
        for (double p : r.profile) CHECK(p > 0.0);
    }
    for (const auto& r : family32().band) {
        if (r.k >= 20) CHECK(r.lambda - r.k <= 1e-3);
        // Gaussian ground state e^{-k x^2 / 2}
        if (r.k >= 20) CHECK(r.mass_outside_half == doctest::Approx(std::erfc(0.5 * std::sqrt(r.k))).epsilon(0.05));
    }
}

TEST_CASE("beam mass and support") {
    const auto& f = family32();
    double expect = 0.0;
    for (const auto& r : f.band) expect += std::pow(gaussian_weight(f.h, r.k) * bump_chi(f.h * r.k), 2);
    expect *= 2 * kPi;
    CHECK(field::mass(f.u) == doctest::Approx(expect).epsilon(1e-13));
    for (std::size_t s = 0; s < f.basis->size(); ++s) {
        const int k = f.basis->mode_of(s);
        CHECK(k > 0.5 / f.h);
        CHECK(k < 2.0 / f.h);
        CHECK(f.basis->level_of(s) == 0);
    }
}

TEST_CASE("beam centroid travels at unit speed") {
    const auto& f = family32();
    CHECK(std::abs(beam_center(f.u, 0.0)) <= 1e-12);
    CHECK(beam_center(f.u, 0.5) == doctest::Approx(0.5).epsilon(0.1));
    CHECK(std::abs(beam_center(f.u, 0.5) - 0.5) <= 0.05);
    CHECK(std::abs(beam_center(f.u, 0.3) - beam_center(f.u, 0.3 + 2 * kPi)) <= 1e-6);
}

TEST_CASE("band csv") {
    const Family f(0.125);
    auto text = band_csv(f.band);
    CHECK(text.rfind("k,lambda,nu,mass_outside_half\n5,", 0) == 0);
}
