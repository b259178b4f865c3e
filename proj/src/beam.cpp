#include "grushin/beam.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "grushin/csv.hpp"
#include "grushin/parallel.hpp"

namespace grushin::beam {

double bump_chi(double s) {
    if (!(s > 0.5 && s < 2.0)) return 0.0;
    return std::exp(1.0 - (9.0 / 16.0) / ((s - 0.5) * (2.0 - s)));
}

double gaussian_weight(double h, double w) {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("gaussian_weight: h must lie in (0, 1)");
    return std::sqrt(h) / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * h * h * w * w);
}

BeamParams::BeamParams(double h_) : h(h_) {
    if (!(h > 0.0 && h <= 0.25)) throw std::invalid_argument("BeamParams: h must lie in (0, 1/4]");
}

std::vector<int> band_frequencies(double h) {
    std::vector<int> ks;
    const double lo = 0.5 / h, hi = 2.0 / h;
    for (int k = static_cast<int>(std::floor(lo)) + 1; k < hi; ++k) {
        if (k > lo) ks.push_back(k);
    }
    return ks;
}

int required_interior(double h) {
    return static_cast<int>(std::ceil(20.0 / std::sqrt(h / 8.0))) - 1;
}

std::vector<GroundStateRecord> build_ground_band(double h, const spectrum::DirichletGrid& grid, double tol,
                                                 int threads) {
    BeamParams params(h);
    const int need = required_interior(params.h);
    if (grid.interior_count() < need) {
        throw spectrum::ResolutionError("build_ground_band: h = " + std::to_string(h) + " needs M >= " +
                                            std::to_string(need) + ", grid has " +
                                            std::to_string(grid.interior_count()),
                                        need);
    }
    const auto ks = band_frequencies(params.h);
    spectrum::SpectrumOptions options;
    options.grids = {grid.interior_count(), 2 * grid.interior_count()};
    options.tol = tol;

    std::vector<GroundStateRecord> band(ks.size());
    const double dx = grid.spacing();
    parallel_for(ks.size(), threads, [&](std::size_t i) {
        auto entry = spectrum::ground_state(ks[i], options);
        GroundStateRecord& r = band[i];
        r.k = ks[i];
        r.lambda = entry.pair.lambda_sq;
        r.nu = r.lambda / r.k - 1.0;
        r.grid_error = entry.richardson_err;
        r.profile = std::move(entry.pair.vector);
        double outside = 0.0;
        for (int j = 0; j < grid.interior_count(); ++j) {
            if (std::abs(grid.node(j)) > 0.5) outside += r.profile[j] * r.profile[j];
        }
        r.mass_outside_half = outside * dx;
    });
    return band;
}

field::BasisPtr band_basis(const std::vector<GroundStateRecord>& band, const spectrum::DirichletGrid& grid) {
    std::map<int, std::vector<field::BasisLevel>> levels;
    for (const auto& r : band) levels[r.k].push_back({0, r.lambda, r.grid_error, r.profile});
    return std::make_shared<const field::SpectralBasis>(grid, std::move(levels));
}

field::ModalField build_beam(const BeamParams& params, const std::vector<GroundStateRecord>& band,
                             const field::BasisPtr& basis) {
    const auto ks = band_frequencies(params.h);
    if (band.size() < ks.size()) throw std::invalid_argument("build_beam: band does not cover the support of chi(h.)");
    field::ModalField u(basis);
    for (const auto& r : band) {
        const double c = gaussian_weight(params.h, r.k) * bump_chi(params.h * r.k);
        if (c == 0.0) continue;
        auto s = basis->find(r.k, 0);
        if (!s) throw std::out_of_range("build_beam: basis has no slot (n=" + std::to_string(r.k) + ", m=0)");
        u.coefficients()[*s] = c;
    }
    return u;
}

double beam_center(const field::ModalField& u, double t) {
    const auto& basis = *u.basis();
    for (std::size_t s = 0; s < basis.size(); ++s) {
        if (basis.level_of(s) != 0) throw std::invalid_argument("beam_center: field has excited levels");
    }
    if (!(field::mass(u) > 0.0)) throw std::invalid_argument("beam_center: zero-mass state");
    auto g = field::synthesize(field::evolve(u, t));
    field::cplx acc{};
    for (std::size_t k = 0; k < g.modes().size(); ++k) {
        auto next = g.mode_index(g.modes()[k] + 1);
        if (!next) continue;
        auto a = g.mode_values(k);
        auto b = g.mode_values(*next);
        for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::conj(b[i]);
    }
    return std::arg(acc);
}

std::string band_csv(const std::vector<GroundStateRecord>& band) {
    csv::Writer w{"k", "lambda", "nu", "mass_outside_half"};
    for (const auto& r : band) w.row(r.k, r.lambda, r.nu, r.mass_outside_half);
    return w.str();
}

}  // namespace grushin::beam
