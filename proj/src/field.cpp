#include "grushin/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "grushin/csv.hpp"

namespace grushin::field {

SpectralBasis::SpectralBasis(DirichletGrid grid, std::map<int, std::vector<BasisLevel>> levels) : grid_(grid) {
    const auto m = static_cast<std::size_t>(grid.interior_count());
    for (auto& [n, list] : levels) {
        std::sort(list.begin(), list.end(), [](const BasisLevel& a, const BasisLevel& b) { return a.m < b.m; });
        if (list.empty()) continue;
        modes_.push_back(n);
        for (auto& level : list) {
            if (level.vector.size() != m) {
                throw std::invalid_argument("SpectralBasis: vector length does not match the grid for (n=" +
                                            std::to_string(n) + ", m=" + std::to_string(level.m) + ")");
            }
            by_mode_[n].push_back(slots_.size());
            slots_.push_back({n, level.m, level.lambda_sq, level.grid_error, storage_.size()});
            storage_.insert(storage_.end(), level.vector.begin(), level.vector.end());
        }
    }
    if (slots_.empty()) throw std::invalid_argument("SpectralBasis: empty basis");
}

std::span<const double> SpectralBasis::vector(std::size_t slot) const {
    return {storage_.data() + slots_[slot].offset, static_cast<std::size_t>(grid_.interior_count())};
}

std::optional<std::size_t> SpectralBasis::find(int n, int m) const {
    auto it = by_mode_.find(n);
    if (it == by_mode_.end()) return std::nullopt;
    for (std::size_t s : it->second) {
        if (slots_[s].m == m) return s;
    }
    return std::nullopt;
}

std::size_t SpectralBasis::slot(int n, int m) const {
    auto s = find(n, m);
    if (!s) throw std::out_of_range("SpectralBasis: no slot (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
    return *s;
}

std::span<const std::size_t> SpectralBasis::slots_of_mode(int n) const {
    auto it = by_mode_.find(n);
    if (it == by_mode_.end()) return {};
    return it->second;
}

double SpectralBasis::max_grid_error() const {
    double e = 0.0;
    for (const auto& s : slots_) e = std::max(e, s.grid_error);
    return e;
}

BasisPtr basis_from_table(const spectrum::SpectrumTable& table) {
    std::map<int, std::vector<BasisLevel>> levels;
    for (const auto& [key, entry] : table.entries()) {
        if (entry.pair.vector.empty()) throw std::invalid_argument("basis_from_table: table has no eigenvectors");
        levels[key.first].push_back({key.second, entry.pair.lambda_sq, entry.richardson_err, entry.pair.vector});
    }
    return std::make_shared<const SpectralBasis>(table.grid(), std::move(levels));
}

BasisPtr build_basis(int N, double lambda_max, const DirichletGrid& grid, double tol, int threads) {
    constexpr double kLowest = std::numbers::pi * std::numbers::pi / 4.0;
    if (N < 1) throw std::invalid_argument("build_basis: N must be >= 1");
    if (!(lambda_max > kLowest)) {
        throw std::invalid_argument("build_basis: lambda_max must exceed pi^2/4, the lowest eigenvalue");
    }
    std::vector<int> modes;
    for (int n = -N; n <= N; ++n) modes.push_back(n);
    spectrum::SpectrumOptions options;
    options.grids = {grid.interior_count(), 2 * grid.interior_count()};
    options.tol = tol;
    options.threads = threads;
    auto table = spectrum::build_table_below(modes, lambda_max, options);
    return basis_from_table(table);
}

ModalField::ModalField(BasisPtr basis) : basis_(std::move(basis)) {
    if (!basis_) throw std::invalid_argument("ModalField: null basis");
    coefficients_.assign(basis_->size(), cplx{});
}

ModalField::ModalField(BasisPtr basis, std::vector<cplx> coefficients)
    : basis_(std::move(basis)), coefficients_(std::move(coefficients)) {
    if (!basis_) throw std::invalid_argument("ModalField: null basis");
    if (coefficients_.size() != basis_->size()) {
        throw std::invalid_argument("ModalField: coefficient count does not match the basis");
    }
    for (const auto& c : coefficients_) {
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
            throw std::invalid_argument("ModalField: non-finite coefficient");
        }
    }
}

cplx ModalField::at(int n, int m) const { return coefficients_[basis_->slot(n, m)]; }

void ModalField::set(int n, int m, cplx value) { coefficients_[basis_->slot(n, m)] = value; }

std::string ModalField::to_csv() const {
    csv::Writer w{"n", "m", "re", "im"};
    for (std::size_t s = 0; s < coefficients_.size(); ++s) {
        w.row(basis_->mode_of(s), basis_->level_of(s), coefficients_[s].real(), coefficients_[s].imag());
    }
    return w.str();
}

ModalField random_field(const BasisPtr& basis, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, 1.0);
    std::vector<cplx> c(basis->size());
    for (auto& v : c) {
        double re = dist(rng);
        double im = dist(rng);
        v = {re, im};
    }
    return ModalField(basis, std::move(c));
}

GridField::GridField(DirichletGrid grid, std::vector<int> modes, BasisPtr basis)
    : grid_(grid), modes_(std::move(modes)), basis_(std::move(basis)) {
    if (!std::is_sorted(modes_.begin(), modes_.end()) ||
        std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end()) {
        throw std::invalid_argument("GridField: modes must be strictly increasing");
    }
    if (basis_ && !(basis_->grid() == grid_)) throw std::invalid_argument("GridField: basis grid mismatch");
    values_.assign(modes_.size() * static_cast<std::size_t>(grid_.interior_count()), cplx{});
}

std::span<const cplx> GridField::mode_values(std::size_t k) const {
    const auto m = static_cast<std::size_t>(grid_.interior_count());
    return {values_.data() + k * m, m};
}

std::span<cplx> GridField::mode_values(std::size_t k) {
    const auto m = static_cast<std::size_t>(grid_.interior_count());
    return {values_.data() + k * m, m};
}

std::optional<std::size_t> GridField::mode_index(int n) const {
    auto it = std::lower_bound(modes_.begin(), modes_.end(), n);
    if (it == modes_.end() || *it != n) return std::nullopt;
    return static_cast<std::size_t>(it - modes_.begin());
}

std::string GridField::to_csv() const {
    csv::Writer w{"n", "x_index", "re", "im"};
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        auto vals = mode_values(k);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            w.row(modes_[k], static_cast<long long>(i + 1), vals[i].real(), vals[i].imag());
        }
    }
    return w.str();
}

ModalField evolve(const ModalField& field, double t) {
    const auto& basis = *field.basis();
    std::vector<cplx> c(field.coefficients().begin(), field.coefficients().end());
    for (std::size_t s = 0; s < c.size(); ++s) c[s] *= std::polar(1.0, -t * basis.lambda_sq(s));
    return ModalField(field.basis(), std::move(c));
}

GridField synthesize(const ModalField& field) {
    const auto& basis = *field.basis();
    GridField g(basis.grid(), basis.modes(), field.basis());
    for (std::size_t k = 0; k < basis.modes().size(); ++k) {
        auto out = g.mode_values(k);
        for (std::size_t s : basis.slots_of_mode(basis.modes()[k])) {
            const cplx a = field.coefficients()[s];
            if (a == cplx{}) continue;
            auto phi = basis.vector(s);
            for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * phi[i];
        }
    }
    return g;
}

ModalField analyze(const GridField& g) {
    if (!g.basis()) throw std::invalid_argument("analyze: grid field carries no basis reference");
    return analyze(g, g.basis());
}

ModalField analyze(const GridField& g, const BasisPtr& basis) {
    if (!basis) throw std::invalid_argument("analyze: null basis");
    if (g.basis() && g.basis() != basis) throw std::invalid_argument("analyze: grid field refers to a different basis");
    if (!(g.grid() == basis->grid())) throw std::invalid_argument("analyze: grid mismatch with basis");
    ModalField out(basis);
    const double dx = g.grid().spacing();
    for (std::size_t k = 0; k < g.modes().size(); ++k) {
        const int n = g.modes()[k];
        auto vals = g.mode_values(k);
        auto slots = basis->slots_of_mode(n);
        if (slots.empty()) {
            bool nonzero = std::any_of(vals.begin(), vals.end(), [](cplx v) { return v != cplx{}; });
            if (nonzero) throw std::invalid_argument("analyze: mode " + std::to_string(n) + " is not in the basis");
            continue;
        }
        for (std::size_t s : slots) {
            auto phi = basis->vector(s);
            cplx acc{};
            for (std::size_t i = 0; i < vals.size(); ++i) acc += vals[i] * phi[i];
            out.coefficients()[s] = acc * dx;
        }
    }
    return out;
}

double mass(const ModalField& field) {
    double s = 0.0;
    for (const auto& c : field.coefficients()) s += std::norm(c);
    return kTwoPi * s;
}

double energy_grushin(const ModalField& field) {
    const auto& basis = *field.basis();
    double s = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) s += basis.lambda_sq(i) * std::norm(field.coefficients()[i]);
    return kTwoPi * s;
}

double coercivity_gap(const ModalField& field) {
    const auto& basis = *field.basis();
    double s = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i) {
        s += (basis.lambda_sq(i) - std::abs(basis.mode_of(i))) * std::norm(field.coefficients()[i]);
    }
    return kTwoPi * s;
}

double grid_mass(const GridField& g) {
    double s = 0.0;
    for (std::size_t k = 0; k < g.modes().size(); ++k) {
        for (const auto& v : g.mode_values(k)) s += std::norm(v);
    }
    return kTwoPi * g.grid().spacing() * s;
}

}  // namespace grushin::field
