#include "grushin/normal_form.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "grushin/csv.hpp"
#include "grushin/fft.hpp"
#include "grushin/parallel.hpp"

namespace grushin::normal_form {

namespace {

constexpr double kBoundaryTol = 1e-8;

std::vector<cplx> to_coefficients(std::vector<cplx> samples) {
    fft::forward(samples);
    const double scale = 1.0 / static_cast<double>(samples.size());
    for (auto& c : samples) c *= scale;
    return samples;
}

std::vector<cplx> to_values(std::span<const cplx> coefficients) {
    std::vector<cplx> v(coefficients.begin(), coefficients.end());
    fft::backward(v);
    return v;
}

void check_h(double h, const char* who) {
    if (!(h > 0.0 && h <= 0.25)) throw std::invalid_argument(std::string(who) + ": h must lie in (0, 1/4]");
}

// c * d_x^2 on one mode
void add_second_derivative(const ExtendedField& f, std::span<const cplx> c, std::span<cplx> out, double scale) {
    for (int j = 0; j < f.nx(); ++j) {
        const double xi = f.wavenumber(j);
        out[j] -= scale * xi * xi * c[j];
    }
}

// out += scale * F[w(x) F^{-1} c]
void add_pointwise(std::span<const cplx> c, std::span<const double> weight, std::span<cplx> out, cplx scale) {
    auto v = to_values(c);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] *= weight[j];
    auto back = to_coefficients(std::move(v));
    for (std::size_t j = 0; j < back.size(); ++j) out[j] += scale * back[j];
}

// P_a on mode n: c'' - n^2 a^2 c
std::vector<cplx> pa_mode(const ExtendedField& f, std::span<const cplx> c, int n, const ProfileA& profile) {
    std::vector<cplx> out(c.size(), cplx{});
    add_second_derivative(f, c, out, 1.0);
    if (n != 0) add_pointwise(c, profile.a_sq, out, -static_cast<double>(n) * n);
    return out;
}

std::vector<cplx> q_mode(const ExtendedField& f, std::span<const cplx> c, double h, const MultiplierSpec& spec,
                         const ProfileA& profile) {
    std::vector<cplx> filtered(c.size());
    for (int j = 0; j < f.nx(); ++j) filtered[j] = spec.m(h * f.wavenumber(j)) * c[j];
    std::vector<cplx> out(c.size(), cplx{});
    add_pointwise(filtered, profile.B, out, cplx(0.0, 0.5));
    return out;
}

double coeff_norm_sq(std::span<const cplx> c) {
    double s = 0.0;
    for (const auto& v : c) s += std::norm(v);
    return 2.0 * std::numbers::pi * kPeriod * s;
}

void check_profile(const ExtendedField& f, const ProfileA& profile) {
    if (static_cast<int>(profile.x.size()) != f.nx()) throw std::invalid_argument("profile grid does not match field");
}

}  // namespace

ExtendedField::ExtendedField(int nx, std::vector<int> modes) : nx_(nx), modes_(std::move(modes)) {
    if (nx < 4 || nx % 2 != 0) throw std::invalid_argument("ExtendedField: nx must be even and >= 4");
    if (!std::is_sorted(modes_.begin(), modes_.end()) ||
        std::adjacent_find(modes_.begin(), modes_.end()) != modes_.end()) {
        throw std::invalid_argument("ExtendedField: modes must be strictly increasing");
    }
    coeffs_.assign(static_cast<std::size_t>(nx) * modes_.size(), cplx{});
}

ExtendedField ExtendedField::from_samples(int nx, std::vector<int> modes, std::span<const cplx> samples) {
    ExtendedField f(nx, std::move(modes));
    if (samples.size() != f.coeffs_.size()) throw std::invalid_argument("ExtendedField::from_samples: size mismatch");
    for (std::size_t k = 0; k < f.modes_.size(); ++k) {
        auto c = to_coefficients({samples.begin() + k * nx, samples.begin() + (k + 1) * nx});
        std::copy(c.begin(), c.end(), f.coefficients(k).begin());
    }
    return f;
}

std::optional<std::size_t> ExtendedField::mode_index(int n) const {
    auto it = std::lower_bound(modes_.begin(), modes_.end(), n);
    if (it == modes_.end() || *it != n) return std::nullopt;
    return static_cast<std::size_t>(it - modes_.begin());
}

double ExtendedField::wavenumber(int j) const { return 0.5 * std::numbers::pi * frequency_index(j); }

std::span<const cplx> ExtendedField::coefficients(std::size_t k) const {
    return std::span<const cplx>(coeffs_).subspan(k * nx_, nx_);
}

std::span<cplx> ExtendedField::coefficients(std::size_t k) { return std::span<cplx>(coeffs_).subspan(k * nx_, nx_); }

std::vector<cplx> ExtendedField::mode_samples(std::size_t k) const { return to_values(coefficients(k)); }

std::vector<cplx> ExtendedField::to_samples() const {
    std::vector<cplx> out;
    out.reserve(coeffs_.size());
    for (std::size_t k = 0; k < modes_.size(); ++k) {
        auto v = mode_samples(k);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

double ExtendedField::norm_sq() const { return coeff_norm_sq(coeffs_); }

double ExtendedField::norm() const { return std::sqrt(norm_sq()); }

std::vector<cplx> odd_extend_line(std::span<const cplx> closed_values) {
    const std::size_t total = closed_values.size();
    if (total < 3) throw std::invalid_argument("odd_extend_line: need the two endpoints and at least one interior node");
    if (std::abs(closed_values.front()) > kBoundaryTol || std::abs(closed_values.back()) > kBoundaryTol) {
        throw std::invalid_argument("odd_extend_line: boundary values exceed 1e-8, not a Dirichlet field");
    }
    const std::size_t M = total - 2;
    std::vector<cplx> out(2 * (M + 1), cplx{});
    for (std::size_t p = 1; p <= M; ++p) {
        out[p] = closed_values[p];
        out[2 * M + 2 - p] = -closed_values[p];
    }
    return out;
}

ExtendedField odd_extend(const field::GridField& g) {
    const int M = g.interior();
    const int nx = 2 * (M + 1);
    std::vector<cplx> samples;
    samples.reserve(static_cast<std::size_t>(nx) * g.modes().size());
    std::vector<cplx> closed(M + 2, cplx{});
    for (std::size_t k = 0; k < g.modes().size(); ++k) {
        auto vals = g.mode_values(k);
        std::copy(vals.begin(), vals.end(), closed.begin() + 1);
        auto ext = odd_extend_line(closed);
        samples.insert(samples.end(), ext.begin(), ext.end());
    }
    return ExtendedField::from_samples(nx, g.modes(), samples);
}

field::GridField restrict_to_strip(const ExtendedField& f, const spectrum::DirichletGrid& grid) {
    const int M = grid.interior_count();
    if (f.nx() != 2 * (M + 1)) throw std::invalid_argument("restrict_to_strip: nx must equal 2(M+1)");
    field::GridField g(grid, f.modes());
    for (std::size_t k = 0; k < f.modes().size(); ++k) {
        auto v = f.mode_samples(k);
        auto out = g.mode_values(k);
        for (int p = 1; p <= M; ++p) out[p - 1] = v[p];
    }
    return g;
}

double ProfileA::a_of(double x) { return x <= 1.0 ? x : 2.0 - x; }

double ProfileA::B_of(double x) {
    if (x <= 1.0) return (x * x * x - x) / 3.0;
    const double s = 2.0 - x;
    return (s - s * s * s) / 3.0;
}

ProfileA::ProfileA(int nx) {
    if (nx < 4 || nx % 2 != 0) throw std::invalid_argument("ProfileA: nx must be even and >= 4");
    const double dx = kPeriod / nx;
    x.resize(nx);
    a.resize(nx);
    a_sq.resize(nx);
    B.resize(nx);
    for (int j = 0; j < nx; ++j) {
        x[j] = -1.0 + dx * j;
        a[j] = a_of(x[j]);
        a_sq[j] = a[j] * a[j];
        B[j] = B_of(x[j]);
    }
}

double MultiplierSpec::smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double e0 = std::exp(-1.0 / t), e1 = std::exp(-1.0 / (1.0 - t));
    return e0 / (e0 + e1);
}

namespace {

double rise(double s, double lo, double hi) { return MultiplierSpec::smooth_step((s - lo) / (hi - lo)); }

}  // namespace

double MultiplierSpec::psi0(double s) const { return 1.0 - rise(std::abs(s), 0.5, 1.0); }

double MultiplierSpec::psi1(double s) const {
    const double r = std::abs(s);
    return rise(r, 0.25, 0.5) * (1.0 - rise(r, 2.0, 4.0));
}

double MultiplierSpec::psi2(double s) const {
    const double r = std::abs(s);
    return rise(r, 0.125, 0.25) * (1.0 - rise(r, 4.0, 8.0));
}

double MultiplierSpec::m(double s) const {
    if (s == 0.0) return 0.0;
    return psi2(s) / s;
}

ExtendedField apply_Pa(const ExtendedField& f, const ProfileA& profile) {
    check_profile(f, profile);
    ExtendedField out(f.nx(), f.modes());
    for (std::size_t k = 0; k < f.modes().size(); ++k) {
        auto v = pa_mode(f, f.coefficients(k), f.modes()[k], profile);
        std::copy(v.begin(), v.end(), out.coefficients(k).begin());
    }
    return out;
}

ExtendedField apply_Pa(const ExtendedField& f) { return apply_Pa(f, ProfileA(f.nx())); }

ExtendedField apply_Q(const ExtendedField& f, double h, const MultiplierSpec& spec, const ProfileA& profile) {
    check_h(h, "apply_Q");
    check_profile(f, profile);
    ExtendedField out(f.nx(), f.modes());
    for (std::size_t k = 0; k < f.modes().size(); ++k) {
        auto v = q_mode(f, f.coefficients(k), h, spec, profile);
        std::copy(v.begin(), v.end(), out.coefficients(k).begin());
    }
    return out;
}

ExtendedField apply_Q(const ExtendedField& f, double h, const MultiplierSpec& spec) {
    return apply_Q(f, h, spec, ProfileA(f.nx()));
}

ExtendedField localize(const ExtendedField& f, double h, double eps, const MultiplierSpec& spec) {
    ExtendedField out = f;
    const double hy = std::pow(h, eps);
    for (std::size_t k = 0; k < f.modes().size(); ++k) {
        const double wy = spec.psi0(hy * f.modes()[k]);
        auto c = out.coefficients(k);
        for (int j = 0; j < f.nx(); ++j) c[j] *= wy * spec.psi1(h * f.wavenumber(j));
    }
    return out;
}

std::vector<int> localized_modes(double h, double eps, const MultiplierSpec& spec) {
    if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("localized_modes: h must lie in (0, 1)");
    if (!(eps > 0.0)) throw std::invalid_argument("localized_modes: eps must be positive");
    const double hy = std::pow(h, eps);
    std::vector<int> modes;
    const int cap = static_cast<int>(std::ceil(1.0 / hy));
    for (int n = -cap; n <= cap; ++n) {
        if (spec.psi0(hy * n) > 0.0) modes.push_back(n);
    }
    return modes;
}

ExtendedField random_localized(int nx, double h, double eps, std::mt19937_64& rng, const MultiplierSpec& spec) {
    check_h(h, "random_localized");
    ExtendedField f(nx, localized_modes(h, eps, spec));
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (std::size_t k = 0; k < f.modes().size(); ++k) {
        for (auto& c : f.coefficients(k)) {
            const double re = normal(rng);
            const double im = normal(rng);
            c = {re, im};
        }
    }
    return localize(f, h, eps, spec);
}

ResidualResult residual_ratio(const ExtendedField& u_in, double h, double eps, const MultiplierSpec& spec) {
    check_h(h, "residual_ratio");
    if (!(eps > 0.0)) throw std::invalid_argument("residual_ratio: eps must be positive");
    const ExtendedField u = localize(u_in, h, eps, spec);
    const double u_norm_sq = u.norm_sq();
    if (!(u_norm_sq > 0.0)) throw std::invalid_argument("residual_ratio: localization mask empties the field");
    const ProfileA profile(u.nx());
    std::vector<double> defect(profile.a_sq.size());
    for (std::size_t j = 0; j < defect.size(); ++j) defect[j] = profile.a_sq[j] - profile.mean;

    double raw_sq = 0.0, r_sq = 0.0;
    for (std::size_t k = 0; k < u.modes().size(); ++k) {
        const int n = u.modes()[k];
        if (n == 0) continue;
        const double n2 = static_cast<double>(n) * n;
        auto c = u.coefficients(k);

        std::vector<cplx> raw(c.size(), cplx{});
        add_pointwise(c, defect, raw, n2);
        raw_sq += coeff_norm_sq(raw);

        // -(1 + h Q n^2) P_a u
        auto pa = pa_mode(u, c, n, profile);
        auto q_pa = q_mode(u, pa, h, spec, profile);
        // (1 + h Q n^2) u
        auto qu = q_mode(u, c, h, spec, profile);
        std::vector<cplx> v(c.begin(), c.end());
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += h * n2 * qu[j];
        // + (d_x^2 - M n^2) v
        std::vector<cplx> r(c.size(), cplx{});
        add_second_derivative(u, v, r, 1.0);
        for (std::size_t j = 0; j < r.size(); ++j) {
            r[j] += -profile.mean * n2 * v[j] - pa[j] - h * n2 * q_pa[j];
        }
        r_sq += coeff_norm_sq(r);
    }
    const double norm = std::sqrt(u_norm_sq);
    return {std::sqrt(raw_sq) / norm, std::sqrt(r_sq) / norm};
}

double ResidualSweep::median_ratio(double h) const {
    std::vector<double> r;
    for (const auto& row : rows) {
        if (row.h == h) r.push_back(row.result.ratio());
    }
    if (r.empty()) throw std::out_of_range("median_ratio: no rows at this h");
    std::sort(r.begin(), r.end());
    const std::size_t mid = r.size() / 2;
    return r.size() % 2 ? r[mid] : 0.5 * (r[mid - 1] + r[mid]);
}

std::string ResidualSweep::to_csv() const {
    csv::Writer w{"h", "eps", "seed", "raw", "corrected", "ratio"};
    for (const auto& row : rows) {
        w.row(row.h, row.eps, static_cast<unsigned long long>(row.seed), row.result.raw, row.result.corrected,
              row.result.ratio());
    }
    return w.str();
}

ResidualSweep residual_sweep(std::span<const double> hs, double eps, std::uint64_t base_seed, int seeds, int nx,
                             int threads) {
    if (seeds < 1) throw std::invalid_argument("residual_sweep: seeds must be >= 1");
    ResidualSweep sweep;
    sweep.rows.resize(hs.size() * static_cast<std::size_t>(seeds));
    parallel_for(sweep.rows.size(), threads, [&](std::size_t i) {
        const double h = hs[i / seeds];
        const std::uint64_t seed = base_seed + i % seeds;
        std::mt19937_64 rng(seed);
        auto u = random_localized(nx, h, eps, rng);
        sweep.rows[i] = {h, eps, seed, residual_ratio(u, h, eps)};
    });
    return sweep;
}

}  // namespace grushin::normal_form
