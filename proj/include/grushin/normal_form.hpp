#pragma once

// Periodic reformulation on the doubled torus [-1,3)_x x [-pi,pi)_y.
//
// Dirichlet fields are reflected oddly across x = 1; the extended operator
// P_a = d_x^2 + a(x)^2 d_y^2 uses the tent profile a(x) = x on [-1,1],
// 2 - x on [1,3]. The conjugation v = (1 + h Q D_y^2) u trades a^2 for its
// mean M = 1/3 up to a residual.
//
// x-Fourier coefficients are taken against e^{i xi (x + 1)}, xi = pi l / 2,
// with the FFT index order l = 0..nx/2-1, -nx/2..-1.

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "grushin/field.hpp"

namespace grushin::normal_form {

using field::cplx;

inline constexpr double kPeriod = 4.0;

class ExtendedField {
public:
    /// Zero field with nx x-nodes (even) and the given y-modes.
    ExtendedField(int nx, std::vector<int> modes);

    static ExtendedField from_samples(int nx, std::vector<int> modes, std::span<const cplx> samples);

    int nx() const { return nx_; }
    double spacing() const { return kPeriod / nx_; }
    double node(int j) const { return -1.0 + spacing() * j; }
    const std::vector<int>& modes() const { return modes_; }
    std::optional<std::size_t> mode_index(int n) const;

    /// Signed frequency index l for storage position j.
    int frequency_index(int j) const { return j < nx_ / 2 ? j : j - nx_; }
    double wavenumber(int j) const;

    std::span<const cplx> coefficients(std::size_t k) const;
    std::span<cplx> coefficients(std::size_t k);

    /// Mode-major x-samples.
    std::vector<cplx> to_samples() const;
    std::vector<cplx> mode_samples(std::size_t k) const;

    /// int |f|^2 dx dy = 2 pi * 4 * sum |c|^2.
    double norm_sq() const;
    double norm() const;

private:
    int nx_;
    std::vector<int> modes_;
    std::vector<cplx> coeffs_;
};

/// Odd reflection of closed samples u(-1), u(x_1), ..., u(x_M), u(1) into
/// 2(M+1) doubled-torus samples. Throws when |u(+-1)| > 1e-8.
std::vector<cplx> odd_extend_line(std::span<const cplx> closed_values);

/// Odd extension of every mode of g; nx = 2(M+1).
ExtendedField odd_extend(const field::GridField& g);

/// Values of f at the Dirichlet nodes x_1..x_M; requires nx = 2(M+1).
field::GridField restrict_to_strip(const ExtendedField& f, const spectrum::DirichletGrid& grid);

struct ProfileA {
    explicit ProfileA(int nx);

    std::vector<double> x;
    std::vector<double> a;
    std::vector<double> a_sq;
    std::vector<double> B;  // int_{-1}^x (a^2 - M)
    double mean = 1.0 / 3.0;

    static double a_of(double x);
    static double B_of(double x);
};

/// Smooth windows in the scaled frequency: psi0 low-pass (1 on |s| <= 1/2,
/// supported in |s| <= 1), psi1 band (1 on [1/2, 2], supported in (1/4, 4)), psi2 band
/// (1 on [1/4, 4], supported in [1/8, 8]).
struct MultiplierSpec {
    static double smooth_step(double t);
    double psi0(double s) const;
    double psi1(double s) const;
    double psi2(double s) const;
    /// psi2(s) / s, zero at s = 0.
    double m(double s) const;
};

/// d_x^2 + a^2 d_y^2.
ExtendedField apply_Pa(const ExtendedField& f, const ProfileA& profile);
ExtendedField apply_Pa(const ExtendedField& f);

/// Q f = (i/2) B(x) m(h D_x) f. Requires h in (0, 1/4].
ExtendedField apply_Q(const ExtendedField& f, double h, const MultiplierSpec& spec, const ProfileA& profile);
ExtendedField apply_Q(const ExtendedField& f, double h, const MultiplierSpec& spec = {});

/// psi1(h D_x) psi0(h^eps D_y) f.
ExtendedField localize(const ExtendedField& f, double h, double eps, const MultiplierSpec& spec = {});

/// y-modes n with psi0(h^eps n) > 0.
std::vector<int> localized_modes(double h, double eps, const MultiplierSpec& spec = {});

/// Complex Gaussian coefficients passed through the localization mask.
ExtendedField random_localized(int nx, double h, double eps, std::mt19937_64& rng, const MultiplierSpec& spec = {});

struct ResidualResult {
    double raw = 0.0;        // ||(a^2 - M) D_y^2 u|| / ||u||
    double corrected = 0.0;  // ||r|| / ||u||
    double ratio() const { return raw > 0.0 ? corrected / raw : 0.0; }
};

/// r = -(1 + h Q D_y^2) P_a u + Delta_M (1 + h Q D_y^2) u after masking u.
/// Throws std::invalid_argument when the mask removes the whole field.
ResidualResult residual_ratio(const ExtendedField& u, double h, double eps, const MultiplierSpec& spec = {});

struct ResidualRow {
    double h = 0.0;
    double eps = 0.0;
    std::uint64_t seed = 0;
    ResidualResult result;
};

struct ResidualSweep {
    std::vector<ResidualRow> rows;
    /// Median corrected/raw at this h.
    double median_ratio(double h) const;
    /// Columns h,eps,seed,raw,corrected,ratio.
    std::string to_csv() const;
};

/// One random localized field per (h, seed); seed streams are base_seed + i.
ResidualSweep residual_sweep(std::span<const double> hs, double eps, std::uint64_t base_seed, int seeds, int nx = 8192,
                             int threads = 1);

}  // namespace grushin::normal_form
