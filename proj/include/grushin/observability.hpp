#pragma once

// Horizontal-strip control regions omega = (-1,1)_x x U(c_k, d_k) and the
// time-averaged mass that an evolving state leaves inside them.

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "grushin/field.hpp"

namespace grushin::observe {

using field::cplx;

struct Arc {
    double start = 0.0;   // normalized into [0, 2*pi)
    double length = 0.0;  // in (0, 2*pi]
};

/// Union of disjoint open arcs on the torus of circumference 2*pi.
class ControlRegion {
public:
    ControlRegion() = default;
    /// Arcs given as (c, d) with c < d, possibly wrapping past 2*pi.
    explicit ControlRegion(const std::vector<std::pair<double, double>>& arcs);

    static ControlRegion full_torus();
    static ControlRegion empty() { return ControlRegion(); }
    /// omega whose complement is the strip |y| < a.
    static ControlRegion strip_complement(double a);

    const std::vector<Arc>& arcs() const { return arcs_; }
    double total_length() const;
    bool is_full() const;
    ControlRegion rotated(double angle) const;

    std::string describe() const;

private:
    std::vector<Arc> arcs_;
};

/// Length of the longest complementary arc; 0 for the full torus and
/// 2*pi for the empty region.
double gap_length(const ControlRegion& region);

/// \hat I(k) = int_omega e^{-iky} dy in closed form.
cplx arc_fourier(const ControlRegion& region, int k);

/// int_omega dy int dx |u|^2 through the Toeplitz form
/// sum_{n,n'} \hat I(n'-n) dx sum_i U_n(x_i) conj(U_{n'}(x_i)),
/// with the sum over n' done as a cyclic convolution.
double region_mass(const field::GridField& g, const ControlRegion& region);

/// Direct O(K^2 M) evaluation of the same quadratic form.
double region_mass_direct(const field::GridField& g, const ControlRegion& region);

/// Composite Simpson weights for nt equally spaced nodes on [a, b]; nt odd.
std::vector<double> simpson_weights(int nt, double a, double b);

/// F = (1 / (2T mass(u0))) int_{-T}^{T} region_mass(synthesize(evolve(u0, t))) dt
/// with composite Simpson on nt nodes. Requires T > 0, nt odd and nt >= 33.
double observed_fraction(const field::ModalField& u0, const ControlRegion& region, double T, int nt,
                         int threads = 1);

struct BeamMember {
    double h = 0.0;
    field::ModalField field;
};

struct ObservabilityCell {
    double h = 0.0;
    double T = 0.0;
    double fraction = 0.0;
};

struct ObservabilityReport {
    std::string region;
    double a = 0.0;         // half of L(omega)
    double L_omega = 0.0;
    int nt = 0;
    std::vector<ObservabilityCell> cells;

    /// Fractions for a fixed T ordered as the family was given.
    std::vector<double> fractions_at(double T) const;
    /// True when F strictly decreases along the family order at this T.
    bool strictly_decreasing_at(double T) const;
    double min_fraction_at(double T) const;

    /// Columns h,T,a,L_omega,nt,observed_fraction.
    std::string to_csv() const;
};

ObservabilityReport threshold_sweep(const std::vector<BeamMember>& family, const ControlRegion& region,
                                    const std::vector<double>& T_list, int nt, int threads = 1);

}  // namespace grushin::observe
