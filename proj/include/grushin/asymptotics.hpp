#pragma once

// Ground-state asymptotics of L_w = -d^2/dx^2 + w^2 x^2 on (-1,1) through the
// rescaled Hermite problem -f'' + (z^2 - mu) f = 0, f(0) = 1, f'(0) = 0, on
// z in (0, sqrt(w)).
//
// Quantities growing like e^{z^2/2} (f1, R2) are carried in scaled form
// mantissa * e^{z^2/2}; the scaled remainder S = R2 e^{-z^2/2} solves
//   S'' + 2 z S' + (2 + nu) S = -g1,  S(0) = S'(0) = 0,
// which has only algebraic growth.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "grushin/spectrum.hpp"

namespace grushin::asym {

/// Phi(z) = int_0^z e^{-y^2} dy for z >= 0; Phi(inf) = sqrt(pi)/2.
double erf_scaled(double z);

/// g1(z) = -int_0^z Phi(y) e^{-(z^2 - y^2)} dy = e^{-z^2/2} f1(z).
double g1(double z);

struct ScaledValue {
    double mantissa = 0.0;
    double exponent = 0.0;
    /// mantissa * e^{exponent}; overflows to +-inf for large exponents.
    double value() const;
};

/// f1(z) as (g1(z), z^2/2).
ScaledValue f1(double z);

/// Dense samples of g1 at z_j = j * z_max / (2 * steps), j = 0..2*steps
/// (the RK4 stage nodes of a `steps`-step integration).
std::vector<double> g1_stage_samples(double z_max, int steps);

struct R2Profile {
    double nu = 0.0;
    double step = 0.0;
    std::vector<double> z;
    std::vector<double> scaled;             // R2 e^{-z^2/2}
    std::vector<double> scaled_derivative;  // R2' e^{-z^2/2}

    double end_scaled() const { return scaled.back(); }
    /// R2(nu, z) as a scaled value at node j.
    ScaledValue at(std::size_t j) const;
};

/// Classical RK4 integration of the scaled remainder equation. The step is
/// shrunk so that z_max is hit exactly. Requires z_max <= 40 and step <= 1e-3.
R2Profile solve_R2(double nu, double z_max, double step = 1e-3);
/// Same with precomputed g1 stage samples for `steps` steps.
R2Profile solve_R2(double nu, double z_max, int steps, std::span<const double> g1_stages);

struct NuSolution {
    double w = 0.0;
    double nu = 0.0;
    double nu_first = 0.0;        // -f0(sqrt w) / f1(sqrt w)
    int iterations = 0;
    double residual = 0.0;        // |F(nu, w)| = |f(nu, sqrt w)|
    double bound_constant = 0.0;  // nu / (w^{1/2} e^{-w})
    std::vector<double> increments;
};

/// Fixed-point iteration nu_{k+1} = -(f0 + nu_k^2 R2(nu_k)) / f1 at z = sqrt(w),
/// stopped when |nu_{k+1} - nu_k| <= tol * nu_{k+1}. Requires w >= 6; throws
/// std::runtime_error when the increments grow twice in a row.
NuSolution nu_fixed_point(double w, double tol = 1e-13, double step = 1e-3);

/// Hermite solution value f_mu(z_end) by RK4.
double hermite_shoot(double mu, double z_end, double step = 1e-3);

/// mu with first zero Z_0(mu) = sqrt(w), bisecting mu in (1, 3) to width 1e-12.
double mu_of_w(double w, double step = 1e-3);

struct EigenEstimateRow {
    double w = 0.0;
    double lambda = 0.0;
    double grid_error = 0.0;
    double nu_matrix = 0.0;
    double r1 = 0.0;            // (lambda - w) / (w^{3/2} e^{-w})
    double r4_at_zero = 0.0;    // p(w,0) / w^{1/4}
    double r4_min = 0.0;        // envelope of p / (w^{1/4} e^{-w x^2/2}) on |x| <= 1/4
    double r4_max = 0.0;
    double r5 = 0.0;            // max_{x0 in {0.6, 0.8, 0.95}} |p(w,x0)| e^{w/10}
};

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

LinearFit fit_line(std::span<const double> x, std::span<const double> y);

struct EigenEstimateReport {
    std::vector<EigenEstimateRow> rows;
    LinearFit gap_fit;   // ln(lambda - w) against w
    double r1_max = 0.0;

    std::string to_csv() const;
};

/// Columns w,lambda,nu_fixed_point,nu_shooting,nu_matrix,r1,r5,gap_slope,gap_intercept.
std::string asymptotics_csv(const EigenEstimateReport& report, std::span<const double> nu_fixed_point,
                            std::span<const double> nu_shooting);

/// Interpolated value of a Dirichlet grid function (zero at x = +-1),
/// cubic through the four nearest nodes.
double interpolate_dirichlet(const spectrum::DirichletGrid& grid, std::span<const double> values, double x);

/// Eigenvalue and profile checks for each w. Requires dx <= 1/(20 sqrt(w)).
EigenEstimateReport check_eigen_estimates(std::span<const double> ws, const spectrum::DirichletGrid& grid,
                                          double tol = 1e-10, int threads = 1);

/// Integer w -> lambda(w) (ground eigenvalue of L_w).
using LambdaTable = std::map<int, double>;

LambdaTable build_lambda_table(int w_lo, int w_hi, const spectrum::SpectrumOptions& options);

struct PhaseRecord {
    double t = 0.0, y = 0.0, w = 0.0;
    int m = 0;
    double value = 0.0;     // w y - lambda(w) t - 2 pi m w
    double d_w = 0.0;       // y - lambda'(w) t - 2 pi m
    double d_ww = 0.0;      // -lambda''(w) t
    double lambda_prime = 0.0;
    double lambda_second = 0.0;
};

/// Phase and its w-derivatives from 5-point stencils on the lambda table.
/// Throws std::out_of_range when the stencil leaves the table.
PhaseRecord phase_derivatives(double t, double y, int w, int m, const LambdaTable& table);

}  // namespace grushin::asym
