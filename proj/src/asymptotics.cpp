#include "grushin/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "grushin/csv.hpp"
#include "grushin/parallel.hpp"

namespace grushin::asym {

namespace {

constexpr double kSqrtPi = 1.7724538509055160273;
// e^{-60} is far below double resolution relative to the retained part.
constexpr double kExponentCut = 60.0;
constexpr double kOverflowGuard = 1e250;

int step_count(double z_max, double step) {
    return std::max(1, static_cast<int>(std::ceil(z_max / step - 1e-9)));
}

void check_r2_args(double z_max, double step) {
    if (!(z_max > 0.0) || z_max > 40.0) throw std::invalid_argument("solve_R2: z_max must lie in (0, 40]");
    if (!(step > 0.0) || step > 1e-3) throw std::invalid_argument("solve_R2: step must lie in (0, 1e-3]");
}

std::string number(double v) {
    std::ostringstream out;
    out << v;
    return out.str();
}

}  // namespace

double erf_scaled(double z) {
    if (z < 0.0) throw std::domain_error("erf_scaled: z must be >= 0");
    if (std::isinf(z)) return 0.5 * kSqrtPi;
    return 0.5 * kSqrtPi * std::erf(z);
}

double g1(double z) {
    if (z < 0.0) throw std::domain_error("g1: z must be >= 0");
    if (z == 0.0) return 0.0;
    // y = z - s: e^{-(z^2 - y^2)} = e^{-s(2z - s)}, monotone in s on [0, z].
    double s_max = z;
    if (z * z > kExponentCut) s_max = z - std::sqrt(z * z - kExponentCut);
    auto integrand = [z](double s) { return erf_scaled(z - s) * std::exp(-s * (2.0 * z - s)); };
    double err = 0.0;
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, s_max, 12, 1e-13, &err);
    return -v;
}

double ScaledValue::value() const { return mantissa * std::exp(exponent); }

ScaledValue f1(double z) { return {g1(z), 0.5 * z * z}; }

std::vector<double> g1_stage_samples(double z_max, int steps) {
    if (steps < 1) throw std::invalid_argument("g1_stage_samples: steps must be >= 1");
    std::vector<double> out(2 * static_cast<std::size_t>(steps) + 1);
    const double dz = z_max / (2.0 * steps);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = g1(dz * static_cast<double>(j));
    return out;
}

ScaledValue R2Profile::at(std::size_t j) const { return {scaled.at(j), 0.5 * z.at(j) * z.at(j)}; }

R2Profile solve_R2(double nu, double z_max, double step) {
    check_r2_args(z_max, step);
    const int steps = step_count(z_max, step);
    return solve_R2(nu, z_max, steps, g1_stage_samples(z_max, steps));
}

R2Profile solve_R2(double nu, double z_max, int steps, std::span<const double> g1_stages) {
    if (steps < 1) throw std::invalid_argument("solve_R2: steps must be >= 1");
    check_r2_args(z_max, z_max / steps);
    if (g1_stages.size() != 2 * static_cast<std::size_t>(steps) + 1) {
        throw std::invalid_argument("solve_R2: g1 stage samples do not match the step count");
    }
    const double h = z_max / steps;
    auto rhs = [nu](double z, double S, double P, double g) { return -2.0 * z * P - (2.0 + nu) * S - g; };

    R2Profile out;
    out.nu = nu;
    out.step = h;
    out.z.resize(steps + 1);
    out.scaled.resize(steps + 1);
    out.scaled_derivative.resize(steps + 1);
    double S = 0.0, P = 0.0;
    out.z[0] = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double z0 = k * h, zm = z0 + 0.5 * h, z1 = (k + 1) * h;
        const double g0 = g1_stages[2 * k], gm = g1_stages[2 * k + 1], ge = g1_stages[2 * k + 2];
        const double k1s = P, k1p = rhs(z0, S, P, g0);
        const double k2s = P + 0.5 * h * k1p, k2p = rhs(zm, S + 0.5 * h * k1s, P + 0.5 * h * k1p, gm);
        const double k3s = P + 0.5 * h * k2p, k3p = rhs(zm, S + 0.5 * h * k2s, P + 0.5 * h * k2p, gm);
        const double k4s = P + h * k3p, k4p = rhs(z1, S + h * k3s, P + h * k3p, ge);
        S += h / 6.0 * (k1s + 2.0 * k2s + 2.0 * k3s + k4s);
        P += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (!std::isfinite(S) || std::abs(S) > kOverflowGuard) {
            throw std::overflow_error("solve_R2: overflow at z = " + number(z1));
        }
        out.z[k + 1] = z1;
        out.scaled[k + 1] = S;
        // R2' e^{-z^2/2} = S' + z S
        out.scaled_derivative[k + 1] = P + z1 * S;
    }
    return out;
}

NuSolution nu_fixed_point(double w, double tol, double step) {
    if (!(w >= 6.0)) throw std::invalid_argument("nu_fixed_point: w must be >= 6");
    if (!(tol > 0.0)) throw std::invalid_argument("nu_fixed_point: tol must be positive");
    const double z = std::sqrt(w);
    const int steps = step_count(z, step);
    check_r2_args(z, z / steps);
    const auto stages = g1_stage_samples(z, steps);
    const double g = stages.back();
    // scaled by e^{-w/2}: f0 -> e^{-w}, f1 -> g1, R2 -> S
    const double f0s = std::exp(-w);
    auto remainder = [&](double nu) { return solve_R2(nu, z, steps, stages).end_scaled(); };

    NuSolution sol;
    sol.w = w;
    sol.nu_first = -f0s / g;
    double nu = sol.nu_first;
    int growth = 0;
    for (int it = 1; it <= 200; ++it) {
        const double next = -(f0s + nu * nu * remainder(nu)) / g;
        const double inc = std::abs(next - nu);
        if (!sol.increments.empty() && inc > sol.increments.back()) {
            if (++growth >= 2) throw std::runtime_error("nu_fixed_point: iteration is not contracting at w = " + number(w));
        } else {
            growth = 0;
        }
        sol.increments.push_back(inc);
        nu = next;
        sol.iterations = it;
        if (inc <= tol * std::abs(nu)) break;
        if (it == 200) throw std::runtime_error("nu_fixed_point: no convergence at w = " + number(w));
    }
    sol.nu = nu;
    sol.residual = std::abs(f0s + nu * g + nu * nu * remainder(nu)) * std::exp(0.5 * w);
    sol.bound_constant = nu / (std::sqrt(w) * std::exp(-w));
    return sol;
}

double hermite_shoot(double mu, double z_end, double step) {
    if (!(z_end > 0.0)) throw std::invalid_argument("hermite_shoot: z_end must be positive");
    if (!(step > 0.0)) throw std::invalid_argument("hermite_shoot: step must be positive");
    const int steps = step_count(z_end, step);
    const double h = z_end / steps;
    double f = 1.0, g = 0.0;
    auto acc = [mu](double z, double v) { return (z * z - mu) * v; };
    for (int k = 0; k < steps; ++k) {
        const double z0 = k * h, zm = z0 + 0.5 * h, z1 = z0 + h;
        const double k1f = g, k1g = acc(z0, f);
        const double k2f = g + 0.5 * h * k1g, k2g = acc(zm, f + 0.5 * h * k1f);
        const double k3f = g + 0.5 * h * k2g, k3g = acc(zm, f + 0.5 * h * k2f);
        const double k4f = g + h * k3g, k4g = acc(z1, f + h * k3f);
        f += h / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        g += h / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    }
    return f;
}

double mu_of_w(double w, double step) {
    if (!(w >= 1.0)) throw std::invalid_argument("mu_of_w: w must be >= 1");
    const double z = std::sqrt(w);
    double lo = 1.0, hi = 3.0;
    const double f_lo = hermite_shoot(lo, z, step), f_hi = hermite_shoot(hi, z, step);
    if (!(f_lo > 0.0 && f_hi < 0.0)) {
        throw std::runtime_error("mu_of_w: no sign change of f(sqrt w) on mu in (1, 3) at w = " + number(w));
    }
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (hermite_shoot(mid, z, step) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line: need >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("fit_line: abscissae are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

double interpolate_dirichlet(const spectrum::DirichletGrid& grid, std::span<const double> values, double x) {
    const int M = grid.interior_count();
    if (static_cast<int>(values.size()) != M) throw std::invalid_argument("interpolate_dirichlet: size mismatch");
    if (M < 3) throw std::invalid_argument("interpolate_dirichlet: need at least 3 interior nodes");
    if (x <= -1.0 || x >= 1.0) return 0.0;
    const double dx = grid.spacing();
    // extended index j in [0, M+1]; j = 0 and M+1 are the boundary zeros
    auto value = [&](int j) { return (j <= 0 || j >= M + 1) ? 0.0 : values[j - 1]; };
    const double u = (x + 1.0) / dx;
    const int j0 = std::clamp(static_cast<int>(std::floor(u)) - 1, 0, M + 1 - 3);
    double result = 0.0;
    for (int a = 0; a < 4; ++a) {
        double basis = 1.0;
        for (int b = 0; b < 4; ++b) {
            if (b != a) basis *= (u - (j0 + b)) / static_cast<double>(a - b);
        }
        result += basis * value(j0 + a);
    }
    return result;
}

EigenEstimateReport check_eigen_estimates(std::span<const double> ws, const spectrum::DirichletGrid& grid, double tol,
                                          int threads) {
    for (double w : ws) {
        if (!(w >= 6.0)) throw std::invalid_argument("check_eigen_estimates: w must be >= 6, got " + number(w));
        const int need = static_cast<int>(std::ceil(40.0 * std::sqrt(w))) - 1;
        if (grid.interior_count() < need) {
            throw spectrum::ResolutionError("check_eigen_estimates: w = " + number(w) + " needs M >= " +
                                                std::to_string(need) + ", grid has " +
                                                std::to_string(grid.interior_count()),
                                            need);
        }
    }
    spectrum::SpectrumOptions options;
    options.grids = {grid.interior_count(), 2 * grid.interior_count()};
    options.tol = tol;

    EigenEstimateReport report;
    report.rows.resize(ws.size());
    parallel_for(ws.size(), threads, [&](std::size_t i) {
        const double w = ws[i];
        auto entry = spectrum::ground_state(w, options);
        const auto& p = entry.pair.vector;
        EigenEstimateRow& r = report.rows[i];
        r.w = w;
        r.lambda = entry.pair.lambda_sq;
        r.grid_error = entry.richardson_err;
        r.nu_matrix = r.lambda / w - 1.0;
        r.r1 = (r.lambda - w) / (std::pow(w, 1.5) * std::exp(-w));
        const double scale = std::pow(w, 0.25);
        r.r4_at_zero = interpolate_dirichlet(grid, p, 0.0) / scale;
        r.r4_min = r.r4_at_zero;
        r.r4_max = r.r4_at_zero;
        for (int j = 0; j < grid.interior_count(); ++j) {
            const double x = grid.node(j);
            if (std::abs(x) > 0.25) continue;
            const double ratio = p[j] / (scale * std::exp(-0.5 * w * x * x));
            r.r4_min = std::min(r.r4_min, ratio);
            r.r4_max = std::max(r.r4_max, ratio);
        }
        r.r5 = 0.0;
        for (double x0 : {0.6, 0.8, 0.95}) {
            r.r5 = std::max(r.r5, std::abs(interpolate_dirichlet(grid, p, x0)) * std::exp(w / 10.0));
        }
    });

    std::vector<double> xs, ys;
    for (const auto& r : report.rows) {
        report.r1_max = std::max(report.r1_max, std::abs(r.r1));
        if (r.lambda - r.w > 0.0) {
            xs.push_back(r.w);
            ys.push_back(std::log(r.lambda - r.w));
        }
    }
    if (xs.size() >= 2) {
        report.gap_fit = fit_line(xs, ys);
    } else {
        report.gap_fit = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    return report;
}

std::string EigenEstimateReport::to_csv() const {
    csv::Writer out{"w", "lambda", "grid_error", "nu_matrix", "r1", "r4_at_zero", "r4_min", "r4_max", "r5"};
    for (const auto& r : rows) out.row(r.w, r.lambda, r.grid_error, r.nu_matrix, r.r1, r.r4_at_zero, r.r4_min, r.r4_max, r.r5);
    return out.str();
}

std::string asymptotics_csv(const EigenEstimateReport& report, std::span<const double> nu_fixed_point,
                            std::span<const double> nu_shooting) {
    if (nu_fixed_point.size() != report.rows.size() || nu_shooting.size() != report.rows.size()) {
        throw std::invalid_argument("asymptotics_csv: one fixed-point and one shooting value per row required");
    }
    csv::Writer out{"w", "lambda", "nu_fixed_point", "nu_shooting", "nu_matrix", "r1", "r5", "gap_slope",
                    "gap_intercept"};
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const auto& r = report.rows[i];
        out.row(r.w, r.lambda, nu_fixed_point[i], nu_shooting[i], r.nu_matrix, r.r1, r.r5, report.gap_fit.slope,
                report.gap_fit.intercept);
    }
    return out.str();
}

LambdaTable build_lambda_table(int w_lo, int w_hi, const spectrum::SpectrumOptions& options) {
    if (w_hi < w_lo) throw std::invalid_argument("build_lambda_table: empty range");
    if (w_lo < 1) throw std::invalid_argument("build_lambda_table: w must be >= 1");
    const std::size_t count = static_cast<std::size_t>(w_hi - w_lo + 1);
    std::vector<double> values(count);
    spectrum::SpectrumOptions serial = options;
    serial.threads = 1;
    parallel_for(count, options.threads, [&](std::size_t i) {
        values[i] = spectrum::ground_state(w_lo + static_cast<int>(i), serial).pair.lambda_sq;
    });
    LambdaTable table;
    for (std::size_t i = 0; i < count; ++i) table[w_lo + static_cast<int>(i)] = values[i];
    return table;
}

PhaseRecord phase_derivatives(double t, double y, int w, int m, const LambdaTable& table) {
    double l[5];
    for (int d = -2; d <= 2; ++d) {
        auto it = table.find(w + d);
        if (it == table.end()) {
            throw std::out_of_range("phase_derivatives: stencil point w = " + std::to_string(w + d) + " not in table");
        }
        l[d + 2] = it->second;
    }
    PhaseRecord r;
    r.t = t;
    r.y = y;
    r.w = w;
    r.m = m;
    r.lambda_prime = (l[0] - 8.0 * l[1] + 8.0 * l[3] - l[4]) / 12.0;
    r.lambda_second = (-l[0] + 16.0 * l[1] - 30.0 * l[2] + 16.0 * l[3] - l[4]) / 12.0;
    const double two_pi_m = 2.0 * std::numbers::pi * m;
    r.value = w * y - l[2] * t - two_pi_m * w;
    r.d_w = y - r.lambda_prime * t - two_pi_m;
    r.d_ww = -r.lambda_second * t;
    return r;
}

}  // namespace grushin::asym
