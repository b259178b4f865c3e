#include "grushin/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "grushin/asymptotics.hpp"
#include "grushin/beam.hpp"
#include "grushin/csv.hpp"
#include "grushin/field.hpp"
#include "grushin/normal_form.hpp"
#include "grushin/observability.hpp"
#include "grushin/spectrum.hpp"

namespace grushin::runner {

using nlohmann::json;

namespace {

struct KindName {
    Kind kind;
    const char* name;
};

constexpr KindName kKinds[] = {
    {Kind::spectrum, "spectrum"},     {Kind::observe, "observe"},       {Kind::beam_sweep, "beam-sweep"},
    {Kind::asymptotics, "asymptotics"}, {Kind::normalform, "normalform"}, {Kind::all, "all"},
};

const std::map<int, std::string>& contract_names() {
    static const std::map<int, std::string> names{
        {1, "comparison_principle"}, {2, "weyl_bound"},           {3, "coercivity"},
        {4, "conservation"},         {5, "eigenvalue_gap"},       {6, "f1_asymptotics"},
        {7, "r2_growth"},            {8, "ground_state_localization"}, {9, "non_observability"},
        {10, "observability"},       {11, "odd_extension"},       {12, "normal_form"},
    };
    return names;
}

std::string fmt(double v) {
    std::ostringstream out;
    out.precision(6);
    out << v;
    return out.str();
}

// ---------------------------------------------------------------- config

template <typename T>
T read(const json& doc, const char* key, const T& fallback) {
    auto it = doc.find(key);
    if (it == doc.end()) return fallback;
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, std::string("wrong type: ") + e.what());
    }
}

void require(bool ok, const char* field, const std::string& message) {
    if (!ok) throw ConfigError(field, message);
}

void require_h_list(const std::vector<double>& hs, const char* field) {
    require(!hs.empty(), field, "must not be empty");
    for (double h : hs) require(h > 0.0 && h <= 0.25, field, "every h must lie in (0, 1/4]");
    for (std::size_t i = 1; i < hs.size(); ++i) require(hs[i] < hs[i - 1], field, "must be strictly decreasing");
}

void require_w_list(const std::vector<double>& ws, const char* field) {
    require(!ws.empty(), field, "must not be empty");
    for (double w : ws) require(w >= 6.0, field, "every w must be >= 6");
}

observe::ControlRegion region_of(const ExperimentConfig& c) {
    if (c.region_arcs.empty()) return observe::ControlRegion::strip_complement(1.0);
    return observe::ControlRegion(c.region_arcs);
}

int beam_grid_of(const ExperimentConfig& c) {
    if (c.beam_grid_M > 0) return c.beam_grid_M;
    int need = beam::required_interior(c.centroid_h);
    for (double h : c.beam_h) need = std::max(need, beam::required_interior(h));
    return need;
}

// ---------------------------------------------------------------- helpers

struct Context {
    const ExperimentConfig& config;
    ExperimentRecord& record;

    void write(const std::string& name, const std::string& contents) {
        csv::write_atomic(config.output_dir / name, contents);
        record.artifacts.push_back(name);
    }
};

ContractResult contract(int id, bool passed, std::string detail) {
    return {id, contract_names().at(id), "", passed, std::move(detail)};
}

double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

std::vector<int> positive_modes(int cap) {
    std::vector<int> modes;
    for (int n = 1; n <= cap; ++n) modes.push_back(n);
    return modes;
}

spectrum::SpectrumOptions spectrum_options(int M, int threads) {
    spectrum::SpectrumOptions o;
    o.grids = {M, 2 * M};
    o.threads = threads;
    return o;
}

// ---------------------------------------------------------------- experiments

std::vector<ContractResult> run_spectrum(Context& ctx) {
    const auto& c = ctx.config;
    const auto modes = positive_modes(c.mode_cap);
    auto options = spectrum_options(c.grid_M, c.threads);

    auto table = spectrum::build_table_by_count(modes, c.levels, options);
    ctx.write("spectrum.csv", table.to_csv());
    const auto violations = spectrum::verify_comparison(table);
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& [key, e] : table.entries()) {
        margin = std::min(margin, e.pair.lambda_sq - (2.0 * key.second + 1.0) * key.first + e.richardson_err);
    }

    options.keep_vectors = false;
    auto below = spectrum::build_table_below(modes, c.weyl_tau_sq, options);
    csv::Writer weyl{"n", "count", "bound"};
    int weyl_violations = 0;
    for (int n : modes) {
        const int count = spectrum::weyl_count(below, n, c.weyl_tau_sq);
        const double bound = c.weyl_tau_sq / (2.0 * n);
        if (count > bound) ++weyl_violations;
        weyl.row(n, count, bound);
    }
    ctx.write("weyl.csv", weyl.str());

    return {
        contract(1, violations.empty(),
                 "pairs=" + std::to_string(table.size()) + " violations=" + std::to_string(violations.size()) +
                     " min_margin=" + fmt(margin)),
        contract(2, weyl_violations == 0,
                 "modes=" + std::to_string(modes.size()) + " violations=" + std::to_string(weyl_violations)),
    };
}

std::vector<ContractResult> run_observe(Context& ctx) {
    const auto& c = ctx.config;
    auto basis = field::build_basis(c.basis_mode_cap, c.basis_lambda_max, spectrum::DirichletGrid(c.basis_grid_M),
                                    1e-10, c.threads);

    std::mt19937_64 rng_gap(derive_seed(c.seed, 3));
    csv::Writer gaps{"field", "coercivity_gap"};
    double min_gap = std::numeric_limits<double>::infinity();
    for (int i = 0; i < c.coercivity_fields; ++i) {
        const double gap = field::coercivity_gap(field::random_field(basis, rng_gap));
        min_gap = std::min(min_gap, gap);
        gaps.row(i, gap);
    }
    ctx.write("coercivity.csv", gaps.str());

    std::mt19937_64 rng_cons(derive_seed(c.seed, 4));
    csv::Writer cons{"field", "t", "mass_drift", "energy_drift"};
    double worst = 0.0;
    std::vector<field::ModalField> family;
    for (int i = 0; i < c.conservation_fields; ++i) {
        auto u = field::random_field(basis, rng_cons);
        const double m0 = field::mass(u), e0 = field::energy_grushin(u);
        for (double t : c.conservation_times) {
            auto v = field::evolve(u, t);
            const double dm = std::abs(field::mass(v) - m0) / m0;
            const double de = std::abs(field::energy_grushin(v) - e0) / e0;
            worst = std::max({worst, dm, de});
            cons.row(i, t, dm, de);
        }
        family.push_back(std::move(u));
    }
    ctx.write("conservation.csv", cons.str());

    const auto region = region_of(c);
    csv::Writer obs{"field", "T", "L_omega", "nt", "observed_fraction"};
    const std::size_t observed = std::min<std::size_t>(family.size(), 4);
    for (std::size_t i = 0; i < observed; ++i) {
        for (double T : c.T_list) {
            obs.row(static_cast<int>(i), T, observe::gap_length(region), c.nt,
                    observe::observed_fraction(family[i], region, T, c.nt, c.threads));
        }
    }
    ctx.write("observe.csv", obs.str());

    return {
        contract(3, min_gap >= -1e-8,
                 "fields=" + std::to_string(c.coercivity_fields) + " min_gap=" + fmt(min_gap)),
        contract(4, worst <= 1e-12, "fields=" + std::to_string(c.conservation_fields) + " max_drift=" + fmt(worst)),
    };
}

std::vector<ContractResult> run_beam_sweep(Context& ctx) {
    const auto& c = ctx.config;
    const spectrum::DirichletGrid grid(beam_grid_of(c));
    const auto region = region_of(c);

    std::vector<observe::BeamMember> family;
    for (double h : c.beam_h) {
        auto band = beam::build_ground_band(h, grid, 1e-10, c.threads);
        auto basis = beam::band_basis(band, grid);
        family.push_back({h, beam::build_beam(beam::BeamParams(h), band, basis)});
        ctx.write("beam_band_h" + csv::format(h) + ".csv", beam::band_csv(band));
    }
    auto report = observe::threshold_sweep(family, region, c.T_list, c.nt, c.threads);
    ctx.write("threshold.csv", report.to_csv());

    bool short_ok = true, long_ok = true;
    std::string short_detail, long_detail, endpoint_detail;
    int short_count = 0, long_count = 0;
    for (double T : c.T_list) {
        auto f = report.fractions_at(T);
        if (std::abs(T - report.a) <= 1e-12 * report.a) {
            endpoint_detail += " T=a:F_min=" + fmt(report.min_fraction_at(T)) + " (endpoint, not scored)";
        } else if (T < report.a) {
            ++short_count;
            const bool ok = report.strictly_decreasing_at(T) && f.back() <= f.front() / 4.0;
            short_ok = short_ok && ok;
            short_detail += " T=" + fmt(T) + ":F_first=" + fmt(f.front()) + ",F_last=" + fmt(f.back()) +
                            (report.strictly_decreasing_at(T) ? ",decreasing" : ",not_decreasing");
        } else {
            ++long_count;
            const double lo = report.min_fraction_at(T);
            long_ok = long_ok && lo >= 0.1;
            long_detail += " T=" + fmt(T) + ":F_min=" + fmt(lo);
        }
    }
    if (short_count == 0) {
        short_ok = false;
        short_detail = " no T < a in T_list";
    }
    if (long_count == 0) {
        long_ok = false;
        long_detail = " no T > a in T_list";
    }

    // centroid transport
    auto band = beam::build_ground_band(c.centroid_h, grid, 1e-10, c.threads);
    auto basis = beam::band_basis(band, grid);
    auto u = beam::build_beam(beam::BeamParams(c.centroid_h), band, basis);
    std::vector<double> ts, ys;
    csv::Writer cen{"h", "t", "center"};
    double prev = 0.0, offset = 0.0;
    for (int j = 0; j < c.centroid_samples; ++j) {
        const double t = c.centroid_t_max * j / (c.centroid_samples - 1);
        double y = beam::beam_center(u, t);
        if (j > 0) {
            while (y + offset - prev > std::numbers::pi) offset -= field::kTwoPi;
            while (y + offset - prev < -std::numbers::pi) offset += field::kTwoPi;
        }
        y += offset;
        prev = y;
        ts.push_back(t);
        ys.push_back(y);
        cen.row(c.centroid_h, t, y);
    }
    ctx.write("centroid.csv", cen.str());
    const double speed = asym::fit_line(ts, ys).slope;
    const bool speed_ok = speed >= 0.9 && speed <= 1.1;

    return {
        contract(9, short_ok, "a=" + fmt(report.a) + short_detail + endpoint_detail),
        contract(10, long_ok && speed_ok, "a=" + fmt(report.a) + long_detail + " centroid_speed=" + fmt(speed)),
    };
}

std::vector<ContractResult> run_asymptotics(Context& ctx) {
    const auto& c = ctx.config;
    const spectrum::DirichletGrid grid(c.asym_grid_M);

    // 5: gap regression and triple agreement
    auto est = asym::check_eigen_estimates(c.w_list, grid, 1e-10, c.threads);
    std::vector<double> fp, shoot;
    for (const auto& r : est.rows) {
        fp.push_back(asym::nu_fixed_point(r.w).nu);
        shoot.push_back(asym::mu_of_w(r.w) - 1.0);
    }
    ctx.write("asymptotics.csv", asym::asymptotics_csv(est, fp, shoot));
    ctx.write("eigen_estimates.csv", est.to_csv());
    const double slope = est.gap_fit.slope;
    bool slope_ok = slope >= -1.25 && slope <= -0.85;
    double worst_triple = 0.0;
    bool triple_found = true;
    for (double w : c.triple_w) {
        auto it = std::find_if(est.rows.begin(), est.rows.end(), [w](const auto& r) { return r.w == w; });
        if (it == est.rows.end()) {
            triple_found = false;
            continue;
        }
        const std::size_t i = static_cast<std::size_t>(it - est.rows.begin());
        worst_triple = std::max({worst_triple, rel_diff(it->nu_matrix, shoot[i]), rel_diff(it->nu_matrix, fp[i]),
                                 rel_diff(shoot[i], fp[i])});
    }
    const bool triple_ok = triple_found && worst_triple <= 0.05;

    // 6: f1 asymptotics
    auto scaled = [](double z) { return asym::g1(z) * 4.0 * z / std::sqrt(std::numbers::pi); };
    csv::Writer f1csv{"z", "g1", "g1_times_4z_over_sqrt_pi"};
    bool negative = true;
    for (int j = 1; j <= 3000; ++j) {
        const double z = 0.01 * j;
        const double g = asym::g1(z);
        negative = negative && g < 0.0;
        if (j % 50 == 0) f1csv.row(z, g, scaled(z));
    }
    ctx.write("f1.csv", f1csv.str());
    const double d5 = std::abs(scaled(5.0) + 1.0), d20 = std::abs(scaled(20.0) + 1.0);
    const bool f1_ok = d5 <= 0.12 && d20 <= 0.012 && negative;

    // 7: R2 growth, stable under step halving
    csv::Writer r2csv{"nu", "step", "z_at_max", "max_scaled"};
    bool r2_ok = true;
    std::string r2_detail;
    for (double nu : {0.0, 1e-4}) {
        double maxima[2];
        for (int k = 0; k < 2; ++k) {
            const double step = 1e-3 / (1 << k);
            auto p = asym::solve_R2(nu, 30.0, step);
            double best = 0.0, z_best = 0.0;
            for (std::size_t j = 0; j < p.z.size(); ++j) {
                if (p.z[j] < 5.0 - 1e-12) continue;
                const double v = std::abs(p.scaled[j]) * std::pow(p.z[j], 1.0 - nu);
                if (v > best) {
                    best = v;
                    z_best = p.z[j];
                }
            }
            maxima[k] = best;
            r2csv.row(nu, step, z_best, best);
        }
        const double change = std::abs(maxima[1] / maxima[0] - 1.0);
        r2_ok = r2_ok && std::isfinite(maxima[0]) && std::isfinite(maxima[1]) && change <= 0.1;
        r2_detail += " nu=" + fmt(nu) + ":max=" + fmt(maxima[0]) + ",halving_change=" + fmt(change);
    }
    ctx.write("r2_growth.csv", r2csv.str());

    // 8: localization
    auto loc = asym::check_eigen_estimates(c.localization_w, grid, 1e-10, c.threads);
    ctx.write("eigen_localization.csv", loc.to_csv());
    bool r5_ok = true;
    double r5_max = 0.0;
    for (const auto& r : loc.rows) {
        r5_max = std::max(r5_max, r.r5);
        r5_ok = r5_ok && r.r5 <= 1.0;
    }
    const double gauss = std::pow(std::numbers::pi, -0.25);
    const auto& top = *std::max_element(loc.rows.begin(), loc.rows.end(),
                                        [](const auto& a, const auto& b) { return a.w < b.w; });
    const double r4_dev = std::abs(top.r4_at_zero / gauss - 1.0);

    // phase derivatives (report only)
    auto table = asym::build_lambda_table(c.phase_w - 2, c.phase_w + 2, spectrum_options(c.asym_grid_M, c.threads));
    csv::Writer ph{"t", "y", "w", "m", "value", "d_w", "d_ww", "lambda_prime", "lambda_second"};
    for (int m : {0, 1}) {
        for (double t : {0.0, 1.0}) {
            auto r = asym::phase_derivatives(t, 0.0, c.phase_w, m, table);
            ph.row(r.t, r.y, r.w, r.m, r.value, r.d_w, r.d_ww, r.lambda_prime, r.lambda_second);
        }
    }
    ctx.write("phase.csv", ph.str());

    return {
        contract(5, slope_ok && triple_ok,
                 "slope=" + fmt(slope) + (slope_ok ? "" : " (outside [-1.25,-0.85])") +
                     " max_pairwise_nu_rel=" + fmt(worst_triple)),
        contract(6, f1_ok,
                 "dev(5)=" + fmt(d5) + " dev(20)=" + fmt(d20) + (negative ? " negative" : " sign_violation")),
        contract(7, r2_ok, r2_detail.substr(1)),
        contract(8, r5_ok && r4_dev <= 0.05,
                 "max_r5=" + fmt(r5_max) + " r4(0,w=" + fmt(top.w) + ")=" + fmt(top.r4_at_zero) +
                     " rel_dev=" + fmt(r4_dev)),
    };
}

std::vector<ContractResult> run_normalform(Context& ctx) {
    const auto& c = ctx.config;
    const int M = c.nf_nx / 2 - 1;
    const spectrum::DirichletGrid grid(M);

    // odd extension norm doubling on random Dirichlet fields
    std::mt19937_64 rng(derive_seed(c.seed, 11));
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst_norm = 0.0;
    csv::Writer ext{"check", "value"};
    for (int i = 0; i < 5; ++i) {
        field::GridField g(grid, {-2, -1, 0, 1, 2});
        for (std::size_t k = 0; k < g.modes().size(); ++k) {
            for (auto& v : g.mode_values(k)) v = {normal(rng), normal(rng)};
        }
        const double ratio = normal_form::odd_extend(g).norm_sq() / (2.0 * field::grid_mass(g));
        worst_norm = std::max(worst_norm, std::abs(ratio - 1.0));
    }
    ext.row("norm_doubling_max_rel_dev", worst_norm);

    auto entry = spectrum::ground_state(c.nf_eigen_n, spectrum_options(M, c.threads));
    field::GridField phi(grid, {c.nf_eigen_n});
    auto vals = phi.mode_values(0);
    for (int i = 0; i < M; ++i) vals[i] = entry.pair.vector[i];
    auto ephi = normal_form::odd_extend(phi);
    auto pa = normal_form::apply_Pa(ephi);
    double res = 0.0;
    for (int j = 0; j < ephi.nx(); ++j) res += std::norm(pa.coefficients(0)[j] + entry.pair.lambda_sq * ephi.coefficients(0)[j]);
    const double eig_res = std::sqrt(2.0 * std::numbers::pi * normal_form::kPeriod * res) / std::sqrt(field::grid_mass(phi));
    ext.row("eigen_residual", eig_res);
    ctx.write("extension.csv", ext.str());

    auto sweep = normal_form::residual_sweep(c.nf_h, c.eps, derive_seed(c.seed, 12), c.nf_seeds, c.nf_nx, c.threads);
    ctx.write("residual_sweep.csv", sweep.to_csv());
    std::string detail;
    bool monotone = true;
    double prev = std::numeric_limits<double>::infinity();
    for (double h : c.nf_h) {
        const double med = sweep.median_ratio(h);
        monotone = monotone && med <= prev;
        prev = med;
        detail += " median(h=" + fmt(h) + ")=" + fmt(med);
    }
    // the h = 2^-6 bound, or the closest configured h
    const double target = *std::min_element(c.nf_h.begin(), c.nf_h.end(), [](double a, double b) {
        return std::abs(std::log2(a) + 6.0) < std::abs(std::log2(b) + 6.0);
    });
    const bool bound_ok = sweep.median_ratio(target) <= 0.25;

    return {
        contract(11, worst_norm <= 1e-10 && eig_res <= 1e-4,
                 "norm_dev=" + fmt(worst_norm) + " eigen_residual=" + fmt(eig_res)),
        contract(12, bound_ok && monotone, detail.substr(1) + (monotone ? " non-increasing" : " not monotone")),
    };
}

using Experiment = std::function<std::vector<ContractResult>(Context&)>;

struct ExperimentEntry {
    Kind kind;
    Experiment body;
};

const std::vector<ExperimentEntry>& experiments() {
    static const std::vector<ExperimentEntry> list{
        {Kind::spectrum, run_spectrum},       {Kind::observe, run_observe},
        {Kind::beam_sweep, run_beam_sweep},   {Kind::asymptotics, run_asymptotics},
        {Kind::normalform, run_normalform},
    };
    return list;
}

}  // namespace

// ---------------------------------------------------------------- public API

std::optional<Kind> parse_kind(std::string_view name) {
    for (const auto& k : kKinds) {
        if (name == k.name) return k.kind;
    }
    return std::nullopt;
}

std::string kind_name(Kind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.name;
    }
    return "?";
}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument("config field '" + field + "': " + message), field_(std::move(field)) {}

void ExperimentConfig::validate() const {
    require(threads >= 0, "threads", "must be >= 0");
    require(!output_dir.empty(), "output_dir", "must not be empty");

    require(grid_M >= 16, "grid_M", "must be >= 16");
    require(mode_cap >= 1, "mode_cap", "must be >= 1");
    require(levels >= 1 && levels <= grid_M / 4, "levels", "must lie in [1, grid_M/4]");
    require(weyl_tau_sq > 0.0, "weyl_tau_sq", "must be positive");

    require(basis_mode_cap >= 1, "basis_mode_cap", "must be >= 1");
    require(basis_lambda_max > std::numbers::pi * std::numbers::pi / 4.0, "basis_lambda_max", "must exceed pi^2/4");
    require(basis_grid_M >= 16, "basis_grid_M", "must be >= 16");
    require(coercivity_fields >= 1, "coercivity_fields", "must be >= 1");
    require(conservation_fields >= 1, "conservation_fields", "must be >= 1");
    require(!conservation_times.empty(), "conservation_times", "must not be empty");

    try {
        (void)region_of(*this);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("region_arcs", e.what());
    }
    require(!T_list.empty(), "T_list", "must not be empty");
    for (double T : T_list) require(T > 0.0, "T_list", "every T must be positive");
    require(nt >= 33 && nt % 2 == 1, "nt", "must be odd and >= 33, got " + std::to_string(nt));

    require_h_list(beam_h, "beam_h");
    require(centroid_h > 0.0 && centroid_h <= 0.25, "centroid_h", "must lie in (0, 1/4]");
    if (beam_grid_M != 0) {
        int need = beam::required_interior(centroid_h);
        for (double h : beam_h) need = std::max(need, beam::required_interior(h));
        require(beam_grid_M >= need, "beam_grid_M", "must be 0 or >= " + std::to_string(need) + " for the smallest h");
    }
    require(centroid_t_max > 0.0, "centroid_t_max", "must be positive");
    require(centroid_samples >= 2, "centroid_samples", "must be >= 2");

    require_w_list(w_list, "w_list");
    require(w_list.size() >= 2, "w_list", "needs at least two values for the regression");
    require_w_list(triple_w, "triple_w");
    for (double w : triple_w) {
        require(std::find(w_list.begin(), w_list.end(), w) != w_list.end(), "triple_w", "every value must appear in w_list");
    }
    require_w_list(localization_w, "localization_w");
    double w_max = 0.0;
    for (double w : w_list) w_max = std::max(w_max, w);
    for (double w : localization_w) w_max = std::max(w_max, w);
    const int need = static_cast<int>(std::ceil(40.0 * std::sqrt(w_max))) - 1;
    require(asym_grid_M >= need, "asym_grid_M", "must be >= " + std::to_string(need) + " to resolve w = " + fmt(w_max));
    require(phase_w >= 3, "phase_w", "must be >= 3");

    require_h_list(nf_h, "nf_h");
    require(eps > 0.0 && eps < 0.25, "eps", "must lie in (0, 1/4)");
    require(nf_seeds >= 1, "nf_seeds", "must be >= 1");
    require(nf_nx >= 64 && nf_nx % 2 == 0, "nf_nx", "must be even and >= 64");
    require(nf_eigen_n >= 1, "nf_eigen_n", "must be >= 1");
}

json ExperimentConfig::to_json() const {
    json arcs = json::array();
    for (const auto& [c, d] : region_arcs) arcs.push_back({c, d});
    return {
        {"schema_version", kSchemaVersion},
        {"kind", kind_name(kind)},
        {"seed", seed},
        {"threads", threads},
        {"output_dir", output_dir.string()},
        {"grid_M", grid_M},
        {"mode_cap", mode_cap},
        {"levels", levels},
        {"weyl_tau_sq", weyl_tau_sq},
        {"basis_mode_cap", basis_mode_cap},
        {"basis_lambda_max", basis_lambda_max},
        {"basis_grid_M", basis_grid_M},
        {"coercivity_fields", coercivity_fields},
        {"conservation_fields", conservation_fields},
        {"conservation_times", conservation_times},
        {"region_arcs", arcs},
        {"T_list", T_list},
        {"nt", nt},
        {"beam_h", beam_h},
        {"beam_grid_M", beam_grid_M},
        {"centroid_h", centroid_h},
        {"centroid_t_max", centroid_t_max},
        {"centroid_samples", centroid_samples},
        {"w_list", w_list},
        {"triple_w", triple_w},
        {"localization_w", localization_w},
        {"asym_grid_M", asym_grid_M},
        {"phase_w", phase_w},
        {"nf_h", nf_h},
        {"eps", eps},
        {"nf_seeds", nf_seeds},
        {"nf_nx", nf_nx},
        {"nf_eigen_n", nf_eigen_n},
    };
}

ExperimentConfig ExperimentConfig::from_json(const json& doc) {
    if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
    ExperimentConfig c;
    const json known = c.to_json();
    for (const auto& [key, value] : doc.items()) {
        if (!known.contains(key)) throw ConfigError(key, "unknown key");
    }
    if (!doc.contains("schema_version")) throw ConfigError("schema_version", "missing");
    if (read<int>(doc, "schema_version", 0) != kSchemaVersion) {
        throw ConfigError("schema_version", "unsupported, expected " + std::to_string(kSchemaVersion));
    }
    if (doc.contains("kind")) {
        auto k = parse_kind(read<std::string>(doc, "kind", ""));
        if (!k) throw ConfigError("kind", "unknown experiment kind");
        c.kind = *k;
    }
    c.seed = read(doc, "seed", c.seed);
    c.threads = read(doc, "threads", c.threads);
    c.output_dir = read<std::string>(doc, "output_dir", c.output_dir.string());
    c.grid_M = read(doc, "grid_M", c.grid_M);
    c.mode_cap = read(doc, "mode_cap", c.mode_cap);
    c.levels = read(doc, "levels", c.levels);
    c.weyl_tau_sq = read(doc, "weyl_tau_sq", c.weyl_tau_sq);
    c.basis_mode_cap = read(doc, "basis_mode_cap", c.basis_mode_cap);
    c.basis_lambda_max = read(doc, "basis_lambda_max", c.basis_lambda_max);
    c.basis_grid_M = read(doc, "basis_grid_M", c.basis_grid_M);
    c.coercivity_fields = read(doc, "coercivity_fields", c.coercivity_fields);
    c.conservation_fields = read(doc, "conservation_fields", c.conservation_fields);
    c.conservation_times = read(doc, "conservation_times", c.conservation_times);
    c.region_arcs = read(doc, "region_arcs", c.region_arcs);
    c.T_list = read(doc, "T_list", c.T_list);
    c.nt = read(doc, "nt", c.nt);
    c.beam_h = read(doc, "beam_h", c.beam_h);
    c.beam_grid_M = read(doc, "beam_grid_M", c.beam_grid_M);
    c.centroid_h = read(doc, "centroid_h", c.centroid_h);
    c.centroid_t_max = read(doc, "centroid_t_max", c.centroid_t_max);
    c.centroid_samples = read(doc, "centroid_samples", c.centroid_samples);
    c.w_list = read(doc, "w_list", c.w_list);
    c.triple_w = read(doc, "triple_w", c.triple_w);
    c.localization_w = read(doc, "localization_w", c.localization_w);
    c.asym_grid_M = read(doc, "asym_grid_M", c.asym_grid_M);
    c.phase_w = read(doc, "phase_w", c.phase_w);
    c.nf_h = read(doc, "nf_h", c.nf_h);
    c.eps = read(doc, "eps", c.eps);
    c.nf_seeds = read(doc, "nf_seeds", c.nf_seeds);
    c.nf_nx = read(doc, "nf_nx", c.nf_nx);
    c.nf_eigen_n = read(doc, "nf_eigen_n", c.nf_eigen_n);
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    return ExperimentConfig::from_json(doc);
}

bool RunSummary::all_passed() const {
    for (const auto& e : experiments) {
        if (e.error) return false;
    }
    return !contracts.empty() &&
           std::all_of(contracts.begin(), contracts.end(), [](const auto& c) { return c.passed; });
}

json RunSummary::to_json() const {
    json cs = json::array();
    for (const auto& c : contracts) {
        cs.push_back({{"id", c.id}, {"name", c.name}, {"experiment", c.experiment}, {"passed", c.passed},
                      {"detail", c.detail}});
    }
    json es = json::array();
    for (const auto& e : experiments) {
        json rec{{"name", e.name}, {"wall_seconds", e.wall_seconds}, {"artifacts", e.artifacts}};
        rec["error"] = e.error ? json(*e.error) : json(nullptr);
        es.push_back(rec);
    }
    return {{"schema_version", kSchemaVersion},
            {"defaults_version", kDefaultsVersion},
            {"kind", kind},
            {"seed", seed},
            {"passed", all_passed()},
            {"contracts", cs},
            {"experiments", es},
            {"wall_seconds", wall_seconds}};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<int> contracts_of(Kind kind) {
    switch (kind) {
        case Kind::spectrum: return {1, 2};
        case Kind::observe: return {3, 4};
        case Kind::beam_sweep: return {9, 10};
        case Kind::asymptotics: return {5, 6, 7, 8};
        case Kind::normalform: return {11, 12};
        case Kind::all: return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
    }
    return {};
}

RunSummary run(const ExperimentConfig& config) {
    config.validate();
    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    RunSummary summary;
    summary.kind = kind_name(config.kind);
    summary.seed = config.seed;
    std::filesystem::create_directories(config.output_dir);

    for (const auto& entry : experiments()) {
        if (config.kind != Kind::all && config.kind != entry.kind) continue;
        ExperimentRecord record;
        record.name = kind_name(entry.kind);
        const auto t0 = clock::now();
        Context ctx{config, record};
        std::vector<ContractResult> results;
        try {
            results = entry.body(ctx);
        } catch (const std::exception& e) {
            record.error = e.what();
            results.clear();
            for (int id : contracts_of(entry.kind)) results.push_back(contract(id, false, std::string("error: ") + e.what()));
        }
        record.wall_seconds = std::chrono::duration<double>(clock::now() - t0).count();
        for (auto& r : results) {
            r.experiment = record.name;
            summary.contracts.push_back(std::move(r));
        }
        summary.experiments.push_back(std::move(record));
    }
    std::sort(summary.contracts.begin(), summary.contracts.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    summary.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
    csv::write_atomic(config.output_dir / "summary.json", summary.to_json().dump(2) + "\n");
    return summary;
}

}  // namespace grushin::runner
