#include "grushin/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "grushin/csv.hpp"
#include "grushin/parallel.hpp"

namespace grushin::spectrum {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMinInterior = 16;
constexpr int kInverseIterations = 4;
constexpr int kMaxRestarts = 3;

double gershgorin_upper(const TridiagonalOperator& op) {
    double hi = -std::numeric_limits<double>::infinity();
    const int n = op.size();
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(op.offdiag[i - 1]);
        if (i + 1 < n) r += std::abs(op.offdiag[i]);
        hi = std::max(hi, op.diag[i] + r);
    }
    return hi;
}

double gershgorin_lower(const TridiagonalOperator& op) {
    double lo = std::numeric_limits<double>::infinity();
    const int n = op.size();
    for (int i = 0; i < n; ++i) {
        double r = 0.0;
        if (i > 0) r += std::abs(op.offdiag[i - 1]);
        if (i + 1 < n) r += std::abs(op.offdiag[i]);
        lo = std::min(lo, op.diag[i] - r);
    }
    return lo;
}

// LU factorization of T - sigma*I with partial pivoting (the dgttrf layout).
class ShiftedFactor {
public:
    ShiftedFactor(const TridiagonalOperator& op, double sigma, double norm) {
        const int n = op.size();
        dl_.assign(op.offdiag.begin(), op.offdiag.end());
        du_.assign(op.offdiag.begin(), op.offdiag.end());
        du2_.assign(std::max(n - 2, 0), 0.0);
        d_.resize(n);
        pivot_.assign(std::max(n - 1, 0), false);
        for (int i = 0; i < n; ++i) d_[i] = op.diag[i] - sigma;
        const double tiny = kEps * norm;
        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(d_[i]) >= std::abs(dl_[i])) {
                if (d_[i] == 0.0) d_[i] = tiny;
                double fact = dl_[i] / d_[i];
                dl_[i] = fact;
                d_[i + 1] -= fact * du_[i];
            } else {
                double fact = d_[i] / dl_[i];
                d_[i] = dl_[i];
                dl_[i] = fact;
                double temp = du_[i];
                du_[i] = d_[i + 1];
                d_[i + 1] = temp - fact * d_[i + 1];
                if (i + 2 < n) {
                    du2_[i] = du_[i + 1];
                    du_[i + 1] = -fact * du_[i + 1];
                }
                pivot_[i] = true;
            }
        }
        if (n > 0 && d_[n - 1] == 0.0) d_[n - 1] = tiny;
    }

    void solve(std::vector<double>& b) const {
        const int n = static_cast<int>(d_.size());
        for (int i = 0; i + 1 < n; ++i) {
            if (!pivot_[i]) {
                b[i + 1] -= dl_[i] * b[i];
            } else {
                double temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl_[i] * b[i];
            }
        }
        b[n - 1] /= d_[n - 1];
        if (n > 1) b[n - 2] = (b[n - 2] - du_[n - 2] * b[n - 1]) / d_[n - 2];
        for (int i = n - 3; i >= 0; --i) b[i] = (b[i] - du_[i] * b[i + 1] - du2_[i] * b[i + 2]) / d_[i];
    }

private:
    std::vector<double> dl_, d_, du_, du2_;
    std::vector<bool> pivot_;
};

double norm2(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void scale(std::vector<double>& v, double f) {
    for (double& x : v) x *= f;
}

double residual_norm(const TridiagonalOperator& op, const std::vector<double>& v, double sigma) {
    const int n = op.size();
    double s = 0.0;
    for (int i = 0; i < n; ++i) {
        double r = (op.diag[i] - sigma) * v[i];
        if (i > 0) r += op.offdiag[i - 1] * v[i - 1];
        if (i + 1 < n) r += op.offdiag[i] * v[i + 1];
        s += r * r;
    }
    return std::sqrt(s);
}

// Modified Gram-Schmidt against already accepted vectors (Euclidean; all
// vectors share the same grid weight).
void orthogonalize(std::vector<double>& v, const std::vector<std::vector<double>>& basis) {
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) {
            double dot = 0.0, qq = 0.0;
            for (std::size_t i = 0; i < v.size(); ++i) {
                dot += v[i] * q[i];
                qq += q[i] * q[i];
            }
            double c = dot / qq;
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * q[i];
        }
    }
}

}  // namespace

DirichletGrid::DirichletGrid(int interior_count) : interior_count_(interior_count) {
    if (interior_count < 1) throw std::invalid_argument("DirichletGrid: interior_count must be positive");
    spacing_ = 2.0 / (interior_count + 1);
}

std::vector<double> DirichletGrid::nodes() const {
    std::vector<double> x(interior_count_);
    for (int i = 0; i < interior_count_; ++i) x[i] = node(i);
    return x;
}

ConvergenceError::ConvergenceError(int mode_n, int level_m)
    : std::runtime_error("inverse iteration failed to converge for (n=" + std::to_string(mode_n) +
                         ", m=" + std::to_string(level_m) + ")"),
      mode_n_(mode_n),
      level_m_(level_m) {}

TridiagonalOperator tridiagonal_entries(double frequency, const DirichletGrid& grid) {
    TridiagonalOperator op;
    op.frequency = frequency;
    op.grid = grid;
    const int m = grid.interior_count();
    const double dx = grid.spacing();
    const double inv = 1.0 / (dx * dx);
    op.diag.resize(m);
    op.potential.resize(m);
    op.offdiag.assign(std::max(m - 1, 0), -inv);
    const double w2 = frequency * frequency;
    for (int i = 0; i < m; ++i) {
        double x = grid.node(i);
        op.potential[i] = w2 * x * x;
        op.diag[i] = 2.0 * inv + op.potential[i];
    }
    return op;
}

TridiagonalOperator assemble_operator(double frequency, const DirichletGrid& grid) {
    if (grid.interior_count() < kMinInterior) {
        throw ResolutionError("assemble_operator: grid has " + std::to_string(grid.interior_count()) +
                                  " interior nodes, at least 16 required",
                              kMinInterior);
    }
    return tridiagonal_entries(frequency, grid);
}

int sturm_count(const TridiagonalOperator& op, double x) {
    const int n = op.size();
    const double tiny = kEps * std::max(1.0, std::abs(op.diag.empty() ? 1.0 : op.diag[0]));
    int count = 0;
    double q = op.diag[0] - x;
    for (int i = 0;; ++i) {
        if (q == 0.0) q = -tiny;
        if (q < 0.0) ++count;
        if (i + 1 >= n) break;
        double e = op.offdiag[i];
        q = op.diag[i + 1] - x - e * e / q;
    }
    return count;
}

double rayleigh_quotient(const TridiagonalOperator& op, std::span<const double> v) {
    const int n = op.size();
    const double dx = op.grid.spacing();
    double kinetic = 0.0, potential = 0.0, mass = 0.0;
    double prev = 0.0;
    for (int i = 0; i < n; ++i) {
        double d = v[i] - prev;
        kinetic += d * d;
        potential += op.potential[i] * v[i] * v[i];
        mass += v[i] * v[i];
        prev = v[i];
    }
    kinetic += prev * prev;
    return (kinetic / (dx * dx) + potential) / mass;
}

std::vector<OscillatorEigenpair> eigen_lowest(const TridiagonalOperator& op, int count, double tol) {
    const int n = op.size();
    if (count < 1 || count > n / 4) {
        throw std::invalid_argument("eigen_lowest: count must lie in [1, M/4], got " + std::to_string(count));
    }
    if (!(tol > 0.0)) throw std::invalid_argument("eigen_lowest: tol must be positive");

    const int mode_n = static_cast<int>(std::lround(op.frequency));
    const double upper = gershgorin_upper(op);
    const double norm = std::max(std::abs(upper), std::abs(gershgorin_lower(op)));
    const double weight = std::sqrt(op.grid.spacing());

    std::vector<OscillatorEigenpair> result;
    std::vector<std::vector<double>> accepted;
    result.reserve(count);
    double lo = gershgorin_lower(op);

    for (int k = 0; k < count; ++k) {
        // Bracket lambda_k: sturm_count(lo) <= k < sturm_count(hi).
        double step = 0.5 * std::max(1.0, std::abs(lo));
        double hi = std::min(lo + step, upper);
        while (sturm_count(op, hi) < k + 1 && hi < upper) {
            step *= 2.0;
            hi = std::min(lo + step, upper);
        }
        for (;;) {
            double width = hi - lo;
            if (width <= tol * std::max({std::abs(lo), std::abs(hi), 1e-300})) break;
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (sturm_count(op, mid) >= k + 1) hi = mid; else lo = mid;
        }
        const double sigma = 0.5 * (lo + hi);
        const double bracket = hi - lo;

        ShiftedFactor factor(op, sigma, norm);
        std::vector<double> v;
        bool converged = false;
        const double accept = 1e3 * (bracket + kEps * norm) * std::sqrt(static_cast<double>(n));
        for (int restart = 0; restart <= kMaxRestarts && !converged; ++restart) {
            std::mt19937_64 rng(0x9E3779B97F4A7C15ULL ^ (static_cast<unsigned long long>(k) << 8) ^ restart);
            std::uniform_real_distribution<double> dist(0.5, 1.5);
            v.assign(n, 0.0);
            for (double& x : v) x = dist(rng);
            for (int it = 0; it < kInverseIterations; ++it) {
                factor.solve(v);
                orthogonalize(v, accepted);
                double nv = norm2(v);
                if (!(nv > 0.0) || !std::isfinite(nv)) break;
                scale(v, 1.0 / nv);
            }
            double nv = norm2(v);
            if (std::isfinite(nv) && nv > 0.0 && residual_norm(op, v, sigma) <= accept) converged = true;
        }
        if (!converged) throw ConvergenceError(mode_n, k);

        double lambda = sigma;
        double rq = rayleigh_quotient(op, v);
        if (std::abs(rq - sigma) <= std::max(10.0 * bracket, 100.0 * kEps * norm)) lambda = rq;

        // Sign: ground state positive at the midpoint, excited states positive
        // at the first interior node.
        int probe = (k == 0) ? (n - 1) / 2 : 0;
        if (k != 0) {
            while (probe < n - 1 && v[probe] == 0.0) ++probe;
        }
        if (v[probe] < 0.0) scale(v, -1.0);
        accepted.push_back(v);

        OscillatorEigenpair pair;
        pair.mode_n = mode_n;
        pair.level_m = k;
        pair.lambda_sq = lambda;
        pair.vector = v;
        scale(pair.vector, 1.0 / weight);
        result.push_back(std::move(pair));
    }
    return result;
}

std::vector<double> whole_line_levels(int n, int count) {
    if (n == 0) throw std::invalid_argument("whole_line_levels: n = 0 has no discrete whole-line spectrum");
    if (count < 0) throw std::invalid_argument("whole_line_levels: negative count");
    std::vector<double> out(count);
    for (int j = 0; j < count; ++j) out[j] = (2.0 * j + 1.0) * std::abs(n);
    return out;
}

Extrapolation richardson(std::span<const double> values, std::span<const double> spacings) {
    if (values.size() != spacings.size() || values.empty()) {
        throw std::invalid_argument("richardson: need matching, nonempty value and spacing lists");
    }
    const std::size_t k = values.size();
    if (k == 1) return {values[0], 0.0};
    std::vector<double> h2(k);
    for (std::size_t i = 0; i < k; ++i) h2[i] = spacings[i] * spacings[i];
    std::vector<double> p(values.begin(), values.end());
    double last_change = 0.0;
    for (std::size_t col = 1; col < k; ++col) {
        for (std::size_t i = k - 1; i >= col; --i) {
            double a = h2[i - col], b = h2[i];
            double next = (a * p[i] - b * p[i - 1]) / (a - b);
            if (i == k - 1) last_change = next - p[i];
            p[i] = next;
            if (i == col) break;
        }
    }
    return {p[k - 1], std::abs(last_change)};
}

const TableEntry& SpectrumTable::at(int n, int m) const {
    auto it = entries_.find({n, m});
    if (it == entries_.end()) {
        throw std::out_of_range("SpectrumTable: no entry (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")");
    }
    return it->second;
}

std::vector<const TableEntry*> SpectrumTable::mode(int n) const {
    std::vector<const TableEntry*> out;
    for (auto it = entries_.lower_bound({n, 0}); it != entries_.end() && it->first.first == n; ++it) {
        out.push_back(&it->second);
    }
    return out;
}

std::vector<int> SpectrumTable::modes() const {
    std::vector<int> out;
    for (const auto& [key, entry] : entries_) {
        if (out.empty() || out.back() != key.first) out.push_back(key.first);
    }
    return out;
}

double SpectrumTable::coverage(int n) const {
    auto it = coverage_.find(n);
    return it == coverage_.end() ? -std::numeric_limits<double>::infinity() : it->second;
}

void SpectrumTable::insert(TableEntry entry) {
    auto key = std::make_pair(entry.pair.mode_n, entry.pair.level_m);
    entries_[key] = std::move(entry);
}

void SpectrumTable::set_lambda_sq(int n, int m, double lambda_sq) {
    auto it = entries_.find({n, m});
    if (it == entries_.end()) throw std::out_of_range("SpectrumTable::set_lambda_sq: missing entry");
    it->second.pair.lambda_sq = lambda_sq;
}

std::string SpectrumTable::to_csv() const {
    csv::Writer w{"n", "m", "lambda_sq", "richardson_err", "grid_M"};
    for (const auto& [key, entry] : entries_) {
        w.row(key.first, key.second, entry.pair.lambda_sq, entry.richardson_err, grid_.interior_count());
    }
    return w.str();
}

namespace {

void validate_options(const SpectrumOptions& options) {
    if (options.grids.empty()) throw std::invalid_argument("SpectrumOptions: grid list is empty");
    for (int m : options.grids) {
        if (m < kMinInterior) throw ResolutionError("SpectrumOptions: grid below 16 interior nodes", kMinInterior);
    }
}

// Extrapolated levels 0..count-1 of L_w across all option grids.
std::vector<TableEntry> extrapolated_levels(double frequency, int count, const SpectrumOptions& options) {
    const std::size_t g = options.grids.size();
    std::vector<std::vector<OscillatorEigenpair>> per_grid(g);
    std::vector<double> spacings(g);
    for (std::size_t j = 0; j < g; ++j) {
        DirichletGrid grid(options.grids[j]);
        spacings[j] = grid.spacing();
        per_grid[j] = eigen_lowest(assemble_operator(frequency, grid), count, options.tol);
    }
    std::vector<TableEntry> out(count);
    std::vector<double> values(g);
    for (int k = 0; k < count; ++k) {
        for (std::size_t j = 0; j < g; ++j) values[j] = per_grid[j][k].lambda_sq;
        auto ex = richardson(values, spacings);
        out[k].pair = std::move(per_grid[0][k]);
        out[k].pair.lambda_sq = ex.value;
        out[k].richardson_err = ex.error;
        if (!options.keep_vectors) out[k].pair.vector.clear();
    }
    return out;
}

template <typename PerMode>
SpectrumTable assemble_table(std::span<const int> modes, const SpectrumOptions& options, PerMode&& per_mode) {
    validate_options(options);
    // L_n depends on n^2 only: solve each |n| once.
    std::vector<int> distinct;
    for (int n : modes) distinct.push_back(std::abs(n));
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    std::vector<std::pair<std::vector<TableEntry>, double>> solved(distinct.size());
    parallel_for(distinct.size(), options.threads, [&](std::size_t i) { solved[i] = per_mode(distinct[i]); });

    SpectrumTable table{DirichletGrid(options.grids.front())};
    for (int n : modes) {
        auto idx = std::lower_bound(distinct.begin(), distinct.end(), std::abs(n)) - distinct.begin();
        for (TableEntry e : solved[idx].first) {
            e.pair.mode_n = n;
            table.insert(std::move(e));
        }
        table.set_coverage(n, solved[idx].second);
    }
    return table;
}

}  // namespace

SpectrumTable build_table_by_count(std::span<const int> modes, int count, const SpectrumOptions& options) {
    return assemble_table(modes, options, [&](int n) {
        auto levels = extrapolated_levels(n, count, options);
        double cover = levels.back().pair.lambda_sq;
        return std::make_pair(std::move(levels), cover);
    });
}

SpectrumTable build_table_below(std::span<const int> modes, double lambda_max, const SpectrumOptions& options) {
    return assemble_table(modes, options, [&](int n) {
        DirichletGrid base(options.grids.front());
        int count = sturm_count(assemble_operator(n, base), lambda_max) + 1;
        const int cap = base.interior_count() / 4;
        for (;;) {
            if (count > cap) {
                throw ResolutionError("build_table_below: lambda_max requires more than M/4 levels on the base grid",
                                      4 * count);
            }
            auto levels = extrapolated_levels(n, count, options);
            if (levels.back().pair.lambda_sq > lambda_max) {
                std::vector<TableEntry> kept;
                for (auto& e : levels) {
                    if (e.pair.lambda_sq <= lambda_max) kept.push_back(std::move(e));
                }
                return std::make_pair(std::move(kept), lambda_max);
            }
            count += 2;
        }
    });
}

TableEntry ground_state(double frequency, const SpectrumOptions& options) {
    validate_options(options);
    return extrapolated_levels(frequency, 1, options).front();
}

std::vector<ComparisonViolation> verify_comparison(const SpectrumTable& table) {
    std::vector<ComparisonViolation> out;
    for (const auto& [key, entry] : table.entries()) {
        const auto [n, m] = key;
        if (n == 0) continue;
        double bound = (2.0 * m + 1.0) * std::abs(n);
        if (entry.pair.lambda_sq < bound - entry.richardson_err) {
            out.push_back({n, m, entry.pair.lambda_sq, bound, entry.richardson_err});
        }
    }
    return out;
}

int weyl_count(const SpectrumTable& table, int n, double tau_sq) {
    if (table.coverage(n) < tau_sq) {
        std::ostringstream msg;
        msg << "weyl_count: mode " << n << " covered only up to " << table.coverage(n) << " < tau_sq = " << tau_sq;
        throw std::domain_error(msg.str());
    }
    int count = 0;
    for (const auto* e : table.mode(n)) {
        if (e->pair.lambda_sq <= tau_sq) ++count;
    }
    return count;
}

}  // namespace grushin::spectrum
