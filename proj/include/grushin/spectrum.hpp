#pragma once

// Dirichlet eigenpairs of L_n = -d^2/dx^2 + n^2 x^2 on (-1,1).
//
// The operator is discretized by second-order central differences on a
// uniform interior grid; eigenvalues come from Sturm-sequence bisection
// and eigenvectors from inverse iteration. Eigenvalues on several grids
// are combined by Richardson extrapolation in the squared spacing.

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace grushin::spectrum {

/// Uniform grid of M interior nodes x_i = -1 + i*dx, i = 1..M, dx = 2/(M+1).
class DirichletGrid {
public:
    explicit DirichletGrid(int interior_count);

    int interior_count() const { return interior_count_; }
    double spacing() const { return spacing_; }
    /// Node x_{i+1} for zero-based index i.
    double node(int i) const { return -1.0 + (i + 1) * spacing_; }
    std::vector<double> nodes() const;

    bool operator==(const DirichletGrid& other) const { return interior_count_ == other.interior_count_; }

private:
    int interior_count_;
    double spacing_;
};

/// Symmetric tridiagonal matrix of the discretized L_w. The potential is kept
/// separately so Rayleigh quotients can be evaluated in difference form.
struct TridiagonalOperator {
    double frequency = 0.0;
    DirichletGrid grid{16};
    std::vector<double> diag;
    std::vector<double> offdiag;
    std::vector<double> potential;

    int size() const { return static_cast<int>(diag.size()); }
};

/// Raw finite-difference entries for any grid size (no resolution guard).
TridiagonalOperator tridiagonal_entries(double frequency, const DirichletGrid& grid);

/// Guarded assembly: rejects grids with fewer than 16 interior nodes.
TridiagonalOperator assemble_operator(double frequency, const DirichletGrid& grid);

struct OscillatorEigenpair {
    int mode_n = 0;
    int level_m = 0;
    double lambda_sq = 0.0;
    std::vector<double> vector;  // orthonormal for dx * sum f_i g_i
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(int mode_n, int level_m);
    int mode_n() const { return mode_n_; }
    int level_m() const { return level_m_; }

private:
    int mode_n_;
    int level_m_;
};

class ResolutionError : public std::invalid_argument {
public:
    ResolutionError(const std::string& what, int required_interior)
        : std::invalid_argument(what), required_interior_(required_interior) {}
    int required_interior() const { return required_interior_; }

private:
    int required_interior_;
};

/// Number of eigenvalues strictly below x.
int sturm_count(const TridiagonalOperator& op, double x);

/// The `count` smallest eigenpairs, eigenvalues to relative tolerance `tol`.
/// Requires count <= M/4.
std::vector<OscillatorEigenpair> eigen_lowest(const TridiagonalOperator& op, int count, double tol = 1e-10);

/// Rayleigh quotient in difference form: no cancellation against the 2/dx^2 diagonal.
double rayleigh_quotient(const TridiagonalOperator& op, std::span<const double> v);

/// (2j+1)|n| for j = 0..count-1. Rejects n == 0.
std::vector<double> whole_line_levels(int n, int count);

struct Extrapolation {
    double value = 0.0;
    double error = 0.0;
};

/// Polynomial extrapolation in spacing^2 to zero spacing (Neville tableau).
/// The error estimate is the change contributed by the last tableau column,
/// or the distance to the finest value when only two grids are given.
Extrapolation richardson(std::span<const double> values, std::span<const double> spacings);

struct SpectrumOptions {
    /// Interior node counts; the first one is the grid whose vectors are kept.
    std::vector<int> grids{4000, 8000};
    double tol = 1e-10;
    bool keep_vectors = true;
    /// 0 = hardware concurrency.
    int threads = 1;
};

struct TableEntry {
    OscillatorEigenpair pair;
    double richardson_err = 0.0;
};

/// Eigenpairs keyed by (n, m). Each mode records the level up to which its
/// spectrum is known to be complete.
class SpectrumTable {
public:
    SpectrumTable() : grid_(16) {}
    explicit SpectrumTable(DirichletGrid grid) : grid_(grid) {}

    const DirichletGrid& grid() const { return grid_; }
    const std::map<std::pair<int, int>, TableEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }
    std::size_t size() const { return entries_.size(); }

    bool contains(int n, int m) const { return entries_.count({n, m}) != 0; }
    const TableEntry& at(int n, int m) const;
    std::vector<const TableEntry*> mode(int n) const;
    std::vector<int> modes() const;

    /// Largest value below which every eigenvalue of mode n is stored.
    double coverage(int n) const;

    void insert(TableEntry entry);
    void set_coverage(int n, double lambda_sq) { coverage_[n] = lambda_sq; }
    /// Test hook for perturbing stored values.
    void set_lambda_sq(int n, int m, double lambda_sq);

    /// CSV with columns n,m,lambda_sq,richardson_err,grid_M sorted by (n,m).
    std::string to_csv() const;

private:
    DirichletGrid grid_;
    std::map<std::pair<int, int>, TableEntry> entries_;
    std::map<int, double> coverage_;
};

/// Levels 0..count-1 for every requested mode.
SpectrumTable build_table_by_count(std::span<const int> modes, int count, const SpectrumOptions& options = {});

/// Every level with extrapolated eigenvalue <= lambda_max for every requested mode.
SpectrumTable build_table_below(std::span<const int> modes, double lambda_max, const SpectrumOptions& options = {});

/// Ground state of L_w for real w >= 0 with Richardson extrapolation.
TableEntry ground_state(double frequency, const SpectrumOptions& options = {});

struct ComparisonViolation {
    int n = 0;
    int m = 0;
    double lambda_sq = 0.0;
    double bound = 0.0;
    double grid_error = 0.0;
};

/// Pairs with lambda^2_{j,n} < (2j+1)|n| - grid_error; n == 0 is skipped.
std::vector<ComparisonViolation> verify_comparison(const SpectrumTable& table);

/// #{j : lambda^2_{j,n} <= tau_sq}. Throws std::domain_error when the table
/// does not cover mode n up to tau_sq.
int weyl_count(const SpectrumTable& table, int n, double tau_sq);

}  // namespace grushin::spectrum
