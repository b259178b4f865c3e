#pragma once

// Cylinder states in the Grushin eigenbasis Phi_{m,n}(x,y) = phi_{m,n}(x) e^{iny}.
//
// The torus in y has length 2*pi and e^{iny} is left unnormalized, so mass
// and energy carry an explicit 2*pi Parseval factor.

#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "grushin/spectrum.hpp"

namespace grushin::field {

using cplx = std::complex<double>;
using spectrum::DirichletGrid;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

struct BasisLevel {
    int m = 0;
    double lambda_sq = 0.0;
    double grid_error = 0.0;
    std::vector<double> vector;
};

/// Immutable set of eigenpairs sharing one x-grid. Slots are ordered by (n, m).
class SpectralBasis {
public:
    SpectralBasis(DirichletGrid grid, std::map<int, std::vector<BasisLevel>> levels);

    const DirichletGrid& grid() const { return grid_; }
    std::size_t size() const { return slots_.size(); }
    const std::vector<int>& modes() const { return modes_; }

    int mode_of(std::size_t slot) const { return slots_[slot].n; }
    int level_of(std::size_t slot) const { return slots_[slot].m; }
    double lambda_sq(std::size_t slot) const { return slots_[slot].lambda_sq; }
    double grid_error(std::size_t slot) const { return slots_[slot].grid_error; }
    std::span<const double> vector(std::size_t slot) const;

    std::optional<std::size_t> find(int n, int m) const;
    std::size_t slot(int n, int m) const;  // throws std::out_of_range
    /// Slots of mode n, ascending in m; empty when n is absent.
    std::span<const std::size_t> slots_of_mode(int n) const;

    double max_grid_error() const;

private:
    struct Slot {
        int n;
        int m;
        double lambda_sq;
        double grid_error;
        std::size_t offset;
    };
    DirichletGrid grid_;
    std::vector<Slot> slots_;
    std::vector<double> storage_;
    std::vector<int> modes_;
    std::map<int, std::vector<std::size_t>> by_mode_;
};

using BasisPtr = std::shared_ptr<const SpectralBasis>;

/// All levels with lambda^2 <= lambda_max for |n| <= N on `grid`, with
/// Richardson extrapolation over {M, 2M}. Requires N >= 1 and lambda_max > pi^2/4.
BasisPtr build_basis(int N, double lambda_max, const DirichletGrid& grid, double tol = 1e-10, int threads = 1);

/// Basis from a table that kept its vectors.
BasisPtr basis_from_table(const spectrum::SpectrumTable& table);

class ModalField {
public:
    explicit ModalField(BasisPtr basis);
    ModalField(BasisPtr basis, std::vector<cplx> coefficients);

    const BasisPtr& basis() const { return basis_; }
    std::span<const cplx> coefficients() const { return coefficients_; }
    std::span<cplx> coefficients() { return coefficients_; }

    cplx at(int n, int m) const;
    /// Throws std::out_of_range when (n, m) is not a basis slot.
    void set(int n, int m, cplx value);

    std::string to_csv() const;

private:
    BasisPtr basis_;
    std::vector<cplx> coefficients_;
};

/// Independent standard complex Gaussian coefficients.
ModalField random_field(const BasisPtr& basis, std::mt19937_64& rng);

/// Samples U_n(x_i) per Fourier mode n (mode-major storage).
class GridField {
public:
    GridField(DirichletGrid grid, std::vector<int> modes, BasisPtr basis = nullptr);

    const DirichletGrid& grid() const { return grid_; }
    const std::vector<int>& modes() const { return modes_; }
    const BasisPtr& basis() const { return basis_; }
    int interior() const { return grid_.interior_count(); }

    std::span<const cplx> mode_values(std::size_t k) const;
    std::span<cplx> mode_values(std::size_t k);
    std::optional<std::size_t> mode_index(int n) const;

    std::string to_csv() const;

private:
    DirichletGrid grid_;
    std::vector<int> modes_;
    BasisPtr basis_;
    std::vector<cplx> values_;
};

ModalField evolve(const ModalField& field, double t);

GridField synthesize(const ModalField& field);
/// Projection through the discrete inner product; `g` must carry its basis.
ModalField analyze(const GridField& g);
/// Projection onto `basis`; throws when g refers to a different basis or grid.
ModalField analyze(const GridField& g, const BasisPtr& basis);

double mass(const ModalField& field);
double energy_grushin(const ModalField& field);
/// 2*pi * sum (lambda^2 - |n|) |a|^2, i.e. ((-Delta_G + 1) f, f) - ||f||^2 - || |D_y|^{1/2} f ||^2.
double coercivity_gap(const ModalField& field);

/// 2*pi * dx * sum |U_n(x_i)|^2.
double grid_mass(const GridField& g);

}  // namespace grushin::field
