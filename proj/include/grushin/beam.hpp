#pragma once

// Gaussian-beam states concentrated on Dirichlet ground states of L_k over the
// dyadic band k in (1/(2h), 2/h):
//
//   u_0(x, y) = sum_k g_h(k) chi(h k) p(k, x) e^{iky}.

#include <string>
#include <vector>

#include "grushin/field.hpp"

namespace grushin::beam {

/// Smooth bump on (1/2, 2): exp(1 - (9/16) / ((s - 1/2)(2 - s))), equal to 1 at s = 5/4.
double bump_chi(double s);

/// sqrt(h) / sqrt(2 pi) * exp(-h^2 w^2 / 2). Requires h in (0, 1).
double gaussian_weight(double h, double w);

struct GroundStateRecord {
    int k = 0;
    double lambda = 0.0;        // lambda(k), extrapolated
    double nu = 0.0;            // lambda / k - 1
    double grid_error = 0.0;
    double mass_outside_half = 0.0;
    std::vector<double> profile;  // positive, dx * sum p^2 = 1
};

struct BeamParams {
    explicit BeamParams(double h);
    double h;
};

/// Integer k with 1/(2h) < k < 2/h.
std::vector<int> band_frequencies(double h);

/// Interior count needed so that dx <= sqrt(h/8)/10.
int required_interior(double h);

/// Ground state of L_k for every band frequency, extrapolated over {M, 2M}.
/// Throws spectrum::ResolutionError naming the required M when the grid is too coarse.
std::vector<GroundStateRecord> build_ground_band(double h, const spectrum::DirichletGrid& grid, double tol = 1e-10,
                                                 int threads = 1);

/// Basis made of the band's (m = 0, n = k) slots.
field::BasisPtr band_basis(const std::vector<GroundStateRecord>& band, const spectrum::DirichletGrid& grid);

/// a_{0,k} = g_h(k) chi(h k) on the band slots of `basis`, zero elsewhere.
field::ModalField build_beam(const BeamParams& params, const std::vector<GroundStateRecord>& band,
                             const field::BasisPtr& basis);

/// Circular centroid arg(int e^{iy} |u(t)|^2) of the evolved state.
double beam_center(const field::ModalField& u, double t);

/// Columns k,lambda,nu,mass_outside_half.
std::string band_csv(const std::vector<GroundStateRecord>& band);

}  // namespace grushin::beam
