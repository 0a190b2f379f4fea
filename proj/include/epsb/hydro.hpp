#pragma once

#include "epsb/field.hpp"
#include "epsb/lattice.hpp"

#include <variant>

namespace epsb {

namespace bc {

/// rho(t,0) = alpha, rho(t,1) = beta.
struct Dirichlet {
  double alpha = 0.5;
  double beta = 0.5;
};

/// Zero flux at both ends.
struct Neumann {};

/// Dirichlet data plus the drift -2 d_u(chi(rho) d_u H); H must be DirichletZero.
struct PerturbedDirichlet {
  double alpha = 0.5;
  double beta = 0.5;
  SpaceTimeField H;
};

/// Drift with d_u rho = 2 chi(rho) d_u H at both ends, i.e. zero total flux.
struct Robin {
  SpaceTimeField H;
};

}  // namespace bc

using BoundarySpec = std::variant<bc::Dirichlet, bc::Neumann, bc::PerturbedDirichlet, bc::Robin>;

/// Boundary specification of the unperturbed equation for a regime.
BoundarySpec boundary_for(const RegimeSpec& regime);
/// Boundary specification of the tilted equation for a regime.
BoundarySpec boundary_for(const RegimeSpec& regime, const SpaceTimeField& H);

enum class Scheme {
  CrankNicolson,  ///< diffusion with weight 1/2, drift explicit
  Explicit,       ///< forward Euler for everything
};

struct SolverGrid {
  std::size_t cells = 512;  ///< 1/du
  double dt = 0.0;          ///< 0 selects du^2/4
  double horizon = 0.1;
  std::size_t frames = 100;  ///< number of output intervals on [0,T]
  Scheme scheme = Scheme::CrankNicolson;
};

/**
 * Vertex-centred finite volumes with half cells at the ends. The Neumann and
 * Robin conditions are imposed as zero total flux through the end faces, so
 * the trapezoid mass of every frame is conserved to round-off.
 */
SpaceTimeProfile solve(const Profile& gamma, const BoundarySpec& bc, const SolverGrid& grid);

enum class SpectralProblem {
  Dirichlet,  ///< homogenized by the stationary linear profile
  Neumann,
};

/// Truncated eigen-expansion of the heat semigroup applied to gamma, on gamma's grid.
Profile spectral_oracle(const Profile& gamma, SpectralProblem problem, std::size_t modes, double t,
                        double alpha = 0.0, double beta = 0.0);

/**
 * Weak-formulation defect at time t (a frame time of rho).
 * Dirichlet: <rho_t,f_t> - <gamma,f_0> - int <rho,(d_s+Lap) f> + int (beta f'(1) - alpha f'(0))
 *            - 2 int <chi(rho) d_u H, d_u f>.
 * Neumann:   the same with rho_s(1) f'(1) - rho_s(0) f'(0) in place of the reservoir term.
 */
double weak_residual(const SpaceTimeProfile& rho, const SpaceTimeField& f, const RegimeSpec& regime,
                     const SpaceTimeField* H, double t);

}  // namespace epsb
