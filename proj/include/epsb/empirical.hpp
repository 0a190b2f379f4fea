#pragma once

#include "epsb/kmc.hpp"
#include "epsb/lattice.hpp"

#include <utility>
#include <vector>

namespace epsb {

/// <pi^n, f> = (1/n) sum_x eta(x) f(x/n).
double pairing(const Configuration& config, const TestFunction& f);

/// Total mass <pi^n, 1>.
double mass(const Configuration& config);

/// Box size floor(eps n); BoxOutOfRange when it is zero.
std::size_t box_size(std::size_t n, double eps);

/**
 * eta^{eps n}(x): mean over the floor(eps n) sites to the right of x when
 * x <= n-1-floor(eps n), over the sites to its left otherwise.
 */
double box_average(const Configuration& config, std::size_t x, double eps);

/// Occupied-site count of the box used by box_average.
std::size_t box_count(const Configuration& config, std::size_t x, std::size_t k);

/// Whether the box of site y (box size k, lattice n) contains site z.
bool box_contains(std::size_t n, std::size_t k, std::size_t y, std::size_t z);

enum class Kernel {
  Box,     ///< one-sided window iota_eps
  Smooth,  ///< bump iota^s_tau supported in [tau/4, 3tau/4]
};

/// Normalizing constant of the bump f(u) = c exp(-1/(1-(4u-2)^2)) on (1/4,3/4).
double bump_constant();
/// The bump itself, with integral one over [0,1].
double smooth_bump(double u);

/// Convolution of a profile with the chosen kernel, read on the profile's grid.
Profile mollify(const Profile& profile, double eps, Kernel kernel);

/// Convolution of the empirical measure with the kernel, read on a grid of G+1 nodes.
Profile mollify(const Configuration& config, double eps, Kernel kernel, std::size_t grid_size);

/// Atomic measure with positions and masses.
struct DiscreteMeasure {
  std::vector<std::pair<double, double>> atoms;  ///< (position, mass)

  double total() const;
  double pair(const TestFunction& f) const;
};

/// chi^n = (1/2n) sum_x (eta(x)-eta(x+1))^2 delta_{x/n}.
DiscreteMeasure chi_bond_field(const Configuration& config);

/// Density readout: box average at the site nearest each grid node.
Profile density_profile(const Configuration& config, double eps, std::size_t grid_size);

/// Density readout of a trajectory at time t (snapshot when t is scheduled, replay otherwise).
Profile density_estimate(const Trajectory& trajectory, double t, double eps,
                         std::size_t grid_size = 128);

/// A trajectory viewed through its empirical measure.
class EmpiricalPath {
 public:
  EmpiricalPath(const Trajectory& trajectory, std::size_t grid_size = 128)
      : traj_(&trajectory), grid_(grid_size) {}

  Profile density(double t, double eps) const { return density_estimate(*traj_, t, eps, grid_); }
  double mass_at(double t) const;
  /// sup over event times of |<pi_t,1> - <pi_0,1>|.
  double max_mass_drift() const;
  const Trajectory& trajectory() const { return *traj_; }
  std::size_t grid_size() const { return grid_; }

 private:
  const Trajectory* traj_;
  std::size_t grid_;
};

}  // namespace epsb
