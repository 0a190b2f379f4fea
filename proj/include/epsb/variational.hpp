#pragma once

#include "epsb/field.hpp"
#include "epsb/lattice.hpp"

#include <Eigen/Dense>

#include <limits>
#include <string>
#include <vector>

namespace epsb {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/**
 * Tensor basis a_p(t) s_q(u) for the supremum over test fields.
 * Time: K_t+1 hat functions on a uniform partition of [0,T] into K_t pieces
 * (nested when K_t doubles). Space: sin(k pi u), k=1..K_u, for DirichletZero;
 * 1 and cos(k pi u), k=1..K_u, for Free.
 */
class TiltBasis {
 public:
  TiltBasis(std::size_t kt, std::size_t ku, FieldClass cls, double horizon);

  std::size_t kt() const { return kt_; }
  std::size_t ku() const { return ku_; }
  FieldClass field_class() const { return cls_; }
  double horizon() const { return horizon_; }

  std::size_t time_size() const { return kt_ + 1; }
  std::size_t space_size() const { return cls_ == FieldClass::DirichletZero ? ku_ : ku_ + 1; }
  std::size_t size() const { return time_size() * space_size(); }
  /// Element i is a_{i / space_size} s_{i % space_size}.
  std::size_t time_index(std::size_t i) const { return i / space_size(); }
  std::size_t space_index(std::size_t i) const { return i % space_size(); }

  double hat(std::size_t p, double t) const;
  /// Derivative of the hat, taken from the right at nodes.
  double hat_d1(std::size_t p, double t) const;
  /// Frequency k of space function q (0 for the constant).
  std::size_t frequency(std::size_t q) const;
  double space(std::size_t q, double u) const;
  double space_d1(std::size_t q, double u) const;
  double space_d2(std::size_t q, double u) const;

  /// Hat nodes pT/K_t.
  std::vector<double> breakpoints() const;

  /// The field sum_i c_i phi_i.
  SpaceTimeField field(const Eigen::VectorXd& coefficients) const;
  SpaceTimeField element(std::size_t i) const;

 private:
  std::size_t kt_, ku_;
  FieldClass cls_;
  double horizon_;
};

enum class EllForm {
  Direct,            ///< pairing with (d_s + Lap) H plus the boundary term
  IntegratedByParts  ///< the Laplacian moved onto rho
};

/// Boundary traces: second-order extrapolation from interior nodes, or the node values.
enum class TraceRule { Extrapolated, Node };

struct EllOptions {
  EllForm form = EllForm::Direct;
  TraceRule traces = TraceRule::Extrapolated;
};

/// <<d_u H, rho>> - 2 ||H||^2; H should vanish near the boundary.
double energy_single(const SpaceTimeProfile& rho, const SpaceTimeField& H);

/// Maximum of energy_single over span(basis); needs a DirichletZero basis.
double energy(const SpaceTimeProfile& rho, const TiltBasis& basis);

/// The linear functional ell_H(rho) of the regime.
double ell(const SpaceTimeProfile& rho, const SpaceTimeField& H, const RegimeSpec& regime,
           const EllOptions& options = {});

/// int_0^T <chi(rho_s), (d_u H_s)^2> ds.
double phi(const SpaceTimeProfile& rho, const SpaceTimeField& H);

/// Cost of the tilt along its own perturbed path; the same quadrature as phi.
double quadratic_cost(const SpaceTimeProfile& rho, const SpaceTimeField& H);

/// sup_t |mass_t - mass_0|.
double max_mass_drift(const SpaceTimeProfile& rho);

/// ell - phi, or +infinity when the path breaks the mass constraint of the Neumann regime.
double j_functional(const SpaceTimeProfile& rho, const SpaceTimeField& H, const RegimeSpec& regime,
                    double mass_tol = 1e-8, const EllOptions& options = {});

/// Linear and quadratic parts of c -> J(sum c_i phi_i) = b.c - c.A.c.
struct QuadraticForm {
  Eigen::VectorXd b;
  Eigen::MatrixXd A;
};

QuadraticForm rate_quadratic_form(const SpaceTimeProfile& rho, const RegimeSpec& regime,
                                  const TiltBasis& basis, const EllOptions& options = {});

struct RateReport {
  double value = 0.0;  ///< +infinity encodes the infinite branch
  std::size_t kt = 0, ku = 0;
  Eigen::VectorXd coefficients;
  double mass_drift = 0.0;
  bool ridge = false;             ///< the quadratic form was regularized
  bool mass_violation = false;    ///< Neumann path left the mass constraint
  bool unbounded_linear = false;  ///< a null direction of A carried a nonzero linear term
  std::vector<std::string> flags() const;
  std::string to_json() const;
};

RateReport rate_function(const SpaceTimeProfile& rho, const RegimeSpec& regime, const TiltBasis& basis,
                         double mass_tol = 1e-8, const EllOptions& options = {});

/// Optimal tilt of a Dirichlet-regime path, vanishing at u=0 and u=1.
SpaceTimeField elliptic_dirichlet(const SpaceTimeProfile& rho);

/// Optimal tilt of a Neumann-regime path, gauge H_t(0)=0.
SpaceTimeField elliptic_neumann(const SpaceTimeProfile& rho, double mass_tol = 1e-8);

struct FisherReport {
  double value = 0.0;
  double capped_measure = 0.0;  ///< space-time measure where the integrand hit the cap
};

/// int int (d_u rho)^2 / chi(rho), integrand capped at 1e12.
FisherReport fisher_energy(const SpaceTimeProfile& rho);

}  // namespace epsb
