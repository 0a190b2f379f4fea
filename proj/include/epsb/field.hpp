#pragma once

#include "epsb/lattice.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace epsb {

/// Boundary class of a tilt field (the paper's class C_theta).
enum class FieldClass {
  DirichletZero,  ///< H(t,0) = H(t,1) = 0, used for theta in [0,1)
  Free,           ///< no boundary constraint, used for theta > 1
};

const char* to_string(FieldClass cls) noexcept;

/// Class required for test fields in a regime.
FieldClass class_for(Regime regime) noexcept;

/// Polynomial a_0 + a_1 t + ... in time.
struct TimePolynomial {
  std::vector<double> coefficients{1.0};

  double value(double t) const;
  double d1(double t) const;
  bool constant() const;
};

/// One separable term p(t) s(u) of an analytic field.
struct FieldTerm {
  TimePolynomial time;
  Shape space;
};

/// Generic analytic field given by callables for H and its derivatives.
struct FieldFunctions {
  std::function<double(double, double)> value;
  std::function<double(double, double)> du;
  std::function<double(double, double)> duu;
  std::function<double(double, double)> dt;
  bool time_constant = false;
  std::vector<double> time_breakpoints;  ///< times where d_t H may jump
};

/**
 * Tilt field H(t,u) on [0,T]x[0,1].
 *
 * Three representations share one interface: a sum of separable registry
 * terms, a set of callables, or grid samples (derivatives then come from
 * finite differences, or from a stored gradient grid when one is supplied).
 */
class SpaceTimeField {
 public:
  SpaceTimeField();

  static SpaceTimeField zero(FieldClass cls = FieldClass::Free);
  /// ClassMismatch if a DirichletZero field does not vanish at u=0,1.
  static SpaceTimeField analytic(std::vector<FieldTerm> terms, FieldClass cls,
                                 double horizon = 1.0);
  static SpaceTimeField from_functions(FieldFunctions functions, FieldClass cls,
                                       double horizon = 1.0);
  /// values has (time_steps+1)*(grid_size+1) entries, row-major in time.
  static SpaceTimeField sampled(double horizon, std::size_t time_steps, std::size_t grid_size,
                                std::vector<double> values, FieldClass cls,
                                std::optional<std::vector<double>> gradient = std::nullopt);

  double value(double t, double u) const;
  double du(double t, double u) const;
  double duu(double t, double u) const;
  double dt(double t, double u) const;

  FieldClass field_class() const { return cls_; }
  bool time_constant() const;
  bool is_zero() const;

  /// Separable terms when the field was built from the registry.
  const std::vector<FieldTerm>* terms() const;
  /// Times at which the field is only piecewise smooth; quadratures split there.
  std::vector<double> time_breakpoints() const;

  /// Grid samples of H on the given grids.
  std::vector<double> sample(double horizon, std::size_t time_steps, std::size_t grid_size) const;

  /// The same field shifted by a constant (the gauge freedom of the Neumann regime).
  SpaceTimeField plus_constant(double c) const;
  /// The same field multiplied by a scalar.
  SpaceTimeField scaled(double s) const;

  struct Impl;

 private:
  std::shared_ptr<const Impl> impl_;
  FieldClass cls_ = FieldClass::Free;
};

/// Boundary tilt G: two scalar functions of time, at sites 1 and n-1.
struct BoundaryTilt {
  std::function<double(double)> left;
  std::function<double(double)> right;
  bool time_constant = false;
};

/// Bulk field H plus boundary field G for the weakly asymmetric dynamics.
struct Tilt {
  SpaceTimeField H;
  BoundaryTilt G;
  bool g_matches_h = false;

  /// The paper's choice G = H at 1/n and (n-1)/n.
  static Tilt matching(const SpaceTimeField& H, std::size_t n);
  static Tilt with_boundary(const SpaceTimeField& H, BoundaryTilt G);
};

/**
 * Tilt evaluated on the lattice sites x/n, with per-term spatial tables for
 * registry fields so the simulator pays O(#terms) per rate evaluation.
 */
class LatticeTilt {
 public:
  LatticeTilt(const Tilt& tilt, std::size_t n);

  std::size_t n() const { return n_; }
  bool time_constant() const { return time_constant_; }

  /// H_t((x+1)/n) - H_t(x/n) for bond x in 1..n-2.
  double gradient(double t, std::size_t bond) const;
  /// H_t(x/n) for x in 0..n.
  double value(double t, std::size_t x) const;
  /// d/dt H_t(x/n).
  double time_derivative(double t, std::size_t x) const;
  /// G at site 1 (side 0) or n-1 (side 1).
  double boundary(double t, int side) const;

  /// Max over bonds of |gradient| at time t.
  double max_abs_gradient(double t) const;

  const Tilt& tilt() const { return tilt_; }

 private:
  Tilt tilt_;
  std::size_t n_;
  bool time_constant_;
  bool separable_ = false;
  std::vector<TimePolynomial> time_factors_;
  std::vector<std::vector<double>> site_tables_;  // per term, x = 0..n
  std::vector<double> const_gradient_;            // used when time constant
  std::vector<double> const_value_;
};

}  // namespace epsb
