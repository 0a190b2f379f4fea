#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace epsb {

/// Real function on [0,1] used as a test function.
using TestFunction = std::function<double(double)>;

/// Hydrodynamic regime selected by the boundary slowdown exponent.
enum class Regime {
  Dirichlet,  ///< theta in [0,1): reservoirs fix the boundary density
  Neumann,    ///< theta > 1: the boundary is asymptotically closed
};

/// Throws ThetaRegime for the critical value theta = 1.
Regime regime_of(double theta);

const char* to_string(Regime regime) noexcept;

/// Regime plus the reservoir densities the Dirichlet-type formulas need.
struct RegimeSpec {
  Regime regime = Regime::Dirichlet;
  double alpha = 0.5;
  double beta = 0.5;
};

struct ModelParams {
  std::size_t n = 0;  ///< sites are 1..n-1
  double theta = 0.0;
  double alpha = 0.5;
  double beta = 0.5;
  double horizon = 0.0;

  bool critical() const { return theta == 1.0; }
  std::size_t sites() const { return n - 1; }
  std::size_t bonds() const { return n - 2; }
  /// Reservoir density r_x for x in {1, n-1}.
  double reservoir(std::size_t site) const { return site == 1 ? alpha : beta; }
  /// n^{2-theta}, the accelerated boundary clock.
  double boundary_clock() const;
  double bulk_clock() const { return static_cast<double>(n) * static_cast<double>(n); }
  RegimeSpec regime_spec() const { return {regime_of(theta), alpha, beta}; }
};

/// Throws OutOfRange with the offending field name in the message.
ModelParams validate_params(long long n, double theta, double alpha, double beta, double horizon);

/// Static compressibility u(1-u); DomainError outside [0,1].
double chi(double u);

/// Occupancy of sites 1..n-1.
class Configuration {
 public:
  Configuration() = default;
  /// All-empty configuration for lattice parameter n.
  explicit Configuration(std::size_t n);
  Configuration(std::size_t n, std::vector<std::uint8_t> occupancy);
  /// Parses a string such as "0110000000" (one character per site).
  static Configuration from_string(const std::string& bits);

  std::size_t n() const { return occ_.size() + 1; }
  std::size_t sites() const { return occ_.size(); }

  /// eta(x) for x in 1..n-1.
  int operator[](std::size_t x) const { return occ_[x - 1]; }
  void set(std::size_t x, int value);

  /// The exchange map eta^{x,x+1}.
  void swap_bond(std::size_t x) { std::swap(occ_[x - 1], occ_[x]); }
  /// The flip map sigma^x eta.
  void flip(std::size_t x) { occ_[x - 1] ^= 1U; }

  std::size_t particles() const;
  bool discordant(std::size_t bond) const { return occ_[bond - 1] != occ_[bond]; }

  const std::vector<std::uint8_t>& occupancy() const { return occ_; }
  std::string to_string() const;

  bool operator==(const Configuration& other) const { return occ_ == other.occ_; }
  bool operator!=(const Configuration& other) const { return !(*this == other); }

 private:
  std::vector<std::uint8_t> occ_;
};

/// Density profile on a uniform grid of G+1 nodes with linear interpolation.
class Profile {
 public:
  Profile() = default;
  /// Values at u_i = i/G; requires G >= 2 and every value in [0,1].
  explicit Profile(std::vector<double> values);
  static Profile from_function(std::size_t grid_size, const std::function<double(double)>& f);
  static Profile constant(std::size_t grid_size, double c);

  std::size_t grid_size() const { return values_.size() - 1; }
  double spacing() const { return 1.0 / static_cast<double>(grid_size()); }
  double node(std::size_t i) const { return static_cast<double>(i) * spacing(); }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  /// Linear interpolation, u clamped to [0,1].
  double operator()(double u) const;
  /// Exact integral of the interpolant over [0,u].
  double primitive(double u) const;
  double integral() const { return primitive(1.0); }
  /// The same profile interpolated onto another grid.
  Profile resampled(std::size_t grid_size) const;

 private:
  std::vector<double> values_;
};

/**
 * Named analytic function of u from the fixed registry.
 *
 *   linear        [a, b]            a + b u
 *   sine          [c1, c2, ...]     sum_k c_k sin(k pi u)
 *   cosine        [c0, c1, ...]     c0 + sum_k c_k cos(k pi u)
 *   g_alpha_beta  [alpha, beta, delta]
 *   bump          [amp, center, halfwidth]  amp exp(-1/(1-z^2)), z=(u-center)/halfwidth
 */
class Shape {
 public:
  enum class Kind { Linear, Sine, Cosine, GAlphaBeta, Bump };

  Shape() = default;
  Shape(Kind kind, std::vector<double> coefficients);
  /// Throws ConfigError for unknown names or malformed coefficient lists.
  static Shape parse(const std::string& name, std::vector<double> coefficients);

  Kind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  std::string name() const;

  double value(double u) const;
  double d1(double u) const;
  double d2(double u) const;

 private:
  Kind kind_ = Kind::Linear;
  std::vector<double> coeffs_{0.0};
};

/// The profile g_{alpha,beta}: plateaus alpha on [0,delta], beta on [1-delta,1], linear between.
Profile profile_g_alpha_beta(double alpha, double beta, double delta = 0.25,
                             std::size_t grid_size = 1024);

Profile sample_shape(const Shape& shape, std::size_t grid_size);

/// Independent sites with P[eta(x)=1] = profile(x/n).
Configuration sample_bernoulli_product(const Profile& profile, std::size_t n, std::uint64_t seed);

/// Quantile rounding: eta(x)=1 iff floor(n Gamma(x/n)) > floor(n Gamma((x-1)/n)).
Configuration deterministic_config(const Profile& profile, std::size_t n);

/**
 * Time-indexed family of profiles on [0,T] with uniform time and space grids.
 * Stored row-major: frame m occupies values[m*(G+1) .. m*(G+1)+G].
 */
class SpaceTimeProfile {
 public:
  SpaceTimeProfile() = default;
  SpaceTimeProfile(double horizon, std::size_t grid_size, std::vector<double> values);
  SpaceTimeProfile(double horizon, const std::vector<Profile>& frames);
  static SpaceTimeProfile from_function(double horizon, std::size_t time_steps,
                                        std::size_t grid_size,
                                        const std::function<double(double, double)>& f);

  double horizon() const { return horizon_; }
  std::size_t frames() const { return frames_; }  ///< number of time nodes
  std::size_t time_steps() const { return frames_ - 1; }
  std::size_t grid_size() const { return grid_; }
  double spacing() const { return 1.0 / static_cast<double>(grid_); }
  double time_step() const;
  double time(std::size_t m) const;
  double node(std::size_t i) const { return static_cast<double>(i) * spacing(); }

  double at(std::size_t m, std::size_t i) const { return values_[m * (grid_ + 1) + i]; }
  const double* row(std::size_t m) const { return values_.data() + m * (grid_ + 1); }
  std::vector<double> frame_values(std::size_t m) const;
  Profile frame(std::size_t m) const { return Profile(frame_values(m)); }
  const std::vector<double>& values() const { return values_; }

  /// Trapezoid mass of each frame.
  std::vector<double> masses() const;

 private:
  double horizon_ = 0.0;
  std::size_t frames_ = 0;
  std::size_t grid_ = 0;
  std::vector<double> values_;
};

}  // namespace epsb
