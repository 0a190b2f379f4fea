#pragma once

#include "epsb/field.hpp"
#include "epsb/hydro.hpp"
#include "epsb/kmc.hpp"
#include "epsb/lattice.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace epsb {

// ---------------------------------------------------------------- Radon-Nikodym weights

/**
 * Streams log(dP/dP^{H,G}) along a path of the tilted chain: minus the log
 * tilt factor of every jump, minus the integral of the holding-rate
 * difference sum(lambda - lambda^{H,G}).
 */
class RnWeightObserver : public SegmentObserver {
 public:
  RnWeightObserver(const ModelParams& params, const Tilt& tilt);
  double log_weight() const { return jumps_.value() + holding_.value(); }

 protected:
  void bond_segment(std::size_t bond, int sigma, double a, double b) override;
  void boundary_segment(int side, int occupied, double a, double b) override;
  void jump(const Event& event, const Configuration& before) override;

 private:
  ModelParams params_;
  LatticeTilt tilt_;
  CompensatedSum jumps_;
  CompensatedSum holding_;
};

/// log(dP/dP^{H,G}) of a recorded trajectory (sampled under the tilt).
double rn_log_weight(const Trajectory& trajectory, const Tilt& tilt);

/**
 * The same quantity written through the empirical measure, -n[A + B], with the
 * exact hyperbolic discrete operators n sinh, n^2 (sinh - sinh) and
 * 2n^2 (cosh - 1). Requires G = H at the sites 1 and n-1. O(n) per event.
 */
double rn_log_weight_expanded(const Trajectory& trajectory, const Tilt& tilt);

struct WeightedEnsemble {
  std::vector<Trajectory> trajectories;
  std::vector<double> log_weights;
  std::shared_ptr<const Tilt> tilt;
  std::uint64_t seed = 0;
};

/// M tilted replicas with their weights; replica k uses RNG stream k.
WeightedEnsemble weighted_ensemble(const ModelParams& params, const Configuration& initial,
                                   const Tilt& tilt, std::size_t replicas, std::uint64_t seed,
                                   std::vector<double> schedule = {}, std::size_t workers = 1);

struct EntropyEstimate {
  double value = 0.0;      ///< -(1/n) mean log-weight
  double std_error = 0.0;
  double mean_weight = 0.0;  ///< mean of exp(log-weight), should be 1
  double weight_std_error = 0.0;
  double mean_log_weight = 0.0;
  std::size_t replicas = 0;
};

/// Relative entropy per site of the tilted law, estimated from M tilted replicas.
EntropyEstimate relative_entropy_rate(const ModelParams& params, const Configuration& initial,
                                      const Tilt& tilt, std::size_t replicas, std::uint64_t seed,
                                      std::size_t workers = 1);

/// Target of the entropy rate: the quadratic cost of H along the tilted hydrodynamic path.
double tilted_quadratic_cost(const ModelParams& params, const Profile& gamma, const SpaceTimeField& H,
                             std::size_t cells = 256, std::size_t frames = 200);

struct ImportanceEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  double self_normalized = 0.0;
  std::size_t hits = 0;
  std::size_t replicas = 0;
};

using PathPredicate = std::function<bool(const Trajectory&)>;

/// P[A] under the untilted law from tilted samples, E^H[1_A dP/dP^H].
ImportanceEstimate importance_probability(const ModelParams& params, const Configuration& initial,
                                          const Tilt& tilt, const PathPredicate& predicate,
                                          std::size_t replicas, std::uint64_t seed,
                                          std::vector<double> schedule = {}, std::size_t workers = 1);

// ---------------------------------------------------------------- tails

/// x - a - x log(x/a); DomainError unless x > 0 and a > 0.
double poisson_ld_bound(double x, double a);

/// c = max(alpha,1-alpha) + max(beta,1-beta), the boundary rate bound in units of n^{2-theta}.
double boundary_rate_bound(const ModelParams& params);

/// exp(n poisson_ld_bound(lambda, c n^{1-theta} T)), or 1 when lambda is below that mean.
double poisson_tail_bound(const ModelParams& params, double lambda, double c);

struct TailRow {
  std::size_t n = 0;
  double theta = 0.0;
  double lambda = 0.0;
  std::size_t hits = 0;
  std::size_t replicas = 0;
  double frequency = 0.0;
  double std_error = 0.0;
  double bound = 1.0;
};

/// Frequency of sup_t |<pi_t,1> - <pi_0,1>| > lambda, one row per lambda.
std::vector<TailRow> mass_tail_experiment(const ModelParams& params, const Configuration& initial,
                                          const std::vector<double>& lambdas, std::size_t replicas,
                                          std::uint64_t seed, std::size_t workers = 1);

struct CurrentTailRow {
  TailRow left;   ///< J_{0,1}(T)/n > lambda
  TailRow right;  ///< J_{n-1,n}(T)/n > lambda
};

std::vector<CurrentTailRow> boundary_current_tail(const ModelParams& params, const Configuration& initial,
                                                  const std::vector<double>& lambdas, std::size_t replicas,
                                                  std::uint64_t seed, std::size_t workers = 1);

// ---------------------------------------------------------------- replacement lemmas

/// Which replacement observable: the bulk one (site 0) or a boundary site.
enum class ReplacementSite { Bulk, Left, Right };

struct ReplacementStats {
  std::size_t n = 0;
  double eps = 0.0;
  double mean_abs = 0.0;  ///< mean of |int_0^T V ds|
  double std_error_abs = 0.0;
  double mean = 0.0;      ///< signed mean
  double std_error = 0.0;
  std::size_t replicas = 0;
};

/**
 * Time integral of V_{eps,x} along the path. The bulk observable is
 * (1/n) sum_{x=1}^{n-2} phi(x/n) [(eta(x)-eta(x+1))^2/2 - chi(eta^{eps n}(x))];
 * the boundary one is phi(x/n) [eta(x) - r_x] for theta < 1 and
 * phi(x/n) [eta(x) - eta^{eps n}(x)] for theta > 1.
 */
class ReplacementObserver : public EventObserver {
 public:
  ReplacementObserver(const ModelParams& params, double eps, ReplacementSite site, const TestFunction& phi);
  void on_start(const Configuration& initial, double t0) override;
  void on_event(const Event& event, const Configuration& before) override;
  void on_finish(const Configuration& final_state, double horizon) override;
  double integral() const { return integral_.value(); }

 private:
  double current_value() const;
  void shift_box(std::size_t y, int delta);

  ModelParams params_;
  std::size_t k_;
  ReplacementSite site_;
  bool dirichlet_;
  std::vector<double> phi_;  // phi(x/n), x = 0..n
  Configuration state_;
  std::vector<int> box_;     // occupied count of the box of y, y = 1..n-1
  CompensatedSum bulk_;      // running value of the bulk sum without the 1/n
  double last_ = 0.0;
  CompensatedSum integral_;
};

/// M replicas started from the product measure with the given profile.
ReplacementStats replacement_residual(const ModelParams& params, double eps, ReplacementSite site,
                                      const TestFunction& phi, const Profile& initial_profile,
                                      std::size_t replicas, std::uint64_t seed, std::size_t workers = 1);

/**
 * Expected bulk integral under the product measure of constant density rho,
 * which is invariant when alpha = beta = rho: T (1/n) sum phi(x/n) chi(rho)/k.
 * It vanishes only as k grows.
 */
double replacement_stationary_mean(std::size_t n, double eps, double rho, const TestFunction& phi, double horizon);

}  // namespace epsb
