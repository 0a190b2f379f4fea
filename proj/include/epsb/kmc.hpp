#pragma once

#include "epsb/field.hpp"
#include "epsb/lattice.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

namespace epsb {

enum class EventKind : std::uint8_t {
  JumpRight = 0,  ///< particle moves x -> x+1 across bond x
  JumpLeft = 1,   ///< particle moves x+1 -> x across bond x
  Create = 2,     ///< reservoir creates a particle at site 1 or n-1
  Destroy = 3,    ///< reservoir removes a particle at site 1 or n-1
};

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::JumpRight;
  std::uint32_t site = 0;  ///< bond index for jumps, site index for flips

  bool operator==(const Event& o) const {
    return time == o.time && kind == o.kind && site == o.site;
  }
};

/// Apply one event to a configuration (no legality check).
void apply(Configuration& config, const Event& event);

/**
 * Streaming consumer of an event sequence. The same observer can be attached
 * to a live simulation or fed from a stored trajectory with replay().
 */
class EventObserver {
 public:
  virtual ~EventObserver() = default;
  virtual void on_start(const Configuration& initial, double t0) { (void)initial, (void)t0; }
  /// Called just before the event is applied.
  virtual void on_event(const Event& event, const Configuration& before) { (void)event, (void)before; }
  virtual void on_finish(const Configuration& final_state, double horizon) { (void)final_state, (void)horizon; }
};

/// Fans one event stream out to several observers.
class ObserverList : public EventObserver {
 public:
  void add(EventObserver* o) { list_.push_back(o); }
  void on_start(const Configuration& c, double t) override;
  void on_event(const Event& e, const Configuration& before) override;
  void on_finish(const Configuration& c, double t) override;

 private:
  std::vector<EventObserver*> list_;
};

struct Trajectory {
  ModelParams params;
  Configuration initial;
  std::vector<Event> events;
  std::vector<double> schedule;
  std::vector<Configuration> snapshots;
  Configuration final_state;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::size_t event_count = 0;
  bool events_recorded = true;

  /// Configuration at time t, rebuilt from the event log.
  Configuration at(double t) const;
};

struct SimulationOptions {
  bool record_events = true;
  EventObserver* observer = nullptr;
  std::uint64_t stream = 0;
  std::size_t envelope_windows = 16;
};

/**
 * Exact realization of the accelerated chain on [0,T].
 *
 * Without a tilt all rates are constant between events and the sampler is a
 * plain Gillespie step over the discordant-bond set. With a tilt every rate is
 * bounded by a per-window envelope and proposals are thinned, which keeps the
 * law exact for time-dependent H and G.
 */
Trajectory simulate(const ModelParams& params, const Configuration& initial, const Tilt* tilt,
                    std::vector<double> schedule, std::uint64_t seed,
                    const SimulationOptions& options = {});

/// Feed a recorded trajectory to an observer.
void replay(const Trajectory& trajectory, EventObserver& observer);

// ---------------------------------------------------------------- small-n oracle

/// Index of a configuration: sum over x of eta(x) 2^{x-1}.
std::size_t state_index(const Configuration& config);
Configuration state_from_index(std::size_t index, std::size_t n);

/// Full generator of the accelerated chain frozen at time t. TooLarge if n-1 > 12.
Eigen::MatrixXd exact_generator_small_n(const ModelParams& params, const Tilt* tilt, double t);

/// Law at time t started from a fixed configuration.
std::vector<double> exact_law_small_n(const ModelParams& params, const Tilt* tilt,
                                      const Configuration& initial, double t);

/// Total variation distance between two laws on the same state space.
double total_variation(const std::vector<double>& p, const std::vector<double>& q);

// ---------------------------------------------------------------- currents

/// Right-continuous integer step function of time.
struct StepFunction {
  std::vector<double> times;
  std::vector<long long> values;

  long long operator()(double t) const;
  long long final_value() const { return values.empty() ? 0 : values.back(); }
};

struct Currents {
  StepFunction left;                ///< J_{0,1}: created minus destroyed at site 1
  StepFunction right;               ///< J_{n-1,n}: destroyed minus created at site n-1
  std::vector<StepFunction> bonds;  ///< bonds[x-1] is J_{x,x+1}

  const StepFunction& bond(std::size_t x) const { return bonds[x - 1]; }
  /// J_{x,x+1}(t) for x in 0..n-1 with the boundary conventions above.
  long long through(std::size_t x, double t) const;
};

Currents currents(const Trajectory& trajectory);

// ---------------------------------------------------------------- segment bookkeeping

/**
 * Splits the time axis per bond and per boundary site into intervals on which
 * the local state is constant. Integrals of time-dependent local rates then
 * cost O(1) per event instead of O(n).
 */
class SegmentObserver : public EventObserver {
 public:
  void on_start(const Configuration& initial, double t0) override;
  void on_event(const Event& event, const Configuration& before) override;
  void on_finish(const Configuration& final_state, double horizon) override;

 protected:
  /// Bond kept orientation sigma = eta(x)-eta(x+1) in {-1,+1} over [a,b].
  virtual void bond_segment(std::size_t bond, int sigma, double a, double b) = 0;
  /// Boundary side (0: site 1, 1: site n-1) kept the given occupation over [a,b].
  virtual void boundary_segment(int side, int occupied, double a, double b) = 0;
  virtual void jump(const Event& event, const Configuration& before) { (void)event, (void)before; }
  virtual void finished(const Configuration& final_state, double horizon) { (void)final_state, (void)horizon; }

  const Configuration& state() const { return state_; }

 private:
  void close_bond(std::size_t bond, double t);
  void close_side(int side, double t);

  Configuration state_;
  std::vector<double> bond_start_;
  std::array<double, 2> side_start_{0.0, 0.0};
};

/// Integral of g over [a,b]: exact when the integrand is constant in time, Gauss otherwise.
template <class F>
double integrate_in_time(F&& g, double a, double b, bool time_constant);

// ---------------------------------------------------------------- Dynkin martingale

struct DynkinPath {
  double residual = 0.0;             ///< M_T(f)
  double quadratic_variation = 0.0;  ///< compensator of M(f)^2 on [0,T]
};

/// Dynkin martingale of <pi, f> along one path; f is time independent.
class DynkinObserver : public SegmentObserver {
 public:
  DynkinObserver(const ModelParams& params, const TestFunction& f, const Tilt* tilt);
  DynkinPath result() const { return result_; }

 protected:
  void on_start(const Configuration& initial, double t0) override;
  void bond_segment(std::size_t bond, int sigma, double a, double b) override;
  void boundary_segment(int side, int occupied, double a, double b) override;
  void finished(const Configuration& final_state, double horizon) override;

 private:
  double pairing(const Configuration& c) const;

  ModelParams params_;
  std::vector<double> f_;  // f(x/n), x = 0..n
  const LatticeTilt* tilt_ = nullptr;
  std::unique_ptr<LatticeTilt> owned_;
  double start_pairing_ = 0.0;
  double drift_ = 0.0;
  double qv_ = 0.0;
  DynkinPath result_;
};

DynkinPath dynkin_path(const Trajectory& trajectory, const TestFunction& f, const Tilt* tilt);

struct DynkinStats {
  double mean = 0.0;
  double variance = 0.0;
  double std_error = 0.0;
  double mean_quadratic_variation = 0.0;
  std::size_t replicas = 0;
};

DynkinStats dynkin_residual(const std::vector<Trajectory>& trajectories, const TestFunction& f,
                            const Tilt* tilt);

/// Same statistics computed while simulating, without storing trajectories.
DynkinStats dynkin_experiment(const ModelParams& params, const Configuration& initial,
                              const Tilt* tilt, const TestFunction& f, std::size_t replicas,
                              std::uint64_t seed, std::size_t workers = 1);

}  // namespace epsb

#include "epsb/numerics.hpp"

namespace epsb {

template <class F>
double integrate_in_time(F&& g, double a, double b, bool time_constant) {
  if (b <= a) return 0.0;
  if (time_constant) return (b - a) * g(a);
  return gauss4(g, a, b);
}

}  // namespace epsb
