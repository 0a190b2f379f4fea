#include "epsb/kmc.hpp"

#include "epsb/error.hpp"
#include "epsb/numerics.hpp"
#include "epsb/parallel.hpp"
#include "epsb/rng.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace epsb {

void apply(Configuration& config, const Event& event) {
  switch (event.kind) {
    case EventKind::JumpRight:
    case EventKind::JumpLeft: config.swap_bond(event.site); break;
    case EventKind::Create:
    case EventKind::Destroy: config.flip(event.site); break;
  }
}

void ObserverList::on_start(const Configuration& c, double t) {
  for (auto* o : list_) o->on_start(c, t);
}
void ObserverList::on_event(const Event& e, const Configuration& before) {
  for (auto* o : list_) o->on_event(e, before);
}
void ObserverList::on_finish(const Configuration& c, double t) {
  for (auto* o : list_) o->on_finish(c, t);
}

Configuration Trajectory::at(double t) const {
  if (!events_recorded) throw Error(ErrorCode::DomainError, "trajectory was simulated without an event log");
  Configuration c = initial;
  for (const auto& e : events) {
    if (e.time > t) break;
    apply(c, e);
  }
  return c;
}

// ---------------------------------------------------------------- simulator

namespace {

/// Discordant bonds as an indexed set with O(1) insert/erase.
class BondSet {
 public:
  explicit BondSet(std::size_t n) : pos_(n, -1) {}

  void refresh(const Configuration& c, std::size_t bond) {
    const bool want = c.discordant(bond);
    const bool have = pos_[bond] >= 0;
    if (want == have) return;
    if (want) {
      pos_[bond] = static_cast<long>(list_.size());
      list_.push_back(static_cast<std::uint32_t>(bond));
    } else {
      const auto idx = static_cast<std::size_t>(pos_[bond]);
      const std::uint32_t last = list_.back();
      list_[idx] = last;
      pos_[last] = static_cast<long>(idx);
      list_.pop_back();
      pos_[bond] = -1;
    }
  }

  std::size_t size() const { return list_.size(); }
  std::uint32_t operator[](std::size_t i) const { return list_[i]; }

 private:
  std::vector<long> pos_;
  std::vector<std::uint32_t> list_;
};

struct Envelope {
  double bond = 1.0;
  std::array<double, 2> side{1.0, 1.0};
};

/// Envelope for the window [a,b]. Time-constant tilts get the exact maxima;
/// otherwise the sampled maxima are doubled in the exponent.
Envelope make_envelope(const LatticeTilt& lt, double a, double b) {
  Envelope env;
  const bool exact = lt.time_constant();
  const int samples = exact ? 1 : 9;
  double grad = 0.0;
  std::array<double, 2> g{0.0, 0.0};
  for (int j = 0; j < samples; ++j) {
    const double t = samples == 1 ? a : a + (b - a) * j / (samples - 1);
    grad = std::max(grad, lt.max_abs_gradient(t));
    for (int s = 0; s < 2; ++s) g[static_cast<std::size_t>(s)] = std::max(g[static_cast<std::size_t>(s)], std::abs(lt.boundary(t, s)));
  }
  const double factor = exact ? 1.0 : 2.0;
  env.bond = std::exp(factor * grad);
  env.side[0] = std::exp(factor * g[0]);
  env.side[1] = std::exp(factor * g[1]);
  return env;
}

}  // namespace

Trajectory simulate(const ModelParams& params, const Configuration& initial, const Tilt* tilt,
                    std::vector<double> schedule, std::uint64_t seed,
                    const SimulationOptions& options) {
  if (initial.n() != params.n) throw Error(ErrorCode::OutOfRange, "initial configuration does not match n");
  std::sort(schedule.begin(), schedule.end());
  for (double s : schedule) {
    if (s < 0.0 || s > params.horizon) throw Error(ErrorCode::OutOfRange, "schedule time outside [0,T]");
  }

  Trajectory traj;
  traj.params = params;
  traj.initial = initial;
  traj.schedule = schedule;
  traj.seed = seed;
  traj.stream = options.stream;
  traj.events_recorded = options.record_events;

  const std::size_t n = params.n;
  const double bulk = params.bulk_clock();
  const double edge = params.boundary_clock();
  const std::array<std::size_t, 2> edge_site{1, n - 1};
  const std::array<double, 2> reservoir{params.alpha, params.beta};

  Rng rng(seed, options.stream);
  Configuration state = initial;
  BondSet bonds(n);
  for (std::size_t b = 1; b + 1 < n; ++b) bonds.refresh(state, b);

  std::unique_ptr<LatticeTilt> lt;
  const bool tilted = tilt != nullptr && !(tilt->H.is_zero() && !tilt->G.left && !tilt->G.right);
  if (tilted) lt = std::make_unique<LatticeTilt>(*tilt, n);

  EventObserver* obs = options.observer;
  if (obs) obs->on_start(state, 0.0);

  std::size_t next_snapshot = 0;
  const auto take_snapshots_before = [&](double t) {
    while (next_snapshot < schedule.size() && schedule[next_snapshot] < t) {
      traj.snapshots.push_back(state);
      ++next_snapshot;
    }
  };

  const double T = params.horizon;
  const std::size_t windows = (lt && !lt->time_constant()) ? std::max<std::size_t>(1, options.envelope_windows) : 1;
  double t = 0.0;
  for (std::size_t w = 0; w < windows && T > 0.0; ++w) {
    const double w0 = T * static_cast<double>(w) / static_cast<double>(windows);
    const double w1 = (w + 1 == windows) ? T : T * static_cast<double>(w + 1) / static_cast<double>(windows);
    t = w0;
    Envelope env;
    if (lt) env = make_envelope(*lt, w0, w1);
    const double bond_rate = bulk * env.bond;

    for (;;) {
      std::array<double, 2> side_rate{};
      for (std::size_t s = 0; s < 2; ++s) {
        const double r = state[edge_site[s]] ? 1.0 - reservoir[s] : reservoir[s];
        side_rate[s] = edge * env.side[s] * r;
      }
      const double bulk_total = bond_rate * static_cast<double>(bonds.size());
      const double total = bulk_total + side_rate[0] + side_rate[1];
      t += rng.exponential(total);
      if (t >= w1) break;

      Event ev;
      ev.time = t;
      double accept = 1.0;
      const double pick = rng.uniform() * total;
      if (pick < bulk_total) {
        const std::uint32_t b = bonds[rng.below(bonds.size())];
        const int sigma = state[b] - state[b + 1];
        ev.kind = sigma > 0 ? EventKind::JumpRight : EventKind::JumpLeft;
        ev.site = b;
        if (lt) accept = std::exp(sigma * lt->gradient(t, b)) / env.bond;
      } else {
        const int s = pick < bulk_total + side_rate[0] ? 0 : 1;
        const std::size_t x = edge_site[static_cast<std::size_t>(s)];
        const bool occupied = state[x] != 0;
        ev.kind = occupied ? EventKind::Destroy : EventKind::Create;
        ev.site = static_cast<std::uint32_t>(x);
        if (lt) {
          const double g = lt->boundary(t, s);
          accept = std::exp(occupied ? -g : g) / env.side[static_cast<std::size_t>(s)];
        }
      }
      if (lt) {
        if (accept > 1.0 + 1e-12) {
          throw Error(ErrorCode::RateBoundViolation, "proposed rate exceeds the thinning envelope");
        }
        if (rng.uniform() >= accept) continue;
      }

      take_snapshots_before(t);
      if (obs) obs->on_event(ev, state);
      apply(state, ev);
      if (ev.kind == EventKind::JumpRight || ev.kind == EventKind::JumpLeft) {
        if (ev.site > 1) bonds.refresh(state, ev.site - 1);
        if (ev.site + 2 < n) bonds.refresh(state, ev.site + 1);
      } else {
        if (ev.site > 1) bonds.refresh(state, ev.site - 1);
        if (ev.site + 1 < n) bonds.refresh(state, ev.site);
      }
      if (options.record_events) traj.events.push_back(ev);
      ++traj.event_count;
    }
  }
  while (next_snapshot < schedule.size()) {
    traj.snapshots.push_back(state);
    ++next_snapshot;
  }
  traj.final_state = state;
  if (obs) obs->on_finish(state, T);
  return traj;
}

void replay(const Trajectory& trajectory, EventObserver& observer) {
  if (!trajectory.events_recorded) throw Error(ErrorCode::DomainError, "trajectory was simulated without an event log");
  Configuration c = trajectory.initial;
  observer.on_start(c, 0.0);
  for (const auto& e : trajectory.events) {
    observer.on_event(e, c);
    apply(c, e);
  }
  observer.on_finish(c, trajectory.params.horizon);
}

// ---------------------------------------------------------------- small-n oracle

std::size_t state_index(const Configuration& config) {
  std::size_t s = 0;
  for (std::size_t x = 1; x < config.n(); ++x) s |= static_cast<std::size_t>(config[x]) << (x - 1);
  return s;
}

Configuration state_from_index(std::size_t index, std::size_t n) {
  Configuration c(n);
  for (std::size_t x = 1; x < n; ++x) c.set(x, static_cast<int>((index >> (x - 1)) & 1U));
  return c;
}

Eigen::MatrixXd exact_generator_small_n(const ModelParams& params, const Tilt* tilt, double t) {
  const std::size_t n = params.n;
  if (n - 1 > 12) throw Error(ErrorCode::TooLarge, "state space above 4096 states");
  const std::size_t states = std::size_t{1} << (n - 1);
  std::unique_ptr<LatticeTilt> lt;
  if (tilt) lt = std::make_unique<LatticeTilt>(*tilt, n);
  const double bulk = params.bulk_clock();
  const double edge = params.boundary_clock();
  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(static_cast<long>(states), static_cast<long>(states));
  for (std::size_t s = 0; s < states; ++s) {
    const Configuration c = state_from_index(s, n);
    const auto add = [&](std::size_t target, double rate) {
      Q(static_cast<long>(s), static_cast<long>(target)) += rate;
      Q(static_cast<long>(s), static_cast<long>(s)) -= rate;
    };
    for (std::size_t b = 1; b + 1 < n; ++b) {
      const int sigma = c[b] - c[b + 1];
      if (sigma == 0) continue;
      Configuration d = c;
      d.swap_bond(b);
      const double factor = lt ? std::exp(sigma * lt->gradient(t, b)) : 1.0;
      add(state_index(d), bulk * factor);
    }
    const std::array<std::size_t, 2> sites{1, n - 1};
    for (int side = 0; side < 2; ++side) {
      const std::size_t x = sites[static_cast<std::size_t>(side)];
      const double r = params.reservoir(x);
      const double g = lt ? lt->boundary(t, side) : 0.0;
      Configuration d = c;
      d.flip(x);
      const double rate = c[x] ? (1.0 - r) * std::exp(-g) : r * std::exp(g);
      add(state_index(d), edge * rate);
    }
  }
  return Q;
}

std::vector<double> exact_law_small_n(const ModelParams& params, const Tilt* tilt,
                                      const Configuration& initial, double t) {
  const Eigen::MatrixXd Q0 = exact_generator_small_n(params, tilt, 0.0);
  const long m = Q0.rows();
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(m);
  p(static_cast<long>(state_index(initial))) = 1.0;
  const bool frozen = tilt == nullptr || (tilt->H.time_constant() && tilt->G.time_constant);
  if (frozen) {
    const Eigen::MatrixXd E = (Q0 * t).exp();
    p = p * E;
  } else {
    // Forward equation dp/ds = p Q(s), classical RK4 on a fine uniform grid.
    const double rate = Q0.diagonal().cwiseAbs().maxCoeff();
    const auto steps = static_cast<std::size_t>(std::max(2000.0, std::ceil(t * rate * 50.0)));
    const double h = t / static_cast<double>(steps);
    for (std::size_t k = 0; k < steps; ++k) {
      const double s = h * static_cast<double>(k);
      const Eigen::MatrixXd Qa = exact_generator_small_n(params, tilt, s);
      const Eigen::MatrixXd Qm = exact_generator_small_n(params, tilt, s + 0.5 * h);
      const Eigen::MatrixXd Qb = exact_generator_small_n(params, tilt, s + h);
      const Eigen::RowVectorXd k1 = p * Qa;
      const Eigen::RowVectorXd k2 = (p + 0.5 * h * k1) * Qm;
      const Eigen::RowVectorXd k3 = (p + 0.5 * h * k2) * Qm;
      const Eigen::RowVectorXd k4 = (p + h * k3) * Qb;
      p += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
  }
  return std::vector<double>(p.data(), p.data() + m);
}

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw Error(ErrorCode::OutOfRange, "laws on different state spaces");
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// ---------------------------------------------------------------- currents

long long StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  if (it == times.begin()) return 0;
  return values[static_cast<std::size_t>(it - times.begin() - 1)];
}

long long Currents::through(std::size_t x, double t) const {
  if (x == 0) return left(t);
  if (x == bonds.size() + 1) return right(t);
  return bonds[x - 1](t);
}

Currents currents(const Trajectory& trajectory) {
  const std::size_t n = trajectory.params.n;
  Currents c;
  c.bonds.resize(n - 2);
  const auto push = [](StepFunction& f, double t, long long delta) {
    f.times.push_back(t);
    f.values.push_back(f.final_value() + delta);
  };
  for (const auto& e : trajectory.events) {
    switch (e.kind) {
      case EventKind::JumpRight: push(c.bonds[e.site - 1], e.time, +1); break;
      case EventKind::JumpLeft: push(c.bonds[e.site - 1], e.time, -1); break;
      case EventKind::Create:
        if (e.site == 1) push(c.left, e.time, +1);
        else push(c.right, e.time, -1);
        break;
      case EventKind::Destroy:
        if (e.site == 1) push(c.left, e.time, -1);
        else push(c.right, e.time, +1);
        break;
    }
  }
  return c;
}

// ---------------------------------------------------------------- segments

void SegmentObserver::on_start(const Configuration& initial, double t0) {
  state_ = initial;
  bond_start_.assign(initial.n(), t0);
  side_start_ = {t0, t0};
}

void SegmentObserver::close_bond(std::size_t bond, double t) {
  const int sigma = state_[bond] - state_[bond + 1];
  if (sigma != 0) bond_segment(bond, sigma, bond_start_[bond], t);
  bond_start_[bond] = t;
}

void SegmentObserver::close_side(int side, double t) {
  const std::size_t x = side == 0 ? 1 : state_.n() - 1;
  boundary_segment(side, state_[x], side_start_[static_cast<std::size_t>(side)], t);
  side_start_[static_cast<std::size_t>(side)] = t;
}

void SegmentObserver::on_event(const Event& event, const Configuration& before) {
  const std::size_t n = state_.n();
  const double t = event.time;
  std::size_t lo = 0, hi = 0;  // affected sites [lo, hi]
  if (event.kind == EventKind::JumpRight || event.kind == EventKind::JumpLeft) {
    lo = event.site;
    hi = event.site + 1;
  } else {
    lo = hi = event.site;
  }
  for (std::size_t b = (lo > 1 ? lo - 1 : 1); b <= hi && b + 1 < n; ++b) close_bond(b, t);
  if (lo == 1) close_side(0, t);
  if (hi == n - 1) close_side(1, t);
  jump(event, before);
  apply(state_, event);
}

void SegmentObserver::on_finish(const Configuration& final_state, double horizon) {
  const std::size_t n = state_.n();
  for (std::size_t b = 1; b + 1 < n; ++b) close_bond(b, horizon);
  close_side(0, horizon);
  close_side(1, horizon);
  finished(final_state, horizon);
}

// ---------------------------------------------------------------- Dynkin

DynkinObserver::DynkinObserver(const ModelParams& params, const TestFunction& f, const Tilt* tilt)
    : params_(params) {
  f_.resize(params.n + 1);
  for (std::size_t x = 0; x <= params.n; ++x) f_[x] = f(static_cast<double>(x) / static_cast<double>(params.n));
  if (tilt) {
    owned_ = std::make_unique<LatticeTilt>(*tilt, params.n);
    tilt_ = owned_.get();
  }
}

double DynkinObserver::pairing(const Configuration& c) const {
  CompensatedSum s;
  for (std::size_t x = 1; x < params_.n; ++x) {
    if (c[x]) s.add(f_[x]);
  }
  return s.value() / static_cast<double>(params_.n);
}

void DynkinObserver::on_start(const Configuration& initial, double t0) {
  SegmentObserver::on_start(initial, t0);
  start_pairing_ = pairing(initial);
  drift_ = 0.0;
  qv_ = 0.0;
}

void DynkinObserver::bond_segment(std::size_t bond, int sigma, double a, double b) {
  const double df = (f_[bond + 1] - f_[bond]) / static_cast<double>(params_.n);
  const double n2 = params_.bulk_clock();
  double clock = n2 * (b - a);
  if (tilt_) {
    clock = integrate_in_time([&](double s) { return n2 * std::exp(sigma * tilt_->gradient(s, bond)); }, a, b,
                              tilt_->time_constant());
  }
  drift_ += sigma * df * clock;
  qv_ += df * df * clock;
}

void DynkinObserver::boundary_segment(int side, int occupied, double a, double b) {
  const std::size_t x = side == 0 ? 1 : params_.n - 1;
  const double r = params_.reservoir(x);
  const double fx = f_[x] / static_cast<double>(params_.n);
  const double base = params_.boundary_clock() * (occupied ? 1.0 - r : r);
  double clock = base * (b - a);
  if (tilt_) {
    clock = integrate_in_time(
        [&](double s) { return base * std::exp(occupied ? -tilt_->boundary(s, side) : tilt_->boundary(s, side)); },
        a, b, tilt_->time_constant());
  }
  drift_ += (occupied ? -fx : fx) * clock;
  qv_ += fx * fx * clock;
}

void DynkinObserver::finished(const Configuration& final_state, double) {
  result_.residual = pairing(final_state) - start_pairing_ - drift_;
  result_.quadratic_variation = qv_;
}

DynkinPath dynkin_path(const Trajectory& trajectory, const TestFunction& f, const Tilt* tilt) {
  DynkinObserver obs(trajectory.params, f, tilt);
  replay(trajectory, obs);
  return obs.result();
}

namespace {

DynkinStats reduce(const std::vector<DynkinPath>& paths) {
  std::vector<double> r(paths.size());
  CompensatedSum qv;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    r[k] = paths[k].residual;
    qv.add(paths[k].quadratic_variation);
  }
  const auto s = summarize(r);
  DynkinStats out;
  out.mean = s.mean;
  out.variance = s.variance;
  out.std_error = s.std_error;
  out.replicas = paths.size();
  out.mean_quadratic_variation = paths.empty() ? 0.0 : qv.value() / static_cast<double>(paths.size());
  return out;
}

}  // namespace

DynkinStats dynkin_residual(const std::vector<Trajectory>& trajectories, const TestFunction& f,
                            const Tilt* tilt) {
  std::vector<DynkinPath> paths;
  paths.reserve(trajectories.size());
  for (const auto& tr : trajectories) paths.push_back(dynkin_path(tr, f, tilt));
  return reduce(paths);
}

DynkinStats dynkin_experiment(const ModelParams& params, const Configuration& initial,
                              const Tilt* tilt, const TestFunction& f, std::size_t replicas,
                              std::uint64_t seed, std::size_t workers) {
  auto paths = run_replicas(replicas, workers, [&](std::size_t k) {
    DynkinObserver obs(params, f, tilt);
    SimulationOptions opt;
    opt.record_events = false;
    opt.observer = &obs;
    opt.stream = k;
    simulate(params, initial, tilt, {}, seed, opt);
    return obs.result();
  });
  return reduce(paths);
}

}  // namespace epsb
