#include "epsb/ldp.hpp"

#include "epsb/empirical.hpp"
#include "epsb/error.hpp"
#include "epsb/numerics.hpp"
#include "epsb/parallel.hpp"
#include "epsb/rng.hpp"
#include "epsb/variational.hpp"

#include <algorithm>
#include <cmath>

namespace epsb {

// ---------------------------------------------------------------- primary weight

RnWeightObserver::RnWeightObserver(const ModelParams& params, const Tilt& tilt)
    : params_(params), tilt_(tilt, params.n) {}

void RnWeightObserver::bond_segment(std::size_t bond, int sigma, double a, double b) {
  const double n2 = params_.bulk_clock();
  holding_.add(-integrate_in_time([&](double s) { return n2 * (1.0 - std::exp(sigma * tilt_.gradient(s, bond))); },
                                  a, b, tilt_.time_constant()));
}

void RnWeightObserver::boundary_segment(int side, int occupied, double a, double b) {
  const double r = params_.reservoir(side == 0 ? 1 : params_.n - 1);
  const double base = params_.boundary_clock() * (occupied ? 1.0 - r : r);
  if (base == 0.0) return;
  const double sign = occupied ? -1.0 : 1.0;
  holding_.add(-integrate_in_time([&](double s) { return base * (1.0 - std::exp(sign * tilt_.boundary(s, side))); },
                                  a, b, tilt_.time_constant()));
}

void RnWeightObserver::jump(const Event& e, const Configuration& before) {
  const std::size_t x = e.site;
  switch (e.kind) {
    case EventKind::JumpRight:
    case EventKind::JumpLeft: {
      const int sigma = before[x] - before[x + 1];
      if (sigma != (e.kind == EventKind::JumpRight ? 1 : -1)) {
        throw Error(ErrorCode::RateMismatch, "jump across a bond whose rate is zero");
      }
      jumps_.add(-sigma * tilt_.gradient(e.time, x));
      break;
    }
    case EventKind::Create:
    case EventKind::Destroy: {
      const bool create = e.kind == EventKind::Create;
      const double r = params_.reservoir(x);
      if ((x != 1 && x != params_.n - 1) || before[x] == (create ? 1 : 0) || (create ? r : 1.0 - r) == 0.0) {
        throw Error(ErrorCode::RateMismatch, "boundary event with zero rate");
      }
      const double g = tilt_.boundary(e.time, x == 1 ? 0 : 1);
      jumps_.add(create ? -g : g);
      break;
    }
  }
}

double rn_log_weight(const Trajectory& trajectory, const Tilt& tilt) {
  RnWeightObserver obs(trajectory.params, tilt);
  replay(trajectory, obs);
  return obs.log_weight();
}

// ---------------------------------------------------------------- expanded weight

namespace {

/// A + B integrand pieces for a fixed configuration.
struct ExpandedForm {
  const ModelParams& p;
  const SpaceTimeField& H;
  double nd;
  double boundary_scale;  // n^{1-theta}

  double h(double s, std::size_t x) const { return H.value(s, static_cast<double>(x) / nd); }

  double pairing(const Configuration& c, double s) const {
    CompensatedSum acc;
    for (std::size_t x = 1; x < p.n; ++x) {
      if (c[x]) acc.add(h(s, x));
    }
    return acc.value() / nd;
  }

  /// -<pi, d_s H> plus the B integrand.
  double integrand(const Configuration& c, double s) const {
    const std::size_t n = p.n;
    std::vector<double> hv(n + 1);
    for (std::size_t x = 0; x <= n; ++x) hv[x] = h(s, x);
    const auto sh = [&](std::size_t x) { return std::sinh(hv[x + 1] - hv[x]); };  // bond x
    CompensatedSum acc;
    for (std::size_t x = 1; x < n; ++x) {
      if (c[x]) acc.add(-H.dt(s, static_cast<double>(x) / nd) / nd);
    }
    // -<pi, Lap H> over x = 2..n-2
    for (std::size_t x = 2; x + 2 <= n; ++x) {
      if (c[x]) acc.add(-nd * (sh(x) - sh(x - 1)));
    }
    // -<chi^n, (grad H)^2>
    for (std::size_t x = 1; x + 2 <= n; ++x) {
      if (c[x] != c[x + 1]) acc.add(-(1.0 / (2.0 * nd)) * 2.0 * nd * nd * (std::cosh(hv[x + 1] - hv[x]) - 1.0));
    }
    if (c[n - 1]) acc.add(nd * sh(n - 2));
    if (c[1]) acc.add(-nd * sh(1));
    // boundary exponentials, with G = H at 1/n and (n-1)/n
    const std::array<std::size_t, 2> site{1, n - 1};
    for (int side = 0; side < 2; ++side) {
      const std::size_t x = site[static_cast<std::size_t>(side)];
      const double r = p.reservoir(x);
      const double g = hv[x];
      const double v = c[x] ? (1.0 - r) * (1.0 - std::exp(-g)) : r * (1.0 - std::exp(g));
      acc.add(boundary_scale * v);
    }
    return acc.value();
  }
};

}  // namespace

double rn_log_weight_expanded(const Trajectory& trajectory, const Tilt& tilt) {
  if (!tilt.g_matches_h) throw Error(ErrorCode::DomainError, "expanded weight needs G = H at the boundary sites");
  if (!trajectory.events_recorded) throw Error(ErrorCode::DomainError, "trajectory was simulated without an event log");
  const ModelParams& p = trajectory.params;
  const double nd = static_cast<double>(p.n);
  const ExpandedForm form{p, tilt.H, nd, std::pow(nd, 1.0 - p.theta)};
  const bool frozen = tilt.H.time_constant();

  Configuration c = trajectory.initial;
  CompensatedSum integral;
  double last = 0.0;
  const auto advance = [&](double t) {
    integral.add(integrate_in_time([&](double s) { return form.integrand(c, s); }, last, t, frozen));
    last = t;
  };
  for (const auto& e : trajectory.events) {
    advance(e.time);
    apply(c, e);
  }
  advance(p.horizon);
  const double A_end = form.pairing(c, p.horizon) - form.pairing(trajectory.initial, 0.0);
  return -nd * (A_end + integral.value());
}

// ---------------------------------------------------------------- ensembles

WeightedEnsemble weighted_ensemble(const ModelParams& params, const Configuration& initial,
                                   const Tilt& tilt, std::size_t replicas, std::uint64_t seed,
                                   std::vector<double> schedule, std::size_t workers) {
  struct Out {
    Trajectory traj;
    double lw = 0.0;
  };
  auto runs = run_replicas(replicas, workers, [&](std::size_t k) {
    RnWeightObserver obs(params, tilt);
    SimulationOptions opt;
    opt.observer = &obs;
    opt.stream = k;
    Out o;
    o.traj = simulate(params, initial, &tilt, schedule, seed, opt);
    o.lw = obs.log_weight();
    return o;
  });
  WeightedEnsemble ens;
  ens.tilt = std::make_shared<Tilt>(tilt);
  ens.seed = seed;
  for (auto& r : runs) {
    ens.trajectories.push_back(std::move(r.traj));
    ens.log_weights.push_back(r.lw);
  }
  return ens;
}

EntropyEstimate relative_entropy_rate(const ModelParams& params, const Configuration& initial,
                                      const Tilt& tilt, std::size_t replicas, std::uint64_t seed,
                                      std::size_t workers) {
  const std::vector<double> lw = run_replicas(replicas, workers, [&](std::size_t k) {
    RnWeightObserver obs(params, tilt);
    SimulationOptions opt;
    opt.record_events = false;
    opt.observer = &obs;
    opt.stream = k;
    simulate(params, initial, &tilt, {}, seed, opt);
    return obs.log_weight();
  });
  const double nd = static_cast<double>(params.n);
  const MeanStderr s = summarize(lw);
  std::vector<double> w(lw.size());
  std::transform(lw.begin(), lw.end(), w.begin(), [](double x) { return std::exp(x); });
  const MeanStderr sw = summarize(w);
  EntropyEstimate e;
  e.value = -s.mean / nd;
  e.std_error = s.std_error / nd;
  e.mean_log_weight = s.mean;
  e.mean_weight = sw.mean;
  e.weight_std_error = sw.std_error;
  e.replicas = replicas;
  return e;
}

double tilted_quadratic_cost(const ModelParams& params, const Profile& gamma, const SpaceTimeField& H,
                             std::size_t cells, std::size_t frames) {
  SolverGrid grid;
  grid.cells = cells;
  grid.horizon = params.horizon;
  grid.frames = frames;
  const SpaceTimeProfile rho = solve(gamma, boundary_for(params.regime_spec(), H), grid);
  return quadratic_cost(rho, H);
}

ImportanceEstimate importance_probability(const ModelParams& params, const Configuration& initial,
                                          const Tilt& tilt, const PathPredicate& predicate,
                                          std::size_t replicas, std::uint64_t seed,
                                          std::vector<double> schedule, std::size_t workers) {
  struct Out {
    bool hit = false;
    double lw = 0.0;
  };
  const auto runs = run_replicas(replicas, workers, [&](std::size_t k) {
    RnWeightObserver obs(params, tilt);
    SimulationOptions opt;
    opt.observer = &obs;
    opt.stream = k;
    const Trajectory traj = simulate(params, initial, &tilt, schedule, seed, opt);
    return Out{predicate(traj), obs.log_weight()};
  });
  std::vector<double> v(replicas);
  CompensatedSum num, den;
  ImportanceEstimate est;
  for (std::size_t k = 0; k < replicas; ++k) {
    const double w = std::exp(runs[k].lw);
    v[k] = runs[k].hit ? w : 0.0;
    num.add(v[k]);
    den.add(w);
    est.hits += runs[k].hit ? 1 : 0;
  }
  const MeanStderr s = summarize(v);
  est.estimate = s.mean;
  est.std_error = s.std_error;
  est.self_normalized = den.value() > 0.0 ? num.value() / den.value() : 0.0;
  est.replicas = replicas;
  return est;
}

// ---------------------------------------------------------------- tails

double poisson_ld_bound(double x, double a) {
  if (!(x > 0.0) || !(a > 0.0)) throw Error(ErrorCode::DomainError, "poisson_ld_bound needs x > 0 and a > 0");
  return x - a - x * std::log(x / a);
}

double boundary_rate_bound(const ModelParams& p) {
  return std::max(p.alpha, 1.0 - p.alpha) + std::max(p.beta, 1.0 - p.beta);
}

double poisson_tail_bound(const ModelParams& p, double lambda, double c) {
  const double nd = static_cast<double>(p.n);
  const double a = c * std::pow(nd, 1.0 - p.theta) * p.horizon;
  if (lambda <= a || a <= 0.0) return a <= 0.0 && lambda > 0.0 ? 0.0 : 1.0;
  return std::exp(nd * poisson_ld_bound(lambda, a));
}

namespace {

void require_supercritical(const ModelParams& p) {
  if (!(p.theta > 1.0)) throw Error(ErrorCode::ThetaRegime, "tail experiments need theta > 1");
}

/// Tracks the mass excursion and the two boundary currents.
class BoundaryObserver : public EventObserver {
 public:
  void on_event(const Event& e, const Configuration&) override {
    if (e.kind == EventKind::Create || e.kind == EventKind::Destroy) {
      const int d = e.kind == EventKind::Create ? 1 : -1;
      net_ += d;
      max_drift_ = std::max(max_drift_, std::abs(net_));
      if (e.site == 1) left_ += d;
      else right_ -= d;
    }
  }
  long long max_drift() const { return max_drift_; }
  long long left() const { return left_; }
  long long right() const { return right_; }

 private:
  long long net_ = 0, max_drift_ = 0, left_ = 0, right_ = 0;
};

struct BoundaryRecord {
  long long max_drift = 0, left = 0, right = 0;
};

std::vector<BoundaryRecord> boundary_runs(const ModelParams& params, const Configuration& initial,
                                          std::size_t replicas, std::uint64_t seed, std::size_t workers) {
  return run_replicas(replicas, workers, [&](std::size_t k) {
    BoundaryObserver obs;
    SimulationOptions opt;
    opt.record_events = false;
    opt.observer = &obs;
    opt.stream = k;
    simulate(params, initial, nullptr, {}, seed, opt);
    return BoundaryRecord{obs.max_drift(), obs.left(), obs.right()};
  });
}

TailRow make_row(const ModelParams& p, double lambda, std::size_t hits, std::size_t m, double bound) {
  TailRow r;
  r.n = p.n;
  r.theta = p.theta;
  r.lambda = lambda;
  r.hits = hits;
  r.replicas = m;
  r.frequency = m ? static_cast<double>(hits) / static_cast<double>(m) : 0.0;
  r.std_error = m ? std::sqrt(r.frequency * (1.0 - r.frequency) / static_cast<double>(m)) : 0.0;
  r.bound = bound;
  return r;
}

}  // namespace

std::vector<TailRow> mass_tail_experiment(const ModelParams& params, const Configuration& initial,
                                          const std::vector<double>& lambdas, std::size_t replicas,
                                          std::uint64_t seed, std::size_t workers) {
  require_supercritical(params);
  const auto runs = boundary_runs(params, initial, replicas, seed, workers);
  const double nd = static_cast<double>(params.n);
  const double c = boundary_rate_bound(params);
  std::vector<TailRow> rows;
  for (double lambda : lambdas) {
    std::size_t hits = 0;
    for (const auto& r : runs) hits += static_cast<double>(r.max_drift) / nd > lambda ? 1 : 0;
    rows.push_back(make_row(params, lambda, hits, replicas, poisson_tail_bound(params, lambda, c)));
  }
  return rows;
}

std::vector<CurrentTailRow> boundary_current_tail(const ModelParams& params, const Configuration& initial,
                                                  const std::vector<double>& lambdas, std::size_t replicas,
                                                  std::uint64_t seed, std::size_t workers) {
  require_supercritical(params);
  const auto runs = boundary_runs(params, initial, replicas, seed, workers);
  const double nd = static_cast<double>(params.n);
  const double c = boundary_rate_bound(params);
  std::vector<CurrentTailRow> rows;
  for (double lambda : lambdas) {
    std::size_t l = 0, r = 0;
    for (const auto& run : runs) {
      l += static_cast<double>(run.left) / nd > lambda ? 1 : 0;
      r += static_cast<double>(run.right) / nd > lambda ? 1 : 0;
    }
    const double bound = poisson_tail_bound(params, lambda, c);
    rows.push_back({make_row(params, lambda, l, replicas, bound), make_row(params, lambda, r, replicas, bound)});
  }
  return rows;
}

// ---------------------------------------------------------------- replacement

ReplacementObserver::ReplacementObserver(const ModelParams& params, double eps, ReplacementSite site,
                                         const TestFunction& phi)
    : params_(params), k_(box_size(params.n, eps)), site_(site),
      dirichlet_(regime_of(params.theta) == Regime::Dirichlet) {
  phi_.resize(params.n + 1);
  for (std::size_t x = 0; x <= params.n; ++x) phi_[x] = phi(static_cast<double>(x) / static_cast<double>(params.n));
}

namespace {

double chi_of_count(int count, std::size_t k) {
  const double c = static_cast<double>(count) / static_cast<double>(k);
  return c * (1.0 - c);
}

}  // namespace

void ReplacementObserver::on_start(const Configuration& initial, double t0) {
  state_ = initial;
  const std::size_t n = params_.n;
  box_.assign(n, 0);
  for (std::size_t y = 1; y < n; ++y) box_[y] = static_cast<int>(box_count(state_, y, k_));
  bulk_ = CompensatedSum();
  for (std::size_t x = 1; x + 2 <= n; ++x) {
    const double d = state_[x] != state_[x + 1] ? 0.5 : 0.0;
    bulk_.add(phi_[x] * (d - chi_of_count(box_[x], k_)));
  }
  integral_ = CompensatedSum();
  last_ = t0;
}

double ReplacementObserver::current_value() const {
  const std::size_t n = params_.n;
  switch (site_) {
    case ReplacementSite::Bulk: return bulk_.value() / static_cast<double>(n);
    case ReplacementSite::Left:
    case ReplacementSite::Right: {
      const std::size_t x = site_ == ReplacementSite::Left ? 1 : n - 1;
      const double ref = dirichlet_ ? params_.reservoir(x) : static_cast<double>(box_[x]) / static_cast<double>(k_);
      return phi_[x] * (state_[x] - ref);
    }
  }
  return 0.0;
}

void ReplacementObserver::on_event(const Event& e, const Configuration&) {
  const double t = e.time;
  integral_.add(current_value() * (t - last_));
  last_ = t;
  const std::size_t n = params_.n;
  const std::size_t k = k_;

  // Sites whose occupation changes and the bulk indices x in 1..n-2 whose term changes.
  std::vector<std::size_t> sites;
  std::vector<std::size_t> boxes;
  if (e.kind == EventKind::JumpRight || e.kind == EventKind::JumpLeft) {
    const std::size_t x = e.site;
    sites = {x, x + 1};
    for (long long y : {static_cast<long long>(x) - static_cast<long long>(k), static_cast<long long>(x),
                        static_cast<long long>(x) + 1, static_cast<long long>(x + k + 1)}) {
      if (y >= 1 && y <= static_cast<long long>(n - 1)) boxes.push_back(static_cast<std::size_t>(y));
    }
  } else {
    const std::size_t z = e.site;
    sites = {z};
    const std::size_t lo = z > k ? z - k : 1;
    for (std::size_t y = lo; y <= std::min(n - 1, z + k); ++y) boxes.push_back(y);
  }
  std::vector<std::size_t> touched = boxes;
  for (std::size_t s : sites) {
    if (s >= 2) touched.push_back(s - 1);
    touched.push_back(s);
  }
  std::sort(touched.begin(), touched.end());
  touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
  std::sort(boxes.begin(), boxes.end());
  boxes.erase(std::unique(boxes.begin(), boxes.end()), boxes.end());

  const auto term = [&](std::size_t x) {
    const double d = state_[x] != state_[x + 1] ? 0.5 : 0.0;
    return phi_[x] * (d - chi_of_count(box_[x], k));
  };
  for (std::size_t x : touched) {
    if (x >= 1 && x + 2 <= n) bulk_.add(-term(x));
  }
  std::vector<int> old(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) old[i] = state_[sites[i]];
  apply(state_, e);
  for (std::size_t y : boxes) {
    int delta = 0;
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (box_contains(n, k, y, sites[i])) delta += state_[sites[i]] - old[i];
    }
    box_[y] += delta;
  }
  for (std::size_t x : touched) {
    if (x >= 1 && x + 2 <= n) bulk_.add(term(x));
  }
}

void ReplacementObserver::on_finish(const Configuration&, double horizon) {
  integral_.add(current_value() * (horizon - last_));
  last_ = horizon;
}

ReplacementStats replacement_residual(const ModelParams& params, double eps, ReplacementSite site,
                                      const TestFunction& phi, const Profile& initial_profile,
                                      std::size_t replicas, std::uint64_t seed, std::size_t workers) {
  regime_of(params.theta);
  const std::vector<double> v = run_replicas(replicas, workers, [&](std::size_t k) {
    Rng init(seed, (std::uint64_t{1} << 40) + k);
    Configuration c(params.n);
    for (std::size_t x = 1; x < params.n; ++x) {
      c.set(x, init.bernoulli(initial_profile(static_cast<double>(x) / static_cast<double>(params.n))) ? 1 : 0);
    }
    ReplacementObserver obs(params, eps, site, phi);
    SimulationOptions opt;
    opt.record_events = false;
    opt.observer = &obs;
    opt.stream = k;
    simulate(params, c, nullptr, {}, seed, opt);
    return obs.integral();
  });
  std::vector<double> a(v.size());
  std::transform(v.begin(), v.end(), a.begin(), [](double x) { return std::abs(x); });
  const MeanStderr s = summarize(v), sa = summarize(a);
  ReplacementStats r;
  r.n = params.n;
  r.eps = eps;
  r.mean = s.mean;
  r.std_error = s.std_error;
  r.mean_abs = sa.mean;
  r.std_error_abs = sa.std_error;
  r.replicas = replicas;
  return r;
}

double replacement_stationary_mean(std::size_t n, double eps, double rho, const TestFunction& phi, double horizon) {
  const std::size_t k = box_size(n, eps);
  CompensatedSum s;
  for (std::size_t x = 1; x + 2 <= n; ++x) s.add(phi(static_cast<double>(x) / static_cast<double>(n)));
  return horizon * s.value() / static_cast<double>(n) * chi(rho) / static_cast<double>(k);
}

}  // namespace epsb
