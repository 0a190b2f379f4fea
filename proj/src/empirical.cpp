#include "epsb/empirical.hpp"

#include "epsb/error.hpp"
#include "epsb/numerics.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>

namespace epsb {

double pairing(const Configuration& config, const TestFunction& f) {
  const std::size_t n = config.n();
  CompensatedSum s;
  for (std::size_t x = 1; x < n; ++x) {
    if (config[x]) s.add(f(static_cast<double>(x) / static_cast<double>(n)));
  }
  return s.value() / static_cast<double>(n);
}

double mass(const Configuration& config) {
  return static_cast<double>(config.particles()) / static_cast<double>(config.n());
}

std::size_t box_size(std::size_t n, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::BoxOutOfRange, "eps must be positive");
  const auto k = static_cast<std::size_t>(std::floor(eps * static_cast<double>(n) + 1e-9));
  if (k == 0) throw Error(ErrorCode::BoxOutOfRange, "floor(eps n) is zero");
  return k;
}

bool box_contains(std::size_t n, std::size_t k, std::size_t y, std::size_t z) {
  if (y + k <= n - 1) return z >= y + 1 && z <= y + k;
  return z + k >= y && z + 1 <= y;
}

std::size_t box_count(const Configuration& config, std::size_t x, std::size_t k) {
  const std::size_t n = config.n();
  if (x < 1 || x > n - 1) throw Error(ErrorCode::BoxOutOfRange, "site outside the lattice");
  std::size_t lo, hi;
  if (x + k <= n - 1) {
    lo = x + 1;
    hi = x + k;
  } else {
    if (x < k + 1) throw Error(ErrorCode::BoxOutOfRange, "box leaves the lattice");
    lo = x - k;
    hi = x - 1;
  }
  std::size_t c = 0;
  for (std::size_t z = lo; z <= hi; ++z) c += static_cast<std::size_t>(config[z]);
  return c;
}

double box_average(const Configuration& config, std::size_t x, double eps) {
  const std::size_t k = box_size(config.n(), eps);
  return static_cast<double>(box_count(config, x, k)) / static_cast<double>(k);
}

// ---------------------------------------------------------------- kernels

namespace {

double raw_bump(double u) {
  if (u <= 0.25 || u >= 0.75) return 0.0;
  const double z = 4.0 * u - 2.0;
  return std::exp(-1.0 / (1.0 - z * z));
}

}  // namespace

double bump_constant() {
  static const double c = [] {
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(raw_bump, 0.25, 0.75, 15, 1e-14);
    return 1.0 / mass;
  }();
  return c;
}

double smooth_bump(double u) { return bump_constant() * raw_bump(u); }

namespace {

/// Profile value with even reflection about u = 1 (and u = 0).
double reflected(const Profile& p, double v) {
  if (v > 1.0) v = 2.0 - v;
  if (v < 0.0) v = -v;
  return p(v);
}

bool right_window(double u, double eps) { return u < 1.0 - eps - 1e-12; }

}  // namespace

Profile mollify(const Profile& profile, double eps, Kernel kernel) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::OutOfRange, "eps must lie in (0,1/2)");
  const std::size_t g = profile.grid_size();
  std::vector<double> out(g + 1);
  for (std::size_t i = 0; i <= g; ++i) {
    const double u = profile.node(i);
    double v = 0.0;
    if (kernel == Kernel::Box) {
      v = right_window(u, eps) ? (profile.primitive(u + eps) - profile.primitive(u)) / eps
                               : (profile.primitive(u) - profile.primitive(u - eps)) / eps;
    } else {
      // Dividing by the same rule applied to the bump keeps constants exact.
      static const double norm = gauss4(smooth_bump, 0.25, 0.75, 1.0 / 64.0);
      const auto integrand = [&](double s) { return reflected(profile, u + eps * s) * smooth_bump(s); };
      v = gauss4(integrand, 0.25, 0.75, 1.0 / 64.0) / norm;
    }
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return Profile(std::move(out));
}

Profile mollify(const Configuration& config, double eps, Kernel kernel, std::size_t grid_size) {
  if (!(eps > 0.0 && eps < 0.5)) throw Error(ErrorCode::OutOfRange, "eps must lie in (0,1/2)");
  const std::size_t n = config.n();
  const double nd = static_cast<double>(n);
  std::vector<double> out(grid_size + 1);
  for (std::size_t i = 0; i <= grid_size; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(grid_size);
    double v = 0.0;
    for (std::size_t x = 1; x < n; ++x) {
      if (!config[x]) continue;
      const double pos = static_cast<double>(x) / nd;
      if (kernel == Kernel::Box) {
        const bool inside = right_window(u, eps) ? (pos > u && pos < u + eps) : (pos > u - eps && pos < u);
        if (inside) v += 1.0;
      } else {
        v += smooth_bump((pos - u) / eps) + smooth_bump((2.0 - pos - u) / eps);
      }
    }
    v /= eps * nd;
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return Profile(std::move(out));
}

// ---------------------------------------------------------------- bond field

double DiscreteMeasure::total() const {
  CompensatedSum s;
  for (const auto& a : atoms) s.add(a.second);
  return s.value();
}

double DiscreteMeasure::pair(const TestFunction& f) const {
  CompensatedSum s;
  for (const auto& a : atoms) s.add(a.second * f(a.first));
  return s.value();
}

DiscreteMeasure chi_bond_field(const Configuration& config) {
  const std::size_t n = config.n();
  DiscreteMeasure m;
  const double w = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t x = 1; x + 1 < n; ++x) {
    if (config.discordant(x)) m.atoms.emplace_back(static_cast<double>(x) / static_cast<double>(n), w);
  }
  return m;
}

// ---------------------------------------------------------------- readouts

Profile density_profile(const Configuration& config, double eps, std::size_t grid_size) {
  const std::size_t n = config.n();
  const std::size_t k = box_size(n, eps);
  std::vector<double> out(grid_size + 1);
  for (std::size_t i = 0; i <= grid_size; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(grid_size);
    auto x = static_cast<std::size_t>(std::llround(u * static_cast<double>(n)));
    x = std::clamp<std::size_t>(x, 1, n - 1);
    out[i] = static_cast<double>(box_count(config, x, k)) / static_cast<double>(k);
  }
  return Profile(std::move(out));
}

Profile density_estimate(const Trajectory& trajectory, double t, double eps, std::size_t grid_size) {
  if (t < 0.0 || t > trajectory.params.horizon) throw Error(ErrorCode::OutOfRange, "readout time outside [0,T]");
  for (std::size_t j = 0; j < trajectory.schedule.size(); ++j) {
    if (trajectory.schedule[j] == t && j < trajectory.snapshots.size()) {
      return density_profile(trajectory.snapshots[j], eps, grid_size);
    }
  }
  return density_profile(trajectory.at(t), eps, grid_size);
}

double EmpiricalPath::mass_at(double t) const { return mass(traj_->at(t)); }

double EmpiricalPath::max_mass_drift() const {
  long long net = 0, worst = 0;
  for (const auto& e : traj_->events) {
    if (e.kind == EventKind::Create) ++net;
    if (e.kind == EventKind::Destroy) --net;
    worst = std::max(worst, net < 0 ? -net : net);
  }
  return static_cast<double>(worst) / static_cast<double>(traj_->params.n);
}

}  // namespace epsb
