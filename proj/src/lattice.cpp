#include "epsb/lattice.hpp"

#include "epsb/error.hpp"
#include "epsb/numerics.hpp"
#include "epsb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace epsb {

using std::numbers::pi;

Regime regime_of(double theta) {
  if (theta < 0.0) throw Error(ErrorCode::OutOfRange, "theta must be nonnegative");
  if (theta == 1.0) throw Error(ErrorCode::ThetaRegime, "theta = 1 is the critical case and has no regime");
  return theta < 1.0 ? Regime::Dirichlet : Regime::Neumann;
}

const char* to_string(Regime regime) noexcept {
  return regime == Regime::Dirichlet ? "dirichlet" : "neumann";
}

double ModelParams::boundary_clock() const {
  return std::pow(static_cast<double>(n), 2.0 - theta);
}

ModelParams validate_params(long long n, double theta, double alpha, double beta, double horizon) {
  if (n < 3) throw Error(ErrorCode::OutOfRange, "n: must be at least 3");
  if (!(theta >= 0.0) || !std::isfinite(theta)) throw Error(ErrorCode::OutOfRange, "theta: must be a finite nonnegative number");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::OutOfRange, "alpha: must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw Error(ErrorCode::OutOfRange, "beta: must lie in (0,1)");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::OutOfRange, "horizon: must be a finite nonnegative number");
  ModelParams p;
  p.n = static_cast<std::size_t>(n);
  p.theta = theta;
  p.alpha = alpha;
  p.beta = beta;
  p.horizon = horizon;
  return p;
}

double chi(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorCode::DomainError, "chi: argument outside [0,1]");
  return u * (1.0 - u);
}

// ---------------------------------------------------------------- Configuration

Configuration::Configuration(std::size_t n) {
  if (n < 3) throw Error(ErrorCode::OutOfRange, "configuration needs n >= 3");
  occ_.assign(n - 1, 0);
}

Configuration::Configuration(std::size_t n, std::vector<std::uint8_t> occupancy)
    : occ_(std::move(occupancy)) {
  if (n < 3 || occ_.size() != n - 1) throw Error(ErrorCode::OutOfRange, "configuration length must be n-1");
  for (auto v : occ_) {
    if (v > 1) throw Error(ErrorCode::OutOfRange, "occupancy entries must be 0 or 1");
  }
}

Configuration Configuration::from_string(const std::string& bits) {
  std::vector<std::uint8_t> occ;
  occ.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw Error(ErrorCode::OutOfRange, "configuration string must contain only 0/1");
    occ.push_back(static_cast<std::uint8_t>(c - '0'));
  }
  return Configuration(bits.size() + 1, std::move(occ));
}

void Configuration::set(std::size_t x, int value) {
  if (value != 0 && value != 1) throw Error(ErrorCode::OutOfRange, "occupancy must be 0 or 1");
  occ_[x - 1] = static_cast<std::uint8_t>(value);
}

std::size_t Configuration::particles() const {
  return static_cast<std::size_t>(std::count(occ_.begin(), occ_.end(), std::uint8_t{1}));
}

std::string Configuration::to_string() const {
  std::string s(occ_.size(), '0');
  for (std::size_t i = 0; i < occ_.size(); ++i) s[i] = occ_[i] ? '1' : '0';
  return s;
}

// ---------------------------------------------------------------- Profile

Profile::Profile(std::vector<double> values) : values_(std::move(values)) {
  if (values_.size() < 3) throw Error(ErrorCode::OutOfRange, "profile grid needs G >= 2");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OutOfRange, "profile values must lie in [0,1]");
  }
}

Profile Profile::from_function(std::size_t grid_size, const std::function<double(double)>& f) {
  std::vector<double> v(grid_size + 1);
  for (std::size_t i = 0; i <= grid_size; ++i) {
    v[i] = f(static_cast<double>(i) / static_cast<double>(grid_size));
  }
  return Profile(std::move(v));
}

Profile Profile::constant(std::size_t grid_size, double c) {
  return Profile(std::vector<double>(grid_size + 1, c));
}

double Profile::operator()(double u) const {
  const std::size_t g = grid_size();
  const double x = std::clamp(u, 0.0, 1.0) * static_cast<double>(g);
  auto i = static_cast<std::size_t>(x);
  if (i >= g) return values_[g];
  const double w = x - static_cast<double>(i);
  return (1.0 - w) * values_[i] + w * values_[i + 1];
}

double Profile::primitive(double u) const {
  const std::size_t g = grid_size();
  const double h = spacing();
  const double x = std::clamp(u, 0.0, 1.0) * static_cast<double>(g);
  auto full = static_cast<std::size_t>(x);
  if (full > g) full = g;
  double acc = 0.0;
  for (std::size_t i = 0; i < full && i < g; ++i) acc += 0.5 * h * (values_[i] + values_[i + 1]);
  if (full < g) {
    const double w = x - static_cast<double>(full);
    const double end = (1.0 - w) * values_[full] + w * values_[full + 1];
    acc += 0.5 * w * h * (values_[full] + end);
  }
  return acc;
}

Profile Profile::resampled(std::size_t grid_size) const {
  if (grid_size == this->grid_size()) return *this;
  return from_function(grid_size, [this](double u) { return (*this)(u); });
}

// ---------------------------------------------------------------- Shape

Shape::Shape(Kind kind, std::vector<double> coefficients) : kind_(kind), coeffs_(std::move(coefficients)) {
  const auto need = [&](std::size_t k, const char* what) {
    if (coeffs_.size() != k) throw Error(ErrorCode::ConfigError, what);
  };
  switch (kind_) {
    case Kind::Linear:
      if (coeffs_.empty() || coeffs_.size() > 2) throw Error(ErrorCode::ConfigError, "linear takes [a] or [a, b]");
      if (coeffs_.size() == 1) coeffs_.push_back(0.0);
      break;
    case Kind::Sine:
    case Kind::Cosine:
      if (coeffs_.empty()) throw Error(ErrorCode::ConfigError, "sine/cosine need at least one coefficient");
      break;
    case Kind::GAlphaBeta:
      need(3, "g_alpha_beta takes [alpha, beta, delta]");
      if (!(coeffs_[2] > 0.0 && coeffs_[2] < 0.5)) throw Error(ErrorCode::OutOfRange, "delta must lie in (0,1/2)");
      break;
    case Kind::Bump:
      need(3, "bump takes [amplitude, center, halfwidth]");
      if (!(coeffs_[2] > 0.0)) throw Error(ErrorCode::ConfigError, "bump halfwidth must be positive");
      break;
  }
}

Shape Shape::parse(const std::string& name, std::vector<double> coefficients) {
  if (name == "linear") return Shape(Kind::Linear, std::move(coefficients));
  if (name == "sine") return Shape(Kind::Sine, std::move(coefficients));
  if (name == "cosine") return Shape(Kind::Cosine, std::move(coefficients));
  if (name == "g_alpha_beta") return Shape(Kind::GAlphaBeta, std::move(coefficients));
  if (name == "bump") return Shape(Kind::Bump, std::move(coefficients));
  throw Error(ErrorCode::ConfigError, "unknown shape '" + name + "'");
}

std::string Shape::name() const {
  switch (kind_) {
    case Kind::Linear: return "linear";
    case Kind::Sine: return "sine";
    case Kind::Cosine: return "cosine";
    case Kind::GAlphaBeta: return "g_alpha_beta";
    case Kind::Bump: return "bump";
  }
  return "linear";
}

namespace {

struct BumpParts {
  double g = 0, z = 0, q = 1;
  bool inside = false;
};

BumpParts bump_parts(const std::vector<double>& c, double u) {
  BumpParts b;
  b.z = (u - c[1]) / c[2];
  b.q = 1.0 - b.z * b.z;
  b.inside = b.q > 0.0;
  b.g = b.inside ? std::exp(-1.0 / b.q) : 0.0;
  return b;
}

}  // namespace

double Shape::value(double u) const {
  switch (kind_) {
    case Kind::Linear: return coeffs_[0] + coeffs_[1] * u;
    case Kind::Sine: {
      double s = 0;
      for (std::size_t k = 0; k < coeffs_.size(); ++k) s += coeffs_[k] * std::sin(static_cast<double>(k + 1) * pi * u);
      return s;
    }
    case Kind::Cosine: {
      double s = coeffs_[0];
      for (std::size_t k = 1; k < coeffs_.size(); ++k) s += coeffs_[k] * std::cos(static_cast<double>(k) * pi * u);
      return s;
    }
    case Kind::GAlphaBeta: {
      const double a = coeffs_[0], b = coeffs_[1], d = coeffs_[2];
      if (u <= d) return a;
      if (u >= 1.0 - d) return b;
      return a + (b - a) * (u - d) / (1.0 - 2.0 * d);
    }
    case Kind::Bump: return coeffs_[0] * bump_parts(coeffs_, u).g;
  }
  return 0.0;
}

double Shape::d1(double u) const {
  switch (kind_) {
    case Kind::Linear: return coeffs_[1];
    case Kind::Sine: {
      double s = 0;
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const double w = static_cast<double>(k + 1) * pi;
        s += coeffs_[k] * w * std::cos(w * u);
      }
      return s;
    }
    case Kind::Cosine: {
      double s = 0;
      for (std::size_t k = 1; k < coeffs_.size(); ++k) {
        const double w = static_cast<double>(k) * pi;
        s -= coeffs_[k] * w * std::sin(w * u);
      }
      return s;
    }
    case Kind::GAlphaBeta: {
      const double a = coeffs_[0], b = coeffs_[1], d = coeffs_[2];
      if (u <= d || u >= 1.0 - d) return 0.0;
      return (b - a) / (1.0 - 2.0 * d);
    }
    case Kind::Bump: {
      const auto p = bump_parts(coeffs_, u);
      if (!p.inside) return 0.0;
      return coeffs_[0] * p.g * (-2.0 * p.z / (p.q * p.q)) / coeffs_[2];
    }
  }
  return 0.0;
}

double Shape::d2(double u) const {
  switch (kind_) {
    case Kind::Linear: return 0.0;
    case Kind::Sine: {
      double s = 0;
      for (std::size_t k = 0; k < coeffs_.size(); ++k) {
        const double w = static_cast<double>(k + 1) * pi;
        s -= coeffs_[k] * w * w * std::sin(w * u);
      }
      return s;
    }
    case Kind::Cosine: {
      double s = 0;
      for (std::size_t k = 1; k < coeffs_.size(); ++k) {
        const double w = static_cast<double>(k) * pi;
        s -= coeffs_[k] * w * w * std::cos(w * u);
      }
      return s;
    }
    case Kind::GAlphaBeta: return 0.0;
    case Kind::Bump: {
      const auto p = bump_parts(coeffs_, u);
      if (!p.inside) return 0.0;
      const double first = -2.0 * p.z / (p.q * p.q);
      const double second = -2.0 / (p.q * p.q) - 8.0 * p.z * p.z / (p.q * p.q * p.q);
      return coeffs_[0] * p.g * (first * first + second) / (coeffs_[2] * coeffs_[2]);
    }
  }
  return 0.0;
}

Profile profile_g_alpha_beta(double alpha, double beta, double delta, std::size_t grid_size) {
  if (!(delta > 0.0 && delta < 0.5)) throw Error(ErrorCode::OutOfRange, "delta must lie in (0,1/2)");
  return sample_shape(Shape(Shape::Kind::GAlphaBeta, {alpha, beta, delta}), grid_size);
}

Profile sample_shape(const Shape& shape, std::size_t grid_size) {
  return Profile::from_function(grid_size, [&](double u) { return shape.value(u); });
}

Configuration sample_bernoulli_product(const Profile& profile, std::size_t n, std::uint64_t seed) {
  Rng rng(seed, 0);
  Configuration c(n);
  for (std::size_t x = 1; x < n; ++x) {
    const double p = profile(static_cast<double>(x) / static_cast<double>(n));
    c.set(x, rng.uniform() < p ? 1 : 0);
  }
  return c;
}

Configuration deterministic_config(const Profile& profile, std::size_t n) {
  Configuration c(n);
  const double nd = static_cast<double>(n);
  // The small offset keeps exact integer multiples from rounding down.
  const auto level = [&](std::size_t x) {
    return std::floor(nd * profile.primitive(static_cast<double>(x) / nd) + 1e-9);
  };
  double prev = level(0);
  for (std::size_t x = 1; x < n; ++x) {
    const double cur = level(x);
    c.set(x, cur > prev ? 1 : 0);
    prev = cur;
  }
  return c;
}

// ---------------------------------------------------------------- SpaceTimeProfile

SpaceTimeProfile::SpaceTimeProfile(double horizon, std::size_t grid_size, std::vector<double> values)
    : horizon_(horizon), grid_(grid_size), values_(std::move(values)) {
  if (grid_ < 2) throw Error(ErrorCode::OutOfRange, "space-time profile needs G >= 2");
  if (values_.empty() || values_.size() % (grid_ + 1) != 0) {
    throw Error(ErrorCode::OutOfRange, "space-time profile size is not a multiple of G+1");
  }
  frames_ = values_.size() / (grid_ + 1);
  if (frames_ < 2 && horizon_ > 0.0) throw Error(ErrorCode::OutOfRange, "space-time profile needs at least two frames");
  if (!(horizon_ >= 0.0)) throw Error(ErrorCode::OutOfRange, "horizon must be nonnegative");
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::OutOfRange, "space-time profile values must lie in [0,1]");
  }
}

SpaceTimeProfile::SpaceTimeProfile(double horizon, const std::vector<Profile>& frames) {
  if (frames.empty()) throw Error(ErrorCode::OutOfRange, "no frames");
  const std::size_t g = frames.front().grid_size();
  std::vector<double> v;
  v.reserve(frames.size() * (g + 1));
  for (const auto& f : frames) {
    if (f.grid_size() != g) throw Error(ErrorCode::OutOfRange, "frames must share one spatial grid");
    v.insert(v.end(), f.values().begin(), f.values().end());
  }
  *this = SpaceTimeProfile(horizon, g, std::move(v));
}

SpaceTimeProfile SpaceTimeProfile::from_function(double horizon, std::size_t time_steps,
                                                 std::size_t grid_size,
                                                 const std::function<double(double, double)>& f) {
  std::vector<double> v((time_steps + 1) * (grid_size + 1));
  for (std::size_t m = 0; m <= time_steps; ++m) {
    const double t = horizon * static_cast<double>(m) / static_cast<double>(time_steps);
    for (std::size_t i = 0; i <= grid_size; ++i) {
      v[m * (grid_size + 1) + i] = f(t, static_cast<double>(i) / static_cast<double>(grid_size));
    }
  }
  return SpaceTimeProfile(horizon, grid_size, std::move(v));
}

double SpaceTimeProfile::time_step() const {
  return frames_ > 1 ? horizon_ / static_cast<double>(frames_ - 1) : 0.0;
}

double SpaceTimeProfile::time(std::size_t m) const {
  if (m + 1 == frames_) return horizon_;
  return horizon_ * static_cast<double>(m) / static_cast<double>(frames_ - 1);
}

std::vector<double> SpaceTimeProfile::frame_values(std::size_t m) const {
  const double* r = row(m);
  return std::vector<double>(r, r + grid_ + 1);
}

std::vector<double> SpaceTimeProfile::masses() const {
  std::vector<double> out(frames_);
  for (std::size_t m = 0; m < frames_; ++m) out[m] = trapezoid(frame_values(m), spacing());
  return out;
}

}  // namespace epsb
