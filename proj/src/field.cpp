#include "epsb/field.hpp"

#include "epsb/error.hpp"

#include <algorithm>
#include <cmath>

namespace epsb {

const char* to_string(FieldClass cls) noexcept {
  return cls == FieldClass::DirichletZero ? "DirichletZero" : "Free";
}

FieldClass class_for(Regime regime) noexcept {
  return regime == Regime::Dirichlet ? FieldClass::DirichletZero : FieldClass::Free;
}

double TimePolynomial::value(double t) const {
  double s = 0.0;
  for (std::size_t j = coefficients.size(); j-- > 0;) s = s * t + coefficients[j];
  return s;
}

double TimePolynomial::d1(double t) const {
  double s = 0.0;
  for (std::size_t j = coefficients.size(); j-- > 1;) s = s * t + static_cast<double>(j) * coefficients[j];
  return s;
}

bool TimePolynomial::constant() const {
  for (std::size_t j = 1; j < coefficients.size(); ++j) {
    if (coefficients[j] != 0.0) return false;
  }
  return true;
}

// ---------------------------------------------------------------- representation

struct SpaceTimeField::Impl {
  enum class Kind { Terms, Functions, Grid } kind = Kind::Terms;
  double horizon = 1.0;

  std::vector<FieldTerm> terms;
  FieldFunctions fns;

  // Grid representation; node arrays are (nt+1) x (g+1), row-major in time.
  std::size_t nt = 0, g = 0;
  std::vector<double> values, grad, lap, tder;

  double offset = 0.0;
  double scale = 1.0;

  double bilinear(const std::vector<double>& a, double t, double u) const {
    const double tu = std::clamp(u, 0.0, 1.0) * static_cast<double>(g);
    auto i = std::min(static_cast<std::size_t>(tu), g - 1);
    const double wu = tu - static_cast<double>(i);
    if (nt == 0) return (1.0 - wu) * a[i] + wu * a[i + 1];
    const double tt = std::clamp(t / horizon, 0.0, 1.0) * static_cast<double>(nt);
    auto m = std::min(static_cast<std::size_t>(tt), nt - 1);
    const double wt = tt - static_cast<double>(m);
    const std::size_t w = g + 1;
    const double lo = (1.0 - wu) * a[m * w + i] + wu * a[m * w + i + 1];
    const double hi = (1.0 - wu) * a[(m + 1) * w + i] + wu * a[(m + 1) * w + i + 1];
    return (1.0 - wt) * lo + wt * hi;
  }
};

namespace {

using Impl = SpaceTimeField::Impl;

void build_grid_derivatives(Impl& im, const std::optional<std::vector<double>>& gradient) {
  const std::size_t w = im.g + 1;
  const double h = 1.0 / static_cast<double>(im.g);
  im.grad.assign(im.values.size(), 0.0);
  im.lap.assign(im.values.size(), 0.0);
  im.tder.assign(im.values.size(), 0.0);
  for (std::size_t m = 0; m <= im.nt; ++m) {
    const double* v = im.values.data() + m * w;
    double* gr = im.grad.data() + m * w;
    double* lp = im.lap.data() + m * w;
    for (std::size_t i = 1; i < im.g; ++i) {
      gr[i] = (v[i + 1] - v[i - 1]) / (2 * h);
      lp[i] = (v[i + 1] - 2 * v[i] + v[i - 1]) / (h * h);
    }
    gr[0] = (-3 * v[0] + 4 * v[1] - v[2]) / (2 * h);
    gr[im.g] = (3 * v[im.g] - 4 * v[im.g - 1] + v[im.g - 2]) / (2 * h);
    if (im.g >= 3) {
      lp[0] = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / (h * h);
      lp[im.g] = (2 * v[im.g] - 5 * v[im.g - 1] + 4 * v[im.g - 2] - v[im.g - 3]) / (h * h);
    } else {
      lp[0] = lp[1];
      lp[im.g] = lp[im.g - 1];
    }
  }
  if (gradient) {
    if (gradient->size() != im.values.size()) throw Error(ErrorCode::OutOfRange, "gradient grid has the wrong size");
    im.grad = *gradient;
  }
  if (im.nt >= 1) {
    const double k = im.horizon / static_cast<double>(im.nt);
    for (std::size_t i = 0; i < w; ++i) {
      const auto at = [&](std::size_t m) { return im.values[m * w + i]; };
      for (std::size_t m = 1; m < im.nt; ++m) im.tder[m * w + i] = (at(m + 1) - at(m - 1)) / (2 * k);
      if (im.nt >= 2) {
        im.tder[i] = (-3 * at(0) + 4 * at(1) - at(2)) / (2 * k);
        im.tder[im.nt * w + i] = (3 * at(im.nt) - 4 * at(im.nt - 1) + at(im.nt - 2)) / (2 * k);
      } else {
        im.tder[i] = im.tder[w + i] = (at(1) - at(0)) / k;
      }
    }
  }
}

void check_class(const SpaceTimeField& f, double horizon) {
  if (f.field_class() != FieldClass::DirichletZero) return;
  for (int j = 0; j <= 16; ++j) {
    const double t = horizon * j / 16.0;
    if (std::abs(f.value(t, 0.0)) > 1e-9 || std::abs(f.value(t, 1.0)) > 1e-9) {
      throw Error(ErrorCode::ClassMismatch, "DirichletZero field does not vanish at u=0 and u=1");
    }
  }
}

}  // namespace

SpaceTimeField::SpaceTimeField() : impl_(std::make_shared<Impl>()) {}

SpaceTimeField SpaceTimeField::zero(FieldClass cls) {
  SpaceTimeField f;
  f.cls_ = cls;
  return f;
}

SpaceTimeField SpaceTimeField::analytic(std::vector<FieldTerm> terms, FieldClass cls, double horizon) {
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Terms;
  im->terms = std::move(terms);
  im->horizon = horizon;
  SpaceTimeField f;
  f.impl_ = std::move(im);
  f.cls_ = cls;
  check_class(f, horizon);
  return f;
}

SpaceTimeField SpaceTimeField::from_functions(FieldFunctions functions, FieldClass cls, double horizon) {
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Functions;
  im->fns = std::move(functions);
  im->horizon = horizon;
  SpaceTimeField f;
  f.impl_ = std::move(im);
  f.cls_ = cls;
  check_class(f, horizon);
  return f;
}

SpaceTimeField SpaceTimeField::sampled(double horizon, std::size_t time_steps, std::size_t grid_size,
                                       std::vector<double> values, FieldClass cls,
                                       std::optional<std::vector<double>> gradient) {
  if (grid_size < 2) throw Error(ErrorCode::OutOfRange, "field grid needs G >= 2");
  if (values.size() != (time_steps + 1) * (grid_size + 1)) throw Error(ErrorCode::OutOfRange, "field grid has the wrong size");
  auto im = std::make_shared<Impl>();
  im->kind = Impl::Kind::Grid;
  im->horizon = horizon > 0.0 ? horizon : 1.0;
  im->nt = time_steps;
  im->g = grid_size;
  im->values = std::move(values);
  build_grid_derivatives(*im, gradient);
  if (cls == FieldClass::DirichletZero) {
    const std::size_t w = grid_size + 1;
    for (std::size_t m = 0; m <= time_steps; ++m) {
      if (std::abs(im->values[m * w]) > 1e-9 || std::abs(im->values[m * w + grid_size]) > 1e-9) {
        throw Error(ErrorCode::ClassMismatch, "DirichletZero field does not vanish at u=0 and u=1");
      }
    }
  }
  SpaceTimeField f;
  f.impl_ = std::move(im);
  f.cls_ = cls;
  return f;
}

double SpaceTimeField::value(double t, double u) const {
  const Impl& im = *impl_;
  double v = 0.0;
  switch (im.kind) {
    case Impl::Kind::Terms:
      for (const auto& term : im.terms) v += term.time.value(t) * term.space.value(u);
      break;
    case Impl::Kind::Functions: v = im.fns.value(t, u); break;
    case Impl::Kind::Grid: v = im.bilinear(im.values, t, u); break;
  }
  return im.scale * v + im.offset;
}

double SpaceTimeField::du(double t, double u) const {
  const Impl& im = *impl_;
  double v = 0.0;
  switch (im.kind) {
    case Impl::Kind::Terms:
      for (const auto& term : im.terms) v += term.time.value(t) * term.space.d1(u);
      break;
    case Impl::Kind::Functions: v = im.fns.du(t, u); break;
    case Impl::Kind::Grid: v = im.bilinear(im.grad, t, u); break;
  }
  return im.scale * v;
}

double SpaceTimeField::duu(double t, double u) const {
  const Impl& im = *impl_;
  double v = 0.0;
  switch (im.kind) {
    case Impl::Kind::Terms:
      for (const auto& term : im.terms) v += term.time.value(t) * term.space.d2(u);
      break;
    case Impl::Kind::Functions: v = im.fns.duu(t, u); break;
    case Impl::Kind::Grid: v = im.bilinear(im.lap, t, u); break;
  }
  return im.scale * v;
}

double SpaceTimeField::dt(double t, double u) const {
  const Impl& im = *impl_;
  double v = 0.0;
  switch (im.kind) {
    case Impl::Kind::Terms:
      for (const auto& term : im.terms) v += term.time.d1(t) * term.space.value(u);
      break;
    case Impl::Kind::Functions: v = im.fns.dt ? im.fns.dt(t, u) : 0.0; break;
    case Impl::Kind::Grid: v = im.nt == 0 ? 0.0 : im.bilinear(im.tder, t, u); break;
  }
  return im.scale * v;
}

bool SpaceTimeField::time_constant() const {
  const Impl& im = *impl_;
  switch (im.kind) {
    case Impl::Kind::Terms:
      return std::all_of(im.terms.begin(), im.terms.end(), [](const FieldTerm& t) { return t.time.constant(); });
    case Impl::Kind::Functions: return im.fns.time_constant;
    case Impl::Kind::Grid: {
      const std::size_t w = im.g + 1;
      for (std::size_t m = 1; m <= im.nt; ++m) {
        if (!std::equal(im.values.begin(), im.values.begin() + static_cast<long>(w),
                        im.values.begin() + static_cast<long>(m * w))) {
          return false;
        }
      }
      return true;
    }
  }
  return false;
}

bool SpaceTimeField::is_zero() const {
  const Impl& im = *impl_;
  if (im.offset != 0.0) return false;
  if (im.scale == 0.0) return true;
  switch (im.kind) {
    case Impl::Kind::Terms:
      for (const auto& term : im.terms) {
        const bool time_zero = std::all_of(term.time.coefficients.begin(), term.time.coefficients.end(),
                                           [](double c) { return c == 0.0; });
        if (time_zero) continue;
        if (term.space.kind() == Shape::Kind::GAlphaBeta) return false;
        const auto& c = term.space.coefficients();
        const bool amp_zero = term.space.kind() == Shape::Kind::Bump
                                  ? c[0] == 0.0
                                  : std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; });
        if (!amp_zero) return false;
      }
      return true;
    case Impl::Kind::Functions: return false;
    case Impl::Kind::Grid:
      return std::all_of(im.values.begin(), im.values.end(), [](double x) { return x == 0.0; });
  }
  return false;
}

const std::vector<FieldTerm>* SpaceTimeField::terms() const {
  const Impl& im = *impl_;
  if (im.kind != Impl::Kind::Terms || im.offset != 0.0 || im.scale != 1.0) return nullptr;
  return &im.terms;
}

std::vector<double> SpaceTimeField::sample(double horizon, std::size_t time_steps, std::size_t grid_size) const {
  std::vector<double> out((time_steps + 1) * (grid_size + 1));
  for (std::size_t m = 0; m <= time_steps; ++m) {
    const double t = time_steps == 0 ? 0.0 : horizon * static_cast<double>(m) / static_cast<double>(time_steps);
    for (std::size_t i = 0; i <= grid_size; ++i) {
      out[m * (grid_size + 1) + i] = value(t, static_cast<double>(i) / static_cast<double>(grid_size));
    }
  }
  return out;
}

std::vector<double> SpaceTimeField::time_breakpoints() const {
  if (impl_->kind == Impl::Kind::Functions) return impl_->fns.time_breakpoints;
  if (impl_->kind == Impl::Kind::Grid && impl_->nt > 0) {
    std::vector<double> b(impl_->nt + 1);
    for (std::size_t m = 0; m <= impl_->nt; ++m) {
      b[m] = impl_->horizon * static_cast<double>(m) / static_cast<double>(impl_->nt);
    }
    return b;
  }
  return {};
}

SpaceTimeField SpaceTimeField::plus_constant(double c) const {
  SpaceTimeField f = *this;
  auto im = std::make_shared<Impl>(*impl_);
  im->offset += c;
  f.impl_ = std::move(im);
  f.cls_ = FieldClass::Free;
  return f;
}

SpaceTimeField SpaceTimeField::scaled(double s) const {
  SpaceTimeField f = *this;
  auto im = std::make_shared<Impl>(*impl_);
  im->scale *= s;
  im->offset *= s;
  f.impl_ = std::move(im);
  return f;
}

// ---------------------------------------------------------------- Tilt

Tilt Tilt::matching(const SpaceTimeField& H, std::size_t n) {
  Tilt t;
  t.H = H;
  const double l = 1.0 / static_cast<double>(n);
  const double r = static_cast<double>(n - 1) / static_cast<double>(n);
  t.G.left = [H, l](double s) { return H.value(s, l); };
  t.G.right = [H, r](double s) { return H.value(s, r); };
  t.G.time_constant = H.time_constant();
  t.g_matches_h = true;
  return t;
}

Tilt Tilt::with_boundary(const SpaceTimeField& H, BoundaryTilt G) {
  Tilt t;
  t.H = H;
  t.G = std::move(G);
  t.g_matches_h = false;
  return t;
}

LatticeTilt::LatticeTilt(const Tilt& tilt, std::size_t n)
    : tilt_(tilt), n_(n), time_constant_(tilt.H.time_constant() && tilt.G.time_constant) {
  const double nd = static_cast<double>(n);
  if (const auto* terms = tilt.H.terms()) {
    separable_ = true;
    for (const auto& term : *terms) {
      time_factors_.push_back(term.time);
      std::vector<double> table(n + 1);
      for (std::size_t x = 0; x <= n; ++x) table[x] = term.space.value(static_cast<double>(x) / nd);
      site_tables_.push_back(std::move(table));
    }
  }
  if (tilt.H.time_constant()) {
    const_value_.resize(n + 1);
    for (std::size_t x = 0; x <= n; ++x) const_value_[x] = tilt.H.value(0.0, static_cast<double>(x) / nd);
    const_gradient_.assign(n, 0.0);
    for (std::size_t b = 1; b + 1 < n; ++b) const_gradient_[b] = const_value_[b + 1] - const_value_[b];
  }
}

double LatticeTilt::value(double t, std::size_t x) const {
  if (!const_value_.empty()) return const_value_[x];
  if (separable_) {
    double s = 0.0;
    for (std::size_t k = 0; k < site_tables_.size(); ++k) s += time_factors_[k].value(t) * site_tables_[k][x];
    return s;
  }
  return tilt_.H.value(t, static_cast<double>(x) / static_cast<double>(n_));
}

double LatticeTilt::gradient(double t, std::size_t bond) const {
  if (!const_gradient_.empty()) return const_gradient_[bond];
  return value(t, bond + 1) - value(t, bond);
}

double LatticeTilt::time_derivative(double t, std::size_t x) const {
  if (!const_value_.empty()) return 0.0;
  if (separable_) {
    double s = 0.0;
    for (std::size_t k = 0; k < site_tables_.size(); ++k) s += time_factors_[k].d1(t) * site_tables_[k][x];
    return s;
  }
  return tilt_.H.dt(t, static_cast<double>(x) / static_cast<double>(n_));
}

double LatticeTilt::boundary(double t, int side) const {
  if (side == 0) return tilt_.G.left ? tilt_.G.left(t) : 0.0;
  return tilt_.G.right ? tilt_.G.right(t) : 0.0;
}

double LatticeTilt::max_abs_gradient(double t) const {
  double m = 0.0;
  for (std::size_t b = 1; b + 1 < n_; ++b) m = std::max(m, std::abs(gradient(t, b)));
  return m;
}

}  // namespace epsb
