#include "epsb/variational.hpp"

#include "epsb/error.hpp"
#include "epsb/numerics.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace epsb {

using std::numbers::pi;

// ---------------------------------------------------------------- basis

TiltBasis::TiltBasis(std::size_t kt, std::size_t ku, FieldClass cls, double horizon)
    : kt_(kt), ku_(ku), cls_(cls), horizon_(horizon) {
  if (kt < 1) throw Error(ErrorCode::OutOfRange, "basis needs K_t >= 1");
  if (ku < 1) throw Error(ErrorCode::OutOfRange, "basis needs K_u >= 1");
  if (!(horizon > 0.0)) throw Error(ErrorCode::OutOfRange, "basis horizon must be positive");
}

double TiltBasis::hat(std::size_t p, double t) const {
  const double x = t / horizon_ * static_cast<double>(kt_) - static_cast<double>(p);
  return std::max(0.0, 1.0 - std::abs(x));
}

double TiltBasis::hat_d1(std::size_t p, double t) const {
  const double scale = static_cast<double>(kt_) / horizon_;
  const double x = t / horizon_ * static_cast<double>(kt_) - static_cast<double>(p);
  if (x >= -1.0 && x < 0.0) return scale;
  if (x >= 0.0 && x < 1.0) return -scale;
  return 0.0;
}

std::size_t TiltBasis::frequency(std::size_t q) const {
  return cls_ == FieldClass::DirichletZero ? q + 1 : q;
}

double TiltBasis::space(std::size_t q, double u) const {
  const double w = static_cast<double>(frequency(q)) * pi;
  return cls_ == FieldClass::DirichletZero ? std::sin(w * u) : std::cos(w * u);
}

double TiltBasis::space_d1(std::size_t q, double u) const {
  const double w = static_cast<double>(frequency(q)) * pi;
  return cls_ == FieldClass::DirichletZero ? w * std::cos(w * u) : -w * std::sin(w * u);
}

double TiltBasis::space_d2(std::size_t q, double u) const {
  const double w = static_cast<double>(frequency(q)) * pi;
  return -w * w * space(q, u);
}

std::vector<double> TiltBasis::breakpoints() const {
  std::vector<double> b(kt_ + 1);
  for (std::size_t p = 0; p <= kt_; ++p) b[p] = horizon_ * static_cast<double>(p) / static_cast<double>(kt_);
  return b;
}

SpaceTimeField TiltBasis::field(const Eigen::VectorXd& c) const {
  if (static_cast<std::size_t>(c.size()) != size()) throw Error(ErrorCode::OutOfRange, "coefficient vector has the wrong size");
  const TiltBasis self = *this;
  const Eigen::VectorXd coef = c;
  const auto sum = [self, coef](auto&& time_part, auto&& space_part) {
    return [self, coef, time_part, space_part](double t, double u) {
      double v = 0.0;
      for (std::size_t i = 0; i < self.size(); ++i) {
        if (coef[static_cast<Eigen::Index>(i)] == 0.0) continue;
        v += coef[static_cast<Eigen::Index>(i)] * time_part(self, self.time_index(i), t) *
             space_part(self, self.space_index(i), u);
      }
      return v;
    };
  };
  const auto a = [](const TiltBasis& b, std::size_t p, double t) { return b.hat(p, t); };
  const auto da = [](const TiltBasis& b, std::size_t p, double t) { return b.hat_d1(p, t); };
  const auto s = [](const TiltBasis& b, std::size_t q, double u) { return b.space(q, u); };
  const auto ds = [](const TiltBasis& b, std::size_t q, double u) { return b.space_d1(q, u); };
  const auto dds = [](const TiltBasis& b, std::size_t q, double u) { return b.space_d2(q, u); };
  FieldFunctions fns;
  fns.value = sum(a, s);
  fns.du = sum(a, ds);
  fns.duu = sum(a, dds);
  fns.dt = sum(da, s);
  fns.time_constant = false;
  fns.time_breakpoints = breakpoints();
  return SpaceTimeField::from_functions(std::move(fns), cls_, horizon_);
}

SpaceTimeField TiltBasis::element(std::size_t i) const {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size()));
  c[static_cast<Eigen::Index>(i)] = 1.0;
  return field(c);
}

// ---------------------------------------------------------------- quadrature on the path

namespace {

constexpr double kGauss3X[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
constexpr double kGauss3W[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
constexpr double kGauss4X[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
constexpr double kGauss4W[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};

double clamp_chi(double r) {
  const double c = std::clamp(r, 0.0, 1.0);
  return c * (1.0 - c);
}

struct TimeRule {
  std::vector<double> t, w;
};

/// Three-point Gauss on every piece between consecutive frame times and extra breakpoints.
TimeRule time_rule(const SpaceTimeProfile& rho, const std::vector<double>& extra = {}) {
  if (rho.frames() < 2) throw Error(ErrorCode::OutOfRange, "path needs at least two frames");
  std::vector<double> b;
  for (std::size_t m = 0; m < rho.frames(); ++m) b.push_back(rho.time(m));
  for (double x : extra) {
    if (x > 0.0 && x < rho.horizon()) b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  const double tol = 1e-12 * std::max(1.0, rho.horizon());
  b.erase(std::unique(b.begin(), b.end(), [tol](double x, double y) { return std::abs(x - y) <= tol; }), b.end());
  TimeRule r;
  for (std::size_t k = 0; k + 1 < b.size(); ++k) {
    const double mid = 0.5 * (b[k] + b[k + 1]);
    const double half = 0.5 * (b[k + 1] - b[k]);
    for (int j = 0; j < 3; ++j) {
      r.t.push_back(mid + half * kGauss3X[j]);
      r.w.push_back(half * kGauss3W[j]);
    }
  }
  return r;
}

/// The path interpolated linearly in time.
std::vector<double> row_at(const SpaceTimeProfile& rho, double t) {
  const std::size_t w = rho.grid_size() + 1;
  const double x = std::clamp(t / rho.time_step(), 0.0, static_cast<double>(rho.frames() - 1));
  const std::size_t m = std::min(static_cast<std::size_t>(x), rho.frames() - 2);
  const double a = x - static_cast<double>(m);
  std::vector<double> r(w);
  const double* lo = rho.row(m);
  const double* hi = rho.row(m + 1);
  for (std::size_t i = 0; i < w; ++i) r[i] = (1.0 - a) * lo[i] + a * hi[i];
  return r;
}

/// Gauss points of every cell: position, weight, cell index.
struct SpaceRule {
  std::vector<double> u, w;
  std::vector<std::size_t> cell;
  std::vector<double> frac;  // position inside the cell in [0,1]
};

SpaceRule space_rule(std::size_t G) {
  SpaceRule s;
  const double h = 1.0 / static_cast<double>(G);
  for (std::size_t i = 0; i < G; ++i) {
    for (int j = 0; j < 4; ++j) {
      const double f = 0.5 * (1.0 + kGauss4X[j]);
      s.u.push_back((static_cast<double>(i) + f) * h);
      s.w.push_back(0.5 * h * kGauss4W[j]);
      s.cell.push_back(i);
      s.frac.push_back(f);
    }
  }
  return s;
}

/// Integral over [0,1] of g(u, rho(u), d_u rho(u)) for the piecewise-linear row.
template <class F>
double space_integral(const SpaceRule& s, const std::vector<double>& row, F&& g) {
  const double G = static_cast<double>(row.size() - 1);
  CompensatedSum acc;
  for (std::size_t k = 0; k < s.u.size(); ++k) {
    const std::size_t i = s.cell[k];
    const double r = row[i] + s.frac[k] * (row[i + 1] - row[i]);
    const double dr = (row[i + 1] - row[i]) * G;
    acc.add(s.w[k] * g(s.u[k], r, dr));
  }
  return acc.value();
}

struct Traces {
  double left, right;
};

Traces traces(const std::vector<double>& row, TraceRule rule) {
  const std::size_t G = row.size() - 1;
  if (rule == TraceRule::Node || G < 3) return {row[0], row[G]};
  return {std::clamp(2.0 * row[1] - row[2], 0.0, 1.0), std::clamp(2.0 * row[G - 1] - row[G - 2], 0.0, 1.0)};
}

void require_class(const SpaceTimeField& H, const RegimeSpec& regime) {
  if (regime.regime == Regime::Dirichlet && H.field_class() != FieldClass::DirichletZero) {
    throw Error(ErrorCode::ClassMismatch, "tilt must vanish at the boundary in the Dirichlet regime");
  }
}

/// Space part of the time integrand of ell, for one time level.
template <class Val, class Dt, class Du, class Duu>
double ell_integrand(const SpaceRule& s, const std::vector<double>& row, const RegimeSpec& regime,
                     const EllOptions& opt, Val&&, Dt&& dt, Du&& du, Duu&& duu) {
  double v = space_integral(s, row, [&](double u, double r, double) { return r * dt(u); });
  const Traces tr = traces(row, opt.traces);
  const double trace_term = tr.right * du(1.0) - tr.left * du(0.0);
  const double bd = regime.regime == Regime::Dirichlet ? regime.beta * du(1.0) - regime.alpha * du(0.0) : trace_term;
  if (opt.form == EllForm::Direct) {
    v += space_integral(s, row, [&](double u, double r, double) { return r * duu(u); });
    v -= bd;
  } else {
    v -= space_integral(s, row, [&](double u, double, double dr) { return dr * du(u); });
    if (regime.regime == Regime::Dirichlet) v += trace_term - bd;
  }
  return v;
}

double ell_impl(const SpaceTimeProfile& rho, const SpaceTimeField& H, const RegimeSpec& regime,
                const EllOptions& opt) {
  require_class(H, regime);
  const SpaceRule s = space_rule(rho.grid_size());
  const TimeRule tr = time_rule(rho, H.time_breakpoints());
  const double T = rho.horizon();
  const auto pair = [&](const std::vector<double>& row, double t) {
    return space_integral(s, row, [&](double u, double r, double) { return r * H.value(t, u); });
  };
  double v = pair(rho.frame_values(rho.frames() - 1), T) - pair(rho.frame_values(0), 0.0);
  CompensatedSum integral;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double t = tr.t[k];
    const std::vector<double> row = row_at(rho, t);
    integral.add(tr.w[k] * ell_integrand(
                               s, row, regime, opt, [&](double u) { return H.value(t, u); },
                               [&](double u) { return H.dt(t, u); }, [&](double u) { return H.du(t, u); },
                               [&](double u) { return H.duu(t, u); }));
  }
  return v - integral.value();
}

}  // namespace

// ---------------------------------------------------------------- functionals

double energy_single(const SpaceTimeProfile& rho, const SpaceTimeField& H) {
  const SpaceRule s = space_rule(rho.grid_size());
  const TimeRule tr = time_rule(rho, H.time_breakpoints());
  CompensatedSum acc;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double t = tr.t[k];
    const std::vector<double> row = row_at(rho, t);
    const double v = space_integral(s, row, [&](double u, double r, double) {
      const double h = H.value(t, u);
      return H.du(t, u) * r - 2.0 * h * h;
    });
    acc.add(tr.w[k] * v);
  }
  return acc.value();
}

double energy(const SpaceTimeProfile& rho, const TiltBasis& basis) {
  if (basis.field_class() != FieldClass::DirichletZero) {
    throw Error(ErrorCode::ClassMismatch, "energy needs a basis vanishing at the boundary");
  }
  const SpaceRule s = space_rule(rho.grid_size());
  const TimeRule tr = time_rule(rho, basis.breakpoints());
  const std::size_t P = basis.time_size(), Q = basis.space_size();
  Eigen::MatrixXd spaceM(Q, Q), timeM = Eigen::MatrixXd::Zero(P, P);
  {
    const std::vector<double> ones(rho.grid_size() + 1, 1.0);
    for (std::size_t q = 0; q < Q; ++q) {
      for (std::size_t q2 = 0; q2 < Q; ++q2) {
        spaceM(q, q2) = space_integral(s, ones, [&](double u, double, double) { return basis.space(q, u) * basis.space(q2, u); });
      }
    }
  }
  Eigen::VectorXd d = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(P * Q));
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double t = tr.t[k];
    const std::vector<double> row = row_at(rho, t);
    std::vector<double> pd(Q);
    for (std::size_t q = 0; q < Q; ++q) {
      pd[q] = space_integral(s, row, [&](double u, double r, double) { return r * basis.space_d1(q, u); });
    }
    for (std::size_t p = 0; p < P; ++p) {
      const double a = basis.hat(p, t);
      if (a == 0.0) continue;
      for (std::size_t q = 0; q < Q; ++q) d[static_cast<Eigen::Index>(p * Q + q)] += tr.w[k] * a * pd[q];
      for (std::size_t p2 = 0; p2 < P; ++p2) timeM(p, p2) += tr.w[k] * a * basis.hat(p2, t);
    }
  }
  Eigen::MatrixXd M(P * Q, P * Q);
  for (std::size_t i = 0; i < P * Q; ++i) {
    for (std::size_t j = 0; j < P * Q; ++j) {
      M(i, j) = timeM(i / Q, j / Q) * spaceM(i % Q, j % Q);
    }
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "energy mass matrix is singular");
  return d.dot(ldlt.solve(d)) / 8.0;
}

double ell(const SpaceTimeProfile& rho, const SpaceTimeField& H, const RegimeSpec& regime,
           const EllOptions& options) {
  return ell_impl(rho, H, regime, options);
}

double phi(const SpaceTimeProfile& rho, const SpaceTimeField& H) {
  const SpaceRule s = space_rule(rho.grid_size());
  const TimeRule tr = time_rule(rho, H.time_breakpoints());
  CompensatedSum acc;
  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double t = tr.t[k];
    const std::vector<double> row = row_at(rho, t);
    acc.add(tr.w[k] * space_integral(s, row, [&](double u, double r, double) {
      const double g = H.du(t, u);
      return clamp_chi(r) * g * g;
    }));
  }
  return acc.value();
}

double quadratic_cost(const SpaceTimeProfile& rho, const SpaceTimeField& H) { return phi(rho, H); }

double max_mass_drift(const SpaceTimeProfile& rho) {
  const std::vector<double> m = rho.masses();
  double worst = 0.0;
  for (double x : m) worst = std::max(worst, std::abs(x - m.front()));
  return worst;
}

double j_functional(const SpaceTimeProfile& rho, const SpaceTimeField& H, const RegimeSpec& regime,
                    double mass_tol, const EllOptions& options) {
  require_class(H, regime);
  if (regime.regime == Regime::Neumann && max_mass_drift(rho) > mass_tol) return kInfinity;
  return ell_impl(rho, H, regime, options) - phi(rho, H);
}

// ---------------------------------------------------------------- rate function

QuadraticForm rate_quadratic_form(const SpaceTimeProfile& rho, const RegimeSpec& regime,
                                  const TiltBasis& basis, const EllOptions& options) {
  if (regime.regime == Regime::Dirichlet && basis.field_class() != FieldClass::DirichletZero) {
    throw Error(ErrorCode::ClassMismatch, "Dirichlet regime needs a basis vanishing at the boundary");
  }
  const SpaceRule s = space_rule(rho.grid_size());
  const TimeRule tr = time_rule(rho, basis.breakpoints());
  const std::size_t P = basis.time_size(), Q = basis.space_size();
  const std::size_t npts = s.u.size();

  // Space functions at the Gauss points.
  Eigen::MatrixXd S0(npts, Q), S1(npts, Q), S2(npts, Q);
  for (std::size_t k = 0; k < npts; ++k) {
    for (std::size_t q = 0; q < Q; ++q) {
      S0(k, q) = basis.space(q, s.u[k]);
      S1(k, q) = basis.space_d1(q, s.u[k]);
      S2(k, q) = basis.space_d2(q, s.u[k]);
    }
  }
  std::vector<double> d1_left(Q), d1_right(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    d1_left[q] = basis.space_d1(q, 0.0);
    d1_right[q] = basis.space_d1(q, 1.0);
  }

  const double G = static_cast<double>(rho.grid_size());
  Eigen::VectorXd r(npts), dr(npts), wchi(npts);
  const auto load = [&](const std::vector<double>& row) {
    for (std::size_t k = 0; k < npts; ++k) {
      const std::size_t i = s.cell[k];
      r[k] = s.w[k] * (row[i] + s.frac[k] * (row[i + 1] - row[i]));
      dr[k] = s.w[k] * (row[i + 1] - row[i]) * G;
      wchi[k] = s.w[k] * clamp_chi(row[i] + s.frac[k] * (row[i + 1] - row[i]));
    }
  };

  const std::size_t N = P * Q;
  QuadraticForm qf{Eigen::VectorXd::Zero(N), Eigen::MatrixXd::Zero(N, N)};

  // End pairings.
  const double T = rho.horizon();
  load(rho.frame_values(rho.frames() - 1));
  const Eigen::VectorXd endP = S0.transpose() * r;
  load(rho.frame_values(0));
  const Eigen::VectorXd startP = S0.transpose() * r;
  for (std::size_t p = 0; p < P; ++p) {
    for (std::size_t q = 0; q < Q; ++q) {
      qf.b[static_cast<Eigen::Index>(p * Q + q)] = basis.hat(p, T) * endP[q] - basis.hat(p, 0.0) * startP[q];
    }
  }

  for (std::size_t k = 0; k < tr.t.size(); ++k) {
    const double t = tr.t[k];
    const std::vector<double> row = row_at(rho, t);
    load(row);
    const Eigen::VectorXd pairing = S0.transpose() * r;
    Eigen::VectorXd spatial(Q);  // everything in the integrand except the d_s term
    if (options.form == EllForm::Direct) {
      spatial = S2.transpose() * r;
    } else {
      spatial = -(S1.transpose() * dr);
    }
    const Traces trc = traces(row, options.traces);
    for (std::size_t q = 0; q < Q; ++q) {
      const double trace_term = trc.right * d1_right[q] - trc.left * d1_left[q];
      const double bd = regime.regime == Regime::Dirichlet ? regime.beta * d1_right[q] - regime.alpha * d1_left[q]
                                                           : trace_term;
      if (options.form == EllForm::Direct) {
        spatial[q] -= bd;
      } else if (regime.regime == Regime::Dirichlet) {
        spatial[q] += trace_term - bd;
      }
    }
    // chi-weighted gradient Gram matrix at this time.
    const Eigen::MatrixXd Sg = S1.transpose() * wchi.asDiagonal() * S1;
    for (std::size_t p = 0; p < P; ++p) {
      const double a = basis.hat(p, t);
      const double da = basis.hat_d1(p, t);
      if (a == 0.0 && da == 0.0) continue;
      for (std::size_t q = 0; q < Q; ++q) {
        qf.b[static_cast<Eigen::Index>(p * Q + q)] -= tr.w[k] * (da * pairing[q] + a * spatial[q]);
      }
      if (a == 0.0) continue;
      for (std::size_t p2 = 0; p2 < P; ++p2) {
        const double a2 = basis.hat(p2, t);
        if (a2 == 0.0) continue;
        qf.A.block(p * Q, p2 * Q, Q, Q) += (tr.w[k] * a * a2) * Sg;
      }
    }
  }
  return qf;
}

std::vector<std::string> RateReport::flags() const {
  std::vector<std::string> f;
  if (ridge) f.emplace_back("ridge");
  if (mass_violation) f.emplace_back("mass_violation");
  if (unbounded_linear) f.emplace_back("unbounded_linear");
  return f;
}

std::string RateReport::to_json() const {
  nlohmann::json j;
  if (std::isinf(value)) {
    j["value"] = "inf";
  } else {
    j["value"] = value;
  }
  j["basis"] = {{"kt", kt}, {"ku", ku}};
  j["coefficients"] = std::vector<double>(coefficients.data(), coefficients.data() + coefficients.size());
  j["mass_drift"] = mass_drift;
  j["flags"] = flags();
  return j.dump(2);
}

RateReport rate_function(const SpaceTimeProfile& rho, const RegimeSpec& regime, const TiltBasis& basis,
                         double mass_tol, const EllOptions& options) {
  RateReport rep;
  rep.kt = basis.kt();
  rep.ku = basis.ku();
  rep.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
  rep.mass_drift = max_mass_drift(rho);
  if (regime.regime == Regime::Neumann && rep.mass_drift > mass_tol) {
    rep.mass_violation = true;
    rep.value = kInfinity;
    return rep;
  }
  const QuadraticForm qf = rate_quadratic_form(rho, regime, basis, options);

  // Spatially constant elements have no gradient; the mass constraint already covers them.
  std::vector<Eigen::Index> active;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    if (basis.frequency(basis.space_index(i)) > 0) active.push_back(static_cast<Eigen::Index>(i));
  }
  const auto m = static_cast<Eigen::Index>(active.size());
  Eigen::MatrixXd A(m, m);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    b[i] = qf.b[active[i]];
    for (Eigen::Index j = 0; j < m; ++j) A(i, j) = qf.A(active[i], active[j]);
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A, Eigen::EigenvaluesOnly);
  const double top = eig.eigenvalues().maxCoeff();
  const double bottom = eig.eigenvalues().minCoeff();
  if (!(top > 0.0) || bottom <= 1e-12 * top) {
    rep.ridge = true;
    A += 1e-10 * Eigen::MatrixXd::Identity(m, m);
  }
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "rate quadratic form could not be factored");
  const Eigen::VectorXd c = 0.5 * ldlt.solve(b);
  rep.value = 0.5 * b.dot(c);
  for (Eigen::Index i = 0; i < m; ++i) rep.coefficients[active[i]] = c[i];
  return rep;
}

// ---------------------------------------------------------------- elliptic inverses

namespace {

void check_nondegenerate(const SpaceTimeProfile& rho) {
  const double margin = 10.0 / static_cast<double>(rho.grid_size());
  const auto [lo, hi] = std::minmax_element(rho.values().begin(), rho.values().end());
  if (*lo < margin || *hi > 1.0 - margin) {
    throw Error(ErrorCode::DegenerateDensity, "density comes within 10 grid cells of 0 or 1");
  }
}

/// Node values of q = d_u rho - d_t int_0^u rho, row-major like rho.
std::vector<double> elliptic_source(const SpaceTimeProfile& rho) {
  const std::size_t F = rho.frames(), G = rho.grid_size(), w = G + 1;
  const double h = rho.spacing();
  std::vector<double> cum(F * w), q(F * w, 0.0);
  for (std::size_t m = 0; m < F; ++m) {
    const std::vector<double> c = cumulative_trapezoid(rho.frame_values(m), h);
    std::copy(c.begin(), c.end(), cum.begin() + static_cast<std::ptrdiff_t>(m * w));
  }
  for (std::size_t m = 0; m < F; ++m) {
    const double* r = rho.row(m);
    for (std::size_t i = 0; i < w; ++i) {
      double du;
      if (i == 0) du = (-3 * r[0] + 4 * r[1] - r[2]) / (2 * h);
      else if (i == G) du = (3 * r[G] - 4 * r[G - 1] + r[G - 2]) / (2 * h);
      else du = (r[i + 1] - r[i - 1]) / (2 * h);
      double dt = 0.0;
      if (F >= 3) {
        const double k = rho.time_step();
        const auto at = [&](std::size_t mm) { return cum[mm * w + i]; };
        if (m == 0) dt = (-3 * at(0) + 4 * at(1) - at(2)) / (2 * k);
        else if (m == F - 1) dt = (3 * at(m) - 4 * at(m - 1) + at(m - 2)) / (2 * k);
        else dt = (at(m + 1) - at(m - 1)) / (2 * k);
      } else if (F == 2) {
        dt = (cum[w + i] - cum[i]) / rho.time_step();
      }
      q[m * w + i] = du - dt;
    }
  }
  return q;
}

SpaceTimeField assemble_tilt(const SpaceTimeProfile& rho, std::vector<double> grad, FieldClass cls) {
  const std::size_t F = rho.frames(), w = rho.grid_size() + 1;
  std::vector<double> H(F * w);
  for (std::size_t m = 0; m < F; ++m) {
    const std::vector<double> g(grad.begin() + static_cast<std::ptrdiff_t>(m * w),
                                grad.begin() + static_cast<std::ptrdiff_t>((m + 1) * w));
    const std::vector<double> c = cumulative_trapezoid(g, rho.spacing());
    std::copy(c.begin(), c.end(), H.begin() + static_cast<std::ptrdiff_t>(m * w));
    if (cls == FieldClass::DirichletZero) H[m * w + w - 1] = 0.0;
  }
  return SpaceTimeField::sampled(rho.horizon(), F - 1, rho.grid_size(), std::move(H), cls, std::move(grad));
}

}  // namespace

SpaceTimeField elliptic_dirichlet(const SpaceTimeProfile& rho) {
  check_nondegenerate(rho);
  const std::size_t F = rho.frames(), w = rho.grid_size() + 1;
  const std::vector<double> q = elliptic_source(rho);
  std::vector<double> grad(F * w);
  std::vector<double> inv(w), qi(w);
  for (std::size_t m = 0; m < F; ++m) {
    const double* r = rho.row(m);
    for (std::size_t i = 0; i < w; ++i) {
      inv[i] = 1.0 / (2.0 * chi(r[i]));
      qi[i] = q[m * w + i] * inv[i];
    }
    const double I = trapezoid(inv, rho.spacing());
    const double II = trapezoid(qi, rho.spacing());
    for (std::size_t i = 0; i < w; ++i) grad[m * w + i] = qi[i] - (II / I) * inv[i];
  }
  return assemble_tilt(rho, std::move(grad), FieldClass::DirichletZero);
}

SpaceTimeField elliptic_neumann(const SpaceTimeProfile& rho, double mass_tol) {
  check_nondegenerate(rho);
  if (max_mass_drift(rho) > mass_tol) throw Error(ErrorCode::MassDriftError, "path does not conserve mass");
  const std::size_t F = rho.frames(), w = rho.grid_size() + 1;
  const std::vector<double> q = elliptic_source(rho);
  std::vector<double> grad(F * w);
  for (std::size_t m = 0; m < F; ++m) {
    const double* r = rho.row(m);
    for (std::size_t i = 0; i < w; ++i) grad[m * w + i] = q[m * w + i] / (2.0 * chi(r[i]));
  }
  return assemble_tilt(rho, std::move(grad), FieldClass::Free);
}

FisherReport fisher_energy(const SpaceTimeProfile& rho) {
  constexpr double cap = 1e12;
  const std::size_t F = rho.frames(), G = rho.grid_size();
  const double h = rho.spacing();
  FisherReport rep;
  CompensatedSum value;
  for (std::size_t m = 0; m < F; ++m) {
    double wt;
    if (F == 1) wt = rho.horizon();
    else wt = (m == 0 || m == F - 1 ? 0.5 : 1.0) * rho.time_step();
    const double* r = rho.row(m);
    for (std::size_t i = 0; i < G; ++i) {
      const double g = (r[i + 1] - r[i]) / h;
      const double c = clamp_chi(0.5 * (r[i] + r[i + 1]));
      double v = g * g == 0.0 ? 0.0 : (c > 0.0 ? g * g / c : cap);
      if (v >= cap) {
        v = cap;
        rep.capped_measure += wt * h;
      }
      value.add(wt * h * v);
    }
  }
  rep.value = value.value();
  return rep;
}

}  // namespace epsb
