#include "epsb/hydro.hpp"

#include "epsb/error.hpp"
#include "epsb/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace epsb {

using std::numbers::pi;

BoundarySpec boundary_for(const RegimeSpec& regime) {
  if (regime.regime == Regime::Dirichlet) return bc::Dirichlet{regime.alpha, regime.beta};
  return bc::Neumann{};
}

BoundarySpec boundary_for(const RegimeSpec& regime, const SpaceTimeField& H) {
  if (regime.regime == Regime::Dirichlet) return bc::PerturbedDirichlet{regime.alpha, regime.beta, H};
  return bc::Robin{H};
}

namespace {

double mobility(double r) {
  const double c = std::clamp(r, 0.0, 1.0);
  return c * (1.0 - c);
}

struct Setup {
  bool dirichlet = false;
  double alpha = 0.0, beta = 0.0;
  const SpaceTimeField* H = nullptr;
};

Setup read_spec(const BoundarySpec& spec) {
  Setup s;
  std::visit(
      [&](const auto& b) {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, bc::Dirichlet>) {
          s.dirichlet = true;
          s.alpha = b.alpha;
          s.beta = b.beta;
        } else if constexpr (std::is_same_v<B, bc::PerturbedDirichlet>) {
          s.dirichlet = true;
          s.alpha = b.alpha;
          s.beta = b.beta;
          if (b.H.field_class() != FieldClass::DirichletZero) {
            throw Error(ErrorCode::ClassMismatch, "perturbed Dirichlet problem needs a DirichletZero tilt");
          }
          s.H = &b.H;
        } else if constexpr (std::is_same_v<B, bc::Robin>) {
          s.H = &b.H;
        }
      },
      spec);
  if (s.dirichlet) {
    if (!(s.alpha >= 0.0 && s.alpha <= 1.0 && s.beta >= 0.0 && s.beta <= 1.0)) {
      throw Error(ErrorCode::OutOfRange, "boundary data must lie in [0,1]");
    }
  }
  if (s.H && s.H->is_zero()) s.H = nullptr;
  return s;
}

}  // namespace

SpaceTimeProfile solve(const Profile& gamma, const BoundarySpec& spec, const SolverGrid& grid) {
  const Setup setup = read_spec(spec);
  const std::size_t G = grid.cells;
  if (G < 4) throw Error(ErrorCode::OutOfRange, "solver needs at least 4 cells");
  if (grid.frames == 0) throw Error(ErrorCode::OutOfRange, "solver needs at least one output interval");
  if (!(grid.horizon > 0.0)) throw Error(ErrorCode::OutOfRange, "solver horizon must be positive");
  const double h = 1.0 / static_cast<double>(G);
  const double dt_req = grid.dt > 0.0 ? grid.dt : h * h / 4.0;
  const double tau = grid.horizon / static_cast<double>(grid.frames);
  const auto sub = static_cast<std::size_t>(std::ceil(tau / dt_req - 1e-9));
  const double dt = tau / static_cast<double>(sub);

  if (grid.scheme == Scheme::Explicit && dt > 0.5 * h * h * (1.0 + 1e-12)) {
    throw Error(ErrorCode::StabilityError, "explicit scheme needs dt <= du^2/2");
  }
  if (setup.H) {
    double sup = 0.0;
    for (int j = 0; j <= 16; ++j) {
      const double t = grid.horizon * j / 16.0;
      for (std::size_t i = 0; i <= G; ++i) sup = std::max(sup, std::abs(setup.H->du(t, static_cast<double>(i) * h)));
    }
    if (2.0 * sup * dt / h > 1.0) throw Error(ErrorCode::StabilityError, "drift CFL condition violated");
  }

  // Unknowns: nodes lo..hi.
  const std::size_t lo = setup.dirichlet ? 1 : 0;
  const std::size_t hi = setup.dirichlet ? G - 1 : G;
  const std::size_t m = hi - lo + 1;

  std::vector<double> rho(G + 1);
  for (std::size_t i = 0; i <= G; ++i) rho[i] = gamma(static_cast<double>(i) * h);
  if (setup.dirichlet) {
    rho[0] = setup.alpha;
    rho[G] = setup.beta;
  }

  // Diffusion operator L on the unknowns (rows use node index i = lo + r).
  std::vector<double> Ll(m, 0.0), Ld(m, 0.0), Lu(m, 0.0);
  const double ih2 = 1.0 / (h * h);
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t i = lo + r;
    if (!setup.dirichlet && i == 0) {
      Ld[r] = -2.0 * ih2;
      Lu[r] = 2.0 * ih2;
    } else if (!setup.dirichlet && i == G) {
      Ll[r] = 2.0 * ih2;
      Ld[r] = -2.0 * ih2;
    } else {
      Ll[r] = ih2;
      Ld[r] = -2.0 * ih2;
      Lu[r] = ih2;
    }
  }
  const auto apply_L = [&](const std::vector<double>& v, std::size_t r) {
    const std::size_t i = lo + r;
    double s = Ld[r] * v[i];
    if (i > 0) s += Ll[r] * v[i - 1];
    if (i < G) s += Lu[r] * v[i + 1];
    return s;
  };

  TridiagonalSolver implicit;
  if (grid.scheme == Scheme::CrankNicolson) {
    std::vector<double> a(m), b(m), c(m);
    for (std::size_t r = 0; r < m; ++r) {
      a[r] = -0.5 * dt * Ll[r];
      b[r] = 1.0 - 0.5 * dt * Ld[r];
      c[r] = -0.5 * dt * Lu[r];
    }
    implicit = TridiagonalSolver(a, b, c);
  }

  // Face derivative of H, cached per time level.
  std::vector<double> dH(G, 0.0);
  const bool frozen_H = setup.H && setup.H->time_constant();
  const auto load_dH = [&](double t) {
    for (std::size_t i = 0; i < G; ++i) dH[i] = setup.H->du(t, (static_cast<double>(i) + 0.5) * h);
  };
  if (frozen_H) load_dH(0.0);

  std::vector<double> out;
  out.reserve((grid.frames + 1) * (G + 1));
  // Checked after every step, not only at output frames.
  const auto check_range = [&] {
    const auto [lo_it, hi_it] = std::minmax_element(rho.begin(), rho.end());
    if (*lo_it < -1e-6 || *hi_it > 1.0 + 1e-6) {
      throw Error(ErrorCode::MaximumPrincipleViolation, "solution left [0,1] by more than 1e-6");
    }
  };
  const auto emit = [&] {
    for (std::size_t i = 0; i <= G; ++i) out.push_back(std::clamp(rho[i], 0.0, 1.0));
  };
  check_range();
  emit();

  std::vector<double> rhs(m), flux(G, 0.0);
  for (std::size_t frame = 0; frame < grid.frames; ++frame) {
    for (std::size_t k = 0; k < sub; ++k) {
      const double t = (static_cast<double>(frame) * static_cast<double>(sub) + static_cast<double>(k)) * dt;
      if (setup.H) {
        if (!frozen_H) load_dH(t);
        for (std::size_t i = 0; i < G; ++i) flux[i] = 2.0 * mobility(0.5 * (rho[i] + rho[i + 1])) * dH[i];
      }
      for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = lo + r;
        double drift = 0.0;
        if (setup.H) {
          if (!setup.dirichlet && i == 0) drift = -2.0 * flux[0] / h;
          else if (!setup.dirichlet && i == G) drift = 2.0 * flux[G - 1] / h;
          else drift = -(flux[i] - flux[i - 1]) / h;
        }
        double bdry = 0.0;
        if (setup.dirichlet) {
          if (i == 1) bdry += setup.alpha * ih2;
          if (i == G - 1) bdry += setup.beta * ih2;
        }
        const double Lr = apply_L(rho, r) - (setup.dirichlet && i == 1 ? Ll[r] * rho[0] : 0.0) -
                          (setup.dirichlet && i == G - 1 ? Lu[r] * rho[G] : 0.0);
        if (grid.scheme == Scheme::CrankNicolson) {
          rhs[r] = rho[i] + 0.5 * dt * Lr + dt * bdry + dt * drift;
        } else {
          rhs[r] = rho[i] + dt * (Lr + bdry + drift);
        }
      }
      if (grid.scheme == Scheme::CrankNicolson) implicit.solve(rhs);
      for (std::size_t r = 0; r < m; ++r) rho[lo + r] = rhs[r];
      check_range();
    }
    emit();
  }
  return SpaceTimeProfile(grid.horizon, G, std::move(out));
}

// ---------------------------------------------------------------- spectral oracle

namespace {

/// Integral of the piecewise-linear interpolant of y times sqrt2 cos or sin(w u).
double project(const std::vector<double>& y, double w, bool cosine) {
  const std::size_t G = y.size() - 1;
  const double h = 1.0 / static_cast<double>(G);
  if (w == 0.0) return trapezoid(y, h);
  CompensatedSum s;
  const auto prim = [&](double p0, double q, double u) {
    if (cosine) return (p0 + q * u) * std::sin(w * u) / w + q * std::cos(w * u) / (w * w);
    return -(p0 + q * u) * std::cos(w * u) / w + q * std::sin(w * u) / (w * w);
  };
  for (std::size_t i = 0; i < G; ++i) {
    const double a = static_cast<double>(i) * h;
    const double b = static_cast<double>(i + 1) * h;
    const double q = (y[i + 1] - y[i]) / h;
    const double p0 = y[i] - q * a;
    s.add(prim(p0, q, b) - prim(p0, q, a));
  }
  return std::sqrt(2.0) * s.value();
}

}  // namespace

Profile spectral_oracle(const Profile& gamma, SpectralProblem problem, std::size_t modes, double t,
                        double alpha, double beta) {
  if (modes < 1) throw Error(ErrorCode::OutOfRange, "spectral oracle needs K >= 1");
  const std::size_t G = gamma.grid_size();
  std::vector<double> y = gamma.values();
  std::vector<double> out(G + 1, 0.0);
  const auto node = [&](std::size_t i) { return static_cast<double>(i) / static_cast<double>(G); };
  if (problem == SpectralProblem::Dirichlet) {
    for (std::size_t i = 0; i <= G; ++i) {
      const double lin = alpha + (beta - alpha) * node(i);
      y[i] -= lin;
      out[i] = lin;
    }
    for (std::size_t k = 1; k <= modes; ++k) {
      const double w = static_cast<double>(k) * pi;
      const double c = project(y, w, false) * std::exp(-w * w * t);
      for (std::size_t i = 0; i <= G; ++i) out[i] += c * std::sqrt(2.0) * std::sin(w * node(i));
    }
  } else {
    const double c0 = trapezoid(y, 1.0 / static_cast<double>(G));
    for (std::size_t i = 0; i <= G; ++i) out[i] = c0;
    for (std::size_t k = 1; k <= modes; ++k) {
      const double w = static_cast<double>(k) * pi;
      const double c = project(y, w, true) * std::exp(-w * w * t);
      for (std::size_t i = 0; i <= G; ++i) out[i] += c * std::sqrt(2.0) * std::cos(w * node(i));
    }
  }
  for (double& v : out) v = std::clamp(v, 0.0, 1.0);
  return Profile(std::move(out));
}

// ---------------------------------------------------------------- weak residual

std::size_t frame_index(const SpaceTimeProfile& rho, double t) {
  const double tau = rho.time_step();
  if (tau <= 0.0) {
    if (t == 0.0) return 0;
    throw Error(ErrorCode::OutOfRange, "time outside the path");
  }
  const double x = t / tau;
  const auto m = static_cast<std::size_t>(std::llround(x));
  if (m >= rho.frames() || std::abs(x - static_cast<double>(m)) > 1e-6) {
    throw Error(ErrorCode::OutOfRange, "t must be a frame time of the path");
  }
  return m;
}

double weak_residual(const SpaceTimeProfile& rho, const SpaceTimeField& f, const RegimeSpec& regime,
                     const SpaceTimeField* H, double t) {
  if (regime.regime == Regime::Dirichlet && f.field_class() != FieldClass::DirichletZero) {
    throw Error(ErrorCode::ClassMismatch, "test function must vanish at the boundary in the Dirichlet regime");
  }
  const std::size_t last = frame_index(rho, t);
  const std::size_t G = rho.grid_size();
  const double h = rho.spacing();

  // Four-point Gauss per cell on the piecewise-linear interpolant of each frame.
  static constexpr double gx[4] = {-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526};
  static constexpr double gw[4] = {0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538};
  const auto pair_frame = [&](std::size_t m, auto&& g) {
    const double s = rho.time(m);
    const double* r = rho.row(m);
    CompensatedSum acc;
    for (std::size_t i = 0; i < G; ++i) {
      for (int j = 0; j < 4; ++j) {
        const double f = 0.5 * (1.0 + gx[j]);
        acc.add(0.5 * h * gw[j] * g(s, (static_cast<double>(i) + f) * h, r[i] + f * (r[i + 1] - r[i])));
      }
    }
    return acc.value();
  };

  const auto integrand = [&](std::size_t m) {
    const double s = rho.time(m);
    const double* r = rho.row(m);
    double v = pair_frame(m, [&](double ss, double u, double ri) { return ri * (f.dt(ss, u) + f.duu(ss, u)); });
    if (regime.regime == Regime::Dirichlet) {
      v -= regime.beta * f.du(s, 1.0) - regime.alpha * f.du(s, 0.0);
    } else {
      v -= r[G] * f.du(s, 1.0) - r[0] * f.du(s, 0.0);
    }
    if (H) {
      v += 2.0 * pair_frame(m, [&](double ss, double u, double ri) { return mobility(ri) * H->du(ss, u) * f.du(ss, u); });
    }
    return v;
  };

  CompensatedSum time_integral;
  const double tau = rho.time_step();
  for (std::size_t m = 0; m <= last && last > 0; ++m) {
    const double w = (m == 0 || m == last) ? 0.5 : 1.0;
    time_integral.add(w * tau * integrand(m));
  }
  const double end = pair_frame(last, [&](double s, double u, double ri) { return ri * f.value(s, u); });
  const double start = pair_frame(0, [&](double s, double u, double ri) { return ri * f.value(s, u); });
  return end - start - time_integral.value();
}

}  // namespace epsb
