#include "epsb/hydro.hpp"
#include "epsb/numerics.hpp"

#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace epsb;
using std::numbers::pi;

namespace {

double sup_error(const Profile& a, const std::function<double(double)>& f) {
  double e = 0.0;
  for (std::size_t i = 0; i <= a.grid_size(); ++i) e = std::max(e, std::abs(a[i] - f(a.node(i))));
  return e;
}

double sup_diff(const Profile& a, const Profile& b) {
  return sup_error(a, [&](double u) { return b(u); });
}

SpaceTimeField sine_test() {
  return SpaceTimeField::analytic({FieldTerm{{{1.0}}, Shape::parse("sine", {1.0})}}, FieldClass::DirichletZero);
}

SpaceTimeField cosine_field(double amp, FieldClass cls = FieldClass::Free) {
  return SpaceTimeField::analytic({FieldTerm{{{1.0}}, Shape::parse("cosine", {0.0, amp})}}, cls);
}

}  // namespace

TEST_CASE("stationary and constant solutions") {
  const auto lin = Profile::from_function(512, [](double u) { return 0.2 + 0.6 * u; });
  const auto rho = solve(lin, bc::Dirichlet{0.2, 0.8}, {512, 0.0, 0.1, 10});
  for (std::size_t m = 0; m < rho.frames(); ++m) {
    CHECK(sup_diff(rho.frame(m), lin) <= 1e-8);
  }
  const auto c = Profile::constant(128, 0.3);
  for (auto scheme : {Scheme::CrankNicolson, Scheme::Explicit}) {
    const auto r = solve(c, bc::Neumann{}, {128, 0.0, 0.05, 5, scheme});
    CHECK(sup_diff(r.frame(5), c) <= 1e-14);
  }
}

TEST_CASE("sine mode decays at the heat rate") {
  const auto s = Profile::from_function(512, [](double u) { return std::sin(pi * u); });
  const auto rho = solve(s, bc::Dirichlet{0.0, 0.0}, {512, 0.0, 0.1, 10});
  const double decay = std::exp(-pi * pi * 0.1);
  CHECK(sup_error(rho.frame(10), [&](double u) { return decay * std::sin(pi * u); }) <= 1e-4);
}

TEST_CASE("spectral oracle") {
  const std::size_t G = 4096;
  const auto cosine = Profile::from_function(G, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
  for (double t : {0.0, 0.03, 0.2}) {
    for (std::size_t k : {1, 4, 32}) {
      const auto p = spectral_oracle(cosine, SpectralProblem::Neumann, k, t);
      // Coefficients come from the piecewise-linear interpolant, hence the grid-size tolerance.
      CHECK(sup_error(p, [&](double u) { return 0.5 + 0.3 * std::exp(-pi * pi * t) * std::cos(pi * u); }) <= 1e-6);
    }
  }
  const auto flat = Profile::constant(64, 0.7);
  CHECK(sup_error(spectral_oracle(flat, SpectralProblem::Neumann, 3, 0.4), [](double) { return 0.7; }) <= 1e-14);

  const auto parabola = Profile::from_function(1024, [](double u) { return u * (1 - u); });
  const auto a = spectral_oracle(parabola, SpectralProblem::Dirichlet, 64, 0.05);
  const auto b = spectral_oracle(parabola, SpectralProblem::Dirichlet, 128, 0.05);
  CHECK(sup_diff(a, b) <= 1e-10);

  // The inhomogeneous problem returns to its linear steady state.
  const auto lin = Profile::from_function(256, [](double u) { return 0.2 + 0.6 * u; });
  CHECK(sup_diff(spectral_oracle(lin, SpectralProblem::Dirichlet, 16, 0.3, 0.2, 0.8), lin) <= 1e-12);

  CHECK_EPSB_ERROR(spectral_oracle(flat, SpectralProblem::Neumann, 0, 0.1), ErrorCode::OutOfRange);
}

TEST_CASE("weak residuals") {
  const auto gamma = Profile::from_function(512, [](double u) { return 0.2 + 0.6 * u + 0.3 * std::sin(pi * u); });
  const RegimeSpec dir{Regime::Dirichlet, 0.2, 0.8};
  const auto rho = solve(gamma, bc::Dirichlet{0.2, 0.8}, {512, 0.0, 0.1, 100});
  const double r = std::abs(weak_residual(rho, sine_test(), dir, nullptr, 0.1));
  MESSAGE("Dirichlet weak residual " << r);
  CHECK(r <= 1e-3);
  // Tolerance at this resolution, taken from the observed defect (about 1e-6) with margin.
  const double tol = 1e-4;
  CHECK(r <= tol);

  SUBCASE("perturbed solution is detected") {
    std::vector<double> v = rho.values();
    for (std::size_t m = 1; m < rho.frames(); ++m) {
      for (std::size_t i = 0; i <= 512; ++i) {
        v[m * 513 + i] = std::clamp(v[m * 513 + i] + 0.01 * std::sin(pi * rho.node(i)), 0.0, 1.0);
      }
    }
    const SpaceTimeProfile bad(0.1, 512, v);
    CHECK(std::abs(weak_residual(bad, sine_test(), dir, nullptr, 0.1)) >= 10 * tol);
  }

  SUBCASE("constants solve the Neumann problem for any test function") {
    const auto flat = SpaceTimeProfile::from_function(0.2, 40, 128, [](double, double) { return 0.4; });
    FieldTerm a{{{1.0, 0.5}}, Shape::parse("cosine", {0.2, 0.3, -0.1})};
    FieldTerm b{{{0.0, 0.0, 1.0}}, Shape::parse("linear", {0.1, 0.7})};
    const auto f = SpaceTimeField::analytic({a, b}, FieldClass::Free, 0.2);
    CHECK(std::abs(weak_residual(flat, f, {Regime::Neumann}, nullptr, 0.2)) <= 1e-12);
  }

  SUBCASE("Dirichlet test functions must vanish at the ends") {
    CHECK_EPSB_ERROR(weak_residual(rho, cosine_field(1.0), dir, nullptr, 0.1), ErrorCode::ClassMismatch);
    CHECK_EPSB_ERROR(weak_residual(rho, sine_test(), dir, nullptr, 0.0505), ErrorCode::OutOfRange);
  }

  SUBCASE("tilted solutions solve the tilted weak equations") {
    const auto h = SpaceTimeField::analytic({FieldTerm{{{1.0}}, Shape::parse("sine", {0.3})}}, FieldClass::DirichletZero);
    const auto rh = solve(gamma, bc::PerturbedDirichlet{0.2, 0.8, h}, {512, 0.0, 0.1, 100});
    CHECK(std::abs(weak_residual(rh, sine_test(), dir, &h, 0.1)) <= tol);
    // Without the drift term the same path does not satisfy the plain equation.
    CHECK(std::abs(weak_residual(rh, sine_test(), dir, nullptr, 0.1)) >= 10 * tol);

    const auto hc = cosine_field(0.3);
    const auto g2 = Profile::from_function(512, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
    const auto rn = solve(g2, bc::Robin{hc}, {512, 0.0, 0.1, 100});
    CHECK(std::abs(weak_residual(rn, cosine_field(1.0), {Regime::Neumann}, &hc, 0.1)) <= tol);
  }
}

TEST_CASE("mass conservation and maximum principle") {
  const auto g = Profile::from_function(256, [](double u) { return 0.5 + 0.3 * std::cos(pi * u) + 0.1 * std::cos(2 * pi * u); });
  const std::vector<BoundarySpec> specs{bc::Neumann{}, bc::Robin{cosine_field(0.3)}, bc::Robin{cosine_field(1.5)}};
  for (const auto& spec : specs) {
    for (auto scheme : {Scheme::CrankNicolson, Scheme::Explicit}) {
      const auto rho = solve(g, spec, {256, 0.0, 0.2, 50, scheme});
      const auto masses = rho.masses();
      for (double m : masses) CHECK(std::abs(m - masses.front()) <= 1e-8);
      for (double v : rho.values()) CHECK((v >= 0.0 && v <= 1.0));
    }
  }
  const auto d = solve(g, bc::Dirichlet{0.05, 0.95}, {256, 0.0, 0.2, 50});
  for (double v : d.values()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("explicit and Crank-Nicolson agree") {
  const auto g = Profile::from_function(64, [](double u) { return 0.2 + 0.6 * u + 0.3 * std::sin(pi * u); });
  const auto h = SpaceTimeField::analytic({FieldTerm{{{1.0}}, Shape::parse("sine", {0.3})}}, FieldClass::DirichletZero);
  // The two schemes differ at first order in dt.
  const double dt = 1.0 / (64.0 * 64.0 * 1024.0);
  for (const BoundarySpec& spec : {BoundarySpec{bc::Dirichlet{0.2, 0.8}}, BoundarySpec{bc::PerturbedDirichlet{0.2, 0.8, h}},
                                   BoundarySpec{bc::Robin{cosine_field(0.3)}}}) {
    const auto a = solve(g, spec, {64, dt, 0.1, 4, Scheme::Explicit});
    const auto b = solve(g, spec, {64, dt, 0.1, 4, Scheme::CrankNicolson});
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    MESSAGE("explicit vs CN " << worst);
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("second-order convergence against the spectral oracle") {
  const auto gamma = [](double u) { return 0.5 + 0.3 * std::cos(pi * u) + 0.1 * std::cos(2 * pi * u); };
  const auto exact = spectral_oracle(Profile::from_function(8192, gamma), SpectralProblem::Neumann, 64, 0.05);
  std::vector<double> hs, errs;
  for (std::size_t cells : {32, 64, 128}) {
    const auto rho = solve(Profile::from_function(cells, gamma), bc::Neumann{}, {cells, 0.0, 0.05, 1});
    hs.push_back(1.0 / static_cast<double>(cells));
    errs.push_back(sup_diff(rho.frame(1), exact));
  }
  const double order = log_log_slope(hs, errs);
  MESSAGE("observed order " << order);
  CHECK(std::abs(order - 2.0) <= 0.4);
}

TEST_CASE("solver errors") {
  const auto g = Profile::from_function(64, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
  CHECK_EPSB_ERROR(solve(g, bc::Neumann{}, {64, 1.0 / 4096.0, 0.1, 4, Scheme::Explicit}), ErrorCode::StabilityError);
  CHECK_EPSB_ERROR(solve(g, bc::Robin{cosine_field(200.0)}, {64, 0.0, 0.1, 4}), ErrorCode::StabilityError);
  CHECK_EPSB_ERROR(solve(g, bc::PerturbedDirichlet{0.2, 0.8, cosine_field(0.3)}, {64, 0.0, 0.1, 4}),
                   ErrorCode::ClassMismatch);
  CHECK_EPSB_ERROR(solve(g, bc::Dirichlet{1.2, 0.8}, {64, 0.0, 0.1, 4}), ErrorCode::OutOfRange);
  // Crank-Nicolson with a very long step rings on a jump.
  const auto plateau = Profile::from_function(64, [](double u) { return std::abs(u - 0.5) < 0.05 ? 1.0 : 0.0; });
  CHECK_EPSB_ERROR(solve(plateau, bc::Dirichlet{0.0, 0.0}, {64, 0.05, 0.1, 2}), ErrorCode::MaximumPrincipleViolation);
}
