#include "epsb/empirical.hpp"
#include "epsb/field.hpp"
#include "epsb/lattice.hpp"
#include "epsb/numerics.hpp"
#include "epsb/rng.hpp"

#include "support.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

using namespace epsb;
using std::numbers::pi;

TEST_CASE("validate_params accepts and rejects") {
  const auto p = validate_params(100, 0.5, 0.2, 0.8, 1.0);
  CHECK(p.n == 100);
  CHECK(p.sites() == 99);
  CHECK(p.bonds() == 98);
  CHECK(p.regime_spec().regime == Regime::Dirichlet);

  CHECK_EPSB_ERROR(validate_params(100, 0.5, 0.0, 0.8, 1.0), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(validate_params(100, 0.5, 0.2, 1.0, 1.0), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(validate_params(2, 0.5, 0.2, 0.8, 1.0), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(validate_params(10, -0.1, 0.2, 0.8, 1.0), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(validate_params(10, 0.5, 0.2, 0.8, -1.0), ErrorCode::OutOfRange);

  const auto zero = validate_params(3, 2.0, 0.5, 0.5, 0.0);
  CHECK(zero.horizon == 0.0);
  CHECK(zero.regime_spec().regime == Regime::Neumann);

  const auto critical = validate_params(10, 1.0, 0.5, 0.5, 1.0);
  CHECK(critical.critical());
  CHECK_EPSB_ERROR(regime_of(1.0), ErrorCode::ThetaRegime);
  CHECK(critical.boundary_clock() == doctest::Approx(10.0));
}

TEST_CASE("chi") {
  CHECK(chi(0.0) == 0.0);
  CHECK(chi(0.5) == 0.25);
  CHECK(chi(0.2) == doctest::Approx(0.16).epsilon(1e-15));
  CHECK_EPSB_ERROR(chi(1.2), ErrorCode::DomainError);
  CHECK_EPSB_ERROR(chi(-0.1), ErrorCode::DomainError);
}

TEST_CASE("g_alpha_beta profile") {
  const auto g = profile_g_alpha_beta(0.2, 0.8, 0.25, 1024);
  CHECK(g(0.0) == doctest::Approx(0.2));
  CHECK(g(0.5) == doctest::Approx(0.5));
  CHECK(g(1.0) == doctest::Approx(0.8));

  const auto flat = profile_g_alpha_beta(0.5, 0.5, 0.25, 64);
  for (double v : flat.values()) CHECK(v == doctest::Approx(0.5));

  CHECK_EPSB_ERROR(profile_g_alpha_beta(0.2, 0.8, 0.5), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(profile_g_alpha_beta(0.2, 0.8, 0.0), ErrorCode::OutOfRange);

  SUBCASE("plateaus are exact and the rescaled ramp is 1-Lipschitz") {
    for (double delta : {0.1, 0.25, 0.4}) {
      for (auto [a, b] : {std::pair{0.2, 0.8}, std::pair{0.9, 0.1}, std::pair{0.3, 0.35}}) {
        const Shape s(Shape::Kind::GAlphaBeta, {a, b, delta});
        const double scale = (b - a) / (1.0 - 2.0 * delta);
        for (int i = 0; i <= 400; ++i) {
          const double u = i / 400.0;
          if (u <= delta) CHECK(s.value(u) == a);
          if (u >= 1.0 - delta) CHECK(s.value(u) == b);
          const double v = std::min(1.0, u + 0.0137);
          CHECK(std::abs(s.value(v) - s.value(u)) / std::abs(scale) <= (v - u) * (1 + 1e-12));
        }
      }
    }
  }
}

TEST_CASE("bernoulli product sampling") {
  const std::size_t n = 200;
  const auto ones = sample_bernoulli_product(Profile::constant(16, 1.0), n, 3);
  CHECK(ones.particles() == n - 1);
  const auto zeros = sample_bernoulli_product(Profile::constant(16, 0.0), n, 3);
  CHECK(zeros.particles() == 0);

  CHECK(sample_bernoulli_product(Profile::constant(8, 0.4), 500, 11) ==
        sample_bernoulli_product(Profile::constant(8, 0.4), 500, 11));

  SUBCASE("mean density is within 3 standard errors") {
    const std::size_t big = 10000;
    const auto g = profile_g_alpha_beta(0.2, 0.8, 0.25, 1024);
    const auto c = sample_bernoulli_product(g, big, 2024);
    double expect = 0.0, var = 0.0;
    for (std::size_t x = 1; x < big; ++x) {
      const double p = g(static_cast<double>(x) / big);
      expect += p;
      var += p * (1.0 - p);
    }
    const double sd = std::sqrt(var);
    CHECK(std::abs(static_cast<double>(c.particles()) - expect) <= 3.0 * sd);
    // The lattice sum and the integral differ by O(1/n) only.
    CHECK(expect / (big - 1) == doctest::Approx(g.integral()).epsilon(1e-3));
  }

  SUBCASE("chi-square on site occupancy at level 1e-3") {
    // 100 sites x 1000 seeds = 1e5 draws; per-site two-cell statistics are
    // pooled into a 100-degree-of-freedom chi-square.
    const double p = 0.3;
    const std::size_t sites = 100, draws = 1000;
    std::vector<double> hits(sites, 0.0);
    for (std::size_t s = 0; s < draws; ++s) {
      const auto c = sample_bernoulli_product(Profile::constant(4, p), sites + 1, 7000 + s);
      for (std::size_t x = 1; x <= sites; ++x) hits[x - 1] += c[x];
    }
    double stat = 0.0;
    const double e1 = draws * p, e0 = draws * (1 - p);
    for (double h : hits) stat += (h - e1) * (h - e1) / e1 + (h - e1) * (h - e1) / e0;
    // Upper 1e-3 quantile of chi-square with 100 degrees of freedom.
    CHECK(stat < 149.449);
  }
}

TEST_CASE("deterministic configuration by quantile rounding") {
  CHECK(deterministic_config(Profile::constant(8, 1.0), 50).particles() == 49);
  CHECK(deterministic_config(Profile::constant(8, 0.0), 50).particles() == 0);

  const auto half = deterministic_config(Profile::constant(8, 0.5), 100);
  const double m = mass(half);
  CHECK((std::abs(m - 0.49) < 1e-12 || std::abs(m - 0.50) < 1e-12));
  for (std::size_t x = 1; x + 1 < 100; ++x) CHECK(half[x] + half[x + 1] == 1);

  SUBCASE("pairings converge at rate 1/n") {
    const auto gamma = Profile::from_function(4096, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
    const std::vector<TestFunction> fs{[](double) { return 1.0; }, [](double u) { return u; },
                                       [](double u) { return u * u; },
                                       [](double u) { return std::sin(pi * u); }};
    for (const auto& f : fs) {
      const double exact = gauss4([&](double u) { return (0.5 + 0.3 * std::cos(pi * u)) * f(u); }, 0.0, 1.0);
      for (std::size_t n : {100, 1000, 10000}) {
        const double err = std::abs(pairing(deterministic_config(gamma, n), f) - exact);
        CHECK(err * static_cast<double>(n) <= 3.0);
      }
    }
  }
}

TEST_CASE("configuration maps") {
  auto c = Configuration::from_string("1100");
  CHECK(c.n() == 5);
  CHECK(c.particles() == 2);
  CHECK(c.discordant(2));
  CHECK_FALSE(c.discordant(1));
  c.swap_bond(2);
  CHECK(c.to_string() == "1010");
  c.flip(1);
  CHECK(c.to_string() == "0010");
  CHECK_EPSB_ERROR(Configuration::from_string("10a"), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(c.set(1, 2), ErrorCode::OutOfRange);
}

TEST_CASE("profiles") {
  const Profile p({0.0, 0.5, 1.0});
  CHECK(p(0.25) == doctest::Approx(0.25));
  CHECK(p.integral() == doctest::Approx(0.5));
  CHECK(p.primitive(0.5) == doctest::Approx(0.125));
  CHECK(p.resampled(8)(0.375) == doctest::Approx(0.375));
  CHECK_EPSB_ERROR(Profile({0.0, 1.5, 1.0}), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(Profile({0.0, 1.0}), ErrorCode::OutOfRange);

  const auto st = SpaceTimeProfile::from_function(1.0, 4, 8, [](double t, double u) { return 0.25 * t + 0.5 * u; });
  CHECK(st.frames() == 5);
  CHECK(st.time(2) == doctest::Approx(0.5));
  CHECK(st.masses()[4] == doctest::Approx(0.5));
  CHECK_EPSB_ERROR(SpaceTimeProfile(1.0, 8, std::vector<double>(10, 0.5)), ErrorCode::OutOfRange);
  CHECK_EPSB_ERROR(SpaceTimeProfile(1.0, {Profile::constant(4, 0.1), Profile::constant(8, 0.1)}),
                   ErrorCode::OutOfRange);
}

TEST_CASE("shape registry derivatives agree with finite differences") {
  const std::vector<Shape> shapes{
      Shape::parse("linear", {0.1, 0.3}), Shape::parse("sine", {0.2, -0.1, 0.05}),
      Shape::parse("cosine", {0.5, 0.3, 0.1}), Shape::parse("bump", {0.4, 0.5, 0.3})};
  for (const auto& s : shapes) {
    for (double u : {0.13, 0.41, 0.5, 0.77}) {
      const double h = 1e-5;
      CHECK(s.d1(u) == doctest::Approx((s.value(u + h) - s.value(u - h)) / (2 * h)).epsilon(1e-6));
      CHECK(s.d2(u) == doctest::Approx((s.d1(u + h) - s.d1(u - h)) / (2 * h)).epsilon(1e-5));
    }
  }
  CHECK_EPSB_ERROR(Shape::parse("spline", {1.0}), ErrorCode::ConfigError);
}

TEST_CASE("space-time fields") {
  const FieldTerm sine{{{1.0}}, Shape::parse("sine", {0.3})};
  const auto h = SpaceTimeField::analytic({sine}, FieldClass::DirichletZero);
  CHECK(h.value(0.3, 0.5) == doctest::Approx(0.3));
  CHECK(h.du(0.0, 0.0) == doctest::Approx(0.3 * pi));

  const FieldTerm cosine{{{1.0}}, Shape::parse("cosine", {0.0, 0.3})};
  CHECK_EPSB_ERROR(SpaceTimeField::analytic({cosine}, FieldClass::DirichletZero), ErrorCode::ClassMismatch);
  const auto free = SpaceTimeField::analytic({cosine}, FieldClass::Free);
  CHECK(free.plus_constant(2.0).du(0.1, 0.3) == doctest::Approx(free.du(0.1, 0.3)));
  CHECK(free.scaled(2.0).value(0.1, 0.3) == doctest::Approx(2 * free.value(0.1, 0.3)));

  std::vector<double> bad(3 * 5, 0.1);
  CHECK_EPSB_ERROR(SpaceTimeField::sampled(1.0, 2, 4, bad, FieldClass::DirichletZero), ErrorCode::ClassMismatch);

  const auto sampled = SpaceTimeField::sampled(1.0, 4, 256, h.sample(1.0, 4, 256), FieldClass::DirichletZero);
  CHECK(sampled.du(0.5, 0.3) == doctest::Approx(h.du(0.5, 0.3)).epsilon(1e-3));

  const auto tilt = Tilt::matching(h, 10);
  CHECK(tilt.g_matches_h);
  CHECK(tilt.G.left(0.2) == doctest::Approx(h.value(0.2, 0.1)));
  CHECK(tilt.G.right(0.2) == doctest::Approx(h.value(0.2, 0.9)));
  const LatticeTilt lt(tilt, 10);
  CHECK(lt.gradient(0.0, 3) == doctest::Approx(h.value(0, 0.4) - h.value(0, 0.3)));
}

TEST_CASE("rng streams") {
  Rng a(5, 1), b(5, 1), c(5, 2);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next();
    CHECK(x == b.next());
    differs = differs || x != c.next();
  }
  CHECK(differs);
  Rng r(9);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK((u > 0.0 && u < 1.0));
    CHECK(r.below(7) < 7);
  }
}

TEST_CASE("numerics helpers") {
  // Tridiagonal solve against a dense oracle.
  const std::size_t m = 7;
  std::vector<double> lo(m, -1.0), di(m, 3.0), up(m, -0.5), rhs(m);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd b(m);
  for (std::size_t i = 0; i < m; ++i) {
    a(i, i) = di[i];
    if (i > 0) a(i, i - 1) = lo[i];
    if (i + 1 < m) a(i, i + 1) = up[i];
    rhs[i] = b[i] = std::sin(1.0 + i);
  }
  const Eigen::VectorXd x = a.fullPivLu().solve(b);
  TridiagonalSolver(lo, di, up).solve(rhs);
  for (std::size_t i = 0; i < m; ++i) CHECK(rhs[i] == doctest::Approx(x[i]).epsilon(1e-12));

  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  CHECK(s.value() == doctest::Approx(1.0 + 1e-13).epsilon(1e-15));

  CHECK(log_log_slope({1, 2, 4, 8}, {3, 12, 48, 192}) == doctest::Approx(2.0));
  CHECK(gauss4([](double u) { return std::pow(u, 7); }, 0.0, 1.0, 1.0) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(trapezoid({0.0, 1.0, 2.0}, 0.5) == doctest::Approx(1.0));
  const auto stats = summarize({1.0, 2.0, 3.0});
  CHECK(stats.mean == 2.0);
  CHECK(stats.variance == 1.0);
  CHECK(stats.std_error == doctest::Approx(1.0 / std::sqrt(3.0)));
}
