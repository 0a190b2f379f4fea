// Acceptance run: one line per criterion, nonzero exit if any fails.
// Usage: acceptance [criterion numbers...]

#include "epsb/app.hpp"
#include "epsb/empirical.hpp"
#include "epsb/hydro.hpp"
#include "epsb/kmc.hpp"
#include "epsb/ldp.hpp"
#include "epsb/numerics.hpp"
#include "epsb/variational.hpp"

#include <fmt/core.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

using namespace epsb;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

SpaceTimeField analytic(const char* shape, std::vector<double> c, FieldClass cls, double horizon) {
  return SpaceTimeField::analytic({FieldTerm{{{1.0}}, Shape::parse(shape, std::move(c))}}, cls, horizon);
}

double sup_diff(const Profile& a, const Profile& b) {
  double e = 0.0;
  for (std::size_t i = 0; i <= a.grid_size(); ++i) e = std::max(e, std::abs(a[i] - b(a.node(i))));
  return e;
}

double l1_diff(const Profile& a, const Profile& b) {
  std::vector<double> d(a.grid_size() + 1);
  for (std::size_t i = 0; i <= a.grid_size(); ++i) d[i] = std::abs(a[i] - b(a.node(i)));
  return Profile(d).integral();
}

// ---------------------------------------------------------------- 1

Outcome small_n_exactness() {
  std::string detail;
  bool pass = true;
  const auto init = Configuration::from_string("100");
  for (double theta : {0.5, 2.0}) {
    const auto p = validate_params(4, theta, 0.3, 0.6, 0.5);
    const auto h = theta < 1 ? analytic("sine", {0.6}, FieldClass::DirichletZero, p.horizon)
                             : analytic("cosine", {0.0, 0.6}, FieldClass::Free, p.horizon);
    const Tilt tilt = Tilt::matching(h, p.n);
    for (const Tilt* t : {static_cast<const Tilt*>(nullptr), &tilt}) {
      const auto exact = exact_law_small_n(p, t, init, p.horizon);
      std::vector<double> law(exact.size(), 0.0);
      SimulationOptions opt;
      opt.record_events = false;
      const std::size_t M = 100000;
      for (std::size_t k = 0; k < M; ++k) {
        opt.stream = k;
        law[state_index(simulate(p, init, t, {}, 2024, opt).final_state)] += 1.0 / M;
      }
      const double tv = total_variation(law, exact);
      pass = pass && tv <= 0.01;
      detail += fmt::format("theta={} {}: TV={:.4f}; ", theta, t ? "tilted" : "plain", tv);
    }
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 2, 3

struct HydroRun {
  double l1 = 0.0;
  double drift = 0.0;
};

HydroRun hydro_limit(const ModelParams& p, const Profile& gamma, double eps, std::size_t M) {
  const std::size_t G = 256;
  std::vector<double> mean(G + 1, 0.0);
  double drift = 0.0;
  const auto init = deterministic_config(gamma, p.n);
  for (std::size_t k = 0; k < M; ++k) {
    SimulationOptions opt;
    opt.stream = k;
    const auto tr = simulate(p, init, nullptr, {}, 7, opt);
    const Profile d = density_estimate(tr, p.horizon, eps, G);
    for (std::size_t i = 0; i <= G; ++i) mean[i] += d[i] / static_cast<double>(M);
    drift = std::max(drift, EmpiricalPath(tr, G).max_mass_drift());
  }
  const auto regime = p.regime_spec();
  const auto rho = solve(gamma, boundary_for(regime), {1024, 0.0, p.horizon, 1});
  const Profile pde = mollify(rho.frame(1), eps, Kernel::Box);
  return {l1_diff(Profile(mean), pde), drift};
}

Outcome hydro_dirichlet() {
  const auto p = validate_params(256, 0.5, 0.2, 0.8, 0.25);
  const auto r = hydro_limit(p, Profile::constant(1024, 0.5), 0.05, 100);
  return {r.l1 <= 0.03, fmt::format("L1={:.4f} (limit 0.03)", r.l1)};
}

Outcome hydro_neumann() {
  const auto p = validate_params(256, 2.0, 0.5, 0.5, 0.25);
  const auto gamma = Profile::from_function(1024, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
  const auto r = hydro_limit(p, gamma, 0.05, 100);
  const double limit = 3.0 / 256.0;
  return {r.l1 <= 0.03 && r.drift <= limit,
          fmt::format("L1={:.4f} (limit 0.03), mass drift={:.5f} (limit {:.5f})", r.l1, r.drift, limit)};
}

// ---------------------------------------------------------------- 4

Outcome pde_cross_validation() {
  const auto dir = [](double u) { return 0.2 + 0.6 * u + 0.3 * std::sin(pi * u); };
  const auto neu = [](double u) { return 0.5 + 0.3 * std::cos(pi * u) + 0.1 * std::cos(2 * pi * u); };
  const double T = 0.05;
  const auto exact_d = spectral_oracle(Profile::from_function(8192, dir), SpectralProblem::Dirichlet, 64, T, 0.2, 0.8);
  const auto exact_n = spectral_oracle(Profile::from_function(8192, neu), SpectralProblem::Neumann, 64, T);
  const double sd = sup_diff(solve(Profile::from_function(512, dir), bc::Dirichlet{0.2, 0.8}, {512, 0.0, T, 1}).frame(1), exact_d);
  const double sn = sup_diff(solve(Profile::from_function(512, neu), bc::Neumann{}, {512, 0.0, T, 1}).frame(1), exact_n);

  const auto order = [&](const std::function<double(double)>& g, const BoundarySpec& b, const Profile& exact) {
    std::vector<double> hs, errs;
    for (std::size_t cells : {32, 64, 128}) {
      hs.push_back(1.0 / static_cast<double>(cells));
      errs.push_back(sup_diff(solve(Profile::from_function(cells, g), b, {cells, 0.0, T, 1}).frame(1), exact));
    }
    return log_log_slope(hs, errs);
  };
  const double od = order(dir, bc::Dirichlet{0.2, 0.8}, exact_d);
  const double on = order(neu, bc::Neumann{}, exact_n);
  const bool pass = sd <= 1e-3 && sn <= 1e-3 && std::abs(od - 2.0) <= 0.4 && std::abs(on - 2.0) <= 0.4;
  return {pass, fmt::format("sup error dirichlet={:.2e} neumann={:.2e}; order dirichlet={:.3f} neumann={:.3f}", sd, sn, od, on)};
}

// ---------------------------------------------------------------- 5

Outcome elliptic_round_trips() {
  // The initial profiles do not satisfy the tilted equation at the corners, so
  // the first few frames carry a thin layer; fine frames resolve d_t rho there.
  const double T = 0.1;
  const auto h0 = analytic("sine", {0.3}, FieldClass::DirichletZero, T);
  const auto gd = Profile::from_function(512, [](double u) { return 0.2 + 0.6 * u + 0.3 * std::sin(pi * u); });
  const auto rd = solve(gd, bc::PerturbedDirichlet{0.2, 0.8, h0}, {512, 0.0, T, 1000});
  const auto hd = elliptic_dirichlet(rd);
  const auto hc = analytic("cosine", {0.0, 0.3}, FieldClass::Free, T);
  const auto gn = Profile::from_function(512, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
  const auto rn = solve(gn, bc::Robin{hc}, {512, 0.0, T, 1000});
  const auto hn = elliptic_neumann(rn);
  double ed = 0.0, en = 0.0;
  for (std::size_t m = 1; m < rd.frames(); m += (m < 20 ? 1 : 25)) {
    const double t = rd.time(m);
    for (int i = 0; i <= 400; ++i) {
      const double u = i / 400.0;
      ed = std::max(ed, std::abs(hd.du(t, u) - h0.du(t, u)));
      en = std::max(en, std::abs(hn.du(t, u) - hc.du(t, u)));
    }
  }
  return {ed <= 1e-2 && en <= 1e-2, fmt::format("sup gradient error dirichlet={:.2e} neumann={:.2e} (limit 1e-2)", ed, en)};
}

// ---------------------------------------------------------------- 6

Outcome variational_identity() {
  const double T = 0.1;
  const RegimeSpec dir{Regime::Dirichlet, 0.2, 0.8};
  const RegimeSpec neu{Regime::Neumann, 0.5, 0.5};
  const auto gamma = Profile::from_function(256, [](double u) { return 0.2 + 0.6 * u + 0.3 * std::sin(pi * u); });
  const auto h0 = analytic("sine", {0.3}, FieldClass::DirichletZero, T);
  const TiltBasis basis(4, 6, FieldClass::DirichletZero, T);
  const auto rh = solve(gamma, bc::PerturbedDirichlet{0.2, 0.8, h0}, {256, 0.0, T, 50});
  const double rate = rate_function(rh, dir, basis).value;
  const double cost = quadratic_cost(rh, h0);
  const double rel = std::abs(rate - cost) / cost;

  const double zero_d = rate_function(solve(gamma, bc::Dirichlet{0.2, 0.8}, {256, 0.0, T, 50}), dir, basis).value;
  const auto gn = Profile::from_function(256, [](double u) { return 0.5 + 0.3 * std::cos(pi * u); });
  const double zero_n =
      rate_function(solve(gn, bc::Neumann{}, {256, 0.0, T, 50}), neu, TiltBasis(2, 4, FieldClass::Free, T)).value;

  const auto form = rate_quadratic_form(rh, dir, basis);
  double worst = 0.0;
  const double step = 1e-3;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis.size()));
    e[static_cast<Eigen::Index>(i)] = step;
    const double fd = (j_functional(rh, basis.field(e), dir) - j_functional(rh, basis.field(-e), dir)) / (2 * step);
    const double b = form.b[static_cast<Eigen::Index>(i)];
    worst = std::max(worst, std::abs(fd - b) / std::max(1.0, std::abs(b)));
  }
  const bool pass = rel <= 0.02 && zero_d <= 1e-6 && zero_n <= 1e-6 && worst <= 1e-6;
  return {pass, fmt::format("rate={:.6f} cost={:.6f} (rel {:.2e}); hydro rate dirichlet={:.1e} neumann={:.1e}; "
                            "gradient rel error={:.1e}",
                            rate, cost, rel, zero_d, zero_n, worst)};
}

// ---------------------------------------------------------------- 7

Outcome entropy_convergence() {
  const double T = 0.5;
  const auto H = analytic("cosine", {0.0, 0.3}, FieldClass::Free, T);
  const auto gamma = Profile::constant(256, 0.5);
  std::vector<double> gaps;
  std::string detail;
  double target = 0.0, last = 0.0;
  for (std::size_t n : {64, 128, 256}) {
    const auto p = validate_params(static_cast<long long>(n), 2.0, 0.5, 0.5, T);
    target = tilted_quadratic_cost(p, gamma, H);
    const auto e = relative_entropy_rate(p, deterministic_config(gamma, n), Tilt::matching(H, n), 200, 31);
    gaps.push_back(std::abs(e.value - target));
    last = e.value;
    detail += fmt::format("n={}: {:.5f}+-{:.5f}; ", n, e.value, e.std_error);
  }
  const bool monotone = gaps[1] <= gaps[0] && gaps[2] <= gaps[1];
  const double rel = std::abs(last - target) / target;
  detail += fmt::format("target={:.5f}, final rel gap={:.3f}", target, rel);
  return {monotone && rel <= 0.15, detail};
}

// ---------------------------------------------------------------- 8

Outcome superexponential_ingredients() {
  bool pass = true;
  std::string detail;

  // Weights.
  for (double theta : {0.5, 2.0}) {
    const auto p = validate_params(64, theta, 0.3, 0.7, 0.1);
    const auto h = theta < 1 ? analytic("sine", {0.5}, FieldClass::DirichletZero, p.horizon)
                             : analytic("cosine", {0.0, 0.5}, FieldClass::Free, p.horizon);
    const auto e = relative_entropy_rate(p, deterministic_config(Profile::constant(8, 0.5), 64), Tilt::matching(h, 64), 1000, 3);
    const bool ok = std::abs(e.mean_weight - 1.0) <= 4 * e.weight_std_error;
    pass = pass && ok;
    detail += fmt::format("weights theta={}: {:.4f}+-{:.4f}; ", theta, e.mean_weight, e.weight_std_error);
  }

  // Mass and current tails.
  double excess = -1.0;
  std::size_t rows = 0;
  for (double theta : {1.5, 2.0, 3.0}) {
    for (std::size_t n : {64, 128}) {
      const auto p = validate_params(static_cast<long long>(n), theta, 0.3, 0.6, 0.5);
      const auto init = deterministic_config(Profile::constant(8, 0.5), n);
      const std::vector<double> lambdas{0.01, 0.02, 0.05};
      for (const auto& r : mass_tail_experiment(p, init, lambdas, 200, 5)) {
        excess = std::max(excess, r.frequency - r.bound - 4 * r.std_error);
        ++rows;
      }
      for (const auto& r : boundary_current_tail(p, init, lambdas, 200, 6)) {
        excess = std::max(excess, r.left.frequency - r.left.bound - 4 * r.left.std_error);
        excess = std::max(excess, r.right.frequency - r.right.bound - 4 * r.right.std_error);
        rows += 2;
      }
    }
  }
  pass = pass && excess <= 0.0;
  detail += fmt::format("tails: {} rows, max(freq - bound - 4se)={:.3f}; ", rows, excess);

  // Replacement residuals at fixed eps.
  const TestFunction one = [](double) { return 1.0; };
  const auto ramp = Profile::from_function(16, [](double u) { return 0.2 + 0.6 * u; });
  for (auto site : {ReplacementSite::Left, ReplacementSite::Right}) {
    std::vector<ReplacementStats> rs;
    for (std::size_t n : {64, 128, 256}) {
      const auto p = validate_params(static_cast<long long>(n), 0.5, 0.2, 0.8, 0.05);
      rs.push_back(replacement_residual(p, 0.1, site, one, ramp, 100, 9));
    }
    bool trend = rs.back().mean_abs < rs.front().mean_abs;
    for (std::size_t i = 1; i < rs.size(); ++i) trend = trend && rs[i].mean_abs <= rs[i - 1].mean_abs + 4 * rs[i].std_error_abs;
    pass = pass && trend;
    detail += fmt::format("replacement {}: {:.2e} {:.2e} {:.2e}; ", site == ReplacementSite::Left ? "left" : "right",
                          rs[0].mean_abs, rs[1].mean_abs, rs[2].mean_abs);
  }
  return {pass, detail};
}

// ---------------------------------------------------------------- 9

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome manifest_replay() {
  using nlohmann::json;
  const json params = {{"n", 32}, {"theta", 2.0}, {"alpha", 0.3}, {"beta", 0.6}, {"horizon", 0.05}};
  const json flat = {{"shape", "linear"}, {"coefficients", {0.5, 0.0}}};
  const json cosine = {{"shape", "cosine"}, {"coefficients", {0.5, 0.3}}};
  const json tilt = {{"terms", {{{"shape", "cosine"}, {"coefficients", {0.0, 0.3}}}}}};
  const std::vector<json> configs = {
      {{"command", "simulate"}, {"params", params}, {"initial", cosine}, {"replicas", 5}, {"initial_mode", "product"}},
      {{"command", "hydro"}, {"params", params}, {"initial", cosine}, {"grid", {{"cells", 64}, {"frames", 5}}}},
      {{"command", "rate"}, {"params", params}, {"initial", cosine}, {"tilt", tilt}, {"grid", {{"cells", 64}, {"frames", 10}}}},
      {{"command", "entropy"}, {"params", params}, {"initial", flat}, {"tilt", tilt}, {"replicas", 20}, {"ns", {16, 32}}},
      {{"command", "tails"}, {"kind", "mass"}, {"params", params}, {"initial", flat}, {"replicas", 20}},
      {{"command", "tails"}, {"kind", "current"}, {"params", params}, {"initial", flat}, {"replicas", 20}},
      {{"command", "tails"}, {"kind", "replacement"}, {"params", {{"n", 32}, {"theta", 0.5}, {"horizon", 0.02}}},
       {"initial", flat}, {"replicas", 10}},
      {{"command", "oracle"}, {"params", {{"n", 4}, {"theta", 0.5}, {"horizon", 0.2}}}, {"initial", flat}, {"replicas", 2000}}};
  const fs::path root = fs::temp_directory_path() / "epsb_acceptance_replay";
  fs::remove_all(root);
  std::size_t compared = 0;
  std::string failures;
  std::ostringstream log;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const fs::path a = root / fmt::format("{}_a", i), b = root / fmt::format("{}_b", i);
    const int ca = app::run(configs[i], {.seed = 100 + i, .out = a}, log);
    const int cb = app::run_file(a / "manifest.json", {.out = b}, log);
    if (ca != cb || ca == app::kConfigError || ca == app::kFailure) {
      failures += fmt::format("{} exit {}/{}; ", configs[i]["command"].get<std::string>(), ca, cb);
      continue;
    }
    for (const auto& entry : fs::directory_iterator(a)) {
      if (entry.path().extension() != ".csv") continue;
      ++compared;
      if (file_bytes(entry.path()) != file_bytes(b / entry.path().filename()))
        failures += entry.path().string() + " differs; ";
    }
  }
  fs::remove_all(root);
  return {failures.empty() && compared > 0, fmt::format("{} CSV files compared; {}", compared, failures.empty() ? "identical" : failures)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"small-n exactness", small_n_exactness},
      {"hydrodynamic limit, Dirichlet regime", hydro_dirichlet},
      {"hydrodynamic limit, Neumann regime", hydro_neumann},
      {"PDE cross-validation", pde_cross_validation},
      {"elliptic round trips", elliptic_round_trips},
      {"variational identity", variational_identity},
      {"relative-entropy convergence", entropy_convergence},
      {"superexponential ingredients", superexponential_ingredients},
      {"determinism and replay", manifest_replay},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    fmt::print("[{}] criterion {} {}: {} ({:.1f}s)\n", o.pass ? "PASS" : "FAIL", id, criteria[i].first, o.detail, secs);
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  fmt::print("{} criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
