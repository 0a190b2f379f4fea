#include "epsb/app.hpp"

#include "epsb/empirical.hpp"
#include "epsb/error.hpp"
#include "epsb/hydro.hpp"
#include "epsb/io.hpp"
#include "epsb/kmc.hpp"
#include "epsb/ldp.hpp"
#include "epsb/numerics.hpp"
#include "epsb/parallel.hpp"
#include "epsb/rng.hpp"
#include "epsb/variational.hpp"

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <numbers>

namespace epsb::app {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "0.1.0";

[[noreturn]] void config_fail(const std::string& key, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, key + ": " + msg);
}

/// Message of an Error without the "Code: " prefix.
std::string bare(const Error& e) {
  const std::string w = e.what();
  const auto p = w.find(": ");
  return p == std::string::npos ? w : w.substr(p + 2);
}

template <class T>
T read(const json& j, const std::string& key, const std::string& where, std::optional<T> fallback = std::nullopt) {
  const std::string path = where.empty() ? key : where + "." + key;
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    config_fail(path, "missing required key");
  }
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_fail(path, "has the wrong type");
  }
}

struct Context {
  json config;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  fs::path out;
  std::ostream* log = nullptr;
  std::vector<std::string> outputs;
  json invariants = json::object();
  bool ok = true;

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return out / name;
  }
  void check(const std::string& name, double value, double limit, bool pass) {
    invariants[name] = {{"value", value}, {"limit", limit}, {"pass", pass}};
    if (!pass) {
      ok = false;
      *log << "invariant failed: " << name << " = " << io::format_double(value) << " (limit " << io::format_double(limit)
           << ")\n";
    }
  }
};

ModelParams parse_params(const json& c, bool need_n) {
  if (!c.contains("params")) config_fail("params", "missing required key");
  const json& p = c.at("params");
  const long long n = read<long long>(p, "n", "params", need_n ? std::nullopt : std::optional<long long>(64));
  const double theta = read<double>(p, "theta", "params");
  const double alpha = read<double>(p, "alpha", "params", 0.5);
  const double beta = read<double>(p, "beta", "params", 0.5);
  const double horizon = read<double>(p, "horizon", "params");
  try {
    ModelParams mp = validate_params(n, theta, alpha, beta, horizon);
    return mp;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail("params." + bare(e), "invalid value");
  }
}

Shape parse_shape(const json& j, const std::string& where) {
  const auto name = read<std::string>(j, "shape", where);
  const auto coeffs = read<std::vector<double>>(j, "coefficients", where);
  try {
    return Shape::parse(name, coeffs);
  } catch (const Error& e) {
    config_fail(where, bare(e));
  }
}

Profile parse_profile(const json& c, const std::string& key, std::size_t grid = 1024) {
  if (!c.contains(key)) config_fail(key, "missing required key");
  const json& j = c.at(key);
  try {
    if (j.contains("csv")) return io::read_profile_csv(read<std::string>(j, "csv", key));
    return sample_shape(parse_shape(j, key), grid);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail(key, bare(e));
  }
}

std::optional<SpaceTimeField> parse_tilt(const json& c, const ModelParams& p) {
  if (!c.contains("tilt") || c.at("tilt").is_null()) return std::nullopt;
  const json& j = c.at("tilt");
  const FieldClass cls = class_for(regime_of(p.theta));
  try {
    if (j.contains("csv")) {
      io::GridData g = io::read_grid_csv(read<std::string>(j, "csv", "tilt"));
      return SpaceTimeField::sampled(g.horizon, g.time_steps, g.grid_size, std::move(g.values), cls);
    }
    if (!j.contains("terms") || !j.at("terms").is_array()) config_fail("tilt.terms", "missing term list");
    std::vector<FieldTerm> terms;
    for (std::size_t i = 0; i < j.at("terms").size(); ++i) {
      const std::string where = fmt::format("tilt.terms[{}]", i);
      const json& t = j.at("terms")[i];
      FieldTerm term;
      term.space = parse_shape(t, where);
      term.time.coefficients = read<std::vector<double>>(t, "time", where, std::vector<double>{1.0});
      terms.push_back(std::move(term));
    }
    return SpaceTimeField::analytic(std::move(terms), cls, p.horizon);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    config_fail("tilt", bare(e));
  }
}

SolverGrid parse_grid(const json& c, double horizon) {
  SolverGrid g;
  g.horizon = horizon;
  if (!c.contains("grid")) return g;
  const json& j = c.at("grid");
  g.cells = read<std::size_t>(j, "cells", "grid", g.cells);
  g.dt = read<double>(j, "dt", "grid", 0.0);
  g.frames = read<std::size_t>(j, "frames", "grid", g.frames);
  const auto scheme = read<std::string>(j, "scheme", "grid", std::string("crank_nicolson"));
  if (scheme == "crank_nicolson") g.scheme = Scheme::CrankNicolson;
  else if (scheme == "explicit") g.scheme = Scheme::Explicit;
  else config_fail("grid.scheme", "must be crank_nicolson or explicit");
  if (g.cells < 4) config_fail("grid.cells", "must be at least 4");
  if (g.frames < 1) config_fail("grid.frames", "must be at least 1");
  return g;
}

/// Initial configuration of replica k.
Configuration initial_config(const Context& ctx, const Profile& gamma, std::size_t n, std::size_t k) {
  const auto mode = read<std::string>(ctx.config, "initial_mode", "", std::string("deterministic"));
  if (mode == "deterministic") return deterministic_config(gamma, n);
  if (mode != "product") config_fail("initial_mode", "must be deterministic or product");
  Rng rng(ctx.seed, (std::uint64_t{1} << 40) + k);
  Configuration c(n);
  for (std::size_t x = 1; x < n; ++x) {
    c.set(x, rng.bernoulli(gamma(static_cast<double>(x) / static_cast<double>(n))) ? 1 : 0);
  }
  return c;
}

// ---------------------------------------------------------------- commands

void cmd_simulate(Context& ctx) {
  const ModelParams p = parse_params(ctx.config, true);
  const Profile gamma = parse_profile(ctx.config, "initial");
  const auto H = parse_tilt(ctx.config, p);
  std::optional<Tilt> tilt;
  if (H) tilt = Tilt::matching(*H, p.n);
  const auto M = read<std::size_t>(ctx.config, "replicas", "", 1);
  const double eps = read<double>(ctx.config, "eps", "", 0.05);
  const auto G = read<std::size_t>(ctx.config, "readout", "", 128);
  const auto save = read<std::size_t>(ctx.config, "save_trajectories", "", 1);
  std::vector<double> schedule;
  if (ctx.config.contains("schedule")) {
    schedule = read<std::vector<double>>(ctx.config, "schedule", "");
  } else {
    for (int j = 0; j <= 10; ++j) schedule.push_back(p.horizon * j / 10.0);
  }
  for (double s : schedule) {
    if (s < 0.0 || s > p.horizon) config_fail("schedule", "times must lie in [0,T]");
  }
  if (M == 0) config_fail("replicas", "must be positive");
  try {
    box_size(p.n, eps);
  } catch (const Error&) {
    config_fail("eps", "box floor(eps n) is empty");
  }

  const auto runs = run_replicas(M, ctx.workers, [&](std::size_t k) {
    SimulationOptions opt;
    opt.stream = k;
    opt.record_events = k < save;
    return simulate(p, initial_config(ctx, gamma, p.n, k), tilt ? &*tilt : nullptr, schedule, ctx.seed, opt);
  });

  std::vector<std::vector<double>> density_rows, mass_rows;
  double worst_drift = 0.0;
  for (std::size_t j = 0; j < schedule.size(); ++j) {
    std::vector<std::vector<double>> samples(G + 1);
    for (std::size_t k = 0; k < M; ++k) {
      const Profile d = density_profile(runs[k].snapshots[j], eps, G);
      for (std::size_t i = 0; i <= G; ++i) samples[i].push_back(d[i]);
      const double m = mass(runs[k].snapshots[j]);
      worst_drift = std::max(worst_drift, std::abs(m - mass(runs[k].initial)));
      mass_rows.push_back({static_cast<double>(k), schedule[j], m});
    }
    for (std::size_t i = 0; i <= G; ++i) {
      const MeanStderr s = summarize(samples[i]);
      density_rows.push_back({schedule[j], static_cast<double>(i) / static_cast<double>(G), s.mean, s.std_error});
    }
  }
  io::write_csv(ctx.file("density.csv"), {"t", "u", "mean", "stderr"}, density_rows);
  io::write_csv(ctx.file("mass.csv"), {"replica", "t", "mass"}, mass_rows);
  for (std::size_t k = 0; k < std::min(save, M); ++k) {
    const std::string base = fmt::format("trajectory_{}", k);
    io::write_trajectory(ctx.file(base + ".json"), ctx.file(base + ".bin"), runs[k]);
    io::write_snapshots_csv(ctx.file(fmt::format("snapshots_{}.csv", k)), runs[k]);
  }
  ctx.invariants["max_mass_drift"] = {{"value", worst_drift}, {"pass", true}};
}

void cmd_hydro(Context& ctx) {
  const ModelParams p = parse_params(ctx.config, false);
  const Profile gamma = parse_profile(ctx.config, "initial");
  const auto H = parse_tilt(ctx.config, p);
  const SolverGrid grid = parse_grid(ctx.config, p.horizon);
  const double tol = read<double>(ctx.config, "residual_tol", "", 1e-3);
  const RegimeSpec regime = p.regime_spec();
  const SpaceTimeProfile rho = solve(gamma, H ? boundary_for(regime, *H) : boundary_for(regime), grid);
  io::write_space_time_csv(ctx.file("solution.csv"), rho);
  io::write_space_time_binary(ctx.file("solution.bin"), rho);

  std::vector<std::vector<double>> rows;
  double worst = 0.0;
  const bool dir = regime.regime == Regime::Dirichlet;
  const FieldClass cls = class_for(regime.regime);
  for (int k = dir ? 1 : 0; k <= 3; ++k) {
    const Shape s = dir ? Shape(Shape::Kind::Sine, std::vector<double>(static_cast<std::size_t>(k), 0.0))
                        : Shape(Shape::Kind::Cosine, std::vector<double>(static_cast<std::size_t>(k) + 1, 0.0));
    std::vector<double> c = s.coefficients();
    c.back() = 1.0;
    const SpaceTimeField f = SpaceTimeField::analytic({FieldTerm{TimePolynomial{}, Shape(s.kind(), c)}}, cls, p.horizon);
    for (std::size_t q = 1; q <= 4; ++q) {
      const std::size_t m = (rho.frames() - 1) * q / 4;
      if (m == 0) continue;
      const double r = weak_residual(rho, f, regime, H ? &*H : nullptr, rho.time(m));
      worst = std::max(worst, std::abs(r));
      rows.push_back({static_cast<double>(k), rho.time(m), r});
    }
  }
  io::write_csv(ctx.file("residuals.csv"), {"k", "t", "residual"}, rows);
  ctx.check("max_weak_residual", worst, tol, worst <= tol);
  if (!dir) {
    const double drift = max_mass_drift(rho);
    ctx.check("mass_drift", drift, 1e-8, drift <= 1e-8);
  }
}

void cmd_rate(Context& ctx) {
  const ModelParams p = parse_params(ctx.config, false);
  const Profile gamma = parse_profile(ctx.config, "initial");
  const auto H = parse_tilt(ctx.config, p);
  const SolverGrid grid = parse_grid(ctx.config, p.horizon);
  const RegimeSpec regime = p.regime_spec();
  const json b = ctx.config.value("basis", json::object());
  const auto kt = read<std::size_t>(b, "kt", "basis", 4);
  const auto ku = read<std::size_t>(b, "ku", "basis", 8);
  if (kt < 1 || ku < 1) config_fail("basis", "kt and ku must be positive");
  const double mass_tol = read<double>(ctx.config, "mass_tol", "", 1e-8);
  const SpaceTimeProfile rho = solve(gamma, H ? boundary_for(regime, *H) : boundary_for(regime), grid);
  const TiltBasis basis(kt, ku, class_for(regime.regime), p.horizon);
  const RateReport rep = rate_function(rho, regime, basis, mass_tol);
  {
    std::ofstream out(ctx.file("rate.json"));
    out << rep.to_json() << '\n';
  }
  std::vector<std::vector<double>> rows{{rep.value, H ? quadratic_cost(rho, *H) : 0.0}};
  io::write_csv(ctx.file("rate.csv"), {"rate", "quadratic_cost"}, rows);
  if (!H) ctx.check("rate_of_hydrodynamic_path", rep.value, 1e-6, rep.value <= 1e-6);
}

void cmd_entropy(Context& ctx) {
  const ModelParams p = parse_params(ctx.config, true);
  const Profile gamma = parse_profile(ctx.config, "initial");
  const auto H = parse_tilt(ctx.config, p);
  if (!H) config_fail("tilt", "entropy needs a tilt");
  const auto M = read<std::size_t>(ctx.config, "replicas", "", 100);
  const auto ns = read<std::vector<std::size_t>>(ctx.config, "ns", "", std::vector<std::size_t>{p.n});
  const SolverGrid grid = parse_grid(ctx.config, p.horizon);
  const double target = tilted_quadratic_cost(p, gamma, *H, grid.cells, grid.frames);
  std::vector<std::vector<double>> rows;
  bool oriented = true, unbiased = true;
  for (std::size_t n : ns) {
    ModelParams q = p;
    q.n = n;
    const Tilt tilt = Tilt::matching(*H, n);
    const EntropyEstimate e = relative_entropy_rate(q, deterministic_config(gamma, n), tilt, M, ctx.seed, ctx.workers);
    rows.push_back({static_cast<double>(n), e.value, e.std_error, e.mean_weight, e.weight_std_error, target});
    oriented = oriented && e.value >= -4.0 * e.std_error;
    unbiased = unbiased && std::abs(e.mean_weight - 1.0) <= 4.0 * e.weight_std_error + 1e-12;
  }
  io::write_csv(ctx.file("entropy.csv"), {"n", "estimate", "stderr", "mean_weight", "weight_stderr", "target"}, rows);
  ctx.check("entropy_nonnegative", oriented ? 0.0 : 1.0, 0.0, oriented);
  ctx.check("weights_average_to_one", unbiased ? 0.0 : 1.0, 0.0, unbiased);
}

void cmd_tails(Context& ctx) {
  const ModelParams p = parse_params(ctx.config, true);
  const Profile gamma = parse_profile(ctx.config, "initial");
  const auto kind = read<std::string>(ctx.config, "kind", "", std::string("mass"));
  const auto M = read<std::size_t>(ctx.config, "replicas", "", 100);
  const auto ns = read<std::vector<std::size_t>>(ctx.config, "ns", "", std::vector<std::size_t>{p.n});
  const auto lambdas = read<std::vector<double>>(ctx.config, "lambdas", "", std::vector<double>{0.05});
  std::vector<std::vector<double>> rows;
  double excess = -kInfinity;
  const auto track = [&](const TailRow& r) { excess = std::max(excess, r.frequency - r.bound - 4.0 * r.std_error); };
  if (kind == "mass" || kind == "current") {
    if (!(p.theta > 1.0)) config_fail("params.theta", "tail experiments need theta > 1");
    for (std::size_t n : ns) {
      ModelParams q = p;
      q.n = n;
      const Configuration init = deterministic_config(gamma, n);
      if (kind == "mass") {
        for (const auto& r : mass_tail_experiment(q, init, lambdas, M, ctx.seed, ctx.workers)) {
          track(r);
          rows.push_back({static_cast<double>(r.n), r.theta, r.lambda, static_cast<double>(r.hits),
                          static_cast<double>(r.replicas), r.frequency, r.std_error, r.bound});
        }
      } else {
        for (const auto& row : boundary_current_tail(q, init, lambdas, M, ctx.seed, ctx.workers)) {
          int side = 0;
          for (const TailRow* r : {&row.left, &row.right}) {
            track(*r);
            rows.push_back({static_cast<double>(r->n), r->theta, static_cast<double>(side++), r->lambda,
                            static_cast<double>(r->hits), static_cast<double>(r->replicas), r->frequency,
                            r->std_error, r->bound});
          }
        }
      }
    }
    if (kind == "mass") {
      io::write_csv(ctx.file("tails.csv"), {"n", "theta", "lambda", "hits", "replicas", "frequency", "stderr", "bound"}, rows);
    } else {
      io::write_csv(ctx.file("tails.csv"),
                    {"n", "theta", "side", "lambda", "hits", "replicas", "frequency", "stderr", "bound"}, rows);
    }
    ctx.check("frequency_below_poisson_bound", excess, 0.0, excess <= 0.0);
  } else if (kind == "replacement") {
    const double eps = read<double>(ctx.config, "eps", "", 0.1);
    const auto site_name = read<std::string>(ctx.config, "site", "", std::string("bulk"));
    ReplacementSite site;
    if (site_name == "bulk") site = ReplacementSite::Bulk;
    else if (site_name == "left") site = ReplacementSite::Left;
    else if (site_name == "right") site = ReplacementSite::Right;
    else config_fail("site", "must be bulk, left or right");
    Shape phi_shape(Shape::Kind::Cosine, {1.0});
    if (ctx.config.contains("phi")) phi_shape = parse_shape(ctx.config.at("phi"), "phi");
    const TestFunction phi = [phi_shape](double u) { return phi_shape.value(u); };
    for (std::size_t n : ns) {
      ModelParams q = p;
      q.n = n;
      try {
        box_size(n, eps);
      } catch (const Error&) {
        config_fail("eps", "box floor(eps n) is empty");
      }
      const ReplacementStats s = replacement_residual(q, eps, site, phi, gamma, M, ctx.seed, ctx.workers);
      rows.push_back({static_cast<double>(n), eps, s.mean_abs, s.std_error_abs, s.mean, s.std_error});
    }
    io::write_csv(ctx.file("tails.csv"), {"n", "eps", "mean_abs", "stderr_abs", "mean", "stderr"}, rows);
  } else {
    config_fail("kind", "must be mass, current or replacement");
  }
}

void cmd_oracle(Context& ctx) {
  const ModelParams p = parse_params(ctx.config, true);
  if (p.n - 1 > 12) config_fail("params.n", "oracle needs n-1 <= 12");
  const Profile gamma = parse_profile(ctx.config, "initial");
  const auto H = parse_tilt(ctx.config, p);
  std::optional<Tilt> tilt;
  if (H) tilt = Tilt::matching(*H, p.n);
  const auto M = read<std::size_t>(ctx.config, "replicas", "", 10000);
  const Configuration init = deterministic_config(gamma, p.n);
  const std::vector<double> exact = exact_law_small_n(p, tilt ? &*tilt : nullptr, init, p.horizon);
  const auto finals = run_replicas(M, ctx.workers, [&](std::size_t k) {
    SimulationOptions opt;
    opt.stream = k;
    opt.record_events = false;
    return state_index(simulate(p, init, tilt ? &*tilt : nullptr, {}, ctx.seed, opt).final_state);
  });
  std::vector<double> emp(exact.size(), 0.0);
  for (std::size_t s : finals) emp[s] += 1.0 / static_cast<double>(M);
  std::vector<std::vector<double>> rows;
  for (std::size_t s = 0; s < exact.size(); ++s) rows.push_back({static_cast<double>(s), exact[s], emp[s]});
  io::write_csv(ctx.file("oracle.csv"), {"state", "exact", "empirical"}, rows);
  const double tv = total_variation(exact, emp);
  const double tol = read<double>(ctx.config, "tv_tol", "",
                                  0.01 + std::sqrt(static_cast<double>(exact.size()) / static_cast<double>(M)));
  ctx.check("total_variation", tv, tol, tv <= tol);
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// FNV-1a of the canonical config text.
std::string run_id(const json& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return fmt::format("{:016x}", h);
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

int run(const json& document, const RunOptions& options, std::ostream& log) {
  Context ctx;
  ctx.log = &log;
  ctx.out = options.out;
  std::string command;
  try {
    if (!document.is_object()) config_fail("config", "must be a JSON object");
    ctx.config = document.contains("config") ? document.at("config") : document;
    if (options.seed) ctx.config["seed"] = *options.seed;
    if (options.workers) ctx.config["workers"] = *options.workers;
    ctx.seed = read<std::uint64_t>(ctx.config, "seed", "", 1);
    ctx.config["seed"] = ctx.seed;
    ctx.workers = read<std::size_t>(ctx.config, "workers", "", 1);
    if (ctx.workers == 0) config_fail("workers", "must be positive");
    command = read<std::string>(ctx.config, "command", "");
    fs::create_directories(ctx.out);

    if (command == "simulate") cmd_simulate(ctx);
    else if (command == "hydro") cmd_hydro(ctx);
    else if (command == "rate") cmd_rate(ctx);
    else if (command == "entropy") cmd_entropy(ctx);
    else if (command == "tails") cmd_tails(ctx);
    else if (command == "oracle") cmd_oracle(ctx);
    else config_fail("command", "unknown command '" + command + "'");
  } catch (const Error& e) {
    const bool numerical = is_numerical(e.code());
    log << (numerical ? "numerical error: " : "config error: ") << bare(e) << '\n';
    return numerical ? kNumericalError : kConfigError;
  } catch (const json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFailure;
  }

  const int code = ctx.ok ? kOk : kNumericalError;
  try {
    // The config is the only input; the timestamp lives in the manifest alone.
    json manifest = {{"config", ctx.config},     {"version", kVersion},   {"run_id", run_id(ctx.config)},
                     {"timestamp", timestamp()}, {"outputs", ctx.outputs}};
    json summary = {{"command", command}, {"invariants", ctx.invariants}, {"exit_code", code}};
    write_json(ctx.out / "summary.json", summary);
    write_json(ctx.out / "manifest.json", manifest);
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kFailure;
  }
  return code;
}

int run_file(const fs::path& path, const RunOptions& options, std::ostream& log) {
  std::ifstream in(path);
  if (!in) {
    log << "config error: cannot read " << path.string() << '\n';
    return kConfigError;
  }
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    log << "config error: " << path.string() << " is not valid JSON: " << e.what() << '\n';
    return kConfigError;
  }
  return run(doc, options, log);
}

}  // namespace epsb::app
