#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "superfact/dynamics.hpp"
#include "superfact/spec_json.hpp"
#include "superfact/verification.hpp"

#ifndef SUPERFACT_VERSION
#define SUPERFACT_VERSION "0.0.0"
#endif

namespace superfact::cli {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDefaultSeed = 42;
constexpr double kIndependenceThreshold = 0.99;

// Raw system flags as typed by the user.
struct SystemFlags {
  std::string config_path;
  std::string system;
  double omega = 1.0;
  std::string gamma = "1/1";
  std::optional<double> alpha;
  std::optional<double> beta;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "System config JSON file");
    app->add_option("--system", system, "euclidean | sphere | ttw");
    app->add_option("--omega", omega, "Frequency omega > 0")->capture_default_str();
    app->add_option("--gamma", gamma, "Rational gamma as m/n")->capture_default_str();
    app->add_option("--alpha", alpha, "TTW alpha");
    app->add_option("--beta", beta, "TTW beta");
  }

  SystemSpec resolve() const {
    if (!config_path.empty()) {
      if (!system.empty()) {
        throw ConfigError("give either --config or --system, not both");
      }
      std::ifstream in(config_path);
      if (!in) {
        throw ConfigError("cannot read config file '" + config_path + "'");
      }
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw ConfigError("config file is not valid JSON: " + std::string(e.what()));
      }
      return spec_from_json(j);
    }
    if (system.empty()) {
      throw ConfigError("--system or --config is required");
    }
    const Family family = parse_family(system);
    const RationalGamma g = RationalGamma::parse(gamma);
    switch (family) {
      case Family::euclidean:
      case Family::sphere:
        if (alpha || beta) {
          throw ConfigError("--alpha and --beta apply to ttw only");
        }
        return family == Family::euclidean ? SystemSpec::euclidean(omega, g)
                                           : SystemSpec::sphere(omega, g);
      case Family::ttw:
        if (!alpha || !beta) {
          throw ConfigError("ttw needs --alpha and --beta");
        }
        return SystemSpec::ttw(omega, g, *alpha, *beta);
    }
    throw ConfigError("unknown family");
  }
};

struct IntegratorFlags {
  std::optional<double> t_end;
  double periods = 10.0;
  IntegratorControls controls;
  std::string method = "dopri5";
  bool external_angle = false;

  void attach(CLI::App* app) {
    app->add_option("--t-end", t_end, "Final time (default: periods x characteristic period)");
    app->add_option("--periods", periods, "Run length in characteristic periods")->capture_default_str();
    app->add_option("--rel-tol", controls.rel_tol, "Relative tolerance")->capture_default_str();
    app->add_option("--abs-tol", controls.abs_tol, "Absolute tolerance")->capture_default_str();
    app->add_option("--max-step", controls.max_step, "Largest step")->capture_default_str();
    app->add_option("--sample-dt", controls.sample_dt, "Output spacing")->capture_default_str();
    app->add_option("--method", method, "dopri5 | implicit_midpoint")->capture_default_str();
    app->add_option("--margin", controls.margin, "Distance kept from singular surfaces")
        ->capture_default_str();
    app->add_flag("--external-angle", external_angle, "TTW: add a phi = theta/gamma column");
  }

  void resolve(const SystemSpec& spec, double& t_end_out, IntegratorControls& c) const {
    c = controls;
    c.method = parse_method(method);
    t_end_out = t_end ? *t_end : periods * characteristic_period(spec);
    if (!(t_end_out > 0.0) || !std::isfinite(t_end_out)) {
      throw ConfigError("t_end must be positive");
    }
  }
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag) {
  if (flag) {
    return *flag;
  }
  if (const char* env = std::getenv("SUPERFACT_SEED")) {
    const std::string_view text(env);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
      throw ConfigError("SUPERFACT_SEED must be a non-negative integer");
    }
    return v;
  }
  return kDefaultSeed;
}

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string part = text.substr(start, comma - start);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (part.empty() || ec != std::errc() || ptr != part.data() + part.size()) {
      throw ConfigError(std::string(what) + " must be a comma-separated list of numbers");
    }
    out.push_back(v);
    start = comma + 1;
  }
  if (out.size() != expected) {
    throw ConfigError(std::string(what) + " needs " + std::to_string(expected) + " values");
  }
  return out;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write '" + path + "'");
  }
  out << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// ----- JSON forms of the resolved configuration, used by manifests ---------

json controls_json(const IntegratorControls& c) {
  return {{"rel_tol", c.rel_tol},       {"abs_tol", c.abs_tol},
          {"max_step", c.max_step},     {"sample_dt", c.sample_dt},
          {"method", method_name(c.method)}, {"margin", c.margin}};
}

IntegratorControls controls_from_json(const json& j) {
  IntegratorControls c;
  c.rel_tol = j.at("rel_tol").get<double>();
  c.abs_tol = j.at("abs_tol").get<double>();
  c.max_step = j.at("max_step").get<double>();
  c.sample_dt = j.at("sample_dt").get<double>();
  c.method = parse_method(j.at("method").get<std::string>());
  c.margin = j.at("margin").get<double>();
  return c;
}

DomainBox box_from_json(const json& j) {
  DomainBox box;
  const auto& ranges = j.at("ranges");
  if (ranges.size() != 4) {
    throw ConfigError("box needs four ranges");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    box.ranges[i] = {ranges[i].at(0).get<double>(), ranges[i].at(1).get<double>()};
  }
  box.margin = j.at("margin").get<double>();
  return box;
}

json point_json(const PhasePoint& p) { return json::array({p.q1, p.q2, p.p1, p.p2}); }

PhasePoint point_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>(), j.at(3).get<double>()};
}

// ----- resolved commands ---------------------------------------------------

struct VerifyRun {
  SystemSpec spec;
  std::size_t samples;
  std::uint64_t seed;
  DomainBox box;
  std::size_t independence_samples;

  json to_json() const {
    return {{"system", superfact::to_json(spec)},
            {"samples", samples},
            {"seed", seed},
            {"box", superfact::to_json(box)},
            {"independence_samples", independence_samples}};
  }
  static VerifyRun from_json(const json& j) {
    return {spec_from_json(j.at("system")), j.at("samples").get<std::size_t>(),
            j.at("seed").get<std::uint64_t>(), box_from_json(j.at("box")),
            j.at("independence_samples").get<std::size_t>()};
  }
};

struct IntegrateRun {
  SystemSpec spec;
  PhasePoint external;
  double t_end;
  IntegratorControls controls;
  bool external_angle;

  json to_json() const {
    return {{"system", superfact::to_json(spec)},
            {"initial_external", point_json(external)},
            {"t_end", t_end},
            {"controls", controls_json(controls)},
            {"external_angle", external_angle}};
  }
  static IntegrateRun from_json(const json& j) {
    return {spec_from_json(j.at("system")), point_from_json(j.at("initial_external")),
            j.at("t_end").get<double>(), controls_from_json(j.at("controls")),
            j.at("external_angle").get<bool>()};
  }
};

enum class Plane { rtheta, xy };

struct TraceRun {
  SystemSpec spec;
  LevelTargets targets;
  Plane plane;
  double t_end;
  IntegratorControls controls;
  bool external_angle;

  json to_json() const {
    return {{"system", superfact::to_json(spec)},
            {"energy", targets.energy},
            {"second", targets.second},
            {"symmetry",
             {{"which", targets.symmetry == LevelTargets::Symmetry::x ? "X" : "Y"},
              {"value", targets.symmetry_value}}},
            {"plane", plane == Plane::xy ? "xy" : "rtheta"},
            {"t_end", t_end},
            {"controls", controls_json(controls)},
            {"external_angle", external_angle}};
  }
  static TraceRun from_json(const json& j) {
    LevelTargets t;
    t.energy = j.at("energy").get<double>();
    t.second = j.at("second").get<double>();
    t.symmetry = j.at("symmetry").at("which").get<std::string>() == "X" ? LevelTargets::Symmetry::x
                                                                        : LevelTargets::Symmetry::y;
    t.symmetry_value = j.at("symmetry").at("value").get<double>();
    return {spec_from_json(j.at("system")), t,
            j.at("plane").get<std::string>() == "xy" ? Plane::xy : Plane::rtheta,
            j.at("t_end").get<double>(), controls_from_json(j.at("controls")),
            j.at("external_angle").get<bool>()};
  }
};

struct ClosureRun {
  SystemSpec spec;
  PhasePoint external;
  double eps;
  double periods;
  IntegratorControls controls;

  json to_json() const {
    return {{"system", superfact::to_json(spec)},
            {"initial_external", point_json(external)},
            {"eps", eps},
            {"periods", periods},
            {"controls", controls_json(controls)}};
  }
  static ClosureRun from_json(const json& j) {
    return {spec_from_json(j.at("system")), point_from_json(j.at("initial_external")),
            j.at("eps").get<double>(), j.at("periods").get<double>(),
            controls_from_json(j.at("controls"))};
  }
};

struct IndependenceRun {
  SystemSpec spec;
  std::size_t samples;
  std::uint64_t seed;
  DomainBox box;

  json to_json() const {
    return {{"system", superfact::to_json(spec)},
            {"samples", samples},
            {"seed", seed},
            {"box", superfact::to_json(box)}};
  }
  static IndependenceRun from_json(const json& j) {
    return {spec_from_json(j.at("system")), j.at("samples").get<std::size_t>(),
            j.at("seed").get<std::uint64_t>(), box_from_json(j.at("box"))};
  }
};

// ----- manifest -------------------------------------------------------------

struct Manifest {
  Manifest(std::string command_, json config_, std::optional<std::uint64_t> seed_, std::string out_)
      : command(std::move(command_)), config(std::move(config_)), seed(seed_), out(std::move(out_)) {}

  std::string command;
  json config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string started_at = utc_now();
  json outputs = json::object();
  std::string status = "ok";
  json details = json::object();

  void write() const {
    json j{{"command", command},
           {"tool", "superfact"},
           {"version", SUPERFACT_VERSION},
           {"config", config},
           {"seed", seed ? json(*seed) : json()},
           {"started_at", started_at},
           {"finished_at", utc_now()},
           {"out", out},
           {"outputs", outputs},
           {"status", status}};
    if (!details.empty()) {
      j["details"] = details;
    }
    const std::string path = out + ".manifest.json";
    j["outputs"]["manifest"] = path;
    write_json(path, j);
  }
};

// ----- trajectory output -----------------------------------------------------

struct Projection {
  Plane plane;
  const SystemSpec* spec;

  std::string header() const { return plane == Plane::xy ? "x,y" : "r,theta"; }

  std::pair<double, double> operator()(const PhasePoint& p) const {
    const double g = spec->gamma().value();
    if (spec->family() == Family::ttw) {
      if (plane == Plane::rtheta) {
        return {p.q1, p.q2};
      }
      const double phi = p.q2 / g;
      return {p.q1 * std::cos(phi), p.q1 * std::sin(phi)};
    }
    const double x = p.q1 / g;
    const double y = p.q2;
    if (plane == Plane::xy) {
      return {x, y};
    }
    if (spec->family() == Family::sphere) {
      const auto polar = geodesic_polar(x, y);
      return {polar.r, polar.phi};
    }
    return {std::hypot(x, y), std::atan2(y, x)};
  }
};

std::string trajectory_csv(const Trajectory& traj, bool external_angle,
                           std::optional<Projection> projection) {
  const bool phi = external_angle && traj.spec.family() == Family::ttw;
  const double g = traj.spec.gamma().value();
  std::ostringstream os;
  os << "t,q1,q2,p1,p2,H,I2,X,Y";
  if (phi) os << ",phi";
  if (projection) os << "," << projection->header();
  os << "\n";
  for (const auto& s : traj.samples) {
    const double cols[] = {s.t, s.point.q1, s.point.q2, s.point.p1, s.point.p2,
                           s.energy, s.second, s.x, s.y};
    bool first = true;
    for (double v : cols) {
      os << (first ? "" : ",") << fmt17(v);
      first = false;
    }
    if (phi) os << "," << fmt17(s.point.q2 / g);
    if (projection) {
      const auto [u, v] = (*projection)(s.point);
      os << "," << fmt17(u) << "," << fmt17(v);
    }
    os << "\n";
  }
  return os.str();
}

json drift_json(const Trajectory& traj) {
  json q = json::object();
  if (traj.samples.empty()) {
    return q;
  }
  for (const auto& d : drift_report(traj).quantities) {
    q[d.name] = {{"max_abs", d.max_abs}, {"relative", d.relative}};
  }
  return q;
}

// Runs an integration from an internal point and writes CSV, report and
// manifest. Shared by integrate and trace.
int integrate_and_write(const SystemSpec& spec, const PhasePoint& internal, double t_end,
                        const IntegratorControls& controls, bool external_angle,
                        std::optional<Projection> projection, Manifest& manifest, json report,
                        std::ostream& out, std::ostream& err) {
  const std::string csv_path = manifest.out + ".csv";
  const std::string report_path = manifest.out + ".report.json";
  manifest.outputs = {{"csv", csv_path}, {"report", report_path}};
  int code = kExitOk;
  std::optional<Trajectory> result;
  try {
    result = integrate(spec, internal, t_end, controls);
  } catch (const DomainBreach& e) {
    result = e.partial();
    manifest.status = "domain_breach";
    manifest.details = {{"reason", e.what()}, {"time", e.time()}, {"last_good", point_json(e.last_good())}};
    err << e.what() << "\n";
    code = kExitBreach;
  } catch (const StepFailure& e) {
    result = e.partial();
    manifest.status = "step_failure";
    manifest.details = {{"reason", e.what()}};
    err << "step failure: " << e.what() << "\n";
    code = kExitStepFailure;
  }
  const Trajectory& traj = *result;
  write_text(csv_path, trajectory_csv(traj, external_angle, projection));
  report["samples"] = traj.samples.size();
  report["status"] = manifest.status;
  report["drift"] = drift_json(traj);
  write_json(report_path, report);
  manifest.write();
  out << "wrote " << csv_path << " (" << traj.samples.size() << " samples)\n";
  return code;
}

// ----- commands --------------------------------------------------------------

int exec_verify(const VerifyRun& run, const std::string& out_prefix, std::ostream& out) {
  Manifest manifest("verify", run.to_json(), run.seed, out_prefix);
  const auto points = sample_points(run.spec, run.box, run.samples, run.seed);
  const BracketReport report = run_suite(run.spec, identity_suite(run.spec), points, run.seed, run.box);
  json j = to_json(report);

  const std::size_t k = std::min(run.independence_samples, points.size());
  const std::vector<PhasePoint> subset(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(k));
  json independence = json::array();
  bool independent = true;
  for (auto which : {ThirdIntegral::x, ThirdIntegral::y}) {
    const auto stats = independence_report(run.spec, subset, which);
    json s = to_json(stats);
    s["threshold"] = kIndependenceThreshold;
    s["pass"] = stats.fraction_full() >= kIndependenceThreshold;
    independent = independent && s["pass"].get<bool>();
    independence.push_back(std::move(s));
  }
  j["independence"] = independence;
  const bool pass = report.pass() && independent;
  j["summary"]["independence_pass"] = independent;
  j["summary"]["pass"] = pass;

  const std::string report_path = out_prefix + ".report.json";
  write_json(report_path, j);
  manifest.outputs = {{"report", report_path}};
  manifest.status = pass ? "ok" : "identity_failure";
  manifest.write();

  for (const auto& r : report.identities) {
    if (!r.pass) {
      out << "FAIL " << r.label << " max_residual=" << r.max_residual << " tol=" << r.tolerance
          << (r.first_error.empty() ? "" : " error=" + r.first_error) << "\n";
    }
  }
  out << run.spec.describe() << ": " << report.identities.size() << " identities on "
      << points.size() << " points, " << (pass ? "all pass" : "FAILED") << "\n";
  return pass ? kExitOk : kExitFailure;
}

int exec_integrate(const IntegrateRun& run, const std::string& out_prefix, std::ostream& out,
                   std::ostream& err) {
  Manifest manifest("integrate", run.to_json(), std::nullopt, out_prefix);
  const PhasePoint internal = to_internal(run.spec, run.external);
  json report{{"spec", run.spec.describe()}, {"initial_internal", point_json(internal)},
              {"t_end", run.t_end}};
  return integrate_and_write(run.spec, internal, run.t_end, run.controls, run.external_angle,
                             std::nullopt, manifest, std::move(report), out, err);
}

int exec_trace(const TraceRun& run, const std::string& out_prefix, std::ostream& out,
               std::ostream& err) {
  Manifest manifest("trace", run.to_json(), std::nullopt, out_prefix);
  PhasePoint start;
  try {
    start = find_level_point(run.spec, run.targets);
  } catch (const NoSolution& e) {
    manifest.status = "no_solution";
    manifest.details = {{"reason", e.what()}};
    manifest.write();
    err << "trace: " << e.what() << "\n";
    return kExitNoSolution;
  }
  json report{{"spec", run.spec.describe()},
              {"initial_internal", point_json(start)},
              {"initial_external", point_json(to_external(run.spec, start))},
              {"t_end", run.t_end}};
  return integrate_and_write(run.spec, start, run.t_end, run.controls, run.external_angle,
                             Projection{run.plane, &run.spec}, manifest, std::move(report), out, err);
}

int exec_closure(const ClosureRun& run, const std::string& out_prefix, std::ostream& out,
                 std::ostream& err) {
  Manifest manifest("closure", run.to_json(), std::nullopt, out_prefix);
  const std::string report_path = out_prefix + ".report.json";
  manifest.outputs = {{"report", report_path}};
  const PhasePoint internal = to_internal(run.spec, run.external);
  const double t_end = run.periods * characteristic_period(run.spec);
  json report{{"spec", run.spec.describe()}, {"eps", run.eps}, {"t_end", t_end}};
  int code = kExitOk;
  try {
    const Trajectory traj = integrate(run.spec, internal, t_end, run.controls);
    const ClosureResult c = detect_closure(traj, run.eps);
    report["closed"] = c.closed;
    report["period"] = c.period ? json(*c.period) : json();
    report["periods_in_characteristic"] =
        c.period ? json(*c.period / characteristic_period(run.spec)) : json();
    report["return_distance"] = c.return_distance;
    out << (c.closed ? "closed" : "not closed") << ", return distance " << c.return_distance << "\n";
    code = c.closed ? kExitOk : kExitFailure;
  } catch (const DomainBreach& e) {
    manifest.status = "domain_breach";
    report["error"] = e.what();
    err << "domain breach: " << e.what() << "\n";
    code = kExitBreach;
  } catch (const StepFailure& e) {
    manifest.status = "step_failure";
    report["error"] = e.what();
    err << "step failure: " << e.what() << "\n";
    code = kExitStepFailure;
  } catch (const InsufficientSpan& e) {
    manifest.status = "insufficient_span";
    report["error"] = e.what();
    err << e.what() << "\n";
    code = kExitFailure;
  }
  report["status"] = manifest.status;
  write_json(report_path, report);
  manifest.write();
  return code;
}

int exec_independence(const IndependenceRun& run, const std::string& out_prefix, std::ostream& out) {
  Manifest manifest("independence", run.to_json(), run.seed, out_prefix);
  const auto points = sample_points(run.spec, run.box, run.samples, run.seed);
  json triples = json::array();
  bool pass = true;
  for (auto which : {ThirdIntegral::x, ThirdIntegral::y}) {
    const auto stats = independence_report(run.spec, points, which);
    json s = to_json(stats);
    s["pass"] = stats.fraction_full() >= kIndependenceThreshold;
    pass = pass && s["pass"].get<bool>();
    out << stats.triple << ": rank 3 at " << stats.full_rank << "/" << stats.points << " points\n";
    triples.push_back(std::move(s));
  }
  const std::string report_path = out_prefix + ".report.json";
  write_json(report_path, {{"spec", run.spec.describe()},
                           {"seed", run.seed},
                           {"threshold", kIndependenceThreshold},
                           {"triples", triples},
                           {"summary", {{"pass", pass}}}});
  manifest.outputs = {{"report", report_path}};
  manifest.status = pass ? "ok" : "dependent";
  manifest.write();
  return pass ? kExitOk : kExitFailure;
}

json catalog_json() {
  json families = json::array();
  families.push_back(
      {{"family", "euclidean"},
       {"parameters", {{"omega", "> 0"}, {"gamma", "m/n > 0"}}},
       {"coordinates", "(x, y, p_x, p_y); internal xi = gamma x"},
       {"domain", "all of R^4"},
       {"special_cases", {"gamma = 1: isotropic 1:1 oscillator", "gamma = 2: 2:1 oscillator"}}});
  families.push_back(
      {{"family", "sphere"},
       {"parameters", {{"omega", "> 0"}, {"gamma", "m/n >= 1/2"}}},
       {"coordinates", "geodesic parallel (x, y, p_x, p_y); internal xi = gamma x"},
       {"domain", "|gamma x| < pi/2, |y| < pi/2"},
       {"special_cases", {"gamma = 1: Higgs oscillator, V = (omega^2/2) tan^2 r",
                          "gamma = 2: 2:1 oscillator on the sphere"}}});
  families.push_back(
      {{"family", "ttw"},
       {"parameters", {{"omega", "> 0"}, {"gamma", "m/n >= 1/4"}, {"alpha", "real"}, {"beta", "real"}}},
       {"coordinates", "polar (r, phi, p_r, p_phi); internal theta = gamma phi"},
       {"domain", "r > 0, 0 < gamma phi < pi/2"},
       {"special_cases", json::array()}});
  return {{"families", families},
          {"config_schema",
           {{"family", "euclidean | sphere | ttw"},
            {"omega", "number"},
            {"gamma", {{"m", "integer"}, {"n", "integer"}}},
            {"alpha", "number (ttw only)"},
            {"beta", "number (ttw only)"}}},
          {"default_margin", kDefaultMargin}};
}

void print_catalog(const json& cat, const std::string& only, std::ostream& out) {
  for (const auto& f : cat["families"]) {
    if (!only.empty() && f["family"] != only) {
      continue;
    }
    out << f["family"].get<std::string>() << "\n";
    out << "  parameters:";
    for (const auto& [k, v] : f["parameters"].items()) {
      out << " " << k << " " << v.get<std::string>() << ";";
    }
    out << "\n  coordinates: " << f["coordinates"].get<std::string>() << "\n";
    out << "  domain: " << f["domain"].get<std::string>() << "\n";
    for (const auto& s : f["special_cases"]) {
      out << "  special case: " << s.get<std::string>() << "\n";
    }
  }
}

DomainBox parse_box(const std::optional<std::string>& text, const SystemSpec& spec, double margin) {
  DomainBox box = default_box(spec, margin);
  if (text) {
    const auto v = parse_list(*text, 8, "--box");
    for (std::size_t i = 0; i < 4; ++i) {
      box.ranges[i] = {v[2 * i], v[2 * i + 1]};
    }
  }
  return box;
}

PhasePoint parse_initial(const std::string& q0, const std::string& p0) {
  const auto q = parse_list(q0, 2, "--q0");
  const auto p = parse_list(p0, 2, "--p0");
  return {q[0], q[1], p[0], p[1]};
}

LevelTargets parse_targets(double energy, double second, const std::string& symmetry) {
  LevelTargets t;
  t.energy = energy;
  t.second = second;
  const auto eq = symmetry.find('=');
  if (eq == std::string::npos || (symmetry.substr(0, eq) != "X" && symmetry.substr(0, eq) != "Y")) {
    throw ConfigError("--symmetry must be X=value or Y=value");
  }
  t.symmetry = symmetry[0] == 'X' ? LevelTargets::Symmetry::x : LevelTargets::Symmetry::y;
  t.symmetry_value = parse_list(symmetry.substr(eq + 1), 1, "--symmetry value")[0];
  return t;
}

Plane parse_plane(const std::string& s) {
  if (s == "rtheta") return Plane::rtheta;
  if (s == "xy") return Plane::xy;
  throw ConfigError("--plane must be rtheta or xy");
}

int replay(const std::string& manifest_path, const std::optional<std::string>& out_override,
           std::ostream& out, std::ostream& err) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw ConfigError("cannot read manifest '" + manifest_path + "'");
  }
  json m;
  try {
    in >> m;
  } catch (const json::exception& e) {
    throw ConfigError("manifest is not valid JSON: " + std::string(e.what()));
  }
  const std::string command = m.at("command").get<std::string>();
  const std::string prefix = out_override ? *out_override : m.at("out").get<std::string>();
  const json& c = m.at("config");
  if (command == "verify") return exec_verify(VerifyRun::from_json(c), prefix, out);
  if (command == "integrate") return exec_integrate(IntegrateRun::from_json(c), prefix, out, err);
  if (command == "trace") return exec_trace(TraceRun::from_json(c), prefix, out, err);
  if (command == "closure") return exec_closure(ClosureRun::from_json(c), prefix, out, err);
  if (command == "independence") return exec_independence(IndependenceRun::from_json(c), prefix, out);
  throw ConfigError("manifest names unknown command '" + command + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superintegrable oscillators: factorization integrals, verification and trajectories",
               "superfact"};
  app.require_subcommand(1);
  app.set_version_flag("--version", SUPERFACT_VERSION);

  // catalog
  auto* catalog = app.add_subcommand("catalog", "List the system families and their domains");
  std::string catalog_family;
  bool catalog_as_json = false;
  catalog->add_option("--family", catalog_family, "Show one family");
  catalog->add_flag("--json", catalog_as_json, "Machine-readable output");

  // verify
  auto* verify = app.add_subcommand("verify", "Certify every identity on random points");
  SystemFlags verify_sys;
  verify_sys.attach(verify);
  std::size_t verify_samples = 1000;
  std::size_t verify_independence = 200;
  std::optional<std::uint64_t> verify_seed;
  double verify_margin = kDefaultMargin;
  std::optional<std::string> verify_box;
  std::string verify_out = "verify";
  verify->add_option("--samples", verify_samples, "Number of points")->capture_default_str();
  verify->add_option("--independence-samples", verify_independence, "Points for the rank check")
      ->capture_default_str();
  verify->add_option("--seed", verify_seed, "Sampler seed (fallback: SUPERFACT_SEED)");
  verify->add_option("--margin", verify_margin, "Distance kept from singular surfaces")
      ->capture_default_str();
  verify->add_option("--box", verify_box, "q1lo,q1hi,q2lo,q2hi,p1lo,p1hi,p2lo,p2hi");
  verify->add_option("--out", verify_out, "Output prefix")->capture_default_str();

  // integrate
  auto* integ = app.add_subcommand("integrate", "Integrate one trajectory and export CSV");
  SystemFlags integ_sys;
  integ_sys.attach(integ);
  IntegratorFlags integ_flags;
  integ_flags.attach(integ);
  std::string integ_q0;
  std::string integ_p0;
  std::string integ_out = "integrate";
  integ->add_option("--q0", integ_q0, "Initial position a,b (external coordinates)")->required();
  integ->add_option("--p0", integ_p0, "Initial momentum c,d (external coordinates)")->required();
  integ->add_option("--out", integ_out, "Output prefix")->capture_default_str();

  // trace
  auto* trace = app.add_subcommand("trace", "Find a point on prescribed levels and integrate");
  SystemFlags trace_sys;
  trace_sys.attach(trace);
  IntegratorFlags trace_flags;
  trace_flags.attach(trace);
  double trace_energy = 0.0;
  double trace_second = 0.0;
  std::string trace_symmetry;
  std::string trace_plane = "rtheta";
  std::string trace_out = "trace";
  trace->add_option("--energy", trace_energy, "Energy level")->required();
  trace->add_option("--second", trace_second, "Second integral level")->required();
  trace->add_option("--symmetry", trace_symmetry, "X=value or Y=value")->required();
  trace->add_option("--plane", trace_plane, "rtheta | xy")->capture_default_str();
  trace->add_option("--out", trace_out, "Output prefix")->capture_default_str();

  // closure
  auto* closure = app.add_subcommand("closure", "Integrate and test for a closed orbit");
  SystemFlags closure_sys;
  closure_sys.attach(closure);
  IntegratorFlags closure_flags;
  closure_flags.periods = 30.0;
  closure_flags.attach(closure);
  std::string closure_q0;
  std::string closure_p0;
  double closure_eps = 1e-4;
  std::string closure_out = "closure";
  closure->add_option("--q0", closure_q0, "Initial position a,b (external coordinates)")->required();
  closure->add_option("--p0", closure_p0, "Initial momentum c,d (external coordinates)")->required();
  closure->add_option("--eps", closure_eps, "Return distance threshold")->capture_default_str();
  closure->add_option("--out", closure_out, "Output prefix")->capture_default_str();

  // independence
  auto* indep = app.add_subcommand("independence", "Jacobian rank of (H, I2, X) and (H, I2, Y)");
  SystemFlags indep_sys;
  indep_sys.attach(indep);
  std::size_t indep_samples = 200;
  std::optional<std::uint64_t> indep_seed;
  double indep_margin = kDefaultMargin;
  std::optional<std::string> indep_box;
  std::string indep_out = "independence";
  indep->add_option("--samples", indep_samples, "Number of points")->capture_default_str();
  indep->add_option("--seed", indep_seed, "Sampler seed (fallback: SUPERFACT_SEED)");
  indep->add_option("--margin", indep_margin, "Distance kept from singular surfaces")
      ->capture_default_str();
  indep->add_option("--box", indep_box, "q1lo,q1hi,q2lo,q2hi,p1lo,p1hi,p2lo,p2hi");
  indep->add_option("--out", indep_out, "Output prefix")->capture_default_str();

  // replay
  auto* rep = app.add_subcommand("replay", "Re-run a command from its manifest");
  std::string replay_manifest;
  std::optional<std::string> replay_out;
  rep->add_option("manifest", replay_manifest, "Manifest JSON")->required();
  rep->add_option("--out", replay_out, "Output prefix (default: the manifest's)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << SUPERFACT_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  }

  try {
    if (catalog->parsed()) {
      const json cat = catalog_json();
      if (!catalog_family.empty()) {
        parse_family(catalog_family);
      }
      if (catalog_as_json) {
        json shown = cat;
        if (!catalog_family.empty()) {
          shown["families"] = json::array();
          for (const auto& f : cat["families"]) {
            if (f["family"] == catalog_family) shown["families"].push_back(f);
          }
        }
        out << shown.dump(2) << "\n";
      } else {
        print_catalog(cat, catalog_family, out);
      }
      return kExitOk;
    }
    if (verify->parsed()) {
      const SystemSpec spec = verify_sys.resolve();
      if (verify_samples == 0) {
        throw ConfigError("--samples must be positive");
      }
      const VerifyRun r{spec, verify_samples, resolve_seed(verify_seed),
                        parse_box(verify_box, spec, verify_margin), verify_independence};
      return exec_verify(r, verify_out, out);
    }
    if (integ->parsed()) {
      const SystemSpec spec = integ_sys.resolve();
      IntegrateRun r{spec, parse_initial(integ_q0, integ_p0), 0.0, {}, integ_flags.external_angle};
      integ_flags.resolve(spec, r.t_end, r.controls);
      return exec_integrate(r, integ_out, out, err);
    }
    if (trace->parsed()) {
      const SystemSpec spec = trace_sys.resolve();
      TraceRun r{spec, parse_targets(trace_energy, trace_second, trace_symmetry),
                 parse_plane(trace_plane), 0.0, {}, trace_flags.external_angle};
      trace_flags.resolve(spec, r.t_end, r.controls);
      return exec_trace(r, trace_out, out, err);
    }
    if (closure->parsed()) {
      const SystemSpec spec = closure_sys.resolve();
      ClosureRun r{spec, parse_initial(closure_q0, closure_p0), closure_eps, closure_flags.periods, {}};
      double unused = 0.0;
      closure_flags.resolve(spec, unused, r.controls);
      if (closure_flags.t_end) {
        r.periods = *closure_flags.t_end / characteristic_period(spec);
      }
      return exec_closure(r, closure_out, out, err);
    }
    if (indep->parsed()) {
      const SystemSpec spec = indep_sys.resolve();
      if (indep_samples == 0) {
        throw ConfigError("--samples must be positive");
      }
      const IndependenceRun r{spec, indep_samples, resolve_seed(indep_seed),
                              parse_box(indep_box, spec, indep_margin)};
      return exec_independence(r, indep_out, out);
    }
    if (rep->parsed()) {
      return replay(replay_manifest, replay_out, out, err);
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const PreconditionError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid point: " << e.what() << "\n";
    return kExitConfig;
  } catch (const json::exception& e) {
    err << "malformed manifest: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}

}  // namespace superfact::cli
