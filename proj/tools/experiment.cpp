#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>

#include "dforms/coform.hpp"
#include "dforms/fixtures.hpp"
#include "dforms/surface.hpp"

namespace dforms::cli {

namespace {

using io::ConfigError;

const std::vector<std::string> kKinds = {"algebra-check", "adjoint-check", "layer-converge",
                                         "boundary-pairing", "stokes-check"};

struct Setup {
  std::string kind;
  int dim = 0;
  std::uint64_t seed = 42;
  std::shared_ptr<DifferentiableMeasure> measure;
  std::unique_ptr<Domain> domain;
  IntegrationSpec spec;
  LayerOptions layer;
  std::map<std::string, FormField> fixtures;
  json expected = json::object();
  json params = json::object();
};

int get_int(const json& c, const std::string& key, int fallback, int lo) {
  if (!c.contains(key)) return fallback;
  if (!c[key].is_number_integer()) throw ConfigError(key, "expected an integer");
  const int v = c[key].get<int>();
  if (v < lo) throw ConfigError(key, "must be >= " + std::to_string(lo));
  return v;
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  const std::string w = where.empty() ? key : where + "." + key;
  if (!j.contains(key)) throw ConfigError(w, "missing field");
  if (!j[key].is_number()) throw ConfigError(w, "expected a number");
  return j[key].get<double>();
}

const FormField& fixture(const Setup& s, const std::string& name) { return s.fixtures.at(name); }

void load_fixture(Setup& s, const json& c, const std::string& name, std::optional<int> degree) {
  if (!c.contains("fixtures") || !c["fixtures"].is_object())
    throw ConfigError("fixtures", "missing object");
  const json& fx = c["fixtures"];
  const std::string where = "fixtures." + name;
  if (!fx.contains(name)) throw ConfigError(where, "missing fixture");
  FormField f = io::form_from_json(fx[name], where);
  if (f.dim() != s.dim)
    throw ConfigError(where, "fixture '" + name + "' has dim " + std::to_string(f.dim()) +
                                 " but the experiment uses dim " + std::to_string(s.dim));
  if (degree && f.degree() != *degree)
    throw ConfigError(where, "fixture '" + name + "' has degree " + std::to_string(f.degree()) +
                                 ", expected " + std::to_string(*degree));
  s.fixtures.emplace(name, std::move(f));
}

void load_layer(Setup& s, const json& c) {
  if (!c.contains("domain")) throw ConfigError("domain", "missing field");
  s.domain = io::domain_from_json(c["domain"], s.dim, "domain");
  s.layer.spec = s.spec;
  if (c.contains("schedule")) {
    if (!c["schedule"].is_array()) throw ConfigError("schedule", "expected an array of numbers");
    s.layer.schedule.clear();
    for (std::size_t i = 0; i < c["schedule"].size(); ++i) {
      if (!c["schedule"][i].is_number())
        throw ConfigError("schedule[" + std::to_string(i) + "]", "expected a number");
      s.layer.schedule.push_back(c["schedule"][i].get<double>());
    }
  }
  if (c.contains("rolloff")) {
    const json& r = c["rolloff"];
    if (r == "linear") s.layer.rolloff = RollOff::linear;
    else if (r == "quintic") s.layer.rolloff = RollOff::quintic;
    else throw ConfigError("rolloff", "expected \"linear\" or \"quintic\"");
  }
  if (c.contains("tolerance")) s.layer.tolerance = get_number(c, "tolerance", "");
  try {
    validate_schedule(s.layer.schedule, *s.domain, s.layer.rolloff);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("schedule", e.what());
  }
}

Setup parse(const json& c) {
  if (!c.is_object()) throw ConfigError("", "configuration must be a JSON object");
  Setup s;
  if (!c.contains("experiment") || !c["experiment"].is_string())
    throw ConfigError("experiment", "missing or not a string");
  s.kind = c["experiment"].get<std::string>();
  if (std::find(kKinds.begin(), kKinds.end(), s.kind) == kKinds.end())
    throw ConfigError("experiment", "unknown experiment '" + s.kind + "'");
  if (c.contains("seed")) {
    if (!c["seed"].is_number_unsigned()) throw ConfigError("seed", "expected an unsigned integer");
    s.seed = c["seed"].get<std::uint64_t>();
  }
  if (c.contains("expected")) {
    if (!c["expected"].is_object()) throw ConfigError("expected", "expected an object");
    s.expected = c["expected"];
  }

  if (s.kind == "algebra-check") {
    s.params["trials"] = get_int(c, "trials", 1000, 1);
    s.params["dim"] = get_int(c, "dim", 8, 1);
    s.params["max_degree"] = get_int(c, "max_degree", 3, 0);
    s.params["nnz"] = get_int(c, "nnz", 6, 1);
    if (s.params["max_degree"].get<int>() > s.params["dim"].get<int>())
      throw ConfigError("max_degree", "must not exceed dim");
    return s;
  }

  s.dim = get_int(c, "dim", 0, 1);
  if (s.dim == 0) throw ConfigError("dim", "missing field");
  if (c.contains("measure")) s.measure = io::measure_from_json(c["measure"], "measure");
  else s.measure = std::make_shared<GaussianProduct>(GaussianProduct::standard(s.dim));
  if (s.measure->dim() != s.dim)
    throw ConfigError("measure.dim", "differs from the experiment dim " + std::to_string(s.dim));
  if (c.contains("integration")) s.spec = io::integration_from_json(c["integration"], "integration");
  s.spec.seed = c.contains("integration") && c["integration"].contains("seed") ? s.spec.seed : s.seed;

  if (s.kind == "adjoint-check") {
    load_fixture(s, c, "omega", std::nullopt);
    load_fixture(s, c, "f", fixture(s, "omega").degree() + 1);
  } else if (s.kind == "layer-converge") {
    load_layer(s, c);
  } else if (s.kind == "boundary-pairing") {
    load_layer(s, c);
    load_fixture(s, c, "g", 1);
  } else if (s.kind == "stokes-check") {
    load_layer(s, c);
    load_fixture(s, c, "omega", 1);
  }
  return s;
}

json estimate_json(const Estimate& e) { return {{"value", e.value}, {"stderr", e.std_error}}; }

json trace_json(const ConvergenceTrace& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    json row = {{"epsilon", r.epsilon}, {"estimate", r.estimate.value}, {"stderr", r.estimate.std_error}};
    if (r.extrapolated) {
      row["extrapolated"] = r.extrapolated->value;
      row["extrapolated_stderr"] = r.extrapolated->std_error;
    } else {
      row["extrapolated"] = nullptr;
    }
    rows.push_back(row);
  }
  return {{"rows", rows}, {"limit", estimate_json(t.limit)}};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// Optional comparison of a computed limit with a configured reference value.
void expect_limit(const Setup& s, Outcome& o, const std::string& name, const Estimate& got) {
  if (!s.expected.contains("limit")) return;
  const double want = get_number(s.expected, "limit", "expected");
  const double tol = s.expected.contains("limit_tolerance")
                         ? get_number(s.expected, "limit_tolerance", "expected")
                         : s.layer.effective_tolerance();
  const double err = std::abs(got.value - want);
  o.criteria.push_back({name + "_matches_expected", err <= tol,
                        {{"value", got.value}, {"expected", want}, {"error", err}, {"tolerance", tol}}});
}

Outcome run_algebra(const Setup& s) {
  const int trials = s.params["trials"];
  const int dim = s.params["dim"];
  const int max_deg = s.params["max_degree"];
  const int nnz = s.params["nnz"];
  fixtures::Rng rng(s.seed);

  double adj = 0.0, anti = 0.0, assoc = 0.0;
  int wedge_viol = 0, contract_viol = 0;
  for (int t = 0; t < trials; ++t) {
    const int m = rng.integer(0, max_deg);
    const int n = rng.integer(0, m);
    const AltTensor f = fixtures::random_tensor(rng, m, dim, nnz);
    const AltTensor g = fixtures::random_tensor(rng, n, dim, nnz);
    const AltTensor h = fixtures::random_tensor(rng, m - n, dim, nnz);
    const double scale = hs_norm(f) * hs_norm(g) * hs_norm(h);
    if (scale > 0.0) adj = std::max(adj, std::abs(inner(contract(g, f), h) - inner(f, wedge(g, h))) / scale);

    const AltTensor gh = wedge(g, h);
    const double lw = hs_norm(gh) * hs_norm(gh);
    const double rw = binomial(m, n) * hs_norm(g) * hs_norm(g) * hs_norm(h) * hs_norm(h);
    if (lw > rw * (1.0 + 1e-12)) ++wedge_viol;
    const AltTensor gf = contract(g, f);
    const double lc = hs_norm(gf) * hs_norm(gf);
    const double rc = binomial(m, n) * hs_norm(g) * hs_norm(g) * hs_norm(f) * hs_norm(f);
    if (lc > rc * (1.0 + 1e-12)) ++contract_viol;

    const double sign = ((n * (m - n)) % 2) ? -1.0 : 1.0;
    const double s2 = hs_norm(g) * hs_norm(h);
    if (s2 > 0.0) anti = std::max(anti, (gh - sign * wedge(h, g)).max_abs() / s2);
    if (m + m - n <= dim && scale > 0.0)
      assoc = std::max(assoc, (wedge(wedge(g, h), f) - wedge(g, wedge(h, f))).max_abs() / scale);
  }

  Outcome o;
  o.results = {{"trials", trials},
               {"max_adjunction_rel_error", adj},
               {"max_anticommutativity_rel_error", anti},
               {"max_associativity_rel_error", assoc},
               {"wedge_bound_violations", wedge_viol},
               {"contraction_bound_violations", contract_viol}};
  o.criteria.push_back({"adjunction", adj <= 1e-12, {{"max_rel_error", adj}, {"tolerance", 1e-12}}});
  o.criteria.push_back({"wedge_norm_bound", wedge_viol == 0, {{"violations", wedge_viol}}});
  o.criteria.push_back({"contraction_norm_bound", contract_viol == 0, {{"violations", contract_viol}}});
  o.criteria.push_back({"anticommutativity", anti <= 1e-12, {{"max_rel_error", anti}}});
  o.criteria.push_back({"associativity", assoc <= 1e-12, {{"max_rel_error", assoc}}});
  o.summary.push_back(std::to_string(trials) + " trials, max adjunction error " + fmt(adj));
  return o;
}

Outcome run_adjoint(const Setup& s) {
  const AdjointReport r = adjoint_check(fixture(s, "omega"), fixture(s, "f"), *s.measure, s.spec);
  Outcome o;
  o.results = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"gap", r.gap}, {"stderr", r.std_error},
               {"tolerance", r.tolerance}, {"pass", r.pass}};
  o.criteria.push_back({"adjoint_identity", r.pass, {{"gap", r.gap}, {"tolerance", r.tolerance}}});
  o.summary.push_back("lhs " + fmt(r.lhs) + ", rhs " + fmt(r.rhs) + ", gap " + fmt(r.gap));
  return o;
}

Outcome run_layer(const Setup& s) {
  const BoundaryPredicate all = [](std::span<const double>) { return true; };
  const ConvergenceTrace t = surface_measure(*s.domain, all, *s.measure, s.layer);
  Outcome o;
  o.results = {{"domain", s.domain->describe()}, {"trace", trace_json(t)}};
  o.traces.push_back({"trace.csv", trace_csv(o.results["trace"]["rows"])});
  o.summary.push_back("surface measure limit " + fmt(t.limit.value));

  // successive extrapolations settle
  if (t.rows.size() >= 3) {
    const double a = t.rows[t.rows.size() - 2].extrapolated->value;
    const double b = t.rows.back().extrapolated->value;
    const double tol = s.layer.effective_tolerance();
    o.criteria.push_back({"extrapolation_settles", std::abs(a - b) <= tol,
                          {{"difference", std::abs(a - b)}, {"tolerance", tol}}});
  }
  expect_limit(s, o, "limit", t.limit);
  if (s.expected.contains("at_epsilon")) {
    const json& list = s.expected["at_epsilon"];
    if (!list.is_array()) throw ConfigError("expected.at_epsilon", "expected an array");
    json values = json::array();
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string w = "expected.at_epsilon[" + std::to_string(i) + "]";
      const double eps = get_number(list[i], "epsilon", w);
      const double want = get_number(list[i], "value", w);
      const double tol = get_number(list[i], "tolerance", w);
      const Estimate got = layer_measure(*s.domain, all, eps, *s.measure, s.spec);
      const double err = std::abs(got.value - want);
      values.push_back({{"epsilon", eps}, {"value", got.value}, {"stderr", got.std_error}});
      o.criteria.push_back({"layer_at_" + fmt(eps), err <= tol,
                            {{"value", got.value}, {"expected", want}, {"error", err}, {"tolerance", tol}}});
    }
    o.results["at_epsilon"] = values;
  }
  return o;
}

Outcome run_pairing(const Setup& s) {
  const BoundaryPairingReport r = boundary_pairing(*s.domain, *s.measure, fixture(s, "g"), s.layer);
  Outcome o;
  o.results = {{"domain", s.domain->describe()},
               {"lhs", trace_json(r.lhs)},
               {"rhs", trace_json(r.rhs)},
               {"gap", estimate_json(r.gap)},
               {"tolerance", r.tolerance}};
  o.traces.push_back({"trace.csv", trace_csv(o.results["lhs"]["rows"])});
  o.traces.push_back({"trace_rhs.csv", trace_csv(o.results["rhs"]["rows"])});
  o.criteria.push_back({"pairing_gap", r.pass, {{"gap", r.gap.value}, {"tolerance", r.tolerance}}});
  expect_limit(s, o, "lhs", r.lhs.limit);
  o.summary.push_back("lhs " + fmt(r.lhs.limit.value) + ", rhs " + fmt(r.rhs.limit.value) + ", gap " +
                      fmt(r.gap.value));
  return o;
}

Outcome run_stokes(const Setup& s) {
  const CoForm omega(s.measure, fixture(s, "omega"));
  const StokesReport r = stokes_check(omega, *s.domain, s.layer);
  Outcome o;
  json identity = json::array();
  bool identity_ok = true;
  for (const auto& row : r.identity) {
    identity.push_back({{"epsilon", row.epsilon},
                        {"boundary_term", estimate_json(row.boundary_term)},
                        {"volume_term", estimate_json(row.volume_term)},
                        {"sum", estimate_json(row.sum)},
                        {"pass", row.pass}});
    identity_ok = identity_ok && row.pass;
  }
  o.results = {{"domain", s.domain->describe()},
               {"boundary_side", trace_json(r.boundary)},
               {"volume_side", trace_json(r.volume)},
               {"sharp_volume", estimate_json(r.sharp_volume)},
               {"gap", estimate_json(r.gap)},
               {"sharp_gap", estimate_json(r.sharp_gap)},
               {"gap_trace", r.gap_trace},
               {"identity", identity},
               {"tolerance", r.tolerance}};
  o.traces.push_back({"trace.csv", trace_csv(o.results["boundary_side"]["rows"])});
  o.traces.push_back({"trace_volume.csv", trace_csv(o.results["volume_side"]["rows"])});
  o.criteria.push_back({"stokes_gap", std::abs(r.gap.value) <= r.tolerance,
                        {{"gap", r.gap.value}, {"tolerance", r.tolerance}}});
  o.criteria.push_back({"sharp_indicator_agrees", std::abs(r.sharp_gap.value) <= r.tolerance,
                        {{"gap", r.sharp_gap.value}, {"tolerance", r.tolerance}}});
  o.criteria.push_back({"proof_identity", identity_ok, {{"rows", r.identity.size()}}});
  expect_limit(s, o, "boundary_side", r.boundary.limit);
  expect_limit(s, o, "volume_side", r.volume.limit);
  o.summary.push_back("boundary side " + fmt(r.boundary.limit.value) + ", volume side " +
                      fmt(r.volume.limit.value) + ", gap " + fmt(r.gap.value));
  return o;
}

std::string timestamp_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

bool Outcome::pass() const {
  for (const auto& c : criteria)
    if (!c.pass) return false;
  return true;
}

json Outcome::report(const json& config, const std::string& timestamp) const {
  json crit = json::array();
  for (const auto& c : criteria) crit.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  return {{"experiment", experiment},
          {"inputs_digest", io::digest(config)},
          {"config", config},
          {"results", results},
          {"criteria", crit},
          {"pass", pass()},
          {"generated_at", timestamp}};
}

json apply_overrides(json config, const Overrides& ov) {
  if (!config.is_object()) return config;
  if (ov.seed) {
    config["seed"] = *ov.seed;
    if (config.contains("integration") && config["integration"].is_object() &&
        config["integration"].contains("seed"))
      config["integration"]["seed"] = *ov.seed;
  }
  if (ov.method) {
    if (*ov.method != "quadrature" && *ov.method != "mc")
      throw ConfigError("--method", "expected quadrature or mc");
    json integ = config.contains("integration") && config["integration"].is_object()
                     ? config["integration"]
                     : json::object();
    integ["method"] = *ov.method;
    config["integration"] = integ;
  }
  return config;
}

Outcome run_experiment(const json& config, const Overrides& overrides) {
  const json c = apply_overrides(config, overrides);
  const Setup s = parse(c);
  Outcome o;
  if (s.kind == "algebra-check") o = run_algebra(s);
  else if (s.kind == "adjoint-check") o = run_adjoint(s);
  else if (s.kind == "layer-converge") o = run_layer(s);
  else if (s.kind == "boundary-pairing") o = run_pairing(s);
  else o = run_stokes(s);
  o.experiment = s.kind;
  return o;
}

std::string trace_csv(const json& rows) {
  std::ostringstream os;
  os << "epsilon,estimate,stderr,extrapolated\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,", r["epsilon"].get<double>(),
                  r["estimate"].get<double>(), r["stderr"].get<double>());
    os << buf;
    if (!r["extrapolated"].is_null()) {
      std::snprintf(buf, sizeof buf, "%.17g", r["extrapolated"].get<double>());
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

int run(const std::string& config_path, const std::string& out_dir, const Overrides& overrides,
        std::ostream& out, std::ostream& err) {
  json config;
  Outcome o;
  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError(config_path, "cannot open configuration file");
    std::stringstream buf;
    buf << in.rdbuf();
    config = apply_overrides(io::parse_text(buf.str(), config_path), overrides);
    o = run_experiment(config, {});
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto dir = std::filesystem::path(out_dir);
  {
    std::ofstream rep(dir / "report.json");
    rep << o.report(config, timestamp_now()).dump(2) << '\n';
    if (!rep) {
      err << "cannot write " << (dir / "report.json").string() << '\n';
      return 2;
    }
  }
  for (const auto& t : o.traces) std::ofstream(dir / t.name) << t.content;

  out << o.experiment << '\n';
  for (const auto& line : o.summary) out << "  " << line << '\n';
  for (const auto& c : o.criteria) out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name << '\n';
  out << (o.pass() ? "PASS" : "FAIL") << '\n';
  return o.pass() ? 0 : 1;
}

}  // namespace dforms::cli
