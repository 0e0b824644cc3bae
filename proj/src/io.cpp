#include "dforms/io.hpp"

#include <cmath>
#include <cstdio>

namespace dforms::io {

namespace {

std::string at(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}
std::string at(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

const json& field(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(at(where, key), "missing field");
  return *it;
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) throw ConfigError(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(where, "expected a finite number");
  return v;
}

int integer(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ConfigError(where, "expected an integer");
  return j.get<int>();
}

std::vector<double> numbers(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an array of numbers");
  std::vector<double> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], at(where, i)));
  return v;
}

MultiIndex index_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where, "expected an index array");
  std::vector<int> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(integer(j[i], at(where, i)));
  try {
    return MultiIndex(v);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where, e.what());
  }
}

json index_to_json(const MultiIndex& m) { return json(std::vector<int>(m.entries().begin(), m.entries().end())); }

}  // namespace

json to_json(const AltTensor& t) {
  json coeffs = json::array();
  for (const auto& [idx, c] : t.coeffs()) coeffs.push_back({{"idx", index_to_json(idx)}, {"c", c}});
  return {{"degree", t.degree()}, {"coeffs", coeffs}};
}

AltTensor alt_tensor_from_json(const json& j, const std::string& where) {
  const int degree = integer(field(j, "degree", where), at(where, "degree"));
  if (degree < 0) throw ConfigError(at(where, "degree"), "must be >= 0");
  AltTensor t(degree);
  const json& cs = field(j, "coeffs", where);
  if (!cs.is_array()) throw ConfigError(at(where, "coeffs"), "expected an array");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string w = at(at(where, "coeffs"), i);
    const MultiIndex idx = index_from_json(field(cs[i], "idx", w), at(w, "idx"));
    if (static_cast<int>(idx.size()) != degree)
      throw ConfigError(at(w, "idx"), "index length differs from degree " + std::to_string(degree));
    t.add(idx, number(field(cs[i], "c", w), at(w, "c")));
  }
  return t;
}

json to_json(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::constant:
      return {{"kind", "const"}, {"value", e.constant_value()}};
    case ExprKind::coord:
      return {{"kind", "coord"}, {"index", e.coord_index()}};
    case ExprKind::add:
    case ExprKind::mul: {
      json args = json::array();
      for (const auto& a : e.args()) args.push_back(to_json(a));
      return {{"kind", e.kind() == ExprKind::add ? "add" : "mul"}, {"args", args}};
    }
    case ExprKind::scale:
      return {{"kind", "scale"}, {"factor", e.factor()}, {"arg", to_json(e.args()[0])}};
    case ExprKind::expquad: {
      const auto& q = e.expquad();
      return {{"kind", "expquad"}, {"a", q.a}, {"b", q.b}, {"c", q.c}};
    }
  }
  return {};
}

Expr expr_from_json(const json& j, const std::string& where) {
  if (j.is_number()) return Expr::constant(number(j, where));
  const json& kind = field(j, "kind", where);
  if (!kind.is_string()) throw ConfigError(at(where, "kind"), "expected a string");
  const std::string k = kind.get<std::string>();
  if (k == "const") return Expr::constant(number(field(j, "value", where), at(where, "value")));
  if (k == "coord") {
    const int p = integer(field(j, "index", where), at(where, "index"));
    if (p < 1) throw ConfigError(at(where, "index"), "coordinates are numbered from 1");
    return Expr::coord(p);
  }
  if (k == "add" || k == "mul") {
    const json& args = field(j, "args", where);
    if (!args.is_array()) throw ConfigError(at(where, "args"), "expected an array");
    std::vector<Expr> v;
    for (std::size_t i = 0; i < args.size(); ++i)
      v.push_back(expr_from_json(args[i], at(at(where, "args"), i)));
    return k == "add" ? Expr::sum(std::move(v)) : Expr::product(std::move(v));
  }
  if (k == "scale")
    return Expr::scaled(number(field(j, "factor", where), at(where, "factor")),
                        expr_from_json(field(j, "arg", where), at(where, "arg")));
  if (k == "expquad") {
    ExpQuadParams q;
    if (j.contains("a")) q.a = numbers(j["a"], at(where, "a"));
    if (j.contains("b")) q.b = numbers(j["b"], at(where, "b"));
    if (j.contains("c")) q.c = number(j["c"], at(where, "c"));
    return Expr::exp_quadratic(std::move(q));
  }
  throw ConfigError(at(where, "kind"), "unknown expression kind '" + k + "'");
}

json to_json(const FormField& f) {
  json coeffs = json::array();
  for (const auto& [idx, e] : f.coeffs())
    coeffs.push_back({{"idx", index_to_json(idx)}, {"expr", to_json(e)}});
  return {{"degree", f.degree()}, {"dim", f.dim()}, {"coeffs", coeffs}};
}

FormField form_from_json(const json& j, const std::string& where) {
  const int degree = integer(field(j, "degree", where), at(where, "degree"));
  const int dim = integer(field(j, "dim", where), at(where, "dim"));
  if (degree < 0) throw ConfigError(at(where, "degree"), "must be >= 0");
  if (dim < 1) throw ConfigError(at(where, "dim"), "must be >= 1");
  FormField f(degree, dim);
  const json& cs = field(j, "coeffs", where);
  if (!cs.is_array()) throw ConfigError(at(where, "coeffs"), "expected an array");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string w = at(at(where, "coeffs"), i);
    const MultiIndex idx = index_from_json(field(cs[i], "idx", w), at(w, "idx"));
    if (static_cast<int>(idx.size()) != degree)
      throw ConfigError(at(w, "idx"), "index length differs from degree " + std::to_string(degree));
    const Expr e = expr_from_json(field(cs[i], "expr", w), at(w, "expr"));
    try {
      f.add(idx, e);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(w, ex.what());
    }
  }
  return f;
}

json to_json(const GaussianProduct& g) {
  return {{"kind", "gaussian_product"},
          {"dim", g.dim()},
          {"variances", std::vector<double>(g.variances().begin(), g.variances().end())}};
}

std::shared_ptr<DifferentiableMeasure> measure_from_json(const json& j, const std::string& where) {
  const json& kind = field(j, "kind", where);
  if (!kind.is_string() || kind.get<std::string>() != "gaussian_product")
    throw ConfigError(at(where, "kind"), "only \"gaussian_product\" is supported");
  const int dim = integer(field(j, "dim", where), at(where, "dim"));
  if (dim < 1) throw ConfigError(at(where, "dim"), "must be >= 1");
  std::vector<double> var(static_cast<std::size_t>(dim), 1.0);
  if (j.contains("variances")) {
    var = numbers(j["variances"], at(where, "variances"));
    if (static_cast<int>(var.size()) != dim)
      throw ConfigError(at(where, "variances"), "expected " + std::to_string(dim) + " entries");
  }
  try {
    return std::make_shared<GaussianProduct>(std::move(var));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(at(where, "variances"), e.what());
  }
}

std::unique_ptr<Domain> domain_from_json(const json& j, int dim, const std::string& where) {
  const json& kind = field(j, "kind", where);
  if (!kind.is_string()) throw ConfigError(at(where, "kind"), "expected a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "halfspace") {
      const auto axis = numbers(field(j, "axis", where), at(where, "axis"));
      if (static_cast<int>(axis.size()) != dim)
        throw ConfigError(at(where, "axis"), "expected " + std::to_string(dim) + " entries");
      const double c = number(field(j, "offset", where), at(where, "offset"));
      const double cap = j.contains("reach_cap") ? number(j["reach_cap"], at(where, "reach_cap")) : 1e6;
      return make_halfspace(dim, axis, c, cap);
    }
    if (k == "ball") {
      const int kk = integer(field(j, "k", where), at(where, "k"));
      const double r = number(field(j, "r", where), at(where, "r"));
      return make_ball(dim, kk, r);
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where, e.what());
  }
  throw ConfigError(at(where, "kind"), "unknown domain kind '" + k + "'");
}

json to_json(const IntegrationSpec& s) {
  if (s.is_mc()) return {{"method", "mc"}, {"n", s.samples}, {"seed", s.seed}};
  return {{"method", "quadrature"}, {"order", s.order}};
}

IntegrationSpec integration_from_json(const json& j, const std::string& where) {
  const json& m = field(j, "method", where);
  if (!m.is_string()) throw ConfigError(at(where, "method"), "expected a string");
  const std::string method = m.get<std::string>();
  IntegrationSpec s;
  if (method == "quadrature") {
    s.method = IntegrationSpec::Method::quadrature;
    if (j.contains("order")) s.order = integer(j["order"], at(where, "order"));
    if (s.order < 1) throw ConfigError(at(where, "order"), "must be >= 1");
  } else if (method == "mc") {
    s.method = IntegrationSpec::Method::monte_carlo;
    if (j.contains("n")) {
      if (!j["n"].is_number_unsigned() || j["n"].get<std::uint64_t>() < 1)
        throw ConfigError(at(where, "n"), "must be a positive integer");
      s.samples = j["n"].get<std::uint64_t>();
    }
    if (j.contains("seed")) {
      if (!j["seed"].is_number_unsigned()) throw ConfigError(at(where, "seed"), "expected an unsigned integer");
      s.seed = j["seed"].get<std::uint64_t>();
    }
  } else {
    throw ConfigError(at(where, "method"), "expected \"quadrature\" or \"mc\"");
  }
  if (j.contains("workers")) {
    const int w = integer(j["workers"], at(where, "workers"));
    if (w < 0) throw ConfigError(at(where, "workers"), "must be >= 0");
    s.workers = static_cast<unsigned>(w);
  }
  if (j.contains("z")) s.z = number(j["z"], at(where, "z"));
  if (j.contains("abs_tol")) s.abs_tol = number(j["abs_tol"], at(where, "abs_tol"));
  return s;
}

json parse_text(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw ConfigError(source + ":" + std::to_string(line) + ":" + std::to_string(col),
                      "JSON syntax error");
  }
}

std::string digest(const json& j) {
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace dforms::io
