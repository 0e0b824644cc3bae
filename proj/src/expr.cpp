#include "dforms/expr.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dforms {

struct Expr::Node {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;  // constant value or scale factor
  int coord = 0;
  std::vector<Expr> args;
  ExpQuadParams eq;
};

Expr::Expr() : node_(nullptr) {
  static const auto zero = [] {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::constant;
    return std::shared_ptr<const Node>(std::move(n));
  }();
  node_ = zero;
}

Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("Expr constant must be finite");
  if (c == 0.0) return Expr();
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::constant;
  n->value = c;
  return Expr(std::move(n));
}

Expr Expr::coord(int p) {
  if (p < 1) throw std::invalid_argument("Expr coordinate index must be >= 1");
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::coord;
  n->coord = p;
  return Expr(std::move(n));
}

Expr Expr::sum(std::vector<Expr> terms) {
  std::vector<Expr> flat;
  double c = 0.0;
  bool has_const = false;
  for (auto& t : terms) {
    if (t.kind() == ExprKind::add) {
      for (const auto& inner : t.args()) {
        if (inner.is_constant()) {
          c += inner.constant_value();
          has_const = true;
        } else {
          flat.push_back(inner);
        }
      }
    } else if (t.is_constant()) {
      if (!t.is_zero()) {
        c += t.constant_value();
        has_const = true;
      }
    } else {
      flat.push_back(std::move(t));
    }
  }
  if (has_const && c != 0.0) flat.push_back(constant(c));
  if (flat.empty()) return Expr();
  if (flat.size() == 1) return flat.front();
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::add;
  n->args = std::move(flat);
  return Expr(std::move(n));
}

Expr Expr::product(std::vector<Expr> factors) {
  std::vector<Expr> flat;
  double coef = 1.0;
  // Worklist flattening keeps factor order stable.
  std::vector<Expr> work(factors.rbegin(), factors.rend());
  while (!work.empty()) {
    Expr f = std::move(work.back());
    work.pop_back();
    switch (f.kind()) {
      case ExprKind::constant:
        coef *= f.constant_value();
        break;
      case ExprKind::scale:
        coef *= f.factor();
        work.push_back(f.args()[0]);
        break;
      case ExprKind::mul:
        for (auto it = f.args().rbegin(); it != f.args().rend(); ++it) work.push_back(*it);
        break;
      default:
        flat.push_back(std::move(f));
    }
    if (coef == 0.0) return Expr();
  }
  if (flat.empty()) return constant(coef);
  Expr body;
  if (flat.size() == 1) {
    body = flat.front();
  } else {
    auto n = std::make_shared<Node>();
    n->kind = ExprKind::mul;
    n->args = std::move(flat);
    body = Expr(std::move(n));
  }
  return scaled(coef, body);
}

Expr Expr::scaled(double factor, const Expr& e) {
  if (!std::isfinite(factor)) throw std::invalid_argument("Expr scale factor must be finite");
  if (factor == 0.0 || e.is_zero()) return Expr();
  if (factor == 1.0) return e;
  if (e.is_constant()) return constant(factor * e.constant_value());
  if (e.kind() == ExprKind::scale) return scaled(factor * e.factor(), e.args()[0]);
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::scale;
  n->value = factor;
  n->args = {e};
  return Expr(std::move(n));
}

Expr Expr::exp_quadratic(ExpQuadParams params) {
  const std::size_t len = std::max(params.a.size(), params.b.size());
  params.a.resize(len, 0.0);
  params.b.resize(len, 0.0);
  while (!params.a.empty() && params.a.back() == 0.0 && params.b.back() == 0.0) {
    params.a.pop_back();
    params.b.pop_back();
  }
  for (double v : params.a)
    if (!std::isfinite(v)) throw std::invalid_argument("expquad coefficients must be finite");
  for (double v : params.b)
    if (!std::isfinite(v)) throw std::invalid_argument("expquad coefficients must be finite");
  if (params.a.empty()) return constant(std::exp(params.c));
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::expquad;
  n->eq = std::move(params);
  return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }

double Expr::constant_value() const {
  if (kind() != ExprKind::constant) throw std::logic_error("Expr is not a constant");
  return node_->value;
}

int Expr::coord_index() const {
  if (kind() != ExprKind::coord) throw std::logic_error("Expr is not a coordinate");
  return node_->coord;
}

double Expr::factor() const {
  if (kind() != ExprKind::scale) throw std::logic_error("Expr is not a scale node");
  return node_->value;
}

std::span<const Expr> Expr::args() const { return node_->args; }

const ExpQuadParams& Expr::expquad() const {
  if (kind() != ExprKind::expquad) throw std::logic_error("Expr is not an expquad node");
  return node_->eq;
}

bool Expr::is_zero() const { return kind() == ExprKind::constant && node_->value == 0.0; }

double Expr::eval(std::span<const double> x) const {
  const Node& n = *node_;
  switch (n.kind) {
    case ExprKind::constant:
      return n.value;
    case ExprKind::coord:
      if (static_cast<std::size_t>(n.coord) > x.size())
        throw std::invalid_argument("Expr::eval: point has dimension " + std::to_string(x.size()) +
                                    " but x_" + std::to_string(n.coord) + " is referenced");
      return x[static_cast<std::size_t>(n.coord - 1)];
    case ExprKind::add: {
      double acc = n.args[0].eval(x);
      for (std::size_t i = 1; i < n.args.size(); ++i) acc = acc + n.args[i].eval(x);
      return acc;
    }
    case ExprKind::mul: {
      double acc = n.args[0].eval(x);
      for (std::size_t i = 1; i < n.args.size(); ++i) acc = acc * n.args[i].eval(x);
      return acc;
    }
    case ExprKind::scale:
      return n.value * n.args[0].eval(x);
    case ExprKind::expquad: {
      if (n.eq.a.size() > x.size())
        throw std::invalid_argument("Expr::eval: expquad references coordinates beyond the point");
      double q = n.eq.c;
      for (std::size_t p = 0; p < n.eq.a.size(); ++p) {
        if (n.eq.a[p] == 0.0 && n.eq.b[p] == 0.0) continue;
        q = q + (n.eq.a[p] * x[p] + n.eq.b[p]) * x[p];
      }
      return std::exp(q);
    }
  }
  return 0.0;
}

Expr Expr::derivative(int p) const {
  if (p < 1) throw std::invalid_argument("derivative direction must be >= 1");
  const Node& n = *node_;
  switch (n.kind) {
    case ExprKind::constant:
      return Expr();
    case ExprKind::coord:
      return n.coord == p ? constant(1.0) : Expr();
    case ExprKind::add: {
      std::vector<Expr> terms;
      terms.reserve(n.args.size());
      for (const auto& a : n.args) terms.push_back(a.derivative(p));
      return sum(std::move(terms));
    }
    case ExprKind::mul: {
      std::vector<Expr> terms;
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        Expr di = n.args[i].derivative(p);
        if (di.is_zero()) continue;
        std::vector<Expr> factors = n.args;
        factors[i] = di;
        terms.push_back(product(std::move(factors)));
      }
      return sum(std::move(terms));
    }
    case ExprKind::scale:
      return scaled(n.value, n.args[0].derivative(p));
    case ExprKind::expquad: {
      const auto q = static_cast<std::size_t>(p - 1);
      if (q >= n.eq.a.size()) return Expr();
      Expr inner = sum({scaled(2.0 * n.eq.a[q], coord(p)), constant(n.eq.b[q])});
      return product({inner, *this});
    }
  }
  return Expr();
}

int Expr::max_coord() const {
  const Node& n = *node_;
  switch (n.kind) {
    case ExprKind::constant:
      return 0;
    case ExprKind::coord:
      return n.coord;
    case ExprKind::expquad:
      return static_cast<int>(n.eq.a.size());
    default: {
      int m = 0;
      for (const auto& a : n.args) m = std::max(m, a.max_coord());
      return m;
    }
  }
}

int Expr::poly_degree() const {
  const Node& n = *node_;
  switch (n.kind) {
    case ExprKind::constant:
    case ExprKind::expquad:
      return 0;
    case ExprKind::coord:
      return 1;
    case ExprKind::add: {
      int m = 0;
      for (const auto& a : n.args) m = std::max(m, a.poly_degree());
      return m;
    }
    case ExprKind::mul: {
      int s = 0;
      for (const auto& a : n.args) s += a.poly_degree();
      return s;
    }
    case ExprKind::scale:
      return n.args[0].poly_degree();
  }
  return 0;
}

std::size_t Expr::node_count() const {
  std::size_t c = 1;
  for (const auto& a : node_->args) c += a.node_count();
  return c;
}

std::string Expr::to_string() const {
  const Node& n = *node_;
  std::ostringstream os;
  switch (n.kind) {
    case ExprKind::constant:
      os << n.value;
      break;
    case ExprKind::coord:
      os << "x" << n.coord;
      break;
    case ExprKind::add:
    case ExprKind::mul: {
      os << "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) os << (n.kind == ExprKind::add ? " + " : "*");
        os << n.args[i].to_string();
      }
      os << ")";
      break;
    }
    case ExprKind::scale:
      os << n.value << "*" << n.args[0].to_string();
      break;
    case ExprKind::expquad: {
      os << "exp(" << n.eq.c;
      for (std::size_t p = 0; p < n.eq.a.size(); ++p) {
        if (n.eq.a[p] != 0.0) os << " + " << n.eq.a[p] << "*x" << p + 1 << "^2";
        if (n.eq.b[p] != 0.0) os << " + " << n.eq.b[p] << "*x" << p + 1;
      }
      os << ")";
      break;
    }
  }
  return os.str();
}

namespace {

void emit(const Expr& e, kernels::Program& prog, std::size_t depth) {
  using kernels::Instr;
  using kernels::Op;
  prog.max_depth = std::max(prog.max_depth, depth + 1);
  switch (e.kind()) {
    case ExprKind::constant:
      prog.code.push_back(Instr{Op::push_const, 0, 0, e.constant_value()});
      break;
    case ExprKind::coord:
      prog.code.push_back(Instr{Op::push_coord, static_cast<std::uint32_t>(e.coord_index() - 1), 0, 0.0});
      break;
    case ExprKind::add:
    case ExprKind::mul: {
      const auto args = e.args();
      for (std::size_t i = 0; i < args.size(); ++i) emit(args[i], prog, depth + i);
      prog.code.push_back(Instr{e.kind() == ExprKind::add ? Op::add : Op::mul,
                                static_cast<std::uint32_t>(args.size()), 0, 0.0});
      break;
    }
    case ExprKind::scale:
      emit(e.args()[0], prog, depth);
      prog.code.push_back(Instr{Op::scale, 0, 0, e.factor()});
      break;
    case ExprKind::expquad: {
      const auto& eq = e.expquad();
      const auto offset = static_cast<std::uint32_t>(prog.pool.size());
      prog.pool.push_back(eq.c);
      std::uint32_t terms = 0;
      for (std::size_t p = 0; p < eq.a.size(); ++p) {
        if (eq.a[p] == 0.0 && eq.b[p] == 0.0) continue;
        prog.pool.push_back(static_cast<double>(p));
        prog.pool.push_back(eq.a[p]);
        prog.pool.push_back(eq.b[p]);
        ++terms;
      }
      prog.code.push_back(Instr{Op::exp_quad, offset, terms, 0.0});
      break;
    }
  }
}

}  // namespace

kernels::Program Expr::compile() const {
  kernels::Program prog;
  emit(*this, prog, 0);
  prog.dim_required = static_cast<std::size_t>(max_coord());
  return prog;
}

}  // namespace dforms
