#include "nlqft/functional.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace nlqft {

namespace {

const int kPair[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
const double kEta[4] = {1.0, -1.0, -1.0, -1.0};

int pair_index(int p, int q) {  // p < q
  static const int tbl[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5},
                                {2, 4, 5, -1}};
  return tbl[p][q];
}

// 24 permutations of (0,1,2,3) with parity, eps^{0123} = +1
struct Perm { int p[4]; int sign; };
const std::vector<Perm>& all_perms() {
  static std::vector<Perm> perms = [] {
    std::vector<Perm> out;
    int idx[4] = {0, 1, 2, 3};
    std::vector<int> v(idx, idx + 4);
    std::sort(v.begin(), v.end());
    do {
      int inv = 0;
      for (int i = 0; i < 4; ++i)
        for (int j = i + 1; j < 4; ++j)
          if (v[i] > v[j]) ++inv;
      out.push_back(Perm{{v[0], v[1], v[2], v[3]}, (inv % 2) ? -1 : 1});
    } while (std::next_permutation(v.begin(), v.end()));
    return out;
  }();
  return perms;
}

// ---------------- tokenizer ----------------

struct Token {
  enum Type { Ident, Number, Op, End } type = End;
  std::string text;
  double num = 0;
  std::size_t pos = 0;
};

std::vector<Token> tokenize(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
    Token t;
    t.pos = i;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
      t.type = Token::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      t.num = std::strtod(s.c_str() + i, &end);
      t.type = Token::Number;
      t.text = s.substr(i, end - (s.c_str() + i));
      i = end - s.c_str();
    } else if (std::string("+-*^(),").find(c) != std::string::npos) {
      t.type = Token::Op;
      t.text = std::string(1, c);
      ++i;
    } else {
      throw std::invalid_argument("functional syntax error at position " +
                                  std::to_string(i) + ": unexpected '" +
                                  std::string(1, c) + "'");
    }
    out.push_back(t);
  }
  out.push_back(Token{Token::End, "", 0, s.size()});
  return out;
}

// ---------------- parser ----------------

struct Parser {
  const std::vector<Token>& toks;
  const std::map<std::string, Rank>& slot_ranks;
  std::size_t i = 0;

  [[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("functional error at position " +
                                std::to_string(toks[i].pos) + ": " + msg);
  }
  const Token& peek() const { return toks[i]; }
  bool accept_op(const char* op) {
    if (toks[i].type == Token::Op && toks[i].text == op) { ++i; return true; }
    return false;
  }
  void expect_op(const char* op) {
    if (!accept_op(op)) fail(std::string("expected '") + op + "'");
  }

  Rank rank_of(const FNode& n) const { return n.rank; }

  void require_rank(const FNode& n, Rank r, const char* what) {
    if (n.rank != r) fail(std::string("rank mismatch: ") + what);
  }

  FNode expr() {
    FNode out = term();
    while (toks[i].type == Token::Op &&
           (toks[i].text == "+" || toks[i].text == "-")) {
      bool minus = toks[i].text == "-";
      ++i;
      FNode rhs = term();
      if (minus) rhs = negate(std::move(rhs));
      if (out.kind == FNode::Sum) {
        if (rhs.rank != out.rank) fail("rank mismatch in sum");
        out.kids.push_back(std::move(rhs));
      } else {
        if (rhs.rank != out.rank) fail("rank mismatch in sum");
        FNode s;
        s.kind = FNode::Sum;
        s.rank = out.rank;
        s.kids.push_back(std::move(out));
        s.kids.push_back(std::move(rhs));
        out = std::move(s);
      }
    }
    return out;
  }

  FNode negate(FNode n) {
    FNode c;
    c.kind = FNode::Const;
    c.value = -1.0;
    c.rank = Rank::Scalar;
    FNode p;
    p.kind = FNode::Product;
    p.rank = n.rank;
    p.kids.push_back(std::move(c));
    p.kids.push_back(std::move(n));
    return p;
  }

  FNode term() {
    FNode out = factor();
    while (accept_op("*")) {
      FNode rhs = factor();
      Rank r = out.rank != Rank::Scalar ? out.rank : rhs.rank;
      if (out.rank != Rank::Scalar && rhs.rank != Rank::Scalar)
        fail("product of two tensor-valued factors (use eta/contr/wedge)");
      if (out.kind == FNode::Product) {
        out.kids.push_back(std::move(rhs));
        out.rank = r;
      } else {
        FNode p;
        p.kind = FNode::Product;
        p.rank = r;
        p.kids.push_back(std::move(out));
        p.kids.push_back(std::move(rhs));
        out = std::move(p);
      }
    }
    return out;
  }

  FNode factor() {
    FNode out = primary();
    if (accept_op("^")) {
      if (toks[i].type != Token::Number) fail("expected integer exponent");
      double v = toks[i].num;
      int n = int(v);
      if (v != n || n < 1) fail("exponent must be a positive integer");
      ++i;
      require_rank(out, Rank::Scalar, "power of a non-scalar");
      FNode p;
      p.kind = FNode::Power;
      p.power = n;
      p.rank = Rank::Scalar;
      p.kids.push_back(std::move(out));
      out = std::move(p);
    }
    return out;
  }

  FNode call(const std::string& fn) {
    expect_op("(");
    std::vector<FNode> args;
    if (!accept_op(")")) {
      args.push_back(expr());
      while (accept_op(",")) args.push_back(expr());
      expect_op(")");
    }
    FNode out;
    auto arity = [&](std::size_t n) {
      if (args.size() != n)
        fail(fn + " takes " + std::to_string(n) + " argument(s)");
    };
    if (fn == "deriv") {
      if (args.size() == 1) {
        require_rank(args[0], Rank::Scalar, "deriv(f) needs a scalar (use deriv(mu, f))");
        out.kind = FNode::Grad;
        out.rank = Rank::Vector;
        out.kids = std::move(args);
      } else if (args.size() == 2) {
        if (args[0].kind != FNode::Const || args[0].value != int(args[0].value) ||
            args[0].value < 0 || args[0].value > 3)
          fail("deriv(mu, f): mu must be 0..3");
        out.kind = FNode::Deriv;
        out.mu = int(args[0].value);
        out.rank = args[1].rank;
        out.kids.push_back(std::move(args[1]));
      } else {
        fail("deriv takes 1 or 2 arguments");
      }
    } else if (fn == "eta") {
      arity(2);
      require_rank(args[0], Rank::Vector, "eta needs two vectors");
      require_rank(args[1], Rank::Vector, "eta needs two vectors");
      out.kind = FNode::Eta;
      out.rank = Rank::Scalar;
      out.kids = std::move(args);
    } else if (fn == "contr") {
      arity(2);
      require_rank(args[0], Rank::Vector, "contr needs (vector, antisym2)");
      require_rank(args[1], Rank::Antisym2, "contr needs (vector, antisym2)");
      out.kind = FNode::Contr;
      out.rank = Rank::Vector;
      out.kids = std::move(args);
    } else if (fn == "inner") {
      arity(2);
      require_rank(args[0], Rank::Antisym2, "inner needs two antisym2 arguments");
      require_rank(args[1], Rank::Antisym2, "inner needs two antisym2 arguments");
      out.kind = FNode::Inner2;
      out.rank = Rank::Scalar;
      out.kids = std::move(args);
    } else if (fn == "eps") {
      if (args.size() == 1) {
        require_rank(args[0], Rank::Antisym2, "eps(F) needs an antisym2");
        out.kind = FNode::EpsDual;
        out.rank = Rank::Antisym2;
        out.kids = std::move(args);
      } else if (args.size() == 2) {
        require_rank(args[0], Rank::Vector, "eps needs (vector, antisym2)");
        require_rank(args[1], Rank::Antisym2, "eps needs (vector, antisym2)");
        out.kind = FNode::Eps2;
        out.rank = Rank::Vector;
        out.kids = std::move(args);
      } else {
        fail("eps takes 1 or 2 arguments");
      }
    } else if (fn == "div") {
      arity(1);
      require_rank(args[0], Rank::Antisym2, "div needs an antisym2");
      out.kind = FNode::Div;
      out.rank = Rank::Vector;
      out.kids = std::move(args);
    } else if (fn == "wedge") {
      arity(2);
      require_rank(args[0], Rank::Vector, "wedge needs two vectors");
      require_rank(args[1], Rank::Vector, "wedge needs two vectors");
      out.kind = FNode::Wedge;
      out.rank = Rank::Antisym2;
      out.kids = std::move(args);
    } else if (fn == "dwedge") {
      arity(1);
      require_rank(args[0], Rank::Vector, "dwedge needs a vector");
      out.kind = FNode::DWedge;
      out.rank = Rank::Antisym2;
      out.kids = std::move(args);
    } else if (fn == "lower") {
      arity(1);
      if (args[0].rank == Rank::Scalar) fail("lower needs a tensor argument");
      out.kind = FNode::Lower;
      out.rank = args[0].rank;
      out.kids = std::move(args);
    } else {
      fail("unknown function '" + fn + "'");
    }
    return out;
  }

  FNode primary() {
    if (accept_op("-")) return negate(primary());
    if (accept_op("(")) {
      FNode out = expr();
      expect_op(")");
      return out;
    }
    const Token& t = peek();
    if (t.type == Token::Number) {
      ++i;
      FNode n;
      n.kind = FNode::Const;
      n.value = t.num;
      n.rank = Rank::Scalar;
      return n;
    }
    if (t.type == Token::Ident) {
      std::string name = t.text;
      ++i;
      if (toks[i].type == Token::Op && toks[i].text == "(") return call(name);
      FNode n;
      n.kind = FNode::Var;
      n.name = name;
      auto it = slot_ranks.find(name);
      n.rank = it == slot_ranks.end() ? Rank::Scalar : it->second;
      return n;
    }
    fail("expected expression");
  }
};

void collect_slots(const FNode& n, std::set<std::string>& out) {
  if (n.kind == FNode::Var) out.insert(n.name);
  for (const auto& k : n.kids) collect_slots(k, out);
}

void print_node(const FNode& n, std::string& out) {
  char buf[64];
  switch (n.kind) {
    case FNode::Var: out += n.name; break;
    case FNode::Const:
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      break;
    case FNode::Sum:
      out += "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += " + ";
        print_node(n.kids[i], out);
      }
      out += ")";
      break;
    case FNode::Product:
      out += "(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += " * ";
        print_node(n.kids[i], out);
      }
      out += ")";
      break;
    case FNode::Power:
      out += "(";
      print_node(n.kids[0], out);
      std::snprintf(buf, sizeof buf, "^%d", n.power);
      out += buf;
      out += ")";
      break;
    case FNode::Grad:
      out += "deriv(";
      print_node(n.kids[0], out);
      out += ")";
      break;
    case FNode::Deriv:
      std::snprintf(buf, sizeof buf, "deriv(%d, ", n.mu);
      out += buf;
      print_node(n.kids[0], out);
      out += ")";
      break;
    case FNode::Eta:
    case FNode::Contr:
    case FNode::Eps2:
    case FNode::Inner2:
    case FNode::Wedge: {
      const char* names[] = {"eta", "contr", "eps", "inner", "wedge"};
      int which = n.kind == FNode::Eta      ? 0
                  : n.kind == FNode::Contr  ? 1
                  : n.kind == FNode::Eps2   ? 2
                  : n.kind == FNode::Inner2 ? 3
                                            : 4;
      out += names[which];
      out += "(";
      print_node(n.kids[0], out);
      out += ", ";
      print_node(n.kids[1], out);
      out += ")";
      break;
    }
    case FNode::EpsDual:
      out += "eps(";
      print_node(n.kids[0], out);
      out += ")";
      break;
    case FNode::Div:
      out += "div(";
      print_node(n.kids[0], out);
      out += ")";
      break;
    case FNode::DWedge:
      out += "dwedge(";
      print_node(n.kids[0], out);
      out += ")";
      break;
    case FNode::Lower:
      out += "lower(";
      print_node(n.kids[0], out);
      out += ")";
      break;
  }
}

// ---------------- evaluator ----------------

struct Evaluator {
  const std::map<std::string, const RealField4*>& bindings;
  std::shared_ptr<const Grid> grid;

  RealField4 eval(const FNode& n) {
    switch (n.kind) {
      case FNode::Var: {
        auto it = bindings.find(n.name);
        if (it == bindings.end())
          throw std::invalid_argument("unbound slot '" + n.name + "'");
        const RealField4& f = *it->second;
        if (f.components != component_count(n.rank))
          throw std::invalid_argument("rank mismatch for slot '" + n.name + "'");
        return f;
      }
      case FNode::Const: {
        RealField4 out = make_real_field(grid, 1);
        std::fill(out.data.begin(), out.data.end(), n.value);
        return out;
      }
      case FNode::Sum: {
        RealField4 out = eval(n.kids[0]);
        for (std::size_t k = 1; k < n.kids.size(); ++k) {
          RealField4 rhs = eval(n.kids[k]);
          for (std::size_t i = 0; i < out.data.size(); ++i)
            out.data[i] += rhs.data[i];
        }
        return out;
      }
      case FNode::Product: {
        // at most one tensor factor (enforced at parse time)
        RealField4 out = eval(n.kids[0]);
        for (std::size_t k = 1; k < n.kids.size(); ++k) {
          RealField4 rhs = eval(n.kids[k]);
          if (out.components == 1 && rhs.components > 1) std::swap(out, rhs);
          const double* s = rhs.comp(0);
          std::size_t vol = grid->n_sites();
          for (int c = 0; c < out.components; ++c) {
            double* d = out.comp(c);
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < (long long)vol; ++i) d[i] *= s[i];
          }
        }
        return out;
      }
      case FNode::Power: {
        RealField4 out = eval(n.kids[0]);
        std::size_t vol = grid->n_sites();
        double* d = out.comp(0);
        int p = n.power;
#pragma omp parallel for schedule(static)
        for (long long i = 0; i < (long long)vol; ++i) {
          double b = d[i], acc = 1.0;
          for (int j = 0; j < p; ++j) acc *= b;
          d[i] = acc;
        }
        return out;
      }
      case FNode::Grad: {
        RealField4 a = eval(n.kids[0]);
        RealField4 out = make_real_field(grid, 4);
        for (int mu = 0; mu < 4; ++mu) {
          RealField4 d = gradient4(a, mu);
          double sign = kEta[mu];  // contravariant gradient d^mu
          double* dst = out.comp(mu);
          const double* src = d.comp(0);
          for (std::size_t i = 0; i < grid->n_sites(); ++i)
            dst[i] = sign * src[i];
        }
        return out;
      }
      case FNode::Deriv: {
        RealField4 a = eval(n.kids[0]);
        return gradient4(a, n.mu);
      }
      case FNode::Eta: {
        RealField4 a = eval(n.kids[0]);
        RealField4 b = eval(n.kids[1]);
        RealField4 out = make_real_field(grid, 1);
        double* dst = out.comp(0);
        std::size_t vol = grid->n_sites();
        for (int mu = 0; mu < 4; ++mu) {
          const double* pa = a.comp(mu);
          const double* pb = b.comp(mu);
          double sign = kEta[mu];
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < (long long)vol; ++i)
            dst[i] += sign * pa[i] * pb[i];
        }
        return out;
      }
      case FNode::Contr: {
        // out^alpha = a_mu F^{mu alpha}
        RealField4 a = eval(n.kids[0]);
        RealField4 F = eval(n.kids[1]);
        RealField4 out = make_real_field(grid, 4);
        std::size_t vol = grid->n_sites();
        for (int alpha = 0; alpha < 4; ++alpha) {
          double* dst = out.comp(alpha);
          for (int mu = 0; mu < 4; ++mu) {
            if (mu == alpha) continue;
            int p = std::min(mu, alpha), q = std::max(mu, alpha);
            double sgn = (mu < alpha ? 1.0 : -1.0) * kEta[mu];
            const double* pf = F.comp(pair_index(p, q));
            const double* pa = a.comp(mu);
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < (long long)vol; ++i)
              dst[i] += sgn * pa[i] * pf[i];
          }
        }
        return out;
      }
      case FNode::Inner2: {
        // F_{mu nu} G^{mu nu}: each stored pair counts twice; 0i pairs pick
        // up eta0*etai = -1, ij pairs +1
        RealField4 A = eval(n.kids[0]);
        RealField4 B = eval(n.kids[1]);
        RealField4 out = make_real_field(grid, 1);
        double* dst = out.comp(0);
        std::size_t vol = grid->n_sites();
        for (int c = 0; c < 6; ++c) {
          double sgn = (c < 3 ? -2.0 : 2.0);
          const double* pa = A.comp(c);
          const double* pb = B.comp(c);
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < (long long)vol; ++i)
            dst[i] += sgn * pa[i] * pb[i];
        }
        return out;
      }
      case FNode::Eps2: {
        // out^alpha = eps^{mu rho sig alpha} a_mu F_{rho sig}
        RealField4 a = eval(n.kids[0]);
        RealField4 F = eval(n.kids[1]);
        RealField4 out = make_real_field(grid, 4);
        std::size_t vol = grid->n_sites();
        for (const Perm& pm : all_perms()) {
          int mu = pm.p[0], rho = pm.p[1], sig = pm.p[2], alpha = pm.p[3];
          int p = std::min(rho, sig), q = std::max(rho, sig);
          double sgn = pm.sign * kEta[mu] * kEta[rho] * kEta[sig] *
                       (rho < sig ? 1.0 : -1.0);
          const double* pa = a.comp(mu);
          const double* pf = F.comp(pair_index(p, q));
          double* dst = out.comp(alpha);
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < (long long)vol; ++i)
            dst[i] += sgn * pa[i] * pf[i];
        }
        return out;
      }
      case FNode::EpsDual: {
        // out^{mu alpha} = (1/2) eps^{mu alpha nu beta} F_{nu beta}
        RealField4 F = eval(n.kids[0]);
        RealField4 out = make_real_field(grid, 6);
        std::size_t vol = grid->n_sites();
        for (const Perm& pm : all_perms()) {
          int mu = pm.p[0], alpha = pm.p[1], nu = pm.p[2], beta = pm.p[3];
          if (mu > alpha) continue;  // store independent components only
          int p = std::min(nu, beta), q = std::max(nu, beta);
          double sgn = 0.5 * pm.sign * kEta[nu] * kEta[beta] *
                       (nu < beta ? 1.0 : -1.0);
          const double* pf = F.comp(pair_index(p, q));
          double* dst = out.comp(pair_index(mu, alpha));
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < (long long)vol; ++i)
            dst[i] += sgn * pf[i];
        }
        return out;
      }
      case FNode::Div: {
        // out^alpha = d_mu F^{mu alpha}
        RealField4 F = eval(n.kids[0]);
        RealField4 out = make_real_field(grid, 4);
        std::size_t vol = grid->n_sites();
        for (int alpha = 0; alpha < 4; ++alpha) {
          double* dst = out.comp(alpha);
          for (int mu = 0; mu < 4; ++mu) {
            if (mu == alpha) continue;
            int p = std::min(mu, alpha), q = std::max(mu, alpha);
            double sgn = mu < alpha ? 1.0 : -1.0;
            RealField4 comp = make_real_field(grid, 1);
            std::copy_n(F.comp(pair_index(p, q)), vol, comp.comp(0));
            RealField4 d = gradient4(comp, mu);
            const double* src = d.comp(0);
#pragma omp parallel for schedule(static)
            for (long long i = 0; i < (long long)vol; ++i)
              dst[i] += sgn * src[i];
          }
        }
        return out;
      }
      case FNode::Wedge: {
        // out^{mu nu} = (1/2)(a^mu b^nu - a^nu b^mu)
        RealField4 a = eval(n.kids[0]);
        RealField4 b = eval(n.kids[1]);
        RealField4 out = make_real_field(grid, 6);
        std::size_t vol = grid->n_sites();
        for (int c = 0; c < 6; ++c) {
          int p = kPair[c][0], q = kPair[c][1];
          const double* ap = a.comp(p);
          const double* aq = a.comp(q);
          const double* bp = b.comp(p);
          const double* bq = b.comp(q);
          double* dst = out.comp(c);
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < (long long)vol; ++i)
            dst[i] = 0.5 * (ap[i] * bq[i] - aq[i] * bp[i]);
        }
        return out;
      }
      case FNode::DWedge: {
        // out^{mu nu} = (1/2)(d^mu a^nu - d^nu a^mu)
        RealField4 a = eval(n.kids[0]);
        RealField4 out = make_real_field(grid, 6);
        std::size_t vol = grid->n_sites();
        RealField4 grads[4];  // d_mu applied to all components of a
        for (int mu = 0; mu < 4; ++mu) grads[mu] = gradient4(a, mu);
        for (int c = 0; c < 6; ++c) {
          int p = kPair[c][0], q = kPair[c][1];
          const double* dpq = grads[p].comp(q);  // d_p a^q
          const double* dqp = grads[q].comp(p);
          double sp = kEta[p], sq = kEta[q];
          double* dst = out.comp(c);
#pragma omp parallel for schedule(static)
          for (long long i = 0; i < (long long)vol; ++i)
            dst[i] = 0.5 * (sp * dpq[i] - sq * dqp[i]);
        }
        return out;
      }
      case FNode::Lower: {
        RealField4 out = eval(n.kids[0]);
        std::size_t vol = grid->n_sites();
        if (out.components == 4) {
          for (int mu = 1; mu < 4; ++mu) {
            double* d = out.comp(mu);
            for (std::size_t i = 0; i < vol; ++i) d[i] = -d[i];
          }
        } else {
          for (int c = 0; c < 3; ++c) {  // components 0i flip sign; ij do not
            double* d = out.comp(c);
            for (std::size_t i = 0; i < vol; ++i) d[i] = -d[i];
          }
        }
        return out;
      }
    }
    throw std::logic_error("unreachable functional node");
  }
};

}  // namespace

LocalFunctional parse_functional(const std::string& text,
                                 const std::map<std::string, Rank>& slot_ranks) {
  auto toks = tokenize(text);
  Parser p{toks, slot_ranks};
  LocalFunctional out;
  out.root = p.expr();
  if (p.peek().type != Token::End) p.fail("trailing input");
  out.out_rank = out.root.rank;
  std::set<std::string> slots;
  collect_slots(out.root, slots);
  out.slots.assign(slots.begin(), slots.end());
  out.canonical.clear();
  print_node(out.root, out.canonical);
  return out;
}

std::string canonical_print(const LocalFunctional& P) { return P.canonical; }

RealField4 eval_functional(
    const LocalFunctional& P,
    const std::map<std::string, const RealField4*>& bindings) {
  std::shared_ptr<const Grid> grid;
  for (const auto& [name, f] : bindings) {
    if (!f) continue;
    if (!grid) grid = f->grid;
    else if (grid.get() != f->grid.get())
      throw std::invalid_argument("bindings on different grids");
  }
  if (!grid) throw std::invalid_argument("no bound fields");
  Evaluator ev{bindings, grid};
  return ev.eval(P.root);
}

}  // namespace nlqft
