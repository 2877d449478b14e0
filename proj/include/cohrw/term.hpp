#pragma once

// First-order terms over a finite signature, with arity-indexed variables.
// Every term carries its ambient arity explicitly: a variable x_i of arity n
// is only valid when 1 <= i <= n, and all children of an application share
// the parent's arity.

#include <algorithm>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cohrw {

struct ArityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : std::runtime_error {
  size_t offset;
  SyntaxError(const std::string& msg, size_t off)
      : std::runtime_error(msg + " at offset " + std::to_string(off)), offset(off) {}
};

struct Signature {
  struct Symbol {
    std::string name;
    int arity;
  };
  std::vector<Symbol> symbols;

  int add(const std::string& name, int arity) {
    if (find(name)) throw std::invalid_argument("duplicate symbol: " + name);
    if (arity < 0) throw ArityError("negative arity for symbol " + name);
    symbols.push_back({name, arity});
    return static_cast<int>(symbols.size()) - 1;
  }

  std::optional<int> find(const std::string& name) const {
    for (size_t i = 0; i < symbols.size(); ++i)
      if (symbols[i].name == name) return static_cast<int>(i);
    return std::nullopt;
  }

  int arity_of(const std::string& name) const {
    auto i = find(name);
    if (!i) throw std::invalid_argument("unknown symbol: " + name);
    return symbols[*i].arity;
  }
};

// A term node is either a variable (var >= 1), the context hole (var == kHole,
// only permitted inside Context bodies), or an application (var == 0).
class Term {
 public:
  static constexpr int kHole = -1;

  Term() : arity_(0), var_(0) {}

  static Term variable(int arity, int index) {
    if (index < 1 || index > arity)
      throw ArityError("variable index " + std::to_string(index) +
                       " out of range for arity " + std::to_string(arity));
    Term t;
    t.arity_ = arity;
    t.var_ = index;
    return t;
  }

  static Term hole(int arity) {
    Term t;
    t.arity_ = arity;
    t.var_ = kHole;
    return t;
  }

  static Term app(int arity, std::string sym, std::vector<Term> args) {
    Term t;
    t.arity_ = arity;
    t.var_ = 0;
    t.sym_ = std::move(sym);
    for (const Term& a : args)
      if (a.arity() != arity)
        throw ArityError("child arity mismatch under " + t.sym_);
    t.args_ = std::move(args);
    return t;
  }

  int arity() const { return arity_; }
  bool is_var() const { return var_ >= 1; }
  bool is_hole() const { return var_ == kHole; }
  bool is_app() const { return var_ == 0; }
  int var_index() const { return var_; }
  const std::string& symbol() const { return sym_; }
  const std::vector<Term>& args() const { return args_; }

  bool operator==(const Term& o) const {
    return arity_ == o.arity_ && var_ == o.var_ && sym_ == o.sym_ && args_ == o.args_;
  }
  bool operator!=(const Term& o) const { return !(*this == o); }

  // Number of nodes, counting variables, holes and nullary symbols.
  int size() const {
    int n = 1;
    for (const Term& a : args_) n += a.size();
    return n;
  }

  // Re-ambient a term to a different arity. Explicit coercion: fails if some
  // variable index exceeds the new arity.
  Term with_arity(int arity) const {
    Term t(*this);
    t.set_arity(arity);
    return t;
  }

 private:
  void set_arity(int arity) {
    if (var_ >= 1 && var_ > arity)
      throw ArityError("variable x" + std::to_string(var_) +
                       " exceeds new arity " + std::to_string(arity));
    arity_ = arity;
    for (Term& a : args_) a.set_arity(arity);
  }

  int arity_;
  int var_;
  std::string sym_;
  std::vector<Term> args_;
};

inline int occurrences(const Term& t, int index) {
  if (index < 1 || index > t.arity())
    throw ArityError("occurrence index out of range");
  if (t.is_var()) return t.var_index() == index ? 1 : 0;
  int n = 0;
  for (const Term& a : t.args()) n += occurrences(a, index);
  return n;
}

inline int hole_occurrences(const Term& t) {
  if (t.is_hole()) return 1;
  int n = 0;
  for (const Term& a : t.args()) n += hole_occurrences(a);
  return n;
}

// Left-to-right in-order listing of variable occurrences, with multiplicity.
inline void vars_into(const Term& t, std::vector<int>& out) {
  if (t.is_var()) {
    out.push_back(t.var_index());
    return;
  }
  for (const Term& a : t.args()) vars_into(a, out);
}

inline std::vector<int> vars(const Term& t) {
  std::vector<int> out;
  vars_into(t, out);
  return out;
}

inline bool is_affine(const Term& t) {
  std::vector<int> vs = vars(t);
  std::sort(vs.begin(), vs.end());
  return std::adjacent_find(vs.begin(), vs.end()) == vs.end();
}

// A substitution n -> m: m component terms, each of arity n.
struct Substitution {
  int source_arity = 0;
  std::vector<Term> components;

  static Substitution identity(int n) {
    Substitution f;
    f.source_arity = n;
    for (int i = 1; i <= n; ++i) f.components.push_back(Term::variable(n, i));
    return f;
  }

  int target_arity() const { return static_cast<int>(components.size()); }

  bool operator==(const Substitution& o) const {
    return source_arity == o.source_arity && components == o.components;
  }

  void check() const {
    for (const Term& c : components)
      if (c.arity() != source_arity) throw ArityError("substitution component arity mismatch");
  }
};

// t[f]: t of arity m, f : n -> m, result of arity n.
inline Term substitute(const Term& t, const Substitution& f) {
  if (t.arity() != f.target_arity())
    throw ArityError("substitute: term arity " + std::to_string(t.arity()) +
                     " does not match substitution target arity " +
                     std::to_string(f.target_arity()));
  if (t.is_hole()) return Term::hole(f.source_arity);
  if (t.is_var()) return f.components[t.var_index() - 1];
  std::vector<Term> args;
  args.reserve(t.args().size());
  for (const Term& a : t.args()) args.push_back(substitute(a, f));
  return Term::app(f.source_arity, t.symbol(), std::move(args));
}

// compose_subst(f : n -> m, g : m -> k) = n -> k, component j = g_j[f].
inline Substitution compose_subst(const Substitution& f, const Substitution& g) {
  if (f.target_arity() != g.source_arity)
    throw ArityError("compose_subst: arities do not chain");
  Substitution h;
  h.source_arity = f.source_arity;
  h.components.reserve(g.components.size());
  for (const Term& u : g.components) h.components.push_back(substitute(u, f));
  return h;
}

// A one-hole context of arity n.
struct Context {
  int arity = 0;
  Term body;  // over {x_1..x_n, hole}, hole occurring exactly once

  static Context identity(int n) { return Context{n, Term::hole(n)}; }

  void check() const {
    if (body.arity() != arity) throw ArityError("context body arity mismatch");
    if (hole_occurrences(body) != 1)
      throw std::invalid_argument("context must contain exactly one hole");
  }

  bool operator==(const Context& o) const { return arity == o.arity && body == o.body; }
};

inline Term plug_impl(const Term& body, const Term& t) {
  if (body.is_hole()) return t;
  if (body.is_var()) return body;
  std::vector<Term> args;
  args.reserve(body.args().size());
  for (const Term& a : body.args()) args.push_back(plug_impl(a, t));
  return Term::app(body.arity(), body.symbol(), std::move(args));
}

inline Term plug(const Context& C, const Term& t) {
  if (t.arity() != C.arity) throw ArityError("plug: arity mismatch");
  return plug_impl(C.body, t);
}

// D o C for contexts: substitute the hole of D by the body of C.
inline Context compose_context(const Context& D, const Context& C) {
  if (D.arity != C.arity) throw ArityError("compose_context: arity mismatch");
  return Context{D.arity, plug_impl(D.body, C.body)};
}

// A bicontext (C, f) with C of arity n and f : n -> k acts on terms of
// arity k by t |-> C[t o f].
struct Bicontext {
  Context context;
  Substitution subst;

  bool operator==(const Bicontext& o) const {
    return context == o.context && subst == o.subst;
  }
};

inline Term bicontext_apply(const Bicontext& B, const Term& t) {
  return plug(B.context, substitute(t, B.subst));
}

// The composite bicontext is defined as the unique bicontext whose action is
// the composite of the actions: (D, g) after (C, f) maps t to D[C[t o f] o g].
inline Bicontext compose_bicontext(const Bicontext& outer, const Bicontext& inner) {
  // C[t o f] has arity n = inner context arity; the outer action substitutes
  // it by g : p -> n and plugs into D. The resulting context is
  // D o (C substituted by g extended with a hole), and the substitution is
  // f o g.
  Substitution g_hole = outer.subst;  // p -> n
  Context inner_g{g_hole.source_arity, substitute(inner.context.body, g_hole)};
  return Bicontext{compose_context(outer.context, inner_g),
                   compose_subst(outer.subst, inner.subst)};
}

// ---------------------------------------------------------------------------
// Text syntax.
//   term := var | sym "(" term ("," term)* ")" | sym      (nullary written bare)
//   var  := "x" digits                                    (1-indexed)
// Whitespace insignificant.

inline std::string print_term(const Term& t) {
  if (t.is_hole()) return "[]";
  if (t.is_var()) return "x" + std::to_string(t.var_index());
  if (t.args().empty()) return t.symbol();
  std::string s = t.symbol() + "(";
  for (size_t i = 0; i < t.args().size(); ++i) {
    if (i) s += ",";
    s += print_term(t.args()[i]);
  }
  return s + ")";
}

namespace detail {

struct TermParser {
  const std::string& text;
  const Signature& sig;
  int arity;
  size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool ident_char(char c) const {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < text.size() && ident_char(text[pos])) ++pos;
    if (pos == start) throw SyntaxError("expected identifier", start);
    return text.substr(start, pos - start);
  }

  Term term() {
    skip_ws();
    size_t start = pos;
    std::string name = ident();
    if (name.size() >= 2 && name[0] == 'x' &&
        std::all_of(name.begin() + 1, name.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      int idx = std::stoi(name.substr(1));
      if (idx < 1 || idx > arity)
        throw SyntaxError("variable x" + std::to_string(idx) + " out of range for arity " +
                          std::to_string(arity), start);
      return Term::variable(arity, idx);
    }
    auto si = sig.find(name);
    if (!si) throw SyntaxError("unknown symbol '" + name + "'", start);
    int want = sig.symbols[*si].arity;
    std::vector<Term> args;
    skip_ws();
    if (pos < text.size() && text[pos] == '(') {
      ++pos;
      skip_ws();
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
      } else {
        for (;;) {
          args.push_back(term());
          skip_ws();
          if (pos < text.size() && text[pos] == ',') {
            ++pos;
            continue;
          }
          if (pos < text.size() && text[pos] == ')') {
            ++pos;
            break;
          }
          throw SyntaxError("expected ',' or ')'", pos);
        }
      }
    }
    if (static_cast<int>(args.size()) != want)
      throw SyntaxError("symbol '" + name + "' expects " + std::to_string(want) +
                        " arguments, got " + std::to_string(args.size()), start);
    return Term::app(arity, name, std::move(args));
  }
};

}  // namespace detail

inline Term parse_term(const std::string& text, int arity, const Signature& sig) {
  detail::TermParser p{text, sig, arity};
  Term t = p.term();
  p.skip_ws();
  if (p.pos != text.size()) throw SyntaxError("trailing input", p.pos);
  return t;
}

// Max variable index occurring in the text, for arity inference.
inline int max_var_index(const Term& t) {
  if (t.is_var()) return t.var_index();
  int m = 0;
  for (const Term& a : t.args()) m = std::max(m, max_var_index(a));
  return m;
}

}  // namespace cohrw
