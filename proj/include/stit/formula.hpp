#pragma once

// Object language of the deontic STIT logics: NNF formulae, the surface
// syntax accepted from users, parsing, rendering, and normalization.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace stit {

/// Agent index, 1-based.
struct AgentId {
  int index = 1;

  friend auto operator<=>(const AgentId&, const AgentId&) = default;
};

/// Atom used to expand `top` and `bot`.
inline constexpr std::string_view kTopAtom = "p0";

namespace detail {
inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
  return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}
}  // namespace detail

enum class Op : std::uint8_t {
  Atom,
  NegAtom,
  Or,
  And,
  Box,
  Diamond,
  AgBox,
  AgDiamond,
  Ought,
  Perm,
};

/// Immutable formula in negation normal form. Nodes are shared; copies are
/// cheap and safe to hand across threads.
class Formula {
 public:
  struct Node {
    Op op;
    int agent;  // 0 when the operator is not agent-indexed
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
    std::size_t hash;
    int depth;  // modal depth
    int size;
  };

  Formula() = default;

  static Formula atom(std::string name) { return leaf(Op::Atom, std::move(name)); }
  static Formula neg_atom(std::string name) { return leaf(Op::NegAtom, std::move(name)); }
  static Formula disj(const Formula& a, const Formula& b) { return binary(Op::Or, a, b); }
  static Formula conj(const Formula& a, const Formula& b) { return binary(Op::And, a, b); }
  static Formula box(const Formula& a) { return unary(Op::Box, 0, a); }
  static Formula diamond(const Formula& a) { return unary(Op::Diamond, 0, a); }
  static Formula ag_box(AgentId i, const Formula& a) { return unary(Op::AgBox, i.index, a); }
  static Formula ag_diamond(AgentId i, const Formula& a) { return unary(Op::AgDiamond, i.index, a); }
  static Formula ought(AgentId i, const Formula& a) { return unary(Op::Ought, i.index, a); }
  static Formula perm(AgentId i, const Formula& a) { return unary(Op::Perm, i.index, a); }

  bool valid() const { return node_ != nullptr; }
  Op op() const { return node_->op; }
  AgentId agent() const { return AgentId{node_->agent}; }
  const std::string& name() const { return node_->name; }
  Formula lhs() const { return Formula(node_->lhs); }
  Formula rhs() const { return Formula(node_->rhs); }
  /// Operand of a unary operator.
  Formula body() const { return Formula(node_->lhs); }
  std::size_t hash() const { return node_->hash; }
  int modal_depth() const { return node_->depth; }
  int size() const { return node_->size; }
  const Node* node() const { return node_.get(); }

  bool is_literal() const { return op() == Op::Atom || op() == Op::NegAtom; }
  bool is_binary() const { return op() == Op::Or || op() == Op::And; }

  friend bool operator==(const Formula& a, const Formula& b) {
    return compare(a.node_.get(), b.node_.get()) == 0;
  }
  friend bool operator<(const Formula& a, const Formula& b) {
    return compare(a.node_.get(), b.node_.get()) < 0;
  }

  /// Structural total order; deterministic across runs.
  static int compare(const Node* a, const Node* b) {
    if (a == b) return 0;
    if (a == nullptr) return -1;
    if (b == nullptr) return 1;
    if (a->op != b->op) return a->op < b->op ? -1 : 1;
    if (a->agent != b->agent) return a->agent < b->agent ? -1 : 1;
    if (a->hash != b->hash) return a->hash < b->hash ? -1 : 1;
    if (int c = a->name.compare(b->name); c != 0) return c < 0 ? -1 : 1;
    if (int c = compare(a->lhs.get(), b->lhs.get()); c != 0) return c;
    return compare(a->rhs.get(), b->rhs.get());
  }

 private:
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}

  static Formula leaf(Op op, std::string name) {
    std::size_t h = detail::hash_mix(static_cast<std::size_t>(op), std::hash<std::string>{}(name));
    return Formula(std::make_shared<const Node>(Node{op, 0, std::move(name), nullptr, nullptr, h, 0, 1}));
  }
  static Formula unary(Op op, int agent, const Formula& a) {
    std::size_t h = detail::hash_mix(detail::hash_mix(static_cast<std::size_t>(op), static_cast<std::size_t>(agent)), a.hash());
    return Formula(std::make_shared<const Node>(
        Node{op, agent, {}, a.node_, nullptr, h, a.modal_depth() + 1, a.size() + 1}));
  }
  static Formula binary(Op op, const Formula& a, const Formula& b) {
    std::size_t h = detail::hash_mix(detail::hash_mix(static_cast<std::size_t>(op), a.hash()), b.hash());
    return Formula(std::make_shared<const Node>(Node{op, 0, {}, a.node_, b.node_, h,
                                                     std::max(a.modal_depth(), b.modal_depth()),
                                                     a.size() + b.size() + 1}));
  }

  std::shared_ptr<const Node> node_;
};

struct FormulaHash {
  std::size_t operator()(const Formula& f) const { return f.hash(); }
};

/// Full user-facing syntax: NNF connectives plus arbitrary negation,
/// implication, equivalence, constants and the deliberative obligations.
class Surface {
 public:
  enum class Kind : std::uint8_t {
    Atom,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Top,
    Bot,
    Box,
    Diamond,
    AgBox,
    AgDiamond,
    Ought,
    Perm,
    DelibOught,
    CtrlOught,
  };

  struct Node {
    Kind kind;
    int agent;
    std::string name;
    std::shared_ptr<const Node> lhs;
    std::shared_ptr<const Node> rhs;
  };

  Surface() = default;

  static Surface atom(std::string name) { return make(Kind::Atom, 0, std::move(name), {}, {}); }
  static Surface top() { return make(Kind::Top, 0, {}, {}, {}); }
  static Surface bot() { return make(Kind::Bot, 0, {}, {}, {}); }
  static Surface unary(Kind k, const Surface& a, int agent = 0) { return make(k, agent, {}, a.node_, {}); }
  static Surface binary(Kind k, const Surface& a, const Surface& b) { return make(k, 0, {}, a.node_, b.node_); }
  static Surface negation(const Surface& a) { return unary(Kind::Not, a); }
  static Surface implies(const Surface& a, const Surface& b) { return binary(Kind::Implies, a, b); }

  bool valid() const { return node_ != nullptr; }
  Kind kind() const { return node_->kind; }
  AgentId agent() const { return AgentId{node_->agent}; }
  const std::string& name() const { return node_->name; }
  Surface lhs() const { return Surface(node_->lhs); }
  Surface rhs() const { return Surface(node_->rhs); }
  Surface body() const { return Surface(node_->lhs); }

  bool is_binary() const {
    switch (kind()) {
      case Kind::And:
      case Kind::Or:
      case Kind::Implies:
      case Kind::Iff:
        return true;
      default:
        return false;
    }
  }

  friend bool operator==(const Surface& a, const Surface& b) { return equal(a.node_.get(), b.node_.get()); }

 private:
  explicit Surface(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Surface make(Kind k, int agent, std::string name, std::shared_ptr<const Node> l,
                      std::shared_ptr<const Node> r) {
    return Surface(std::make_shared<const Node>(Node{k, agent, std::move(name), std::move(l), std::move(r)}));
  }
  static bool equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (a == nullptr || b == nullptr) return false;
    return a->kind == b->kind && a->agent == b->agent && a->name == b->name && equal(a->lhs.get(), b->lhs.get()) &&
           equal(a->rhs.get(), b->rhs.get());
  }

  std::shared_ptr<const Node> node_;
};

/// Lifts an NNF formula into the surface syntax without changing its shape
/// (NegAtom becomes Not(Atom)).
inline Surface to_surface(const Formula& f) {
  using K = Surface::Kind;
  switch (f.op()) {
    case Op::Atom:
      return Surface::atom(f.name());
    case Op::NegAtom:
      return Surface::negation(Surface::atom(f.name()));
    case Op::Or:
      return Surface::binary(K::Or, to_surface(f.lhs()), to_surface(f.rhs()));
    case Op::And:
      return Surface::binary(K::And, to_surface(f.lhs()), to_surface(f.rhs()));
    case Op::Box:
      return Surface::unary(K::Box, to_surface(f.body()));
    case Op::Diamond:
      return Surface::unary(K::Diamond, to_surface(f.body()));
    case Op::AgBox:
      return Surface::unary(K::AgBox, to_surface(f.body()), f.agent().index);
    case Op::AgDiamond:
      return Surface::unary(K::AgDiamond, to_surface(f.body()), f.agent().index);
    case Op::Ought:
      return Surface::unary(K::Ought, to_surface(f.body()), f.agent().index);
    case Op::Perm:
      return Surface::unary(K::Perm, to_surface(f.body()), f.agent().index);
  }
  return {};
}

// ---------------------------------------------------------------------------
// Negation and normalization

/// Dual negation: swaps literals, the binary connectives and each modality
/// with its dual.
inline Formula negate(const Formula& f) {
  switch (f.op()) {
    case Op::Atom:
      return Formula::neg_atom(f.name());
    case Op::NegAtom:
      return Formula::atom(f.name());
    case Op::Or:
      return Formula::conj(negate(f.lhs()), negate(f.rhs()));
    case Op::And:
      return Formula::disj(negate(f.lhs()), negate(f.rhs()));
    case Op::Box:
      return Formula::diamond(negate(f.body()));
    case Op::Diamond:
      return Formula::box(negate(f.body()));
    case Op::AgBox:
      return Formula::ag_diamond(f.agent(), negate(f.body()));
    case Op::AgDiamond:
      return Formula::ag_box(f.agent(), negate(f.body()));
    case Op::Ought:
      return Formula::perm(f.agent(), negate(f.body()));
    case Op::Perm:
      return Formula::ought(f.agent(), negate(f.body()));
  }
  return f;
}

namespace detail {
inline Formula nnf(const Surface& s, bool positive) {
  using K = Surface::Kind;
  auto pol = [&](const Formula& g) { return positive ? g : negate(g); };
  switch (s.kind()) {
    case K::Atom:
      return positive ? Formula::atom(s.name()) : Formula::neg_atom(s.name());
    case K::Not:
      return nnf(s.body(), !positive);
    case K::Top:
    case K::Bot: {
      std::string p(kTopAtom);
      Formula t = Formula::disj(Formula::atom(p), Formula::neg_atom(p));
      Formula b = Formula::conj(Formula::atom(p), Formula::neg_atom(p));
      return (s.kind() == K::Top) == positive ? t : b;
    }
    case K::And:
      return positive ? Formula::conj(nnf(s.lhs(), true), nnf(s.rhs(), true))
                      : Formula::disj(nnf(s.lhs(), false), nnf(s.rhs(), false));
    case K::Or:
      return positive ? Formula::disj(nnf(s.lhs(), true), nnf(s.rhs(), true))
                      : Formula::conj(nnf(s.lhs(), false), nnf(s.rhs(), false));
    case K::Implies:
      return positive ? Formula::disj(nnf(s.lhs(), false), nnf(s.rhs(), true))
                      : Formula::conj(nnf(s.lhs(), true), nnf(s.rhs(), false));
    case K::Iff: {
      // (a -> b) & (b -> a)
      Formula a = nnf(s.lhs(), true), b = nnf(s.rhs(), true);
      Formula expanded = Formula::conj(Formula::disj(negate(a), b), Formula::disj(negate(b), a));
      return pol(expanded);
    }
    case K::Box:
      return pol(Formula::box(nnf(s.body(), true)));
    case K::Diamond:
      return pol(Formula::diamond(nnf(s.body(), true)));
    case K::AgBox:
      return pol(Formula::ag_box(s.agent(), nnf(s.body(), true)));
    case K::AgDiamond:
      return pol(Formula::ag_diamond(s.agent(), nnf(s.body(), true)));
    case K::Ought:
      return pol(Formula::ought(s.agent(), nnf(s.body(), true)));
    case K::Perm:
      return pol(Formula::perm(s.agent(), nnf(s.body(), true)));
    case K::DelibOught: {
      // O{i} f & <> ~f
      Formula b = nnf(s.body(), true);
      return pol(Formula::conj(Formula::ought(s.agent(), b), Formula::diamond(negate(b))));
    }
    case K::CtrlOught: {
      // O{i} f & <>[i] ~f
      Formula b = nnf(s.body(), true);
      return pol(Formula::conj(Formula::ought(s.agent(), b), Formula::diamond(Formula::ag_box(s.agent(), negate(b)))));
    }
  }
  return {};
}
}  // namespace detail

/// Normalizes a surface formula into NNF, expanding every abbreviation.
inline Formula to_nnf(const Surface& s) { return detail::nnf(s, true); }

// ---------------------------------------------------------------------------
// Inspection helpers

inline void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.is_literal()) {
    out.insert(f.name());
    return;
  }
  collect_atoms(f.lhs(), out);
  if (f.is_binary()) collect_atoms(f.rhs(), out);
}

inline std::set<std::string> atoms_of(const Formula& f) {
  std::set<std::string> out;
  collect_atoms(f, out);
  return out;
}

inline int max_agent(const Formula& f) {
  int m = f.node()->agent;
  if (f.is_literal()) return m;
  m = std::max(m, max_agent(f.lhs()));
  if (f.is_binary()) m = std::max(m, max_agent(f.rhs()));
  return m;
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

// Higher binds tighter.
inline int precedence(Surface::Kind k) {
  using K = Surface::Kind;
  switch (k) {
    case K::Iff:
      return 1;
    case K::Implies:
      return 2;
    case K::Or:
      return 3;
    case K::And:
      return 4;
    default:
      return 5;
  }
}

inline bool is_bracket_modality(Surface::Kind k) {
  using K = Surface::Kind;
  return k == K::Box || k == K::Diamond || k == K::AgBox || k == K::AgDiamond;
}

inline void render_into(const Surface& s, std::string& out) {
  using K = Surface::Kind;
  auto child = [&](const Surface& c, bool parens) {
    if (parens) out += '(';
    render_into(c, out);
    if (parens) out += ')';
  };
  auto prefix = [&](const std::string& p) {
    out += p;
    Surface b = s.body();
    if (b.is_binary()) {
      out += ' ';
      child(b, true);
      return;
    }
    if (!is_bracket_modality(b.kind())) out += ' ';
    child(b, false);
  };
  auto ag = [&](const char* open, const char* close) {
    return std::string(open) + std::to_string(s.agent().index) + close;
  };
  switch (s.kind()) {
    case K::Atom:
      out += s.name();
      return;
    case K::Top:
      out += "top";
      return;
    case K::Bot:
      out += "bot";
      return;
    case K::Not:
      out += '~';
      child(s.body(), s.body().is_binary());
      return;
    case K::And:
    case K::Or:
    case K::Implies:
    case K::Iff: {
      int p = precedence(s.kind());
      // right-associative: a left operand of equal precedence needs parens
      child(s.lhs(), s.lhs().is_binary() && precedence(s.lhs().kind()) <= p);
      out += s.kind() == K::And ? " & " : s.kind() == K::Or ? " | " : s.kind() == K::Implies ? " -> " : " <-> ";
      child(s.rhs(), s.rhs().is_binary() && precedence(s.rhs().kind()) < p);
      return;
    }
    case K::Box:
      prefix("[]");
      return;
    case K::Diamond:
      prefix("<>");
      return;
    case K::AgBox:
      prefix(ag("[", "]"));
      return;
    case K::AgDiamond:
      prefix(ag("<", ">"));
      return;
    case K::Ought:
      prefix(ag("O{", "}"));
      return;
    case K::Perm:
      prefix(ag("P{", "}"));
      return;
    case K::DelibOught:
      prefix(ag("Od{", "}"));
      return;
    case K::CtrlOught:
      prefix(ag("Oc{", "}"));
      return;
  }
}
}  // namespace detail

inline std::string render(const Surface& s) {
  std::string out;
  detail::render_into(s, out);
  return out;
}

inline std::string render(const Formula& f) { return render(to_surface(f)); }

// ---------------------------------------------------------------------------
// Parsing

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at position " + std::to_string(position)), position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

namespace detail {

class FormulaParser {
 public:
  FormulaParser(std::string_view text, int agents) : text_(text), agents_(agents) {}

  Surface parse_all() {
    Surface s = parse_iff();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected input '" + std::string(1, text_[pos_]) + "'");
    return s;
  }

  // Parses one formula and stops at the first token that cannot continue it.
  Surface parse_prefix() { return parse_iff(); }
  std::size_t position() const { return pos_; }

 private:
  using K = Surface::Kind;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool accept(std::string_view tok) {
    skip_ws();
    if (text_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  Surface parse_iff() {
    Surface lhs = parse_implies();
    if (accept("<->")) return Surface::binary(K::Iff, lhs, parse_iff());
    return lhs;
  }
  Surface parse_implies() {
    Surface lhs = parse_or();
    if (accept("->")) return Surface::binary(K::Implies, lhs, parse_implies());
    return lhs;
  }
  Surface parse_or() {
    Surface lhs = parse_and();
    if (accept("|")) return Surface::binary(K::Or, lhs, parse_or());
    return lhs;
  }
  Surface parse_and() {
    Surface lhs = parse_unary();
    if (accept("&")) return Surface::binary(K::And, lhs, parse_and());
    return lhs;
  }

  int parse_agent(char close) {
    skip_ws();
    std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected agent index");
    int agent = std::stoi(std::string(text_.substr(start, pos_ - start)));
    if (agent < 1 || agent > agents_) {
      pos_ = start;
      fail("agent index " + std::to_string(agent) + " out of range 1.." + std::to_string(agents_));
    }
    skip_ws();
    if (pos_ >= text_.size() || text_[pos_] != close) fail(std::string("expected '") + close + "'");
    ++pos_;
    return agent;
  }

  Surface parse_unary() {
    skip_ws();
    if (pos_ >= text_.size()) fail("unexpected end of input");
    char c = text_[pos_];
    if (c == '~') {
      ++pos_;
      return Surface::negation(parse_unary());
    }
    if (accept("[]")) return Surface::unary(K::Box, parse_unary());
    if (accept("<>")) return Surface::unary(K::Diamond, parse_unary());
    if (c == '[' || c == '<') {
      ++pos_;
      int agent = parse_agent(c == '[' ? ']' : '>');
      return Surface::unary(c == '[' ? K::AgBox : K::AgDiamond, parse_unary(), agent);
    }
    if (c == '(') {
      ++pos_;
      Surface inner = parse_iff();
      if (!accept(")")) fail("expected ')'");
      return inner;
    }
    for (auto [tok, kind] : {std::pair{"Od{", K::DelibOught}, std::pair{"Oc{", K::CtrlOught},
                             std::pair{"O{", K::Ought}, std::pair{"P{", K::Perm}}) {
      if (accept(tok)) {
        int agent = parse_agent('}');
        return Surface::unary(kind, parse_unary(), agent);
      }
    }
    if (c >= 'a' && c <= 'z') {
      std::size_t start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
        ++pos_;
      std::string word(text_.substr(start, pos_ - start));
      if (word == "top") return Surface::top();
      if (word == "bot") return Surface::bot();
      return Surface::atom(std::move(word));
    }
    fail("unexpected character '" + std::string(1, c) + "'");
  }

  std::string_view text_;
  int agents_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses the ASCII formula syntax. Throws ParseError with the offending
/// position.
inline Surface parse(std::string_view text, int agents) {
  return detail::FormulaParser(text, agents).parse_all();
}

/// parse followed by to_nnf.
inline Formula parse_nnf(std::string_view text, int agents) { return to_nnf(parse(text, agents)); }

}  // namespace stit
