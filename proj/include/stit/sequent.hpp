#pragma once

// Labelled sequents R |- Gamma: relational atoms over labels on the left,
// labelled formulae on the right, plus the path relations that drive the
// side conditions of the calculus.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "stit/disjoint_sets.hpp"
#include "stit/formula.hpp"

namespace stit {

/// Label of a sequent; ids are generation indices and totally ordered.
struct Label {
  std::uint32_t id = 0;

  friend auto operator<=>(const Label&, const Label&) = default;
};

enum class RelKind : std::uint8_t { Box, Ag, Ought };

struct Provenance {
  enum class Source : std::uint8_t { UserGiven, Rule, D5One };
  Source source = Source::UserGiven;
  std::string rule;            // rule name when source == Rule
  std::uint32_t instance = 0;  // D5One instance id when source == D5One

  static Provenance user() { return {}; }
  static Provenance by_rule(std::string name) { return {Source::Rule, std::move(name), 0}; }
  static Provenance d5_one(std::uint32_t id) { return {Source::D5One, "D5One", id}; }
};

/// R_box x y, R_[i] x y or R_(O i) x y.
struct RelAtom {
  RelKind kind = RelKind::Box;
  int agent = 0;  // 0 for Box
  Label from;
  Label to;
  Provenance provenance;

  static RelAtom box(Label x, Label y) { return {RelKind::Box, 0, x, y, {}}; }
  static RelAtom ag(int i, Label x, Label y) { return {RelKind::Ag, i, x, y, {}}; }
  static RelAtom ought(int i, Label x, Label y) { return {RelKind::Ought, i, x, y, {}}; }

  /// Identity ignoring provenance.
  auto key() const { return std::tuple(kind, agent, from, to); }
  bool same_as(const RelAtom& o) const { return key() == o.key(); }
};

struct LabelledFormula {
  Label label;
  Formula formula;

  friend bool operator==(const LabelledFormula& a, const LabelledFormula& b) {
    return a.label == b.label && a.formula == b.formula;
  }
  friend bool operator<(const LabelledFormula& a, const LabelledFormula& b) {
    if (a.label != b.label) return a.label < b.label;
    return a.formula < b.formula;
  }
};

struct LabelledFormulaHash {
  std::size_t operator()(const LabelledFormula& lf) const {
    return detail::hash_mix(lf.formula.hash(), lf.label.id);
  }
};

/// R |- Gamma. Both sides are multisets: equality ignores order and
/// provenance.
struct Sequent {
  std::vector<RelAtom> antecedent;
  std::vector<LabelledFormula> consequent;

  friend bool operator==(const Sequent& a, const Sequent& b) {
    if (a.antecedent.size() != b.antecedent.size() || a.consequent.size() != b.consequent.size()) return false;
    auto keys = [](const Sequent& s) {
      std::vector<std::tuple<RelKind, int, Label, Label>> k;
      for (const auto& r : s.antecedent) k.push_back(r.key());
      std::sort(k.begin(), k.end());
      return k;
    };
    if (keys(a) != keys(b)) return false;
    auto ca = a.consequent, cb = b.consequent;
    std::sort(ca.begin(), ca.end());
    std::sort(cb.begin(), cb.end());
    return ca == cb;
  }
};

/// Lab(R |- Gamma).
inline std::set<Label> labels_of(const Sequent& s) {
  std::set<Label> out;
  for (const auto& r : s.antecedent) {
    out.insert(r.from);
    out.insert(r.to);
  }
  for (const auto& lf : s.consequent) out.insert(lf.label);
  return out;
}

/// A label not occurring in the sequent: one past the largest id.
inline Label fresh_label(const Sequent& s) {
  auto labs = labels_of(s);
  return labs.empty() ? Label{0} : Label{labs.rbegin()->id + 1};
}

// ---------------------------------------------------------------------------
// Paths

/// <i>-path: x = y or a chain of R_[i] atoms read in either direction.
inline bool i_path(std::span<const RelAtom> ant, Label x, Label y, int agent) {
  if (x == y) return true;
  DisjointSets ds;
  for (const auto& r : ant)
    if (r.kind == RelKind::Ag && r.agent == agent) ds.unite(r.from.id, r.to.id);
  return ds.same(x.id, y.id);
}

/// Diamond-path: x = y or a chain of R_box / R_[i] atoms (any agent) read in
/// either direction. Ought atoms never contribute.
inline bool diamond_path(std::span<const RelAtom> ant, Label x, Label y) {
  if (x == y) return true;
  DisjointSets ds;
  for (const auto& r : ant)
    if (r.kind != RelKind::Ought) ds.unite(r.from.id, r.to.id);
  return ds.same(x.id, y.id);
}

// ---------------------------------------------------------------------------
// Text syntax:  Rb(x,y), R1(x,z), RO1(x,y) |- x: O{1} p, y: q

/// Display names for labels; ids without an entry render as "x<id>".
struct LabelNames {
  std::vector<std::string> names;

  std::string operator()(Label l) const {
    if (l.id < names.size() && !names[l.id].empty()) return names[l.id];
    return "x" + std::to_string(l.id);
  }
};

inline std::string render(const RelAtom& r, const LabelNames& names = {}) {
  std::string head = r.kind == RelKind::Box  ? "Rb"
                     : r.kind == RelKind::Ag ? "R" + std::to_string(r.agent)
                                             : "RO" + std::to_string(r.agent);
  return head + "(" + names(r.from) + "," + names(r.to) + ")";
}

inline std::string render(const LabelledFormula& lf, const LabelNames& names = {}) {
  return names(lf.label) + ": " + render(lf.formula);
}

inline std::string render(const Sequent& s, const LabelNames& names = {}) {
  std::string out;
  for (std::size_t i = 0; i < s.antecedent.size(); ++i) {
    if (i) out += ", ";
    out += render(s.antecedent[i], names);
  }
  out += out.empty() ? "|-" : " |-";
  for (std::size_t i = 0; i < s.consequent.size(); ++i) {
    out += i ? ", " : " ";
    out += render(s.consequent[i], names);
  }
  return out;
}

struct ParsedSequent {
  Sequent sequent;
  LabelNames names;
};

/// Parses the textual sequent syntax. Labels receive ids in order of first
/// occurrence.
inline ParsedSequent parse_sequent(std::string_view text, int agents) {
  ParsedSequent out;
  std::map<std::string, std::uint32_t> ids;
  auto label_of = [&](std::string name) {
    auto [it, inserted] = ids.emplace(name, static_cast<std::uint32_t>(ids.size()));
    if (inserted) out.names.names.push_back(std::move(name));
    return Label{it->second};
  };
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  auto is_ident = [](std::string_view s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
  };
  auto split = [](std::string_view s, std::size_t base, auto&& fn) {
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
      if (i < s.size() && (s[i] == '(' )) ++depth;
      if (i < s.size() && (s[i] == ')')) --depth;
      if (i == s.size() || (s[i] == ',' && depth == 0)) {
        fn(s.substr(start, i - start), base + start);
        start = i + 1;
      }
    }
  };

  std::size_t turnstile = text.find("|-");
  if (turnstile == std::string_view::npos) throw ParseError("expected '|-'", 0);
  std::string_view ant = text.substr(0, turnstile);
  std::string_view con = text.substr(turnstile + 2);

  if (!trim(ant).empty()) {
    split(ant, 0, [&](std::string_view item, std::size_t pos) {
      std::string_view a = trim(item);
      std::size_t open = a.find('('), comma = a.find(','), close = a.rfind(')');
      if (open == std::string_view::npos || comma == std::string_view::npos || close != a.size() - 1)
        throw ParseError("malformed relational atom '" + std::string(a) + "'", pos);
      std::string_view head = a.substr(0, open);
      std::string_view x = trim(a.substr(open + 1, comma - open - 1));
      std::string_view y = trim(a.substr(comma + 1, close - comma - 1));
      if (!is_ident(x) || !is_ident(y)) throw ParseError("malformed label in '" + std::string(a) + "'", pos);
      RelAtom r;
      auto agent_of = [&](std::string_view digits) {
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(c); }))
          throw ParseError("unknown relation '" + std::string(head) + "'", pos);
        int i = std::stoi(std::string(digits));
        if (i < 1 || i > agents) throw ParseError("agent index " + std::to_string(i) + " out of range", pos);
        return i;
      };
      if (head == "Rb") {
        r.kind = RelKind::Box;
      } else if (head.substr(0, 2) == "RO") {
        r.kind = RelKind::Ought;
        r.agent = agent_of(head.substr(2));
      } else if (head.substr(0, 1) == "R") {
        r.kind = RelKind::Ag;
        r.agent = agent_of(head.substr(1));
      } else {
        throw ParseError("unknown relation '" + std::string(head) + "'", pos);
      }
      r.from = label_of(std::string(x));
      r.to = label_of(std::string(y));
      out.sequent.antecedent.push_back(r);
    });
  }
  if (!trim(con).empty()) {
    split(con, turnstile + 2, [&](std::string_view item, std::size_t pos) {
      std::size_t colon = item.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected 'label: formula'", pos);
      std::string_view name = trim(item.substr(0, colon));
      if (!is_ident(name)) throw ParseError("malformed label '" + std::string(name) + "'", pos);
      Label l = label_of(std::string(name));
      try {
        out.sequent.consequent.push_back({l, parse_nnf(item.substr(colon + 1), agents)});
      } catch (const ParseError& e) {
        throw ParseError(e.what(), pos + colon + 1 + e.position());
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// Indexed working copy used by rule application and proof search.

/// Record of a D5One application: the atom R_(O i) x y it introduced.
struct D5Record {
  std::uint32_t id;
  int agent;
  Label x;
  Label y;
};

/// A sequent with set semantics and incremental path indexes. Adding an
/// atom or formula that is already present is a no-op. Each search branch
/// owns its own copy.
class SequentState {
 public:
  explicit SequentState(int agents = 1) : agents_(agents), agent_paths_(static_cast<std::size_t>(agents)) {}

  SequentState(const Sequent& s, int agents) : SequentState(agents) {
    for (const auto& r : s.antecedent) add_atom(r);
    for (const auto& lf : s.consequent) add_formula(lf);
  }

  int agents() const { return agents_; }

  Sequent to_sequent() const { return {atoms_, formulas_}; }

  const std::vector<RelAtom>& atoms() const { return atoms_; }
  const std::vector<LabelledFormula>& formulas() const { return formulas_; }

  /// Indices into formulas() for formulas at the given label.
  const std::vector<std::uint32_t>& formulas_at(Label l) const {
    static const std::vector<std::uint32_t> empty;
    return l.id < by_label_.size() ? by_label_[l.id] : empty;
  }

  bool has_label(Label l) const { return l.id < present_.size() && present_[l.id]; }
  std::uint32_t label_bound() const { return static_cast<std::uint32_t>(present_.size()); }
  std::size_t label_count() const { return label_count_; }
  std::vector<Label> labels() const {
    std::vector<Label> out;
    for (std::uint32_t i = 0; i < present_.size(); ++i)
      if (present_[i]) out.push_back(Label{i});
    return out;
  }
  Label fresh() const { return Label{label_bound()}; }

  bool contains(const LabelledFormula& lf) const { return formula_set_.count(lf) != 0; }
  bool contains(Label l, const Formula& f) const { return contains(LabelledFormula{l, f}); }

  bool has_atom(RelKind kind, int agent, Label x, Label y) const {
    return atom_keys_.count(pack(kind, agent, x, y)) != 0;
  }
  bool has_atom(const RelAtom& r) const { return has_atom(r.kind, r.agent, r.from, r.to); }

  /// Direct R_(O i) successors of x, in insertion order.
  const std::vector<Label>& ought_successors(int agent, Label x) const {
    static const std::vector<Label> empty;
    auto it = ought_succ_.find(pack(RelKind::Ought, agent, x, Label{0}));
    return it == ought_succ_.end() ? empty : it->second;
  }

  bool add_formula(const LabelledFormula& lf) {
    if (!formula_set_.insert(lf).second) return false;
    touch(lf.label);
    by_label_[lf.label.id].push_back(static_cast<std::uint32_t>(formulas_.size()));
    formulas_.push_back(lf);
    return true;
  }
  bool add_formula(Label l, const Formula& f) { return add_formula(LabelledFormula{l, f}); }

  bool add_atom(const RelAtom& r) {
    if (!atom_keys_.insert(pack(r.kind, r.agent, r.from, r.to)).second) return false;
    touch(r.from);
    touch(r.to);
    atoms_.push_back(r);
    switch (r.kind) {
      case RelKind::Box:
        moment_.unite(r.from.id, r.to.id);
        break;
      case RelKind::Ag:
        moment_.unite(r.from.id, r.to.id);
        agent_paths_.at(static_cast<std::size_t>(r.agent - 1)).unite(r.from.id, r.to.id);
        break;
      case RelKind::Ought:
        ought_succ_[pack(RelKind::Ought, r.agent, r.from, Label{0})].push_back(r.to);
        break;
    }
    if (r.provenance.source == Provenance::Source::D5One)
      d5_.push_back({r.provenance.instance, r.agent, r.from, r.to});
    return true;
  }

  /// Registers a label without attaching anything to it.
  void add_label(Label l) { touch(l); }

  bool i_path(Label x, Label y, int agent) const {
    return x == y || agent_paths_.at(static_cast<std::size_t>(agent - 1)).same(x.id, y.id);
  }
  bool diamond_path(Label x, Label y) const { return x == y || moment_.same(x.id, y.id); }

  std::uint32_t moment_of(Label x) const { return moment_.find(x.id); }
  std::uint32_t choice_of(Label x, int agent) const {
    return agent_paths_.at(static_cast<std::size_t>(agent - 1)).find(x.id);
  }

  /// Labels y with x ~_i y (x itself included), ascending.
  std::vector<Label> i_class(Label x, int agent) const {
    std::vector<Label> out;
    for (Label l : labels())
      if (i_path(x, l, agent)) out.push_back(l);
    return out;
  }
  /// Labels y with x ~_diamond y, ascending.
  std::vector<Label> moment(Label x) const {
    std::vector<Label> out;
    for (Label l : labels())
      if (diamond_path(x, l)) out.push_back(l);
    return out;
  }

  const std::vector<D5Record>& d5_records() const { return d5_; }
  const D5Record* d5_record(std::uint32_t id) const {
    for (const auto& r : d5_)
      if (r.id == id) return &r;
    return nullptr;
  }
  std::uint32_t next_d5_id() const {
    std::uint32_t m = 0;
    for (const auto& r : d5_) m = std::max(m, r.id + 1);
    return m;
  }

 private:
  static std::uint64_t pack(RelKind kind, int agent, Label x, Label y) {
    return (static_cast<std::uint64_t>(kind) << 62) | (static_cast<std::uint64_t>(agent & 0x3FFF) << 48) |
           (static_cast<std::uint64_t>(x.id & 0xFFFFFF) << 24) | static_cast<std::uint64_t>(y.id & 0xFFFFFF);
  }

  void touch(Label l) {
    if (l.id >= present_.size()) {
      present_.resize(l.id + 1, false);
      by_label_.resize(l.id + 1);
    }
    if (!present_[l.id]) {
      present_[l.id] = true;
      ++label_count_;
    }
  }

  int agents_;
  std::vector<RelAtom> atoms_;
  std::vector<LabelledFormula> formulas_;
  std::unordered_set<LabelledFormula, LabelledFormulaHash> formula_set_;
  std::unordered_set<std::uint64_t> atom_keys_;
  std::unordered_map<std::uint64_t, std::vector<Label>> ought_succ_;
  std::vector<std::vector<std::uint32_t>> by_label_;
  std::vector<bool> present_;
  std::size_t label_count_ = 0;
  mutable DisjointSets moment_;
  mutable std::vector<DisjointSets> agent_paths_;
  std::vector<D5Record> d5_;
};

}  // namespace stit
