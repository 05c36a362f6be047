#pragma once

// Rules of the labelled calculi G3DS_n X read root-first: instance
// enumeration, single-step application, proof trees and proof checking.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "stit/formula.hpp"
#include "stit/logic_spec.hpp"
#include "stit/sequent.hpp"

namespace stit {

enum class RuleId : std::uint8_t {
  Id,
  Or,
  And,
  IOA,
  Box,
  Diamond,
  AgBox,
  AgDiamond,
  OughtR,
  PermR,
  D1,
  D2,
  D3,
  D4,
  D5One,
  D5Two,
};

inline constexpr std::array<std::string_view, 16> kRuleNames{
    "Id", "Or", "And", "IOA", "Box", "Diamond", "AgBox", "AgDiamond",
    "OughtR", "PermR", "D1", "D2", "D3", "D4", "D5One", "D5Two"};

inline std::string_view rule_name(RuleId r) { return kRuleNames[static_cast<std::size_t>(r)]; }

inline RuleId rule_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kRuleNames.size(); ++i)
    if (kRuleNames[i] == name) return static_cast<RuleId>(i);
  throw std::invalid_argument("unknown rule '" + std::string(name) + "'");
}

/// Whether the rule takes an agent index.
inline bool agent_indexed(RuleId r) {
  switch (r) {
    case RuleId::AgBox:
    case RuleId::AgDiamond:
    case RuleId::OughtR:
    case RuleId::PermR:
    case RuleId::D1:
    case RuleId::D2:
    case RuleId::D3:
    case RuleId::D4:
    case RuleId::D5One:
    case RuleId::D5Two:
      return true;
    default:
      return false;
  }
}

/// Rule name as printed in derivations, e.g. "D4_1", "<1>", "O_1".
inline std::string rule_label(RuleId r, int agent) {
  std::string i = std::to_string(agent);
  switch (r) {
    case RuleId::Id:
      return "id";
    case RuleId::Or:
      return "or";
    case RuleId::And:
      return "and";
    case RuleId::IOA:
      return "IOA";
    case RuleId::Box:
      return "[]";
    case RuleId::Diamond:
      return "<>";
    case RuleId::AgBox:
      return "[" + i + "]";
    case RuleId::AgDiamond:
      return "<" + i + ">";
    case RuleId::OughtR:
      return "O_" + i;
    case RuleId::PermR:
      return "P_" + i;
    case RuleId::D5One:
      return "D5^1_" + i;
    case RuleId::D5Two:
      return "D5^2_" + i;
    default:
      return std::string(rule_name(r)) + "_" + i;
  }
}

/// One rule application, with its schema bindings.
///
/// Label roles by rule:
///   Box, AgBox, OughtR      y = eigenvariable
///   Diamond, AgDiamond      y = target label
///   PermR                   y = target of the R_(O i) x y atom
///   D1                      adds R_(O i) y z from R_(O i) x z, x ~diamond y
///   D2, D5One               adds R_(O i) x y, y eigenvariable
///   D3                      adds R_box x y from R_(O i) x y
///   D4                      adds R_(O i) x z from R_(O i) x y, y ~i z
///   D5Two                   adds R_(O i) x z; (x, y) is the linked D5One atom
///   IOA                     adds R_[k] sources[k-1] y, y eigenvariable
struct Step {
  RuleId rule = RuleId::Id;
  int agent = 0;
  std::optional<LabelledFormula> principal;
  Label x, y, z;
  std::vector<Label> sources;
  std::uint32_t d5_id = 0;  // D5One: id introduced; D5Two: id of the linked D5One

  bool introduces_label() const {
    switch (rule) {
      case RuleId::Box:
      case RuleId::AgBox:
      case RuleId::OughtR:
      case RuleId::D2:
      case RuleId::D5One:
      case RuleId::IOA:
        return true;
      default:
        return false;
    }
  }
  std::size_t arity() const { return rule == RuleId::Id ? 0 : rule == RuleId::And ? 2 : 1; }
};

class RuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Legality and application on an indexed state

namespace detail {

inline std::string bad(const Step& s, const std::string& why) {
  return rule_label(s.rule, s.agent) + ": " + why;
}

inline Op principal_op(RuleId r) {
  switch (r) {
    case RuleId::Or:
      return Op::Or;
    case RuleId::And:
      return Op::And;
    case RuleId::Box:
      return Op::Box;
    case RuleId::Diamond:
      return Op::Diamond;
    case RuleId::AgBox:
      return Op::AgBox;
    case RuleId::AgDiamond:
      return Op::AgDiamond;
    case RuleId::OughtR:
      return Op::Ought;
    case RuleId::PermR:
      return Op::Perm;
    default:
      return Op::Atom;
  }
}

}  // namespace detail

/// Returns an empty string when `step` is a legal instance of the calculus
/// for `spec` whose conclusion is `state`; otherwise a diagnostic.
inline std::string check_step(const SequentState& state, const Step& s, const LogicSpec& spec) {
  using detail::bad;
  auto ext_for = [](RuleId r) -> std::optional<Ext> {
    switch (r) {
      case RuleId::D2:
        return Ext::D2;
      case RuleId::D3:
        return Ext::D3;
      case RuleId::D4:
        return Ext::D4;
      case RuleId::D5One:
      case RuleId::D5Two:
        return Ext::D5;
      default:
        return std::nullopt;
    }
  };
  if (auto e = ext_for(s.rule); e && !spec.has(*e))
    return bad(s, "rule not in the calculus " + spec.exts.str());
  if (agent_indexed(s.rule) && (s.agent < 1 || s.agent > spec.agents)) return bad(s, "agent out of range");
  auto fresh_ok = [&](Label l) { return !state.has_label(l); };
  auto ought = [&](Label a, Label b) { return state.has_atom(RelKind::Ought, s.agent, a, b); };

  switch (s.rule) {
    case RuleId::Id: {
      if (!s.principal || s.principal->formula.op() != Op::Atom) return bad(s, "principal must be an atom");
      if (!state.contains(*s.principal)) return bad(s, "principal formula absent");
      if (!state.contains(s.principal->label, Formula::neg_atom(s.principal->formula.name())))
        return bad(s, "complementary literal absent");
      return {};
    }
    case RuleId::IOA: {
      if (s.sources.size() != static_cast<std::size_t>(spec.agents)) return bad(s, "wrong number of source labels");
      for (Label l : s.sources)
        if (!state.has_label(l)) return bad(s, "source label absent");
      for (std::size_t k = 0; k + 1 < s.sources.size(); ++k)
        if (!state.diamond_path(s.sources[k], s.sources[k + 1])) return bad(s, "sources not diamond-connected");
      if (!fresh_ok(s.y)) return bad(s, "eigenvariable occurs in the conclusion");
      return {};
    }
    case RuleId::D1:
      if (!ought(s.x, s.z)) return bad(s, "R_O x z absent");
      if (!state.has_label(s.y) || !state.diamond_path(s.x, s.y)) return bad(s, "no diamond-path from x to y");
      return {};
    case RuleId::D2:
    case RuleId::D5One:
      if (!state.has_label(s.x)) return bad(s, "label absent");
      if (!fresh_ok(s.y)) return bad(s, "eigenvariable occurs in the conclusion");
      if (s.rule == RuleId::D5One && state.d5_record(s.d5_id)) return bad(s, "D5 instance id reused");
      return {};
    case RuleId::D3:
      if (!ought(s.x, s.y)) return bad(s, "R_O x y absent");
      return {};
    case RuleId::D4:
      if (!ought(s.x, s.y)) return bad(s, "R_O x y absent");
      if (!state.has_label(s.z) || !state.i_path(s.y, s.z, s.agent)) return bad(s, "no <i>-path from y to z");
      return {};
    case RuleId::D5Two: {
      const D5Record* rec = state.d5_record(s.d5_id);
      if (!rec) return bad(s, "no D5One application below with this id");
      if (rec->agent != s.agent || rec->x != s.x || rec->y != s.y) return bad(s, "linked D5One atom mismatch");
      if (!ought(s.x, s.y)) return bad(s, "linked atom absent");
      if (!state.has_label(s.z) || !state.i_path(s.y, s.z, s.agent)) return bad(s, "no <i>-path from y to z");
      return {};
    }
    default:
      break;
  }

  // logical rules
  if (!s.principal) return bad(s, "missing principal formula");
  const Formula& f = s.principal->formula;
  const Label x = s.principal->label;
  if (f.op() != detail::principal_op(s.rule)) return bad(s, "principal has the wrong main operator");
  if (!state.contains(*s.principal)) return bad(s, "principal formula absent");
  if (agent_indexed(s.rule) && f.agent().index != s.agent) return bad(s, "agent mismatch");
  switch (s.rule) {
    case RuleId::Box:
    case RuleId::AgBox:
    case RuleId::OughtR:
      if (!fresh_ok(s.y)) return bad(s, "eigenvariable occurs in the conclusion");
      return {};
    case RuleId::Diamond:
      if (!state.has_label(s.y) || !state.diamond_path(x, s.y)) return bad(s, "no diamond-path to target");
      return {};
    case RuleId::AgDiamond:
      if (!state.has_label(s.y) || !state.i_path(x, s.y, s.agent)) return bad(s, "no <i>-path to target");
      return {};
    case RuleId::PermR:
      if (!ought(x, s.y)) return bad(s, "R_O x y absent");
      return {};
    default:
      return {};
  }
}

/// Turns `state` (the conclusion) into premise number `branch` of `s`.
/// The step must be legal; see check_step.
inline void apply_step(SequentState& state, const Step& s, std::size_t branch = 0) {
  auto prov = Provenance::by_rule(std::string(rule_name(s.rule)));
  auto atom = [&](RelKind k, int agent, Label a, Label b) {
    RelAtom r{k, agent, a, b, prov};
    state.add_atom(r);
  };
  auto body = [&] { return s.principal->formula.body(); };
  switch (s.rule) {
    case RuleId::Id:
      return;
    case RuleId::Or:
      state.add_formula(s.principal->label, s.principal->formula.lhs());
      state.add_formula(s.principal->label, s.principal->formula.rhs());
      return;
    case RuleId::And:
      state.add_formula(s.principal->label,
                        branch == 0 ? s.principal->formula.lhs() : s.principal->formula.rhs());
      return;
    case RuleId::Box:
      atom(RelKind::Box, 0, s.principal->label, s.y);
      state.add_formula(s.y, body());
      return;
    case RuleId::AgBox:
      atom(RelKind::Ag, s.agent, s.principal->label, s.y);
      state.add_formula(s.y, body());
      return;
    case RuleId::OughtR:
      atom(RelKind::Ought, s.agent, s.principal->label, s.y);
      state.add_formula(s.y, body());
      return;
    case RuleId::Diamond:
    case RuleId::AgDiamond:
    case RuleId::PermR:
      state.add_formula(s.y, body());
      return;
    case RuleId::D1:
      atom(RelKind::Ought, s.agent, s.y, s.z);
      return;
    case RuleId::D2:
      atom(RelKind::Ought, s.agent, s.x, s.y);
      return;
    case RuleId::D3:
      atom(RelKind::Box, 0, s.x, s.y);
      return;
    case RuleId::D4:
    case RuleId::D5Two:
      atom(RelKind::Ought, s.agent, s.x, s.z);
      return;
    case RuleId::D5One:
      state.add_atom(RelAtom{RelKind::Ought, s.agent, s.x, s.y, Provenance::d5_one(s.d5_id)});
      return;
    case RuleId::IOA:
      for (std::size_t k = 0; k < s.sources.size(); ++k)
        atom(RelKind::Ag, static_cast<int>(k + 1), s.sources[k], s.y);
      return;
  }
}

// ---------------------------------------------------------------------------
// Instance enumeration, grouped by rule family. Each enumerator applies the
// dedup policy: instances whose premise would add nothing new (or whose
// witness already exists, for eigenvariable rules) are suppressed.

namespace rules {

inline std::optional<Step> find_id(const SequentState& st) {
  for (const auto& lf : st.formulas())
    if (lf.formula.op() == Op::Atom && st.contains(lf.label, Formula::neg_atom(lf.formula.name())))
      return Step{RuleId::Id, 0, lf, {}, {}, {}, {}, 0};
  return std::nullopt;
}

inline void or_steps(const SequentState& st, std::vector<Step>& out) {
  for (const auto& lf : st.formulas())
    if (lf.formula.op() == Op::Or &&
        !(st.contains(lf.label, lf.formula.lhs()) && st.contains(lf.label, lf.formula.rhs())))
      out.push_back(Step{RuleId::Or, 0, lf, {}, {}, {}, {}, 0});
}

inline void and_steps(const SequentState& st, std::vector<Step>& out) {
  for (const auto& lf : st.formulas())
    if (lf.formula.op() == Op::And && !st.contains(lf.label, lf.formula.lhs()) &&
        !st.contains(lf.label, lf.formula.rhs()))
      out.push_back(Step{RuleId::And, 0, lf, {}, {}, {}, {}, 0});
}

/// Box, [i] and O_i: one instance per principal lacking a witness.
inline void eigen_steps(const SequentState& st, std::vector<Step>& out) {
  const Label fresh = st.fresh();
  for (const auto& lf : st.formulas()) {
    const Formula& f = lf.formula;
    if (f.is_literal() || f.is_binary()) continue;
    const Formula b = f.body();
    bool witnessed = false;
    switch (f.op()) {
      case Op::Box:
        for (Label y : st.moment(lf.label))
          if ((witnessed = st.contains(y, b))) break;
        if (!witnessed) out.push_back(Step{RuleId::Box, 0, lf, {}, fresh, {}, {}, 0});
        break;
      case Op::AgBox:
        for (Label y : st.i_class(lf.label, f.agent().index))
          if ((witnessed = st.contains(y, b))) break;
        if (!witnessed) out.push_back(Step{RuleId::AgBox, f.agent().index, lf, {}, fresh, {}, {}, 0});
        break;
      case Op::Ought:
        for (Label y : st.ought_successors(f.agent().index, lf.label))
          if ((witnessed = st.contains(y, b))) break;
        if (!witnessed) out.push_back(Step{RuleId::OughtR, f.agent().index, lf, {}, fresh, {}, {}, 0});
        break;
      default:
        break;
    }
  }
}

/// Diamond, <i> and P_i: one instance per (principal, target) missing the
/// target copy.
inline void batch_steps(const SequentState& st, std::vector<Step>& out) {
  const std::size_t n = st.formulas().size();
  for (std::size_t k = 0; k < n; ++k) {
    const LabelledFormula lf = st.formulas()[k];
    const Formula& f = lf.formula;
    switch (f.op()) {
      case Op::Diamond:
        for (Label y : st.moment(lf.label))
          if (!st.contains(y, f.body())) out.push_back(Step{RuleId::Diamond, 0, lf, {}, y, {}, {}, 0});
        break;
      case Op::AgDiamond:
        for (Label y : st.i_class(lf.label, f.agent().index))
          if (!st.contains(y, f.body()))
            out.push_back(Step{RuleId::AgDiamond, f.agent().index, lf, {}, y, {}, {}, 0});
        break;
      case Op::Perm:
        for (Label y : st.ought_successors(f.agent().index, lf.label))
          if (!st.contains(y, f.body()))
            out.push_back(Step{RuleId::PermR, f.agent().index, lf, {}, y, {}, {}, 0});
        break;
      default:
        break;
    }
  }
}

inline void d1_steps(const SequentState& st, std::vector<Step>& out) {
  for (const auto& r : st.atoms()) {
    if (r.kind != RelKind::Ought) continue;
    for (Label y : st.moment(r.from))
      if (!st.has_atom(RelKind::Ought, r.agent, y, r.to))
        out.push_back(Step{RuleId::D1, r.agent, std::nullopt, r.from, y, r.to, {}, 0});
  }
}

/// D3, D4 and D5Two, as admitted by the spec.
inline void structural_steps(const SequentState& st, const LogicSpec& spec, std::vector<Step>& out) {
  for (const auto& r : st.atoms()) {
    if (r.kind != RelKind::Ought) continue;
    if (spec.has(Ext::D3) && !st.diamond_path(r.from, r.to))
      out.push_back(Step{RuleId::D3, r.agent, std::nullopt, r.from, r.to, {}, {}, 0});
    if (spec.has(Ext::D4))
      for (Label z : st.i_class(r.to, r.agent))
        if (!st.has_atom(RelKind::Ought, r.agent, r.from, z))
          out.push_back(Step{RuleId::D4, r.agent, std::nullopt, r.from, r.to, z, {}, 0});
  }
  if (spec.has(Ext::D5))
    for (const auto& rec : st.d5_records())
      for (Label z : st.i_class(rec.y, rec.agent))
        if (!st.has_atom(RelKind::Ought, rec.agent, rec.x, z))
          out.push_back(Step{RuleId::D5Two, rec.agent, std::nullopt, rec.x, rec.y, z, {}, rec.id});
}

/// IOA over tuples of choice cells within one moment that have no common
/// label yet. Sources are the least label of each cell.
inline void ioa_steps(const SequentState& st, const LogicSpec& spec, std::vector<Step>& out) {
  if (spec.agents < 2) return;
  const auto labels = st.labels();
  std::map<std::uint32_t, std::vector<Label>> moments;
  for (Label l : labels) moments[st.moment_of(l)].push_back(l);
  const Label fresh = st.fresh();
  for (const auto& [root, members] : moments) {
    // cells[i]: representative labels of the distinct <i>-cells, ascending
    std::vector<std::vector<Label>> cells(static_cast<std::size_t>(spec.agents));
    for (int i = 1; i <= spec.agents; ++i) {
      std::set<std::uint32_t> seen;
      for (Label l : members)
        if (seen.insert(st.choice_of(l, i)).second) cells[static_cast<std::size_t>(i - 1)].push_back(l);
    }
    std::vector<std::size_t> pick(cells.size(), 0);
    while (true) {
      bool covered = false;
      for (Label l : members) {
        bool all = true;
        for (int i = 1; i <= spec.agents && all; ++i)
          all = st.i_path(l, cells[static_cast<std::size_t>(i - 1)][pick[static_cast<std::size_t>(i - 1)]], i);
        if ((covered = all)) break;
      }
      if (!covered) {
        Step s{RuleId::IOA, 0, std::nullopt, {}, fresh, {}, {}, 0};
        for (std::size_t i = 0; i < cells.size(); ++i) s.sources.push_back(cells[i][pick[i]]);
        out.push_back(std::move(s));
      }
      std::size_t k = 0;
      while (k < pick.size() && ++pick[k] == cells[k].size()) pick[k++] = 0;
      if (k == pick.size()) break;
    }
  }
}

/// D2 and D5One for every label lacking, respectively, an ideal successor
/// or a D5One atom.
inline void generator_steps(const SequentState& st, const LogicSpec& spec, std::vector<Step>& out) {
  const Label fresh = st.fresh();
  std::uint32_t next_id = st.next_d5_id();
  for (Label x : st.labels())
    for (int i = 1; i <= spec.agents; ++i) {
      if (spec.has(Ext::D2) && st.ought_successors(i, x).empty())
        out.push_back(Step{RuleId::D2, i, std::nullopt, x, fresh, {}, {}, 0});
      if (spec.has(Ext::D5)) {
        bool has = std::any_of(st.d5_records().begin(), st.d5_records().end(),
                               [&](const D5Record& r) { return r.agent == i && r.x == x; });
        if (!has) out.push_back(Step{RuleId::D5One, i, std::nullopt, x, fresh, {}, {}, next_id});
      }
    }
}

/// Every instance admitted by the spec, after dedup.
inline std::vector<Step> all_steps(const SequentState& st, const LogicSpec& spec) {
  std::vector<Step> out;
  if (auto id = find_id(st)) out.push_back(*id);
  or_steps(st, out);
  and_steps(st, out);
  eigen_steps(st, out);
  batch_steps(st, out);
  d1_steps(st, out);
  structural_steps(st, spec, out);
  ioa_steps(st, spec, out);
  generator_steps(st, spec, out);
  return out;
}

}  // namespace rules

// ---------------------------------------------------------------------------
// Sequent-level API

struct RuleInstance {
  Step step;
  Sequent conclusion;
  std::vector<Sequent> premises;
};

/// The premises of a legal instance. Throws RuleError when a side condition
/// or the eigenvariable condition fails.
inline std::vector<Sequent> apply(const Step& step, const Sequent& conclusion, const LogicSpec& spec) {
  SequentState st(conclusion, spec.agents);
  if (auto why = check_step(st, step, spec); !why.empty()) throw RuleError(why);
  std::vector<Sequent> out;
  for (std::size_t b = 0; b < step.arity(); ++b) {
    SequentState premise = st;
    apply_step(premise, step, b);
    out.push_back(premise.to_sequent());
  }
  return out;
}

inline std::vector<Sequent> apply(const RuleInstance& inst, const LogicSpec& spec) {
  return apply(inst.step, inst.conclusion, spec);
}

/// Every instance whose conclusion is `seq`, after dedup.
inline std::vector<RuleInstance> applicable_instances(const Sequent& seq, const LogicSpec& spec) {
  SequentState st(seq, spec.agents);
  std::vector<RuleInstance> out;
  for (auto& step : rules::all_steps(st, spec)) {
    RuleInstance inst{step, seq, {}};
    for (std::size_t b = 0; b < step.arity(); ++b) {
      SequentState premise = st;
      apply_step(premise, step, b);
      inst.premises.push_back(premise.to_sequent());
    }
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Proof trees

struct ProofNode {
  Step step;
  std::vector<std::uint32_t> children;  // premise order
};

/// A derivation stored flat: nodes[0] is the rule applied to `root`; the
/// conclusion of every other node is the matching premise of its parent.
struct ProofTree {
  Sequent root;
  std::vector<ProofNode> nodes;

  std::size_t size() const { return nodes.size(); }
};

struct ProofCheck {
  bool ok = false;
  std::string diagnostic;
  std::optional<std::uint32_t> node;  // first failing node
};

namespace detail {

inline SequentState root_state(const Sequent& root, int agents) {
  SequentState st(agents);
  for (RelAtom r : root.antecedent) {
    r.provenance = Provenance::user();
    st.add_atom(r);
  }
  for (const auto& lf : root.consequent) st.add_formula(lf);
  return st;
}

}  // namespace detail

/// Replays the tree from the root, calling visit(node index, conclusion
/// state, depth) on every node in pre-order, left premise first. Stops and
/// reports the first illegal node.
template <typename Visit>
ProofCheck replay_proof(const ProofTree& tree, const LogicSpec& spec, Visit&& visit) {
  if (tree.nodes.empty()) return {false, "empty derivation", std::nullopt};
  struct Frame {
    std::uint32_t node;
    SequentState state;
    int depth;
  };
  std::vector<Frame> stack;
  stack.push_back({0, detail::root_state(tree.root, spec.agents), 0});
  std::vector<bool> seen(tree.nodes.size(), false);
  while (!stack.empty()) {
    Frame f = std::move(stack.back());
    stack.pop_back();
    if (f.node >= tree.nodes.size()) return {false, "premise index out of range", f.node};
    if (seen[f.node]) return {false, "node used twice", f.node};
    seen[f.node] = true;
    const ProofNode& n = tree.nodes[f.node];
    if (auto why = check_step(f.state, n.step, spec); !why.empty()) return {false, why, f.node};
    if (n.children.size() != n.step.arity())
      return {false, rule_label(n.step.rule, n.step.agent) + ": wrong number of premises", f.node};
    visit(f.node, static_cast<const SequentState&>(f.state), f.depth);
    for (std::size_t b = n.children.size(); b-- > 0;) {
      SequentState premise = b == 0 ? std::move(f.state) : f.state;
      apply_step(premise, n.step, b);
      stack.push_back({n.children[b], std::move(premise), f.depth + (n.children.size() > 1 ? 1 : 0)});
    }
  }
  return {true, {}, std::nullopt};
}

/// Checks that every node is a legal instance of G3DS_n X (side conditions,
/// eigenvariables, D5 linkage to a D5One below) and every leaf is id.
inline ProofCheck validate_proof(const ProofTree& tree, const LogicSpec& spec) {
  return replay_proof(tree, spec, [](std::uint32_t, const SequentState&, int) {});
}

// ---------------------------------------------------------------------------
// Serialization

inline nlohmann::json sequent_to_json(const Sequent& s) {
  using nlohmann::json;
  json ant = json::array(), con = json::array();
  for (const auto& r : s.antecedent) {
    json a = {{"kind", r.kind == RelKind::Box ? "box" : r.kind == RelKind::Ag ? "ag" : "ought"},
              {"agent", r.agent},
              {"from", r.from.id},
              {"to", r.to.id}};
    ant.push_back(std::move(a));
  }
  for (const auto& lf : s.consequent) con.push_back({{"label", lf.label.id}, {"formula", render(lf.formula)}});
  return {{"antecedent", ant}, {"consequent", con}};
}

inline Sequent sequent_from_json(const nlohmann::json& j, int agents) {
  Sequent s;
  for (const auto& a : j.at("antecedent")) {
    std::string kind = a.at("kind");
    RelKind k = kind == "box" ? RelKind::Box : kind == "ag" ? RelKind::Ag : RelKind::Ought;
    if (kind != "box" && kind != "ag" && kind != "ought") throw RuleError("unknown relation kind " + kind);
    s.antecedent.push_back({k, a.at("agent").get<int>(), Label{a.at("from").get<std::uint32_t>()},
                            Label{a.at("to").get<std::uint32_t>()}, {}});
  }
  for (const auto& c : j.at("consequent"))
    s.consequent.push_back({Label{c.at("label").get<std::uint32_t>()},
                            parse_nnf(c.at("formula").get<std::string>(), agents)});
  return s;
}

inline nlohmann::json step_to_json(const Step& s) {
  using nlohmann::json;
  json j = {{"rule", rule_name(s.rule)}};
  if (agent_indexed(s.rule)) j["agent"] = s.agent;
  if (s.principal) j["principal"] = {{"label", s.principal->label.id}, {"formula", render(s.principal->formula)}};
  json b = json::object();
  switch (s.rule) {
    case RuleId::Id:
    case RuleId::Or:
    case RuleId::And:
      break;
    case RuleId::IOA: {
      json src = json::array();
      for (Label l : s.sources) src.push_back(l.id);
      b["sources"] = src;
      b["y"] = s.y.id;
      break;
    }
    case RuleId::Box:
    case RuleId::AgBox:
    case RuleId::OughtR:
    case RuleId::Diamond:
    case RuleId::AgDiamond:
    case RuleId::PermR:
      b["y"] = s.y.id;
      break;
    case RuleId::D2:
    case RuleId::D3:
    case RuleId::D5One:
      b["x"] = s.x.id;
      b["y"] = s.y.id;
      break;
    default:
      b["x"] = s.x.id;
      b["y"] = s.y.id;
      b["z"] = s.z.id;
      break;
  }
  if (s.rule == RuleId::D5One || s.rule == RuleId::D5Two) b["d5"] = s.d5_id;
  j["bindings"] = b;
  return j;
}

inline Step step_from_json(const nlohmann::json& j, int agents) {
  Step s;
  s.rule = rule_from_name(j.at("rule").get<std::string>());
  s.agent = j.value("agent", 0);
  if (j.contains("principal"))
    s.principal = LabelledFormula{Label{j["principal"].at("label").get<std::uint32_t>()},
                                  parse_nnf(j["principal"].at("formula").get<std::string>(), agents)};
  const auto& b = j.at("bindings");
  auto lab = [&](const char* k) { return b.contains(k) ? Label{b[k].get<std::uint32_t>()} : Label{}; };
  s.x = lab("x");
  s.y = lab("y");
  s.z = lab("z");
  if (b.contains("sources"))
    for (const auto& l : b["sources"]) s.sources.push_back(Label{l.get<std::uint32_t>()});
  s.d5_id = b.value("d5", 0u);
  return s;
}

inline nlohmann::json proof_to_json(const ProofTree& t) {
  using nlohmann::json;
  json nodes = json::array();
  for (const auto& n : t.nodes) {
    json j = step_to_json(n.step);
    j["premises"] = n.children;
    nodes.push_back(std::move(j));
  }
  return {{"root", sequent_to_json(t.root)}, {"nodes", nodes}};
}

inline ProofTree proof_from_json(const nlohmann::json& j, int agents) {
  ProofTree t;
  t.root = sequent_from_json(j.at("root"), agents);
  for (const auto& n : j.at("nodes")) {
    ProofNode node{step_from_json(n, agents), n.at("premises").get<std::vector<std::uint32_t>>()};
    t.nodes.push_back(std::move(node));
  }
  return t;
}

/// Indented text rendering read bottom-up like a derivation: premises are
/// printed above their conclusion, each branch of a two-premise rule
/// indented one level further.
inline std::string render_proof(const ProofTree& t, const LogicSpec& spec) {
  struct Line {
    int depth;
    std::string text;
  };
  std::vector<std::vector<Line>> blocks(t.nodes.size());
  std::vector<std::string> conclusion(t.nodes.size());
  std::vector<int> depth(t.nodes.size(), 0);
  ProofCheck c = replay_proof(t, spec, [&](std::uint32_t node, const SequentState& st, int d) {
    conclusion[node] = render(st.to_sequent());
    depth[node] = d;
  });
  std::ostringstream out;
  if (!c.ok) out << "invalid derivation: " << c.diagnostic << "\n";
  // post-order, iteratively: children first, then the node itself
  std::vector<std::pair<std::uint32_t, bool>> stack{{0, false}};
  std::vector<std::string> lines;
  while (!stack.empty() && c.ok) {
    auto [node, expanded] = stack.back();
    stack.pop_back();
    if (expanded) {
      const auto& n = t.nodes[node];
      lines.push_back(std::string(static_cast<std::size_t>(depth[node]) * 2, ' ') + conclusion[node] + "   (" +
                      rule_label(n.step.rule, n.step.agent) + ")");
      continue;
    }
    stack.push_back({node, true});
    const auto& ch = t.nodes[node].children;
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back({*it, false});
  }
  for (const auto& l : lines) out << l << "\n";
  return out.str();
}

/// Graphviz rendering; each node shows its conclusion and rule.
inline std::string proof_to_dot(const ProofTree& t, const LogicSpec& spec) {
  std::vector<std::string> conclusion(t.nodes.size());
  replay_proof(t, spec, [&](std::uint32_t node, const SequentState& st, int) {
    conclusion[node] = render(st.to_sequent());
  });
  auto esc = [](const std::string& s) {
    std::string o;
    for (char c : s) {
      if (c == '"' || c == '\\') o += '\\';
      o += c;
    }
    return o;
  };
  std::ostringstream out;
  out << "digraph proof {\n  rankdir=BT;\n  node [shape=box, fontname=\"monospace\"];\n";
  for (std::size_t i = 0; i < t.nodes.size(); ++i) {
    out << "  n" << i << " [label=\"" << esc(conclusion[i]) << "\\n(" << esc(rule_label(t.nodes[i].step.rule, t.nodes[i].step.agent))
        << ")\"];\n";
    for (auto c : t.nodes[i].children) out << "  n" << c << " -> n" << i << ";\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace stit
