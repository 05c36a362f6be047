#pragma once

// Terminating proof search for G3DS_n X. A search either closes every
// branch (yielding a checkable derivation), extracts a countermodel from a
// saturated open branch, or stops on a budget.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stit/calculus.hpp"
#include "stit/formula.hpp"
#include "stit/kripke.hpp"
#include "stit/logic_spec.hpp"
#include "stit/sequent.hpp"

namespace stit {

struct Budget {
  std::size_t max_labels = 64;  // per branch; capped at kMaxWorlds
  std::size_t max_steps = 20000;
  double max_seconds = 10.0;
};

enum class Status { Proved, Refuted, Unknown };

enum class UnknownReason { None, LabelLimit, StepLimit, TimeLimit, SaturationWithoutValidModel };

inline std::string_view status_name(Status s) {
  switch (s) {
    case Status::Proved:
      return "proved";
    case Status::Refuted:
      return "refuted";
    default:
      return "unknown";
  }
}

inline std::string_view reason_name(UnknownReason r) {
  switch (r) {
    case UnknownReason::LabelLimit:
      return "label-limit";
    case UnknownReason::StepLimit:
      return "step-limit";
    case UnknownReason::TimeLimit:
      return "time-limit";
    case UnknownReason::SaturationWithoutValidModel:
      return "saturation-without-valid-model";
    default:
      return "none";
  }
}

struct SearchStats {
  std::size_t steps = 0;            // rule applications on the search path
  std::size_t lookahead_steps = 0;  // applications spent choosing conjunction splits
  std::size_t max_labels = 0;       // largest branch, in labels
  std::size_t branches = 0;         // branches finished
  double seconds = 0.0;
};

/// A countermodel read off an open branch: the interpretation maps every
/// label of the root sequent to a world, and the root label to `world`.
struct Refutation {
  Model model;
  std::size_t world = 0;
  Interpretation interp;
};

struct SearchOutcome {
  Status status = Status::Unknown;
  std::optional<ProofTree> proof;
  std::optional<Refutation> refutation;
  UnknownReason reason = UnknownReason::None;
  std::string diagnostic;
  SearchStats stats;
};

// ---------------------------------------------------------------------------
// Countermodel extraction

namespace detail {

inline std::vector<std::vector<Label>> moments_of(const SequentState& st) {
  std::map<std::uint32_t, std::vector<Label>> by_root;
  for (Label l : st.labels()) by_root[st.moment_of(l)].push_back(l);
  std::vector<std::vector<Label>> out;
  for (auto& [root, ls] : by_root) out.push_back(std::move(ls));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace detail

/// Builds the model whose worlds are the labels of `st`: relations from
/// the relational atoms, x in V(p) iff x:p does not occur. Where D2 or D5
/// is in the spec and the branch lacks ideal worlds for a moment, ideal
/// worlds are borrowed from existing labels whenever every P-formula of
/// the moment already holds there. Returns a model only if it is a DS_n X
/// model falsifying `root`.
inline std::optional<Refutation> extract_countermodel(const SequentState& st, const Sequent& root,
                                                      const LogicSpec& spec, const LabelNames& names = {}) {
  const auto labels = st.labels();
  if (labels.empty() || labels.size() > kMaxWorlds) return std::nullopt;
  std::map<Label, std::size_t> index;
  std::vector<std::string> wnames;
  std::set<std::string> taken;
  for (Label l : labels) {
    index[l] = wnames.size();
    std::string n = names(l);
    while (!taken.insert(n).second) n += "'";
    wnames.push_back(n);
  }
  Model m(spec.agents, wnames);
  for (const auto& r : st.atoms()) {
    const std::size_t a = index.at(r.from), b = index.at(r.to);
    switch (r.kind) {
      case RelKind::Box:
        m.r_box[a] |= bit_of(b);
        break;
      case RelKind::Ag:
        m.ag(r.agent)[a] |= bit_of(b);
        break;
      case RelKind::Ought:
        m.ought(r.agent)[a] |= bit_of(b);
        break;
    }
  }
  std::set<std::string> atoms;
  for (const auto& lf : st.formulas()) collect_atoms(lf.formula, atoms);
  for (const auto& p : atoms) {
    WorldMask v = 0;
    const Formula pos = Formula::atom(p);
    for (Label l : labels)
      if (!st.contains(l, pos)) v |= bit_of(index.at(l));
    m.valuation[p] = v;
  }
  m = close_relations(std::move(m), spec);

  if (spec.has(Ext::D2) || spec.has(Ext::D5)) {
    const bool widen = spec.has(Ext::D4) || spec.has(Ext::D5);
    for (const auto& moment : detail::moments_of(st)) {
      WorldMask mmask = 0;
      for (Label l : moment) mmask |= bit_of(index.at(l));
      for (int i = 1; i <= spec.agents; ++i) {
        const auto& ought = m.ought(i);
        const std::size_t rep = index.at(moment.front());
        const WorldMask ideal = ought[rep];
        bool need = spec.has(Ext::D2) && ideal == 0;
        if (spec.has(Ext::D5)) {
          bool found = false;
          for (std::size_t v = 0; v < m.size() && !found; ++v)
            found = (ideal & bit_of(v)) && (m.ag(i)[v] & ~ideal) == 0;
          need = need || !found;
        }
        if (!need) continue;
        std::vector<Label> candidates = moment;
        if (!spec.has(Ext::D3))
          for (Label l : labels)
            if (!(mmask & bit_of(index.at(l)))) candidates.push_back(l);
        // P-formulas the borrowed ideal worlds must already refute
        std::vector<Formula> perms;
        for (Label x : moment)
          for (std::uint32_t k : st.formulas_at(x)) {
            const Formula& f = st.formulas()[k].formula;
            if (f.op() == Op::Perm && f.agent().index == i) perms.push_back(f.body());
          }
        for (Label t : candidates) {
          WorldMask target = bit_of(index.at(t));
          if (widen) target |= m.ag(i)[index.at(t)];
          bool ok = true;
          for (std::size_t w = 0; w < m.size() && ok; ++w)
            if (target & bit_of(w))
              for (const auto& phi : perms)
                if (!st.contains(labels[w], phi)) {
                  ok = false;
                  break;
                }
          if (!ok) continue;
          for (Label x : moment) m.ought(i)[index.at(x)] |= target;
          break;
        }
      }
    }
  }

  CloseResult closed = close_frame(m, spec);
  if (!closed.ok()) return std::nullopt;
  Interpretation interp;
  for (Label l : labels) interp[l] = index.at(l);
  for (Label l : labels_of(root))
    if (!interp.count(l)) return std::nullopt;
  if (satisfies_sequent(closed.model, interp, root)) return std::nullopt;
  std::size_t world = root.consequent.empty() ? 0 : interp.at(root.consequent.front().label);
  return Refutation{std::move(closed.model), world, std::move(interp)};
}

// ---------------------------------------------------------------------------
// Search

namespace detail {

class Search {
 public:
  Search(const Sequent& root, const LogicSpec& spec, const Budget& budget, const LabelNames& names)
      : root_(root), spec_(spec), budget_(budget), names_(names), start_(std::chrono::steady_clock::now()) {
    budget_.max_labels = std::min(budget_.max_labels, kMaxWorlds);
    tree_.root = root;
  }

  SearchOutcome run() {
    SearchOutcome out;
    Branch b{root_state(root_, spec_.agents), Cursor{true, std::nullopt, 0}, false};
    try {
      Result r = branch(std::move(b));
      out.status = r.status;
      out.reason = r.reason;
      out.diagnostic = r.diagnostic;
      if (r.status == Status::Proved) out.proof = std::move(tree_);
      if (r.status == Status::Refuted) out.refutation = std::move(r.refutation);
    } catch (const Halt& h) {
      out.status = Status::Unknown;
      out.reason = h.reason;
      out.diagnostic = std::string(reason_name(h.reason));
    }
    stats_.seconds = elapsed();
    out.stats = stats_;
    return out;
  }

 private:
  struct Cursor {
    bool record;
    std::optional<std::uint32_t> parent;
    std::size_t pos;
  };
  struct Branch {
    SequentState st;
    Cursor cursor;
    bool simulated;
    std::size_t sim_steps = 0;
  };
  struct Result {
    Status status = Status::Unknown;
    UnknownReason reason = UnknownReason::None;
    std::string diagnostic;
    std::optional<Refutation> refutation;
  };
  struct Halt {
    UnknownReason reason;
  };
  enum class Flow { Continue, Closed, LabelLimit };

  static constexpr std::size_t kLookaheadSteps = 400;
  static constexpr std::size_t kLookaheadCandidates = 12;

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void check_clock() {
    if (elapsed() > budget_.max_seconds) throw Halt{UnknownReason::TimeLimit};
  }

  Flow fire(Branch& b, Step s) {
    if (s.introduces_label()) {
      if (b.st.label_count() >= budget_.max_labels) return Flow::LabelLimit;
      s.y = b.st.fresh();
      if (s.rule == RuleId::D5One) s.d5_id = b.st.next_d5_id();
    }
    if (b.simulated) {
      if (++b.sim_steps > kLookaheadSteps) return Flow::LabelLimit;
      ++stats_.lookahead_steps;
    } else {
      if (++stats_.steps > budget_.max_steps) throw Halt{UnknownReason::StepLimit};
    }
    if (((stats_.steps + stats_.lookahead_steps) & 63) == 0) check_clock();
    if (b.cursor.record) {
      auto idx = static_cast<std::uint32_t>(tree_.nodes.size());
      tree_.nodes.push_back(ProofNode{s, std::vector<std::uint32_t>(s.arity(), UINT32_MAX)});
      if (b.cursor.parent) tree_.nodes[*b.cursor.parent].children[b.cursor.pos] = idx;
      b.cursor.parent = idx;
      b.cursor.pos = 0;
    }
    if (s.rule != RuleId::And) apply_step(b.st, s, 0);
    if (!b.simulated) stats_.max_labels = std::max(stats_.max_labels, b.st.label_count());
    return Flow::Continue;
  }

  // Whether a step enumerated from an earlier snapshot still adds something.
  static bool useful(const SequentState& st, const Step& s) {
    switch (s.rule) {
      case RuleId::Or:
        return !st.contains(s.principal->label, s.principal->formula.lhs()) ||
               !st.contains(s.principal->label, s.principal->formula.rhs());
      case RuleId::Diamond:
      case RuleId::AgDiamond:
      case RuleId::PermR:
        return !st.contains(s.y, s.principal->formula.body());
      case RuleId::D1:
        return !st.has_atom(RelKind::Ought, s.agent, s.y, s.z);
      case RuleId::D3:
        return !st.diamond_path(s.x, s.y);
      case RuleId::D4:
      case RuleId::D5Two:
        return !st.has_atom(RelKind::Ought, s.agent, s.x, s.z);
      default:
        return true;
    }
  }

  // One pass over the deterministic phases. Sets `progress` when anything
  // was added.
  Flow round(Branch& b, bool& progress) {
    using Phase = void (*)(const SequentState&, const LogicSpec&, std::vector<Step>&);
    static constexpr Phase phases[] = {
        [](const SequentState& st, const LogicSpec&, std::vector<Step>& o) { rules::or_steps(st, o); },
        [](const SequentState& st, const LogicSpec&, std::vector<Step>& o) { rules::eigen_steps(st, o); },
        [](const SequentState& st, const LogicSpec&, std::vector<Step>& o) { rules::batch_steps(st, o); },
        [](const SequentState& st, const LogicSpec&, std::vector<Step>& o) { rules::d1_steps(st, o); },
        rules::structural_steps,
        rules::ioa_steps,
    };
    for (Phase phase : phases) {
      std::vector<Step> steps;
      phase(b.st, spec_, steps);
      for (auto& s : steps) {
        if (!useful(b.st, s)) continue;
        if (Flow f = fire(b, s); f != Flow::Continue) return f;
        progress = true;
      }
      if (auto id = rules::find_id(b.st)) {
        if (Flow f = fire(b, *id); f != Flow::Continue) return f;
        return Flow::Closed;
      }
    }
    return Flow::Continue;
  }

  // Runs deterministic rounds to quiescence.
  Flow quiesce(Branch& b) {
    if (auto id = rules::find_id(b.st)) {
      if (Flow f = fire(b, *id); f != Flow::Continue) return f;
      return Flow::Closed;
    }
    for (bool progress = true; progress;) {
      progress = false;
      if (Flow f = round(b, progress); f != Flow::Continue) return f;
    }
    return Flow::Continue;
  }

  bool closes(const SequentState& st, const Step& split, std::size_t side) {
    Branch sim{st, Cursor{false, std::nullopt, 0}, true};
    apply_step(sim.st, split, side);
    return quiesce(sim) == Flow::Closed;
  }

  Step choose_split(const Branch& b, const std::vector<Step>& ands) {
    const std::size_t n = std::min(ands.size(), kLookaheadCandidates);
    for (std::size_t k = 0; k < n; ++k)
      if (closes(b.st, ands[k], 0) && closes(b.st, ands[k], 1)) return ands[k];
    return ands.front();
  }

  // Fires D2 / D5One once per moment that has no ideal successor or no
  // D5One witness yet. Returns false when nothing was needed.
  Flow generate(Branch& b, bool& fired) {
    for (const auto& moment : moments_of(b.st))
      for (int i = 1; i <= spec_.agents; ++i) {
        bool has_ideal = false, has_d5 = false;
        for (Label x : moment) has_ideal = has_ideal || !b.st.ought_successors(i, x).empty();
        for (const auto& r : b.st.d5_records())
          has_d5 = has_d5 || (r.agent == i && std::binary_search(moment.begin(), moment.end(), r.x));
        Step s{RuleId::D2, i, std::nullopt, moment.front(), {}, {}, {}, 0};
        if (spec_.has(Ext::D5) && !has_d5)
          s.rule = RuleId::D5One;
        else if (!(spec_.has(Ext::D2) && !has_ideal))
          continue;
        if (Flow f = fire(b, s); f != Flow::Continue) return f;
        fired = true;
      }
    return Flow::Continue;
  }

  Result branch(Branch b) {
    auto finish = [&](Result r) {
      ++stats_.branches;
      return r;
    };
    auto label_limit = [&] {
      return finish({Status::Unknown, UnknownReason::LabelLimit, "label budget exhausted on a branch", {}});
    };
    while (true) {
      Flow f = quiesce(b);
      if (f == Flow::Closed) return finish({Status::Proved, {}, {}, {}});
      if (f == Flow::LabelLimit) return label_limit();

      std::vector<Step> ands;
      rules::and_steps(b.st, ands);
      if (!ands.empty()) {
        Step split = choose_split(b, ands);
        if (fire(b, split) != Flow::Continue) return label_limit();
        Branch right = b;
        if (right.cursor.record) right.cursor.pos = 1;
        apply_step(b.st, split, 0);
        apply_step(right.st, split, 1);
        Result left = branch(std::move(b));
        if (left.status == Status::Refuted) return left;
        Result r = branch(std::move(right));
        if (r.status != Status::Proved) return r;
        return left;
      }

      if (auto ref = extract_countermodel(b.st, root_, spec_, names_))
        return finish({Status::Refuted, {}, {}, std::move(*ref)});

      bool fired = false;
      if (generate(b, fired) != Flow::Continue) return label_limit();
      if (!fired)
        return finish({Status::Unknown, UnknownReason::SaturationWithoutValidModel,
                       "saturated branch does not yield a DS_n X countermodel", {}});
    }
  }

  Sequent root_;
  LogicSpec spec_;
  Budget budget_;
  LabelNames names_;
  std::chrono::steady_clock::time_point start_;
  ProofTree tree_;
  SearchStats stats_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// Stepwise saturation

enum class Phase : std::uint8_t { Propositional, Eigen, Batch, D1, Structural, Generators, IOA };
inline constexpr std::size_t kPhaseCount = 7;

/// An open branch together with the next phase of its round.
struct Branch {
  SequentState state;
  Phase phase = Phase::Propositional;
};

struct PhaseResult {
  std::optional<Step> closed;   // the id instance, when the branch closes
  std::vector<Step> applied;    // instances fired, in order
  std::vector<Branch> branches; // one, or two after a conjunction split
};

/// Runs one phase of the round exhaustively on `br`. The propositional
/// phase applies every Or and splits on the first remaining And; the
/// generator phase fires D2 / D5One at every label still lacking them.
inline PhaseResult saturate_step(Branch br, const LogicSpec& spec) {
  PhaseResult out;
  if (auto id = rules::find_id(br.state)) {
    out.closed = id;
    return out;
  }
  std::vector<Step> steps;
  switch (br.phase) {
    case Phase::Propositional:
      rules::or_steps(br.state, steps);
      break;
    case Phase::Eigen:
      rules::eigen_steps(br.state, steps);
      break;
    case Phase::Batch:
      rules::batch_steps(br.state, steps);
      break;
    case Phase::D1:
      rules::d1_steps(br.state, steps);
      break;
    case Phase::Structural:
      rules::structural_steps(br.state, spec, steps);
      break;
    case Phase::Generators:
      rules::generator_steps(br.state, spec, steps);
      break;
    case Phase::IOA:
      rules::ioa_steps(br.state, spec, steps);
      break;
  }
  for (Step s : steps) {
    if (s.introduces_label()) {
      s.y = br.state.fresh();
      if (s.rule == RuleId::D5One) s.d5_id = br.state.next_d5_id();
    }
    apply_step(br.state, s, 0);
    out.applied.push_back(s);
  }
  const Phase next = static_cast<Phase>((static_cast<std::size_t>(br.phase) + 1) % kPhaseCount);
  if (br.phase == Phase::Propositional) {
    std::vector<Step> ands;
    rules::and_steps(br.state, ands);
    if (!ands.empty()) {
      out.applied.push_back(ands.front());
      Branch right{br.state, next};
      apply_step(br.state, ands.front(), 0);
      apply_step(right.state, ands.front(), 1);
      out.branches.push_back({std::move(br.state), next});
      out.branches.push_back(std::move(right));
      return out;
    }
  }
  if (auto id = rules::find_id(br.state)) {
    out.closed = id;
    return out;
  }
  br.phase = next;
  out.branches.push_back(std::move(br));
  return out;
}

/// Searches for a derivation of `root` in G3DS_n X.
inline SearchOutcome prove_sequent(const Sequent& root, const LogicSpec& spec, const Budget& budget = {},
                                   const LabelNames& names = {}) {
  for (const auto& lf : root.consequent)
    if (max_agent(lf.formula) > spec.agents) throw RuleError("formula mentions an agent beyond the spec");
  for (const auto& r : root.antecedent)
    if (r.agent > spec.agents) throw RuleError("relational atom mentions an agent beyond the spec");
  return detail::Search(root, spec, budget, names).run();
}

/// Searches for a derivation of |- x0 : f.
inline SearchOutcome prove(const Formula& f, const LogicSpec& spec, const Budget& budget = {}) {
  Sequent root;
  root.consequent.push_back({Label{0}, f});
  return prove_sequent(root, spec, budget);
}

inline nlohmann::json outcome_to_json(const SearchOutcome& o, const LabelNames& names = {}) {
  using nlohmann::json;
  json j = {{"status", status_name(o.status)}};
  j["proof"] = o.proof ? proof_to_json(*o.proof) : json(nullptr);
  if (o.refutation) {
    j["model"] = model_to_json(o.refutation->model);
    j["world"] = o.refutation->model.worlds[o.refutation->world];
    json interp = json::object();
    for (const auto& [l, w] : o.refutation->interp) interp[names(l)] = o.refutation->model.worlds[w];
    j["interpretation"] = interp;
  } else {
    j["model"] = nullptr;
    j["world"] = nullptr;
  }
  if (o.status == Status::Unknown) {
    j["reason"] = reason_name(o.reason);
    j["diagnostic"] = o.diagnostic;
  }
  j["stats"] = {{"steps", o.stats.steps},
                {"lookahead_steps", o.stats.lookahead_steps},
                {"labels", o.stats.max_labels},
                {"branches", o.stats.branches}};
  return j;
}

}  // namespace stit
