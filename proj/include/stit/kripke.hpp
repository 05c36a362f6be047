#pragma once

// Finite DS_n X models: satisfaction, frame-condition checking, relational
// closure, sequent semantics and JSON I/O.

#include <bit>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "stit/formula.hpp"
#include "stit/logic_spec.hpp"
#include "stit/sequent.hpp"

namespace stit {

/// Set of worlds as a bitmask; models hold at most 64 worlds.
using WorldMask = std::uint64_t;
inline constexpr std::size_t kMaxWorlds = 64;

inline WorldMask bit_of(std::size_t w) { return WorldMask{1} << w; }

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite model. Relations are stored as successor masks per world;
/// agent-indexed relations are indexed by agent - 1.
struct Model {
  int agents = 1;
  std::vector<std::string> worlds;
  std::vector<WorldMask> r_box;
  std::vector<std::vector<WorldMask>> r_ag;
  std::vector<std::vector<WorldMask>> r_ought;
  std::map<std::string, WorldMask> valuation;  // atoms absent are false everywhere

  Model() = default;
  Model(int n, std::vector<std::string> names) : agents(n), worlds(std::move(names)) {
    if (n < 1) throw ModelError("agent count must be at least 1");
    if (worlds.empty()) throw ModelError("a model needs at least one world");
    if (worlds.size() > kMaxWorlds) throw ModelError("models are limited to 64 worlds");
    r_box.assign(worlds.size(), 0);
    r_ag.assign(static_cast<std::size_t>(n), std::vector<WorldMask>(worlds.size(), 0));
    r_ought = r_ag;
  }

  std::size_t size() const { return worlds.size(); }
  WorldMask all() const { return size() == 64 ? ~WorldMask{0} : bit_of(size()) - 1; }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t i = 0; i < worlds.size(); ++i)
      if (worlds[i] == name) return i;
    throw ModelError("unknown world '" + name + "'");
  }

  std::vector<WorldMask>& ag(int agent) { return r_ag.at(static_cast<std::size_t>(agent - 1)); }
  const std::vector<WorldMask>& ag(int agent) const { return r_ag.at(static_cast<std::size_t>(agent - 1)); }
  std::vector<WorldMask>& ought(int agent) { return r_ought.at(static_cast<std::size_t>(agent - 1)); }
  const std::vector<WorldMask>& ought(int agent) const { return r_ought.at(static_cast<std::size_t>(agent - 1)); }

  WorldMask true_at(const std::string& atom) const {
    auto it = valuation.find(atom);
    return it == valuation.end() ? 0 : it->second;
  }

  friend bool operator==(const Model& a, const Model& b) {
    auto strip = [](std::map<std::string, WorldMask> v) {
      std::erase_if(v, [](const auto& kv) { return kv.second == 0; });
      return v;
    };
    return a.agents == b.agents && a.worlds == b.worlds && a.r_box == b.r_box && a.r_ag == b.r_ag &&
           a.r_ought == b.r_ought && strip(a.valuation) == strip(b.valuation);
  }
};

// ---------------------------------------------------------------------------
// Satisfaction

/// A formula flattened into post-order for repeated evaluation.
class CompiledFormula {
 public:
  explicit CompiledFormula(const Formula& f) { root_ = emit(f); }

  /// Extension of the formula (the set of worlds where it holds).
  WorldMask evaluate(const Model& m) const {
    std::vector<WorldMask> val(code_.size());
    evaluate_into(m, val);
    return val[root_];
  }

  void evaluate_into(const Model& m, std::vector<WorldMask>& val) const {
    const WorldMask all = m.all();
    const std::size_t n = m.size();
    for (std::size_t k = 0; k < code_.size(); ++k) {
      const Instr& in = code_[k];
      WorldMask out = 0;
      auto forall = [&](const std::vector<WorldMask>& rel, WorldMask sub) {
        WorldMask r = 0;
        for (std::size_t w = 0; w < n; ++w)
          if ((rel[w] & ~sub) == 0) r |= bit_of(w);
        return r;
      };
      auto exists = [&](const std::vector<WorldMask>& rel, WorldMask sub) {
        WorldMask r = 0;
        for (std::size_t w = 0; w < n; ++w)
          if ((rel[w] & sub) != 0) r |= bit_of(w);
        return r;
      };
      switch (in.op) {
        case Op::Atom:
          out = m.true_at(atoms_[in.a]);
          break;
        case Op::NegAtom:
          out = ~m.true_at(atoms_[in.a]) & all;
          break;
        case Op::And:
          out = val[in.a] & val[in.b];
          break;
        case Op::Or:
          out = val[in.a] | val[in.b];
          break;
        case Op::Box:
          out = forall(m.r_box, val[in.a]);
          break;
        case Op::Diamond:
          out = exists(m.r_box, val[in.a]);
          break;
        case Op::AgBox:
          out = forall(m.ag(in.agent), val[in.a]);
          break;
        case Op::AgDiamond:
          out = exists(m.ag(in.agent), val[in.a]);
          break;
        case Op::Ought:
          out = forall(m.ought(in.agent), val[in.a]);
          break;
        case Op::Perm:
          out = exists(m.ought(in.agent), val[in.a]);
          break;
      }
      val[k] = out;
    }
  }

  int max_agent() const { return max_agent_; }
  const std::vector<std::string>& atoms() const { return atoms_; }

 private:
  struct Instr {
    Op op;
    int agent;
    std::uint32_t a;
    std::uint32_t b;
  };

  std::uint32_t emit(const Formula& f) {
    Instr in{f.op(), f.agent().index, 0, 0};
    max_agent_ = std::max(max_agent_, f.node()->agent);
    if (f.is_literal()) {
      auto it = std::find(atoms_.begin(), atoms_.end(), f.name());
      in.a = static_cast<std::uint32_t>(it - atoms_.begin());
      if (it == atoms_.end()) atoms_.push_back(f.name());
    } else {
      in.a = emit(f.lhs());
      if (f.is_binary()) in.b = emit(f.rhs());
    }
    code_.push_back(in);
    return static_cast<std::uint32_t>(code_.size() - 1);
  }

  std::vector<Instr> code_;
  std::vector<std::string> atoms_;
  std::uint32_t root_ = 0;
  int max_agent_ = 0;
};

inline void check_agents(const Model& m, const Formula& f) {
  if (max_agent(f) > m.agents)
    throw ModelError("agent index " + std::to_string(max_agent(f)) + " out of range for a model with " +
                     std::to_string(m.agents) + " agent(s)");
}

/// Set of worlds at which f holds.
inline WorldMask extension(const Model& m, const Formula& f) {
  check_agents(m, f);
  return CompiledFormula(f).evaluate(m);
}

/// M, w |= f.
inline bool satisfies(const Model& m, std::size_t world, const Formula& f) {
  if (world >= m.size()) throw ModelError("unknown world index " + std::to_string(world));
  return (extension(m, f) & bit_of(world)) != 0;
}

inline bool satisfies(const Model& m, const std::string& world, const Formula& f) {
  return satisfies(m, m.index_of(world), f);
}

inline bool globally_true(const Model& m, const Formula& f) { return extension(m, f) == m.all(); }

// ---------------------------------------------------------------------------
// Frame conditions

struct Violation {
  std::string condition;  // "C1", "C2", "C3", "D1".."D5"
  int agent = 0;          // 0 for conditions not indexed by an agent
  std::vector<std::string> witness;
};

struct FrameReport {
  std::vector<Violation> violations;

  bool passed() const { return violations.empty(); }
  bool violates(std::string_view condition) const {
    return std::any_of(violations.begin(), violations.end(),
                       [&](const Violation& v) { return v.condition == condition; });
  }
  std::string str() const {
    if (passed()) return "all frame conditions hold";
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.condition;
      if (v.agent) out += "[" + std::to_string(v.agent) + "]";
      out += " (";
      for (std::size_t i = 0; i < v.witness.size(); ++i) out += (i ? "," : "") + v.witness[i];
      out += ")";
    }
    return out;
  }
};

namespace detail {

inline bool related(const std::vector<WorldMask>& rel, std::size_t a, std::size_t b) {
  return (rel[a] & bit_of(b)) != 0;
}

// First witness of a failure of equivalence, as a tuple of worlds.
inline std::optional<std::vector<std::size_t>> equivalence_failure(const std::vector<WorldMask>& rel) {
  std::size_t n = rel.size();
  for (std::size_t a = 0; a < n; ++a)
    if (!related(rel, a, a)) return std::vector<std::size_t>{a};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (related(rel, a, b) && !related(rel, b, a)) return std::vector<std::size_t>{a, b};
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (related(rel, a, b))
        for (std::size_t c = 0; c < n; ++c)
          if (related(rel, b, c) && !related(rel, a, c)) return std::vector<std::size_t>{a, b, c};
  return std::nullopt;
}

// Smallest equivalence relation containing rel.
inline void equivalence_closure(std::vector<WorldMask>& rel) {
  std::size_t n = rel.size();
  for (std::size_t a = 0; a < n; ++a) {
    rel[a] |= bit_of(a);
    for (std::size_t b = 0; b < n; ++b)
      if (related(rel, a, b)) rel[b] |= bit_of(a);
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = 0; a < n; ++a)
      if (related(rel, a, k)) rel[a] |= rel[k];
}

}  // namespace detail

/// Checks C1-C3, D1 and the extensions of the spec, reporting the first
/// witness per condition and agent.
inline FrameReport check_frame(const Model& m, const LogicSpec& spec) {
  FrameReport rep;
  const std::size_t n = m.size();
  auto names = [&](const std::vector<std::size_t>& ws) {
    std::vector<std::string> out;
    for (auto w : ws) out.push_back(m.worlds[w]);
    return out;
  };
  auto add = [&](std::string cond, int agent, const std::vector<std::size_t>& ws) {
    rep.violations.push_back({std::move(cond), agent, names(ws)});
  };
  if (spec.agents > m.agents) {
    rep.violations.push_back({"agents", 0, {std::to_string(m.agents)}});
    return rep;
  }

  if (auto w = detail::equivalence_failure(m.r_box)) add("C1", 0, *w);
  for (int i = 1; i <= spec.agents; ++i) {
    const auto& ag = m.ag(i);
    if (auto w = detail::equivalence_failure(ag)) {
      add("C2", i, *w);
      continue;
    }
    for (std::size_t a = 0; a < n; ++a) {
      WorldMask outside = ag[a] & ~m.r_box[a];
      if (outside) {
        add("C2", i, {a, static_cast<std::size_t>(std::countr_zero(outside))});
        break;
      }
    }
  }

  // C3: every choice of one world per agent inside a moment has a common
  // refinement.
  {
    bool found = false;
    for (std::size_t w = 0; w < n && !found; ++w) {
      std::vector<std::size_t> members;
      for (std::size_t v = 0; v < n; ++v)
        if (m.r_box[w] & bit_of(v)) members.push_back(v);
      if (members.empty()) continue;
      std::vector<std::size_t> pick(static_cast<std::size_t>(spec.agents), 0);
      while (!found) {
        WorldMask common = m.all();
        for (int i = 1; i <= spec.agents; ++i) common &= m.ag(i)[members[pick[static_cast<std::size_t>(i - 1)]]];
        if (common == 0) {
          std::vector<std::size_t> wit{w};
          for (auto p : pick) wit.push_back(members[p]);
          add("C3", 0, wit);
          found = true;
        }
        std::size_t k = 0;
        while (k < pick.size() && ++pick[k] == members.size()) pick[k++] = 0;
        if (k == pick.size()) break;
      }
    }
  }

  for (int i = 1; i <= spec.agents; ++i) {
    const auto& ought = m.ought(i);
    const auto& ag = m.ag(i);
    [&] {
      for (std::size_t w = 0; w < n; ++w)
        for (std::size_t v = 0; v < n; ++v)
          if (detail::related(m.r_box, w, v)) {
            WorldMask missing = ought[w] & ~ought[v];
            if (missing) return add("D1", i, {w, v, static_cast<std::size_t>(std::countr_zero(missing))});
          }
    }();
    if (spec.has(Ext::D2)) {
      for (std::size_t w = 0; w < n; ++w)
        if (ought[w] == 0) {
          add("D2", i, {w});
          break;
        }
    }
    if (spec.has(Ext::D3)) {
      for (std::size_t w = 0; w < n; ++w)
        if (WorldMask outside = ought[w] & ~m.r_box[w]) {
          add("D3", i, {w, static_cast<std::size_t>(std::countr_zero(outside))});
          break;
        }
    }
    if (spec.has(Ext::D4)) {
      [&] {
        for (std::size_t w = 0; w < n; ++w)
          for (std::size_t v = 0; v < n; ++v)
            if (detail::related(ought, w, v))
              if (WorldMask missing = ag[v] & ~ought[w])
                return add("D4", i, {w, v, static_cast<std::size_t>(std::countr_zero(missing))});
      }();
    }
    if (spec.has(Ext::D5)) {
      for (std::size_t w = 0; w < n; ++w) {
        bool ok = false;
        for (std::size_t v = 0; v < n && !ok; ++v)
          ok = detail::related(ought, w, v) && (ag[v] & ~ought[w]) == 0;
        if (!ok) {
          add("D5", i, {w});
          break;
        }
      }
    }
  }
  return rep;
}

/// Least extension of the relations (no new worlds) closing C1, C2, D1 and,
/// when in the spec, D3 and D4.
inline Model close_relations(Model m, const LogicSpec& spec) {
  const std::size_t n = m.size();
  for (bool changed = true; changed;) {
    Model before = m;
    for (int i = 1; i <= m.agents; ++i) {
      detail::equivalence_closure(m.ag(i));
      for (std::size_t w = 0; w < n; ++w) m.r_box[w] |= m.ag(i)[w];
    }
    detail::equivalence_closure(m.r_box);
    for (int i = 1; i <= m.agents; ++i) {
      auto& ought = m.ought(i);
      // D1: the ideal worlds are shared by a whole moment.
      for (std::size_t w = 0; w < n; ++w)
        for (std::size_t v = 0; v < n; ++v)
          if (detail::related(m.r_box, w, v)) ought[v] |= ought[w];
      if (spec.has(Ext::D3))
        for (std::size_t w = 0; w < n; ++w) {
          m.r_box[w] |= ought[w];
          for (std::size_t v = 0; v < n; ++v)
            if (detail::related(ought, w, v)) m.r_box[v] |= bit_of(w);
        }
      if (spec.has(Ext::D4))
        for (std::size_t w = 0; w < n; ++w)
          for (std::size_t v = 0; v < n; ++v)
            if (detail::related(ought, w, v)) ought[w] |= m.ag(i)[v];
    }
    changed = !(before == m);
  }
  return m;
}

struct CloseResult {
  Model model;
  FrameReport report;
  bool ok() const { return report.passed(); }
};

/// Relational closure followed by a frame check. C3, D2 and D5 are verified,
/// never manufactured; the report lists whatever still fails.
inline CloseResult close_frame(const Model& m, const LogicSpec& spec) {
  Model closed = close_relations(m, spec);
  FrameReport rep = check_frame(closed, spec);
  return {std::move(closed), std::move(rep)};
}

// ---------------------------------------------------------------------------
// Sequent semantics

/// Maps labels to world indices.
using Interpretation = std::map<Label, std::size_t>;

/// M, I |= R |- Gamma: if every relational atom holds then some labelled
/// formula holds.
inline bool satisfies_sequent(const Model& m, const Interpretation& interp, const Sequent& seq) {
  auto world = [&](Label l) {
    auto it = interp.find(l);
    if (it == interp.end()) throw ModelError("interpretation is undefined on label x" + std::to_string(l.id));
    if (it->second >= m.size()) throw ModelError("interpretation maps to an unknown world");
    return it->second;
  };
  bool antecedent_holds = true;
  for (const auto& r : seq.antecedent) {
    std::size_t a = world(r.from), b = world(r.to);
    const auto& rel = r.kind == RelKind::Box ? m.r_box : r.kind == RelKind::Ag ? m.ag(r.agent) : m.ought(r.agent);
    if (!detail::related(rel, a, b)) antecedent_holds = false;
  }
  for (const auto& lf : seq.consequent) world(lf.label);
  if (!antecedent_holds) return true;
  for (const auto& lf : seq.consequent)
    if (satisfies(m, world(lf.label), lf.formula)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json model_to_json(const Model& m) {
  using nlohmann::json;
  auto pairs = [&](const std::vector<WorldMask>& rel) {
    json out = json::array();
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = 0; b < m.size(); ++b)
        if (detail::related(rel, a, b)) out.push_back({m.worlds[a], m.worlds[b]});
    return out;
  };
  json j;
  j["agents"] = m.agents;
  j["worlds"] = m.worlds;
  j["r_box"] = pairs(m.r_box);
  json ag = json::object(), ought = json::object();
  for (int i = 1; i <= m.agents; ++i) {
    ag[std::to_string(i)] = pairs(m.ag(i));
    ought[std::to_string(i)] = pairs(m.ought(i));
  }
  j["r_ag"] = ag;
  j["r_ought"] = ought;
  json val = json::object();
  for (const auto& [atom, mask] : m.valuation) {
    json ws = json::array();
    for (std::size_t w = 0; w < m.size(); ++w)
      if (mask & bit_of(w)) ws.push_back(m.worlds[w]);
    val[atom] = ws;
  }
  j["valuation"] = val;
  return j;
}

struct LoadedModel {
  Model model;
  bool closed = false;
  FrameReport report;  // check against the closure spec; empty when not closed
};

/// Reads the model schema. With "closure": "auto", close_frame is applied
/// under closure_spec (agent count taken from the file).
inline LoadedModel model_from_json(const nlohmann::json& j, ExtSet closure_exts = {}) {
  try {
    int agents = j.at("agents").get<int>();
    Model m(agents, j.at("worlds").get<std::vector<std::string>>());
    auto load = [&](std::vector<WorldMask>& rel, const nlohmann::json& pairs) {
      for (const auto& p : pairs) {
        if (!p.is_array() || p.size() != 2) throw ModelError("relation entries must be [from, to] pairs");
        rel[m.index_of(p[0].get<std::string>())] |= bit_of(m.index_of(p[1].get<std::string>()));
      }
    };
    if (j.contains("r_box")) load(m.r_box, j["r_box"]);
    for (const char* key : {"r_ag", "r_ought"}) {
      if (!j.contains(key)) continue;
      for (const auto& [agent, pairs] : j[key].items()) {
        int i = std::stoi(agent);
        if (i < 1 || i > agents) throw ModelError(std::string(key) + ": agent " + agent + " out of range");
        load(std::string_view(key) == "r_ag" ? m.ag(i) : m.ought(i), pairs);
      }
    }
    if (j.contains("valuation"))
      for (const auto& [atom, ws] : j["valuation"].items()) {
        WorldMask mask = 0;
        for (const auto& w : ws) mask |= bit_of(m.index_of(w.get<std::string>()));
        m.valuation[atom] = mask;
      }
    LoadedModel out;
    if (j.value("closure", std::string("none")) == "auto") {
      CloseResult c = close_frame(m, LogicSpec(agents, closure_exts));
      out.model = std::move(c.model);
      out.report = std::move(c.report);
      out.closed = true;
    } else {
      out.model = std::move(m);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ModelError(std::string("malformed model JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Text and Graphviz rendering

inline std::string world_set(const Model& m, WorldMask s) {
  std::string out = "{";
  bool first = true;
  for (std::size_t w = 0; w < m.size(); ++w)
    if (s & bit_of(w)) {
      out += (first ? "" : ",") + m.worlds[w];
      first = false;
    }
  return out + "}";
}

/// One line per relation listing each world's successors, then the valuation.
inline std::string render_model(const Model& m) {
  std::string out = "worlds  ";
  for (std::size_t w = 0; w < m.size(); ++w) out += (w ? " " : "") + m.worlds[w];
  auto rel = [&](const std::string& name, const std::vector<WorldMask>& r) {
    out += "\n" + name + std::string(name.size() < 8 ? 8 - name.size() : 1, ' ');
    for (std::size_t w = 0; w < m.size(); ++w) out += (w ? " " : "") + m.worlds[w] + ":" + world_set(m, r[w]);
  };
  rel("R_box", m.r_box);
  for (int i = 1; i <= m.agents; ++i) rel("R_" + std::to_string(i), m.ag(i));
  for (int i = 1; i <= m.agents; ++i) rel("R_O" + std::to_string(i), m.ought(i));
  for (const auto& [atom, mask] : m.valuation) out += "\nV(" + atom + ")" + "  " + world_set(m, mask);
  return out + "\n";
}

/// Moments as clusters, choices as dotted clusters for agent 1, ideal
/// successors as edges.
inline std::string model_to_dot(const Model& m, std::optional<std::size_t> highlight = std::nullopt) {
  std::string out = "digraph model {\n  compound=true;\n  node [shape=circle];\n";
  std::vector<bool> placed(m.size(), false);
  int cluster = 0;
  for (std::size_t w = 0; w < m.size(); ++w) {
    if (placed[w]) continue;
    out += "  subgraph cluster_" + std::to_string(cluster++) + " {\n    style=rounded;\n";
    for (std::size_t v = 0; v < m.size(); ++v)
      if (!placed[v] && (m.r_box[w] & bit_of(v))) {
        placed[v] = true;
        std::string label = m.worlds[v];
        for (const auto& [atom, mask] : m.valuation)
          if (mask & bit_of(v)) label += "\\n" + atom;
        out += "    \"" + m.worlds[v] + "\" [label=\"" + label + "\"" +
               (highlight && *highlight == v ? ", penwidth=2" : "") + "];\n";
      }
    out += "  }\n";
  }
  for (int i = 1; i <= m.agents; ++i)
    for (std::size_t a = 0; a < m.size(); ++a)
      for (std::size_t b = 0; b < m.size(); ++b) {
        if (a < b && (m.ag(i)[a] & bit_of(b)))
          out += "  \"" + m.worlds[a] + "\" -> \"" + m.worlds[b] + "\" [dir=none, style=dotted, label=\"" +
                 std::to_string(i) + "\"];\n";
        if (m.ought(i)[a] & bit_of(b))
          out += "  \"" + m.worlds[a] + "\" -> \"" + m.worlds[b] + "\" [label=\"O" + std::to_string(i) + "\"];\n";
      }
  return out + "}\n";
}

// ---------------------------------------------------------------------------
// Random models

/// Draws a random model over `worlds` worlds that passes check_frame(spec).
/// Returns nullopt if no such model was hit within the attempt limit.
inline std::optional<Model> random_model(const LogicSpec& spec, std::size_t worlds,
                                         const std::vector<std::string>& atoms, std::mt19937_64& rng,
                                         int attempts = 200) {
  std::vector<std::string> names;
  for (std::size_t w = 0; w < worlds; ++w) names.push_back("w" + std::to_string(w));
  std::uniform_int_distribution<std::size_t> pick(0, worlds - 1);
  std::bernoulli_distribution coin(0.5);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    Model m(spec.agents, names);
    std::vector<std::size_t> moment(worlds);
    for (std::size_t w = 0; w < worlds; ++w) moment[w] = pick(rng);
    for (std::size_t a = 0; a < worlds; ++a)
      for (std::size_t b = 0; b < worlds; ++b)
        if (moment[a] == moment[b]) m.r_box[a] |= bit_of(b);
    for (int i = 1; i <= spec.agents; ++i) {
      std::vector<std::size_t> choice(worlds);
      for (std::size_t w = 0; w < worlds; ++w) choice[w] = pick(rng);
      for (std::size_t a = 0; a < worlds; ++a)
        for (std::size_t b = 0; b < worlds; ++b)
          if (moment[a] == moment[b] && choice[a] == choice[b]) m.ag(i)[a] |= bit_of(b);
    }
    for (int i = 1; i <= spec.agents; ++i) {
      std::map<std::size_t, WorldMask> ideal;
      for (std::size_t w = 0; w < worlds; ++w) {
        if (ideal.count(moment[w])) continue;
        WorldMask pool = spec.has(Ext::D3) ? m.r_box[w] : m.all();
        WorldMask set = 0;
        if (coin(rng)) {
          // union of whole choice cells
          for (std::size_t v = 0; v < worlds; ++v)
            if ((pool & bit_of(v)) && coin(rng)) set |= m.ag(i)[v] & pool;
        } else {
          for (std::size_t v = 0; v < worlds; ++v)
            if ((pool & bit_of(v)) && coin(rng)) set |= bit_of(v);
        }
        ideal[moment[w]] = set;
      }
      for (std::size_t w = 0; w < worlds; ++w) m.ought(i)[w] = ideal[moment[w]];
    }
    for (const auto& a : atoms) {
      WorldMask mask = 0;
      for (std::size_t w = 0; w < worlds; ++w)
        if (coin(rng)) mask |= bit_of(w);
      m.valuation[a] = mask;
    }
    CloseResult c = close_frame(m, spec);
    if (c.ok()) return std::move(c.model);
  }
  return std::nullopt;
}

}  // namespace stit
