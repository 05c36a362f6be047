#pragma once

// Ought-implies-Can principles, the lattice of G3DS_n X calculi and batch
// jobs that check the taxonomy against the prover.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "stit/formula.hpp"
#include "stit/kripke.hpp"
#include "stit/logic_spec.hpp"
#include "stit/oracle.hpp"
#include "stit/prover.hpp"

namespace stit {

// ---------------------------------------------------------------------------
// Principles

struct Principle {
  std::string key;
  std::string schema_text;  // with agent i and formula A
  ExtSet minimal;
  bool deliberative = false;
  bool derived = false;  // not one of the ten OiC readings
  std::function<Surface(int, const Surface&)> schema;
};

namespace detail {

using K = Surface::Kind;

inline Surface ob(int i, const Surface& a) { return Surface::unary(K::Ought, a, i); }
inline Surface pe(int i, const Surface& a) { return Surface::unary(K::Perm, a, i); }
inline Surface sti(int i, const Surface& a) { return Surface::unary(K::AgBox, a, i); }
inline Surface dia(const Surface& a) { return Surface::unary(K::Diamond, a); }
inline Surface neg(const Surface& a) { return Surface::negation(a); }
inline Surface conj(const Surface& a, const Surface& b) { return Surface::binary(K::And, a, b); }
inline Surface imp(const Surface& a, const Surface& b) { return Surface::implies(a, b); }
inline Surface od(int i, const Surface& a) { return Surface::unary(K::DelibOught, a, i); }
inline Surface oc(int i, const Surface& a) { return Surface::unary(K::CtrlOught, a, i); }

}  // namespace detail

/// The ten OiC principles followed by the two derived ones (NOiA, D5Mix).
inline const std::vector<Principle>& principles() {
  using namespace detail;
  static const std::vector<Principle> registry = {
      {"OiLP", "O{i} A -> P{i} A", ExtSet({Ext::D2}), false, false,
       [](int i, const Surface& a) { return imp(ob(i, a), pe(i, a)); }},
      {"OiAP", "O{i} A -> <> A", ExtSet({Ext::D2, Ext::D3}), false, false,
       [](int i, const Surface& a) { return imp(ob(i, a), dia(a)); }},
      {"OiA", "O{i} A -> <>[i] A", ExtSet({Ext::D3, Ext::D5}), false, false,
       [](int i, const Surface& a) { return imp(ob(i, a), dia(sti(i, a))); }},
      {"OiV", "Od{i} A -> <> ~A", ExtSet({}), true, false,
       [](int i, const Surface& a) { return imp(od(i, a), dia(neg(a))); }},
      {"OiR", "Od{i} A -> <>[i] ~[i] A", ExtSet({}), true, false,
       [](int i, const Surface& a) { return imp(od(i, a), dia(sti(i, neg(sti(i, a))))); }},
      {"OiO", "Od{i} A -> <> A & <> ~A", ExtSet({Ext::D2, Ext::D3}), true, false,
       [](int i, const Surface& a) { return imp(od(i, a), conj(dia(a), dia(neg(a)))); }},
      {"OiAO", "Od{i} A -> <>[i] A & <> A & <> ~A", ExtSet({Ext::D3, Ext::D5}), true, false,
       [](int i, const Surface& a) { return imp(od(i, a), conj(dia(sti(i, a)), conj(dia(a), dia(neg(a))))); }},
      {"OiCtrl", "Oc{i} A -> <>[i] A & <>[i] ~A", ExtSet({Ext::D3, Ext::D5}), true, false,
       [](int i, const Surface& a) { return imp(oc(i, a), conj(dia(sti(i, a)), dia(sti(i, neg(a))))); }},
      {"OiNC", "O{i} A -> O{i} <> A", ExtSet({}), false, false,
       [](int i, const Surface& a) { return imp(ob(i, a), ob(i, dia(a))); }},
      {"OiNA", "O{i} A -> O{i} <>[i] A", ExtSet({Ext::D4}), false, false,
       [](int i, const Surface& a) { return imp(ob(i, a), ob(i, dia(sti(i, a)))); }},
      {"NOiA", "O{i} (O{i} A -> <>[i] A)", ExtSet({Ext::D3, Ext::D4}), false, true,
       [](int i, const Surface& a) { return ob(i, imp(ob(i, a), dia(sti(i, a)))); }},
      {"D5Mix", "O{i} A -> P{i} <>[i] A", ExtSet({Ext::D5}), false, true,
       [](int i, const Surface& a) { return imp(ob(i, a), pe(i, dia(sti(i, a)))); }},
  };
  return registry;
}

/// The ten OiC principles only.
inline std::vector<const Principle*> oic_principles() {
  std::vector<const Principle*> out;
  for (const auto& p : principles())
    if (!p.derived) out.push_back(&p);
  return out;
}

inline const Principle& principle(std::string_view key) {
  for (const auto& p : principles())
    if (p.key == key) return p;
  throw std::invalid_argument("unknown principle '" + std::string(key) + "'");
}

/// NNF instance of the schema for agent i and formula f.
inline Formula instantiate(const Principle& p, AgentId i, const Surface& f) { return to_nnf(p.schema(i.index, f)); }

inline Formula instantiate(const Principle& p, AgentId i = AgentId{1}, const std::string& atom = "p") {
  return instantiate(p, i, Surface::atom(atom));
}

inline LogicSpec minimal_calculus(const Principle& p, int agents = 1) { return LogicSpec(agents, p.minimal); }

/// Formula characterizing each extension, used to certify calculus
/// equivalences: D2 O p -> P p, D3 P p -> <> p, D4 O p -> O [i] p,
/// D5 O p -> P [i] p.
inline Formula witness_axiom(Ext e, int agent = 1) {
  using namespace detail;
  const Surface p = Surface::atom("p");
  switch (e) {
    case Ext::D2:
      return to_nnf(imp(ob(agent, p), pe(agent, p)));
    case Ext::D3:
      return to_nnf(imp(pe(agent, p), dia(p)));
    case Ext::D4:
      return to_nnf(imp(ob(agent, p), ob(agent, sti(agent, p))));
    case Ext::D5:
      return to_nnf(imp(ob(agent, p), pe(agent, sti(agent, p))));
  }
  throw std::logic_error("unreachable");
}

// ---------------------------------------------------------------------------
// Lattice of calculi

struct LatticeNode {
  ExtSet canonical;  // the largest member
  std::vector<ExtSet> members;
  std::vector<ExtSet> successors;  // canonical sets of the immediately stronger nodes
};

/// The ten equivalence classes of the 16 extension sets and the edges
/// between them, weaker to stronger.
inline const std::vector<LatticeNode>& lattice() {
  static const std::vector<LatticeNode> nodes = [] {
    const ExtSet e0 = ExtSet({}), e2 = ExtSet({Ext::D2}), e3 = ExtSet({Ext::D3}), e4 = ExtSet({Ext::D4});
    const ExtSet e25 = ExtSet({Ext::D2, Ext::D5}), e23 = ExtSet({Ext::D2, Ext::D3}), e34 = ExtSet({Ext::D3, Ext::D4});
    const ExtSet e245 = ExtSet({Ext::D2, Ext::D4, Ext::D5}), e235 = ExtSet({Ext::D2, Ext::D3, Ext::D5});
    const ExtSet top = ExtSet({Ext::D2, Ext::D3, Ext::D4, Ext::D5});
    return std::vector<LatticeNode>{
        {e0, {e0}, {e2, e3, e4}},
        {e2, {e2}, {e23, e25}},
        {e3, {e3}, {e23, e34}},
        {e4, {e4}, {e245, e34}},
        {e25, {ExtSet({Ext::D5}), e25}, {e235, e245}},
        {e23, {e23}, {e235}},
        {e34, {e34}, {top}},
        {e245, {ExtSet({Ext::D2, Ext::D4}), ExtSet({Ext::D4, Ext::D5}), e245}, {top}},
        {e235, {ExtSet({Ext::D3, Ext::D5}), e235}, {top}},
        {top, {ExtSet({Ext::D2, Ext::D3, Ext::D4}), ExtSet({Ext::D3, Ext::D4, Ext::D5}), top}, {}},
    };
  }();
  return nodes;
}

inline std::size_t lattice_index(ExtSet x) {
  const auto& ns = lattice();
  for (std::size_t k = 0; k < ns.size(); ++k)
    if (std::find(ns[k].members.begin(), ns[k].members.end(), x) != ns[k].members.end()) return k;
  throw std::logic_error("extension set missing from the lattice");
}

inline const LatticeNode& lattice_node(ExtSet x) { return lattice()[lattice_index(x)]; }

/// node(x) <= node(y) in the reflexive-transitive closure of the edges.
inline bool lattice_leq(ExtSet x, ExtSet y) {
  const auto& ns = lattice();
  const std::size_t target = lattice_index(y);
  std::vector<std::size_t> todo{lattice_index(x)};
  std::vector<bool> seen(ns.size(), false);
  while (!todo.empty()) {
    std::size_t k = todo.back();
    todo.pop_back();
    if (k == target) return true;
    if (seen[k]) continue;
    seen[k] = true;
    for (ExtSet s : ns[k].successors) todo.push_back(lattice_index(s));
  }
  return false;
}

/// Canonical sets of the nodes with an edge into node(x).
inline std::vector<ExtSet> lattice_predecessors(ExtSet x) {
  std::vector<ExtSet> out;
  const ExtSet c = lattice_node(x).canonical;
  for (const auto& n : lattice())
    if (std::find(n.successors.begin(), n.successors.end(), c) != n.successors.end()) out.push_back(n.canonical);
  return out;
}

inline std::string node_label(const LatticeNode& n) {
  std::string out;
  for (std::size_t k = 0; k < n.members.size(); ++k) out += (k ? " = " : "") + n.members[k].str();
  return out;
}

/// Graphviz rendering. `status` maps canonical sets to true (pass) or false
/// (fail); nodes without an entry stay uncolored.
inline std::string lattice_to_dot(const std::map<unsigned, bool>& status = {}) {
  std::ostringstream out;
  out << "digraph lattice {\n  rankdir=BT;\n  node [shape=box, style=rounded];\n";
  for (const auto& n : lattice()) {
    out << "  n" << n.canonical.mask() << " [label=\"" << node_label(n) << "\"";
    if (auto it = status.find(n.canonical.mask()); it != status.end())
      out << ", style=\"rounded,filled\", fillcolor=" << (it->second ? "palegreen" : "salmon");
    out << "];\n";
  }
  for (const auto& n : lattice())
    for (ExtSet s : n.successors) out << "  n" << n.canonical.mask() << " -> n" << s.mask() << ";\n";
  out << "}\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Verification helpers

/// Confirms a Refuted outcome independently: the model is a DS_n X model
/// and the interpretation falsifies the root sequent.
inline bool refutation_verified(const Refutation& r, const Sequent& root, const LogicSpec& spec) {
  if (!check_frame(r.model, spec).passed()) return false;
  try {
    return !satisfies_sequent(r.model, r.interp, root);
  } catch (const ModelError&) {
    return false;
  }
}

inline bool refutation_verified(const Refutation& r, const Formula& f, const LogicSpec& spec) {
  return check_frame(r.model, spec).passed() && !satisfies(r.model, r.world, f);
}

/// The model of the OiNA refutation in DS_1{D2}: worlds w, u, v, z.
inline Model oina_countermodel() {
  Model m(1, {"w", "u", "v", "z"});
  const std::size_t w = 0, u = 1, v = 2, z = 3;
  for (std::size_t k = 0; k < 4; ++k) m.r_box[k] = m.ag(1)[k] = bit_of(k);
  m.r_box[v] |= bit_of(z);
  m.r_box[z] |= bit_of(v);
  m.ag(1)[v] |= bit_of(z);
  m.ag(1)[z] |= bit_of(v);
  m.ought(1)[w] = bit_of(u) | bit_of(v);
  m.ought(1)[u] = bit_of(u);
  m.ought(1)[v] = bit_of(v);
  m.ought(1)[z] = bit_of(v);
  m.valuation["p"] = bit_of(w) | bit_of(v) | bit_of(u);
  return m;
}

// ---------------------------------------------------------------------------
// Endorsement

struct Endorsement {
  std::vector<std::string> proved;
  std::vector<std::string> refuted;
  std::vector<std::string> undetermined;
  std::map<std::string, SearchOutcome> outcomes;

  bool contains(const std::string& key) const {
    return std::find(proved.begin(), proved.end(), key) != proved.end();
  }
};

/// Memoizes prover runs keyed by (formula, spec) so that endorsement and
/// report jobs share proof objects.
class ProofCache {
 public:
  explicit ProofCache(Budget budget = {}) : budget_(budget) {}

  const SearchOutcome& prove(const Formula& f, const LogicSpec& spec) {
    auto key = std::make_tuple(render(f), spec.agents, spec.exts.mask());
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, stit::prove(f, spec, budget_)).first;
    return it->second;
  }

 private:
  Budget budget_;
  std::map<std::tuple<std::string, int, unsigned>, SearchOutcome> cache_;
};

/// Principles whose agent-1 instance is Proved in the minimal calculus of
/// `p`. Unknown outcomes are listed as undetermined.
inline Endorsement endorsement(const Principle& p, ProofCache& cache) {
  Endorsement out;
  const LogicSpec spec = minimal_calculus(p);
  for (const auto& q : principles()) {
    if (q.derived) continue;
    const SearchOutcome& o = cache.prove(instantiate(q), spec);
    out.outcomes.emplace(q.key, o);
    (o.status == Status::Proved    ? out.proved
     : o.status == Status::Refuted ? out.refuted
                                   : out.undetermined)
        .push_back(q.key);
  }
  return out;
}

inline Endorsement endorsement(const Principle& p, const Budget& budget = {}) {
  ProofCache cache(budget);
  return endorsement(p, cache);
}

// ---------------------------------------------------------------------------
// Claim report

struct Claim {
  std::string id;
  std::string group;
  LogicSpec spec;
  std::string formula;  // rendered query, empty for model claims
  Status expected = Status::Proved;
  std::optional<SearchOutcome> outcome;
  bool passed = false;
  std::string note;
};

struct ClaimReport {
  std::vector<Claim> claims;

  bool passed() const {
    return std::all_of(claims.begin(), claims.end(), [](const Claim& c) { return c.passed; });
  }
  std::size_t failures() const {
    return static_cast<std::size_t>(std::count_if(claims.begin(), claims.end(), [](const Claim& c) { return !c.passed; }));
  }

  std::string table() const {
    std::ostringstream out;
    std::string group;
    for (const auto& c : claims) {
      if (c.group != group) {
        group = c.group;
        out << "\n" << group << "\n";
      }
      char line[512];
      std::snprintf(line, sizeof line, "  %-4s %-40s %-16s %-8s %s\n", c.passed ? "ok" : "FAIL", c.id.c_str(),
                    c.spec.exts.str().c_str(),
                    c.outcome ? std::string(status_name(c.outcome->status)).c_str() : "-", c.note.c_str());
      out << line;
    }
    out << "\n" << claims.size() - failures() << "/" << claims.size() << " claims hold\n";
    return out.str();
  }

  nlohmann::json to_json(bool artifacts = false) const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : claims) {
      nlohmann::json j = {{"id", c.id},
                          {"group", c.group},
                          {"agents", c.spec.agents},
                          {"ext", c.spec.exts.str()},
                          {"formula", c.formula},
                          {"expected", status_name(c.expected)},
                          {"passed", c.passed},
                          {"note", c.note}};
      if (c.outcome) {
        j["status"] = status_name(c.outcome->status);
        j["steps"] = c.outcome->stats.steps;
        if (artifacts) j["artifact"] = outcome_to_json(*c.outcome);
      }
      arr.push_back(std::move(j));
    }
    return {{"claims", arr}, {"passed", passed()}, {"failures", failures()}};
  }

  /// Lattice colored by the claims made about each calculus.
  std::string to_dot() const {
    std::map<unsigned, bool> status;
    for (const auto& c : claims) {
      if (c.spec.agents != 1) continue;
      unsigned k = lattice_node(c.spec.exts).canonical.mask();
      auto [it, inserted] = status.emplace(k, c.passed);
      if (!inserted) it->second = it->second && c.passed;
    }
    return lattice_to_dot(status);
  }
};

/// Runs the taxonomy checks: minimal calculi, the monotone sweep,
/// minimality against lattice predecessors, equivalence classes, the two
/// worked examples and the remaining derived theorems.
inline ClaimReport verify_claims(const Budget& budget = {}) {
  ClaimReport rep;
  ProofCache cache(budget);
  auto run = [&](std::string id, std::string group, LogicSpec spec, const Formula& f, Status expected) {
    Claim c{std::move(id), std::move(group), spec, render(f), expected, cache.prove(f, spec), false, {}};
    const SearchOutcome& o = *c.outcome;
    if (o.status == Status::Proved) {
      ProofCheck chk = validate_proof(*o.proof, spec);
      c.note = chk.ok ? std::to_string(o.proof->size()) + "-node proof, validated" : "invalid proof: " + chk.diagnostic;
      c.passed = expected == Status::Proved && chk.ok;
    } else if (o.status == Status::Refuted) {
      bool ok = refutation_verified(*o.refutation, f, spec);
      c.note = std::to_string(o.refutation->model.size()) + "-world countermodel" + (ok ? ", verified" : ", NOT verified");
      c.passed = expected == Status::Refuted && ok;
    } else {
      c.note = std::string(reason_name(o.reason));
    }
    rep.claims.push_back(std::move(c));
    return rep.claims.size() - 1;
  };

  for (const auto* p : oic_principles())
    run(p->key + " minimal", "minimal calculi", minimal_calculus(*p), instantiate(*p), Status::Proved);

  for (const auto* p : oic_principles())
    for (ExtSet y : ExtSet::all())
      if (y != p->minimal && lattice_leq(p->minimal, y))
        run(p->key + " above minimal", "monotone sweep", LogicSpec(1, y), instantiate(*p), Status::Proved);

  for (const auto* p : oic_principles()) {
    if (p->minimal.empty()) continue;
    std::optional<std::size_t> hit;
    for (ExtSet pred : lattice_predecessors(p->minimal)) {
      std::size_t k = run(p->key + " below minimal", "minimality", LogicSpec(1, pred), instantiate(*p), Status::Refuted);
      if (rep.claims[k].passed) {
        hit = k;
        break;
      }
      rep.claims.pop_back();
    }
    if (!hit) {
      Claim c{p->key + " below minimal", "minimality", LogicSpec(1, p->minimal), render(instantiate(*p)),
              Status::Refuted, std::nullopt, false, "no predecessor refutes"};
      rep.claims.push_back(std::move(c));
    }
  }

  for (Ext e : kAllExts) {
    const Formula w = witness_axiom(e);
    const LogicSpec own(1, ExtSet({e})), base(1, {});
    Claim c{std::string(ext_name(e)) + " witness semantics", "witness axioms", own, render(w), Status::Proved,
            std::nullopt, false, {}};
    const bool valid = !enumerate_countermodel(w, own, 3);
    const bool separates = enumerate_countermodel(w, base, 3).has_value();
    c.passed = valid && separates;
    c.note = std::string(valid ? "no countermodel <= 3 worlds" : "countermodel in own class") +
             (separates ? ", refuted in {}" : ", valid in {}");
    rep.claims.push_back(std::move(c));
  }

  for (const auto& node : lattice())
    for (ExtSet x : node.members)
      for (ExtSet y : node.members) {
        if (x == y) continue;
        for (Ext e : kAllExts)
          if (x.has(e) && !y.has(e))
            run(std::string(ext_name(e)) + " witness, " + x.str() + " = " + y.str(), "equivalence classes",
                LogicSpec(1, y), witness_axiom(e), Status::Proved);
      }

  const ExtSet d35 = ExtSet({Ext::D3, Ext::D5}), d234 = ExtSet({Ext::D2, Ext::D3, Ext::D4});
  const Formula oia = instantiate(principle("OiA"));
  const Formula d4w = witness_axiom(Ext::D4);
  run("O p -> <>[1] p", "strict edge {D3,D5} < {D2,D3,D4}", LogicSpec(1, d35), oia, Status::Proved);
  run("O p -> <>[1] p", "strict edge {D3,D5} < {D2,D3,D4}", LogicSpec(1, d234), oia, Status::Proved);
  run("O p -> O [1] p", "strict edge {D3,D5} < {D2,D3,D4}", LogicSpec(1, d234), d4w, Status::Proved);
  run("O p -> O [1] p", "strict edge {D3,D5} < {D2,D3,D4}", LogicSpec(1, d35), d4w, Status::Refuted);

  {
    const LogicSpec d2(1, ExtSet({Ext::D2}));
    const Formula oina = instantiate(principle("OiNA"));
    CloseResult closed = close_frame(oina_countermodel(), d2);
    Claim c{"shipped model", "OiNA countermodel in {D2}", d2, render(oina), Status::Refuted, std::nullopt, false, {}};
    c.passed = closed.ok() && !satisfies(closed.model, "w", oina);
    c.note = closed.ok() ? (c.passed ? "frame ok, false at w" : "frame ok, true at w") : closed.report.str();
    rep.claims.push_back(std::move(c));
    run("proof search", "OiNA countermodel in {D2}", d2, oina, Status::Refuted);
  }

  {
    using namespace detail;
    const Surface p = Surface::atom("p");
    auto f = [](const Surface& s) { return to_nnf(s); };
    const std::string g = "derived theorems";
    run("NOiA", g, LogicSpec(1, ExtSet({Ext::D3, Ext::D4})), instantiate(principle("NOiA")), Status::Proved);
    run("D5Mix", g, LogicSpec(1, ExtSet({Ext::D5})), instantiate(principle("D5Mix")), Status::Proved);
    run("O [1] p -> O p", g, LogicSpec(1, {}), f(imp(ob(1, sti(1, p)), ob(1, p))), Status::Proved);
    run("O p -> O [1] p", g, LogicSpec(1, ExtSet({Ext::D4})), f(imp(ob(1, p), ob(1, sti(1, p)))), Status::Proved);
    run("O [1] p -> O p", g, LogicSpec(1, ExtSet({Ext::D4})), f(imp(ob(1, sti(1, p)), ob(1, p))), Status::Proved);
    run("O [1] p -> <>[1] p", g, LogicSpec(1, d35), f(imp(ob(1, sti(1, p)), dia(sti(1, p)))), Status::Proved);
    run("O top", g, LogicSpec(1, {}), f(ob(1, Surface::top())), Status::Proved);
    run("[1] top", g, LogicSpec(1, {}), f(sti(1, Surface::top())), Status::Proved);
    const Surface q = Surface::atom("q");
    run("independence", g, LogicSpec(2, {}),
        f(imp(conj(dia(sti(1, p)), dia(sti(2, q))), dia(conj(sti(1, p), sti(2, q))))), Status::Proved);
  }
  return rep;
}

}  // namespace stit
