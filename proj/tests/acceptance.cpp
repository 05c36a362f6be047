#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace stit;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void fail(const std::string& why) {
    if (pass) detail << why;
    pass = false;
  }
};

Formula nnf(const char* text, int agents = 1) { return parse_nnf(text, agents); }

// Proved outcomes collected across criteria, for the soundness fuzz and the mutation check.
struct ProvedFormula {
  std::string name;
  Formula formula;
  LogicSpec spec;
  ProofTree proof;
};
std::vector<ProvedFormula> g_proved;

void record(const std::string& name, const Formula& f, const LogicSpec& spec, const SearchOutcome& o) {
  if (o.status == Status::Proved) g_proved.push_back({name, f, spec, *o.proof});
}

// Proves and checks the outcome: status, tree validity or model validity, and time.
bool expect(Verdict& v, const std::string& name, const Formula& f, const LogicSpec& spec, Status want, double limit,
            std::size_t max_worlds = kMaxWorlds) {
  const auto t = Clock::now();
  SearchOutcome o = prove(f, spec);
  const double s = since(t);
  record(name, f, spec, o);
  std::ostringstream why;
  if (o.status != want) {
    why << name << " in " << spec.str() << ": " << status_name(o.status);
  } else if (s > limit) {
    why << name << " in " << spec.str() << ": " << s << " s";
  } else if (want == Status::Proved && !validate_proof(*o.proof, spec).ok) {
    why << name << " in " << spec.str() << ": invalid proof";
  } else if (want == Status::Refuted &&
             (!refutation_verified(*o.refutation, f, spec) || o.refutation->model.size() > max_worlds)) {
    why << name << " in " << spec.str() << ": countermodel rejected";
  }
  if (!why.str().empty()) v.fail(why.str());
  return why.str().empty();
}

const ExtSet kD2{Ext::D2}, kD35{Ext::D3, Ext::D5}, kD234{Ext::D2, Ext::D3, Ext::D4};

Verdict criterion1() {
  Verdict v;
  for (const Principle* p : oic_principles())
    expect(v, p->key, instantiate(*p, AgentId{1}, "p0"), minimal_calculus(*p), Status::Proved, 5.0);
  v.detail << "10 principles proved in their minimal calculi";
  return v;
}

Verdict criterion2() {
  Verdict v;
  const auto t = Clock::now();
  std::size_t queries = 0;
  for (const Principle* p : oic_principles())
    for (ExtSet x : ExtSet::all())
      if (lattice_leq(p->minimal, x)) {
        expect(v, p->key, instantiate(*p, AgentId{1}, "p0"), LogicSpec(1, x), Status::Proved, 180.0);
        ++queries;
      }
  if (since(t) > 180.0) v.fail("sweep exceeded 3 min");
  if (v.pass) v.detail << queries << " queries";
  return v;
}

Verdict criterion3() {
  Verdict v;
  const LogicSpec d2(1, kD2);
  const Formula oina = nnf("O{1} p -> O{1}<>[1] p");
  std::ifstream in(STIT_SOURCE_DIR "/models/ex52.json");
  if (!in) {
    v.fail("models/ex52.json missing");
    return v;
  }
  LoadedModel lm = model_from_json(nlohmann::json::parse(in), kD2);
  if (!lm.closed || !check_frame(lm.model, d2).passed()) v.fail("shipped model is not a DS_1{D2} frame");
  if (satisfies(lm.model, "w", oina)) v.fail("shipped model does not falsify OiNA at w");
  if (stit::testing::naive_holds(lm.model, lm.model.index_of("w"), oina))
    v.fail("naive evaluation disagrees on the shipped model");
  if (expect(v, "OiNA", oina, d2, Status::Refuted, 5.0)) {
    const Refutation r = *prove(oina, d2).refutation;
    if (stit::testing::naive_holds(r.model, r.world, oina)) v.fail("naive evaluation accepts the prover's model");
    if (v.pass) v.detail << "shipped model ok; prover model has " << r.model.size() << " worlds";
  }
  return v;
}

Verdict criterion4() {
  Verdict v;
  const auto t = Clock::now();
  const Formula oia = nnf("O{1} p -> <>[1] p"), collapse = nnf("O{1} p -> O{1}[1] p");
  expect(v, "OiA", oia, LogicSpec(1, kD35), Status::Proved, 30.0);
  expect(v, "OiA", oia, LogicSpec(1, kD234), Status::Proved, 30.0);
  expect(v, "O p -> O[1] p", collapse, LogicSpec(1, kD234), Status::Proved, 30.0);
  expect(v, "O p -> O[1] p", collapse, LogicSpec(1, kD35), Status::Refuted, 30.0, 6);
  if (since(t) > 30.0) v.fail("exceeded 30 s");
  if (v.pass) v.detail << "OiA in both calculi; the edge {D3,D5} < {D2,D3,D4} is strict";
  return v;
}

Verdict criterion5() {
  Verdict v;
  const LogicSpec none(1, {});
  expect(v, "NOiA", nnf("O{1}(O{1} p -> <>[1] p)"), LogicSpec(1, {Ext::D3, Ext::D4}), Status::Proved, 5.0);
  expect(v, "O p -> P <>[1] p", nnf("O{1} p -> P{1}<>[1] p"), LogicSpec(1, {Ext::D5}), Status::Proved, 5.0);
  expect(v, "O[1] p -> O p", nnf("O{1}[1] p -> O{1} p"), none, Status::Proved, 5.0);
  expect(v, "O p -> O[1] p", nnf("O{1} p -> O{1}[1] p"), LogicSpec(1, {Ext::D4}), Status::Proved, 5.0);
  expect(v, "O[1] p -> O p", nnf("O{1}[1] p -> O{1} p"), LogicSpec(1, {Ext::D4}), Status::Proved, 5.0);
  expect(v, "dominance OiC", nnf("O{1}[1] p -> <>[1] p"), LogicSpec(1, kD35), Status::Proved, 5.0);
  if (v.pass) v.detail << "6 queries";
  return v;
}

Verdict criterion6() {
  Verdict v;
  const auto t = Clock::now();
  for (Ext e : {Ext::D2, Ext::D3, Ext::D4, Ext::D5}) {
    const Formula w = witness_axiom(e);
    if (enumerate_countermodel(w, LogicSpec(1, ExtSet{e}), 3)) v.fail(render(w) + ": oracle countermodel in own class");
    if (!enumerate_countermodel(w, LogicSpec(1, {}), 3)) v.fail(render(w) + ": no oracle countermodel in {}");
  }
  std::size_t queries = 0;
  for (const auto& node : lattice()) {
    if (node.members.size() < 2) continue;
    for (ExtSet from : node.members)
      for (ExtSet to : node.members) {
        if (from == to) continue;
        for (Ext e : {Ext::D2, Ext::D3, Ext::D4, Ext::D5})
          if (from.has(e)) {
            expect(v, "witness " + std::string(ext_name(e)) + " of " + from.str(), witness_axiom(e), LogicSpec(1, to),
                   Status::Proved, 60.0);
            ++queries;
          }
      }
  }
  if (since(t) > 60.0) v.fail("exceeded 1 min");
  if (v.pass) v.detail << "oracle certified 4 witnesses; " << queries << " transfer queries";
  return v;
}

Verdict criterion7() {
  Verdict v;
  const auto t = Clock::now();
  std::mt19937_64 rng(7);
  Budget budget;
  budget.max_labels = 32;
  budget.max_steps = 5000;
  budget.max_seconds = 2.0;
  std::size_t proved = 0, refuted = 0, unknown = 0;
  for (int k = 0; k < 200; ++k) {
    const Formula f = to_nnf(stit::testing::random_surface(rng, 3, {"p", "q"}, 1));
    for (ExtSet x : ExtSet::all()) {
      const LogicSpec spec(1, x);
      SearchOutcome o = prove(f, spec, budget);
      if (o.status == Status::Proved) {
        ++proved;
        if (enumerate_countermodel(f, spec, 3)) v.fail("proved with countermodel: " + render(f) + " " + spec.str());
        if (!validate_proof(*o.proof, spec).ok) v.fail("invalid proof: " + render(f) + " " + spec.str());
        record("random", f, spec, o);
      } else if (o.status == Status::Refuted) {
        ++refuted;
        if (!refutation_verified(*o.refutation, f, spec) ||
            stit::testing::naive_holds(o.refutation->model, o.refutation->world, f))
          v.fail("unverified refutation: " + render(f) + " " + spec.str());
      } else {
        ++unknown;
      }
    }
  }
  if (since(t) > 600.0) v.fail("exceeded 10 min");
  if (v.pass) v.detail << proved << " proved, " << refuted << " refuted, " << unknown << " unknown";
  return v;
}

Verdict criterion8() {
  Verdict v;
  std::mt19937_64 rng(8);
  std::map<unsigned, std::vector<Model>> models;
  for (ExtSet x : ExtSet::all())
    for (int k = 0; k < 50; ++k) {
      Model m = stit::testing::draw_model(LogicSpec(1, x), 1 + k % 4, {"p", "p0"}, rng);
      if (!check_frame(m, LogicSpec(1, x)).passed()) v.fail("drawn model fails its frame check");
      models[x.mask()].push_back(std::move(m));
    }
  std::size_t checks = 0;
  for (const auto& pf : g_proved) {
    if (pf.name == "random") continue;
    for (ExtSet x : ExtSet::all())
      if (pf.spec.exts.subset_of(x))
        for (const Model& m : models[x.mask()]) {
          ++checks;
          if (!globally_true(m, pf.formula)) v.fail(pf.name + " false on a " + x.str() + " model");
        }
  }
  std::size_t trials = 0;
  for (; trials < 1000; ++trials) {
    const std::size_t n = 2 + rng() % 7;
    std::vector<RelAtom> atoms;
    for (std::size_t k = rng() % 12; k > 0; --k) {
      Label a{static_cast<std::uint32_t>(rng() % n)}, b{static_cast<std::uint32_t>(rng() % n)};
      int i = 1 + static_cast<int>(rng() % 2);
      switch (rng() % 3) {
        case 0:
          atoms.push_back(RelAtom::box(a, b));
          break;
        case 1:
          atoms.push_back(RelAtom::ag(i, a, b));
          break;
        default:
          atoms.push_back(RelAtom::ought(i, a, b));
      }
    }
    auto dia = stit::testing::naive_closure(atoms, n, [](const RelAtom& r) { return r.kind != RelKind::Ought; });
    auto ag1 = stit::testing::naive_closure(
        atoms, n, [](const RelAtom& r) { return r.kind == RelKind::Ag && r.agent == 1; });
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b)
        if (diamond_path(atoms, Label{a}, Label{b}) != dia[a][b] || i_path(atoms, Label{a}, Label{b}, 1) != ag1[a][b])
          v.fail("path relation disagrees with naive closure");
  }
  if (v.pass) v.detail << checks << " model checks; " << trials << " path trials";
  return v;
}

// The tree without node k: its parent adopts k's only premise.
ProofTree splice(const ProofTree& t, std::uint32_t k) {
  ProofTree out;
  out.root = t.root;
  std::map<std::uint32_t, std::uint32_t> index;
  std::function<std::uint32_t(std::uint32_t)> copy = [&](std::uint32_t n) -> std::uint32_t {
    if (n == k) return copy(t.nodes[n].children.at(0));
    const auto at = static_cast<std::uint32_t>(out.nodes.size());
    out.nodes.push_back({t.nodes[n].step, {}});
    std::vector<std::uint32_t> kids;
    for (std::uint32_t c : t.nodes[n].children) kids.push_back(copy(c));
    out.nodes[at].children = kids;
    return at;
  };
  copy(0);
  return out;
}

bool adds_atom_only(RuleId r) {
  switch (r) {
    case RuleId::D1:
    case RuleId::D2:
    case RuleId::D3:
    case RuleId::D4:
    case RuleId::D5One:
    case RuleId::D5Two:
    case RuleId::IOA:
      return true;
    default:
      return false;
  }
}

// Node k's atom supports a later step if that step's side condition fails
// once the atom is removed from its conclusion.
bool supports(const ProofTree& t, const LogicSpec& spec, std::uint32_t k) {
  std::map<std::uint32_t, SequentState> states;
  replay_proof(t, spec, [&](std::uint32_t n, const SequentState& st, int) { states.emplace(n, st); });
  SequentState after = states.at(k);
  apply_step(after, t.nodes[k].step, 0);
  const auto before = states.at(k).to_sequent().antecedent;
  std::vector<RelAtom> added;
  for (const auto& a : after.to_sequent().antecedent)
    if (std::none_of(before.begin(), before.end(), [&](const RelAtom& b) { return b.same_as(a); }))
      added.push_back(a);
  std::vector<std::uint32_t> below{t.nodes[k].children.at(0)};
  while (!below.empty()) {
    const std::uint32_t d = below.back();
    below.pop_back();
    Sequent s = states.at(d).to_sequent();
    std::erase_if(s.antecedent, [&](const RelAtom& a) {
      return std::any_of(added.begin(), added.end(), [&](const RelAtom& b) { return b.same_as(a); });
    });
    if (!check_step(SequentState(s, spec.agents), t.nodes[d].step, spec).empty()) return true;
    for (std::uint32_t c : t.nodes[d].children) below.push_back(c);
  }
  return false;
}

Verdict criterion9() {
  Verdict v;
  std::set<std::string> seen;
  std::size_t trees = 0, mutants = 0;
  for (const auto& pf : g_proved) {
    if (trees == 20) break;
    const std::string key = render(pf.formula) + pf.spec.str();
    if (!seen.insert(key).second) continue;
    const ProofTree& t = pf.proof;
    std::size_t here = 0;
    for (std::uint32_t k = 0; k < t.nodes.size(); ++k) {
      const Step& s = t.nodes[k].step;
      if (s.rule == RuleId::D5Two) {
        ProofTree m = t;
        m.nodes[k].step.d5_id += 1000;
        ++here;
        if (validate_proof(m, pf.spec).ok) v.fail(pf.name + " " + pf.spec.str() + ": relinked D5Two accepted");
      }
      if (adds_atom_only(s.rule) && supports(t, pf.spec, k)) {
        ++here;
        if (validate_proof(splice(t, k), pf.spec).ok)
          v.fail(pf.name + " " + pf.spec.str() + ": tree without supporting " + rule_label(s.rule, s.agent) +
                 " accepted");
      }
    }
    if (here) {
      ++trees;
      mutants += here;
    }
  }
  if (trees < 20) v.fail("only " + std::to_string(trees) + " mutable trees");
  if (v.pass) v.detail << mutants << " mutants of " << trees << " trees rejected";
  return v;
}

Verdict criterion10() {
  Verdict v;
  const LogicSpec none(1, {});
  expect(v, "O top", nnf("O{1} top"), none, Status::Proved, 5.0);
  expect(v, "[1] top", nnf("[1] top"), none, Status::Proved, 5.0);
  expect(v, "OiNC", nnf("O{1} p -> O{1}<> p"), none, Status::Proved, 5.0);
  expect(v, "OiR", nnf("Od{1} p -> <>[1] ~[1] p"), none, Status::Proved, 5.0);
  expect(v, "IOA", nnf("<>[1] p & <>[2] q -> <>([1] p & [2] q)", 2), LogicSpec(2, {}), Status::Proved, 10.0);
  if (v.pass) v.detail << "5 queries";
  return v;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"minimal calculi", criterion1},     {"monotone sweep", criterion2},  {"OiNA countermodel", criterion3},
      {"OiA derivations", criterion4},  {"derived theorems", criterion5}, {"equivalence classes", criterion6},
      {"oracle agreement", criterion7},    {"soundness fuzz", criterion8},  {"proof mutation", criterion9},
      {"base validities", criterion10},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto t = Clock::now();
    Verdict v = criteria[k].second();
    std::printf("criterion %2zu  %s  %-22s %7.2f s  %s\n", k + 1, v.pass ? "PASS" : "FAIL", criteria[k].first,
                since(t), v.detail.str().c_str());
    std::fflush(stdout);
    failures += v.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
