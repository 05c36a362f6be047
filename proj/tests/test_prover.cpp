#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace stit;

namespace {

Formula nnf(const char* text, int agents = 1) { return parse_nnf(text, agents); }

}  // namespace

TEST(Prover, ProvesExcludedMiddle) {
  SearchOutcome o = prove(nnf("p | ~p"), LogicSpec(1, {}));
  ASSERT_EQ(o.status, Status::Proved);
  EXPECT_TRUE(validate_proof(*o.proof, LogicSpec(1, {})).ok);
  EXPECT_FALSE(o.refutation);

  auto ps = parse_sequent("|- x: p, x: ~p", 1);
  o = prove_sequent(ps.sequent, LogicSpec(1, {}));
  ASSERT_EQ(o.status, Status::Proved);
  EXPECT_EQ(o.proof->nodes.size(), 1u);
}

TEST(Prover, OughtOfTautologyNeedsNoExtension) {
  for (ExtSet x : ExtSet::all()) {
    SearchOutcome o = prove(nnf("O{1}(p | ~p)"), LogicSpec(1, x));
    ASSERT_EQ(o.status, Status::Proved) << x.str();
    EXPECT_TRUE(validate_proof(*o.proof, LogicSpec(1, x)).ok);
  }
}

TEST(Prover, RefutesPermissionWithoutIdealSupport) {
  auto ps = parse_sequent("RO1(x,y) |- x: P{1} p", 1);
  const LogicSpec spec(1, {});
  SearchOutcome o = prove_sequent(ps.sequent, spec, {}, ps.names);
  ASSERT_EQ(o.status, Status::Refuted);
  ASSERT_TRUE(o.refutation);
  EXPECT_TRUE(refutation_verified(*o.refutation, ps.sequent, spec));
  EXPECT_EQ(o.refutation->model.worlds[o.refutation->world], "x");
}

TEST(Prover, SingleLiteralRefutation) {
  auto ps = parse_sequent("|- x: ~p", 1);
  SearchOutcome o = prove_sequent(ps.sequent, LogicSpec(1, {}), {}, ps.names);
  ASSERT_EQ(o.status, Status::Refuted);
  const Model& m = o.refutation->model;
  EXPECT_EQ(m.worlds, std::vector<std::string>{"x"});
  EXPECT_EQ(m.valuation.at("p"), 1u);
}

TEST(Prover, ExtractsTheFourWorldModelFromItsTopsequent) {
  auto ps = parse_sequent("RO1(w,u), R1(v,z), RO1(w,v) |- w: P{1} ~p, v: ~p, u: ~p, z: p", 1);
  const LogicSpec d2(1, {Ext::D2});
  SequentState st(ps.sequent, 1);
  auto r = extract_countermodel(st, ps.sequent, d2, ps.names);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->model, oina_countermodel()) << render_model(r->model);
  EXPECT_EQ(r->world, 0u);
}

TEST(Prover, OiNaHasAThreeWorldCountermodelUnderD2) {
  const LogicSpec d2(1, {Ext::D2});
  const Formula oina = nnf("O{1} p -> O{1}<>[1] p");
  SearchOutcome o = prove(oina, d2);
  ASSERT_EQ(o.status, Status::Refuted);
  EXPECT_TRUE(refutation_verified(*o.refutation, oina, d2));
  EXPECT_EQ(o.refutation->model.size(), 3u);
  // an ideal world whose choice cell holds a non-ideal ~p world
  const Model& m = o.refutation->model;
  const std::size_t w = o.refutation->world;
  bool shape = false;
  for (std::size_t v = 0; v < m.size(); ++v)
    if (m.ought(1)[w] & bit_of(v))
      for (std::size_t z = 0; z < m.size(); ++z)
        shape = shape || ((m.ag(1)[v] & bit_of(z)) && !(m.ought(1)[w] & bit_of(z)) && !(m.valuation.at("p") & bit_of(z)));
  EXPECT_TRUE(shape) << render_model(m);
}

TEST(Prover, UnsaturatedBranchesDoNotYieldModels) {
  auto ps = parse_sequent("Rb(x,y) |- x: <> p", 1);
  SequentState st(ps.sequent, 1);
  EXPECT_FALSE(extract_countermodel(st, ps.sequent, LogicSpec(1, {})));
}

TEST(Prover, BudgetsYieldUnknown) {
  const Formula f = nnf("O{1} p -> <>[1] p");
  Budget tight;
  tight.max_steps = 1;
  SearchOutcome o = prove(f, LogicSpec(1, {Ext::D3, Ext::D5}), tight);
  EXPECT_EQ(o.status, Status::Unknown);
  EXPECT_EQ(o.reason, UnknownReason::StepLimit);
  EXPECT_EQ(outcome_to_json(o)["reason"], "step-limit");

  Budget narrow;
  narrow.max_labels = 1;
  o = prove(f, LogicSpec(1, {Ext::D3, Ext::D5}), narrow);
  EXPECT_EQ(o.status, Status::Unknown);
  EXPECT_EQ(o.reason, UnknownReason::LabelLimit);
}

TEST(Prover, RejectsAgentsBeyondTheSpec) {
  EXPECT_THROW(prove(nnf("[2] p", 2), LogicSpec(1, {})), RuleError);
}

TEST(Prover, IsDeterministic) {
  for (const char* f : {"O{1} p -> O{1}<>[1] p", "O{1} p -> <>[1] p", "<>[1] p & <>[2] q -> <>([1] p & [2] q)"}) {
    const LogicSpec spec(2, {Ext::D2});
    EXPECT_EQ(outcome_to_json(prove(nnf(f, 2), spec)), outcome_to_json(prove(nnf(f, 2), spec))) << f;
  }
}

TEST(Prover, SaturateStepRunsOnePhase) {
  const LogicSpec spec(1, {});
  Branch b{SequentState(parse_sequent("|- x: p | ~p", 1).sequent, 1)};
  PhaseResult r = saturate_step(b, spec);
  ASSERT_TRUE(r.closed);
  EXPECT_EQ(r.closed->rule, RuleId::Id);
  EXPECT_EQ(r.applied.size(), 1u);

  r = saturate_step({SequentState(parse_sequent("|- x: p & q", 1).sequent, 1)}, spec);
  ASSERT_EQ(r.branches.size(), 2u);
  EXPECT_EQ(r.branches[0].phase, Phase::Eigen);
  EXPECT_TRUE(r.branches[0].state.contains(Label{0}, Formula::atom("p")));
  EXPECT_TRUE(r.branches[1].state.contains(Label{0}, Formula::atom("q")));

  Branch d{SequentState(parse_sequent("|- x: O{1} p", 1).sequent, 1), Phase::Eigen};
  r = saturate_step(d, spec);
  ASSERT_EQ(r.branches.size(), 1u);
  EXPECT_EQ(r.applied.at(0).rule, RuleId::OughtR);
  EXPECT_EQ(r.branches[0].phase, Phase::Batch);
  EXPECT_EQ(r.branches[0].state.label_count(), 2u);

  Branch g{SequentState(parse_sequent("|- x: p", 1).sequent, 1), Phase::Generators};
  r = saturate_step(g, LogicSpec(1, {Ext::D2}));
  ASSERT_EQ(r.applied.size(), 1u);
  EXPECT_EQ(r.applied[0].rule, RuleId::D2);
}

// Proved formulas have no small countermodel; refutations check out.
TEST(Prover, AgreesWithTheOracle) {
  std::mt19937_64 rng(61);
  Budget b;
  b.max_steps = 5000;
  b.max_seconds = 2;
  b.max_labels = 32;
  for (int k = 0; k < 80; ++k) {
    const LogicSpec spec(1, ExtSet(static_cast<unsigned>(k % 16)));
    Formula f = to_nnf(stit::testing::random_surface(rng, 3, {"p", "q"}, 1));
    SearchOutcome o = prove(f, spec, b);
    if (o.status == Status::Proved) {
      EXPECT_TRUE(validate_proof(*o.proof, spec).ok);
      EXPECT_FALSE(enumerate_countermodel(f, spec, 3)) << render(f) << " " << spec.str();
    } else if (o.status == Status::Refuted) {
      EXPECT_TRUE(refutation_verified(*o.refutation, f, spec)) << render(f) << " " << spec.str();
    }
  }
}
