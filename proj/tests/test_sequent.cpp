#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace stit;

TEST(Sequent, ParseAssignsLabelsInOrder) {
  auto ps = parse_sequent("Rb(w,v), R1(v,z), RO2(w,u) |- w: O{1} p, z: q", 2);
  ASSERT_EQ(ps.sequent.antecedent.size(), 3u);
  ASSERT_EQ(ps.sequent.consequent.size(), 2u);
  EXPECT_EQ(ps.names(Label{0}), "w");
  EXPECT_EQ(ps.names(Label{3}), "u");
  EXPECT_EQ(ps.sequent.antecedent[2].kind, RelKind::Ought);
  EXPECT_EQ(ps.sequent.antecedent[2].agent, 2);
  EXPECT_EQ(render(ps.sequent, ps.names), "Rb(w,v), R1(v,z), RO2(w,u) |- w: O{1} p, z: q");
  EXPECT_EQ(render(ps.sequent), "Rb(x0,x1), R1(x1,x2), RO2(x0,x3) |- x0: O{1} p, x2: q");
}

TEST(Sequent, ParseRejectsMalformedInput) {
  EXPECT_THROW(parse_sequent("w: p", 1), ParseError);
  EXPECT_THROW(parse_sequent("R3(w,v) |- w: p", 2), ParseError);
  EXPECT_THROW(parse_sequent("Rx(w,v) |- w: p", 2), ParseError);
  EXPECT_THROW(parse_sequent("|- w p", 1), ParseError);
  EXPECT_THROW(parse_sequent("|- w: p &", 1), ParseError);
  EXPECT_NO_THROW(parse_sequent("|-", 1));
}

TEST(Sequent, MultisetEqualityIgnoresOrderAndProvenance) {
  Sequent a = parse_sequent("Rb(x,y), R1(x,z) |- x: p, y: q", 1).sequent;
  Sequent b = a;
  std::reverse(b.antecedent.begin(), b.antecedent.end());
  std::reverse(b.consequent.begin(), b.consequent.end());
  b.antecedent[0].provenance = Provenance::by_rule("IOA");
  EXPECT_EQ(a, b);
  b.consequent.push_back(b.consequent[0]);
  EXPECT_NE(a, b);
}

TEST(Sequent, FreshLabel) {
  EXPECT_EQ(fresh_label(Sequent{}), Label{0});
  Sequent s = parse_sequent("Rb(a,b) |- c: p", 1).sequent;
  EXPECT_EQ(fresh_label(s), Label{3});
  EXPECT_EQ(labels_of(s).size(), 3u);
}

TEST(Sequent, PathsAgreeWithNaiveClosure) {
  std::mt19937_64 rng(21);
  const int agents = 3;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng() % 8;
    std::vector<RelAtom> atoms;
    const std::size_t count = rng() % 12;
    for (std::size_t k = 0; k < count; ++k) {
      Label x{static_cast<std::uint32_t>(rng() % n)}, y{static_cast<std::uint32_t>(rng() % n)};
      int agent = 1 + static_cast<int>(rng() % agents);
      switch (rng() % 3) {
        case 0:
          atoms.push_back(RelAtom::box(x, y));
          break;
        case 1:
          atoms.push_back(RelAtom::ag(agent, x, y));
          break;
        default:
          atoms.push_back(RelAtom::ought(agent, x, y));
      }
    }
    auto dia = stit::testing::naive_closure(atoms, n, [](const RelAtom& r) { return r.kind != RelKind::Ought; });
    SequentState st(agents);
    for (const auto& r : atoms) st.add_atom(r);
    for (std::uint32_t a = 0; a < n; ++a)
      for (std::uint32_t b = 0; b < n; ++b) {
        ASSERT_EQ(diamond_path(atoms, Label{a}, Label{b}), dia[a][b]);
        ASSERT_EQ(st.diamond_path(Label{a}, Label{b}), dia[a][b]);
      }
    for (int i = 1; i <= agents; ++i) {
      auto ip = stit::testing::naive_closure(
          atoms, n, [i](const RelAtom& r) { return r.kind == RelKind::Ag && r.agent == i; });
      for (std::uint32_t a = 0; a < n; ++a)
        for (std::uint32_t b = 0; b < n; ++b) {
          ASSERT_EQ(i_path(atoms, Label{a}, Label{b}, i), ip[a][b]);
          ASSERT_EQ(st.i_path(Label{a}, Label{b}, i), ip[a][b]);
        }
    }
  }
}

TEST(Sequent, StateHasSetSemantics) {
  SequentState st(1);
  EXPECT_TRUE(st.add_atom(RelAtom::ought(1, Label{0}, Label{1})));
  EXPECT_FALSE(st.add_atom(RelAtom::ought(1, Label{0}, Label{1})));
  EXPECT_TRUE(st.add_formula(Label{2}, Formula::atom("p")));
  EXPECT_FALSE(st.add_formula(Label{2}, Formula::atom("p")));
  EXPECT_EQ(st.label_count(), 3u);
  EXPECT_EQ(st.fresh(), Label{3});
  EXPECT_EQ(st.ought_successors(1, Label{0}).size(), 1u);
  EXPECT_FALSE(st.diamond_path(Label{0}, Label{1}));
  EXPECT_EQ(st.to_sequent().antecedent.size(), 1u);
}

TEST(Sequent, D5RecordsComeFromProvenance) {
  SequentState st(1);
  st.add_atom(RelAtom{RelKind::Ought, 1, Label{0}, Label{1}, Provenance::d5_one(4)});
  ASSERT_NE(st.d5_record(4), nullptr);
  EXPECT_EQ(st.d5_record(4)->y, Label{1});
  EXPECT_EQ(st.next_d5_id(), 5u);
  EXPECT_EQ(st.d5_record(0), nullptr);
}
