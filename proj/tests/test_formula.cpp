#include <random>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace stit;
using stit::testing::naive_holds;
using stit::testing::random_surface;

namespace {

Formula nnf(const char* text, int agents = 2) { return parse_nnf(text, agents); }

}  // namespace

TEST(Formula, ParseRendersCanonically) {
  EXPECT_EQ(render(parse("O{1} p -> <>[1] p", 1)), "O{1} p -> <>[1] p");
  EXPECT_EQ(render(parse("(p & q) | r", 1)), "p & q | r");
  EXPECT_EQ(render(parse("p & (q | r)", 1)), "p & (q | r)");
  EXPECT_EQ(render(parse("(p -> q) -> r", 1)), "(p -> q) -> r");
  EXPECT_EQ(render(parse("p -> q -> r", 1)), "p -> q -> r");
  EXPECT_EQ(render(parse("~[2] ~p", 2)), "~[2] ~p");
  EXPECT_EQ(render(parse("Od{1}(p | q)", 1)), "Od{1} (p | q)");
}

TEST(Formula, NnfExpandsAbbreviations) {
  EXPECT_EQ(render(nnf("O{1} p -> <>[1] p")), "P{1} ~p | <>[1] p");
  EXPECT_EQ(render(nnf("top")), "p0 | ~p0");
  EXPECT_EQ(render(nnf("bot")), "p0 & ~p0");
  EXPECT_EQ(render(nnf("Od{1} p")), "O{1} p & <> ~p");
  EXPECT_EQ(render(nnf("Oc{2} p")), "O{2} p & <>[2] ~p");
  EXPECT_EQ(render(nnf("~(p <-> q)")), "p & ~q | q & ~p");
  EXPECT_EQ(render(nnf("~O{1} [] p")), "P{1}<> ~p");
}

TEST(Formula, StructuralEqualityAndHash) {
  Formula a = nnf("O{1} (p | <>[2] q)");
  Formula b = nnf("O{1} (p | <>[2] q)");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_NE(a, nnf("O{2} (p | <>[2] q)"));
  EXPECT_EQ(a.modal_depth(), 3);
  EXPECT_EQ(nnf("p").modal_depth(), 0);
  EXPECT_EQ(max_agent(a), 2);
  EXPECT_EQ(atoms_of(a), (std::set<std::string>{"p", "q"}));
}

TEST(Formula, ParseErrorsCarryPositions) {
  auto pos = [](const char* text, int agents) -> std::size_t {
    try {
      parse(text, agents);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::string::npos;
  };
  EXPECT_EQ(pos("p & ", 1), 4u);
  EXPECT_EQ(pos("[3] p", 2), 1u);
  EXPECT_EQ(pos("O{1 p", 1), 4u);
  EXPECT_EQ(pos("(p | q", 1), 6u);
  EXPECT_EQ(pos("p q", 1), 2u);
  EXPECT_EQ(pos("P p", 1), 0u);
}

TEST(Formula, NegateIsInvolutiveAndComplements) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> atoms{"p", "q"};
  for (int k = 0; k < 200; ++k) {
    Formula f = to_nnf(random_surface(rng, 3, atoms, 2));
    EXPECT_EQ(negate(negate(f)), f);
    Model m = stit::testing::draw_model(LogicSpec(2, {}), 3, atoms, rng);
    WorldMask e = extension(m, f), ne = extension(m, negate(f));
    EXPECT_EQ(e & ne, 0u);
    EXPECT_EQ(e | ne, m.all());
  }
}

TEST(Formula, NnfPreservesTruth) {
  std::mt19937_64 rng(12);
  const std::vector<std::string> atoms{"p", "q", "p0"};
  for (int k = 0; k < 300; ++k) {
    Surface s = random_surface(rng, 3, atoms, 2);
    Formula f = to_nnf(s);
    Model m = stit::testing::draw_model(LogicSpec(2, ExtSet(static_cast<unsigned>(k % 16))), 4, atoms, rng);
    for (std::size_t w = 0; w < m.size(); ++w) {
      ASSERT_EQ(naive_holds(m, w, s), satisfies(m, w, f)) << render(s) << " at " << w;
      ASSERT_EQ(naive_holds(m, w, f), satisfies(m, w, f)) << render(f) << " at " << w;
    }
  }
}

TEST(Formula, ParseRenderRoundTrip) {
  std::mt19937_64 rng(13);
  const std::vector<std::string> atoms{"p", "q", "r_2"};
  for (int k = 0; k < 500; ++k) {
    Surface s = random_surface(rng, 4, atoms, 3);
    ASSERT_EQ(parse(render(s), 3), s) << render(s);
    Formula f = to_nnf(s);
    ASSERT_EQ(parse_nnf(render(f), 3), f) << render(f);
  }
}
