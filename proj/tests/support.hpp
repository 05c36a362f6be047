#pragma once

// Test-only reference implementations, written directly from the
// definitions and sharing no code with the library's evaluators.

#include <random>
#include <string>
#include <vector>

#include "stit/stit.hpp"

namespace stit::testing {

inline bool rel(const std::vector<WorldMask>& r, std::size_t a, std::size_t b) { return (r[a] >> b) & 1u; }

/// Truth of a surface formula, abbreviations read by their definitions.
inline bool naive_holds(const Model& m, std::size_t w, const Surface& s) {
  using K = Surface::Kind;
  auto all = [&](const std::vector<WorldMask>& r, const Surface& b) {
    for (std::size_t v = 0; v < m.size(); ++v)
      if (rel(r, w, v) && !naive_holds(m, v, b)) return false;
    return true;
  };
  auto some = [&](const std::vector<WorldMask>& r, const Surface& b) {
    for (std::size_t v = 0; v < m.size(); ++v)
      if (rel(r, w, v) && naive_holds(m, v, b)) return true;
    return false;
  };
  const int i = s.agent().index;
  switch (s.kind()) {
    case K::Atom: {
      auto it = m.valuation.find(s.name());
      return it != m.valuation.end() && ((it->second >> w) & 1u);
    }
    case K::Top:
      return true;
    case K::Bot:
      return false;
    case K::Not:
      return !naive_holds(m, w, s.body());
    case K::And:
      return naive_holds(m, w, s.lhs()) && naive_holds(m, w, s.rhs());
    case K::Or:
      return naive_holds(m, w, s.lhs()) || naive_holds(m, w, s.rhs());
    case K::Implies:
      return !naive_holds(m, w, s.lhs()) || naive_holds(m, w, s.rhs());
    case K::Iff:
      return naive_holds(m, w, s.lhs()) == naive_holds(m, w, s.rhs());
    case K::Box:
      return all(m.r_box, s.body());
    case K::Diamond:
      return some(m.r_box, s.body());
    case K::AgBox:
      return all(m.ag(i), s.body());
    case K::AgDiamond:
      return some(m.ag(i), s.body());
    case K::Ought:
      return all(m.ought(i), s.body());
    case K::Perm:
      return some(m.ought(i), s.body());
    case K::DelibOught:
      return all(m.ought(i), s.body()) && some(m.r_box, Surface::negation(s.body()));
    case K::CtrlOught: {
      const Surface neg = Surface::negation(s.body());
      bool agentive = false;
      for (std::size_t v = 0; v < m.size() && !agentive; ++v) {
        if (!rel(m.r_box, w, v)) continue;
        bool stit_neg = true;
        for (std::size_t u = 0; u < m.size(); ++u)
          if (rel(m.ag(i), v, u) && !naive_holds(m, u, neg)) stit_neg = false;
        agentive = stit_neg;
      }
      return all(m.ought(i), s.body()) && agentive;
    }
  }
  return false;
}

inline bool naive_holds(const Model& m, std::size_t w, const Formula& f) {
  return naive_holds(m, w, to_surface(f));
}

/// Reflexive-symmetric-transitive closure by Floyd-Warshall over labels
/// 0..n-1, restricted to the selected atoms.
template <typename Pred>
std::vector<std::vector<bool>> naive_closure(const std::vector<RelAtom>& atoms, std::size_t n, Pred use) {
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t k = 0; k < n; ++k) r[k][k] = true;
  for (const auto& a : atoms)
    if (use(a)) r[a.from.id][a.to.id] = r[a.to.id][a.from.id] = true;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (r[a][k] && r[k][b]) r[a][b] = true;
  return r;
}

/// Random surface formula over the given atoms, including the derived
/// connectives and deliberative oughts.
inline Surface random_surface(std::mt19937_64& rng, int depth, const std::vector<std::string>& atoms, int agents,
                              bool abbreviations = true) {
  using K = Surface::Kind;
  std::uniform_int_distribution<int> pick_atom(0, static_cast<int>(atoms.size()) - 1);
  std::uniform_int_distribution<int> pick_agent(1, agents);
  if (depth == 0 || std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
    Surface a = Surface::atom(atoms[static_cast<std::size_t>(pick_atom(rng))]);
    return std::uniform_int_distribution<int>(0, 1)(rng) ? Surface::negation(a) : a;
  }
  const int kinds = abbreviations ? 14 : 10;
  auto sub = [&] { return random_surface(rng, depth - 1, atoms, agents, abbreviations); };
  switch (std::uniform_int_distribution<int>(0, kinds - 1)(rng)) {
    case 0:
      return Surface::binary(K::And, sub(), sub());
    case 1:
      return Surface::binary(K::Or, sub(), sub());
    case 2:
      return Surface::negation(sub());
    case 3:
      return Surface::unary(K::Box, sub());
    case 4:
      return Surface::unary(K::Diamond, sub());
    case 5:
      return Surface::unary(K::AgBox, sub(), pick_agent(rng));
    case 6:
      return Surface::unary(K::AgDiamond, sub(), pick_agent(rng));
    case 7:
      return Surface::unary(K::Ought, sub(), pick_agent(rng));
    case 8:
      return Surface::unary(K::Perm, sub(), pick_agent(rng));
    case 9:
      return Surface::implies(sub(), sub());
    case 10:
      return Surface::binary(K::Iff, sub(), sub());
    case 11:
      return Surface::unary(K::DelibOught, sub(), pick_agent(rng));
    case 12:
      return Surface::unary(K::CtrlOught, sub(), pick_agent(rng));
    default:
      return std::uniform_int_distribution<int>(0, 1)(rng) ? Surface::top() : Surface::bot();
  }
}

/// A DS_n X model drawn by the library's generator, retried until found.
inline Model draw_model(const LogicSpec& spec, std::size_t worlds, const std::vector<std::string>& atoms,
                        std::mt19937_64& rng) {
  for (;;)
    if (auto m = random_model(spec, worlds, atoms, rng)) return *m;
}

}  // namespace stit::testing
