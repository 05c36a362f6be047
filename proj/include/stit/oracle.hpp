#pragma once

// Brute-force countermodel search over all DS_n X models up to a fixed size.
// Used as an independent refutation oracle for the prover.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "stit/formula.hpp"
#include "stit/kripke.hpp"
#include "stit/logic_spec.hpp"

namespace stit {

struct Countermodel {
  Model model;
  std::size_t world = 0;
};

namespace detail {

// All set partitions of {0..n-1} as restricted growth strings.
inline std::vector<std::vector<int>> set_partitions(std::size_t n) {
  std::vector<std::vector<int>> out;
  std::vector<int> rgs(n, 0);
  std::function<void(std::size_t, int)> rec = [&](std::size_t k, int max_block) {
    if (k == n) {
      out.push_back(rgs);
      return;
    }
    for (int b = 0; b <= max_block + 1; ++b) {
      rgs[k] = b;
      rec(k + 1, std::max(max_block, b));
    }
  };
  if (n == 0) return {{}};
  rgs[0] = 0;
  rec(1, 0);
  return out;
}

inline std::vector<WorldMask> partition_relation(const std::vector<int>& blocks) {
  std::vector<WorldMask> rel(blocks.size(), 0);
  for (std::size_t a = 0; a < blocks.size(); ++a)
    for (std::size_t b = 0; b < blocks.size(); ++b)
      if (blocks[a] == blocks[b]) rel[a] |= bit_of(b);
  return rel;
}

inline bool refines(const std::vector<int>& fine, const std::vector<int>& coarse) {
  for (std::size_t a = 0; a < fine.size(); ++a)
    for (std::size_t b = 0; b < fine.size(); ++b)
      if (fine[a] == fine[b] && coarse[a] != coarse[b]) return false;
  return true;
}

// Candidate ideal sets for one moment and one agent, filtered by the
// per-moment extension conditions.
inline std::vector<WorldMask> ideal_sets(const Model& m, int agent, WorldMask moment, const LogicSpec& spec) {
  std::vector<WorldMask> out;
  const WorldMask all = m.all();
  const auto& ag = m.ag(agent);
  for (WorldMask s = 0;; ++s) {
    bool ok = true;
    if (spec.has(Ext::D2) && s == 0) ok = false;
    if (ok && spec.has(Ext::D3) && (s & ~moment)) ok = false;
    if (ok && spec.has(Ext::D4))
      for (std::size_t v = 0; v < m.size() && ok; ++v)
        if ((s & bit_of(v)) && (ag[v] & ~s)) ok = false;
    if (ok && spec.has(Ext::D5)) {
      bool found = false;
      for (std::size_t v = 0; v < m.size() && !found; ++v) found = (s & bit_of(v)) && (ag[v] & ~s) == 0;
      ok = found;
    }
    if (ok) out.push_back(s);
    if (s == all) break;
  }
  return out;
}

}  // namespace detail

/// Visits every DS_n X frame over exactly `worlds` worlds in canonical order
/// (R_box partition, then agent partitions, then ideal sets per moment).
/// The visitor returns true to stop.
inline void for_each_frame(const LogicSpec& spec, std::size_t worlds, const std::function<bool(const Model&)>& visit) {
  std::vector<std::string> names;
  for (std::size_t w = 0; w < worlds; ++w) names.push_back("w" + std::to_string(w));
  const auto partitions = detail::set_partitions(worlds);
  for (const auto& box : partitions) {
    std::vector<const std::vector<int>*> refinements;
    for (const auto& p : partitions)
      if (detail::refines(p, box)) refinements.push_back(&p);
    std::vector<std::size_t> ag_pick(static_cast<std::size_t>(spec.agents), 0);
    while (true) {
      Model m(spec.agents, names);
      m.r_box = detail::partition_relation(box);
      for (int i = 1; i <= spec.agents; ++i)
        m.ag(i) = detail::partition_relation(*refinements[ag_pick[static_cast<std::size_t>(i - 1)]]);
      bool c3 = spec.agents == 1 || check_frame(m, LogicSpec(spec.agents, {})).passed();
      if (c3) {
        // moments: one representative world each
        std::vector<std::size_t> reps;
        for (std::size_t w = 0; w < worlds; ++w)
          if (std::find(box.begin(), box.begin() + static_cast<std::ptrdiff_t>(w), box[w]) ==
              box.begin() + static_cast<std::ptrdiff_t>(w))
            reps.push_back(w);
        // slots: (agent, moment) -> candidate ideal sets
        std::vector<std::vector<WorldMask>> options;
        std::vector<std::pair<int, std::size_t>> slots;
        for (int i = 1; i <= spec.agents; ++i)
          for (std::size_t r : reps) {
            options.push_back(detail::ideal_sets(m, i, m.r_box[r], spec));
            slots.emplace_back(i, r);
          }
        bool empty = std::any_of(options.begin(), options.end(), [](const auto& o) { return o.empty(); });
        std::vector<std::size_t> pick(options.size(), 0);
        while (!empty) {
          for (std::size_t s = 0; s < slots.size(); ++s) {
            auto [agent, rep] = slots[s];
            for (std::size_t w = 0; w < worlds; ++w)
              if (box[w] == box[rep]) m.ought(agent)[w] = options[s][pick[s]];
          }
          if (visit(m)) return;
          std::size_t k = 0;
          while (k < pick.size() && ++pick[k] == options[k].size()) pick[k++] = 0;
          if (k == pick.size()) break;
        }
      }
      std::size_t k = 0;
      while (k < ag_pick.size() && ++ag_pick[k] == refinements.size()) ag_pick[k++] = 0;
      if (k == ag_pick.size()) break;
    }
  }
}

/// Searches all DS_n X models with 1..max_worlds worlds for one falsifying f
/// somewhere. The result is the first hit in canonical order; nullopt
/// certifies that no countermodel of that size exists.
inline std::optional<Countermodel> enumerate_countermodel(const Formula& f, const LogicSpec& spec,
                                                          std::size_t max_worlds) {
  CompiledFormula code(f);
  if (code.max_agent() > spec.agents) throw ModelError("formula mentions an agent beyond the spec");
  const auto& atoms = code.atoms();
  std::optional<Countermodel> found;
  for (std::size_t k = 1; k <= max_worlds && !found; ++k) {
    const std::size_t bits = k * atoms.size();
    if (bits >= 63) throw ModelError("valuation space too large for enumeration");
    for_each_frame(spec, k, [&](const Model& frame) {
      Model m = frame;
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << bits); ++v) {
        for (std::size_t a = 0; a < atoms.size(); ++a)
          m.valuation[atoms[a]] = (v >> (a * k)) & (bit_of(k) - 1);
        WorldMask ext = code.evaluate(m);
        if (ext != m.all()) {
          found = Countermodel{m, static_cast<std::size_t>(std::countr_one(ext))};
          return true;
        }
      }
      return false;
    });
  }
  return found;
}

}  // namespace stit
