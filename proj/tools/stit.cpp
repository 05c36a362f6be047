#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stit/stit.hpp"

namespace {

enum Exit : int { kTrue = 0, kFalse = 1, kUnknown = 2, kUsage = 64, kDataErr = 65, kNoInput = 66 };

struct LogicFlags {
  int agents = 1;
  std::string ext;
  std::string format = "text";

  stit::LogicSpec spec() const { return stit::LogicSpec(agents, stit::ExtSet::parse(ext)); }
};

struct BudgetFlags {
  std::size_t labels = 64;
  std::size_t steps = 20000;
  double seconds = 10.0;

  stit::Budget budget() const { return {labels, steps, seconds}; }
};

void add_logic(CLI::App* cmd, LogicFlags& f) {
  cmd->add_option("--agents", f.agents, "number of agents")->check(CLI::Range(1, 16));
  cmd->add_option("--ext", f.ext, "extensions, e.g. d3,d5");
}

void add_format(CLI::App* cmd, LogicFlags& f, std::vector<std::string> allowed) {
  cmd->add_option("--format", f.format, "output format")->check(CLI::IsMember(std::move(allowed)));
}

void add_budget(CLI::App* cmd, BudgetFlags& b) {
  cmd->add_option("--budget-labels", b.labels, "labels per branch (at most 64)")->check(CLI::Range(1, 64));
  cmd->add_option("--budget-steps", b.steps, "rule applications")->check(CLI::PositiveNumber);
  cmd->add_option("--budget-seconds", b.seconds, "wall-clock limit")->check(CLI::PositiveNumber);
}

int status_exit(stit::Status s) {
  return s == stit::Status::Proved ? kTrue : s == stit::Status::Refuted ? kFalse : kUnknown;
}

std::string pad(std::string s, std::size_t n) {
  if (s.size() < n) s.append(n - s.size(), ' ');
  return s;
}

int cmd_prove(const LogicFlags& lf, const BudgetFlags& bf, const std::string& input, bool sequent) {
  const stit::LogicSpec spec = lf.spec();
  stit::Sequent root;
  stit::LabelNames names;
  if (sequent) {
    auto parsed = stit::parse_sequent(input, spec.agents);
    root = std::move(parsed.sequent);
    names = std::move(parsed.names);
  } else {
    root.consequent.push_back({stit::Label{0}, stit::parse_nnf(input, spec.agents)});
  }
  const stit::SearchOutcome o = stit::prove_sequent(root, spec, bf.budget(), names);

  if (lf.format == "json") {
    nlohmann::json j = stit::outcome_to_json(o, names);
    j["logic"] = spec.str();
    j["input"] = stit::render(root, names);
    std::cout << j.dump(2) << "\n";
  } else if (lf.format == "dot") {
    if (o.proof)
      std::cout << stit::proof_to_dot(*o.proof, spec);
    else if (o.refutation)
      std::cout << stit::model_to_dot(o.refutation->model, o.refutation->world);
    else
      std::cout << "digraph unknown {}\n";
  } else {
    std::cout << "logic:   " << spec.str() << "\n"
              << "input:   " << stit::render(root, names) << "\n"
              << "result:  " << stit::status_name(o.status);
    if (o.status == stit::Status::Unknown) std::cout << " (" << stit::reason_name(o.reason) << ")";
    std::cout << "\nsteps:   " << o.stats.steps << ", labels: " << o.stats.max_labels << "\n";
    if (o.proof) std::cout << "\n" << stit::render_proof(*o.proof, spec);
    if (o.refutation) {
      const auto& r = *o.refutation;
      std::cout << "\ncountermodel, falsified at " << r.model.worlds[r.world] << ":\n"
                << stit::render_model(r.model);
    }
  }
  return status_exit(o.status);
}

int cmd_check_model(const LogicFlags& lf, const std::string& path, const std::optional<std::string>& eval,
                    const std::optional<std::string>& world) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "stit: cannot open " << path << "\n";
    return kNoInput;
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "stit: " << path << ": " << e.what() << "\n";
    return kDataErr;
  }
  const stit::ExtSet exts = stit::ExtSet::parse(lf.ext);
  stit::LoadedModel loaded = stit::model_from_json(j, exts);
  const stit::Model& m = loaded.model;
  const stit::LogicSpec spec(m.agents, exts);
  const stit::FrameReport report = stit::check_frame(m, spec);

  std::optional<stit::Formula> f;
  if (eval) f = stit::parse_nnf(*eval, m.agents);
  std::optional<std::size_t> at;
  if (world) at = m.index_of(*world);
  stit::WorldMask ext = 0;
  bool truth = true;
  if (f) {
    ext = stit::extension(m, *f);
    truth = at ? (ext & stit::bit_of(*at)) != 0 : ext == m.all();
  }

  if (lf.format == "json") {
    nlohmann::json out = {{"logic", spec.str()},
                          {"closed", loaded.closed},
                          {"frame", {{"passed", report.passed()}, {"report", report.str()}}},
                          {"model", stit::model_to_json(m)}};
    if (f) {
      nlohmann::json where = nlohmann::json::array();
      for (std::size_t w = 0; w < m.size(); ++w)
        if (ext & stit::bit_of(w)) where.push_back(m.worlds[w]);
      out["formula"] = stit::render(*f);
      out["true_at"] = where;
      out["world"] = world ? nlohmann::json(*world) : nlohmann::json(nullptr);
      out["value"] = truth;
    }
    std::cout << out.dump(2) << "\n";
  } else if (lf.format == "dot") {
    std::cout << stit::model_to_dot(m, at);
  } else {
    std::cout << "logic:   " << spec.str() << (loaded.closed ? " (closed)" : "") << "\n"
              << "frame:   " << (report.passed() ? "ok" : "violated") << "\n";
    if (!report.passed()) std::cout << report.str() << "\n";
    std::cout << stit::render_model(m);
    if (f)
      std::cout << "formula: " << stit::render(*f) << "\n"
                << "true at: " << stit::world_set(m, ext) << "\n"
                << "value:   " << (truth ? "true" : "false") << (world ? " at " + *world : " globally") << "\n";
  }
  return report.passed() && truth ? kTrue : kFalse;
}

int cmd_oracle(const LogicFlags& lf, const std::string& text, std::size_t max_worlds) {
  const stit::LogicSpec spec = lf.spec();
  const stit::Formula f = stit::parse_nnf(text, spec.agents);
  auto cm = stit::enumerate_countermodel(f, spec, max_worlds);
  if (lf.format == "json") {
    nlohmann::json out = {{"logic", spec.str()}, {"formula", stit::render(f)}, {"max_worlds", max_worlds}};
    out["countermodel"] = cm ? stit::model_to_json(cm->model) : nlohmann::json(nullptr);
    out["world"] = cm ? nlohmann::json(cm->model.worlds[cm->world]) : nlohmann::json(nullptr);
    std::cout << out.dump(2) << "\n";
  } else if (lf.format == "dot") {
    std::cout << (cm ? stit::model_to_dot(cm->model, cm->world) : "digraph none {}\n");
  } else {
    std::cout << "logic:   " << spec.str() << "\nformula: " << stit::render(f) << "\n";
    if (cm)
      std::cout << "countermodel with " << cm->model.size() << " worlds, falsified at "
                << cm->model.worlds[cm->world] << ":\n"
                << stit::render_model(cm->model);
    else
      std::cout << "no countermodel with at most " << max_worlds << " worlds\n";
  }
  return cm ? kFalse : kTrue;
}

int cmd_taxonomy(const LogicFlags& lf, const BudgetFlags& bf, const std::string& dot_path) {
  const stit::ClaimReport rep = stit::verify_claims(bf.budget());
  if (!dot_path.empty()) {
    std::ofstream out(dot_path);
    if (!out) {
      std::cerr << "stit: cannot write " << dot_path << "\n";
      return kNoInput;
    }
    out << rep.to_dot();
  }
  if (lf.format == "json") {
    std::cout << rep.to_json().dump(2) << "\n";
  } else if (lf.format == "dot") {
    std::cout << rep.to_dot();
  } else {
    std::cout << "principles\n";
    for (const auto& p : stit::principles())
      std::cout << "  " << pad(p.key, 8) << pad(p.schema_text, 38) << p.minimal.str()
                << (p.derived ? "  (derived)" : "") << "\n";
    std::cout << "\ncalculi, weaker to stronger\n";
    for (const auto& n : stit::lattice()) {
      std::string succ;
      for (auto s : n.successors) succ += (succ.empty() ? "" : ", ") + s.str();
      std::cout << "  " << pad(stit::node_label(n), 44) << (succ.empty() ? "" : "< " + succ) << "\n";
    }
    std::cout << rep.table();
  }
  return rep.passed() ? kTrue : kFalse;
}

int cmd_endorse(const LogicFlags& lf, const BudgetFlags& bf, const std::string& key) {
  const stit::Principle& p = stit::principle(key);
  const stit::Endorsement e = stit::endorsement(p, bf.budget());
  if (lf.format == "json") {
    nlohmann::json out = {{"principle", p.key},
                          {"calculus", p.minimal.str()},
                          {"endorsed", e.proved},
                          {"not_endorsed", e.refuted},
                          {"undetermined", e.undetermined}};
    std::cout << out.dump(2) << "\n";
  } else {
    auto list = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& k : v) s += (s.empty() ? "" : ", ") + k;
      return s.empty() ? std::string("-") : s;
    };
    std::cout << "principle:     " << p.key << " (" << p.schema_text << ")\n"
              << "calculus:      " << p.minimal.str() << "\n"
              << "endorsed:      " << list(e.proved) << "\n"
              << "not endorsed:  " << list(e.refuted) << "\n"
              << "undetermined:  " << list(e.undetermined) << "\n";
  }
  return e.undetermined.empty() ? kTrue : kUnknown;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof search and countermodels for deontic STIT logics"};
  app.require_subcommand(1);

  LogicFlags logic;
  BudgetFlags budget;
  std::string input, path, key, dot_path;
  std::optional<std::string> eval, world;
  bool sequent = false;
  std::size_t max_worlds = 3;

  auto* prove = app.add_subcommand("prove", "search for a derivation or a countermodel");
  add_logic(prove, logic);
  add_budget(prove, budget);
  add_format(prove, logic, {"text", "json", "dot"});
  prove->add_option("formula", input, "formula, or a sequent with --sequent")->required();
  prove->add_flag("--sequent", sequent, "read the input as a labelled sequent");

  auto* check = app.add_subcommand("check-model", "load a model, check its frame, evaluate a formula");
  check->add_option("--ext", logic.ext, "extensions for closure and frame check");
  add_format(check, logic, {"text", "json", "dot"});
  check->add_option("model", path, "model JSON file")->required();
  check->add_option("--eval", eval, "formula to evaluate");
  check->add_option("--world", world, "world to evaluate at (default: all)");

  auto* oracle = app.add_subcommand("oracle", "enumerate small models for a countermodel");
  add_logic(oracle, logic);
  add_format(oracle, logic, {"text", "json", "dot"});
  oracle->add_option("formula", input, "formula")->required();
  oracle->add_option("--max-worlds", max_worlds, "largest model size")->check(CLI::Range(1, 5));

  auto* taxonomy = app.add_subcommand("taxonomy", "verify the principle and lattice claims");
  add_budget(taxonomy, budget);
  add_format(taxonomy, logic, {"text", "json", "dot"});
  taxonomy->add_option("--emit-dot", dot_path, "write the colored lattice to a file");

  auto* endorse = app.add_subcommand("endorse", "principles provable in a principle's minimal calculus");
  add_budget(endorse, budget);
  add_format(endorse, logic, {"text", "json"});
  endorse->add_option("principle", key, "principle key, e.g. OiA")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*prove) return cmd_prove(logic, budget, input, sequent);
    if (*check) return cmd_check_model(logic, path, eval, world);
    if (*oracle) return cmd_oracle(logic, input, max_worlds);
    if (*taxonomy) return cmd_taxonomy(logic, budget, dot_path);
    if (*endorse) return cmd_endorse(logic, budget, key);
  } catch (const stit::ParseError& e) {
    std::cerr << "stit: parse error at position " << e.position() << ": " << e.what() << "\n";
    return kDataErr;
  } catch (const stit::ModelError& e) {
    std::cerr << "stit: " << e.what() << "\n";
    return kDataErr;
  } catch (const std::invalid_argument& e) {
    std::cerr << "stit: " << e.what() << "\n";
    return kUsage;
  } catch (const stit::RuleError& e) {
    std::cerr << "stit: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
