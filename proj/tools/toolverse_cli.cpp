#include <iostream>
#include <memory>
#include <utility>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toolverse/toolverse.h"

using Json = nlohmann::ordered_json;

namespace {

constexpr int kExitOperational = 1;
constexpr int kExitUsage = 2;

struct Invocation {
  std::string command;
  Json request = Json::object();
};

// Owns the C string returned by the library.
struct CString {
  char* p = nullptr;
  ~CString() { tv_string_free(p); }
};

int fail(tv_status status) {
  std::cerr << "error (" << tv_status_name(status) << "): " << tv_last_error() << "\n";
  return status == TV_INVALID_ARGUMENT ? kExitUsage : kExitOperational;
}

void print_human(const std::string& command, const Json& r) {
  if (command == "ask") {
    std::cout << (r["answer"].is_null() ? "(no answer: " + r["terminal"].get<std::string>() + ")"
                                        : r["answer"].get<std::string>())
              << "\ntrace: " << r["trace_path"].get<std::string>() << "\n";
  } else if (command == "tools.validate") {
    std::cout << r["valid"] << " valid of " << r["total"] << " tools in " << r["dir"].get<std::string>() << "\n";
    for (const auto& f : r["invalid"]) {
      for (const auto& v : f["violations"]) {
        std::cout << f["file"].get<std::string>() << ": " << v["code"].get<std::string>() << ": "
                  << v["message"].get<std::string>() << "\n";
      }
    }
  } else if (command == "eval") {
    std::cout << r["table"].get<std::string>();
    if (r.contains("out")) std::cout << "metrics: " << r["out"].get<std::string>() << "\n";
  } else if (command == "smoke") {
    for (const auto& c : r["checks"]) {
      std::cout << (c["ok"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << ": "
                << c["detail"].get<std::string>() << "\n";
    }
  } else {
    std::cout << r.dump(2) << "\n";
  }
}

bool command_failed(const std::string& command, const Json& r) {
  if (command == "tools.validate") return !r["ok"].get<bool>();
  if (command == "smoke") return !r["ok"].get<bool>();
  return false;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Biomedical tool universe, agent, data generation and evaluation"};
  app.require_subcommand(1);

  std::optional<std::string> config_file;
  std::vector<std::string> sets;
  std::optional<std::string> mode;
  std::optional<std::string> seed;
  std::optional<std::string> jobs;
  bool as_json = false;
  app.add_option("--config", config_file, "Config file (default: ./toolverse.toml if present)");
  app.add_option("--set", sets, "Override a config key: key=value")->type_name("KEY=VALUE");
  app.add_option("--mode", mode, "Execution mode")->check(CLI::IsMember({"live", "fixture", "simulated"}));
  app.add_option("--seed", seed, "Seed for every random choice")->check(CLI::NonNegativeNumber);
  app.add_option("--jobs", jobs, "Worker threads (default: logical CPUs)")->check(CLI::NonNegativeNumber);
  app.add_flag("--json", as_json, "Print the raw JSON result");

  Invocation inv;
  auto str = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help,
                 bool required = false) {
    auto* opt = sub->add_option_function<std::string>(flag, [&inv, key](const std::string& v) { inv.request[key] = v; },
                                                      help);
    if (required) opt->required();
    return opt;
  };
  auto num = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    return sub->add_option_function<int>(flag, [&inv, key](const int& v) { inv.request[key] = v; }, help);
  };
  auto flag = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    return sub->add_flag_callback(name, [&inv, key] { inv.request[key] = true; }, help);
  };
  auto list = [&](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    return sub->add_option_function<std::vector<std::string>>(
        name, [&inv, key](const std::vector<std::string>& v) { inv.request[key] = v; }, help);
  };
  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& command, const std::string& help) {
    auto* sub = parent->add_subcommand(name, help);
    sub->callback([&inv, command] { inv.command = command; });
    return sub;
  };

  auto* config = app.add_subcommand("config", "Configuration")->require_subcommand(1);
  leaf(config, "show", "config.show", "Print the resolved configuration, secrets redacted");

  auto* tools = app.add_subcommand("tools", "Tool universe")->require_subcommand(1);
  auto* validate = leaf(tools, "validate", "tools.validate", "Validate every tool document");
  str(validate, "--dir", "dir", "Spec directory (default: paths.specs)");
  auto* graph = leaf(tools, "graph", "tools.graph", "Build or patch the tool graph");
  str(graph, "--out", "out", "Graph JSON output", true);
  str(graph, "--cache", "cache", "Verdict cache (default: <out>.cache.jsonl)");
  str(graph, "--previous", "previous", "Existing graph to patch");
  list(graph, "--changed", "changed", "Tools whose pairs are re-judged");
  auto* augment = leaf(tools, "augment", "tools.augment", "Write a renamed copy of the registry");
  str(augment, "--pool", "pool", "Rephrase pool (default: paths.rephrase)");
  str(augment, "--out", "out", "Output directory", true);
  num(augment, "--seed", "seed", "Seed");

  auto* index = app.add_subcommand("index", "ToolRAG index")->require_subcommand(1);
  auto* build = leaf(index, "build", "index.build", "Embed every tool and save the index");
  str(build, "--out", "out", "Index directory (default: paths.index)");

  auto* ask = leaf(&app, "ask", "ask", "Answer a question with the agent");
  ask->add_option_function<std::string>(
         "question", [&](const std::string& v) { inv.request["question"] = v; }, "Question")
      ->required();
  str(ask, "--trace-out", "trace_out", "Trace file (default: paths.traces/<id>.json)");
  flag(ask, "--no-thought", "no_thought", "Run without thoughts");
  num(ask, "--max-steps", "max_steps", "Step limit");

  auto* datagen = app.add_subcommand("datagen", "Data generation")->require_subcommand(1);
  auto* dtools = leaf(datagen, "tools", "datagen.tools", "Generate tool documents from API docs");
  str(dtools, "--docs", "docs", "API documentation file", true);
  str(dtools, "--database", "database", "Database name", true);
  str(dtools, "--family", "family", "openfda | opentargets | monarch", true);
  str(dtools, "--review", "review", "Review queue file", true);
  str(dtools, "--samples", "samples", "Sample arguments per tool for checking");
  auto* review = leaf(datagen, "review", "datagen.review", "List or update the review queue");
  str(review, "--review", "review", "Review queue file", true);
  str(review, "--id", "id", "Item id");
  str(review, "--status", "status", "pending | approved | rejected");
  str(review, "--note", "note", "Reviewer note");
  auto* activate = leaf(datagen, "activate", "datagen.activate", "Add approved tools to the registry");
  str(activate, "--review", "review", "Review queue file", true);
  str(activate, "--out", "out", "Spec directory to write (default: paths.specs)");
  auto* questions = leaf(datagen, "questions", "datagen.questions", "Generate and check questions");
  str(questions, "--type", "type", "drug_centered | disease_centered | tool_chain", true);
  num(questions, "--count", "count", "Number of questions");
  str(questions, "--out", "out", "Output JSONL", true);
  str(questions, "--labels", "labels", "openFDA label dump");
  str(questions, "--associations", "associations", "Disease-drug CSV");
  str(questions, "--graph", "graph", "Tool graph JSON");
  auto* traces = leaf(datagen, "traces", "datagen.traces", "Generate and evaluate reasoning traces");
  str(traces, "--questions", "questions", "Question JSONL", true);
  str(traces, "--out", "out", "Accepted traces JSONL", true);
  str(traces, "--rejected-out", "rejected_out", "Rejections JSONL");
  flag(traces, "--first-stage", "first_stage", "Use only the initial tools, no retrieval");
  auto* exp = leaf(datagen, "export", "datagen.export", "Export step-wise training samples");
  str(exp, "--traces", "traces", "Traces JSONL", true);
  str(exp, "--out", "out", "Samples JSONL", true);
  str(exp, "--pairs-out", "pairs_out", "Retrieval pairs JSONL");
  num(exp, "--max-steps", "max_steps", "Skip traces longer than this");
  str(exp, "--rephrase", "rephrase", "Rephrase pool (default: paths.rephrase)");

  auto* eval = app.add_subcommand("eval", "Evaluate on a benchmark")->require_subcommand(1);
  for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
           {"mc", "Multiple-choice evaluation"},
           {"open", "Open-ended evaluation, answers mapped to options"},
           {"description", "Two-step drug identification then choice"}}) {
    auto* sub = eval->add_subcommand(name, help);
    sub->callback([&inv, name = name] {
      inv.command = "eval";
      inv.request["mode"] = name;
    });
    str(sub, "--benchmark", "benchmark", "Benchmark JSONL", true);
    list(sub, "--subset", "subsets", "Tool-name manifests, smallest first");
    str(sub, "--out", "out", "Metrics JSON");
    str(sub, "--trace-dir", "trace_dir", "Directory for traces");
    num(sub, "--concurrency", "concurrency", "Items in flight");
  }

  leaf(&app, "smoke", "smoke", "Check the live services");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  Json options = Json::object();
  if (config_file) options["config_file"] = *config_file;
  Json flags = Json::object();
  for (const auto& s : sets) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) {
      std::cerr << "error: --set expects key=value, got '" << s << "'\n";
      return kExitUsage;
    }
    flags[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (mode) flags["mode"] = *mode;
  if (seed) flags["seed"] = *seed;
  if (jobs) flags["jobs"] = *jobs;
  options["flags"] = flags;

  tv_runtime* rt = nullptr;
  if (auto st = tv_runtime_create(options.dump().c_str(), &rt); st != TV_OK) return fail(st);
  std::unique_ptr<tv_runtime, decltype(&tv_runtime_destroy)> owner(rt, tv_runtime_destroy);

  CString out;
  if (auto st = tv_run(rt, inv.command.c_str(), inv.request.dump().c_str(), &out.p); st != TV_OK) return fail(st);
  auto result = Json::parse(out.p);
  if (as_json) {
    std::cout << result.dump(2) << "\n";
  } else {
    print_human(inv.command, result);
  }
  return command_failed(inv.command, result) ? kExitOperational : 0;
}
