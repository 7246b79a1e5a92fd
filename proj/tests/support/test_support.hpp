#pragma once

#include <atomic>
#include <cctype>
#include <chrono>
#include <stdexcept>
#include <filesystem>
#include <string>
#include <vector>

#include "toolverse/agent.hpp"
#include "toolverse/evalharness.hpp"
#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"
#include "toolverse/util.hpp"

namespace tvt {

using namespace toolverse;

inline std::filesystem::path fixture(const std::string& rel) {
  return std::filesystem::path(TOOLVERSE_FIXTURES) / rel;
}

inline std::filesystem::path spec_dir() { return TOOLVERSE_SPEC_DIR; }

// The shipped corpus, loaded once.
inline const Registry& corpus() {
  static const Registry r = load_registry_dir(spec_dir());
  return r;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
    path_ = std::filesystem::temp_directory_path() /
            ("toolverse-test-" + std::to_string(stamp) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline std::vector<Json> replies(std::initializer_list<std::string> texts) {
  std::vector<Json> out;
  for (const auto& t : texts) out.emplace_back(t);
  return out;
}

inline Json tool_call(const std::string& name, Json args) {
  return Json::array({{{"name", name}, {"arguments", std::move(args)}}});
}

// "<thought> [TOOL_CALLS][{...}]"
inline std::string step_reply(const std::string& thought, const std::string& name, Json args) {
  return thought + " [TOOL_CALLS]" + tool_call(name, std::move(args)).dump();
}

// A finished m-step trace: a ToolRAG call first, calls to retrieved tools in
// between, Finish last. Tool names come from `registry`.
inline ReasoningTrace synthetic_trace(const std::string& id, int m, Rng& rng, const Registry& registry) {
  const auto names = registry.api_tool_names();
  ReasoningTrace t;
  t.id = id;
  t.question = "Question " + id + "?";
  std::vector<std::string> tools = registry.default_tools();
  std::vector<std::string> retrieved;
  for (int i = 1; i <= m; ++i) {
    t.available_tools.push_back(tools);
    ReasoningStep s;
    s.index = i;
    s.thought = "Thought " + std::to_string(i) + " about " + rng.alnum_id(6);
    FunctionCall c;
    c.call_id = rng.alnum_id(8);
    ToolResult r;
    r.call_id = c.call_id;
    if (i == m) {
      c.tool_name = "Finish";
      r.payload = Json{{"terminal", true}};
    } else if (retrieved.empty() || rng.index(3) == 0) {
      c.tool_name = "ToolRAG";
      c.arguments = {{"description", "need " + rng.alnum_id(4)}};
      Json found = Json::array();
      for (int k = 0; k < 2; ++k) {
        auto n = names[rng.index(names.size())];
        found.push_back(n);
        if (std::find(tools.begin(), tools.end(), n) == tools.end()) tools.push_back(n);
        retrieved.push_back(n);
      }
      r.payload = found;
    } else {
      c.tool_name = retrieved[rng.index(retrieved.size())];
      Json args = Json::object();
      for (const auto& a : registry.at(c.tool_name).arguments) {
        if (a.required) args[a.name] = "v" + std::to_string(i);
      }
      c.arguments = args;
      r.payload = "result of step " + std::to_string(i);
      r.source = ResultSource::kFixture;
    }
    s.calls = {c};
    s.results = {r};
    t.steps.push_back(std::move(s));
  }
  t.final_answer = "answer " + id;
  t.terminal = Terminal::kFinished;
  t.generations = m;
  return t;
}

inline ReasoningTrace answered(const std::string& answer) {
  ReasoningTrace t;
  t.final_answer = answer;
  t.terminal = Terminal::kFinished;
  return t;
}

// Scripted replies for a description item: the drug named in step 1 and the
// answer given in step 2.
struct DescriptionPlay {
  std::string drug;
  std::string answer;
};

// Five behaviours cycled over the items: brand named, generic in capitals,
// wrong drug, misspelled drug, and no committed letter. Every third item
// answers with a wrong letter.
inline DescriptionPlay description_play(const BenchmarkItem& item, std::size_t i) {
  std::string letter = item.correct;
  if (i % 3 == 2) letter = item.correct == "A" ? "B" : "A";
  const auto& brand = item.acceptable_drugs.at(0);
  std::string upper = item.acceptable_drugs.back();
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  switch (i % 5) {
    case 0: return {brand, "The answer is " + letter + "."};
    case 1: return {upper, letter};
    case 2: return {"Lipitor", letter + ": " + item.options.at(letter)};
    case 3: return {brand.substr(0, brand.size() - 1) + "x", letter};
    default: return {brand, "I cannot tell from the available information"};
  }
}

inline AgentRunner description_runner(const std::vector<BenchmarkItem>& items) {
  return [items](const std::string& prompt) {
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!contains(prompt, items[i].question)) continue;
      auto play = description_play(items[i], i);
      return answered(contains(prompt, "Identify the drug") ? play.drug : play.answer);
    }
    throw std::runtime_error("unexpected prompt");
  };
}

}  // namespace tvt
