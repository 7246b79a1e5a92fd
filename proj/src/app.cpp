#include "toolverse/app.hpp"

#include <map>
#include <set>

#include "toolverse/augment.hpp"
#include "toolverse/datagen.hpp"
#include "toolverse/error.hpp"
#include "toolverse/evalharness.hpp"
#include "toolverse/parallel.hpp"
#include "toolverse/tool_graph.hpp"

namespace toolverse {

namespace {

class RuleChat final : public ChatService {
 public:
  struct Rule {
    std::vector<std::string> match;
    std::vector<Json> replies;
    std::size_t used = 0;
  };

  RuleChat(std::vector<Rule> rules, std::optional<Json> fallback, std::string model)
      : rules_(std::move(rules)), fallback_(std::move(fallback)), model_(std::move(model)) {}

  [[nodiscard]] std::string model_id() const override { return model_; }

 protected:
  Completion complete(const ChatRequest& request) override {
    const auto text = request.render();
    Json reply;
    {
      std::lock_guard lock(mu_);
      auto it = std::find_if(rules_.begin(), rules_.end(), [&](const Rule& r) {
        return std::all_of(r.match.begin(), r.match.end(), [&](const std::string& m) { return contains(text, m); });
      });
      if (it != rules_.end()) {
        reply = it->replies[std::min(it->used, it->replies.size() - 1)];
        ++it->used;
      } else if (fallback_) {
        reply = *fallback_;
      } else {
        throw TransportError("no scripted reply matches the request");
      }
    }
    if (reply.is_object() && reply.contains("error")) {
      if (reply["error"] == "overflow") throw Error(ErrorCode::kContextOverflow, "scripted context overflow");
      throw TransportError("scripted transport failure");
    }
    return {reply.is_string() ? reply.get<std::string>() : reply.dump(), std::nullopt};
  }

 private:
  std::mutex mu_;
  std::vector<Rule> rules_;
  std::optional<Json> fallback_;
  std::string model_;
};

std::string req_str(const Json& req, const char* key, const std::string& fallback = {}) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  if (!req[key].is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be a string");
  return req[key].get<std::string>();
}

std::string req_required(const Json& req, const char* key) {
  auto v = req_str(req, key);
  if (v.empty()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' is required");
  return v;
}

int req_int(const Json& req, const char* key, int fallback) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  if (!req[key].is_number_integer()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be an integer");
  return req[key].get<int>();
}

bool req_bool(const Json& req, const char* key, bool fallback) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  if (!req[key].is_boolean()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be a boolean");
  return req[key].get<bool>();
}

std::vector<std::string> req_strings(const Json& req, const char* key) {
  std::vector<std::string> out;
  if (!req.contains(key) || req[key].is_null()) return out;
  if (!req[key].is_array()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must be an array");
  for (const auto& v : req[key]) {
    if (!v.is_string()) throw Error(ErrorCode::kInvalidArgument, std::string("'") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& docs) {
  std::string out;
  for (const auto& d : docs) out += d.dump() + "\n";
  write_file(path, out);
}

Json violations_json(const std::vector<Violation>& vs) {
  Json out = Json::array();
  for (const auto& v : vs) out.push_back({{"code", v.code}, {"message", v.message}});
  return out;
}

}  // namespace

std::unique_ptr<ChatService> load_chat_script(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::kIo, "chat script " + path.string() + " not found");
  Json doc;
  try {
    doc = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse, path.string() + ": " + e.what());
  }
  if (doc.is_array()) return std::make_unique<ScriptedChat>(std::vector<Json>(doc.begin(), doc.end()));
  if (!doc.is_object() || !doc.contains("rules") || !doc["rules"].is_array()) {
    throw Error(ErrorCode::kParse, path.string() + ": expected a reply array or an object with rules");
  }
  std::vector<RuleChat::Rule> rules;
  for (const auto& r : doc["rules"]) {
    RuleChat::Rule rule;
    const auto& m = r.value("match", Json());
    if (m.is_string()) {
      rule.match.push_back(m.get<std::string>());
    } else if (m.is_array()) {
      for (const auto& s : m) rule.match.push_back(s.get<std::string>());
    }
    if (r.contains("reply")) rule.replies.push_back(r["reply"]);
    if (r.contains("replies") && r["replies"].is_array()) {
      for (const auto& x : r["replies"]) rule.replies.push_back(x);
    }
    if (rule.replies.empty()) throw Error(ErrorCode::kParse, path.string() + ": a rule has no replies");
    rules.push_back(std::move(rule));
  }
  std::optional<Json> fallback;
  if (doc.contains("default")) fallback = doc["default"];
  return std::make_unique<RuleChat>(std::move(rules), std::move(fallback), doc.value("model", "scripted"));
}

// ---- Runtime ------------------------------------------------------------------

Runtime::Runtime(ConfigMap config) : config_(std::move(config)), mode_(parse_exec_mode(config_str(config_, "mode"))) {}

Runtime::~Runtime() = default;

std::uint64_t Runtime::seed() const { return config_u64(config_, "seed"); }

int Runtime::jobs() const {
  int j = config_int(config_, "jobs");
  return j > 0 ? j : static_cast<int>(default_jobs());
}

GatewayConfig Runtime::gateway_config() const {
  GatewayConfig c;
  c.fda_base = config_str(config_, "fda.base_url");
  c.ot_base = config_str(config_, "opentargets.base_url");
  c.monarch_base = config_str(config_, "monarch.base_url");
  c.fda_api_key = config_str(config_, "fda.api_key");
  c.timeout_ms = config_int(config_, "http.timeout_ms");
  c.fda_limit = config_int(config_, "fda.limit");
  return c;
}

AgentConfig Runtime::agent_config() const {
  AgentConfig c;
  c.max_steps = config_int(config_, "agent.max_steps");
  c.summarize_threshold_chars = static_cast<std::size_t>(config_u64(config_, "agent.summarize_threshold_chars"));
  c.toolrag_k = config_int(config_, "agent.toolrag_k");
  const auto& tm = config_str(config_, "agent.thought_mode");
  if (tm == "with_thoughts") {
    c.thought_mode = ThoughtMode::kWithThoughts;
  } else if (tm == "no_thoughts") {
    c.thought_mode = ThoughtMode::kNoThoughts;
  } else {
    throw Error(ErrorCode::kInvalidArgument, "agent.thought_mode must be with_thoughts or no_thoughts");
  }
  c.timeout = std::chrono::milliseconds(config_int(config_, "agent.timeout_ms"));
  c.seed = seed();
  return c;
}

void Runtime::set_transport(std::unique_ptr<HttpTransport> transport) {
  std::lock_guard lock(mu_);
  transport_ = std::move(transport);
}

const Registry& Runtime::registry() {
  std::lock_guard lock(mu_);
  if (!registry_) registry_ = std::make_unique<Registry>(load_registry_dir(config_str(config_, "paths.specs")));
  return *registry_;
}

HttpTransport& Runtime::transport() {
  std::lock_guard lock(mu_);
  if (!transport_) transport_ = std::make_unique<HttplibTransport>();
  return *transport_;
}

ChatService& Runtime::chat() {
  std::lock_guard lock(mu_);
  if (chat_) return *chat_;
  const auto& script = config_str(config_, "chat.script");
  if (!script.empty()) {
    chat_ = load_chat_script(script);
  } else if (mode_ == ExecMode::kFixture) {
    throw Error(ErrorCode::kPrecondition, "fixture mode needs chat.script (TOOLVERSE_CHAT_SCRIPT)");
  } else {
    ServiceEndpoint ep;
    ep.base_url = config_str(config_, "chat.base_url");
    ep.model = config_str(config_, "chat.model");
    ep.api_key = config_str(config_, "chat.api_key");
    ep.timeout_ms = config_int(config_, "chat.timeout_ms");
    ep.max_in_flight = config_int(config_, "chat.max_in_flight");
    if (ep.base_url.empty() || ep.model.empty()) {
      throw Error(ErrorCode::kPrecondition, "no chat service: set chat.base_url and chat.model, or chat.script");
    }
    chat_ = std::make_unique<HttpChatService>(std::move(ep), transport());
  }
  return *chat_;
}

EmbeddingService& Runtime::embedder() {
  std::lock_guard lock(mu_);
  if (embedder_) return *embedder_;
  const auto& base = config_str(config_, "embed.base_url");
  if (base.empty() || mode_ == ExecMode::kFixture) {
    embedder_ = std::make_unique<HashEmbedder>(static_cast<std::size_t>(config_u64(config_, "embed.dimension")));
  } else {
    ServiceEndpoint ep;
    ep.base_url = base;
    ep.model = config_str(config_, "embed.model");
    ep.api_key = config_str(config_, "embed.api_key");
    ep.timeout_ms = config_int(config_, "chat.timeout_ms");
    if (ep.model.empty()) throw Error(ErrorCode::kPrecondition, "embed.base_url is set but embed.model is not");
    embedder_ = std::make_unique<HttpEmbeddingService>(std::move(ep), transport());
  }
  return *embedder_;
}

const EmbeddingIndex& Runtime::index() {
  std::lock_guard lock(mu_);
  if (index_) return *index_;
  std::filesystem::path dir = config_str(config_, "paths.index");
  if (!dir.empty() && std::filesystem::exists(dir / "manifest.json")) {
    index_ = std::make_unique<EmbeddingIndex>(EmbeddingIndex::load(dir));
  } else {
    index_ = std::make_unique<EmbeddingIndex>(build_index(registry(), embedder()));
  }
  return *index_;
}

Retriever Runtime::retriever() {
  return [this](const std::string& requirement, int k) {
    return retrieve(index(), requirement, k, embedder()).names;
  };
}

Retriever Runtime::make_retriever_for(const Registry& registry) {
  auto idx = std::make_shared<EmbeddingIndex>(build_index(registry, embedder()));
  EmbeddingService* emb = &embedder();
  return [idx, emb](const std::string& requirement, int k) { return retrieve(*idx, requirement, k, *emb).names; };
}

std::unique_ptr<Gateway> Runtime::make_gateway(const Registry& registry, Retriever retriever) {
  std::lock_guard lock(mu_);
  GatewayOptions o;
  o.mode = mode_;
  o.config = gateway_config();
  o.record = config_bool(config_, "http.record");
  o.retriever = std::move(retriever);
  o.toolrag_k = config_int(config_, "agent.toolrag_k");
  if (mode_ == ExecMode::kLive) o.transport = &transport();
  if (mode_ == ExecMode::kFixture || o.record) {
    if (!cassettes_) cassettes_ = std::make_unique<CassetteStore>(config_str(config_, "paths.cassettes"));
    o.cassettes = cassettes_.get();
  }
  if (mode_ == ExecMode::kSimulated) o.simulator = &chat();
  return std::make_unique<Gateway>(registry, std::move(o));
}

Gateway& Runtime::gateway() {
  std::lock_guard lock(mu_);
  if (!gateway_) gateway_ = make_gateway(registry(), retriever());
  return *gateway_;
}

// ---- commands -----------------------------------------------------------------

namespace {

Json cmd_config_show(Runtime& rt, const Json&) { return redacted_config(rt.config()); }

Json cmd_tools_validate(Runtime& rt, const Json& req) {
  auto dir = req_str(req, "dir", config_str(rt.config(), "paths.specs"));
  auto report = validate_registry_dir(dir);
  Json invalid = Json::array();
  for (const auto& f : report.invalid) {
    invalid.push_back({{"file", f.file}, {"tool", f.tool}, {"violations", violations_json(f.violations)}});
  }
  return {{"dir", dir},
          {"total", report.total},
          {"valid", report.valid},
          {"ok", report.invalid.empty()},
          {"invalid", invalid}};
}

Json cmd_tools_graph(Runtime& rt, const Json& req) {
  auto out = req_required(req, "out");
  auto cache_path = req_str(req, "cache", out + ".cache.jsonl");
  EdgeCache cache(cache_path);
  GraphBuildOptions options;
  options.parallelism = rt.jobs();
  options.cache = &cache;
  GraphBuildReport report;
  ToolGraph graph;
  auto previous = req_str(req, "previous");
  if (previous.empty()) {
    graph = build_tool_graph(rt.registry(), rt.chat(), options, &report);
  } else {
    auto prev = ToolGraph::from_json(Json::parse(read_file(previous)));
    graph = patch_tool_graph(prev, rt.registry(), rt.chat(), req_strings(req, "changed"), options, &report);
  }
  write_file(out, graph.to_json().dump(2) + "\n");
  Json skipped = Json::array();
  for (const auto& [a, b] : report.skipped) skipped.push_back({a, b});
  return {{"out", out},
          {"nodes", graph.nodes().size()},
          {"edges", graph.edges().size()},
          {"judged", report.judged},
          {"cached", report.cached},
          {"skipped", skipped}};
}

Json cmd_tools_augment(Runtime& rt, const Json& req) {
  auto pool_path = req_str(req, "pool", config_str(rt.config(), "paths.rephrase"));
  if (pool_path.empty()) throw Error(ErrorCode::kInvalidArgument, "'pool' is required");
  auto out = req_required(req, "out");
  auto seed = static_cast<std::uint64_t>(req_int(req, "seed", static_cast<int>(rt.seed())));
  auto pool = load_rephrase_pool(pool_path);
  const auto& registry = rt.registry();
  std::set<std::string> taken;
  for (const auto& n : registry.names()) taken.insert(n);
  Registry augmented;
  Json remaps = Json::object();
  std::size_t renamed = 0;
  Json flags = Json::array();
  for (const auto& name : registry.api_tool_names()) {
    auto others = taken;
    others.erase(name);
    auto [spec, remap] = augment_tool_spec(registry.at(name), pool, seed, others);
    taken.insert(spec.name);
    if (!remap.identity()) ++renamed;
    for (const auto& f : remap.flags) flags.push_back(name + ": " + f);
    remaps[name] = {{"name", remap.tool_to}, {"arguments", remap.arguments}};
    augmented.add(std::move(spec));
  }
  save_registry(augmented, out);
  write_file(std::filesystem::path(out) / "remap.json", remaps.dump(2) + "\n");
  return {{"out", out}, {"tools", registry.api_tool_names().size()}, {"renamed", renamed}, {"flags", flags}};
}

Json cmd_index_build(Runtime& rt, const Json& req) {
  auto out = req_str(req, "out", config_str(rt.config(), "paths.index"));
  auto index = build_index(rt.registry(), rt.embedder());
  index.save(out);
  return {{"out", out}, {"entries", index.size()}, {"dimension", index.dimension()}, {"fingerprint", index.fingerprint()}};
}

Json cmd_ask(Runtime& rt, const Json& req) {
  auto question = req_required(req, "question");
  auto config = rt.agent_config();
  if (req_bool(req, "no_thought", false)) config.thought_mode = ThoughtMode::kNoThoughts;
  config.max_steps = req_int(req, "max_steps", config.max_steps);
  AgentServices services{rt.chat(), rt.gateway(), nullptr};
  auto trace = config.thought_mode == ThoughtMode::kNoThoughts
                   ? run_inference_no_thought(question, rt.registry(), services, config)
                   : run_inference(question, rt.registry(), services, config);
  trace.id = "ask-" + hash_hex(question);
  std::filesystem::path path = req_str(req, "trace_out");
  if (path.empty()) path = std::filesystem::path(config_str(rt.config(), "paths.traces")) / (trace.id + ".json");
  write_file(path, trace_to_json(trace).dump(2) + "\n");
  Json out = Json::object();
  out["answer"] = trace.final_answer ? Json(*trace.final_answer) : Json(nullptr);
  out["terminal"] = terminal_name(trace.terminal);
  out["steps"] = trace.steps.size();
  out["trace_path"] = path.string();
  if (!trace.abort_reason.empty()) out["abort_reason"] = trace.abort_reason;
  return out;
}

Json cmd_datagen_tools(Runtime& rt, const Json& req) {
  auto docs = read_file(req_required(req, "docs"));
  auto database = req_required(req, "database");
  auto family = parse_api_family(req_required(req, "family"));
  auto review_path = req_required(req, "review");
  std::map<std::string, std::vector<Json>> samples;
  if (auto sp = req_str(req, "samples"); !sp.empty()) {
    samples = Json::parse(read_file(sp)).get<std::map<std::string, std::vector<Json>>>();
  }
  auto& chat = rt.chat();
  auto capabilities = summarize_api_capabilities(docs, database, chat);
  auto queue = ReviewQueue::load(review_path);
  Json dropped = Json::array();
  std::size_t submitted = 0;
  std::size_t failed_checks = 0;
  for (const auto& cap : capabilities) {
    auto gen = generate_tool_spec(cap, docs, family, chat);
    for (const auto& d : gen.dropped) dropped.push_back(cap + ": " + d);
    for (const auto& spec : gen.specs) {
      if (rt.registry().contains(spec.name)) {
        dropped.push_back(cap + ": " + spec.name + " already exists");
        continue;
      }
      std::string note;
      if (auto it = samples.find(spec.name); it != samples.end()) {
        Registry one;
        one.add(spec);
        auto gw = rt.make_gateway(one, {});
        auto report = check_tool(spec, *gw, chat, it->second);
        note = report.pass ? "check: pass" : "check failed at " + report.stage + ": " + report.detail;
        if (!report.pass) {
          ++failed_checks;
          dropped.push_back(spec.name + ": " + note);
          continue;
        }
      }
      queue.submit("tool", spec.name, tool_spec_to_json(spec));
      if (!note.empty()) queue.set_status(spec.name, ReviewStatus::kPending, note);
      ++submitted;
    }
  }
  queue.save(review_path);
  return {{"capabilities", capabilities},
          {"submitted", submitted},
          {"failed_checks", failed_checks},
          {"dropped", dropped},
          {"review", review_path}};
}

Json cmd_datagen_review(Runtime&, const Json& req) {
  auto review_path = req_required(req, "review");
  auto queue = ReviewQueue::load(review_path);
  auto id = req_str(req, "id");
  if (!id.empty()) {
    queue.set_status(id, parse_review_status(req_required(req, "status")), req_str(req, "note"));
    queue.save(review_path);
  }
  Json items = Json::array();
  for (const auto& it : queue.items()) {
    items.push_back({{"id", it.id}, {"kind", it.kind}, {"status", review_status_name(it.status)}, {"note", it.note}});
  }
  return {{"review", review_path}, {"items", items}};
}

Json cmd_datagen_activate(Runtime& rt, const Json& req) {
  auto queue = ReviewQueue::load(req_required(req, "review"));
  auto out = req_str(req, "out", config_str(rt.config(), "paths.specs"));
  Registry registry = rt.registry();
  auto added = activate_approved_tools(queue, registry);
  save_registry(registry, out);
  return {{"added", added}, {"tools", registry.size()}, {"out", out}};
}

QuestionSources drug_sources(const DrugLabel& label, const Registry& registry, Rng& rng) {
  QuestionSources s;
  auto [field, text] = select_field(label, rng);
  s.generic_name = label.generic_name;
  s.brand_name = label.brand_name;
  s.field_name = field;
  s.field_text = text;
  s.selected_tools = tools_for_field(registry, field);
  return s;
}

Json cmd_datagen_questions(Runtime& rt, const Json& req) {
  auto type = parse_question_type(req_required(req, "type"));
  auto count = req_int(req, "count", 1);
  auto out = req_required(req, "out");
  auto cutoff = config_int(rt.config(), "datagen.leakage_cutoff_year");
  Rng rng(derive_seed(rt.seed(), "questions:" + std::string(question_type_name(type))));
  auto& chat = rt.chat();
  const auto& registry = rt.registry();

  std::vector<DrugLabel> labels;
  std::size_t removed = 0;
  if (auto lp = req_str(req, "labels"); !lp.empty()) {
    auto split = apply_leakage_cutoff(load_fda_labels(lp), cutoff);
    labels = std::move(split.kept);
    removed = split.removed.size();
  }
  std::vector<Association> assoc;
  if (auto ap = req_str(req, "associations"); !ap.empty()) assoc = load_associations(ap);
  std::optional<ToolGraph> graph;
  if (auto gp = req_str(req, "graph"); !gp.empty()) graph = ToolGraph::from_json(Json::parse(read_file(gp)));

  auto next_sources = [&]() -> QuestionSources {
    switch (type) {
      case QuestionType::kDrugCentered:
        if (labels.empty()) throw Error(ErrorCode::kPrecondition, "drug-centered questions need 'labels'");
        return drug_sources(labels[rng.index(labels.size())], registry, rng);
      case QuestionType::kDiseaseCentered: {
        if (assoc.empty()) throw Error(ErrorCode::kPrecondition, "disease-centered questions need 'associations'");
        const auto& pick = assoc[rng.index(assoc.size())];
        QuestionSources s;
        s.disease_info = pick.disease;
        for (const auto& a : assoc) {
          if (a.disease != pick.disease) continue;
          Json d = {{"drug", a.drug}, {"relation", a.relation}};
          for (const auto& l : labels) {
            if (to_lower(l.generic_name) == to_lower(a.drug) || to_lower(l.brand_name) == to_lower(a.drug)) {
              if (auto it = l.fields.find("indications_and_usage"); it != l.fields.end()) d["indications"] = it->second;
            }
          }
          s.drug_info.push_back(std::move(d));
        }
        s.selected_tools = tools_for_field(registry, "indications_and_usage");
        return s;
      }
      case QuestionType::kToolChain: {
        if (!graph || graph->edges().empty()) throw Error(ErrorCode::kPrecondition, "tool-chain questions need a 'graph' with edges");
        const auto& start = graph->edges()[rng.index(graph->edges().size())].src;
        auto chain = sample_tool_chain(*graph, start, req_int(req, "chain_length", 3), rng.engine()());
        QuestionSources s;
        for (const auto& t : chain.tools) {
          if (const auto* spec = registry.find(t)) s.chain_descriptions.push_back(t + ": " + spec->description);
        }
        s.selected_tools = chain.tools;
        return s;
      }
    }
    throw Error(ErrorCode::kInternal, "unhandled question type");
  };

  std::vector<Json> passed;
  Json failures = Json::array();
  for (int i = 0; i < count; ++i) {
    try {
      auto record = generate_question(type, next_sources(), chat, rng);
      auto ev = evaluate_question(record, chat);
      if (ev.pass) {
        passed.push_back(question_record_to_json(record));
      } else {
        Json checks = Json::array();
        for (const auto& c : ev.checks) checks.push_back({{"check", c.check}, {"verdict", c.verdict}});
        failures.push_back({{"id", record.id}, {"checks", checks}});
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kPrecondition && i == 0 && passed.empty()) throw;
      failures.push_back({{"error", e.what()}});
    }
  }
  write_jsonl(out, passed);
  return {{"out", out},
          {"requested", count},
          {"passed", passed.size()},
          {"failed", failures.size()},
          {"failures", failures},
          {"removed_by_cutoff", removed}};
}

std::vector<QuestionRecord> load_questions(const std::string& path) {
  std::vector<QuestionRecord> out;
  for (const auto& doc : read_jsonl(path)) out.push_back(question_record_from_json(doc));
  return out;
}

Json cmd_datagen_traces(Runtime& rt, const Json& req) {
  auto records = load_questions(req_required(req, "questions"));
  auto out = req_required(req, "out");
  bool first_stage = req_bool(req, "first_stage", false);
  TraceGenConfig config;
  config.max_steps = config_int(rt.config(), "datagen.max_steps");
  config.max_wrong_answers = config_int(rt.config(), "datagen.max_wrong_answers");
  config.toolrag_k = config_int(rt.config(), "agent.toolrag_k");
  config.seed = rt.seed();
  auto& chat = rt.chat();
  TraceGenServices services{chat, chat, rt.gateway(), first_stage ? Retriever{} : rt.retriever(), &chat};

  std::vector<Json> accepted;
  std::vector<Json> rejected;
  std::map<std::string, int> reasons;
  for (const auto& record : records) {
    auto outcome = generate_trace(record, rt.registry(), services, config);
    if (!outcome.trace) {
      ++reasons[outcome.rejection.substr(0, outcome.rejection.find(':'))];
      rejected.push_back({{"question_id", record.id}, {"reasons", {outcome.rejection}}});
      continue;
    }
    auto ev = evaluate_trace(*outcome.trace, record, rt.registry(), chat);
    if (ev.pass) {
      accepted.push_back(trace_to_json(*outcome.trace));
    } else {
      for (const auto& r : ev.reasons) ++reasons[r];
      rejected.push_back({{"question_id", record.id}, {"reasons", ev.reasons}, {"details", ev.details}});
    }
  }
  write_jsonl(out, accepted);
  if (auto ro = req_str(req, "rejected_out"); !ro.empty()) write_jsonl(ro, rejected);
  return {{"out", out}, {"accepted", accepted.size()}, {"rejected", rejected.size()}, {"reasons", reasons}};
}

Json cmd_datagen_export(Runtime& rt, const Json& req) {
  std::vector<ReasoningTrace> traces;
  for (const auto& doc : read_jsonl(req_required(req, "traces"))) traces.push_back(trace_from_json(doc));
  auto out = req_required(req, "out");
  AugmentConfig augment;
  augment.random_extra_tools = config_int(rt.config(), "datagen.extra_tools");
  augment.context_limit_chars = static_cast<std::size_t>(config_u64(rt.config(), "datagen.context_limit_chars"));
  augment.seed = rt.seed();
  if (augment.context_limit_chars > 0) augment.summarizer = &rt.chat();
  std::optional<RephrasePool> pool;
  if (auto pp = req_str(req, "rephrase", config_str(rt.config(), "paths.rephrase")); !pp.empty()) {
    pool = load_rephrase_pool(pp);
    augment.rephrase = &*pool;
  }
  std::optional<int> filter;
  if (req.contains("max_steps") && !req["max_steps"].is_null()) filter = req_int(req, "max_steps", 0);

  std::vector<TrainingSample> samples;
  std::size_t skipped = 0;
  for (const auto& t : traces) {
    auto s = export_training_samples(t, rt.registry(), augment, filter);
    if (s.empty()) ++skipped;
    samples.insert(samples.end(), s.begin(), s.end());
  }
  write_training_samples(out, samples);
  Json result = {{"out", out}, {"traces", traces.size()}, {"samples", samples.size()}, {"filtered", skipped}};
  if (auto po = req_str(req, "pairs_out"); !po.empty()) {
    auto pairs = extract_training_pairs(traces, rt.registry());
    write_training_pairs(po, pairs);
    result["pairs"] = pairs.size();
  }
  return result;
}

std::vector<EvalOutcome> evaluate_set(const std::vector<BenchmarkItem>& items, const std::string& mode,
                                      const AgentRunner& agent, const EvalOptions& options) {
  if (mode == "mc") return evaluate_multiple_choice(items, agent, options);
  if (mode == "open") return evaluate_open_ended(items, agent, options);
  if (mode == "description") return evaluate_description_two_step(items, agent, options);
  if (mode != "auto") throw Error(ErrorCode::kInvalidArgument, "unknown eval mode '" + mode + "'");
  std::vector<BenchmarkItem> desc, rest;
  for (const auto& it : items) (it.family == "description" ? desc : rest).push_back(it);
  auto out = evaluate_multiple_choice(rest, agent, options);
  auto d = evaluate_description_two_step(desc, agent, options);
  out.insert(out.end(), d.begin(), d.end());
  return out;
}

Json cmd_eval(Runtime& rt, const Json& req) {
  auto bench_path = req_required(req, "benchmark");
  auto items = load_benchmark(bench_path);
  auto mode = req_str(req, "mode", "auto");
  EvalOptions options;
  options.concurrency = req_int(req, "concurrency", rt.jobs());
  options.item_timeout = std::chrono::milliseconds(config_int(rt.config(), "eval.item_timeout_ms"));
  if (auto td = req_str(req, "trace_dir"); !td.empty()) options.trace_dir = td;
  options.mapper = &rt.chat();
  auto config = rt.agent_config();
  config.answer_mode = mode == "open" ? AnswerMode::kOpenEnded : AnswerMode::kMultipleChoice;

  std::vector<OutcomeSet> sets;
  auto subsets = req_strings(req, "subsets");
  if (subsets.empty()) {
    AgentServices services{rt.chat(), rt.gateway(), nullptr};
    auto runner = make_agent_runner(rt.registry(), services, config);
    sets.push_back({std::filesystem::path(bench_path).stem().string(), evaluate_set(items, mode, runner, options)});
  } else {
    std::vector<std::vector<std::string>> manifests;
    for (const auto& p : subsets) manifests.push_back(load_subset_manifest(p));
    auto registries = nested_subsets(rt.registry(), manifests);
    for (std::size_t i = 0; i < registries.size(); ++i) {
      auto gateway = rt.make_gateway(registries[i], rt.make_retriever_for(registries[i]));
      AgentServices services{rt.chat(), *gateway, nullptr};
      auto runner = make_agent_runner(registries[i], services, config);
      EvalOptions o = options;
      if (o.trace_dir) o.trace_dir = *o.trace_dir / std::to_string(i);
      sets.push_back({std::filesystem::path(subsets[i]).stem().string(), evaluate_set(items, mode, runner, o)});
    }
  }
  auto report = compute_metrics(sets);
  Json result = metrics_to_json(report);
  result["table"] = render_metrics_table(report);
  if (auto out = req_str(req, "out"); !out.empty()) {
    write_file(out, metrics_to_json(report).dump(2) + "\n");
    std::vector<Json> rows;
    for (const auto& s : sets) {
      for (const auto& o : s.outcomes) {
        auto j = eval_outcome_to_json(o);
        j["set"] = s.name;
        rows.push_back(std::move(j));
      }
    }
    write_jsonl(out + ".outcomes.jsonl", rows);
    result["out"] = out;
  }
  return result;
}

Json cmd_smoke(Runtime& rt, const Json&) {
  auto gc = rt.gateway_config();
  auto& transport = rt.transport();
  Json checks = Json::array();
  bool ok = true;
  auto check = [&](const std::string& name, const std::function<std::string()>& fn) {
    try {
      checks.push_back({{"name", name}, {"ok", true}, {"detail", fn()}});
    } catch (const std::exception& e) {
      ok = false;
      checks.push_back({{"name", name}, {"ok", false}, {"detail", e.what()}});
    }
  };
  auto expect_200 = [](const HttpResponse& r) {
    if (r.status != 200) throw TransportError("HTTP " + std::to_string(r.status), r.status);
    return "HTTP 200, " + std::to_string(r.body.size()) + " bytes";
  };
  check("openfda", [&] {
    HttpRequest r;
    r.url = gc.fda_base + "/drug/label.json?limit=1";
    if (!gc.fda_api_key.empty()) r.url += "&api_key=" + percent_encode(gc.fda_api_key);
    r.timeout_ms = gc.timeout_ms;
    return expect_200(transport.send(r));
  });
  check("opentargets", [&] {
    HttpRequest r;
    r.method = "POST";
    r.url = gc.ot_base + "/api/v4/graphql";
    r.content_type = "application/json";
    r.body = Json{{"query", "query { meta { name } }"}}.dump();
    r.timeout_ms = gc.timeout_ms;
    return expect_200(transport.send(r));
  });
  check("monarch", [&] {
    HttpRequest r;
    r.url = gc.monarch_base + "/v3/api/entity/MONDO:0005148";
    r.timeout_ms = gc.timeout_ms;
    return expect_200(transport.send(r));
  });
  if (!config_str(rt.config(), "chat.base_url").empty()) {
    check("chat", [&] {
      ChatRequest req;
      req.messages.push_back({Role::kUser, "Reply with OK."});
      req.sampling.max_tokens = 8;
      return "reply: " + rt.chat().chat(req);
    });
  }
  if (!config_str(rt.config(), "embed.base_url").empty()) {
    check("embeddings", [&] {
      return "dimension " + std::to_string(rt.embedder().embed({"aspirin"}).at(0).dimension());
    });
  }
  return {{"ok", ok}, {"checks", checks}};
}

using Command = Json (*)(Runtime&, const Json&);

const std::vector<std::pair<std::string_view, Command>>& command_table() {
  static const std::vector<std::pair<std::string_view, Command>> table = {
      {"config.show", cmd_config_show},
      {"tools.validate", cmd_tools_validate},
      {"tools.graph", cmd_tools_graph},
      {"tools.augment", cmd_tools_augment},
      {"index.build", cmd_index_build},
      {"ask", cmd_ask},
      {"datagen.tools", cmd_datagen_tools},
      {"datagen.review", cmd_datagen_review},
      {"datagen.activate", cmd_datagen_activate},
      {"datagen.questions", cmd_datagen_questions},
      {"datagen.traces", cmd_datagen_traces},
      {"datagen.export", cmd_datagen_export},
      {"eval", cmd_eval},
      {"smoke", cmd_smoke},
  };
  return table;
}

}  // namespace

std::vector<std::string> command_names() {
  std::vector<std::string> out;
  for (const auto& [name, fn] : command_table()) out.emplace_back(name);
  return out;
}

Json run_command(Runtime& runtime, std::string_view command, const Json& request) {
  if (!request.is_object()) throw Error(ErrorCode::kInvalidArgument, "request must be a JSON object");
  for (const auto& [name, fn] : command_table()) {
    if (name == command) return fn(runtime, request);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown command '" + std::string(command) + "'");
}

}  // namespace toolverse
