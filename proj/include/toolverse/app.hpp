#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "toolverse/agent.hpp"
#include "toolverse/config.hpp"
#include "toolverse/gateway.hpp"
#include "toolverse/llm.hpp"
#include "toolverse/registry.hpp"
#include "toolverse/toolrag.hpp"

namespace toolverse {

// Chat script file. A JSON array is consumed in order (see ScriptedChat). An
// object {"model"?, "rules": [{"match": str | [str...], "replies": [...]}],
// "default"?} answers each request with the first rule whose match strings
// all occur in the rendered request; a rule's replies are used in turn and
// the last one repeats.
std::unique_ptr<ChatService> load_chat_script(const std::filesystem::path& path);

// Services built on demand from a resolved configuration. Accessors are safe
// to call from several threads.
class Runtime {
 public:
  explicit Runtime(ConfigMap config);
  ~Runtime();
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  [[nodiscard]] const ConfigMap& config() const { return config_; }
  [[nodiscard]] ExecMode mode() const { return mode_; }
  [[nodiscard]] std::uint64_t seed() const;
  [[nodiscard]] int jobs() const;
  [[nodiscard]] GatewayConfig gateway_config() const;
  [[nodiscard]] AgentConfig agent_config() const;

  // Replaces the HTTP transport used in live mode, e.g. with a stub.
  void set_transport(std::unique_ptr<HttpTransport> transport);

  const Registry& registry();
  ChatService& chat();
  EmbeddingService& embedder();
  HttpTransport& transport();
  // The saved index when paths.index holds one, else one built in memory.
  const EmbeddingIndex& index();
  Retriever retriever();
  Gateway& gateway();

  // A gateway over another registry, with its own in-memory index.
  std::unique_ptr<Gateway> make_gateway(const Registry& registry, Retriever retriever);
  Retriever make_retriever_for(const Registry& registry);

 private:
  ConfigMap config_;
  ExecMode mode_;
  std::recursive_mutex mu_;
  std::unique_ptr<Registry> registry_;
  std::unique_ptr<HttpTransport> transport_;
  std::unique_ptr<ChatService> chat_;
  std::unique_ptr<EmbeddingService> embedder_;
  std::unique_ptr<CassetteStore> cassettes_;
  std::unique_ptr<EmbeddingIndex> index_;
  std::unique_ptr<Gateway> gateway_;
};

// Commands take and return JSON documents. Failures throw Error.
std::vector<std::string> command_names();
Json run_command(Runtime& runtime, std::string_view command, const Json& request);

}  // namespace toolverse
