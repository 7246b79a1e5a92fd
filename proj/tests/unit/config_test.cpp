#include <gtest/gtest.h>

#include "toolverse/config.hpp"
#include "toolverse/error.hpp"
#include "test_support.hpp"

using namespace toolverse;

TEST(Config, ParsesSectionsQuotesAndComments) {
  auto m = parse_config_text(R"(
mode = fixture   # trailing comment
[chat]
model = "gpt # not a comment"
[paths]
specs = data/specs
)");
  EXPECT_EQ(m.at("mode"), "fixture");
  EXPECT_EQ(m.at("chat.model"), "gpt # not a comment");
  EXPECT_EQ(m.at("paths.specs"), "data/specs");
}

TEST(Config, ParseErrorsNameTheLine) {
  try {
    parse_config_text("mode = live\nthis is wrong\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_config_text("[chat\n"), Error);
  EXPECT_THROW(parse_config_text("k = \"open\n"), Error);
}

TEST(Config, DefaultsFillEveryKey) {
  auto c = resolve_config({}, {}, {});
  EXPECT_EQ(c.size(), config_keys().size());
  EXPECT_EQ(c.at("mode"), "live");
  EXPECT_EQ(c.at("agent.max_steps"), "30");
  EXPECT_EQ(c.at("datagen.leakage_cutoff_year"), "2023");
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_THROW(resolve_config({{"chat.modle", "x"}}, {}, {}), Error);
  EXPECT_THROW(resolve_config({}, {}, {{"nope", "1"}}), Error);
}

TEST(Config, SecretsOnlyFromEnvironment) {
  EXPECT_THROW(resolve_config({{"chat.api_key", "sk-1"}}, {}, {}), Error);
  EXPECT_THROW(resolve_config({}, {}, {{"fda.api_key", "k"}}), Error);
  auto c = resolve_config({}, {{"TOOLVERSE_CHAT_KEY", "sk-secret"}}, {});
  EXPECT_EQ(c.at("chat.api_key"), "sk-secret");
  auto red = redacted_config(c);
  EXPECT_EQ(red["chat.api_key"], "***");
  EXPECT_EQ(red.dump().find("sk-secret"), std::string::npos);
}

// Every combination of layers for a set of keys: the highest present layer wins.
TEST(Config, PrecedenceFlagsOverEnvOverFile) {
  struct Key {
    std::string key, env;
  };
  const std::vector<Key> keys = {{"mode", "TOOLVERSE_MODE"},
                                 {"chat.model", "TOOLVERSE_CHAT_MODEL"},
                                 {"http.timeout_ms", "TOOLVERSE_HTTP_TIMEOUT_MS"},
                                 {"paths.specs", "TOOLVERSE_SPECS"},
                                 {"seed", "TOOLVERSE_SEED"}};
  for (const auto& k : keys) {
    for (int mask = 0; mask < 8; ++mask) {
      ConfigMap file, env, flags;
      if (mask & 1) file[k.key] = "from-file";
      if (mask & 2) env[k.env] = "from-env";
      if (mask & 4) flags[k.key] = "from-flag";
      auto c = resolve_config(file, env, flags);
      std::string want = mask & 4   ? "from-flag"
                         : mask & 2 ? "from-env"
                         : mask & 1 ? "from-file"
                                    : std::string(find_config_key(k.key)->default_value);
      EXPECT_EQ(c.at(k.key), want) << k.key << " mask " << mask;
    }
  }
}

TEST(Config, LoadConfigReadsFileAndRequiresExplicitPath) {
  tvt::TempDir dir;
  write_file(dir / "c.toml", "[agent]\nmax_steps = 7\n");
  auto c = load_config(dir / "c.toml", {}, {});
  EXPECT_EQ(config_int(c, "agent.max_steps"), 7);
  EXPECT_THROW(load_config(dir / "missing.toml", {}, {}), Error);
}

TEST(Config, TypedAccessorsValidate) {
  auto c = resolve_config({}, {}, {{"seed", "abc"}, {"http.record", "yes"}});
  EXPECT_THROW(config_u64(c, "seed"), Error);
  EXPECT_TRUE(config_bool(c, "http.record"));
  auto d = resolve_config({}, {}, {{"http.record", "maybe"}});
  EXPECT_THROW(config_bool(d, "http.record"), Error);
}
