#include <gtest/gtest.h>

#include <cmath>

#include "toolverse/error.hpp"
#include "toolverse/http.hpp"
#include "toolverse/llm.hpp"

using namespace toolverse;
using namespace std::chrono_literals;

TEST(Http, RetriesTransientFailuresWithDoublingBackoff) {
  int calls = 0;
  CallbackTransport t([&](const HttpRequest&) -> HttpResponse {
    ++calls;
    if (calls == 1) throw TransportError("reset");
    if (calls == 2) return {503, ""};
    return {200, "ok"};
  });
  std::vector<std::chrono::milliseconds> waits;
  auto r = send_with_retry(t, {}, {3, 100ms}, [&](auto d) { waits.push_back(d); });
  EXPECT_EQ(r.body, "ok");
  EXPECT_EQ(waits, (std::vector<std::chrono::milliseconds>{100ms, 200ms}));
}

TEST(Http, ClientErrorsAreNotRetried) {
  int calls = 0;
  CallbackTransport t([&](const HttpRequest&) { ++calls; return HttpResponse{404, "nf"}; });
  EXPECT_EQ(send_with_retry(t, {}, {3, 1ms}, nullptr).status, 404);
  EXPECT_EQ(calls, 1);
}

TEST(Http, GivesUpAfterAttempts) {
  int calls = 0;
  CallbackTransport t([&](const HttpRequest&) { ++calls; return HttpResponse{429, ""}; });
  try {
    send_with_retry(t, {}, {4, 1ms}, [](auto) {});
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_EQ(e.http_status(), 429);
  }
  EXPECT_EQ(calls, 4);
}

TEST(Http, ParseUrl) {
  auto u = parse_url("https://api.fda.gov/drug/label.json?limit=1");
  EXPECT_EQ(u.scheme, "https");
  EXPECT_EQ(u.host, "api.fda.gov");
  EXPECT_EQ(u.port, 443);
  EXPECT_EQ(u.path_and_query, "/drug/label.json?limit=1");
  EXPECT_EQ(parse_url("http://localhost:8000/v1").port, 8000);
}

TEST(Chat, ScriptedRepliesInOrderAndRaisesScriptedErrors) {
  ScriptedChat chat({Json("one"), Json{{"error", "overflow"}}, Json{{"error", "transport"}}});
  ChatRequest req;
  req.messages.push_back({Role::kUser, "hi"});
  EXPECT_EQ(chat.chat(req), "one");
  try {
    chat.chat(req);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContextOverflow);
  }
  EXPECT_THROW(chat.chat(req), TransportError);
  EXPECT_THROW(chat.chat(req), TransportError);  // exhausted
  EXPECT_EQ(chat.requests().size(), 4u);
}

TEST(Chat, StopSequencesCutAtEarliest) {
  EXPECT_EQ(apply_stop_sequences("abc STOP def END", {"END", "STOP"}), "abc ");
  ScriptedChat chat(std::vector<Json>{"x\nObservation: y"});
  ChatRequest req;
  req.sampling.stop_sequences = {"\nObservation:"};
  EXPECT_EQ(chat.chat(req), "x");
  req.sampling.stop_sequences = {""};
  EXPECT_THROW(chat.chat(req), Error);
}

TEST(Chat, HttpServiceWireFormatAndUsage) {
  HttpRequest seen;
  CallbackTransport t([&](const HttpRequest& r) {
    seen = r;
    return HttpResponse{200, R"({"choices":[{"message":{"content":"hello"}}],"usage":{"prompt_tokens":7,"completion_tokens":2}})"};
  });
  HttpChatService svc({"http://host:1/v1/", "m1", "sekret", 1000, 2}, t, {1, 1ms}, nullptr);
  ChatRequest req;
  req.system_prompt = "sys";
  req.messages.push_back({Role::kUser, "q"});
  req.sampling.temperature = 0.5;
  req.sampling.max_tokens = 64;
  EXPECT_EQ(svc.chat(req), "hello");
  EXPECT_EQ(seen.url, "http://host:1/v1/chat/completions");
  EXPECT_EQ(seen.headers["Authorization"], "Bearer sekret");
  EXPECT_EQ(Json::parse(seen.body).dump(),
            R"({"model":"m1","messages":[{"role":"system","content":"sys"},{"role":"user","content":"q"}],"temperature":0.5,"max_tokens":64})");
  EXPECT_EQ(svc.usage().prompt_tokens, 7u);
  EXPECT_EQ(svc.usage().completion_tokens, 2u);
}

TEST(Chat, HttpOverflowIsClassified) {
  CallbackTransport t([](const HttpRequest&) {
    return HttpResponse{400, R"({"error":{"code":"context_length_exceeded"}})"};
  });
  HttpChatService svc({"http://h/v1", "m", "", 1000, 1}, t, {1, 1ms}, nullptr);
  try {
    svc.chat({});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kContextOverflow);
  }
}

TEST(Embedding, HashEmbedderIsDeterministic) {
  HashEmbedder a(64), b(64);
  auto va = a.embed({"dosage of kisunla", "seizure"});
  auto vb = b.embed({"dosage of kisunla", "seizure"});
  EXPECT_EQ(va, vb);
  EXPECT_EQ(va[0].dimension(), 64u);
  EXPECT_NE(va[0], va[1]);
}

TEST(Embedding, BatchContractEnforced) {
  EXPECT_THROW(HashEmbedder(8).embed({}), Error);
  TableEmbedder t({{"a", {1, 0}}, {"b", {1, 0, 0}}, {"nan", {NAN, 0}}});
  t.embed({"a"});
  try {
    t.embed({"b"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDimensionMismatch);
  }
  EXPECT_THROW(t.embed({"nan"}), Error);
}

TEST(Embedding, HttpServiceOrdersByIndex) {
  CallbackTransport t([](const HttpRequest& r) {
    EXPECT_EQ(Json::parse(r.body)["input"].size(), 2u);
    return HttpResponse{200, R"({"data":[{"index":1,"embedding":[0,1]},{"index":0,"embedding":[1,0]}]})"};
  });
  HttpEmbeddingService svc({"http://h/v1", "e", "", 1000, 1}, t, {1, 1ms}, nullptr);
  auto v = svc.embed({"x", "y"});
  EXPECT_EQ(v[0].values, (std::vector<float>{1, 0}));
  EXPECT_EQ(v[1].values, (std::vector<float>{0, 1}));
}
