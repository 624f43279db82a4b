#include <algorithm>
#include <fstream>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gtest/gtest.h"
#include "pem/core/model_io.hpp"
#include "pem/server/client.hpp"
#include "pem/server/server.hpp"
#include "pem/server/session.hpp"

namespace pem::server {
namespace {

using nlohmann::json;

const std::string kDataDir = PEM_TEST_DATA_DIR;

ModelRegistry test_registry() {
  ConditionParams half = perfect_params();
  half.transition = {0.5, 0.7};
  half.error = {1.01, 0.002, 0.03, 0.01, 0.2};
  const GridSpec grid;
  return {{"perfect", PemModel::uniform(grid, perfect_params(), "")},
          {"blind", PemModel::uniform(grid, blind_params(), "")},
          {"noisy", PemModel::uniform(grid, half, "")}};
}

json reply(Session& s, const std::string& line) { return json::parse(s.handle_line(line)); }

std::string frame_line(double t, const std::vector<CartesianObject>& objects) { return frame_request(t, objects); }

const std::vector<CartesianObject> kThree{
    {1, {0.0, 10.0}, OcclusionLevel::vis0}, {2, {-4.5, 3.25}, OcclusionLevel::vis1}, {3, {20.0, -7.0}, OcclusionLevel::vis3}};

TEST(Session, FrameBeforeInit) {
  const auto reg = test_registry();
  Session s(reg);
  const json r = reply(s, frame_line(0.0, {}));
  EXPECT_EQ(r["type"], "error");
  EXPECT_EQ(r["code"], "not_initialized");
}

TEST(Session, UnknownModel) {
  const auto reg = test_registry();
  Session s(reg);
  EXPECT_EQ(reply(s, R"({"type":"init","model":"nope","seed":1})")["code"], "unknown_model");
  EXPECT_FALSE(s.initialized());
}

TEST(Session, EmptyFrameGivesEmptyResponse) {
  const auto reg = test_registry();
  Session s(reg);
  EXPECT_EQ(reply(s, R"({"type":"init","model":"noisy","seed":1,"rate_hz":10})")["type"], "ack");
  const json r = reply(s, frame_line(0.5, {}));
  EXPECT_EQ(r["type"], "response");
  EXPECT_EQ(r["t"], 0.5);
  EXPECT_TRUE(r["objects"].empty());
}

TEST(Session, PerfectModelEchoesPositions) {
  const auto reg = test_registry();
  Session s(reg);
  reply(s, R"({"type":"init","model":"perfect","seed":3})");
  const json r = reply(s, frame_line(0.0, kThree));
  ASSERT_EQ(r["objects"].size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(r["objects"][i]["source_id"], kThree[i].id);
    EXPECT_NEAR(r["objects"][i]["x"].get<double>(), kThree[i].position.x, 1e-9);
    EXPECT_NEAR(r["objects"][i]["y"].get<double>(), kThree[i].position.y, 1e-9);
  }
}

TEST(Session, BlindModelNeverResponds) {
  const auto reg = test_registry();
  Session s(reg);
  reply(s, R"({"type":"init","model":"blind","seed":3})");
  for (int k = 0; k < 20; ++k) EXPECT_TRUE(reply(s, frame_line(0.1 * k, kThree))["objects"].empty());
}

TEST(Session, TimeMustIncrease) {
  const auto reg = test_registry();
  Session s(reg);
  reply(s, R"({"type":"init","model":"noisy","seed":3})");
  reply(s, frame_line(1.0, kThree));
  EXPECT_EQ(reply(s, frame_line(1.0, kThree))["code"], "time_regression");
  EXPECT_EQ(reply(s, frame_line(0.5, kThree))["code"], "time_regression");
  EXPECT_EQ(reply(s, frame_line(1.5, kThree))["type"], "response");
  EXPECT_EQ(s.frame_count(), 2u);
}

TEST(Session, DuplicateIdsRejectedWithoutConsumingState) {
  const auto reg = test_registry();
  Session a(reg), b(reg);
  reply(a, R"({"type":"init","model":"noisy","seed":11})");
  reply(b, R"({"type":"init","model":"noisy","seed":11})");
  auto dup = kThree;
  dup.push_back(kThree[0]);
  EXPECT_EQ(reply(a, frame_line(0.0, dup))["code"], "duplicate_id");
  // the rejected frame left no trace: both sessions continue identically
  for (int k = 0; k < 10; ++k) EXPECT_EQ(a.handle_line(frame_line(k, kThree)), b.handle_line(frame_line(k, kThree)));
}

TEST(Session, MalformedLinesAreSurvivable) {
  const auto reg = test_registry();
  Session s(reg);
  EXPECT_EQ(reply(s, "{")["code"], "malformed");
  EXPECT_EQ(reply(s, "")["code"], "malformed");
  EXPECT_EQ(reply(s, "42")["code"], "bad_request");
  EXPECT_EQ(reply(s, R"({"kind":"frame"})")["code"], "bad_request");
  EXPECT_EQ(reply(s, R"({"type":"init","model":"noisy","seed":-1})")["code"], "bad_request");
  EXPECT_EQ(reply(s, R"({"type":"init","model":"noisy","seed":1,"rate_hz":0})")["code"], "bad_request");
  EXPECT_EQ(reply(s, R"({"type":"init","model":"noisy","seed":1})")["type"], "ack");
  EXPECT_EQ(reply(s, R"({"type":"frame","t":0,"objects":[{"id":1.5,"x":0,"y":1,"occ":0}]})")["code"],
            "bad_request");
  EXPECT_EQ(reply(s, R"({"type":"frame","t":0,"objects":[{"id":1,"x":"a","y":1,"occ":0}]})")["code"],
            "bad_request");
  EXPECT_EQ(reply(s, R"({"type":"init","model":"perfect","seed":1})")["code"], "already_initialized");
  EXPECT_EQ(reply(s, frame_line(0.0, kThree))["type"], "response");
}

TEST(Session, ResponsesAreSubsetsOfFrames) {
  const auto reg = test_registry();
  Session s(reg);
  reply(s, R"({"type":"init","model":"noisy","seed":5})");
  for (int k = 0; k < 200; ++k) {
    std::vector<CartesianObject> objects;
    for (int i = 0; i < k % 7; ++i) {
      objects.push_back({(k * 7 + i) % 13, {3.0 * i - 9.0, static_cast<double>(2 * k % 90) - 20.0}, OcclusionLevel::vis2});
    }
    std::sort(objects.begin(), objects.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    objects.erase(std::unique(objects.begin(), objects.end(), [](const auto& a, const auto& b) { return a.id == b.id; }),
                  objects.end());
    const json r = reply(s, frame_line(k, objects));
    ASSERT_LE(r["objects"].size(), objects.size());
    for (const auto& o : r["objects"]) {
      const auto id = o["source_id"].get<ObjectId>();
      EXPECT_TRUE(std::any_of(objects.begin(), objects.end(), [&](const auto& w) { return w.id == id; }));
    }
  }
}

TEST(Session, ResetFollowsReseedRule) {
  const auto reg = test_registry();
  Session s(reg);
  reply(s, R"({"type":"init","model":"noisy","seed":21})");
  std::vector<std::string> first;
  for (int k = 0; k < 15; ++k) first.push_back(s.handle_line(frame_line(k, kThree)));
  EXPECT_EQ(reply(s, R"({"type":"reset"})")["of"], "reset");
  EXPECT_EQ(s.reset_count(), 1u);
  std::vector<std::string> second;
  for (int k = 0; k < 15; ++k) second.push_back(s.handle_line(frame_line(k, kThree)));
  EXPECT_NE(first, second);

  // the post-reset stream is what perceive() yields from a fresh track state
  // and the generator seeded with session_seed(21, 1)
  const PemModel& model = reg.at("noisy");
  TrackState tracks;
  Rng rng(session_seed(21, 1));
  for (int k = 0; k < 15; ++k) {
    const auto local = perceive(model, kThree, tracks, rng);
    const json r = json::parse(second[static_cast<std::size_t>(k)]);
    ASSERT_EQ(r["objects"].size(), local.size());
    for (std::size_t i = 0; i < local.size(); ++i) {
      EXPECT_EQ(r["objects"][i]["source_id"], local[i].source_id);
      EXPECT_EQ(r["objects"][i]["x"].get<double>(), local[i].position.x);
      EXPECT_EQ(r["objects"][i]["y"].get<double>(), local[i].position.y);
    }
  }
}

TEST(Session, ResetOnFreshSessionIsNoop) {
  const auto reg = test_registry();
  Session s(reg);
  EXPECT_EQ(reply(s, R"({"type":"reset"})")["type"], "ack");
  EXPECT_FALSE(s.initialized());
  EXPECT_EQ(s.reset_count(), 0u);
}

struct Exchange {
  std::string send;
  std::string expect;
};

std::vector<Exchange> load_transcript() {
  std::ifstream in(kDataDir + "/conformance/transcript.jsonl");
  std::vector<Exchange> out;
  std::string line;
  while (std::getline(in, line)) {
    const json j = json::parse(line);
    out.push_back({j["send"], j["expect"]});
  }
  return out;
}

ModelRegistry conformance_registry() {
  return {{"conformance", load_model(kDataDir + "/conformance/model.json")}};
}

TEST(Conformance, TranscriptReplaysInProcess) {
  const auto transcript = load_transcript();
  ASSERT_GT(transcript.size(), 30u);
  const auto reg = conformance_registry();
  Session s(reg);
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    EXPECT_EQ(s.handle_line(transcript[i].send), transcript[i].expect) << "exchange " << i;
  }
  EXPECT_TRUE(s.shutdown_requested());
}

class RunningServer {
 public:
  explicit RunningServer(ModelRegistry reg) : server_(std::move(reg), {"127.0.0.1", 0}) {
    thread_ = std::thread([this] { server_.run(); });
  }
  ~RunningServer() {
    server_.stop();
    thread_.join();
  }
  std::uint16_t port() const { return server_.port(); }
  Server& server() { return server_; }

 private:
  Server server_;
  std::thread thread_;
};

TEST(Conformance, TranscriptReplaysOverTcp) {
  const auto transcript = load_transcript();
  RunningServer running(conformance_registry());
  Client client("127.0.0.1", running.port());
  for (std::size_t i = 0; i < transcript.size(); ++i) {
    EXPECT_EQ(client.request(transcript[i].send), transcript[i].expect) << "exchange " << i;
  }
}

TEST(Server, ShutdownRequestStopsServer) {
  Server server(test_registry(), {"127.0.0.1", 0});
  auto done = std::async(std::launch::async, [&] { server.run(); });
  Client idle("127.0.0.1", server.port());
  EXPECT_EQ(json::parse(idle.request(R"({"type":"reset"})"))["type"], "ack");
  Client client("127.0.0.1", server.port());
  client.shutdown();
  EXPECT_EQ(done.wait_for(std::chrono::seconds(10)), std::future_status::ready);
  EXPECT_THROW(idle.request(R"({"type":"reset"})"), ConnectionError);
}

TEST(Server, BindFailureIsReported) {
  Server first(test_registry(), {"127.0.0.1", 0});
  EXPECT_THROW(Server(test_registry(), {"127.0.0.1", first.port()}), ServerError);
  EXPECT_THROW(Server(test_registry(), {"not a host name", 0}), ServerError);
}

TEST(Server, ConcurrentSessionsAreIndependentAndDeterministic) {
  RunningServer running(test_registry());
  auto transcript = [&](std::uint64_t seed) {
    Client c("127.0.0.1", running.port());
    c.init("noisy", seed, 10.0);
    std::vector<std::string> lines;
    for (int k = 0; k < 40; ++k) lines.push_back(c.request(frame_line(0.1 * k, kThree)));
    return lines;
  };
  auto a = std::async(std::launch::async, transcript, 1);
  auto b = std::async(std::launch::async, transcript, 2);
  auto a_lines = a.get();
  auto b_lines = b.get();
  EXPECT_NE(a_lines, b_lines);
  EXPECT_EQ(transcript(1), a_lines);
  EXPECT_EQ(transcript(2), b_lines);
}

TEST(Client, TypedCallsMatchLocalPerception) {
  RunningServer running(test_registry());
  Client c("127.0.0.1", running.port());
  EXPECT_THROW(c.frame(0.0, kThree), RemoteError);
  try {
    c.init("nope", 1, 2.0);
    FAIL();
  } catch (const RemoteError& e) {
    EXPECT_EQ(e.code(), "unknown_model");
  }
  c.init("noisy", 99, 2.0);
  TrackState tracks;
  Rng rng(session_seed(99, 0));
  const PemModel& model = running.server().registry().at("noisy");
  for (int k = 0; k < 30; ++k) EXPECT_EQ(c.frame(0.5 * k, kThree), perceive(model, kThree, tracks, rng));
  c.reset();
  tracks.clear();
  rng = Rng(session_seed(99, 1));
  for (int k = 0; k < 30; ++k) EXPECT_EQ(c.frame(0.5 * k, kThree), perceive(model, kThree, tracks, rng));
}

TEST(Registry, LoadsNamedAndStemEntries) {
  const std::string path = kDataDir + "/conformance/model.json";
  const std::vector<std::string> specs{path, "other=" + path};
  const ModelRegistry reg = load_registry(specs);
  EXPECT_EQ(reg.size(), 2u);
  EXPECT_TRUE(reg.count("model"));
  EXPECT_TRUE(reg.count("other"));
  const std::vector<std::string> twice{"a=" + path, "a=" + path};
  EXPECT_THROW(load_registry(twice), ServerError);
}

}  // namespace
}  // namespace pem::server
