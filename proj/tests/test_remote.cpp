#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <thread>

// Eigen before httplib; see src/remote.cpp.
#include "negkb/embedding_store.hpp"

#include <httplib.h>
#include <json.hpp>

#include "negkb/error.hpp"
#include "negkb/pipeline.hpp"
#include "negkb/remote.hpp"
#include "support.hpp"

using namespace negkb;
using nlohmann::json;

namespace {

// Minimal stand-in for the model service, speaking the same wire format.
class StubService {
 public:
  std::atomic<int> embed_calls{0};
  std::atomic<int> predict_calls{0};
  std::atomic<bool> broken{false};
  std::size_t last_batch = 0;
  ProbeCache probes;

  StubService() {
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_calls;
      if (broken) {
        res.set_content(R"({"embeddings":[["x"]]})", "application/json");
        return;
      }
      auto body = json::parse(req.body);
      json vecs = json::array();
      last_batch = body["texts"].size();
      for (const auto& t : body["texts"]) vecs.push_back(vector_for(t.get<std::string>()));
      res.set_header("X-Model-Id", "stub-embedder");
      res.set_content(json{{"embeddings", vecs}}.dump(), "application/json");
    });
    server_.Post("/predict_masked", [this](const httplib::Request& req, httplib::Response& res) {
      ++predict_calls;
      auto body = json::parse(req.body);
      auto probe = body["template"].get<std::string>();
      if (count_mask_slots(probe) != 1) {
        res.status = 400;
        res.set_content(R"({"error":"template needs exactly one [MASK]"})", "application/json");
        return;
      }
      std::vector<std::string> tokens;
      if (probes.size() > 0) {
        tokens = probes.predict(probe, body["top_k"].get<std::size_t>());
      } else {
        tokens = {"they", "it", "they", "elephants"};
      }
      res.set_header("X-Model-Id", "stub-mlm");
      res.set_content(json{{"tokens", tokens}}.dump(), "application/json");
    });
    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"models":{"embed":"stub-embedder","mlm":"stub-mlm"},"dim":3})",
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubService() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_); }

  // Unit vectors chosen so that cos("can jump", "can leap") = 0.8.
  static std::vector<double> vector_for(const std::string& text) {
    if (text == "can jump") return {1, 0, 0};
    if (text == "can leap") return {0.8, 0.6, 0};
    if (text == "has hoof") return {0, 0, 1};
    double h = static_cast<double>(fnv1a64(text) % 1000) / 1000.0;
    return {std::cos(h), 0, std::sin(h)};
  }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("client speaks the service protocol") {
  StubService stub;
  auto client = std::make_shared<ModelServiceClient>(stub.endpoint() + "/", 5.0);
  CHECK(client->endpoint() == stub.endpoint());
  CHECK(client->model_id().empty());

  auto vecs = client->embed({"can jump", "has hoof"});
  REQUIRE(vecs.size() == 2);
  CHECK(vecs[0] == std::vector<double>{1, 0, 0});
  CHECK(client->model_id() == "stub-embedder");

  std::vector<std::string> many;
  for (std::size_t i = 0; i < kMaxEmbedBatch + 5; ++i) many.push_back("t" + std::to_string(i));
  CHECK(client->embed(many).size() == many.size());
  CHECK(stub.last_batch == 5);

  CHECK(client->predict_masked("[MASK] x.", 2) == std::vector<std::string>{"they", "it"});
  CHECK(client->model_id() == "stub-mlm");
  CHECK_THROWS_AS(client->predict_masked("no mask", 5), ProviderError);
  CHECK(json::parse(client->health())["dim"] == 3);
}

TEST_CASE("remote providers") {
  StubService stub;
  auto client = std::make_shared<ModelServiceClient>(stub.endpoint(), 5.0);
  RemoteSimilarity sim(client);
  CHECK(sim.similarity("can jump", "Can Leap") == doctest::Approx(0.8));
  CHECK(sim.similarity("can leap", "can jump") == doctest::Approx(0.8));
  CHECK(sim.similarity("can jump", "has hoof") == doctest::Approx(0.0));
  CHECK(sim.similarity("x", "x") == 1.0);
  CHECK(stub.embed_calls == 2);  // vectors are memoized

  ProbeCache cache;
  cache.set_fallback(std::make_shared<RemoteMaskPredictor>(client), 50);
  CHECK(cache.predict("[MASK] x.", 10) == std::vector<std::string>{"they", "it", "elephants"});
  CHECK(probe_rank(cache, "[MASK] x.", "elephant", 10) == std::optional<std::size_t>(3));
  CHECK(stub.predict_calls == 1);
}

TEST_CASE("transport and payload failures become provider errors") {
  ModelServiceClient nowhere("http://127.0.0.1:1", 1.0);
  CHECK_THROWS_AS(nowhere.embed({"a"}), ProviderError);
  CHECK_THROWS_AS(nowhere.predict_masked("[MASK] x.", 3), ProviderError);
  CHECK_THROWS_AS(nowhere.health(), ProviderError);
  CHECK_THROWS_AS(ModelServiceClient(""), ProviderError);

  StubService stub;
  stub.broken = true;
  ModelServiceClient client(stub.endpoint(), 5.0);
  CHECK_THROWS_AS(client.embed({"a"}), ProviderError);
}

TEST_CASE("service-backed probing matches the shipped probe cache end to end") {
  StubService stub;
  stub.probes.read_file(testing::elephant("probe_cache.jsonl"));
  auto dir = testing::scratch_dir("remote_run");

  auto cached = testing::elephant_config((dir / "cached").string());
  run_pipeline(cached);

  auto remote = testing::elephant_config((dir / "remote").string());
  remote.provider_mode = ProviderMode::cache_and_remote;
  remote.remote_endpoint = stub.endpoint();
  remote.probe_cache_path = (dir / "fresh_probes.jsonl").string();
  auto summary = run_pipeline(remote);
  CHECK(summary.failed == 0);
  CHECK(stub.predict_calls > 0);

  CHECK(testing::slurp(dir / "cached/negations/elephant.jsonl") ==
        testing::slurp(dir / "remote/negations/elephant.jsonl"));

  // The answers were appended, so a cache-only rerun needs no service.
  ProbeCache appended;
  appended.read_file(remote.probe_cache_path);
  CHECK(appended.size() == static_cast<std::size_t>(stub.predict_calls.load()));
  auto offline = testing::elephant_config((dir / "offline").string());
  offline.probe_cache_path = remote.probe_cache_path;
  run_pipeline(offline);
  CHECK(testing::slurp(dir / "cached/negations/elephant.jsonl") ==
        testing::slurp(dir / "offline/negations/elephant.jsonl"));
}
