#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "placekit/energy.hpp"
#include "placekit/error.hpp"
#include "placekit/providers.hpp"
#include "support/helpers.hpp"

using namespace placekit;

namespace {

double l2_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::string summary_with_total(double total) {
  SceneSpec scene;
  scene.room.width = 4.0;
  scene.room.depth = 4.0;
  Layout layout;
  EnergyBreakdown energy;
  energy.total = total;
  return layout_summary(scene, layout, energy);
}

// Loopback fixture server; handlers registered by each test before start().
struct TestServer {
  httplib::Server svr;
  int port = 0;
  std::thread thread;

  void start() {
    port = svr.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { svr.listen_after_bind(); });
    svr.wait_until_ready();
  }

  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port) + path;
  }

  ~TestServer() {
    svr.stop();
    if (thread.joinable()) thread.join();
  }
};

}  // namespace

TEST_CASE("mock embedding is deterministic, case-insensitive, and unit-norm") {
  auto provider = make_mock_embedding_provider();
  const auto a = provider->embed("bed");
  const auto b = provider->embed("bed");
  const auto c = provider->embed("Bed");
  REQUIRE(a.size() == static_cast<std::size_t>(kEmbedDim));
  CHECK(a == b);
  CHECK(a == c);
  CHECK(std::abs(l2_norm(a) - 1.0) < 1e-9);

  const auto other = provider->embed("sofa");
  CHECK(a != other);
  CHECK(std::abs(l2_norm(other) - 1.0) < 1e-9);

  ProviderOptions seeded;
  seeded.seed = 7;
  const auto reseeded = make_mock_embedding_provider(seeded)->embed("bed");
  CHECK(a != reseeded);
}

TEST_CASE("mock scorer maps total energy linearly onto [0, 1]") {
  auto scorer = make_mock_semantic_scorer();
  CHECK(scorer->score(summary_with_total(0.0)).score == doctest::Approx(1.0));
  CHECK(scorer->score(summary_with_total(5.0)).score == doctest::Approx(0.5));
  CHECK(scorer->score(summary_with_total(10.0)).score == doctest::Approx(0.0));
  CHECK(scorer->score(summary_with_total(25.0)).score == doctest::Approx(0.0));

  const auto judged = scorer->score(summary_with_total(2.5));
  REQUIRE(judged.features.size() == static_cast<std::size_t>(kSemanticDim));
  for (double x : judged.features) REQUIRE(std::isfinite(x));
  CHECK(judged.explanation.find("2.5") != std::string::npos);

  const auto again = scorer->score(summary_with_total(2.5));
  CHECK(judged.features == again.features);
  CHECK(judged.score == again.score);

  CHECK_THROWS_AS(scorer->score("not a summary"), Error);
}

TEST_CASE("layout summary carries poses and the energy breakdown") {
  SceneSpec scene;
  scene.room.width = 5.0;
  scene.room.depth = 4.0;
  scene.objects.push_back(testsupport::make_object("bed", 2.0, 1.5));
  Layout layout;
  layout.placements.push_back({"bed", 2.5, 2.0, 0.0});
  layout.skipped.push_back("lamp");
  EnergyBreakdown energy;
  energy.relational = 0.25;
  energy.total = 1.75;

  const auto parsed = nlohmann::json::parse(layout_summary(scene, layout, energy));
  CHECK(parsed["room"]["width"].get<double>() == doctest::Approx(5.0));
  REQUIRE(parsed["objects"].size() == 1);
  CHECK(parsed["objects"][0]["id"] == "bed");
  CHECK(parsed["objects"][0]["width"].get<double>() == doctest::Approx(2.0));
  CHECK(parsed["objects"][0]["x"].get<double>() == doctest::Approx(2.5));
  CHECK(parsed["skipped"][0] == "lamp");
  CHECK(parsed["energy"]["relational"].get<double>() == doctest::Approx(0.25));
  CHECK(parsed["energy"]["total"].get<double>() == doctest::Approx(1.75));
}

TEST_CASE("room prompt renders both placeholder lists") {
  const std::string prompt = render_room_prompt({"bed", "pillow"}, {"bedroom", "kitchen"});
  CHECK(prompt.rfind("You are a room classifier.", 0) == 0);
  CHECK(prompt.find("Possible rooms: [bedroom, kitchen]") != std::string::npos);
  CHECK(prompt.find("Objects: [bed, pillow]") != std::string::npos);
  CHECK(prompt.find("{room_types}") == std::string::npos);
  CHECK(prompt.find("{objects}") == std::string::npos);
  CHECK(prompt.substr(prompt.size() - 7) == "Answer:");
}

TEST_CASE("mock room classification follows the keyword table") {
  auto llm = make_mock_llm_client();
  CHECK(classify_room_type({"bed", "pillow"}, {"bedroom", "kitchen"}, *llm) == "bedroom");
  CHECK(classify_room_type({"stove", "sink"}, {"bedroom", "kitchen"}, *llm) == "kitchen");
  CHECK(classify_room_type({"toilet", "towel"}, {"bathroom", "kitchen"}, *llm) ==
        "bathroom");
  CHECK(classify_room_type({"sofa", "TV"}, {"living room", "kitchen"}, *llm) ==
        "living room");

  SUBCASE("unknown objects fall back to the first offered room") {
    CHECK(classify_room_type({"xylophone"}, {"garage", "office"}, *llm) == "garage");
  }
  SUBCASE("a keyword whose room is not offered also falls back") {
    CHECK(classify_room_type({"bed"}, {"garage", "office"}, *llm) == "garage");
  }
  SUBCASE("empty inputs violate the contract") {
    CHECK_THROWS_AS(classify_room_type({}, {"garage"}, *llm), Error);
    CHECK_THROWS_AS(classify_room_type({"bed"}, {}, *llm), Error);
  }
}

TEST_CASE("remote providers parse loopback fixtures") {
  TestServer server;
  std::mutex seen_mu;
  std::string seen_embed_body;
  server.svr.Post("/embed", [&](const httplib::Request& req, httplib::Response& res) {
    {
      std::lock_guard lock(seen_mu);
      seen_embed_body = req.body;
    }
    nlohmann::json body{{"vector", std::vector<double>(kEmbedDim, 0.25)}};
    res.set_content(body.dump(), "application/json");
  });
  server.svr.Post("/score", [&](const httplib::Request&, httplib::Response& res) {
    nlohmann::json body{{"vector", std::vector<double>(kSemanticDim, 0.0)},
                        {"score", 0.75},
                        {"explanation", "fixture"}};
    res.set_content(body.dump(), "application/json");
  });
  server.svr.Post("/complete", [&](const httplib::Request&, httplib::Response& res) {
    nlohmann::json body{{"text", "  bedroom \n"}};
    res.set_content(body.dump(), "application/json");
  });
  server.start();

  auto embedder = make_remote_embedding_provider(server.url("/embed"));
  const auto v = embedder->embed("bed");
  REQUIRE(v.size() == static_cast<std::size_t>(kEmbedDim));
  CHECK(v[0] == doctest::Approx(1.0 / std::sqrt(512.0)));
  CHECK(std::abs(l2_norm(v) - 1.0) < 1e-9);
  {
    std::lock_guard lock(seen_mu);
    const auto request = nlohmann::json::parse(seen_embed_body);
    CHECK(request["kind"] == "embed");
    CHECK(request["payload"] == "bed");
  }

  auto scorer = make_remote_semantic_scorer(server.url("/score"));
  const auto judged = scorer->score(summary_with_total(1.0));
  CHECK(judged.score == doctest::Approx(0.75));
  CHECK(judged.explanation == "fixture");
  CHECK(judged.features.size() == static_cast<std::size_t>(kSemanticDim));

  auto llm = make_remote_llm_client(server.url("/complete"));
  CHECK(classify_room_type({"bed"}, {"bedroom"}, *llm) == "bedroom");
}

TEST_CASE("remote failures map onto distinct error kinds") {
  TestServer server;
  std::atomic<int> fail_hits{0};
  server.svr.Post("/fail", [&](const httplib::Request&, httplib::Response& res) {
    ++fail_hits;
    res.status = 500;
  });
  server.svr.Post("/bad", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"foo\": 1}", "application/json");
  });
  server.svr.Post("/short", [&](const httplib::Request&, httplib::Response& res) {
    nlohmann::json body{{"vector", std::vector<double>{1.0, 2.0, 3.0}}};
    res.set_content(body.dump(), "application/json");
  });
  server.svr.Post("/badscore", [&](const httplib::Request&, httplib::Response& res) {
    nlohmann::json body{{"vector", std::vector<double>(kSemanticDim, 0.0)},
                        {"score", 1.5}};
    res.set_content(body.dump(), "application/json");
  });
  server.svr.Post("/slow", [&](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(700));
    nlohmann::json body{{"text", "late"}};
    res.set_content(body.dump(), "application/json");
  });
  server.start();

  SUBCASE("HTTP 500 is retried once and then surfaces as a network error") {
    auto embedder = make_remote_embedding_provider(server.url("/fail"));
    try {
      embedder->embed("bed");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::network);
      CHECK(std::string(e.what()).find("500") != std::string::npos);
    }
    CHECK(fail_hits.load() == 2);
  }

  SUBCASE("a missing field is a schema error naming the field") {
    auto embedder = make_remote_embedding_provider(server.url("/bad"));
    try {
      embedder->embed("bed");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::schema);
      CHECK(std::string(e.what()).find("vector") != std::string::npos);
    }
  }

  SUBCASE("a wrong-size vector is a schema error") {
    auto embedder = make_remote_embedding_provider(server.url("/short"));
    try {
      embedder->embed("bed");
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::schema);
      CHECK(std::string(e.what()).find("512") != std::string::npos);
    }
  }

  SUBCASE("a score outside [0, 1] is a schema error") {
    auto scorer = make_remote_semantic_scorer(server.url("/badscore"));
    try {
      scorer->score(summary_with_total(1.0));
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::schema);
    }
  }

  SUBCASE("an unresponsive endpoint raises a timeout, echoing the prompt") {
    ProviderOptions opts;
    opts.timeout_seconds = 0.15;
    auto llm = make_remote_llm_client(server.url("/slow"), opts);
    try {
      classify_room_type({"bed"}, {"bedroom"}, *llm);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::timeout);
      CHECK(std::string(e.what()).find("You are a room classifier.") !=
            std::string::npos);
    }
  }

  SUBCASE("an unreachable host is a network error") {
    ProviderOptions opts;
    opts.timeout_seconds = 0.2;
    // Port 1 on loopback is almost certainly closed; connection is refused.
    auto embedder = make_remote_embedding_provider("http://127.0.0.1:1/embed", opts);
    try {
      embedder->embed("bed");
      FAIL("expected an error");
    } catch (const Error& e) {
      const bool network_or_timeout =
          e.kind() == ErrorKind::network || e.kind() == ErrorKind::timeout;
      CHECK(network_or_timeout);
    }
  }
}

TEST_CASE("environment variables select remote providers, otherwise mocks") {
  {
    unsetenv("LAYOUT_EMBED_URL");
    unsetenv("LAYOUT_SCORER_URL");
    unsetenv("LAYOUT_LLM_URL");
    auto set = providers_from_env();
    CHECK(set.embedder->embed("bed") == make_mock_embedding_provider()->embed("bed"));
    CHECK(classify_room_type({"stove"}, {"bedroom", "kitchen"}, *set.llm) == "kitchen");
  }
  {
    TestServer server;
    server.svr.Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
      nlohmann::json body{{"vector", std::vector<double>(kEmbedDim, 1.0)}};
      res.set_content(body.dump(), "application/json");
    });
    server.start();
    setenv("LAYOUT_EMBED_URL", server.url("/embed").c_str(), 1);
    auto set = providers_from_env();
    const auto v = set.embedder->embed("anything");
    CHECK(v[0] == doctest::Approx(1.0 / std::sqrt(512.0)));
    unsetenv("LAYOUT_EMBED_URL");
  }
}

TEST_CASE("malformed provider URLs are rejected up front") {
  CHECK_THROWS_AS(make_remote_embedding_provider("ftp://host/x")->embed("a"), Error);
  CHECK_THROWS_AS(make_remote_embedding_provider("http:///x")->embed("a"), Error);
  CHECK_THROWS_AS(make_remote_embedding_provider("http://host:port/x")->embed("a"), Error);
}
