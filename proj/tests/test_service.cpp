#include <doctest.h>

#include <filesystem>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "modchain/dataset.hpp"
#include "modchain/selfcheck.hpp"
#include "modchain/service.hpp"

using namespace modchain;
using nlohmann::json;

namespace {

struct LiveService {
  RewardService service;
  int port = 0;
  Dataset dataset;

  explicit LiveService(ServiceConfig config) : service(std::move(config)) {}
};

// One dataset + running server shared by the cases below.
LiveService& live() {
  static LiveService* instance = [] {
    const auto dir = std::filesystem::temp_directory_path() / "modchain_service_test";
    std::filesystem::create_directories(dir);

    DatasetSpec spec;
    spec.split_name = "svc";
    spec.op_values = {4, 8};
    spec.samples_per_op = 4;
    spec.base_seed = 2024;
    const auto records = build_records(spec);
    write_split(spec, records, dir / "svc.jsonl");

    ServiceConfig config;
    config.port = 0;
    config.max_batch = 64;
    auto* s = new LiveService(config);
    s->dataset = load_dataset(dir / "svc.jsonl");
    s->service.load(dir / "svc.jsonl");
    s->port = s->service.start();
    return s;
  }();
  return *instance;
}

json post(int port, const std::string& path, const json& body, int expect_status) {
  httplib::Client client("127.0.0.1", port);
  const auto res = client.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == expect_status);
  return json::parse(res->body);
}

}  // namespace

TEST_CASE("health is 503 before load and 200 after") {
  ServiceConfig config;
  config.port = 0;
  RewardService empty(config);
  const int port = empty.start();
  httplib::Client client("127.0.0.1", port);
  const auto res = client.Get("/health");
  REQUIRE(res);
  CHECK(res->status == 503);
  empty.stop();

  httplib::Client ready_client("127.0.0.1", live().port);
  const auto ok = ready_client.Get("/health");
  REQUIRE(ok);
  CHECK(ok->status == 200);
  CHECK(json::parse(ok->body).at("problems").get<std::size_t>() == 8);
}

TEST_CASE("scoring a golden trace returns reward 1 with diagnostics") {
  const SampleRecord& r = live().dataset.records.front();
  const json resp = post(live().port, "/score",
                         {{"problem_id", r.id},
                          {"completion", r.trace},
                          {"want_diagnostics", true}},
                         200);
  CHECK(resp.at("reward") == 1);
  CHECK(resp.at("extracted_answer") == r.answer);
  CHECK(resp.at("first_error").is_null());
  CHECK(resp.at("granularity_profile").is_object());
  CHECK(resp.at("granularity_profile").at("1") == r.op);

  const json wrong = post(live().port, "/score",
                          {{"problem_id", r.id}, {"completion", "Answer: 17."}}, 200);
  CHECK(wrong.at("reward") == (r.answer == 17 ? 1 : 0));
}

TEST_CASE("error statuses") {
  const json unknown =
      post(live().port, "/score", {{"problem_id", "nope"}, {"completion", "x"}}, 404);
  CHECK(unknown.at("error").at("code") == 404);

  post(live().port, "/score", {{"completion", "x"}}, 400);                      // no mode
  post(live().port, "/score", {{"problem_id", "a"}, {"answer_key", 3},
                               {"completion", "x"}}, 400);                      // both modes
  post(live().port, "/score", {{"problem_id", "a"}}, 400);                      // no completion
  post(live().port, "/score", {{"answer_key", 42}, {"completion", "x"}}, 400);  // bad key

  httplib::Client client("127.0.0.1", live().port);
  const auto res = client.Post("/score", "this is not json", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
}

TEST_CASE("inline scoring against an answer key") {
  const json hit = post(live().port, "/score",
                        {{"question", "irrelevant"},
                         {"answer_key", 7},
                         {"completion", "Answer: 7."}},
                        200);
  CHECK(hit.at("reward") == 1);
  const json miss = post(live().port, "/score",
                         {{"answer_key", 7}, {"completion", "Answer: 8."}}, 200);
  CHECK(miss.at("reward") == 0);
}

TEST_CASE("batch scoring preserves order and matches single calls") {
  json requests = json::array();
  std::vector<json> singles;
  for (const SampleRecord& r : live().dataset.records) {
    json req = {{"problem_id", r.id}, {"completion", r.trace}};
    requests.push_back(req);
    singles.push_back(post(live().port, "/score", req, 200));
  }
  const json batch = post(live().port, "/score_batch", {{"requests", requests}}, 200);
  const json& responses = batch.at("responses");
  REQUIRE(responses.size() == singles.size());
  for (std::size_t i = 0; i < singles.size(); ++i) {
    CHECK(responses[static_cast<int>(i)] == singles[i]);
    CHECK(responses[static_cast<int>(i)].at("reward") == 1);
  }
}

TEST_CASE("batch errors are per-element") {
  const SampleRecord& r = live().dataset.records.front();
  json requests = json::array();
  requests.push_back({{"problem_id", r.id}, {"completion", r.trace}});
  requests.push_back({{"problem_id", "missing-id"}, {"completion", "x"}});
  requests.push_back({{"answer_key", 3}, {"completion", "Answer: 3."}});
  const json batch = post(live().port, "/score_batch", {{"requests", requests}}, 200);
  const json& responses = batch.at("responses");
  REQUIRE(responses.size() == 3);
  CHECK(responses[0].at("reward") == 1);
  CHECK(responses[1].contains("error"));
  CHECK(responses[1].at("error").at("code") == 404);
  CHECK(responses[2].at("reward") == 1);
}

TEST_CASE("batch size limits") {
  post(live().port, "/score_batch", {{"requests", json::array()}}, 400);
  json oversize = json::array();
  for (int i = 0; i < 65; ++i) {
    oversize.push_back({{"answer_key", 0}, {"completion", "Answer: 0."}});
  }
  post(live().port, "/score_batch", {{"requests", oversize}}, 400);
}

TEST_CASE("identical requests give identical responses") {
  const SampleRecord& r = live().dataset.records.back();
  const json req = {{"problem_id", r.id}, {"completion", r.trace}, {"want_diagnostics", true}};
  const json a = post(live().port, "/score", req, 200);
  const json b = post(live().port, "/score", req, 200);
  CHECK(a == b);
}
