#include "modchain/service.hpp"

#include <atomic>
#include <optional>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "modchain/dataset.hpp"
#include "modchain/errors.hpp"
#include "modchain/verify.hpp"

namespace modchain {

using nlohmann::json;

namespace {

struct RequestError : std::runtime_error {
  int status;
  RequestError(int status_, const std::string& message)
      : std::runtime_error(message), status(status_) {}
};

json error_body(int status, const std::string& message) {
  return json{{"error", {{"code", status}, {"message", message}}}};
}

}  // namespace

struct RewardService::Impl {
  ServiceConfig config;
  httplib::Server server;
  std::thread server_thread;
  std::atomic<bool> ready{false};
  int bound_port = 0;

  struct Entry {
    int answer;
    std::uint64_t seed;
    int op;
  };
  std::unordered_map<std::string, Entry> index;
  std::optional<GenConfig> gen;  // present when instances can be regenerated

  explicit Impl(ServiceConfig cfg) : config(std::move(cfg)) {
    if (config.threads > 0) {
      const int threads = config.threads;
      server.new_task_queue = [threads] { return new httplib::ThreadPool(static_cast<size_t>(threads)); };
    }
    install_routes();
  }

  void install_routes() {
    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      if (!ready.load()) {
        res.status = 503;
        res.set_content(json{{"status", "loading"}}.dump(), "application/json");
        return;
      }
      res.set_content(json{{"status", "ok"}, {"problems", index.size()}}.dump(),
                      "application/json");
    });

    server.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      if (!require_ready(res)) return;
      json body;
      if (!parse_body(req, res, body)) return;
      try {
        res.set_content(score_one(body).dump(), "application/json");
      } catch (const RequestError& e) {
        res.status = e.status;
        res.set_content(error_body(e.status, e.what()).dump(), "application/json");
      }
    });

    server.Post("/score_batch", [this](const httplib::Request& req, httplib::Response& res) {
      if (!require_ready(res)) return;
      json body;
      if (!parse_body(req, res, body)) return;
      if (!body.contains("requests") || !body["requests"].is_array()) {
        res.status = 400;
        res.set_content(error_body(400, "expected {\"requests\": [...]}").dump(),
                        "application/json");
        return;
      }
      const json& requests = body["requests"];
      if (requests.empty() || static_cast<int>(requests.size()) > config.max_batch) {
        res.status = 400;
        res.set_content(error_body(400, "batch size must be in [1, " +
                                            std::to_string(config.max_batch) + "]")
                            .dump(),
                        "application/json");
        return;
      }
      json responses = json::array();
      for (const json& one : requests) {
        try {
          responses.push_back(score_one(one));
        } catch (const RequestError& e) {
          responses.push_back(error_body(e.status, e.what()));
        }
      }
      res.set_content(json{{"responses", responses}}.dump(), "application/json");
    });
  }

  bool require_ready(httplib::Response& res) {
    if (ready.load()) return true;
    res.status = 503;
    res.set_content(json{{"status", "loading"}}.dump(), "application/json");
    return false;
  }

  static bool parse_body(const httplib::Request& req, httplib::Response& res, json& out) {
    out = json::parse(req.body, nullptr, false);
    if (out.is_discarded() || !out.is_object()) {
      res.status = 400;
      res.set_content(error_body(400, "request body is not a json object").dump(),
                      "application/json");
      return false;
    }
    return true;
  }

  json score_one(const json& req) {
    if (!req.is_object()) throw RequestError(400, "request must be a json object");
    if (!req.contains("completion") || !req["completion"].is_string()) {
      throw RequestError(400, "missing string field 'completion'");
    }
    const std::string completion = req["completion"].get<std::string>();
    const bool want_diagnostics = req.value("want_diagnostics", false);
    const bool has_id = req.contains("problem_id");
    const bool has_inline = req.contains("answer_key");
    if (has_id == has_inline) {
      throw RequestError(400, "provide exactly one of 'problem_id' or 'answer_key'");
    }

    json resp;
    const auto extracted = extract_answer(completion);
    resp["extracted_answer"] = extracted ? json(*extracted) : json(nullptr);

    if (has_inline) {
      if (!req["answer_key"].is_number_integer()) {
        throw RequestError(400, "'answer_key' must be an integer");
      }
      const long long key = req["answer_key"].get<long long>();
      if (key < 0 || key >= kModulus) {
        throw RequestError(400, "'answer_key' must be a residue in [0, 22]");
      }
      resp["reward"] = extracted && *extracted == static_cast<int>(key) ? 1 : 0;
      return resp;
    }

    if (!req["problem_id"].is_string()) {
      throw RequestError(400, "'problem_id' must be a string");
    }
    const std::string id = req["problem_id"].get<std::string>();
    const auto it = index.find(id);
    if (it == index.end()) throw RequestError(404, "unknown problem_id '" + id + "'");
    const Entry& entry = it->second;
    resp["reward"] = extracted && *extracted == entry.answer ? 1 : 0;

    if (want_diagnostics && gen) {
      GenConfig config = *gen;
      config.op = entry.op;
      const ProblemInstance p = generate_problem(config, entry.seed);
      const TraceReport report = verify_trace(p, completion);
      resp["first_error"] = report.first_error ? json(*report.first_error) : json(nullptr);
      json profile = json::object();
      for (const auto& [gap, count] : report.granularity_profile) {
        profile[std::to_string(gap)] = count;
      }
      resp["granularity_profile"] = profile;
    }
    return resp;
  }
};

RewardService::RewardService(ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {}

RewardService::~RewardService() { stop(); }

void RewardService::load(const std::filesystem::path& dataset_path) {
  const Dataset ds = load_dataset(dataset_path);
  impl_->index.reserve(ds.records.size() * 2);
  for (const SampleRecord& r : ds.records) {
    if (!impl_->index.emplace(r.id, Impl::Entry{r.answer, r.seed, r.op}).second) {
      throw DuplicateId("duplicate dataset id '" + r.id + "'");
    }
  }
  if (ds.spec && !ds.spec->gen.global_unique_names) {
    impl_->gen = ds.spec->gen;
  }
  impl_->ready.store(true);
}

bool RewardService::ready() const { return impl_->ready.load(); }

std::size_t RewardService::problem_count() const { return impl_->index.size(); }

int RewardService::start() {
  if (impl_->config.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->config.bind_address);
    if (impl_->bound_port <= 0) throw std::runtime_error("bind failed");
  } else {
    if (!impl_->server.bind_to_port(impl_->config.bind_address, impl_->config.port)) {
      throw std::runtime_error("bind to port " + std::to_string(impl_->config.port) + " failed");
    }
    impl_->bound_port = impl_->config.port;
  }
  impl_->server_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->bound_port;
}

void RewardService::stop() {
  if (impl_ && impl_->server_thread.joinable()) {
    impl_->server.stop();
    impl_->server_thread.join();
  }
}

void RewardService::wait() {
  if (impl_->server_thread.joinable()) impl_->server_thread.join();
}

}  // namespace modchain
