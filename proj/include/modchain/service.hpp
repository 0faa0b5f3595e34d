#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace modchain {

struct ServiceConfig {
  std::string bind_address = "127.0.0.1";
  int port = 8023;    // 0 picks an ephemeral port
  int max_batch = 1024;
  int threads = 0;    // 0 keeps the server default pool
};

// Long-running scoring endpoint:
//   GET  /health        -> 200 when ready, 503 while loading
//   POST /score         -> single ScoreRequest
//   POST /score_batch   -> {"requests": [...]}, order-preserving
// Request/response schema is documented in doc/service_api.md. Requests are
// stateless; the problem index is read-only after load, so any client
// concurrency is safe.
class RewardService {
 public:
  explicit RewardService(ServiceConfig config);
  ~RewardService();
  RewardService(const RewardService&) = delete;
  RewardService& operator=(const RewardService&) = delete;

  // Loads and indexes a dataset (manifest picked up from the sibling path when
  // present; without it, step diagnostics are unavailable and scoring is
  // final-answer only).
  void load(const std::filesystem::path& dataset_path);

  bool ready() const;
  std::size_t problem_count() const;

  // Binds and serves on a background thread; returns the bound port.
  int start();
  void stop();
  // Blocks until stop() (for CLI use).
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace modchain
