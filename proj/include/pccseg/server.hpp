#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "pccseg/image.hpp"
#include "pccseg/labels.hpp"
#include "pccseg/optimizer.hpp"
#include "pccseg/segment.hpp"

namespace httplib {
class Server;
}

namespace pccseg::server {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::size_t max_pixels = 4'000'000;
  std::chrono::seconds session_ttl{3600};
  std::filesystem::path static_dir;  // companion UI bundle, served at "/" when set

  /// Keys: host, port, max_pixels, session_ttl_seconds, static_dir. Throws ConfigError.
  void merge_json(const nlohmann::json& j);
};

/// Carries the HTTP status a failed request maps to.
class ApiError : public std::runtime_error {
 public:
  ApiError(int status, const std::string& what) : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

enum class JobState { kIdle, kRunning, kDone, kFailed };
std::string_view job_state_name(JobState s);

enum class LambdaMode { kUnit, kOptimize, kExplicit };

struct SegmentRequest {
  std::size_t k = kDefaultK;
  std::size_t optimize_k = kDefaultK;  // graph size used by the weight search
  LambdaMode lambda_mode = LambdaMode::kUnit;
  WeightVector lambda;  // explicit mode
  std::uint64_t seed = 0;
  PccParams pcc;
  GaConfig ga;

  /// {k, optimize_k, lambda_mode: "unit"|"optimize"|"explicit", lambda: [23], seed, pcc: {...}, ga: {...}}. Throws ApiError(400).
  static SegmentRequest from_json(const nlohmann::json& j);
};

struct ScribbleOutcome {
  std::size_t accepted = 0;
  std::vector<std::pair<std::size_t, std::string>> rejected;  // batch index, reason
  nlohmann::ordered_json to_json() const;
};

/// One image, its scribbles and at most one background job.
class Session {
 public:
  using Clock = std::chrono::steady_clock;

  Session(std::string id, RgbImage image, Clock::time_point now);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  int width() const { return image_.width; }
  int height() const { return image_.height; }

  /// Batch of {x, y, class}; out-of-range or malformed entries are rejected one by one. 409 while running.
  ScribbleOutcome add_scribbles(const nlohmann::json& batch);
  /// Scribbles as a trimap: unscribbled pixels UNLABELED, never IGNORED.
  LabelMap label_map() const;

  /// 422 without both classes, 409 while running, 400 for bad options.
  void start(const SegmentRequest& request);
  nlohmann::ordered_json status() const;
  /// 409 unless the last job finished.
  std::vector<std::uint8_t> mask_png() const;
  nlohmann::ordered_json stats() const;

  bool running() const;
  void cancel();
  /// Blocks until the current job (if any) has ended.
  void wait();

  Clock::time_point last_access() const;
  void touch(Clock::time_point now);

 private:
  void run_job(std::stop_token stop, SegmentRequest request, LabelMap labels);

  const std::string id_;
  const RgbImage image_;
  mutable std::mutex mu_;
  std::vector<std::int8_t> scribbles_;  // per pixel, kNoClass when unscribbled
  JobState state_ = JobState::kIdle;
  std::string phase_;
  std::string error_;
  Progress progress_;
  std::size_t generation_ = 0;
  std::optional<SegmentationResult> result_;
  std::optional<nlohmann::ordered_json> optimization_;
  Clock::time_point last_access_;
  std::jthread job_;
};

/// Sessions by id with TTL eviction of idle sessions.
class SessionStore {
 public:
  explicit SessionStore(ServerConfig config);

  /// Decodes an uploaded raster; 400 when empty or undecodable, 413 when over max_pixels.
  std::string create(std::span<const std::uint8_t> upload);
  /// 404 for unknown ids.
  std::shared_ptr<Session> get(const std::string& id);
  /// Cancels the job and drops the session; 404 for unknown ids.
  void remove(const std::string& id);
  /// Drops idle sessions last used before now - ttl. Returns the number removed.
  std::size_t evict_expired(Session::Clock::time_point now);
  std::size_t size() const;

  const ServerConfig& config() const { return config_; }

 private:
  ServerConfig config_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// JSON-over-HTTP front end for a SessionStore.
class SegServer {
 public:
  explicit SegServer(ServerConfig config);
  ~SegServer();

  /// Binds host:port (port 0 picks a free one). Returns the bound port, or -1 on failure.
  int bind();
  /// Serves until stop(); requires a successful bind().
  void listen();
  void stop();

  SessionStore& sessions() { return store_; }

 private:
  void routes();

  SessionStore store_;
  std::unique_ptr<httplib::Server> http_;
};

}  // namespace pccseg::server
