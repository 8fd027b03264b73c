#include "pccseg/server.hpp"

#include <random>

#include "httplib.h"
#include "pccseg/dataio.hpp"
#include "pccseg/error.hpp"
#include "pccseg/features.hpp"

namespace pccseg::server {

void ServerConfig::merge_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("server configuration must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "host") host = value.get<std::string>();
      else if (key == "port") port = value.get<int>();
      else if (key == "max_pixels") max_pixels = value.get<std::size_t>();
      else if (key == "session_ttl_seconds") session_ttl = std::chrono::seconds(value.get<std::int64_t>());
      else if (key == "static_dir") static_dir = value.get<std::string>();
      else throw ConfigError("unknown server option: " + key);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("server option " + key + ": " + e.what());
    }
  }
  if (port < 0 || port > 65535) throw ConfigError("server port out of range");
}

std::string_view job_state_name(JobState s) {
  switch (s) {
    case JobState::kIdle: return "idle";
    case JobState::kRunning: return "running";
    case JobState::kDone: return "done";
    case JobState::kFailed: return "failed";
  }
  return "unknown";
}

SegmentRequest SegmentRequest::from_json(const nlohmann::json& j) {
  if (j.is_null()) return {};
  if (!j.is_object()) throw ApiError(400, "segment options must be a JSON object");
  SegmentRequest r;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "k") r.k = value.get<std::size_t>();
      else if (key == "optimize_k") r.optimize_k = value.get<std::size_t>();
      else if (key == "seed") r.seed = value.get<std::uint64_t>();
      else if (key == "lambda") r.lambda = WeightVector(value.get<std::vector<double>>());
      else if (key == "pcc") r.pcc.merge_json(value);
      else if (key == "ga") r.ga.merge_json(value);
      else if (key == "lambda_mode") {
        const auto mode = value.get<std::string>();
        if (mode == "unit") r.lambda_mode = LambdaMode::kUnit;
        else if (mode == "optimize") r.lambda_mode = LambdaMode::kOptimize;
        else if (mode == "explicit") r.lambda_mode = LambdaMode::kExplicit;
        else throw ApiError(400, "unknown lambda_mode: " + mode);
      } else {
        throw ApiError(400, "unknown segment option: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ApiError(400, std::string("bad segment options: ") + e.what());
  } catch (const Error& e) {
    throw ApiError(400, e.what());
  }
  if (r.lambda_mode == LambdaMode::kExplicit && !j.contains("lambda")) {
    throw ApiError(400, "explicit lambda_mode needs a lambda array");
  }
  return r;
}

nlohmann::ordered_json ScribbleOutcome::to_json() const {
  nlohmann::ordered_json j;
  j["accepted"] = accepted;
  j["rejected"] = nlohmann::ordered_json::array();
  for (const auto& [index, reason] : rejected) j["rejected"].push_back({{"index", index}, {"reason", reason}});
  return j;
}

Session::Session(std::string id, RgbImage image, Clock::time_point now)
    : id_(std::move(id)), image_(std::move(image)), scribbles_(image_.size(), kNoClass), last_access_(now) {}

Session::~Session() {
  job_.request_stop();
}

ScribbleOutcome Session::add_scribbles(const nlohmann::json& batch) {
  if (!batch.is_array()) throw ApiError(400, "scribbles must be a JSON array of {x, y, class}");
  std::lock_guard lock(mu_);
  if (state_ == JobState::kRunning) throw ApiError(409, "a segmentation job is running");
  ScribbleOutcome out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& s = batch[i];
    if (!s.is_object() || !s.contains("x") || !s.contains("y") || !s.contains("class") ||
        !s["x"].is_number_integer() || !s["y"].is_number_integer() || !s["class"].is_string()) {
      out.rejected.emplace_back(i, "malformed scribble");
      continue;
    }
    const auto x = s["x"].get<std::int64_t>();
    const auto y = s["y"].get<std::int64_t>();
    const auto cls = s["class"].get<std::string>();
    if (x < 0 || y < 0 || x >= image_.width || y >= image_.height) {
      out.rejected.emplace_back(i, "out of bounds");
      continue;
    }
    std::int8_t c;
    if (cls == "background") c = kBackground;
    else if (cls == "foreground") c = kForeground;
    else {
      out.rejected.emplace_back(i, "unknown class " + cls);
      continue;
    }
    scribbles_[static_cast<std::size_t>(y) * image_.width + static_cast<std::size_t>(x)] = c;
    ++out.accepted;
  }
  return out;
}

LabelMap Session::label_map() const {
  std::lock_guard lock(mu_);
  LabelMap lm(image_.width, image_.height, PixelLabel::kUnlabeled);
  for (std::size_t p = 0; p < scribbles_.size(); ++p) {
    if (scribbles_[p] == kBackground) lm.codes[p] = PixelLabel::kLabeledBackground;
    else if (scribbles_[p] == kForeground) lm.codes[p] = PixelLabel::kLabeledForeground;
  }
  return lm;
}

void Session::start(const SegmentRequest& request) {
  LabelMap labels = label_map();
  std::lock_guard lock(mu_);
  if (state_ == JobState::kRunning) throw ApiError(409, "a segmentation job is running");
  if (labels.count(PixelLabel::kLabeledBackground) == 0 || labels.count(PixelLabel::kLabeledForeground) == 0) {
    throw ApiError(422, "both background and foreground need at least one scribble");
  }
  const std::size_t n = image_.size();
  if (request.k < 1 || request.k >= n) throw ApiError(400, "k must lie in [1, pixel count)");
  if (request.lambda_mode == LambdaMode::kOptimize && (request.optimize_k < 1 || request.optimize_k >= n)) {
    throw ApiError(400, "optimize_k must lie in [1, pixel count)");
  }
  try {
    request.pcc.validate(2);
    request.ga.validate();
  } catch (const Error& e) {
    throw ApiError(400, e.what());
  }
  state_ = JobState::kRunning;
  phase_.clear();
  error_.clear();
  progress_ = {};
  generation_ = 0;
  result_.reset();
  optimization_.reset();
  job_ = std::jthread([this, request, labels = std::move(labels)](std::stop_token stop) mutable {
    run_job(stop, std::move(request), std::move(labels));
  });
}

void Session::run_job(std::stop_token stop, SegmentRequest request, LabelMap labels) {
  try {
    const FeatureMatrix fm = normalize(extract_features(image_));
    WeightVector lambda = request.lambda_mode == LambdaMode::kExplicit ? request.lambda : WeightVector::unit();
    std::optional<nlohmann::ordered_json> optimization;
    if (request.lambda_mode == LambdaMode::kOptimize) {
      {
        std::lock_guard lock(mu_);
        phase_ = "optimize";
      }
      GaConfig ga = request.ga;
      ga.rng_seed = request.seed;
      const OptimizationResult best = optimize(fm, labels, request.optimize_k, ga, [&](const GenerationRecord& g) {
        std::lock_guard lock(mu_);
        generation_ = g.generation + 1;
        return !stop.stop_requested();
      });
      if (best.trace.stop_reason == StopReason::kCancelled) throw Error("cancelled");
      lambda = best.lambda;
      optimization = best.to_json(ga);
    }
    {
      std::lock_guard lock(mu_);
      phase_ = "segment";
    }
    SegmentOptions opts;
    opts.k = request.k;
    opts.lambda = lambda;
    opts.pcc = request.pcc;
    opts.pcc.rng_seed = request.seed;
    opts.progress = [&](const Progress& p) {
      std::lock_guard lock(mu_);
      progress_ = p;
      return !stop.stop_requested();
    };
    SegmentationResult r = segment_features(fm, labels, opts);
    std::lock_guard lock(mu_);
    if (r.cancelled) {
      state_ = JobState::kFailed;
      error_ = "cancelled";
      return;
    }
    result_ = std::move(r);
    optimization_ = std::move(optimization);
    state_ = JobState::kDone;
  } catch (const std::exception& e) {
    std::lock_guard lock(mu_);
    state_ = JobState::kFailed;
    error_ = e.what();
  }
}

nlohmann::ordered_json Session::status() const {
  std::lock_guard lock(mu_);
  nlohmann::ordered_json j;
  j["state"] = std::string(job_state_name(state_));
  if (!phase_.empty()) j["phase"] = phase_;
  j["progress"] = {{"round", progress_.round},
                   {"mean_max_domination", progress_.mean_max_domination},
                   {"fraction_finalized", progress_.fraction_finalized},
                   {"generation", generation_}};
  if (state_ == JobState::kFailed) j["error"] = error_;
  j["mask_available"] = state_ == JobState::kDone;
  if (state_ == JobState::kDone) j["alpha"] = result_->stats_json()["alpha"];
  return j;
}

std::vector<std::uint8_t> Session::mask_png() const {
  std::lock_guard lock(mu_);
  if (state_ != JobState::kDone) throw ApiError(409, "no finished segmentation");
  return encode_png(result_->mask());
}

nlohmann::ordered_json Session::stats() const {
  std::lock_guard lock(mu_);
  if (state_ != JobState::kDone) throw ApiError(409, "no finished segmentation");
  nlohmann::ordered_json j = result_->stats_json();
  if (optimization_) j["optimization"] = *optimization_;
  return j;
}

bool Session::running() const {
  std::lock_guard lock(mu_);
  return state_ == JobState::kRunning;
}

void Session::cancel() { job_.request_stop(); }

void Session::wait() {
  std::jthread job;
  {
    std::lock_guard lock(mu_);
    job = std::move(job_);
  }
  if (job.joinable()) job.join();
}

Session::Clock::time_point Session::last_access() const {
  std::lock_guard lock(mu_);
  return last_access_;
}

void Session::touch(Clock::time_point now) {
  std::lock_guard lock(mu_);
  last_access_ = now;
}

namespace {

std::string new_session_id() {
  static std::mutex mu;
  static std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mu);
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

}  // namespace

SessionStore::SessionStore(ServerConfig config) : config_(std::move(config)) {}

std::string SessionStore::create(std::span<const std::uint8_t> upload) {
  if (upload.empty()) throw ApiError(400, "empty upload");
  RgbImage img;
  try {
    img = decode_image(upload);
  } catch (const Error& e) {
    throw ApiError(400, e.what());
  }
  if (img.size() > config_.max_pixels) {
    throw ApiError(413, "image has " + std::to_string(img.size()) + " pixels, limit is " +
                            std::to_string(config_.max_pixels));
  }
  if (img.size() < 2) throw ApiError(400, "image needs at least two pixels");
  auto session = std::make_shared<Session>(new_session_id(), std::move(img), Session::Clock::now());
  std::lock_guard lock(mu_);
  sessions_.emplace(session->id(), session);
  return session->id();
}

std::shared_ptr<Session> SessionStore::get(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown session " + id);
    s = it->second;
  }
  s->touch(Session::Clock::now());
  return s;
}

void SessionStore::remove(const std::string& id) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown session " + id);
    s = std::move(it->second);
    sessions_.erase(it);
  }
  s->cancel();
  s->wait();
}

std::size_t SessionStore::evict_expired(Session::Clock::time_point now) {
  std::vector<std::shared_ptr<Session>> dropped;
  {
    std::lock_guard lock(mu_);
    for (auto it = sessions_.begin(); it != sessions_.end();) {
      if (!it->second->running() && it->second->last_access() + config_.session_ttl < now) {
        dropped.push_back(std::move(it->second));
        it = sessions_.erase(it);
      } else {
        ++it;
      }
    }
  }
  return dropped.size();
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

SegServer::SegServer(ServerConfig config) : store_(std::move(config)), http_(std::make_unique<httplib::Server>()) {
  // No SO_REUSEPORT: a second server on a busy port must fail to bind.
  http_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  routes();
}

SegServer::~SegServer() { stop(); }

int SegServer::bind() {
  const auto& cfg = store_.config();
  if (cfg.port == 0) return http_->bind_to_any_port(cfg.host);
  return http_->bind_to_port(cfg.host, cfg.port) ? cfg.port : -1;
}

void SegServer::listen() { http_->listen_after_bind(); }

void SegServer::stop() {
  if (http_) http_->stop();
}

namespace {

void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

/// Runs a handler, mapping failures onto status codes with a JSON {"error": ...} body.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ApiError& e) {
      send_json(res, e.status(), {{"error", e.what()}});
    } catch (const nlohmann::json::exception& e) {
      send_json(res, 400, {{"error", std::string("bad JSON: ") + e.what()}});
    } catch (const InvalidInput& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const InvalidParameter& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const FormatError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const ConfigError& e) {
      send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
      send_json(res, 500, {{"error", e.what()}});
    }
  };
}

nlohmann::json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return nullptr;
  return nlohmann::json::parse(req.body);
}

}  // namespace

void SegServer::routes() {
  auto& h = *http_;
  const std::string session = R"(/api/sessions/([0-9a-f]+))";

  h.set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
    store_.evict_expired(Session::Clock::now());
    return httplib::Server::HandlerResponse::Unhandled;
  });

  h.Get("/api/health", guarded([](const httplib::Request&, httplib::Response& res) {
          send_json(res, 200, {{"status", "ok"}});
        }));

  h.Post("/api/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto* bytes = reinterpret_cast<const std::uint8_t*>(req.body.data());
           const auto id = store_.create({bytes, req.body.size()});
           const auto s = store_.get(id);
           send_json(res, 201, {{"id", id}, {"width", s->width()}, {"height", s->height()}});
         }));

  h.Post(session + "/scribbles", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto s = store_.get(req.matches[1]);
           send_json(res, 200, s->add_scribbles(nlohmann::json::parse(req.body)).to_json());
         }));

  h.Post(session + "/segment", guarded([this](const httplib::Request& req, httplib::Response& res) {
           const auto s = store_.get(req.matches[1]);
           s->start(SegmentRequest::from_json(parse_body(req)));
           send_json(res, 202, s->status());
         }));

  h.Get(session + "/status", guarded([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, store_.get(req.matches[1])->status());
        }));

  h.Get(session + "/stats", guarded([this](const httplib::Request& req, httplib::Response& res) {
          send_json(res, 200, store_.get(req.matches[1])->stats());
        }));

  h.Get(session + "/mask", guarded([this](const httplib::Request& req, httplib::Response& res) {
          const auto s = store_.get(req.matches[1]);
          const auto png = s->mask_png();
          res.set_header("X-Segmentation-Stats", s->stats().dump());
          res.set_content(std::string(png.begin(), png.end()), "image/png");
        }));

  h.Delete(session, guarded([this](const httplib::Request& req, httplib::Response& res) {
             store_.remove(req.matches[1]);
             res.status = 204;
           }));

  if (!store_.config().static_dir.empty()) h.set_mount_point("/", store_.config().static_dir.string());
}

}  // namespace pccseg::server
