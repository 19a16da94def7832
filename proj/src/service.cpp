#include "specnet/service.hpp"

#include <algorithm>
#include <atomic>

#include "httplib.h"
#include "specnet/error.hpp"
#include "specnet/report.hpp"

namespace specnet::service {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kIdle: return "idle";
    case RunStatus::kRunning: return "running";
    case RunStatus::kPaused: return "paused";
  }
  return "idle";
}

Action parse_action(const std::string& s) {
  if (s == "start") return Action::kStart;
  if (s == "pause") return Action::kPause;
  if (s == "reset") return Action::kReset;
  if (s == "step") return Action::kStep;
  throw Error(Errc::kParseError, "unknown action '" + s + "'");
}

namespace {

json weights_json(const prefs::ObjectiveWeights& w) {
  return {{"t", w.throughput}, {"l", w.latency}, {"f", w.fairness}};
}

}  // namespace

json to_json(const SessionState& s) {
  json out = {{"status", to_string(s.status)},
              {"scenario", specnet::to_json(s.spec)},
              {"seed", s.seed},
              {"weights", weights_json(s.weights)},
              {"speed", s.speed},
              {"period", s.period},
              {"converged", s.converged}};
  out["config"] = s.config ? report::to_json(*s.config) : json(nullptr);
  out["snapshot"] = s.snapshot ? report::to_json(*s.snapshot) : json(nullptr);
  return out;
}

json stream_record(const PeriodRecord& rec, const ThompsonAgent& agent) {
  json out = report::to_json(rec);
  json means = json::array();
  json pulls = json::array();
  for (const auto& p : agent.posteriors()) {
    means.push_back(p.a / (p.a + p.b));
    pulls.push_back(p.pull_count);
  }
  out["posterior"] = {{"best", report::to_json(agent.best_mean_arm())},
                      {"means", std::move(means)},
                      {"pulls", std::move(pulls)}};
  return out;
}

// ---- record fan-out ----

struct Subscription::Hub {
  std::mutex mu;
  std::condition_variable cv;
  std::uint64_t generation = 0;
  std::uint64_t base = 0;  // absolute index of lines.front()
  std::deque<std::string> lines;
  bool closed = false;

  std::uint64_t end() const { return base + lines.size(); }
};

std::optional<std::string> Subscription::next(std::chrono::milliseconds timeout) {
  std::unique_lock lock(hub_->mu);
  auto gone = [&] { return hub_->closed || hub_->generation != generation_ || cursor_ < hub_->base; };
  hub_->cv.wait_for(lock, timeout, [&] { return gone() || cursor_ < hub_->end(); });
  if (gone()) throw Error(Errc::kSessionGone, "stream ended: session was reset or closed");
  if (cursor_ >= hub_->end()) return std::nullopt;
  return hub_->lines[cursor_++ - hub_->base];
}

// ---- session ----

Session::Session(ScenarioSpec spec, std::uint64_t seed) : hub_(std::make_shared<Subscription::Hub>()) {
  rebuild(std::move(spec), seed);
  thread_ = std::jthread([this] { loop(); });
}

Session::~Session() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cmd_cv_.notify_all();
  if (thread_.joinable()) thread_.join();
  {
    std::lock_guard lock(hub_->mu);
    hub_->closed = true;
  }
  hub_->cv.notify_all();
}

void Session::rebuild(ScenarioSpec spec, std::uint64_t seed) {
  spec.validate();
  auto weights = control_ ? control_->weights() : spec.weights;
  control_ = std::make_unique<ControlLoop>(std::move(spec), AgentChoice::mab(), seed);
  control_->set_weights(weights);
  seed_ = seed;
  status_ = RunStatus::kIdle;
  last_.reset();
  start_generation();
  publish_state();
}

void Session::start_generation() {
  {
    std::lock_guard lock(hub_->mu);
    ++hub_->generation;
    hub_->base = 0;
    hub_->lines.clear();
  }
  hub_->cv.notify_all();
}

void Session::publish_state() {
  SessionState s;
  s.status = status_;
  s.spec = control_->spec();
  s.seed = seed_;
  s.weights = control_->weights();
  s.speed = speed_;
  s.period = control_->period();
  if (last_) {
    s.config = last_->config;
    s.snapshot = last_->snapshot;
    s.converged = last_->converged;
  }
  {
    std::lock_guard lock(mu_);
    published_ = std::move(s);
  }
  state_cv_.notify_all();
}

SessionState Session::state() const {
  std::lock_guard lock(mu_);
  return published_;
}

bool Session::wait_for_period(std::int64_t period, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return state_cv_.wait_for(lock, timeout, [&] { return published_.period >= period; });
}

Session::Reply Session::post(std::function<Reply()> fn) {
  std::promise<Reply> promise;
  auto fut = promise.get_future();
  {
    std::lock_guard lock(mu_);
    if (stopping_) throw Error(Errc::kSessionGone, "session is shutting down");
    commands_.push_back({std::move(fn), &promise});
  }
  cmd_cv_.notify_all();
  return fut.get();
}

prefs::ObjectiveWeights Session::update_preference(const PreferenceUpdate& update) {
  // Resolve on the caller's thread; only valid weights reach the loop.
  const auto w = std::holds_alternative<prefs::TrianglePoint>(update)
                     ? prefs::weights_from_planar(std::get<prefs::TrianglePoint>(update))
                     : std::get<prefs::ObjectiveWeights>(update);
  prefs::validate(w);
  return std::get<prefs::ObjectiveWeights>(post([this, w]() -> Reply {
    control_->set_weights(w);
    publish_state();
    return control_->weights();
  }));
}

SessionState Session::control(Action action, std::optional<double> speed) {
  if (speed && !(*speed > 0.0)) throw Error(Errc::kInvalidArgument, "speed must be positive");
  return std::get<SessionState>(post([this, action, speed]() -> Reply {
    auto bad = [&](const char* what) {
      throw Error(Errc::kInvalidTransition,
                  std::string(what) + " is not allowed while " + to_string(status_));
    };
    if (speed) speed_ = *speed;
    switch (action) {
      case Action::kStart:
        if (status_ == RunStatus::kRunning) bad("start");
        status_ = RunStatus::kRunning;
        next_tick_ = Clock::now();
        break;
      case Action::kPause:
        if (status_ != RunStatus::kRunning) bad("pause");
        status_ = RunStatus::kPaused;
        break;
      case Action::kReset:
        control_->reset();
        status_ = RunStatus::kIdle;
        last_.reset();
        start_generation();
        break;
      case Action::kStep:
        if (status_ == RunStatus::kRunning) bad("step");
        status_ = RunStatus::kPaused;
        step_once();
        break;
    }
    publish_state();
    return state();
  }));
}

SessionState Session::load_scenario(ScenarioSpec spec, std::uint64_t seed) {
  spec.validate();
  return std::get<SessionState>(post([this, spec = std::move(spec), seed]() mutable -> Reply {
    rebuild(std::move(spec), seed);
    return state();
  }));
}

Subscription Session::subscribe() {
  std::lock_guard lock(hub_->mu);
  return Subscription(hub_, hub_->generation, hub_->end());
}

void Session::step_once() {
  auto rec = control_->step();
  auto line = stream_record(rec, control_->agent()).dump();
  last_ = std::move(rec);
  {
    std::lock_guard lock(hub_->mu);
    hub_->lines.push_back(std::move(line));
    while (hub_->lines.size() > kBacklogLimit) {
      hub_->lines.pop_front();
      ++hub_->base;
    }
  }
  hub_->cv.notify_all();
}

void Session::loop() {
  std::unique_lock lock(mu_);
  while (true) {
    auto ready = [&] { return stopping_ || !commands_.empty(); };
    if (status_ == RunStatus::kRunning) {
      cmd_cv_.wait_until(lock, next_tick_, ready);
    } else {
      cmd_cv_.wait(lock, ready);
    }
    if (stopping_) break;

    while (!commands_.empty()) {
      auto cmd = std::move(commands_.front());
      commands_.pop_front();
      lock.unlock();
      try {
        cmd.reply->set_value(cmd.run());
      } catch (...) {
        cmd.reply->set_exception(std::current_exception());
      }
      lock.lock();
    }

    if (status_ == RunStatus::kRunning && Clock::now() >= next_tick_) {
      lock.unlock();
      step_once();
      publish_state();
      const auto period = std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(control_->spec().control_period_s / speed_));
      // Falling behind does not trigger a burst of catch-up periods.
      next_tick_ = std::max(next_tick_ + period, Clock::now());
      lock.lock();
    }
  }
  // Unblock anyone still waiting on a reply.
  for (auto& cmd : commands_) {
    cmd.reply->set_exception(
        std::make_exception_ptr(Error(Errc::kSessionGone, "session is shutting down")));
  }
  commands_.clear();
}

// ---- HTTP ----

namespace {

int http_status(Errc code) {
  switch (code) {
    case Errc::kInvalidTransition: return 409;
    case Errc::kOutsideTriangle:
    case Errc::kInvalidWeights: return 422;
    case Errc::kSessionGone: return 410;
    default: return 400;
  }
}

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, Errc code, const std::string& message) {
  send_json(res, {{"error", to_string(code)}, {"message", message}}, http_status(code));
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::kParseError, e.what());
  }
}

// Runs a handler, mapping failures to JSON error responses.
template <typename F>
void guarded(httplib::Response& res, F&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    send_error(res, e.code(), e.what());
  } catch (const json::exception& e) {
    send_error(res, Errc::kParseError, e.what());
  }
}

}  // namespace

struct Server::Impl {
  Session& session;
  httplib::Server http;
  std::thread background;
  std::shared_ptr<std::atomic<bool>> stopping = std::make_shared<std::atomic<bool>>(false);

  explicit Impl(Session& s) : session(s) { routes(); }

  void routes() {
    http.Get("/api/state", [this](const httplib::Request&, httplib::Response& res) {
      guarded(res, [&] { send_json(res, to_json(session.state())); });
    });

    http.Put("/api/preference", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req);
        PreferenceUpdate update;
        if (body.contains("point") && !body.contains("weights")) {
          const auto& p = body.at("point");
          update = prefs::TrianglePoint{p.at("u").get<double>(), p.at("v").get<double>()};
        } else if (body.contains("weights") && !body.contains("point")) {
          const auto& w = body.at("weights");
          update = prefs::ObjectiveWeights{w.at("t").get<double>(), w.at("l").get<double>(),
                                           w.at("f").get<double>()};
        } else {
          throw Error(Errc::kParseError, "expected exactly one of 'point' or 'weights'");
        }
        send_json(res, {{"weights", weights_json(session.update_preference(update))}});
      });
    });

    http.Post("/api/scenario", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req);
        auto spec = scenario_preset(body.value("name", session.state().spec.name));
        if (body.contains("stations")) spec.n_stations = body.at("stations").get<int>();
        if (body.contains("overrides")) spec = apply_overrides(spec, body.at("overrides"));
        const auto seed = body.value("seed", std::uint64_t{1});
        send_json(res, to_json(session.load_scenario(std::move(spec), seed)));
      });
    });

    http.Post("/api/control", [this](const httplib::Request& req, httplib::Response& res) {
      guarded(res, [&] {
        const auto body = parse_body(req);
        const auto action = parse_action(body.at("action").get<std::string>());
        std::optional<double> speed;
        if (body.contains("speed")) speed = body.at("speed").get<double>();
        send_json(res, to_json(session.control(action, speed)));
      });
    });

    http.Get("/api/stream", [this](const httplib::Request&, httplib::Response& res) {
      auto sub = std::make_shared<Subscription>(session.subscribe());
      res.set_chunked_content_provider(
          "application/x-ndjson", [sub, stopping = stopping](std::size_t, httplib::DataSink& sink) {
            try {
              while (sink.is_writable() && !*stopping) {
                auto line = sub->next(std::chrono::milliseconds(200));
                if (!line) continue;
                line->push_back('\n');
                if (!sink.write(line->data(), line->size())) return false;
              }
              return false;
            } catch (const Error&) {
              sink.done();
              return true;
            }
          });
    });
  }
};

Server::Server(Session& session) : impl_(std::make_unique<Impl>(session)) {}

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int Server::start_background(const std::string& host) {
  const int port = impl_->http.bind_to_any_port(host);
  if (port < 0) throw Error(Errc::kInvalidArgument, "could not bind " + host);
  impl_->background = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return port;
}

void Server::stop() {
  *impl_->stopping = true;
  impl_->http.stop();
  if (impl_->background.joinable()) impl_->background.join();
}

}  // namespace specnet::service
