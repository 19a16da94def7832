#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <future>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <variant>

#include "json.hpp"
#include "specnet/harness.hpp"
#include "specnet/prefs.hpp"

namespace specnet::service {

enum class RunStatus { kIdle, kRunning, kPaused };
enum class Action { kStart, kPause, kReset, kStep };

std::string to_string(RunStatus s);
Action parse_action(const std::string& s);

/// Copy of the session handed to request handlers.
struct SessionState {
  RunStatus status = RunStatus::kIdle;
  ScenarioSpec spec;
  std::uint64_t seed = 0;
  prefs::ObjectiveWeights weights;
  std::optional<NetworkConfig> config;
  std::optional<MetricsSnapshot> snapshot;
  double speed = 1.0;
  std::int64_t period = 0;  // completed control periods
  bool converged = false;
};

nlohmann::json to_json(const SessionState& s);

using PreferenceUpdate = std::variant<prefs::TrianglePoint, prefs::ObjectiveWeights>;

/// One line of the event stream: the period record plus a posterior summary.
nlohmann::json stream_record(const PeriodRecord& rec, const ThompsonAgent& agent);

class Session;

/// Cursor over the records a session publishes after the subscription was made.
class Subscription {
 public:
  /// Next NDJSON line (without newline), or nullopt on timeout.
  /// Throws SessionGone once the session was reset, replaced or shut down.
  std::optional<std::string> next(std::chrono::milliseconds timeout);

 private:
  friend class Session;
  struct Hub;
  Subscription(std::shared_ptr<Hub> hub, std::uint64_t generation, std::uint64_t cursor)
      : hub_(std::move(hub)), generation_(generation), cursor_(cursor) {}

  std::shared_ptr<Hub> hub_;
  std::uint64_t generation_;
  std::uint64_t cursor_;
};

/// A live simulation owned by a dedicated thread. Public calls post a command
/// to that thread and wait for its reply, so the simulator is never touched
/// from a handler thread. Weight changes land between control periods.
class Session {
 public:
  Session(ScenarioSpec spec, std::uint64_t seed);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  SessionState state() const;
  prefs::ObjectiveWeights update_preference(const PreferenceUpdate& update);
  SessionState control(Action action, std::optional<double> speed = std::nullopt);
  /// Replaces the scenario; the session returns to idle at period 0.
  SessionState load_scenario(ScenarioSpec spec, std::uint64_t seed);

  Subscription subscribe();

  /// Blocks until `period` control periods have completed or the timeout
  /// passes. Returns whether the period was reached.
  bool wait_for_period(std::int64_t period, std::chrono::milliseconds timeout) const;

  /// Records older than this many lines are discarded; a subscriber that
  /// falls further behind gets SessionGone instead of a gap.
  static constexpr std::size_t kBacklogLimit = 100000;

 private:
  using Reply = std::variant<SessionState, prefs::ObjectiveWeights>;
  struct Command {
    std::function<Reply()> run;
    std::promise<Reply>* reply;
  };

  Reply post(std::function<Reply()> fn);
  void loop();
  void step_once();
  void publish_state();
  void start_generation();
  void rebuild(ScenarioSpec spec, std::uint64_t seed);

  // Owned by the loop thread.
  std::unique_ptr<ControlLoop> control_;
  RunStatus status_ = RunStatus::kIdle;
  double speed_ = 1.0;
  std::uint64_t seed_ = 0;
  std::optional<PeriodRecord> last_;
  std::chrono::steady_clock::time_point next_tick_;

  mutable std::mutex mu_;
  mutable std::condition_variable state_cv_;
  std::condition_variable cmd_cv_;
  std::deque<Command> commands_;
  bool stopping_ = false;
  SessionState published_;
  std::shared_ptr<Subscription::Hub> hub_;
  std::jthread thread_;
};

/// HTTP front end for one session.
class Server {
 public:
  explicit Server(Session& session);
  ~Server();

  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace specnet::service
