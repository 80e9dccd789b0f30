#pragma once

// Control plane: owns the running scenario, serves snapshot reads, accepts
// downlink commands and fans out a live event stream.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "senswich/energy.h"
#include "senswich/simulation.h"

namespace senswich {

// One subscriber's view of the live stream: (event name, JSON data) pairs in
// publish order.
class StreamSubscriber {
 public:
  struct Item {
    std::string event;  // "topic" | "phase" | "status"
    std::string data;
  };

  std::optional<Item> wait_pop(std::chrono::milliseconds timeout);
  void push(Item item);
  void close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Item> items_;
  bool closed_ = false;
};

class StreamHub {
 public:
  std::shared_ptr<StreamSubscriber> subscribe();
  void publish(const std::string& event, const std::string& data);
  void close_all();

 private:
  std::mutex mu_;
  std::vector<std::weak_ptr<StreamSubscriber>> subs_;
};

struct RunStatus {
  enum class State { Idle, Running, Finished, Stopped, Failed };
  State state = State::Idle;
  double sim_time_s = 0.0;
  double duration_s = 0.0;
  std::optional<double> speedup;
  std::size_t uplinks = 0;
  std::size_t stored_points = 0;
  std::string error;
};

std::string_view run_state_name(RunStatus::State s);
nlohmann::json to_json(const RunStatus& s);

class ControlService {
 public:
  // With a data directory, the store is persisted to <dir>/store.csv while
  // running and the run outputs are written there at completion.
  explicit ControlService(std::string data_dir = "");
  ~ControlService();

  ControlService(const ControlService&) = delete;
  ControlService& operator=(const ControlService&) = delete;

  // Throws ConfigError. Stops any previous run first.
  RunStatus start(ScenarioConfig config);
  void stop();
  // Blocks until the current run is no longer Running.
  RunStatus wait();
  RunStatus status() const;

  std::vector<NodeSummary> nodes() const;
  std::vector<TimeValue> telemetry(const std::string& device_id, const std::string& series,
                                   std::optional<SimTime> from, std::optional<SimTime> to,
                                   Aggregation agg, SimDuration bucket) const;
  // Throws UnknownDevice, Base64Error, InvalidFPort, std::logic_error (no run).
  DownlinkCommand enqueue_downlink(const std::string& device_id, int fport,
                                   const std::string& payload_b64);
  std::vector<DownlinkCommand> downlink_queue() const;
  std::vector<TopicMessage> errors(std::optional<SimTime> from, std::optional<SimTime> to) const;

  static EnergyReport energy_report(const std::string& profile, const std::string& basis);

  std::shared_ptr<StreamSubscriber> open_stream() { return hub_.subscribe(); }

  // Read access for tests and the CLI; hold no reference past stop().
  template <typename F>
  auto with_simulation(F&& f) const {
    std::shared_lock lock(sim_mu_);
    if (!sim_) throw std::logic_error("no scenario has been started");
    return f(static_cast<const Simulation&>(*sim_));
  }

 private:
  void run_loop(std::optional<double> speedup);
  SimTime paced_now() const;
  void forward_topics();

  std::string data_dir_;
  mutable std::shared_mutex sim_mu_;
  std::unique_ptr<Simulation> sim_;
  std::shared_ptr<Subscription> topic_feed_;
  StreamHub hub_;

  mutable std::mutex status_mu_;
  std::condition_variable status_cv_;
  RunStatus status_;

  std::thread runner_;
  std::atomic<bool> stop_requested_{false};
  std::chrono::steady_clock::time_point wall_start_{};
  SimTime sim_start_{0};
};

}  // namespace senswich
