#include "senswich/service.h"

#include <filesystem>

#include <fmt/format.h>

#include "senswich/json_io.h"

namespace senswich {

std::optional<StreamSubscriber::Item> StreamSubscriber::wait_pop(
    std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !items_.empty() || closed_; });
  if (items_.empty()) return std::nullopt;
  Item item = std::move(items_.front());
  items_.pop_front();
  return item;
}

void StreamSubscriber::push(Item item) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    items_.push_back(std::move(item));
  }
  cv_.notify_all();
}

void StreamSubscriber::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool StreamSubscriber::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::shared_ptr<StreamSubscriber> StreamHub::subscribe() {
  auto sub = std::make_shared<StreamSubscriber>();
  std::lock_guard lock(mu_);
  subs_.push_back(sub);
  return sub;
}

void StreamHub::publish(const std::string& event, const std::string& data) {
  std::lock_guard lock(mu_);
  std::erase_if(subs_, [](const std::weak_ptr<StreamSubscriber>& w) { return w.expired(); });
  for (const auto& w : subs_) {
    if (auto s = w.lock()) s->push({event, data});
  }
}

void StreamHub::close_all() {
  std::lock_guard lock(mu_);
  for (const auto& w : subs_) {
    if (auto s = w.lock()) s->close();
  }
  subs_.clear();
}

std::string_view run_state_name(RunStatus::State s) {
  switch (s) {
    case RunStatus::State::Idle: return "idle";
    case RunStatus::State::Running: return "running";
    case RunStatus::State::Finished: return "finished";
    case RunStatus::State::Stopped: return "stopped";
    case RunStatus::State::Failed: return "failed";
  }
  return "unknown";
}

nlohmann::json to_json(const RunStatus& s) {
  nlohmann::json j = {{"state", std::string(run_state_name(s.state))},
                      {"sim_time", s.sim_time_s},
                      {"duration", s.duration_s},
                      {"uplinks", s.uplinks},
                      {"stored_points", s.stored_points}};
  if (s.speedup) {
    j["speedup"] = *s.speedup;
  } else {
    j["speedup"] = "max";
  }
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

ControlService::ControlService(std::string data_dir) : data_dir_(std::move(data_dir)) {}

ControlService::~ControlService() {
  stop();
  hub_.close_all();
}

RunStatus ControlService::start(ScenarioConfig config) {
  validate(config);
  stop();

  auto sim = std::make_unique<Simulation>(std::move(config));
  if (!data_dir_.empty()) {
    std::filesystem::create_directories(data_dir_);
    sim->store().attach_log((std::filesystem::path(data_dir_) / "store.csv").string());
  }
  sim->set_event_listener(
      [this](const NodeEvent& e) { hub_.publish("phase", to_json(e).dump()); });
  const auto speedup = sim->config().speedup;
  {
    std::unique_lock lock(sim_mu_);
    topic_feed_ = sim->broker().subscribe(kTopicAll);
    sim_ = std::move(sim);
    sim_start_ = sim_->now();
    wall_start_ = std::chrono::steady_clock::now();
  }
  RunStatus st;
  {
    std::lock_guard lock(status_mu_);
    status_ = {};
    status_.state = RunStatus::State::Running;
    status_.duration_s = to_seconds(sim_->config().duration);
    status_.speedup = speedup;
    st = status_;
  }
  hub_.publish("status", to_json(st).dump());
  stop_requested_ = false;
  runner_ = std::thread([this, speedup] { run_loop(speedup); });
  return st;
}

void ControlService::stop() {
  stop_requested_ = true;
  if (runner_.joinable()) runner_.join();
}

RunStatus ControlService::wait() {
  std::unique_lock lock(status_mu_);
  status_cv_.wait(lock, [&] { return status_.state != RunStatus::State::Running; });
  return status_;
}

RunStatus ControlService::status() const {
  std::lock_guard lock(status_mu_);
  return status_;
}

void ControlService::forward_topics() {
  for (const auto& m : topic_feed_->drain()) hub_.publish("topic", to_json(m).dump());
}

void ControlService::run_loop(std::optional<double> speedup) {
  using clock = std::chrono::steady_clock;
  RunStatus::State final_state = RunStatus::State::Finished;
  std::string error;
  try {
    while (!stop_requested_) {
      std::optional<SimTime> next;
      {
        std::shared_lock lock(sim_mu_);
        next = sim_->next_event_time();
      }
      if (!next) break;
      if (speedup) {
        const auto offset = std::chrono::duration<double>(to_seconds(*next - sim_start_) / *speedup);
        const auto target = wall_start_ + std::chrono::duration_cast<clock::duration>(offset);
        while (!stop_requested_ && clock::now() < target) {
          std::this_thread::sleep_for(
              std::min<clock::duration>(target - clock::now(), std::chrono::milliseconds(50)));
        }
        if (stop_requested_) break;
      }
      std::unique_lock lock(sim_mu_);
      sim_->step();
      forward_topics();
      std::lock_guard slock(status_mu_);
      status_.sim_time_s = to_seconds(sim_->now());
      status_.uplinks = sim_->uplinks().size();
      status_.stored_points = sim_->store().size();
    }
    if (stop_requested_) final_state = RunStatus::State::Stopped;
    if (!data_dir_.empty()) {
      std::shared_lock lock(sim_mu_);
      write_run_outputs(*sim_, data_dir_);
    }
  } catch (const std::exception& e) {
    final_state = RunStatus::State::Failed;
    error = e.what();
  }
  RunStatus st;
  {
    std::lock_guard lock(status_mu_);
    status_.state = final_state;
    status_.error = error;
    st = status_;
  }
  status_cv_.notify_all();
  hub_.publish("status", to_json(st).dump());
}

SimTime ControlService::paced_now() const {
  // Caller holds sim_mu_.
  const auto speedup = sim_->config().speedup;
  if (!speedup) return sim_->now();
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start_).count();
  SimTime t = sim_start_ + from_seconds(elapsed * *speedup);
  if (auto next = sim_->next_event_time()) t = std::min(t, *next);
  return std::min(t, sim_->end());
}

std::vector<NodeSummary> ControlService::nodes() const {
  return with_simulation([](const Simulation& sim) { return sim.summaries(); });
}

std::vector<TimeValue> ControlService::telemetry(const std::string& device_id,
                                                 const std::string& series,
                                                 std::optional<SimTime> from,
                                                 std::optional<SimTime> to, Aggregation agg,
                                                 SimDuration bucket) const {
  return with_simulation([&](const Simulation& sim) {
    if (!sim.has_node(device_id)) {
      throw UnknownDevice(fmt::format("unknown device '{}'", device_id));
    }
    return sim.store().query(device_id, series, from.value_or(SimTime{0}),
                             to.value_or(sim.end()), agg, bucket);
  });
}

DownlinkCommand ControlService::enqueue_downlink(const std::string& device_id, int fport,
                                                 const std::string& payload_b64) {
  std::unique_lock lock(sim_mu_);
  if (!sim_) throw std::logic_error("no scenario has been started");
  return sim_->enqueue_downlink(device_id, fport, payload_b64, paced_now());
}

std::vector<DownlinkCommand> ControlService::downlink_queue() const {
  return with_simulation([](const Simulation& sim) { return sim.downlinks().pending(); });
}

std::vector<TopicMessage> ControlService::errors(std::optional<SimTime> from,
                                                 std::optional<SimTime> to) const {
  return with_simulation([&](const Simulation& sim) {
    return sim.pipeline().errors(from.value_or(SimTime{0}), to.value_or(sim.end()));
  });
}

EnergyReport ControlService::energy_report(const std::string& profile, const std::string& basis) {
  return senswich::energy_report(PhaseProfile::by_name(profile), BatteryPack{},
                                 parse_basis(basis));
}

}  // namespace senswich
