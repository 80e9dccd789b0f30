#pragma once

// Deterministic discrete-event loop tying nodes, the LoRa link, the network
// server, the downlink queue and the cloud pipeline together.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "senswich/environment.h"
#include "senswich/link.h"
#include "senswich/node.h"
#include "senswich/pipeline.h"
#include "senswich/scenario.h"
#include "senswich/store.h"

namespace senswich {

struct UplinkRecord {
  std::string device_id;
  std::uint32_t fcnt = 0;
  SimTime tx_start{0};
  SimTime tx_end{0};
  std::size_t payload_size = 0;
  bool delivered = false;
  std::vector<std::string> received_by;
};

struct NodeSummary {
  std::string device_id;
  std::optional<SimTime> last_seen;
  std::optional<SampleSet> last_values;
  double battery_remaining = 100.0;
  std::optional<GeoPoint> position;  // last GPS fix known to the cloud
  std::string gps_state;
  std::optional<Phase> phase;
};

class Simulation {
 public:
  // Throws ConfigError.
  explicit Simulation(ScenarioConfig config);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  // Processes the next event. Returns false once no event remains before
  // the end of the run.
  bool step();
  void run_until(SimTime t);
  void run();

  SimTime now() const { return now_; }
  SimTime end() const { return SimTime{0} + config_.duration; }
  bool finished() const;
  std::optional<SimTime> next_event_time() const;

  // Validates device and base64; enqueued_at = max(now(), at).
  DownlinkCommand enqueue_downlink(const std::string& device_id, int fport,
                                   const std::string& payload_b64,
                                   std::optional<SimTime> at = std::nullopt);

  const ScenarioConfig& config() const { return config_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(const std::string& device_id) const;
  bool has_node(const std::string& device_id) const;

  TimeSeriesStore& store() { return store_; }
  const TimeSeriesStore& store() const { return store_; }
  Broker& broker() { return broker_; }
  const Pipeline& pipeline() const { return pipeline_; }
  const DownlinkQueue& downlinks() const { return downlinks_; }
  const NetworkServer& network_server() const { return network_server_; }

  const std::vector<NodeEvent>& events() const { return events_; }
  const std::vector<UplinkRecord>& uplinks() const { return uplinks_; }
  std::vector<TxInterval> tx_log(const std::string& device_id) const;
  std::vector<NodeSummary> summaries() const;

  // Called for every node event as it is logged.
  void set_event_listener(std::function<void(const NodeEvent&)> listener);

 private:
  enum class EventKind { Wake, UplinkEnd, RxWindow, GpsDeadline };

  struct Scheduled {
    SimTime time;
    std::uint64_t sequence;
    EventKind kind;
    std::size_t node;
    SimTime uplink_end{0};

    bool operator>(const Scheduled& o) const {
      return time != o.time ? time > o.time : sequence > o.sequence;
    }
  };

  void schedule(SimTime t, EventKind kind, std::size_t node, SimTime uplink_end = SimTime{0});
  void log_events(std::vector<NodeEvent> events);
  void on_wake(std::size_t index, SimTime t);
  void on_uplink_end(std::size_t index, SimTime t);
  void on_rx_window(std::size_t index, SimTime uplink_end, SimTime t);
  void on_gps_deadline(std::size_t index, SimTime t);
  std::size_t index_of(const std::string& device_id) const;

  ScenarioConfig config_;
  std::vector<Node> nodes_;
  std::vector<Environment> environments_;
  std::map<std::string, std::size_t> node_index_;
  std::vector<std::optional<UplinkFrame>> in_flight_;
  std::vector<std::uint32_t> fcnt_;
  std::vector<std::optional<SimTime>> gps_scheduled_;

  LoraLink link_;
  NetworkServer network_server_;
  DownlinkQueue downlinks_;
  TimeSeriesStore store_;
  Broker broker_;
  Pipeline pipeline_;

  std::priority_queue<Scheduled, std::vector<Scheduled>, std::greater<>> queue_;
  std::uint64_t sequence_ = 0;
  SimTime now_{0};

  std::vector<NodeEvent> events_;
  std::vector<UplinkRecord> uplinks_;
  std::function<void(const NodeEvent&)> listener_;
};

}  // namespace senswich
