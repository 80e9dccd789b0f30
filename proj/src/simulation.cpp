#include "senswich/simulation.h"

#include <algorithm>

#include <fmt/format.h>

#include "senswich/base64.h"

namespace senswich {

namespace {

std::uint64_t node_seed(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{seed, static_cast<std::uint64_t>(index)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (std::uint64_t{out[0]} << 32) | out[1];
}

}  // namespace

Simulation::Simulation(ScenarioConfig config)
    : config_((validate(config), std::move(config))),
      link_(config_.gateways, config_.frame_loss, config_.seed),
      store_(config_.retention),
      pipeline_(store_, broker_) {
  for (std::size_t i = 0; i < config_.nodes.size(); ++i) {
    const auto& spec = config_.nodes[i];
    const std::uint64_t seed = node_seed(config_.seed, i);
    nodes_.emplace_back(spec.node, seed);
    Environment env = Environment::lagoon_defaults(seed ^ 0xE7u);
    for (const auto& [sensor, signal] : spec.environment) env.set(sensor, signal);
    environments_.push_back(std::move(env));
    node_index_[spec.node.device_id] = i;
    store_.register_device(spec.node.device_id);
    schedule(spec.node.first_wake, EventKind::Wake, i);
  }
  in_flight_.resize(nodes_.size());
  fcnt_.resize(nodes_.size(), 0);
  gps_scheduled_.resize(nodes_.size());
}

void Simulation::schedule(SimTime t, EventKind kind, std::size_t node, SimTime uplink_end) {
  queue_.push({t, sequence_++, kind, node, uplink_end});
}

bool Simulation::finished() const {
  return queue_.empty() || queue_.top().time >= end();
}

std::optional<SimTime> Simulation::next_event_time() const {
  if (finished()) return std::nullopt;
  return queue_.top().time;
}

bool Simulation::step() {
  if (finished()) return false;
  const Scheduled ev = queue_.top();
  queue_.pop();
  now_ = ev.time;
  switch (ev.kind) {
    case EventKind::Wake: on_wake(ev.node, ev.time); break;
    case EventKind::UplinkEnd: on_uplink_end(ev.node, ev.time); break;
    case EventKind::RxWindow: on_rx_window(ev.node, ev.uplink_end, ev.time); break;
    case EventKind::GpsDeadline: on_gps_deadline(ev.node, ev.time); break;
  }
  return true;
}

void Simulation::run_until(SimTime t) {
  while (!finished() && queue_.top().time <= t) step();
  if (t > now_) now_ = std::min(t, end());
}

void Simulation::run() {
  while (step()) {
  }
}

void Simulation::log_events(std::vector<NodeEvent> events) {
  for (auto& e : events) {
    if (listener_) listener_(e);
    events_.push_back(std::move(e));
  }
}

void Simulation::on_wake(std::size_t index, SimTime t) {
  Node& node = nodes_[index];
  CycleResult cycle = node.run_cycle(environments_[index], t);
  UplinkFrame frame;
  frame.device_id = node.device_id();
  frame.fcnt = fcnt_[index]++;
  frame.fport = node.state().config.fport;
  frame.payload = std::move(cycle.payload);
  frame.tx_start = cycle.tx_start;
  frame.tx_end = cycle.tx_end;
  in_flight_[index] = std::move(frame);
  log_events(std::move(cycle.events));
  schedule(cycle.tx_end, EventKind::UplinkEnd, index);
  schedule(node.next_wake(), EventKind::Wake, index);
}

void Simulation::on_uplink_end(std::size_t index, SimTime t) {
  UplinkFrame frame = std::move(*in_flight_[index]);
  in_flight_[index].reset();
  const DeliveryResult delivery = link_.transmit(frame, nodes_[index].state().config.position);
  frame.received_by = delivery.received_by;

  UplinkRecord record;
  record.device_id = frame.device_id;
  record.fcnt = frame.fcnt;
  record.tx_start = frame.tx_start;
  record.tx_end = frame.tx_end;
  record.payload_size = frame.payload.size();
  record.delivered = delivery.delivered();
  record.received_by = delivery.received_by;
  uplinks_.push_back(std::move(record));
  if (!delivery.delivered()) return;

  // Each receiving gateway forwards its copy; the network server keeps one.
  for (const auto& gw : delivery.received_by) {
    if (auto msg = network_server_.on_gateway_receive(frame, gw)) pipeline_.ingest(*msg, t);
  }
  store_.expire(t);
  schedule(t + config_.rx_delay, EventKind::RxWindow, index, t);
}

void Simulation::on_rx_window(std::size_t index, SimTime uplink_end, SimTime t) {
  Node& node = nodes_[index];
  const auto delivered = downlinks_.flush(node.device_id(), uplink_end, config_.rx_delay);
  std::vector<NodeEvent> events;
  for (const auto& cmd : delivered) {
    Command c;
    try {
      c = decode_downlink(cmd.fport, cmd.payload_b64);
    } catch (const std::exception&) {
      c = {Command::Kind::Unknown, cmd.payload_b64};
    }
    node.handle_downlink(c, t, events);
  }
  log_events(std::move(events));
  if (auto deadline = node.gps_deadline(); deadline && gps_scheduled_[index] != deadline) {
    gps_scheduled_[index] = deadline;
    schedule(*deadline, EventKind::GpsDeadline, index);
  }
}

void Simulation::on_gps_deadline(std::size_t index, SimTime t) {
  std::vector<NodeEvent> events;
  nodes_[index].step_gps(t, events);
  log_events(std::move(events));
}

DownlinkCommand Simulation::enqueue_downlink(const std::string& device_id, int fport,
                                             const std::string& payload_b64,
                                             std::optional<SimTime> at) {
  if (!has_node(device_id)) throw UnknownDevice(fmt::format("unknown device '{}'", device_id));
  if (fport < kMinFPort || fport > kMaxFPort) {
    throw InvalidFPort(fmt::format("FPort {} outside [{}, {}]", fport, kMinFPort, kMaxFPort));
  }
  base64_decode(payload_b64);  // throws Base64Error
  const SimTime when = at ? std::max(*at, now_) : now_;
  return downlinks_.enqueue(device_id, fport, payload_b64, when);
}

std::size_t Simulation::index_of(const std::string& device_id) const {
  auto it = node_index_.find(device_id);
  if (it == node_index_.end()) throw UnknownDevice(fmt::format("unknown device '{}'", device_id));
  return it->second;
}

const Node& Simulation::node(const std::string& device_id) const {
  return nodes_[index_of(device_id)];
}

bool Simulation::has_node(const std::string& device_id) const {
  return node_index_.count(device_id) > 0;
}

std::vector<TxInterval> Simulation::tx_log(const std::string& device_id) const {
  std::vector<TxInterval> out;
  for (const auto& u : uplinks_) {
    if (u.device_id == device_id) out.push_back({u.tx_start, u.tx_end});
  }
  return out;
}

std::vector<NodeSummary> Simulation::summaries() const {
  std::vector<NodeSummary> out;
  for (const auto& node : nodes_) {
    NodeSummary s;
    s.device_id = node.device_id();
    s.battery_remaining = node.battery_remaining_percent();
    s.gps_state = std::string(gps_state_name(node.state().gps));
    s.phase = node.phase_at(now_);

    auto latest = [&](Series series) { return store_.latest(s.device_id, series); };
    const auto ph = latest(Series::Ph);
    if (ph) {
      s.last_seen = ph->time;
      SampleSet v;
      v.ph = ph->value;
      if (auto p = latest(Series::Ec)) v.ec = p->value;
      if (auto p = latest(Series::Turbidity)) v.turbidity = p->value;
      if (auto p = latest(Series::Do)) v.do_mgl = p->value;
      if (auto p = latest(Series::LiquidLevel)) v.liquid_level = p->value >= 0.5;
      if (auto p = latest(Series::Temperature)) v.temperature_c = p->value;
      s.last_values = v;
    }
    const auto lat = latest(Series::GpsLat);
    const auto lon = latest(Series::GpsLon);
    if (lat && lon) s.position = GeoPoint{lat->value, lon->value};
    out.push_back(std::move(s));
  }
  return out;
}

void Simulation::set_event_listener(std::function<void(const NodeEvent&)> listener) {
  listener_ = std::move(listener);
}

}  // namespace senswich
