#include "senswich/link.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "senswich/base64.h"

namespace senswich {

double haversine_km(GeoPoint a, GeoPoint b) {
  constexpr double kDeg = std::numbers::pi / 180.0;
  const double dlat = (b.lat - a.lat) * kDeg;
  const double dlon = (b.lon - a.lon) * kDeg;
  const double s1 = std::sin(dlat / 2.0);
  const double s2 = std::sin(dlon / 2.0);
  const double h = s1 * s1 + std::cos(a.lat * kDeg) * std::cos(b.lat * kDeg) * s2 * s2;
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

DeliveryResult deliver_uplink(const UplinkFrame&, GeoPoint transmitter,
                              std::span<const Gateway> gateways) {
  DeliveryResult result;
  for (const auto& gw : gateways) {
    if (haversine_km(transmitter, gw.position) <= gw.range_km) {
      result.received_by.push_back(gw.gateway_id);
    }
  }
  result.status = result.received_by.empty() ? DeliveryResult::Status::Dropped
                                             : DeliveryResult::Status::Delivered;
  return result;
}

std::optional<UplinkMessage> NetworkServer::on_gateway_receive(const UplinkFrame& frame,
                                                               const std::string& gateway_id) {
  if (!seen_.emplace(frame.device_id, frame.fcnt).second) return std::nullopt;
  ++forwarded_;
  UplinkMessage msg;
  msg.device_id = frame.device_id;
  msg.fcnt = frame.fcnt;
  msg.fport = frame.fport;
  msg.payload_b64 = base64_encode(frame.payload);
  msg.received_by = frame.received_by.empty() ? std::vector<std::string>{gateway_id}
                                              : frame.received_by;
  return msg;
}

const DownlinkCommand& DownlinkQueue::enqueue(std::string device_id, int fport,
                                              std::string payload_b64, SimTime now) {
  DownlinkCommand cmd;
  cmd.id = next_id_++;
  cmd.device_id = std::move(device_id);
  cmd.fport = fport;
  cmd.payload_b64 = std::move(payload_b64);
  cmd.enqueued_at = now;
  queue_.push_back(std::move(cmd));
  return queue_.back();
}

std::vector<DownlinkCommand> DownlinkQueue::flush(const std::string& device_id,
                                                  SimTime uplink_end, SimDuration rx_delay) {
  auto it = std::find_if(queue_.begin(), queue_.end(), [&](const DownlinkCommand& c) {
    return c.device_id == device_id && c.enqueued_at <= uplink_end;
  });
  if (it == queue_.end()) return {};
  DownlinkCommand cmd = std::move(*it);
  queue_.erase(it);
  cmd.delivered_at = uplink_end + rx_delay;
  delivered_.push_back(cmd);
  return {std::move(cmd)};
}

std::vector<DownlinkCommand> DownlinkQueue::pending() const {
  return {queue_.begin(), queue_.end()};
}

std::vector<DownlinkCommand> DownlinkQueue::pending(const std::string& device_id) const {
  std::vector<DownlinkCommand> out;
  for (const auto& c : queue_) {
    if (c.device_id == device_id) out.push_back(c);
  }
  return out;
}

double duty_cycle(std::span<const TxInterval> tx_log, SimTime window_start, SimDuration window) {
  if (window.count() <= 0) throw std::invalid_argument("duty cycle window must be positive");
  const SimTime window_end = window_start + window;
  SimDuration on_air{0};
  for (const auto& tx : tx_log) {
    const SimTime s = std::max(tx.start, window_start);
    const SimTime e = std::min(tx.end, window_end);
    if (e > s) on_air += e - s;
  }
  return static_cast<double>(on_air.count()) / static_cast<double>(window.count());
}

LoraLink::LoraLink(std::vector<Gateway> gateways, double loss_probability, std::uint64_t seed)
    : gateways_(std::move(gateways)), loss_probability_(loss_probability) {
  std::seed_seq seq{seed, std::uint64_t{0x11A4}};
  rng_.seed(seq);
}

DeliveryResult LoraLink::transmit(const UplinkFrame& frame, GeoPoint transmitter) {
  DeliveryResult result = deliver_uplink(frame, transmitter, gateways_);
  if (loss_probability_ > 0.0) {
    std::bernoulli_distribution lost(loss_probability_);
    if (lost(rng_)) {
      result.status = DeliveryResult::Status::Dropped;
      result.received_by.clear();
    }
  }
  return result;
}

}  // namespace senswich
