#pragma once

// Simulated LoRaWAN transport: disc coverage around gateways, uplink
// delivery with network-server deduplication, and a Class-A downlink queue
// drained one command per post-uplink receive window.

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "senswich/node.h"
#include "senswich/sim_time.h"

namespace senswich {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr SimDuration kDefaultRxDelay{1000};

struct Gateway {
  std::string gateway_id;
  GeoPoint position;
  double range_km = 15.0;
};

double haversine_km(GeoPoint a, GeoPoint b);

struct UplinkFrame {
  std::string device_id;
  std::uint32_t fcnt = 0;  // frame identity together with device_id
  int fport = 1;
  std::vector<std::uint8_t> payload;
  SimTime tx_start{0};
  SimTime tx_end{0};
  std::vector<std::string> received_by;
};

struct DeliveryResult {
  enum class Status { Delivered, Dropped };
  Status status = Status::Dropped;
  std::vector<std::string> received_by;

  bool delivered() const { return status == Status::Delivered; }
};

// Every gateway whose disc contains the transmitter hears the frame.
DeliveryResult deliver_uplink(const UplinkFrame& frame, GeoPoint transmitter,
                              std::span<const Gateway> gateways);

// What the network server hands to the application side: the payload travels
// base64-encoded.
struct UplinkMessage {
  std::string device_id;
  std::uint32_t fcnt = 0;
  int fport = 1;
  std::string payload_b64;
  std::vector<std::string> received_by;
};

// Collapses the copies of one frame heard by several gateways.
class NetworkServer {
 public:
  // Returns the message for the first copy of a frame, nullopt for repeats.
  std::optional<UplinkMessage> on_gateway_receive(const UplinkFrame& frame,
                                                  const std::string& gateway_id);
  std::size_t forwarded() const { return forwarded_; }

 private:
  std::set<std::pair<std::string, std::uint32_t>> seen_;
  std::size_t forwarded_ = 0;
};

struct DownlinkCommand {
  std::uint64_t id = 0;
  std::string device_id;
  int fport = 1;
  std::string payload_b64;
  SimTime enqueued_at{0};
  std::optional<SimTime> delivered_at;
};

class DownlinkQueue {
 public:
  const DownlinkCommand& enqueue(std::string device_id, int fport, std::string payload_b64,
                                 SimTime now);

  // Class A: at most the oldest command for the device, delivered at
  // uplink_end + rx_delay. Commands enqueued after uplink_end wait.
  std::vector<DownlinkCommand> flush(const std::string& device_id, SimTime uplink_end,
                                     SimDuration rx_delay = kDefaultRxDelay);

  std::vector<DownlinkCommand> pending() const;
  std::vector<DownlinkCommand> pending(const std::string& device_id) const;
  const std::vector<DownlinkCommand>& delivered() const { return delivered_; }
  std::size_t size() const { return queue_.size(); }

 private:
  std::deque<DownlinkCommand> queue_;
  std::vector<DownlinkCommand> delivered_;
  std::uint64_t next_id_ = 1;
};

struct TxInterval {
  SimTime start;
  SimTime end;
};

// Fraction of [window_start, window_start + window) spent transmitting.
double duty_cycle(std::span<const TxInterval> tx_log, SimTime window_start, SimDuration window);
inline double duty_cycle(std::span<const TxInterval> tx_log, SimDuration window) {
  return duty_cycle(tx_log, SimTime{0}, window);
}

// Gateways plus an optional seeded frame-loss probability.
class LoraLink {
 public:
  LoraLink(std::vector<Gateway> gateways, double loss_probability, std::uint64_t seed);

  DeliveryResult transmit(const UplinkFrame& frame, GeoPoint transmitter);
  const std::vector<Gateway>& gateways() const { return gateways_; }

 private:
  std::vector<Gateway> gateways_;
  double loss_probability_;
  std::mt19937_64 rng_;
};

}  // namespace senswich
