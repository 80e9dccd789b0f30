#pragma once

// Local stand-in for the cloud path: the decode hook turns a forwarded
// uplink (base64 -> CayenneLPP -> cleartext) into stored points, and the
// outcome is republished on `lorawan` or `lorawan/error`.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "senswich/link.h"
#include "senswich/payload.h"
#include "senswich/store.h"

namespace senswich {

inline constexpr std::string_view kTopicSuccess = "lorawan";
inline constexpr std::string_view kTopicError = "lorawan/error";
inline constexpr std::string_view kTopicAll = "lorawan/#";

struct TopicMessage {
  std::uint64_t sequence = 0;  // global publish order
  std::string topic;
  std::string device_id;
  SimTime time{0};
  std::uint32_t fcnt = 0;
  int fport = 1;
  std::string payload_b64;
  std::vector<Measurement> decoded;  // success only
  std::string cleartext;             // success only
  std::string error;                 // error only
};

class BadFilter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Buffered stream of messages matching a filter. Safe to drain from another
// thread while the broker publishes.
class Subscription {
 public:
  explicit Subscription(std::string filter) : filter_(std::move(filter)) {}

  const std::string& filter() const { return filter_; }
  bool matches(std::string_view topic) const;

  std::optional<TopicMessage> try_pop();
  std::optional<TopicMessage> wait_pop(std::chrono::milliseconds timeout);
  std::vector<TopicMessage> drain();
  std::size_t pending() const;

  void push(const TopicMessage& msg);
  void close();
  bool closed() const;

 private:
  std::string filter_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::deque<TopicMessage> queue_;
  bool closed_ = false;
};

class Broker {
 public:
  // "lorawan", "lorawan/error" or "lorawan/#"; anything else is BadFilter.
  std::shared_ptr<Subscription> subscribe(std::string_view filter);
  void unsubscribe(const std::shared_ptr<Subscription>& sub);
  // Assigns the sequence number and fans out in publish order.
  TopicMessage publish(TopicMessage msg);
  std::size_t subscriber_count() const;

 private:
  mutable std::mutex mu_;
  std::vector<std::weak_ptr<Subscription>> subs_;
  std::uint64_t next_sequence_ = 1;
};

class Pipeline {
 public:
  Pipeline(TimeSeriesStore& store, Broker& broker,
           const ChannelMap& map = ChannelMap::standard());

  // Never throws for bad payloads: every outcome is one published message.
  TopicMessage ingest(const UplinkMessage& msg, SimTime t);

  std::size_t success_count() const;
  std::size_t error_count() const;
  // Error-topic history with time in [from, to].
  std::vector<TopicMessage> errors(SimTime from, SimTime to) const;

 private:
  TopicMessage fail(TopicMessage msg, std::string error);

  TimeSeriesStore& store_;
  Broker& broker_;
  const ChannelMap& map_;
  mutable std::mutex mu_;
  std::size_t successes_ = 0;
  std::vector<TopicMessage> errors_;
};

}  // namespace senswich
