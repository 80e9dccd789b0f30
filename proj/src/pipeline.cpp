#include "senswich/pipeline.h"

#include <algorithm>

#include <fmt/format.h>

#include "senswich/base64.h"
#include "senswich/lpp.h"

namespace senswich {

bool Subscription::matches(std::string_view topic) const {
  if (filter_ == kTopicAll) return topic == kTopicSuccess || topic == kTopicError;
  return topic == filter_;
}

void Subscription::push(const TopicMessage& msg) {
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    queue_.push_back(msg);
  }
  cv_.notify_all();
}

std::optional<TopicMessage> Subscription::try_pop() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  TopicMessage msg = std::move(queue_.front());
  queue_.pop_front();
  return msg;
}

std::optional<TopicMessage> Subscription::wait_pop(std::chrono::milliseconds timeout) {
  std::unique_lock lock(mu_);
  cv_.wait_for(lock, timeout, [&] { return !queue_.empty() || closed_; });
  if (queue_.empty()) return std::nullopt;
  TopicMessage msg = std::move(queue_.front());
  queue_.pop_front();
  return msg;
}

std::vector<TopicMessage> Subscription::drain() {
  std::lock_guard lock(mu_);
  std::vector<TopicMessage> out(std::make_move_iterator(queue_.begin()),
                                std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

std::size_t Subscription::pending() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

void Subscription::close() {
  {
    std::lock_guard lock(mu_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool Subscription::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

std::shared_ptr<Subscription> Broker::subscribe(std::string_view filter) {
  if (filter != kTopicSuccess && filter != kTopicError && filter != kTopicAll) {
    throw BadFilter(fmt::format("unsupported topic filter '{}'", filter));
  }
  auto sub = std::make_shared<Subscription>(std::string(filter));
  std::lock_guard lock(mu_);
  subs_.push_back(sub);
  return sub;
}

void Broker::unsubscribe(const std::shared_ptr<Subscription>& sub) {
  std::lock_guard lock(mu_);
  std::erase_if(subs_, [&](const std::weak_ptr<Subscription>& w) {
    auto s = w.lock();
    return !s || s == sub;
  });
  sub->close();
}

TopicMessage Broker::publish(TopicMessage msg) {
  // Holding the lock across fan-out keeps every subscriber in global order.
  std::lock_guard lock(mu_);
  msg.sequence = next_sequence_++;
  std::erase_if(subs_, [](const std::weak_ptr<Subscription>& w) { return w.expired(); });
  for (const auto& w : subs_) {
    if (auto s = w.lock(); s && s->matches(msg.topic)) s->push(msg);
  }
  return msg;
}

std::size_t Broker::subscriber_count() const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(std::count_if(
      subs_.begin(), subs_.end(), [](const std::weak_ptr<Subscription>& w) { return !w.expired(); }));
}

Pipeline::Pipeline(TimeSeriesStore& store, Broker& broker, const ChannelMap& map)
    : store_(store), broker_(broker), map_(map) {}

TopicMessage Pipeline::fail(TopicMessage msg, std::string error) {
  msg.topic = std::string(kTopicError);
  msg.decoded.clear();
  msg.cleartext.clear();
  msg.error = std::move(error);
  msg = broker_.publish(std::move(msg));
  std::lock_guard lock(mu_);
  errors_.push_back(msg);
  return msg;
}

TopicMessage Pipeline::ingest(const UplinkMessage& uplink, SimTime t) {
  TopicMessage msg;
  msg.device_id = uplink.device_id;
  msg.time = t;
  msg.fcnt = uplink.fcnt;
  msg.fport = uplink.fport;
  msg.payload_b64 = uplink.payload_b64;

  std::vector<Measurement> measurements;
  try {
    const auto bytes = base64_decode(uplink.payload_b64);
    const auto records = lpp::decode_payload(bytes);
    measurements = to_measurements(records, map_);
  } catch (const Base64Error& e) {
    return fail(std::move(msg), fmt::format("base64: {}", e.what()));
  } catch (const lpp::MalformedPayload& e) {
    return fail(std::move(msg), fmt::format("cayennelpp: {}", e.what()));
  } catch (const UnmappedRecord& e) {
    return fail(std::move(msg), fmt::format("channel map: {}", e.what()));
  }
  if (measurements.empty()) return fail(std::move(msg), "payload carries no records");

  // All-or-nothing: refuse the frame before writing if any point exists.
  for (const auto& m : measurements) {
    if (store_.contains(uplink.device_id, m.series, t)) {
      return fail(std::move(msg), fmt::format("store: duplicate {} point at {} s",
                                              series_name(m.series), format_seconds(t)));
    }
  }
  for (const auto& m : measurements) {
    store_.insert({uplink.device_id, m.series, t, m.value});
  }

  msg.topic = std::string(kTopicSuccess);
  msg.cleartext = render_cleartext(measurements);
  msg.decoded = std::move(measurements);
  msg = broker_.publish(std::move(msg));
  std::lock_guard lock(mu_);
  ++successes_;
  return msg;
}

std::size_t Pipeline::success_count() const {
  std::lock_guard lock(mu_);
  return successes_;
}

std::size_t Pipeline::error_count() const {
  std::lock_guard lock(mu_);
  return errors_.size();
}

std::vector<TopicMessage> Pipeline::errors(SimTime from, SimTime to) const {
  std::lock_guard lock(mu_);
  std::vector<TopicMessage> out;
  for (const auto& m : errors_) {
    if (m.time >= from && m.time <= to) out.push_back(m);
  }
  return out;
}

}  // namespace senswich
