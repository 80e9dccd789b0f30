#include "senswich/http_api.h"

#include <httplib.h>

#include <fmt/format.h>

#include "senswich/base64.h"
#include "senswich/json_io.h"
#include "senswich/service.h"

namespace senswich {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& kind,
                const std::string& message) {
  send_json(res, {{"error", kind}, {"message", message}}, status);
}

std::optional<SimTime> time_param(const httplib::Request& req, const std::string& key) {
  if (!req.has_param(key)) return std::nullopt;
  const std::string v = req.get_param_value(key);
  std::size_t used = 0;
  const double s = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument(fmt::format("bad number for '{}'", key));
  return from_seconds(s);
}

// Maps the service's exception types onto HTTP status codes.
template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    send_json(res, {{"error", "ConfigError"}, {"message", e.what()}, {"fields", e.errors()}}, 400);
  } catch (const UnknownDevice& e) {
    send_error(res, 404, "UnknownDevice", e.what());
  } catch (const UnknownSeries& e) {
    send_error(res, 404, "UnknownSeries", e.what());
  } catch (const Base64Error& e) {
    send_error(res, 400, "Base64Error", e.what());
  } catch (const InvalidFPort& e) {
    send_error(res, 400, "InvalidFPort", e.what());
  } catch (const json::exception& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::invalid_argument& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::out_of_range& e) {
    send_error(res, 400, "BadRequest", e.what());
  } catch (const std::logic_error& e) {
    send_error(res, 409, "NoScenario", e.what());
  } catch (const std::exception& e) {
    send_error(res, 500, "InternalError", e.what());
  }
}

}  // namespace

HttpApi::HttpApi(ControlService& service)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

HttpApi::~HttpApi() { stop(); }

void HttpApi::install_routes() {
  auto& srv = *server_;

  srv.Get("/api/nodes", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json arr = json::array();
      for (const auto& s : service_.nodes()) arr.push_back(to_json(s));
      send_json(res, arr);
    });
  });

  srv.Get("/api/telemetry", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      if (!req.has_param("device") || !req.has_param("series")) {
        throw std::invalid_argument("device and series are required");
      }
      const std::string agg_name = req.has_param("agg") ? req.get_param_value("agg") : "raw";
      const auto agg = parse_aggregation(agg_name);
      if (!agg) throw std::invalid_argument(fmt::format("unknown agg '{}'", agg_name));
      const SimDuration bucket = time_param(req, "bucket").value_or(SimDuration{0});
      const auto points =
          service_.telemetry(req.get_param_value("device"), req.get_param_value("series"),
                             time_param(req, "from"), time_param(req, "to"), *agg, bucket);
      send_json(res, {{"device", req.get_param_value("device")},
                      {"series", req.get_param_value("series")},
                      {"agg", agg_name},
                      {"points", to_json(points)}});
    });
  });

  srv.Post("/api/downlink", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = json::parse(req.body);
      const auto cmd = service_.enqueue_downlink(body.at("device_id").get<std::string>(),
                                                 body.value("fport", 1),
                                                 body.at("payload_b64").get<std::string>());
      send_json(res, to_json(cmd), 201);
    });
  });

  srv.Get("/api/downlink/queue", [this](const httplib::Request&, httplib::Response& res) {
    guarded(res, [&] {
      json arr = json::array();
      for (const auto& c : service_.downlink_queue()) arr.push_back(to_json(c));
      send_json(res, arr);
    });
  });

  srv.Get("/api/energy/report", [](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const std::string profile =
          req.has_param("profile") ? req.get_param_value("profile") : "regulator";
      const std::string basis = req.has_param("basis") ? req.get_param_value("basis") : "capacity";
      auto j = to_json(ControlService::energy_report(profile, basis));
      j["profile"] = profile;
      send_json(res, j);
    });
  });

  srv.Post("/api/scenario", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto config = parse_scenario(json::parse(req.body));
      send_json(res, to_json(service_.start(config)), 202);
    });
  });

  srv.Get("/api/scenario/status", [this](const httplib::Request&, httplib::Response& res) {
    send_json(res, to_json(service_.status()));
  });

  srv.Get("/api/errors", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json arr = json::array();
      for (const auto& m : service_.errors(time_param(req, "from"), time_param(req, "to"))) {
        arr.push_back(to_json(m));
      }
      send_json(res, arr);
    });
  });

  srv.Get("/api/stream", [this](const httplib::Request&, httplib::Response& res) {
    auto sub = service_.open_stream();
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [sub](size_t, httplib::DataSink& sink) {
          auto item = sub->wait_pop(std::chrono::milliseconds(500));
          if (!item) {
            if (sub->closed()) {
              sink.done();
              return false;
            }
            const std::string ping = ": keep-alive\n\n";
            return sink.write(ping.data(), ping.size());
          }
          const std::string frame = fmt::format("event: {}\ndata: {}\n\n", item->event, item->data);
          return sink.write(frame.data(), frame.size());
        },
        [sub](bool) { sub->close(); });
  });
}

bool HttpApi::listen(const std::string& host, int port) {
  return server_->listen(host, port);
}

int HttpApi::bind_to_any_port(const std::string& host) {
  return server_->bind_to_any_port(host);
}

bool HttpApi::listen_after_bind() { return server_->listen_after_bind(); }

void HttpApi::stop() {
  if (server_) server_->stop();
}

bool HttpApi::is_running() const { return server_->is_running(); }

}  // namespace senswich
