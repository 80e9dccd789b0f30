#pragma once

// HTTP+JSON front end of ControlService.
//
//   GET  /api/nodes
//   GET  /api/telemetry?device&series&from&to&agg&bucket
//   POST /api/downlink            {device_id, fport, payload_b64}
//   GET  /api/downlink/queue
//   GET  /api/energy/report?profile&basis
//   POST /api/scenario            scenario config JSON
//   GET  /api/scenario/status
//   GET  /api/stream              text/event-stream
//   GET  /api/errors?from&to

#include <memory>
#include <string>

namespace httplib {
class Server;
}

namespace senswich {

class ControlService;

class HttpApi {
 public:
  explicit HttpApi(ControlService& service);
  ~HttpApi();

  HttpApi(const HttpApi&) = delete;
  HttpApi& operator=(const HttpApi&) = delete;

  // Binds and serves until stop(); returns false if binding fails.
  bool listen(const std::string& host, int port);
  // Binds to an ephemeral port, returns it (or -1); serve with listen_after_bind().
  int bind_to_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  bool is_running() const;

 private:
  void install_routes();

  ControlService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace senswich
