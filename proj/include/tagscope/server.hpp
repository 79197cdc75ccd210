// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include <httplib.h>

#include "tagscope/api.hpp"

namespace tagscope {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 8080;

  /// "host:port", ":port" or "port".
  static ListenAddress parse(std::string_view text) {
    ListenAddress a;
    const auto colon = text.rfind(':');
    std::string_view port = text;
    if (colon != std::string_view::npos) {
      if (colon > 0) a.host = std::string(text.substr(0, colon));
      port = text.substr(colon + 1);
    }
    int v = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), v);
    if (ec != std::errc() || ptr != port.data() + port.size() || v < 0 || v > 65535)
      throw std::invalid_argument("bad listen address '" + std::string(text) + "'");
    a.port = v;
    return a;
  }
};

/// Binds the API (and optional static UI assets) onto an httplib server. The state must
/// outlive the server.
inline void install_routes(httplib::Server& server, const api::ServiceState& state,
                           const std::optional<std::string>& static_dir = std::nullopt) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Get(R"(/api/.*)", [&state](const httplib::Request& req, httplib::Response& res) {
    api::Params params(req.params.begin(), req.params.end());
    const auto r = api::handle(state, req.path, params);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });
  server.Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  if (static_dir && !server.set_mount_point("/", *static_dir))
    throw std::runtime_error("static directory '" + *static_dir + "' does not exist");
  server.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
    if (!res.body.empty()) return;
    const auto r = api::error(res.status, res.status == 404 ? "not_found" : "http_error",
                              "request for '" + req.path + "' failed");
    res.set_content(r.body, "application/json");
  });
}

}  // namespace tagscope
