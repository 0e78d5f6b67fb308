#ifndef CAKG_ENDPOINT_HPP
#define CAKG_ENDPOINT_HPP

// HTTP front end for a TripleStore: a SPARQL 1.1 Protocol query service at
// {prefix}/sparql plus a Graph Store Protocol subset at {prefix}/data
// (default graph only). Built on the vendored cpp-httplib server.

#include <chrono>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "cakg/result.hpp"
#include "cakg/sparql.hpp"
#include "cakg/store.hpp"
#include "cakg/turtle.hpp"
#include "httplib.h"

namespace cakg::endpoint {

struct EndpointConfig {
  std::string host = "127.0.0.1";
  int port = 3030;  // 0 asks the OS for an ephemeral port
  std::string prefix = "/ds";
  bool read_only = false;
  std::size_t max_body_bytes = 16u << 20;
  int timeout_ms = 10000;
};

inline Status validate_config(const EndpointConfig& c) {
  if (c.port < 0 || c.port > 65535)
    return Error{Errc::invalid_value,
                 "port " + std::to_string(c.port) + " is out of range"};
  if (c.timeout_ms <= 0)
    return Error{Errc::invalid_value, "query timeout must be positive"};
  if (c.prefix.empty() || c.prefix.front() != '/')
    return Error{Errc::invalid_value, "dataset prefix must start with '/'"};
  return ok_status();
}

// CAKG_PORT, when set, wins over the configured port.
inline Result<std::optional<int>> env_port_override() {
  const char* raw = std::getenv("CAKG_PORT");
  if (raw == nullptr || *raw == '\0') return std::optional<int>{};
  char* end = nullptr;
  long v = std::strtol(raw, &end, 10);
  if (end == raw || *end != '\0' || v < 1 || v > 65535)
    return Error{Errc::invalid_value,
                 std::string("CAKG_PORT='") + raw + "' is not a valid port"};
  return std::optional<int>{static_cast<int>(v)};
}

namespace detail {

// "text/turtle; charset=utf-8" -> "text/turtle"
inline std::string media_type(std::string_view header) {
  auto semi = header.find(';');
  if (semi != std::string_view::npos) header = header.substr(0, semi);
  std::size_t b = 0, e = header.size();
  while (b < e && (header[b] == ' ' || header[b] == '\t')) ++b;
  while (e > b && (header[e - 1] == ' ' || header[e - 1] == '\t')) --e;
  std::string out(header.substr(b, e - b));
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c += 'a' - 'A';
  return out;
}

// Media ranges in listed order, parameters stripped. No q-value reordering:
// the first supported entry wins, which is all our two-format menus need.
inline std::vector<std::string> accept_ranges(const std::string& header) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= header.size()) {
    auto comma = header.find(',', pos);
    if (comma == std::string::npos) comma = header.size();
    std::string entry = media_type(
        std::string_view(header).substr(pos, comma - pos));
    if (!entry.empty()) out.push_back(std::move(entry));
    pos = comma + 1;
  }
  return out;
}

inline sparql::ResultFormat pick_result_format(const std::string& accept) {
  for (const auto& range : accept_ranges(accept)) {
    if (range == "application/sparql-results+json" ||
        range == "application/*" || range == "*/*")
      return sparql::ResultFormat::json;
    if (range == "text/csv" || range == "text/*")
      return sparql::ResultFormat::csv;
  }
  return sparql::ResultFormat::json;
}

inline turtle::Format pick_graph_format(const std::string& accept) {
  for (const auto& range : accept_ranges(accept)) {
    if (range == "text/turtle" || range == "text/*" || range == "*/*")
      return turtle::Format::turtle;
    if (range == "application/n-triples" || range == "application/*")
      return turtle::Format::ntriples;
  }
  return turtle::Format::turtle;
}

inline void plain(httplib::Response& res, int status, std::string body) {
  res.status = status;
  res.set_content(std::move(body), "text/plain");
}

}  // namespace detail

class Server {
 public:
  Server(store::TripleStore& store, EndpointConfig config)
      : store_(store), config_(std::move(config)) {
    register_routes();
  }

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;
  ~Server() { stop(); }

  // Binds and starts serving on a background thread. Returns once the
  // listener is accepting connections (or with the bind failure).
  Status start() {
    if (auto s = validate_config(config_); !s.ok()) return s;
    auto env = env_port_override();
    if (!env.ok()) return env.error();
    if (env.value().has_value()) config_.port = *env.value();

    // httplib defaults to SO_REUSEPORT, under which a second server can bind
    // the same port and silently share traffic. We want a clash to fail.
    http_.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                 reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    http_.set_payload_max_length(config_.max_body_bytes);
    if (config_.port == 0) {
      int got = http_.bind_to_any_port(config_.host);
      if (got <= 0)
        return Error{Errc::http_error, "cannot bind to " + config_.host};
      config_.port = got;
    } else if (!http_.bind_to_port(config_.host, config_.port)) {
      return Error{Errc::http_error, "cannot bind to " + config_.host + ":" +
                                         std::to_string(config_.port)};
    }
    worker_ = std::thread([this] { http_.listen_after_bind(); });
    http_.wait_until_ready();
    return ok_status();
  }

  // Stops accepting, lets in-flight handlers finish, joins the thread.
  void stop() {
    if (worker_.joinable()) {
      http_.stop();
      worker_.join();
    }
  }

  int port() const { return config_.port; }
  const EndpointConfig& config() const { return config_; }

 private:
  void register_routes() {
    const std::string sparql_path = config_.prefix + "/sparql";
    const std::string data_path = config_.prefix + "/data";
    http_.Get(sparql_path, [this](const httplib::Request& req,
                                  httplib::Response& res) {
      if (!req.has_param("query")) {
        detail::plain(res, 400, "missing required 'query' parameter");
        return;
      }
      run_query(req.get_param_value("query"), req, res);
    });
    http_.Post(sparql_path, [this](const httplib::Request& req,
                                   httplib::Response& res) {
      std::string ct = detail::media_type(req.get_header_value("Content-Type"));
      if (ct == "application/sparql-query") {
        run_query(req.body, req, res);
      } else if (ct == "application/x-www-form-urlencoded") {
        if (!req.has_param("query")) {
          detail::plain(res, 400, "missing required 'query' form field");
          return;
        }
        run_query(req.get_param_value("query"), req, res);
      } else {
        detail::plain(res, 415,
                      "unsupported content type '" + ct +
                          "'; use application/sparql-query or "
                          "application/x-www-form-urlencoded");
      }
    });

    http_.Get(data_path, [this](const httplib::Request& req,
                                httplib::Response& res) {
      if (!graph_params_ok(req, res)) return;
      auto format = detail::pick_graph_format(req.get_header_value("Accept"));
      std::set<Triple> triples = store_.dump();
      if (format == turtle::Format::turtle) {
        res.set_content(turtle::serialize_turtle(triples, {}), "text/turtle");
      } else {
        res.set_content(turtle::serialize_ntriples(triples),
                        "application/n-triples");
      }
    });
    http_.Put(data_path, [this](const httplib::Request& req,
                                httplib::Response& res) {
      mutate_graph(req, res, /*replace=*/true);
    });
    http_.Post(data_path, [this](const httplib::Request& req,
                                 httplib::Response& res) {
      mutate_graph(req, res, /*replace=*/false);
    });
    http_.Delete(data_path, [this](const httplib::Request& req,
                                   httplib::Response& res) {
      if (!graph_params_ok(req, res)) return;
      if (config_.read_only) {
        detail::plain(res, 403, "endpoint is read-only");
        return;
      }
      store_.clear();
      res.status = 204;
    });
  }

  // Only the default graph exists; explicit rejection beats silent
  // misbehavior. ?default is accepted and ignored.
  bool graph_params_ok(const httplib::Request& req, httplib::Response& res) {
    if (req.has_param("graph")) {
      detail::plain(res, 400, "named graphs unsupported");
      return false;
    }
    return true;
  }

  void run_query(const std::string& text, const httplib::Request& req,
                 httplib::Response& res) {
    auto query = sparql::parse_query(text);
    if (!query.ok()) {
      detail::plain(res, 400, query.error().to_string());
      return;
    }
    sparql::EvalOptions opt;
    opt.deadline = std::chrono::steady_clock::now() +
                   std::chrono::milliseconds(config_.timeout_ms);
    auto table = sparql::evaluate(query.value(), store_.read(), opt);
    if (!table.ok()) {
      if (table.error().code == Errc::timeout) {
        detail::plain(res, 503,
                      "query timed out after " +
                          std::to_string(config_.timeout_ms) + " ms");
      } else {
        detail::plain(res, 400, table.error().to_string());
      }
      return;
    }
    auto format = detail::pick_result_format(req.get_header_value("Accept"));
    res.set_content(sparql::serialize_results(table.value(), format),
                    format == sparql::ResultFormat::json
                        ? "application/sparql-results+json"
                        : "text/csv");
  }

  void mutate_graph(const httplib::Request& req, httplib::Response& res,
                    bool replace) {
    if (!graph_params_ok(req, res)) return;
    if (config_.read_only) {
      detail::plain(res, 403, "endpoint is read-only");
      return;
    }
    std::string ct = detail::media_type(req.get_header_value("Content-Type"));
    turtle::Format format;
    if (ct.empty() || ct == "text/turtle") {
      format = turtle::Format::turtle;
    } else if (ct == "application/n-triples") {
      format = turtle::Format::ntriples;
    } else {
      detail::plain(res, 415,
                    "unsupported content type '" + ct +
                        "'; use text/turtle or application/n-triples");
      return;
    }
    // Parse fully before touching the store so a bad body leaves it intact.
    auto triples = turtle::parse(req.body, format);
    if (!triples.ok()) {
      detail::plain(res, 400, triples.error().to_string());
      return;
    }
    if (replace)
      store_.replace(triples.value());
    else
      store_.insert(triples.value());
    res.status = 204;
  }

  store::TripleStore& store_;
  EndpointConfig config_;
  httplib::Server http_;
  std::thread worker_;
};

inline Result<std::unique_ptr<Server>> serve(store::TripleStore& store,
                                             EndpointConfig config) {
  auto server = std::make_unique<Server>(store, std::move(config));
  if (auto s = server->start(); !s.ok()) return s.error();
  return std::move(server);
}

inline void shutdown(Server& server) { server.stop(); }

}  // namespace cakg::endpoint

#endif  // CAKG_ENDPOINT_HPP
