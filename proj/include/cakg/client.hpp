#ifndef CAKG_CLIENT_HPP
#define CAKG_CLIENT_HPP

// Minimal SPARQL protocol client: enough to query this project's endpoint
// (or any conformant one) and get results back as bytes or a BindingTable.

#include <string>
#include <utility>

#include "cakg/result.hpp"
#include "cakg/sparql.hpp"
#include "httplib.h"

namespace cakg::client {

struct UrlParts {
  std::string base;  // "http://host:port"
  std::string path;  // "/ds/sparql"
};

inline Result<UrlParts> split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos || url.compare(0, 4, "http") != 0)
    return Error{Errc::invalid_value,
                 "endpoint URL must start with http:// or https://"};
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return UrlParts{url, "/"};
  return UrlParts{url.substr(0, path_start), url.substr(path_start)};
}

struct HttpReply {
  int status = 0;
  std::string body;
  std::string content_type;
};

inline Result<HttpReply> post_sparql(const std::string& endpoint_url,
                                     const std::string& query_text,
                                     const std::string& accept) {
  auto parts = split_url(endpoint_url);
  if (!parts.ok()) return parts.error();
  httplib::Client http(parts.value().base);
  http.set_connection_timeout(10, 0);
  http.set_read_timeout(60, 0);
  httplib::Headers headers{{"Accept", accept}};
  auto res = http.Post(parts.value().path, headers, query_text,
                       "application/sparql-query");
  if (!res)
    return Error{Errc::http_error, "request to " + endpoint_url +
                                       " failed: " + to_string(res.error())};
  return HttpReply{res->status, res->body,
                   res->get_header_value("Content-Type")};
}

// Returns the response body on 2xx; otherwise the status and body are
// surfaced in the error message so the caller can show the diagnostic.
inline Result<std::string> query_remote(
    const std::string& endpoint_url, const std::string& query_text,
    const std::string& accept = "application/sparql-results+json") {
  auto reply = post_sparql(endpoint_url, query_text, accept);
  if (!reply.ok()) return reply.error();
  if (reply.value().status < 200 || reply.value().status >= 300)
    return Error{Errc::http_error,
                 "endpoint returned " + std::to_string(reply.value().status) +
                     ": " + reply.value().body};
  return std::move(reply).value().body;
}

inline Result<sparql::BindingTable> query_remote_table(
    const std::string& endpoint_url, const std::string& query_text) {
  auto body = query_remote(endpoint_url, query_text);
  if (!body.ok()) return body.error();
  return sparql::results_from_json(body.value());
}

}  // namespace cakg::client

#endif  // CAKG_CLIENT_HPP
