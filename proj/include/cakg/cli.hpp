#ifndef CAKG_CLI_HPP
#define CAKG_CLI_HPP

// The cakg command line tool: ingest / ontology / serve / query / stats.
// Exit codes: 0 success, 1 usage error, 2 data or IO error (one-line cause).

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "cakg/analytics.hpp"
#include "cakg/client.hpp"
#include "cakg/endpoint.hpp"
#include "cakg/ingest.hpp"
#include "cakg/ontology.hpp"
#include "cakg/result.hpp"
#include "cakg/sparql.hpp"
#include "cakg/store.hpp"
#include "cakg/turtle.hpp"

namespace cakg::cli {

namespace detail {

inline std::atomic<bool> g_interrupted{false};

inline void handle_signal(int) { g_interrupted.store(true); }

inline Result<onto::OntologyConfig> ontology_config(
    const std::string& base_iri, bool standard_sosa) {
  if (base_iri.empty()) {
    onto::OntologyConfig cfg;
    cfg.standard_sosa = standard_sosa;
    return cfg;
  }
  return onto::OntologyConfig::from_base(base_iri, standard_sosa);
}

// Snapshots are detected by their magic bytes, anything else is Turtle
// (which covers N-Triples documents too).
inline Status load_store(store::TripleStore& store, const std::string& path) {
  auto doc = ingest::read_file(path);
  if (!doc.ok()) return doc.error();
  if (doc.value().compare(0, 4, "CAKG") == 0)
    return store.load_snapshot(path);
  auto triples = turtle::parse(doc.value(), turtle::Format::turtle);
  if (!triples.ok()) {
    Error e = triples.error();
    e.message = path + ": " + e.message;
    return e;
  }
  store.insert(triples.value());
  return ok_status();
}

inline bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Prints exactly the payload bytes plus a final newline when missing, so
// local and remote runs of the same query stay byte-identical on stdout.
inline void print_payload(const std::string& body) {
  std::cout << body;
  if (body.empty() || body.back() != '\n') std::cout << '\n';
}

struct StatsSource {
  std::string endpoint;
  std::string data_file;
};

inline Result<std::vector<analytics::SeriesPoint>> collect_from_source(
    const StatsSource& source, store::TripleStore& store,
    const std::string& station, const std::string& feature, int from, int to,
    const onto::OntologyConfig& cfg) {
  if (!source.endpoint.empty()) {
    analytics::QueryFn remote = [&](const std::string& q) {
      return client::query_remote_table(source.endpoint, q);
    };
    return analytics::collect_series(remote, station, feature, from, to, cfg);
  }
  if (auto s = load_store(store, source.data_file); !s.ok()) return s.error();
  return analytics::collect_series(store, station, feature, from, to, cfg);
}

}  // namespace detail

inline int run(int argc, const char* const argv[]) {
  CLI::App app{"Climate knowledge graph toolkit: convert NOAA CDO daily "
               "CSV exports to RDF, serve them over SPARQL, and reproduce "
               "the monthly/trend analyses."};
  app.require_subcommand(1);
  argv = app.ensure_utf8(const_cast<char**>(argv));

  std::string base_iri;
  bool standard_sosa = false;
  app.add_option("--base-iri", base_iri,
                 "base IRI for the CA namespaces (CAKG_BASE_IRI)")
      ->envname("CAKG_BASE_IRI");
  app.add_flag("--standard-sosa", standard_sosa,
               "emit sosa:madeBySensor instead of the CA spelling");

  // --- ingest
  auto* ingest_cmd =
      app.add_subcommand("ingest", "convert a CDO CSV export to RDF");
  std::string csv_path, ingest_out;
  bool strict = false, as_snapshot = false;
  std::string sentinel;
  ingest_cmd->add_option("--csv", csv_path, "input CSV file")->required();
  ingest_cmd->add_option("--out", ingest_out, "output file (.ttl or .cakg)")
      ->required();
  ingest_cmd->add_flag("--strict", strict, "fail on malformed cells");
  ingest_cmd->add_flag("--snapshot", as_snapshot,
                       "write a store snapshot instead of Turtle");
  ingest_cmd->add_option("--missing-sentinel", sentinel,
                         "cell value to treat as absent (besides blanks)");

  // --- ontology
  auto* onto_cmd =
      app.add_subcommand("ontology", "write the CA ontology document");
  std::string onto_out;
  onto_cmd->add_option("--out", onto_out, "output Turtle file")->required();

  // --- serve
  auto* serve_cmd =
      app.add_subcommand("serve", "publish a store over HTTP until Ctrl-C");
  std::string serve_data, host = "127.0.0.1", prefix = "/ds";
  int port = 3030, timeout_ms = 10000;
  std::size_t max_body = 16u << 20;
  bool read_only = false;
  serve_cmd->add_option("--data", serve_data,
                        "Turtle or snapshot file to load (default: empty)");
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "port (CAKG_PORT overrides)");
  serve_cmd->add_option("--prefix", prefix, "dataset path prefix");
  serve_cmd->add_option("--timeout-ms", timeout_ms, "query timeout budget");
  serve_cmd->add_option("--max-body", max_body, "request body byte limit");
  serve_cmd->add_flag("--read-only", read_only, "reject mutations with 403");

  // --- query
  auto* query_cmd = app.add_subcommand("query", "run a SPARQL query");
  std::string q_endpoint, q_data, q_file, q_text, q_format = "json";
  query_cmd->add_option("--endpoint", q_endpoint, "SPARQL endpoint URL");
  query_cmd->add_option("--data", q_data, "local Turtle or snapshot file");
  query_cmd->add_option("--file", q_file, "file holding the query");
  query_cmd->add_option("--query", q_text, "query text inline");
  query_cmd->add_option("--format", q_format, "json or csv")
      ->check(CLI::IsMember({"json", "csv"}));

  // --- stats
  auto* stats_cmd =
      app.add_subcommand("stats", "monthly box-plot or trend-bucket tables");
  stats_cmd->require_subcommand(1);
  auto* monthly_cmd =
      stats_cmd->add_subcommand("monthly", "per-month statistics table");
  auto* trend_cmd =
      stats_cmd->add_subcommand("trend", "multi-year bucket means table");
  std::string s_endpoint, s_data, s_station, s_feature, s_out,
      s_format = "csv";
  int s_from = 0, s_to = 0, s_span = 5;
  for (CLI::App* sub : {monthly_cmd, trend_cmd}) {
    sub->add_option("--endpoint", s_endpoint, "SPARQL endpoint URL");
    sub->add_option("--data", s_data, "local Turtle or snapshot file");
    sub->add_option("--station", s_station, "station label")->required();
    sub->add_option("--feature", s_feature, "feature key, e.g. temperature")
        ->required();
    sub->add_option("--from", s_from, "first year")->required();
    sub->add_option("--to", s_to, "last year")->required();
    sub->add_option("--format", s_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", s_out, "output file (default: stdout)");
  }
  trend_cmd->add_option("--span", s_span, "bucket width in years")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "cakg: " << e.what() << "\n"
              << "Run 'cakg --help' for usage.\n";
    return 1;
  }

  auto fail = [](const Error& e) {
    std::cerr << "cakg: " << e.to_string() << "\n";
    return 2;
  };

  auto cfg = detail::ontology_config(base_iri, standard_sosa);
  if (!cfg.ok()) return fail(cfg.error());

  if (*ingest_cmd) {
    ingest::IngestConfig config;
    config.strict = strict;
    config.ontology = cfg.value();
    if (!sentinel.empty()) config.missing_sentinel = sentinel;
    auto registry = onto::FeatureRegistry::builtin(cfg.value());
    auto run = ingest::run_pipeline(csv_path, config, registry);
    if (!run.ok()) return fail(run.error());
    const auto& report = run.value().report;
    if (as_snapshot || detail::ends_with(ingest_out, ".cakg")) {
      store::TripleStore store;
      store.insert(run.value().triples);
      if (auto s = store.save_snapshot(ingest_out); !s.ok())
        return fail(s.error());
    } else {
      turtle::SerializationConfig ser;
      ser.prefixes = onto::default_prefixes(cfg.value());
      auto doc = turtle::serialize_turtle(run.value().triples, ser);
      if (auto s = ingest::write_file(ingest_out, doc); !s.ok())
        return fail(s.error());
    }
    for (const auto& w : report.warnings)
      std::cerr << csv_path << ":" << w.line << ": " << w.message << "\n";
    std::cout << "rows=" << report.rows << " records=" << report.records
              << " triples=" << report.triples
              << " warnings=" << report.warnings.size() << "\n";
    return 0;
  }

  if (*onto_cmd) {
    auto registry = onto::FeatureRegistry::builtin(cfg.value());
    auto doc = onto::emit_ontology_document(registry, cfg.value());
    if (auto s = ingest::write_file(onto_out, doc); !s.ok())
      return fail(s.error());
    std::cout << "wrote " << onto_out << "\n";
    return 0;
  }

  if (*serve_cmd) {
    store::TripleStore store;
    if (!serve_data.empty())
      if (auto s = detail::load_store(store, serve_data); !s.ok())
        return fail(s.error());
    endpoint::EndpointConfig config;
    config.host = host;
    config.port = port;
    config.prefix = prefix;
    config.read_only = read_only;
    config.max_body_bytes = max_body;
    config.timeout_ms = timeout_ms;
    auto server = endpoint::serve(store, config);
    if (!server.ok()) return fail(server.error());
    std::cout << "serving " << store.size() << " triples on http://" << host
              << ":" << server.value()->port() << prefix << "\n"
              << "press Ctrl-C to stop\n";
    detail::g_interrupted.store(false);
    std::signal(SIGINT, detail::handle_signal);
    std::signal(SIGTERM, detail::handle_signal);
    while (!detail::g_interrupted.load())
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.value()->stop();
    std::cout << "stopped\n";
    return 0;
  }

  if (*query_cmd) {
    if (q_text.empty() == q_file.empty()) {
      std::cerr << "cakg: query needs exactly one of --query or --file\n";
      return 1;
    }
    if (q_endpoint.empty() == q_data.empty()) {
      std::cerr << "cakg: query needs exactly one of --endpoint or --data\n";
      return 1;
    }
    if (!q_file.empty()) {
      auto doc = ingest::read_file(q_file);
      if (!doc.ok()) return fail(doc.error());
      q_text = doc.value();
    }
    if (!q_endpoint.empty()) {
      std::string accept = q_format == "csv"
                               ? "text/csv"
                               : "application/sparql-results+json";
      auto body = client::query_remote(q_endpoint, q_text, accept);
      if (!body.ok()) return fail(body.error());
      detail::print_payload(body.value());
      return 0;
    }
    store::TripleStore store;
    if (auto s = detail::load_store(store, q_data); !s.ok())
      return fail(s.error());
    auto query = sparql::parse_query(q_text);
    if (!query.ok()) return fail(query.error());
    auto table = sparql::evaluate(query.value(), store.read());
    if (!table.ok()) return fail(table.error());
    detail::print_payload(sparql::serialize_results(
        table.value(), q_format == "csv" ? sparql::ResultFormat::csv
                                         : sparql::ResultFormat::json));
    return 0;
  }

  // stats
  CLI::App* chosen = *monthly_cmd ? monthly_cmd : trend_cmd;
  if (s_endpoint.empty() == s_data.empty()) {
    std::cerr << "cakg: stats needs exactly one of --endpoint or --data\n";
    return 1;
  }
  store::TripleStore store;
  auto series = detail::collect_from_source({s_endpoint, s_data}, store,
                                            s_station, s_feature, s_from,
                                            s_to, cfg.value());
  if (!series.ok()) return fail(series.error());
  auto format = s_format == "json" ? analytics::TableFormat::json
                                   : analytics::TableFormat::csv;
  std::string table =
      chosen == monthly_cmd
          ? analytics::render_table(analytics::monthly_summary(series.value()),
                                    format)
          : analytics::render_table(
                analytics::trend_buckets(series.value(), s_from, s_span),
                format);
  if (s_out.empty()) {
    detail::print_payload(table);
    return 0;
  }
  if (auto s = ingest::write_file(s_out, table); !s.ok()) return fail(s.error());
  std::cout << "wrote " << s_out << "\n";
  return 0;
}

}  // namespace cakg::cli

#endif  // CAKG_CLI_HPP
