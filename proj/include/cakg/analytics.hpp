#ifndef CAKG_ANALYTICS_HPP
#define CAKG_ANALYTICS_HPP

// Station time-series analyses over the graph: monthly box-plot statistics
// and multi-year trend buckets. Series are collected through the public
// SPARQL path (local engine or a remote endpoint), never by raw store scans,
// so the analyses exercise the same machinery a Web client would.

#include <algorithm>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cakg/decimal.hpp"
#include "cakg/ontology.hpp"
#include "cakg/rdf.hpp"
#include "cakg/result.hpp"
#include "cakg/sparql.hpp"
#include "cakg/store.hpp"
#include "cakg/turtle.hpp"
#include "json.hpp"

namespace cakg::analytics {

using QueryFn =
    std::function<Result<sparql::BindingTable>(const std::string&)>;

inline QueryFn local_query_fn(const store::TripleStore& store) {
  return [&store](const std::string& text) -> Result<sparql::BindingTable> {
    auto query = sparql::parse_query(text);
    if (!query.ok()) return query.error();
    return sparql::evaluate(query.value(), store.read());
  };
}

struct SeriesPoint {
  Date date;
  std::string value;  // exact decimal lexical as stored

  bool operator==(const SeriesPoint&) const = default;
};

namespace detail {

inline std::string iri(const Iri& i) { return "<" + i.value + ">"; }

inline std::string quoted(const std::string& s) {
  return "\"" + turtle::escape_literal(s) + "\"";
}

inline std::string date_bound(int year, bool end) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "\"%04d-%s\"", year,
                end ? "12-31" : "01-01");
  return std::string(buf) + "^^<http://www.w3.org/2001/XMLSchema#date>";
}

}  // namespace detail

// The cookbook lookup: station by label, sensor hosted there, observations
// of the feature's property, chained to the result value, bounded by date.
inline std::string series_query(const std::string& station_label,
                                const onto::ClimateFeature& feature,
                                int year_from, int year_to,
                                const onto::OntologyConfig& config = {}) {
  std::string q = "SELECT ?date ?value WHERE {\n";
  q += "  ?station " + detail::iri(vocab::rdf_type()) + " " +
       detail::iri(config.station_class()) + " .\n";
  q += "  ?station " + detail::iri(vocab::rdfs_label()) + " " +
       detail::quoted(station_label) + " .\n";
  q += "  ?sensor " + detail::iri(vocab::sosa_is_hosted_by()) + " ?station .\n";
  q += "  ?obs " + detail::iri(config.made_by_sensor()) + " ?sensor .\n";
  q += "  ?obs " + detail::iri(vocab::sosa_observed_property()) + " " +
       detail::iri(feature.observed_property) + " .\n";
  q += "  ?obs " + detail::iri(vocab::sosa_result_time()) + " ?date .\n";
  q += "  ?obs " + detail::iri(vocab::sosa_has_result()) + " ?result .\n";
  q += "  ?result " + detail::iri(vocab::qudt_numeric_value()) + " ?value .\n";
  q += "  FILTER (?date >= " + detail::date_bound(year_from, false) +
       " && ?date <= " + detail::date_bound(year_to, true) + ")\n";
  q += "}\nORDER BY ?date ?value";
  return q;
}

inline Result<std::vector<SeriesPoint>> collect_series(
    const QueryFn& query, const std::string& station_label,
    const std::string& feature_key, int year_from, int year_to,
    const onto::OntologyConfig& config = {}) {
  if (year_from > year_to || year_from < 0 || year_to > 9999)
    return Error{Errc::invalid_value,
                 "year range " + std::to_string(year_from) + ".." +
                     std::to_string(year_to) + " is not valid"};
  auto registry = onto::FeatureRegistry::builtin(config);
  const onto::ClimateFeature* feature = registry.find(feature_key);
  if (feature == nullptr)
    return Error{Errc::unknown_feature,
                 "unknown feature '" + feature_key + "'"};

  std::string probe = "SELECT ?station WHERE { ?station " +
                      detail::iri(vocab::rdf_type()) + " " +
                      detail::iri(config.station_class()) + " . ?station " +
                      detail::iri(vocab::rdfs_label()) + " " +
                      detail::quoted(station_label) + " . } LIMIT 1";
  auto stations = query(probe);
  if (!stations.ok()) return stations.error();
  if (stations.value().rows.empty())
    return Error{Errc::station_not_found,
                 "no station labeled '" + station_label + "'"};

  auto table =
      query(series_query(station_label, *feature, year_from, year_to, config));
  if (!table.ok()) return table.error();

  std::vector<SeriesPoint> out;
  out.reserve(table.value().rows.size());
  for (const auto& row : table.value().rows) {
    if (row.size() != 2 || !row[0] || !row[1])
      return Error{Errc::invalid_value, "series row is not (date, value)"};
    const auto* date = std::get_if<Literal>(&*row[0]);
    const auto* value = std::get_if<Literal>(&*row[1]);
    if (date == nullptr || value == nullptr)
      return Error{Errc::invalid_value, "series row is not (date, value)"};
    auto parsed = parse_date(date->lexical);
    if (!parsed)
      return Error{Errc::invalid_value,
                   "'" + date->lexical + "' is not a date"};
    out.push_back(SeriesPoint{*parsed, value->lexical});
  }
  return out;
}

inline Result<std::vector<SeriesPoint>> collect_series(
    const store::TripleStore& store, const std::string& station_label,
    const std::string& feature_key, int year_from, int year_to,
    const onto::OntologyConfig& config = {}) {
  return collect_series(local_query_fn(store), station_label, feature_key,
                        year_from, year_to, config);
}

// All emitted statistics are canonical decimal lexicals (minimal digits, at
// least one fractional digit); interpolation and means round half-even at
// scale 6. Months without data carry null statistics.
struct MonthlySummary {
  int month = 1;  // 1..12
  std::size_t count = 0;
  std::optional<std::string> mean;
  std::optional<std::string> median;
  std::optional<std::string> q1;
  std::optional<std::string> q3;
  std::optional<std::string> min;
  std::optional<std::string> max;

  bool operator==(const MonthlySummary&) const = default;
};

struct TrendBucket {
  int start_year = 0;
  int span_years = 5;
  std::optional<std::string> mean;
  std::size_t count = 0;  // a trailing partial window shows as a low count

  bool operator==(const TrendBucket&) const = default;
};

namespace detail {

// Linear-interpolation quantile at position p*(n-1), zero-indexed, with
// p = quarters/4. Exact except for half-even rounding at scale 6.
inline Decimal quantile(const std::vector<Decimal>& sorted, int quarters) {
  std::size_t steps = (sorted.size() - 1) * static_cast<std::size_t>(quarters);
  std::size_t lo = steps / 4;
  int rem = static_cast<int>(steps % 4);
  if (rem == 0) return sorted[lo];
  Decimal diff = sorted[lo + 1] - sorted[lo];
  return sorted[lo] + diff.mul_div_half_even(rem, 4);
}

inline Decimal mean_of(const std::vector<Decimal>& values) {
  Decimal sum;
  for (Decimal v : values) sum = sum + v;
  return sum.div_half_even_by(static_cast<std::int64_t>(values.size()));
}

}  // namespace detail

inline std::vector<MonthlySummary> monthly_summary(
    const std::vector<SeriesPoint>& series) {
  std::vector<std::vector<Decimal>> buckets(12);
  for (const auto& point : series) {
    auto v = Decimal::parse(point.value);
    if (v && point.date.month >= 1 && point.date.month <= 12)
      buckets[point.date.month - 1].push_back(*v);
  }
  std::vector<MonthlySummary> out(12);
  for (int m = 0; m < 12; ++m) {
    auto& values = buckets[m];
    MonthlySummary& row = out[m];
    row.month = m + 1;
    row.count = values.size();
    if (values.empty()) continue;
    std::sort(values.begin(), values.end());
    row.mean = detail::mean_of(values).to_lexical();
    row.median = detail::quantile(values, 2).to_lexical();
    row.q1 = detail::quantile(values, 1).to_lexical();
    row.q3 = detail::quantile(values, 3).to_lexical();
    row.min = values.front().to_lexical();
    row.max = values.back().to_lexical();
  }
  return out;
}

// Consecutive [start, start+span) year windows from start_year through the
// last year present in the series; earlier points are out of scope.
inline std::vector<TrendBucket> trend_buckets(
    const std::vector<SeriesPoint>& series, int start_year,
    int span_years = 5) {
  std::vector<TrendBucket> out;
  if (span_years < 1) return out;
  int last_year = start_year - 1;
  for (const auto& point : series)
    last_year = std::max(last_year, point.date.year);
  for (int y = start_year; y <= last_year; y += span_years) {
    TrendBucket bucket{y, span_years, std::nullopt, 0};
    Decimal sum;
    for (const auto& point : series) {
      if (point.date.year < y || point.date.year >= y + span_years) continue;
      auto v = Decimal::parse(point.value);
      if (!v) continue;
      sum = sum + *v;
      ++bucket.count;
    }
    if (bucket.count > 0)
      bucket.mean =
          sum.div_half_even_by(static_cast<std::int64_t>(bucket.count))
              .to_lexical();
    out.push_back(std::move(bucket));
  }
  return out;
}

enum class TableFormat { csv, json };

namespace detail {

inline std::string cell(const std::optional<std::string>& v) {
  return v ? *v : std::string();
}

inline nlohmann::ordered_json json_cell(const std::optional<std::string>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace detail

inline std::string render_table(const std::vector<MonthlySummary>& rows,
                                TableFormat format) {
  if (format == TableFormat::csv) {
    std::string out = "month,count,mean,median,q1,q3,min,max\n";
    for (const auto& r : rows) {
      out += std::to_string(r.month) + "," + std::to_string(r.count) + "," +
             detail::cell(r.mean) + "," + detail::cell(r.median) + "," +
             detail::cell(r.q1) + "," + detail::cell(r.q3) + "," +
             detail::cell(r.min) + "," + detail::cell(r.max) + "\n";
    }
    return out;
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["month"] = r.month;
    row["count"] = r.count;
    row["mean"] = detail::json_cell(r.mean);
    row["median"] = detail::json_cell(r.median);
    row["q1"] = detail::json_cell(r.q1);
    row["q3"] = detail::json_cell(r.q3);
    row["min"] = detail::json_cell(r.min);
    row["max"] = detail::json_cell(r.max);
    doc.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

inline std::string render_table(const std::vector<TrendBucket>& rows,
                                TableFormat format) {
  if (format == TableFormat::csv) {
    std::string out = "start_year,span_years,mean,count\n";
    for (const auto& r : rows) {
      out += std::to_string(r.start_year) + "," +
             std::to_string(r.span_years) + "," + detail::cell(r.mean) + "," +
             std::to_string(r.count) + "\n";
    }
    return out;
  }
  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json row;
    row["start_year"] = r.start_year;
    row["span_years"] = r.span_years;
    row["mean"] = detail::json_cell(r.mean);
    row["count"] = r.count;
    doc.push_back(std::move(row));
  }
  return doc.dump(2) + "\n";
}

template <typename Rows>
inline Status emit_table(const Rows& rows, TableFormat format,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    return Error{Errc::io_error, "cannot open '" + path + "' for writing"};
  std::string doc = render_table(rows, format);
  out.write(doc.data(), static_cast<std::streamsize>(doc.size()));
  out.flush();
  if (!out) return Error{Errc::io_error, "write failure on '" + path + "'"};
  return ok_status();
}

}  // namespace cakg::analytics

#endif  // CAKG_ANALYTICS_HPP
