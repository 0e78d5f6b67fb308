#pragma once

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cakg/ontology.hpp"
#include "cakg/rdf.hpp"
#include "cakg/result.hpp"
#include "cakg/turtle.hpp"

namespace cakg::ingest {

struct ColumnMapping {
  std::string column;       // CSV header name, e.g. "TAVG"
  std::string feature_key;  // registry key, e.g. "temperature"
  std::string measure_key;  // IRI segment, e.g. "tavg"
  std::optional<Iri> unit_override;
};

inline std::vector<ColumnMapping> default_mappings() {
  return {
      {"PRCP", "precipitation", "prcp", {}},
      {"TAVG", "temperature", "tavg", {}},
      {"TMAX", "temperature", "tmax", {}},
      {"TMIN", "temperature", "tmin", {}},
      {"AWND", "wind_speed", "awnd", {}},
  };
}

struct IngestConfig {
  std::vector<ColumnMapping> mappings = default_mappings();
  bool strict = false;
  std::optional<std::string> missing_sentinel;
  onto::OntologyConfig ontology;
};

struct Warning {
  int line = 0;
  std::string message;
};

struct ObservationRecord {
  onto::StationDescriptor station;
  Date date;
  std::string feature_key;
  std::string measure_key;
  std::string value;  // exact decimal lexical from the CSV

  bool operator==(const ObservationRecord&) const = default;
};

struct ParsedCsv {
  std::vector<ObservationRecord> records;
  std::vector<Warning> warnings;
  std::size_t rows = 0;  // data rows seen, excluding the header
};

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

struct CsvRow {
  int line = 0;  // 1-based line where the row starts
  std::vector<std::string> fields;
};

// RFC-4180 style reader: quoted fields, "" escapes, LF or CRLF endings.
inline Result<std::vector<CsvRow>> read_csv(std::string_view doc) {
  std::vector<CsvRow> rows;
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  int line = 1, row_start = 1;

  auto end_field = [&] {
    fields.push_back(field);
    field.clear();
    any = true;
  };
  auto end_row = [&] {
    end_field();
    bool blank = true;
    for (const auto& f : fields)
      if (!trim(f).empty()) blank = false;
    if (!blank) rows.push_back(CsvRow{row_start, fields});
    fields.clear();
    any = false;
    row_start = line;
  };

  for (std::size_t i = 0; i < doc.size(); ++i) {
    char c = doc[i];
    if (c == '\n') ++line;
    if (quoted) {
      if (c == '"') {
        if (i + 1 < doc.size() && doc[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (field.empty()) {
          quoted = true;
        } else {
          field += c;  // stray quote mid-field, kept literally
        }
        break;
      case ',': end_field(); break;
      case '\r': break;
      case '\n': end_row(); break;
      default: field += c; any = true;
    }
  }
  if (quoted)
    return Error{Errc::malformed_row, "unterminated quoted field", row_start};
  if (any || !field.empty() || !fields.empty()) end_row();
  return rows;
}

}  // namespace detail

inline Result<ParsedCsv> parse_cdo_csv(std::string_view document,
                                       const IngestConfig& config,
                                       const onto::FeatureRegistry& registry) {
  for (std::size_t i = 0; i < config.mappings.size(); ++i) {
    const ColumnMapping& m = config.mappings[i];
    if (!registry.find(m.feature_key))
      return Error{Errc::unknown_feature,
                   "mapping for column '" + m.column +
                       "' references unknown feature '" + m.feature_key + "'"};
    for (std::size_t j = i + 1; j < config.mappings.size(); ++j)
      if (config.mappings[j].column == m.column)
        return Error{Errc::invalid_value,
                     "column '" + m.column + "' mapped more than once"};
  }

  auto rows = detail::read_csv(document);
  if (!rows.ok()) return rows.error();
  if (rows.value().empty())
    return Error{Errc::missing_required_column, "document has no header row"};

  const detail::CsvRow& header = rows.value().front();
  std::map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < header.fields.size(); ++i)
    columns[detail::trim(header.fields[i])] = i;

  for (const char* required : {"STATION", "NAME", "LATITUDE", "LONGITUDE", "DATE"})
    if (!columns.count(required))
      return Error{Errc::missing_required_column,
                   std::string("required column ") + required + " is missing",
                   header.line};

  ParsedCsv out;

  // one summary warning for columns the mapping ignores
  {
    std::set<std::string> known{"STATION", "NAME", "LATITUDE", "LONGITUDE",
                                "DATE", "ELEVATION"};
    for (const auto& m : config.mappings) known.insert(m.column);
    std::string ignored;
    for (const auto& [name, idx] : columns)
      if (!known.count(name)) ignored += (ignored.empty() ? "" : ", ") + name;
    if (!ignored.empty())
      out.warnings.push_back(
          {header.line, "ignoring unmapped columns: " + ignored});
  }

  std::vector<std::pair<ColumnMapping, std::size_t>> active;
  for (const auto& m : config.mappings)
    if (auto it = columns.find(m.column); it != columns.end())
      active.emplace_back(m, it->second);

  auto elevation_col = columns.find("ELEVATION");
  std::map<std::string, onto::StationDescriptor> stations;

  for (std::size_t r = 1; r < rows.value().size(); ++r) {
    const detail::CsvRow& row = rows.value()[r];
    ++out.rows;

    auto row_problem = [&](std::string why) -> std::optional<Error> {
      if (config.strict)
        return Error{Errc::malformed_row, std::move(why), row.line};
      out.warnings.push_back({row.line, why + "; row skipped"});
      return std::nullopt;
    };

    if (row.fields.size() != header.fields.size()) {
      if (auto e = row_problem("expected " +
                               std::to_string(header.fields.size()) +
                               " fields, found " +
                               std::to_string(row.fields.size())))
        return *e;
      continue;
    }

    auto cell = [&](std::size_t idx) { return detail::trim(row.fields[idx]); };
    std::string id = cell(columns["STATION"]);
    std::string name = cell(columns["NAME"]);
    std::string lat = cell(columns["LATITUDE"]);
    std::string lon = cell(columns["LONGITUDE"]);
    std::optional<std::string> elev;
    if (elevation_col != columns.end()) {
      std::string e = cell(elevation_col->second);
      if (!e.empty()) elev = e;
    }

    auto station = onto::make_station(id, name, lat, lon, elev);
    if (!station.ok()) {
      if (auto e = row_problem(station.error().message)) return *e;
      continue;
    }

    auto date = parse_date(cell(columns["DATE"]));
    if (!date) {
      if (auto e = row_problem("DATE '" + cell(columns["DATE"]) +
                               "' is not a valid YYYY-MM-DD date"))
        return *e;
      continue;
    }

    // station metadata: first row mentioning the station wins
    auto [it, inserted] = stations.emplace(id, station.value());
    if (!inserted && it->second != station.value())
      out.warnings.push_back(
          {row.line, "conflicting metadata for station " + id +
                         "; keeping the first occurrence"});
    const onto::StationDescriptor& canonical = it->second;

    for (const auto& [mapping, idx] : active) {
      std::string value = cell(idx);
      if (value.empty()) continue;
      if (config.missing_sentinel && value == *config.missing_sentinel) continue;
      if (!is_decimal_lexical(value)) {
        std::string why = "value '" + value + "' in column " + mapping.column +
                          " is not a decimal";
        if (config.strict)
          return Error{Errc::malformed_cell, std::move(why), row.line};
        out.warnings.push_back({row.line, why + "; cell skipped"});
        continue;
      }
      out.records.push_back(ObservationRecord{canonical, *date,
                                              mapping.feature_key,
                                              mapping.measure_key, value});
    }
  }
  return out;
}

inline Result<std::set<Triple>> records_to_triples(
    const std::vector<ObservationRecord>& records,
    const onto::FeatureRegistry& registry, const onto::OntologyConfig& config = {}) {
  std::set<Triple> out;
  for (const ObservationRecord& rec : records) {
    const onto::ClimateFeature* feature = registry.find(rec.feature_key);
    if (!feature)
      return Error{Errc::unknown_feature,
                   "unknown feature '" + rec.feature_key + "'"};
    auto station = onto::build_station_triples(rec.station, config);
    if (!station.ok()) return station.error();
    out.merge(std::move(station).value());
    auto obs = onto::build_observation_triples(rec.station, *feature, rec.date,
                                               rec.measure_key, rec.value, config);
    if (!obs.ok()) return obs.error();
    out.merge(std::move(obs).value());
  }
  return out;
}

struct IngestReport {
  std::size_t rows = 0;
  std::size_t records = 0;
  std::size_t triples = 0;
  std::vector<Warning> warnings;
};

struct PipelineRun {
  IngestReport report;
  std::set<Triple> triples;
};

inline Result<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return Error{Errc::io_error, "cannot open '" + path + "' for reading"};
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) return Error{Errc::io_error, "read failure on '" + path + "'"};
  return std::move(buf).str();
}

inline Status write_file(const std::string& path, std::string_view contents) {
  std::ofstream outf(path, std::ios::binary | std::ios::trunc);
  if (!outf) return Error{Errc::io_error, "cannot open '" + path + "' for writing"};
  outf.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  outf.flush();
  if (!outf) return Error{Errc::io_error, "write failure on '" + path + "'"};
  return ok_status();
}

inline Result<PipelineRun> run_pipeline(const std::string& csv_path,
                                        const IngestConfig& config,
                                        const onto::FeatureRegistry& registry) {
  auto doc = read_file(csv_path);
  if (!doc.ok()) return doc.error();
  auto parsed = parse_cdo_csv(doc.value(), config, registry);
  if (!parsed.ok()) return parsed.error();
  auto triples = records_to_triples(parsed.value().records, registry,
                                    config.ontology);
  if (!triples.ok()) return triples.error();
  PipelineRun run;
  run.report.rows = parsed.value().rows;
  run.report.records = parsed.value().records.size();
  run.report.triples = triples.value().size();
  run.report.warnings = std::move(parsed.value().warnings);
  run.triples = std::move(triples).value();
  return run;
}

// Serializes the converted graph to Turtle; nothing is written until the
// whole pipeline has succeeded.
inline Result<IngestReport> run_pipeline_to_file(
    const std::string& csv_path, const std::string& out_path,
    const IngestConfig& config, const onto::FeatureRegistry& registry) {
  auto run = run_pipeline(csv_path, config, registry);
  if (!run.ok()) return run.error();
  turtle::SerializationConfig ser;
  ser.prefixes = onto::default_prefixes(config.ontology);
  std::string doc = turtle::serialize_turtle(run.value().triples, ser);
  if (auto s = write_file(out_path, doc); !s.ok()) return s.error();
  return run.value().report;
}

}  // namespace cakg::ingest
