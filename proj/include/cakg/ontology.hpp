#pragma once

#include <cstdio>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cakg/rdf.hpp"
#include "cakg/result.hpp"
#include "cakg/turtle.hpp"

namespace cakg {

namespace vocab {

inline constexpr std::string_view kSosaNs = "http://www.w3.org/ns/sosa/";
inline constexpr std::string_view kWgs84Ns =
    "http://www.w3.org/2003/01/geo/wgs84_pos#";
inline constexpr std::string_view kQudtNs = "http://qudt.org/schema/qudt/";
inline constexpr std::string_view kQudtUnitNs = "http://qudt.org/vocab/unit/";
inline constexpr std::string_view kCfNs =
    "http://purl.oclc.org/NET/ssnx/cf/cf-property#";

inline const Iri& sosa_observation() {
  static const Iri v{std::string(kSosaNs) + "Observation"};
  return v;
}
inline const Iri& sosa_sensor() {
  static const Iri v{std::string(kSosaNs) + "Sensor"};
  return v;
}
inline const Iri& sosa_result() {
  static const Iri v{std::string(kSosaNs) + "Result"};
  return v;
}
inline const Iri& sosa_platform() {
  static const Iri v{std::string(kSosaNs) + "Platform"};
  return v;
}
inline const Iri& sosa_is_hosted_by() {
  static const Iri v{std::string(kSosaNs) + "isHostedBy"};
  return v;
}
// The published vocabulary spells this sosa:madeBySensor; the default here
// follows the CA ontology's own property list.
inline const Iri& sosa_is_made_by_sensor() {
  static const Iri v{std::string(kSosaNs) + "isMadeBySensor"};
  return v;
}
inline const Iri& sosa_made_by_sensor() {
  static const Iri v{std::string(kSosaNs) + "madeBySensor"};
  return v;
}
inline const Iri& sosa_result_time() {
  static const Iri v{std::string(kSosaNs) + "resultTime"};
  return v;
}
inline const Iri& sosa_observed_property() {
  static const Iri v{std::string(kSosaNs) + "observedProperty"};
  return v;
}
inline const Iri& sosa_has_result() {
  static const Iri v{std::string(kSosaNs) + "hasResult"};
  return v;
}

inline const Iri& wgs84_lat() {
  static const Iri v{std::string(kWgs84Ns) + "lat"};
  return v;
}
inline const Iri& wgs84_long() {
  static const Iri v{std::string(kWgs84Ns) + "long"};
  return v;
}
inline const Iri& wgs84_alt() {
  static const Iri v{std::string(kWgs84Ns) + "alt"};
  return v;
}

inline const Iri& qudt_numeric_value() {
  static const Iri v{std::string(kQudtNs) + "numericValue"};
  return v;
}
inline const Iri& qudt_unit() {
  static const Iri v{std::string(kQudtNs) + "unit"};
  return v;
}

inline Iri qudt_unit_iri(std::string_view code) {
  return Iri{std::string(kQudtUnitNs) + std::string(code)};
}

inline Iri cf_property(std::string_view name) {
  return Iri{std::string(kCfNs) + std::string(name)};
}

}  // namespace vocab

namespace onto {

struct OntologyConfig {
  Iri class_ns{"http://example.org/ca#"};
  Iri instance_ns{"http://example.org/ca/"};
  bool standard_sosa = false;  // emit sosa:madeBySensor instead of the CA spelling

  // Derives both namespaces from one base ("http://example.org/ca").
  static Result<OntologyConfig> from_base(std::string base,
                                          bool standard_sosa = false) {
    while (!base.empty() && (base.back() == '#' || base.back() == '/'))
      base.pop_back();
    auto checked = validate_iri(base);
    if (!checked.ok()) return checked.error();
    OntologyConfig cfg;
    cfg.class_ns = Iri{base + "#"};
    cfg.instance_ns = Iri{base + "/"};
    cfg.standard_sosa = standard_sosa;
    return cfg;
  }

  const Iri& made_by_sensor() const {
    return standard_sosa ? vocab::sosa_made_by_sensor()
                         : vocab::sosa_is_made_by_sensor();
  }

  Iri station_class() const { return Iri{class_ns.value + "Station"}; }
};

// "sea_level_pressure" -> "SeaLevelPressure"
inline std::string camel_stem(std::string_view key) {
  std::string out;
  bool upper = true;
  for (char c : key) {
    if (c == '_') {
      upper = true;
      continue;
    }
    if (upper && c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    upper = false;
    out += c;
  }
  return out;
}

struct ClimateFeature {
  std::string key;
  Iri observation_class;
  Iri sensor_class;
  Iri result_class;
  Iri observed_property;
  Iri unit;

  bool operator==(const ClimateFeature&) const = default;
};

inline ClimateFeature make_feature(std::string key, Iri observed_property,
                                   Iri unit, const OntologyConfig& config = {}) {
  std::string stem = camel_stem(key);
  const std::string& ns = config.class_ns.value;
  return ClimateFeature{std::move(key),
                        Iri{ns + stem + "Observation"},
                        Iri{ns + stem + "Sensor"},
                        Iri{ns + stem + "Result"},
                        std::move(observed_property),
                        std::move(unit)};
}

class FeatureRegistry {
 public:
  Status add(ClimateFeature feature) {
    if (feature.key.empty())
      return Error{Errc::unknown_feature, "feature key must not be empty"};
    if (find(feature.key))
      return Error{Errc::unknown_feature,
                   "duplicate feature key '" + feature.key + "'"};
    std::string stem = camel_stem(feature.key);
    auto ends_with_stem = [&](const Iri& cls, std::string_view suffix) {
      std::string want = stem + std::string(suffix);
      return cls.value.size() >= want.size() &&
             cls.value.compare(cls.value.size() - want.size(), want.size(),
                               want) == 0;
    };
    if (!ends_with_stem(feature.observation_class, "Observation") ||
        !ends_with_stem(feature.sensor_class, "Sensor") ||
        !ends_with_stem(feature.result_class, "Result"))
      return Error{Errc::unknown_feature,
                   "class IRIs for '" + feature.key +
                       "' do not share the capitalized stem '" + stem + "'"};
    features_.push_back(std::move(feature));
    return ok_status();
  }

  const ClimateFeature* find(std::string_view key) const {
    for (const auto& f : features_)
      if (f.key == key) return &f;
    return nullptr;
  }

  const std::vector<ClimateFeature>& features() const { return features_; }

  static FeatureRegistry builtin(const OntologyConfig& config = {}) {
    FeatureRegistry r;
    (void)r.add(make_feature("temperature", vocab::cf_property("air_temperature"),
                             vocab::qudt_unit_iri("DEG_C"), config));
    (void)r.add(make_feature("precipitation",
                             vocab::cf_property("precipitation_amount"),
                             vocab::qudt_unit_iri("MilliM"), config));
    (void)r.add(make_feature("wind_speed", vocab::cf_property("wind_speed"),
                             vocab::qudt_unit_iri("M-PER-SEC"), config));
    (void)r.add(make_feature("sea_level_pressure",
                             vocab::cf_property("air_pressure_at_sea_level"),
                             vocab::qudt_unit_iri("HectoPA"), config));
    return r;
  }

 private:
  std::vector<ClimateFeature> features_;
};

struct StationDescriptor {
  std::string station_id;
  std::string name;
  std::string latitude;   // exact decimal lexical, degrees WGS84
  std::string longitude;  // exact decimal lexical, degrees WGS84
  std::optional<std::string> elevation;  // meters

  bool operator==(const StationDescriptor&) const = default;
};

inline Result<StationDescriptor> make_station(
    std::string station_id, std::string name, std::string latitude,
    std::string longitude, std::optional<std::string> elevation = {}) {
  if (station_id.empty())
    return Error{Errc::invalid_station_id, "station id must not be empty"};
  auto range = [](const std::string& lexical, const char* low, const char* high,
                  const char* what) -> Status {
    if (!is_decimal_lexical(lexical))
      return Error{Errc::invalid_value,
                   std::string(what) + " '" + lexical + "' is not a decimal"};
    if (compare_decimal_lexicals(lexical, low) < 0 ||
        compare_decimal_lexicals(lexical, high) > 0)
      return Error{Errc::invalid_value, std::string(what) + " " + lexical +
                                            " outside [" + low + ", " + high + "]"};
    return ok_status();
  };
  if (auto s = range(latitude, "-90", "90", "latitude"); !s.ok()) return s.error();
  if (auto s = range(longitude, "-180", "180", "longitude"); !s.ok())
    return s.error();
  if (elevation && !is_decimal_lexical(*elevation))
    return Error{Errc::invalid_value,
                 "elevation '" + *elevation + "' is not a decimal"};
  return StationDescriptor{std::move(station_id), std::move(name),
                           std::move(latitude), std::move(longitude),
                           std::move(elevation)};
}

// RFC 3986 unreserved characters stay, everything else becomes %XX.
inline std::string percent_encode(std::string_view raw) {
  std::string out;
  for (unsigned char c : raw) {
    bool keep = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                (c >= '0' && c <= '9') || c == '-' || c == '.' || c == '_' ||
                c == '~';
    if (keep) {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

struct MintedIris {
  Iri station;
  Iri sensor;
  Iri observation;
  Iri result;
};

inline Result<Iri> mint_station_iri(const StationDescriptor& station,
                                    const OntologyConfig& config = {}) {
  if (station.station_id.empty())
    return Error{Errc::invalid_station_id, "station id must not be empty"};
  return Iri{config.instance_ns.value + "station/" +
             percent_encode(station.station_id)};
}

inline Result<MintedIris> mint_iris(const StationDescriptor& station,
                                    const ClimateFeature& feature,
                                    const Date& date,
                                    const std::string& measure_key,
                                    const OntologyConfig& config = {}) {
  auto station_iri = mint_station_iri(station, config);
  if (!station_iri.ok()) return station_iri.error();
  const std::string& base = config.instance_ns.value;
  std::string id = percent_encode(station.station_id);
  std::string when = format_date(date);
  std::string measure = percent_encode(measure_key);
  return MintedIris{
      std::move(station_iri).value(),
      Iri{base + "sensor/" + id + "/" + percent_encode(feature.key)},
      Iri{base + "obs/" + id + "/" + when + "/" + measure},
      Iri{base + "result/" + id + "/" + when + "/" + measure},
  };
}

inline Result<std::set<Triple>> build_station_triples(
    const StationDescriptor& station, const OntologyConfig& config = {}) {
  auto minted = mint_station_iri(station, config);
  if (!minted.ok()) return minted.error();
  const Iri& s = minted.value();
  std::set<Triple> out{
      {s, vocab::rdf_type(), Term(config.station_class())},
      {s, vocab::rdfs_label(), string_literal(station.name)},
      {s, vocab::wgs84_lat(), decimal_literal(station.latitude)},
      {s, vocab::wgs84_long(), decimal_literal(station.longitude)},
  };
  if (station.elevation)
    out.insert({s, vocab::wgs84_alt(), decimal_literal(*station.elevation)});
  return out;
}

// The per-record graph shape: two sensor triples shared across dates plus
// six date-specific observation/result triples.
inline Result<std::set<Triple>> build_observation_triples(
    const StationDescriptor& station, const ClimateFeature& feature,
    const Date& date, const std::string& measure_key, const std::string& value,
    const OntologyConfig& config = {}) {
  if (!is_decimal_lexical(value))
    return Error{Errc::invalid_value,
                 "observation value '" + value + "' is not a decimal"};
  auto minted = mint_iris(station, feature, date, measure_key, config);
  if (!minted.ok()) return minted.error();
  const MintedIris& m = minted.value();
  return std::set<Triple>{
      {m.sensor, vocab::rdf_type(), Term(feature.sensor_class)},
      {m.sensor, vocab::sosa_is_hosted_by(), Term(m.station)},
      {m.observation, vocab::rdf_type(), Term(feature.observation_class)},
      {m.observation, config.made_by_sensor(), Term(m.sensor)},
      {m.observation, vocab::sosa_result_time(), Term(date_literal(date))},
      {m.observation, vocab::sosa_observed_property(),
       Term(feature.observed_property)},
      {m.observation, vocab::sosa_has_result(), Term(m.result)},
      {m.result, vocab::qudt_numeric_value(), Term(decimal_literal(value))},
  };
}

inline PrefixMap ontology_prefixes(const OntologyConfig& config = {}) {
  PrefixMap p;
  (void)p.add("ca", config.class_ns);
  (void)p.add("sosa", Iri{std::string(vocab::kSosaNs)});
  (void)p.add("rdfs", Iri{std::string(vocab::kRdfsNs)});
  return p;
}

// Prefixes used when serializing instance data.
inline PrefixMap default_prefixes(const OntologyConfig& config = {}) {
  PrefixMap p = ontology_prefixes(config);
  (void)p.add("xsd", Iri{std::string(vocab::kXsdNs)});
  (void)p.add("wgs84", Iri{std::string(vocab::kWgs84Ns)});
  (void)p.add("qudt", Iri{std::string(vocab::kQudtNs)});
  (void)p.add("unit", Iri{std::string(vocab::kQudtUnitNs)});
  (void)p.add("cf", Iri{std::string(vocab::kCfNs)});
  return p;
}

// Subclass axioms tying each feature's classes (and ca:Station) to SOSA.
inline std::set<Triple> ontology_triples(const FeatureRegistry& registry,
                                         const OntologyConfig& config = {}) {
  std::set<Triple> out{{config.station_class(), vocab::rdfs_subclass_of(),
                        Term(vocab::sosa_platform())}};
  for (const ClimateFeature& f : registry.features()) {
    out.insert({f.observation_class, vocab::rdfs_subclass_of(),
                Term(vocab::sosa_observation())});
    out.insert({f.sensor_class, vocab::rdfs_subclass_of(),
                Term(vocab::sosa_sensor())});
    out.insert(
        {f.result_class, vocab::rdfs_subclass_of(), Term(vocab::sosa_result())});
  }
  return out;
}

inline std::string emit_ontology_document(const FeatureRegistry& registry,
                                          const OntologyConfig& config = {}) {
  turtle::SerializationConfig ser;
  ser.prefixes = ontology_prefixes(config);
  return turtle::serialize_turtle(ontology_triples(registry, config), ser);
}

}  // namespace onto
}  // namespace cakg
