#include "cakg/ontology.hpp"

#include <gtest/gtest.h>

#include <algorithm>

#include "cakg/turtle.hpp"

namespace cakg::onto {
namespace {

StationDescriptor shanghai() {
  return make_station("ST001", "SHANGHAI", "31.40", "121.46").value();
}

const ClimateFeature& temperature() {
  static FeatureRegistry r = FeatureRegistry::builtin();
  return *r.find("temperature");
}

TEST(Features, BuiltinRegistryCoversTheFourFamilies) {
  FeatureRegistry r = FeatureRegistry::builtin();
  ASSERT_EQ(r.features().size(), 4u);

  const ClimateFeature* t = r.find("temperature");
  ASSERT_NE(t, nullptr);
  EXPECT_EQ(t->observation_class.value,
            "http://example.org/ca#TemperatureObservation");
  EXPECT_EQ(t->sensor_class.value, "http://example.org/ca#TemperatureSensor");
  EXPECT_EQ(t->result_class.value, "http://example.org/ca#TemperatureResult");
  EXPECT_EQ(t->observed_property.value,
            "http://purl.oclc.org/NET/ssnx/cf/cf-property#air_temperature");
  EXPECT_EQ(t->unit.value, "http://qudt.org/vocab/unit/DEG_C");

  const ClimateFeature* w = r.find("wind_speed");
  ASSERT_NE(w, nullptr);
  EXPECT_EQ(w->observation_class.value,
            "http://example.org/ca#WindSpeedObservation");
  EXPECT_EQ(w->unit.value, "http://qudt.org/vocab/unit/M-PER-SEC");

  const ClimateFeature* slp = r.find("sea_level_pressure");
  ASSERT_NE(slp, nullptr);
  EXPECT_EQ(slp->sensor_class.value,
            "http://example.org/ca#SeaLevelPressureSensor");
  EXPECT_EQ(slp->observed_property.value,
            "http://purl.oclc.org/NET/ssnx/cf/cf-property#"
            "air_pressure_at_sea_level");

  EXPECT_EQ(r.find("precipitation")->unit.value,
            "http://qudt.org/vocab/unit/MilliM");
  EXPECT_EQ(r.find("nope"), nullptr);
}

TEST(Features, ClassIrisShareTheCapitalizedStem) {
  FeatureRegistry r = FeatureRegistry::builtin();
  for (const ClimateFeature& f : r.features()) {
    std::string stem = camel_stem(f.key);
    auto local_ends = [&](const Iri& iri, const std::string& suffix) {
      std::string want = stem + suffix;
      return iri.value.size() > want.size() &&
             iri.value.substr(iri.value.size() - want.size()) == want;
    };
    EXPECT_TRUE(local_ends(f.observation_class, "Observation")) << f.key;
    EXPECT_TRUE(local_ends(f.sensor_class, "Sensor")) << f.key;
    EXPECT_TRUE(local_ends(f.result_class, "Result")) << f.key;
  }
}

TEST(Features, RegistryRejectsDuplicatesAndMismatchedStems) {
  FeatureRegistry r;
  ASSERT_TRUE(r.add(make_feature("temperature",
                                 vocab::cf_property("air_temperature"),
                                 vocab::qudt_unit_iri("DEG_C")))
                  .ok());
  EXPECT_FALSE(r.add(make_feature("temperature",
                                  vocab::cf_property("air_temperature"),
                                  vocab::qudt_unit_iri("DEG_C")))
                   .ok());

  ClimateFeature broken = make_feature("humidity", vocab::cf_property("x"),
                                       vocab::qudt_unit_iri("PERCENT"));
  broken.sensor_class = Iri{"http://example.org/ca#WrongSensor"};
  EXPECT_FALSE(r.add(broken).ok());
}

TEST(Stations, RangeValidation) {
  EXPECT_TRUE(make_station("S", "N", "-90", "180").ok());
  EXPECT_TRUE(make_station("S", "N", "90.0", "-180.0").ok());
  auto bad_lat = make_station("S", "N", "91.0", "0");
  ASSERT_FALSE(bad_lat.ok());
  EXPECT_EQ(bad_lat.error().code, Errc::invalid_value);
  EXPECT_FALSE(make_station("S", "N", "0", "180.01").ok());
  EXPECT_FALSE(make_station("S", "N", "abc", "0").ok());
  EXPECT_FALSE(make_station("", "N", "0", "0").ok());
  EXPECT_EQ(make_station("", "N", "0", "0").error().code,
            Errc::invalid_station_id);
  EXPECT_FALSE(make_station("S", "N", "0", "0", "high").ok());
  EXPECT_TRUE(make_station("S", "N", "0", "0", "5.0").ok());
}

TEST(Minting, FollowsTheIriTemplates) {
  auto m = mint_iris(shanghai(), temperature(), Date{2020, 9, 1}, "tavg");
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m.value().station.value, "http://example.org/ca/station/ST001");
  EXPECT_EQ(m.value().sensor.value,
            "http://example.org/ca/sensor/ST001/temperature");
  EXPECT_EQ(m.value().observation.value,
            "http://example.org/ca/obs/ST001/2020-09-01/tavg");
  EXPECT_EQ(m.value().result.value,
            "http://example.org/ca/result/ST001/2020-09-01/tavg");
}

TEST(Minting, DeterministicAndEncoded) {
  auto a = mint_iris(shanghai(), temperature(), Date{2020, 9, 1}, "tavg");
  auto b = mint_iris(shanghai(), temperature(), Date{2020, 9, 1}, "tavg");
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(a.value().observation, b.value().observation);
  EXPECT_EQ(a.value().result, b.value().result);

  StationDescriptor odd = make_station("A B", "X", "0", "0").value();
  auto m = mint_iris(odd, temperature(), Date{2020, 9, 1}, "tavg");
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m.value().station.value, "http://example.org/ca/station/A%20B");
  EXPECT_NE(m.value().observation.value.find("/obs/A%20B/"), std::string::npos);

  StationDescriptor bad{"", "X", "0", "0", {}};
  EXPECT_EQ(mint_iris(bad, temperature(), Date{2020, 9, 1}, "t").error().code,
            Errc::invalid_station_id);
}

TEST(Minting, PercentEncodesReservedBytes) {
  EXPECT_EQ(percent_encode("abc-XYZ_0.~"), "abc-XYZ_0.~");
  EXPECT_EQ(percent_encode("a b"), "a%20b");
  EXPECT_EQ(percent_encode("a/b#c?"), "a%2Fb%23c%3F");
  EXPECT_EQ(percent_encode("50%"), "50%25");
}

TEST(StationTriples, FourWithoutElevationFiveWith) {
  auto four = build_station_triples(shanghai());
  ASSERT_TRUE(four.ok());
  EXPECT_EQ(four.value().size(), 4u);
  Iri s{"http://example.org/ca/station/ST001"};
  std::set<Triple> expected{
      {s, vocab::rdf_type(), Term(Iri{"http://example.org/ca#Station"})},
      {s, vocab::rdfs_label(), string_literal("SHANGHAI")},
      {s, vocab::wgs84_lat(), decimal_literal("31.40")},
      {s, vocab::wgs84_long(), decimal_literal("121.46")},
  };
  EXPECT_EQ(four.value(), expected);

  StationDescriptor with_alt =
      make_station("ST002", "DUBLIN", "53.36", "-6.32", "5.0").value();
  auto five = build_station_triples(with_alt);
  ASSERT_TRUE(five.ok());
  EXPECT_EQ(five.value().size(), 5u);
  EXPECT_TRUE(five.value().count(
      {Iri{"http://example.org/ca/station/ST002"}, vocab::wgs84_alt(),
       Term(decimal_literal("5.0"))}));
}

TEST(ObservationTriples, ExactlyTheEightTripleShape) {
  auto got = build_observation_triples(shanghai(), temperature(),
                                       Date{2020, 9, 1}, "tavg", "25.4");
  ASSERT_TRUE(got.ok());
  Iri sensor{"http://example.org/ca/sensor/ST001/temperature"};
  Iri obs{"http://example.org/ca/obs/ST001/2020-09-01/tavg"};
  Iri result{"http://example.org/ca/result/ST001/2020-09-01/tavg"};
  std::set<Triple> expected{
      {sensor, vocab::rdf_type(), Term(temperature().sensor_class)},
      {sensor, vocab::sosa_is_hosted_by(),
       Term(Iri{"http://example.org/ca/station/ST001"})},
      {obs, vocab::rdf_type(), Term(temperature().observation_class)},
      {obs, vocab::sosa_is_made_by_sensor(), Term(sensor)},
      {obs, vocab::sosa_result_time(),
       Term(Literal{"2020-09-01", vocab::xsd_date(), ""})},
      {obs, vocab::sosa_observed_property(), Term(temperature().observed_property)},
      {obs, vocab::sosa_has_result(), Term(result)},
      {result, vocab::qudt_numeric_value(), Term(decimal_literal("25.4"))},
  };
  EXPECT_EQ(got.value(), expected);
  EXPECT_EQ(got.value().size(), 8u);
}

TEST(ObservationTriples, EightSortedNtriplesLines) {
  auto got = build_observation_triples(shanghai(), temperature(),
                                       Date{2020, 9, 1}, "tavg", "25.4");
  ASSERT_TRUE(got.ok());
  std::string nt = turtle::serialize_ntriples(got.value());
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < nt.size()) {
    auto end = nt.find('\n', start);
    lines.push_back(nt.substr(start, end - start));
    start = end + 1;
  }
  EXPECT_EQ(lines.size(), 8u);
  EXPECT_TRUE(std::is_sorted(lines.begin(), lines.end()));
}

TEST(ObservationTriples, SensorTriplesAreDateIndependent) {
  auto day1 = build_observation_triples(shanghai(), temperature(),
                                        Date{2020, 9, 1}, "tavg", "25.4");
  auto day2 = build_observation_triples(shanghai(), temperature(),
                                        Date{2020, 9, 2}, "tavg", "24.9");
  ASSERT_TRUE(day1.ok() && day2.ok());
  Iri sensor{"http://example.org/ca/sensor/ST001/temperature"};
  for (const auto& set : {day1.value(), day2.value()}) {
    int sensor_triples = 0;
    for (const Triple& t : set)
      if (t.subject == sensor) ++sensor_triples;
    EXPECT_EQ(sensor_triples, 2);
  }
  for (const Triple& t : day1.value())
    if (t.subject == sensor) EXPECT_TRUE(day2.value().count(t));

  // dedup union over N dates: 2 + 6N
  std::set<Triple> uni = day1.value();
  uni.insert(day2.value().begin(), day2.value().end());
  EXPECT_EQ(uni.size(), 2u + 6u * 2u);
}

TEST(ObservationTriples, SingleResultTimePropertyAndResultEdges) {
  auto got = build_observation_triples(shanghai(), temperature(),
                                       Date{1951, 1, 17}, "tmax", "9.5");
  ASSERT_TRUE(got.ok());
  int result_time = 0, observed = 0, has_result = 0;
  for (const Triple& t : got.value()) {
    if (t.predicate == vocab::sosa_result_time()) ++result_time;
    if (t.predicate == vocab::sosa_observed_property()) ++observed;
    if (t.predicate == vocab::sosa_has_result()) ++has_result;
  }
  EXPECT_EQ(result_time, 1);
  EXPECT_EQ(observed, 1);
  EXPECT_EQ(has_result, 1);
}

TEST(ObservationTriples, PrecipitationUsesItsOwnClassesAndProperty) {
  FeatureRegistry r = FeatureRegistry::builtin();
  auto got = build_observation_triples(shanghai(), *r.find("precipitation"),
                                       Date{2020, 9, 1}, "prcp", "0");
  ASSERT_TRUE(got.ok());
  Iri obs{"http://example.org/ca/obs/ST001/2020-09-01/prcp"};
  EXPECT_TRUE(got.value().count(
      {obs, vocab::rdf_type(),
       Term(Iri{"http://example.org/ca#PrecipitationObservation"})}));
  EXPECT_TRUE(got.value().count(
      {obs, vocab::sosa_observed_property(),
       Term(Iri{"http://purl.oclc.org/NET/ssnx/cf/cf-property#"
                "precipitation_amount"})}));
}

TEST(ObservationTriples, StandardSosaFlagSwitchesTheSpelling) {
  OntologyConfig standard;
  standard.standard_sosa = true;
  auto got = build_observation_triples(shanghai(), temperature(),
                                       Date{2020, 9, 1}, "tavg", "25.4", standard);
  ASSERT_TRUE(got.ok());
  bool has_standard = false, has_paper = false;
  for (const Triple& t : got.value()) {
    if (t.predicate == vocab::sosa_made_by_sensor()) has_standard = true;
    if (t.predicate == vocab::sosa_is_made_by_sensor()) has_paper = true;
  }
  EXPECT_TRUE(has_standard);
  EXPECT_FALSE(has_paper);
}

TEST(ObservationTriples, RejectsNonDecimalValues) {
  auto got = build_observation_triples(shanghai(), temperature(),
                                       Date{2020, 9, 1}, "tavg", "NaN");
  ASSERT_FALSE(got.ok());
  EXPECT_EQ(got.error().code, Errc::invalid_value);
}

TEST(OntologyDocument, ThirteenSubclassAxiomsForBuiltins) {
  FeatureRegistry r = FeatureRegistry::builtin();
  std::string doc = emit_ontology_document(r);
  EXPECT_NE(
      doc.find("ca:TemperatureObservation rdfs:subClassOf sosa:Observation ."),
      std::string::npos);
  EXPECT_NE(doc.find("ca:Station rdfs:subClassOf sosa:Platform ."),
            std::string::npos);

  auto parsed = turtle::parse(doc, turtle::Format::turtle);
  ASSERT_TRUE(parsed.ok()) << parsed.error().to_string();
  std::size_t subclass = 0;
  for (const Triple& t : parsed.value())
    if (t.predicate == vocab::rdfs_subclass_of()) ++subclass;
  EXPECT_EQ(subclass, 13u);
  EXPECT_EQ(parsed.value().size(), 13u);
}

TEST(OntologyDocument, EmptyRegistryKeepsOnlyTheStationAxiom) {
  FeatureRegistry empty;
  auto parsed =
      turtle::parse(emit_ontology_document(empty), turtle::Format::turtle);
  ASSERT_TRUE(parsed.ok());
  ASSERT_EQ(parsed.value().size(), 1u);
  EXPECT_EQ(parsed.value().begin()->subject.value, "http://example.org/ca#Station");
  EXPECT_EQ(parsed.value().begin()->object,
            Term(Iri{"http://www.w3.org/ns/sosa/Platform"}));
}

TEST(OntologyConfig, FromBaseDerivesBothNamespaces) {
  auto cfg = OntologyConfig::from_base("http://my.org/kg/");
  ASSERT_TRUE(cfg.ok());
  EXPECT_EQ(cfg.value().class_ns.value, "http://my.org/kg#");
  EXPECT_EQ(cfg.value().instance_ns.value, "http://my.org/kg/");
  EXPECT_FALSE(OntologyConfig::from_base("not a iri").ok());

  auto m = mint_station_iri(shanghai(), cfg.value());
  ASSERT_TRUE(m.ok());
  EXPECT_EQ(m.value().value, "http://my.org/kg/station/ST001");
}

}  // namespace
}  // namespace cakg::onto
