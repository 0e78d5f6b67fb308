#include "cakg/ingest.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <random>

#include "cakg/turtle.hpp"

namespace cakg::ingest {
namespace {

const char* kHeader = "STATION,NAME,LATITUDE,LONGITUDE,DATE,TAVG,PRCP\n";

const onto::FeatureRegistry& registry() {
  static onto::FeatureRegistry r = onto::FeatureRegistry::builtin();
  return r;
}

Result<ParsedCsv> parse(const std::string& doc, IngestConfig cfg = {}) {
  return parse_cdo_csv(doc, cfg, registry());
}

std::string data_path(const std::string& name) {
  return std::string(CAKG_TEST_DATA_DIR) + "/" + name;
}

TEST(ParseCsv, EmptyCellsAreSkippedWithoutWarnings) {
  auto r = parse(std::string(kHeader) + "S1,NAME,10,20,2020-09-01,25.4,\n");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value().records.size(), 1u);
  const ObservationRecord& rec = r.value().records[0];
  EXPECT_EQ(rec.feature_key, "temperature");
  EXPECT_EQ(rec.measure_key, "tavg");
  EXPECT_EQ(rec.value, "25.4");
  EXPECT_EQ(rec.date, (Date{2020, 9, 1}));
  EXPECT_EQ(rec.station.name, "NAME");
  EXPECT_TRUE(r.value().warnings.empty());
  EXPECT_EQ(r.value().rows, 1u);
}

TEST(ParseCsv, HeaderOnlyYieldsNothing) {
  auto r = parse(kHeader);
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.value().records.empty());
  EXPECT_TRUE(r.value().warnings.empty());
  EXPECT_EQ(r.value().rows, 0u);
}

TEST(ParseCsv, TwoStationsThreeDatesTwoMeasures) {
  std::string doc = kHeader;
  for (const char* sid : {"S1", "S2"})
    for (int d = 1; d <= 3; ++d)
      doc += std::string(sid) + ",N,10,20,2020-09-0" + std::to_string(d) +
             ",25.4,1.2\n";
  auto r = parse(doc);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value().records.size(), 12u);
}

TEST(ParseCsv, MissingRequiredColumnIsFatal) {
  auto r = parse("STATION,NAME,LATITUDE,DATE,TAVG\nS1,N,10,2020-09-01,25.4\n");
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code, Errc::missing_required_column);
  EXPECT_NE(r.error().message.find("LONGITUDE"), std::string::npos);

  EXPECT_EQ(parse("").error().code, Errc::missing_required_column);
}

TEST(ParseCsv, QuotedFieldsWithCommasAndEscapedQuotes) {
  auto r = parse(std::string(kHeader) +
                 "S1,\"SHANGHAI, CN \"\"HONGQIAO\"\"\",10,20,2020-09-01,25.4,\n");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value().records.size(), 1u);
  EXPECT_EQ(r.value().records[0].station.name, "SHANGHAI, CN \"HONGQIAO\"");
}

TEST(ParseCsv, CrlfAndMissingFinalNewline) {
  auto r = parse(std::string(kHeader) +
                 "S1,N,10,20,2020-09-01,25.4,\r\nS1,N,10,20,2020-09-02,24.0,");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value().records.size(), 2u);
  EXPECT_EQ(r.value().rows, 2u);
}

TEST(ParseCsv, UnmappedColumnsGetOneSummaryWarning) {
  std::string doc =
      "STATION,NAME,LATITUDE,LONGITUDE,DATE,TAVG,SNOW,WT01\n"
      "S1,N,10,20,2020-09-01,25.4,3,1\n";
  auto r = parse(doc);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value().warnings.size(), 1u);
  EXPECT_NE(r.value().warnings[0].message.find("SNOW"), std::string::npos);
  EXPECT_NE(r.value().warnings[0].message.find("WT01"), std::string::npos);
  EXPECT_EQ(r.value().records.size(), 1u);
}

TEST(ParseCsv, MalformedValueCellSkippedOrFatal) {
  std::string doc = std::string(kHeader) +
                    "S1,N,10,20,2020-09-01,oops,1.2\n"
                    "S1,N,10,20,2020-09-02,25.0,\n";
  auto lax = parse(doc);
  ASSERT_TRUE(lax.ok());
  EXPECT_EQ(lax.value().records.size(), 2u);  // PRCP row 1 + TAVG row 2
  ASSERT_EQ(lax.value().warnings.size(), 1u);
  EXPECT_EQ(lax.value().warnings[0].line, 2);

  IngestConfig strict;
  strict.strict = true;
  auto r = parse(doc, strict);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code, Errc::malformed_cell);
  EXPECT_EQ(r.error().line, 2);
}

TEST(ParseCsv, MalformedRowSkippedOrFatal) {
  std::string bad_date = std::string(kHeader) +
                         "S1,N,10,20,09/01/2020,25.4,\n"
                         "S1,N,10,20,2020-09-02,25.0,\n";
  auto lax = parse(bad_date);
  ASSERT_TRUE(lax.ok());
  EXPECT_EQ(lax.value().records.size(), 1u);
  EXPECT_EQ(lax.value().rows, 2u);
  ASSERT_EQ(lax.value().warnings.size(), 1u);

  IngestConfig strict;
  strict.strict = true;
  auto fatal = parse(bad_date, strict);
  ASSERT_FALSE(fatal.ok());
  EXPECT_EQ(fatal.error().code, Errc::malformed_row);
  EXPECT_EQ(fatal.error().line, 2);

  std::string short_row = std::string(kHeader) + "S1,N,10,20\n";
  auto lax2 = parse(short_row);
  ASSERT_TRUE(lax2.ok());
  EXPECT_TRUE(lax2.value().records.empty());
  EXPECT_EQ(lax2.value().warnings.size(), 1u);
  EXPECT_FALSE(parse(short_row, strict).ok());
}

TEST(ParseCsv, BadCoordinatesAreRowProblems) {
  auto r = parse(std::string(kHeader) + "S1,N,91.0,20,2020-09-01,25.4,\n");
  ASSERT_TRUE(r.ok());
  EXPECT_TRUE(r.value().records.empty());
  ASSERT_EQ(r.value().warnings.size(), 1u);
  EXPECT_NE(r.value().warnings[0].message.find("latitude"), std::string::npos);
}

TEST(ParseCsv, FirstStationMetadataWins) {
  std::string doc = std::string(kHeader) +
                    "S1,N,10,20,2020-09-01,25.4,\n"
                    "S1,OTHER,11,20,2020-09-02,24.0,\n";
  auto r = parse(doc);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value().records.size(), 2u);
  EXPECT_EQ(r.value().records[1].station.name, "N");
  EXPECT_EQ(r.value().records[1].station.latitude, "10");
  ASSERT_EQ(r.value().warnings.size(), 1u);
  EXPECT_NE(r.value().warnings[0].message.find("S1"), std::string::npos);
}

TEST(ParseCsv, MissingSentinelTreatedAsEmpty) {
  IngestConfig cfg;
  cfg.missing_sentinel = "-9999";
  auto r = parse(std::string(kHeader) + "S1,N,10,20,2020-09-01,-9999,1.2\n", cfg);
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value().records.size(), 1u);
  EXPECT_EQ(r.value().records[0].measure_key, "prcp");
  EXPECT_TRUE(r.value().warnings.empty());
}

TEST(ParseCsv, ElevationColumnFlowsIntoTheDescriptor) {
  auto r = parse(
      "STATION,NAME,LATITUDE,LONGITUDE,ELEVATION,DATE,TAVG,PRCP\n"
      "S1,N,10,20,5.0,2020-09-01,25.4,\n");
  ASSERT_TRUE(r.ok());
  ASSERT_EQ(r.value().records.size(), 1u);
  ASSERT_TRUE(r.value().records[0].station.elevation.has_value());
  EXPECT_EQ(*r.value().records[0].station.elevation, "5.0");
}

TEST(ParseCsv, RejectsBadMappingConfigs) {
  IngestConfig dup;
  dup.mappings = {{"TAVG", "temperature", "tavg", {}},
                  {"TAVG", "temperature", "t2", {}}};
  EXPECT_FALSE(parse(kHeader, dup).ok());

  IngestConfig unknown;
  unknown.mappings = {{"TAVG", "no_such_feature", "tavg", {}}};
  auto r = parse(kHeader, unknown);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code, Errc::unknown_feature);
}

TEST(RecordsToTriples, SizeFormulaHolds) {
  auto one = parse(std::string(kHeader) + "S1,N,10,20,2020-09-01,25.4,\n");
  ASSERT_TRUE(one.ok());
  auto t1 = records_to_triples(one.value().records, registry());
  ASSERT_TRUE(t1.ok());
  EXPECT_EQ(t1.value().size(), 4u + 2u + 6u);

  auto two = parse(std::string(kHeader) +
                   "S1,N,10,20,2020-09-01,25.4,\n"
                   "S1,N,10,20,2020-09-02,24.0,\n");
  ASSERT_TRUE(two.ok());
  auto t2 = records_to_triples(two.value().records, registry());
  ASSERT_TRUE(t2.ok());
  EXPECT_EQ(t2.value().size(), 4u + 2u + 12u);
}

TEST(RecordsToTriples, IdempotentUnionAndOrderIndependence) {
  auto parsed = parse(std::string(kHeader) +
                      "S1,N,10,20,2020-09-01,25.4,1.2\n"
                      "S2,M,30,40,2020-09-01,20.0,\n");
  ASSERT_TRUE(parsed.ok());
  auto records = parsed.value().records;

  auto once = records_to_triples(records, registry());
  std::vector<ObservationRecord> doubled = records;
  doubled.insert(doubled.end(), records.begin(), records.end());
  auto twice = records_to_triples(doubled, registry());
  ASSERT_TRUE(once.ok() && twice.ok());
  EXPECT_EQ(once.value(), twice.value());

  std::vector<ObservationRecord> shuffled = records;
  std::mt19937 rng(3);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  auto permuted = records_to_triples(shuffled, registry());
  ASSERT_TRUE(permuted.ok());
  EXPECT_EQ(once.value(), permuted.value());
}

TEST(RecordsToTriples, UnknownFeatureKeyFails) {
  ObservationRecord rec{onto::make_station("S", "N", "0", "0").value(),
                        Date{2020, 9, 1}, "mystery", "m", "1.0"};
  auto r = records_to_triples({rec}, registry());
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code, Errc::unknown_feature);
}

TEST(RecordsToTriples, ValuePathIsLossless) {
  auto parsed = parse(std::string(kHeader) + "S1,N,10,20,2020-09-01,25.4,0.0\n");
  ASSERT_TRUE(parsed.ok());
  auto triples = records_to_triples(parsed.value().records, registry());
  ASSERT_TRUE(triples.ok());
  for (const ObservationRecord& rec : parsed.value().records) {
    auto minted = onto::mint_iris(rec.station, *registry().find(rec.feature_key),
                                  rec.date, rec.measure_key);
    ASSERT_TRUE(minted.ok());
    EXPECT_TRUE(triples.value().count({minted.value().observation,
                                       vocab::sosa_has_result(),
                                       Term(minted.value().result)}));
    EXPECT_TRUE(triples.value().count({minted.value().result,
                                       vocab::qudt_numeric_value(),
                                       Term(decimal_literal(rec.value))}));
  }
}

TEST(Pipeline, FixtureCountsMatchTheIndependentOracle) {
  auto run = run_pipeline(data_path("fixture_cdo.csv"), {}, registry());
  ASSERT_TRUE(run.ok()) << run.error().to_string();
  EXPECT_EQ(run.value().report.rows, 100u);
  EXPECT_EQ(run.value().report.records, 200u);
  EXPECT_EQ(run.value().report.triples, 1216u);
  EXPECT_TRUE(run.value().report.warnings.empty());
  EXPECT_EQ(run.value().triples.size(), 1216u);
}

TEST(Pipeline, TurtleOutputIsDeterministicAndReparsable) {
  std::string out1 = std::string(::testing::TempDir()) + "/cakg_fix1.ttl";
  std::string out2 = std::string(::testing::TempDir()) + "/cakg_fix2.ttl";
  auto r1 = run_pipeline_to_file(data_path("fixture_cdo.csv"), out1, {}, registry());
  auto r2 = run_pipeline_to_file(data_path("fixture_cdo.csv"), out2, {}, registry());
  ASSERT_TRUE(r1.ok() && r2.ok());

  auto b1 = read_file(out1);
  auto b2 = read_file(out2);
  ASSERT_TRUE(b1.ok() && b2.ok());
  EXPECT_EQ(b1.value(), b2.value());

  auto parsed = turtle::parse(b1.value(), turtle::Format::turtle);
  ASSERT_TRUE(parsed.ok()) << parsed.error().to_string();
  EXPECT_EQ(parsed.value().size(), 1216u);

  auto direct = run_pipeline(data_path("fixture_cdo.csv"), {}, registry());
  ASSERT_TRUE(direct.ok());
  EXPECT_EQ(parsed.value(), direct.value().triples);

  std::remove(out1.c_str());
  std::remove(out2.c_str());
}

TEST(Pipeline, ZeroRowCsvWritesHeaderOnlyTurtle) {
  std::string csv = std::string(::testing::TempDir()) + "/cakg_empty.csv";
  std::string out = std::string(::testing::TempDir()) + "/cakg_empty.ttl";
  ASSERT_TRUE(write_file(csv, kHeader).ok());
  auto r = run_pipeline_to_file(csv, out, {}, registry());
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value().records, 0u);
  EXPECT_EQ(r.value().triples, 0u);
  auto body = read_file(out);
  ASSERT_TRUE(body.ok());
  EXPECT_NE(body.value().find("@prefix ca:"), std::string::npos);
  EXPECT_EQ(body.value().find(" a "), std::string::npos);
  std::remove(csv.c_str());
  std::remove(out.c_str());
}

TEST(Pipeline, UnreadableInputProducesNoOutputFile) {
  std::string out = std::string(::testing::TempDir()) + "/cakg_none.ttl";
  std::remove(out.c_str());
  auto r = run_pipeline_to_file("/nonexistent/input.csv", out, {}, registry());
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code, Errc::io_error);
  std::ifstream check(out);
  EXPECT_FALSE(check.good());
}

}  // namespace
}  // namespace cakg::ingest
