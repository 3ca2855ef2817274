#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ssc/error.hpp"
#include "ssc/taxi.hpp"

using namespace ssc;
using namespace ssc::taxi;

namespace {

const char* kHeader =
    "VendorID,tpep_pickup_datetime,tpep_dropoff_datetime,passenger_count,trip_distance,"
    "pickup_longitude,pickup_latitude,RatecodeID,store_and_fwd_flag,dropoff_longitude,"
    "dropoff_latitude,payment_type,fare_amount\n";

std::string row(const std::string& clock, double plon, double plat, const std::string& dlon,
                double dlat) {
  std::ostringstream os;
  os.precision(10);
  os << "1,2016-01-04 " << clock << ",2016-01-04 " << clock << ",1,1.0," << plon << ',' << plat
     << ",1,N," << dlon << ',' << dlat << ",1,5.0\n";
  return os.str();
}

GridSpec fixture_grid() {
  GridSpec g;
  g.box = {40.70, 40.80, -74.00, -73.90};
  g.cell_lat = 0.02;
  g.cell_lon = 0.02;
  return g;
}

TripRecord trip(double plat, double plon, double dlat, double dlon, std::int32_t clock = 0) {
  return {plat, plon, dlat, dlon, clock};
}

}  // namespace

TEST_CASE("parse three rows") {
  std::istringstream in(std::string(kHeader) + row("08:00:00", -73.95, 40.75, "-73.96", 40.76) +
                        row("09:30:15", -73.97, 40.71, "-73.92", 40.79) +
                        row("23:59:59", -73.91, 40.72, "-73.93", 40.73));
  const auto parsed = parse_trips(in);
  REQUIRE(parsed.trips.size() == 3);
  CHECK(parsed.stats.rows_in == 3);
  CHECK(parsed.stats.reconciles());
  CHECK(parsed.trips[0].pickup_lat == 40.75);
  CHECK(parsed.trips[0].dropoff_lon == -73.96);
  CHECK(parsed.trips[1].pickup_clock == 9 * 3600 + 30 * 60 + 15);
  CHECK(parsed.trips[2].pickup_clock == 86399);
}

TEST_CASE("bad rows are dropped and counted") {
  std::istringstream in(std::string(kHeader) + row("08:00:00", -73.95, 40.75, "", 40.76) +
                        row("25:00:00", -73.95, 40.75, "-73.96", 40.76) +
                        "1,2016-01-04 08:00:00\n" +
                        row("08:00:00", -73.95, 40.75, "-73.96", 40.76));
  const auto parsed = parse_trips(in);
  CHECK(parsed.trips.size() == 1);
  CHECK(parsed.stats.dropped_bad == 3);
  CHECK(parsed.stats.reconciles());
}

TEST_CASE("missing columns are a schema error") {
  std::istringstream no_col("VendorID,pickup_latitude\n1,40.7\n");
  CHECK_THROWS_AS(parse_trips(no_col), SchemaError);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_trips(empty), SchemaError);
}

TEST_CASE("column overrides and clock offset") {
  TripSchema s;
  s.pickup_time = "t";
  s.pickup_lat = "a";
  s.pickup_lon = "b";
  s.dropoff_lat = "c";
  s.dropoff_lon = "d";
  s.clock_offset_seconds = -3600;
  std::istringstream in("t,a,b,c,d\n\"2016-01-04T00:30:00\",40.7,-73.9,40.8,-73.95\n");
  const auto parsed = parse_trips(in, s);
  REQUIRE(parsed.trips.size() == 1);
  CHECK(parsed.trips[0].pickup_clock == 23 * 3600 + 30 * 60);
}

TEST_CASE("clock parsing") {
  CHECK(parse_clock("2016-01-04 06:00:00") == 21600);
  CHECK(parse_clock("2016-01-04T00:00:00") == 0);
  CHECK_FALSE(parse_clock("2016-01-04 24:00:00"));
  CHECK_FALSE(parse_clock("06:00"));
  CHECK_FALSE(parse_clock(""));
}

TEST_CASE("bundled fixture") {
  std::ifstream in(std::string(SSC_TEST_DATA_DIR) + "/trips_fixture.csv");
  REQUIRE(in);
  const auto parsed = parse_trips(in);
  CHECK(parsed.stats.rows_in == 1000);
  CHECK(parsed.trips.size() == 987);
  CHECK(parsed.stats.dropped_bad == 13);
}

TEST_CASE("grid cells") {
  const auto g = fixture_grid();
  CHECK(g.n_lat() == 5);
  CHECK(g.n_lon() == 5);
  const auto same = discretize(std::vector<TripRecord>{trip(40.71, -73.99, 40.715, -73.985)}, g);
  REQUIRE(same.pairs.size() == 1);
  CHECK(same.pairs[0].from == same.pairs[0].to);

  // Boundaries belong to the cell above them.
  CHECK(g.cell_of(40.72, -73.95) == 1 * 5 + 2);
  CHECK(g.cell_of(40.7199999, -73.95) == 0 * 5 + 2);
  CHECK(g.cell_of(40.70, -74.00) == 0);
  CHECK_FALSE(g.cell_of(40.80, -73.95));
  CHECK_FALSE(g.cell_of(40.75, -73.90));
  CHECK(g.lat_index(12) == 2);
  CHECK(g.lon_index(12) == 2);

  GridSpec bad = g;
  bad.cell_lat = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = g;
  bad.box.lat_max = bad.box.lat_min;
  CHECK_THROWS_AS(bad.validate(), ConfigError);

  const std::vector<TripRecord> mixed{trip(40.71, -73.99, 40.75, -73.95), trip(41.0, -73.99, 40.75, -73.95)};
  const auto d = discretize(mixed, g);
  CHECK(d.stats.kept == 1);
  CHECK(d.stats.dropped_out_of_box == 1);
  CHECK(d.stats.reconciles());
}

TEST_CASE("visit filter") {
  std::vector<CellPair> pairs;
  for (int c = 0; c < 5; ++c)
    for (int t = 0; t < 2; ++t) pairs.push_back({c, (c + 1) % 5});
  pairs.push_back({5, 6});
  pairs.push_back({7, 8});
  pairs.push_back({9, 10});
  pairs.push_back({11, 0});
  const auto f = filter_states(pairs, 4);
  CHECK(f.stats.cells_seen == 12);
  CHECK(f.stats.cells_kept == 5);
  CHECK(f.states.cells == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(f.states.visits[0] == 5);
  CHECK(f.stats.kept == 10);
  CHECK(f.stats.dropped == 4);
  CHECK(f.stats.reconciles());
  CHECK(f.states.state_of(3) == 3);
  CHECK_FALSE(f.states.state_of(7));

  const auto all = filter_states(pairs, 1);
  CHECK(all.stats.cells_kept == 12);
  CHECK(all.stats.dropped == 0);

  std::vector<CellPair> edge(99, CellPair{0, 0});
  edge.push_back({0, 1});
  for (int t = 0; t < 100; ++t) edge.push_back({1, 1});
  const auto e = filter_states(edge, 200);
  CHECK(e.states.cells == std::vector<int>{1});

  CHECK_THROWS_AS(filter_states(pairs, 1000), EmptyStateSpaceError);
  CHECK_THROWS_AS(filter_states(pairs, 0), ParameterError);
}

TEST_CASE("time segments") {
  const auto segs = default_segments();
  REQUIRE(segs.size() == 3);
  const std::vector<TripRecord> trips{trip(0, 0, 0, 0, 6 * 3600), trip(0, 0, 0, 0, 6 * 3600 - 1),
                                      trip(0, 0, 0, 0, 18 * 3600), trip(0, 0, 0, 0, 12 * 3600 - 1),
                                      trip(0, 0, 0, 0, 86399)};
  const auto s = stratify_time(trips, segs);
  CHECK(s.buckets[0].size() == 2);
  CHECK(s.buckets[1].size() == 0);
  CHECK(s.buckets[2].size() == 2);
  CHECK(s.stats.dropped == 1);
  CHECK(s.stats.reconciles());

  const std::vector<TimeSegment> overlap{{"a", 0, 7200}, {"b", 3600, 9000}};
  CHECK_THROWS_AS(stratify_time(trips, overlap), ConfigError);
  const std::vector<TimeSegment> backwards{{"a", 7200, 3600}};
  CHECK_THROWS_AS(stratify_time(trips, backwards), ConfigError);
}

TEST_CASE("transition counts") {
  const std::vector<ObservationPair> pairs{{0, 1}, {0, 1}, {1, 0}};
  const auto c = build_counts(pairs, 2);
  Matrix expected(2, 2);
  expected << 0, 2, 1, 0;
  CHECK(c.counts == expected);
  CHECK(c.F_tilde.matrix().sum() == doctest::Approx(1.0));
  CHECK(c.P_tilde(0, 1) == 1.0);

  const std::vector<ObservationPair> five{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}, {0, 2}};
  const auto c5 = build_counts(five, 5);
  CHECK(c5.P_tilde(0, 1) == 0.5);
  CHECK(c5.P_tilde(0, 2) == 0.5);
  CHECK(c5.F_tilde(0, 2) == doctest::Approx(1.0 / 6));
  CHECK(build_counts(pairs, 3).P_tilde(2, 2) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(build_counts({}, 2), InsufficientDataError);
}

TEST_CASE("partition export") {
  const auto g = fixture_grid();
  StateMap one{{7}, {10}};
  std::ostringstream os;
  export_partition(os, one, g, PartitionLabels({0}, 1), PartitionFormat::Csv);
  std::istringstream lines(os.str());
  std::string header, first, rest;
  std::getline(lines, header);
  std::getline(lines, first);
  CHECK(header == "cell_lat_index,cell_lon_index,centroid_lat,centroid_lon,block");
  CHECK(first.rfind("1,2,", 0) == 0);
  CHECK_FALSE(std::getline(lines, rest));

  StateMap three{{0, 6, 24}, {5, 5, 5}};
  const PartitionLabels labels({1, 0, 1}, 2);
  std::stringstream csv;
  export_partition(csv, three, g, labels, PartitionFormat::Csv);
  CHECK(read_partition_export(csv) == labels);

  std::ostringstream geo;
  export_partition(geo, three, g, labels, PartitionFormat::GeoJson);
  const auto j = nlohmann::json::parse(geo.str());
  CHECK(j["type"] == "FeatureCollection");
  REQUIRE(j["features"].size() == 3);
  for (const auto& f : j["features"]) {
    CHECK(f["type"] == "Feature");
    CHECK(f["geometry"]["type"] == "Polygon");
    const auto& ring = f["geometry"]["coordinates"][0];
    CHECK(ring.size() == 5);
    CHECK(ring.front() == ring.back());
    CHECK(f["properties"].contains("block"));
  }

  CHECK_THROWS_AS(export_partition(os, three, g, PartitionLabels({0}, 1), PartitionFormat::Csv),
                  DimensionError);
}

TEST_CASE("pipeline on the fixture") {
  PipelineConfig cfg;
  cfg.grid = fixture_grid();
  cfg.min_visits = 40;
  std::ifstream in(std::string(SSC_TEST_DATA_DIR) + "/trips_fixture.csv");
  const auto res = run_pipeline(in, cfg);
  CHECK(res.parse_stats.reconciles());
  REQUIRE(res.segments.size() == 1);
  const auto& seg = res.segments[0];
  CHECK(seg.name == "all");
  CHECK(seg.discretize_stats.reconciles());
  CHECK(seg.filter_stats.reconciles());
  CHECK(seg.discretize_stats.trips_in == 987);
  // Westward columns flow north, the rest south; the two halves separate.
  std::set<int> west, east;
  for (std::size_t i = 0; i < seg.states.size(); ++i) {
    const int cell = seg.states.cells[i];
    (cfg.grid.lon_index(cell) <= 1 ? west : east).insert(seg.partition[i]);
  }
  CHECK(west.size() == 1);
  CHECK(east.size() == 1);
  CHECK(*west.begin() != *east.begin());

  cfg.stratify = true;
  cfg.min_visits = 5;
  std::ifstream again(std::string(SSC_TEST_DATA_DIR) + "/trips_fixture.csv");
  const auto strat = run_pipeline(again, cfg);
  REQUIRE(strat.stratify_stats);
  CHECK(strat.stratify_stats->reconciles());
  CHECK(strat.segments.size() == 3);
}
