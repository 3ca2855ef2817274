#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssc/kmeans.hpp"
#include "ssc/spectral.hpp"
#include "ssc/types.hpp"

namespace ssc::taxi {

struct TripRecord {
  double pickup_lat = 0.0;
  double pickup_lon = 0.0;
  double dropoff_lat = 0.0;
  double dropoff_lon = 0.0;
  std::int32_t pickup_clock = 0;  ///< seconds since local midnight, in [0, 86400)
};

/// Column names default to the 2016 yellow-cab schema. Timestamps are read as
/// local clock time; `clock_offset_seconds` shifts them (wrapping at midnight).
struct TripSchema {
  std::string pickup_time = "tpep_pickup_datetime";
  std::string pickup_lon = "pickup_longitude";
  std::string pickup_lat = "pickup_latitude";
  std::string dropoff_lon = "dropoff_longitude";
  std::string dropoff_lat = "dropoff_latitude";
  std::int32_t clock_offset_seconds = 0;
};

struct ParseStats {
  std::size_t rows_in = 0;
  std::size_t parsed = 0;
  std::size_t dropped_bad = 0;
  bool reconciles() const { return rows_in == parsed + dropped_bad; }
};

struct ParsedTrips {
  std::vector<TripRecord> trips;
  ParseStats stats;
};

/// Needs a header row containing every schema column (SchemaError otherwise).
/// Rows with unparseable coordinates or timestamps are dropped and counted.
ParsedTrips parse_trips(std::istream& in, const TripSchema& schema = {});

/// "YYYY-MM-DD HH:MM:SS" (or with a 'T' separator) to seconds since midnight.
std::optional<std::int32_t> parse_clock(std::string_view timestamp);

struct BoundingBox {
  double lat_min = 40.70;
  double lat_max = 40.88;
  double lon_min = -74.02;
  double lon_max = -73.91;
};

/// Half-open cells [lo, lo + size) laid over the box; cell id = lat_index * n_lon + lon_index.
struct GridSpec {
  BoundingBox box;
  double cell_lat = 0.0018;
  double cell_lon = 0.0022;

  void validate() const;
  int n_lat() const;
  int n_lon() const;
  std::optional<int> cell_of(double lat, double lon) const;
  int lat_index(int cell) const { return cell / n_lon(); }
  int lon_index(int cell) const { return cell % n_lon(); }
};

struct CellPair {
  int from = 0;
  int to = 0;
  bool operator==(const CellPair&) const = default;
};

struct DiscretizeStats {
  std::size_t trips_in = 0;
  std::size_t kept = 0;
  std::size_t dropped_out_of_box = 0;
  bool reconciles() const { return trips_in == kept + dropped_out_of_box; }
};

struct Discretized {
  std::vector<CellPair> pairs;
  DiscretizeStats stats;
};

Discretized discretize(std::span<const TripRecord> trips, const GridSpec& grid);

/// Retained cells in increasing id order; state i is cells[i].
struct StateMap {
  std::vector<int> cells;
  std::vector<std::size_t> visits;
  std::size_t size() const { return cells.size(); }
  std::optional<StateIndex> state_of(int cell) const;
};

struct FilterStats {
  std::size_t pairs_in = 0;
  std::size_t kept = 0;
  std::size_t dropped = 0;
  std::size_t cells_seen = 0;
  std::size_t cells_kept = 0;
  bool reconciles() const { return pairs_in == kept + dropped; }
};

struct Filtered {
  StateMap states;
  std::vector<ObservationPair> pairs;  ///< dense state indices
  FilterStats stats;
};

/// Visits = appearances as source plus appearances as destination.
Filtered filter_states(std::span<const CellPair> pairs, std::size_t min_visits = 200);

/// [start, end) in seconds since midnight.
struct TimeSegment {
  std::string name;
  std::int32_t start = 0;
  std::int32_t end = 0;
};

/// morning [06:00, 12:00), afternoon [12:00, 18:00), evening [18:00, 24:00)
std::vector<TimeSegment> default_segments();

struct StratifyStats {
  std::size_t trips_in = 0;
  std::size_t assigned = 0;
  std::size_t dropped = 0;
  bool reconciles() const { return trips_in == assigned + dropped; }
};

struct Stratified {
  std::vector<std::vector<TripRecord>> buckets;  ///< parallel to the segments
  StratifyStats stats;
};

/// Throws ConfigError for empty, out-of-range or overlapping segments.
Stratified stratify_time(std::span<const TripRecord> trips, std::span<const TimeSegment> segments);

struct TransitionCounts {
  Matrix counts;
  FrequencyMatrix F_tilde;
  StochasticMatrix P_tilde;
};

TransitionCounts build_counts(std::span<const ObservationPair> pairs, std::size_t num_states);

enum class PartitionFormat { Csv, GeoJson };

/// CSV: cell_lat_index,cell_lon_index,centroid_lat,centroid_lon,block, one row per state.
/// GeoJSON: FeatureCollection of cell Polygons with the block as a property.
void export_partition(std::ostream& out, const StateMap& states, const GridSpec& grid,
                      const PartitionLabels& labels, PartitionFormat format);
/// Reads the CSV export back; blocks in row order.
PartitionLabels read_partition_export(std::istream& in);

enum class CompressionMethod { Aggregate, Lump };

struct PipelineConfig {
  TripSchema schema;
  GridSpec grid;
  std::size_t min_visits = 200;
  bool stratify = false;
  std::vector<TimeSegment> segments = default_segments();
  int r = 2;
  CompressionMethod method = CompressionMethod::Aggregate;
  KMeansConfig kmeans;
};

struct SegmentResult {
  std::string name;  ///< "all" when not stratified
  DiscretizeStats discretize_stats;
  FilterStats filter_stats;
  StateMap states;
  TransitionCounts counts;
  PartitionLabels partition;
};

struct PipelineResult {
  ParseStats parse_stats;
  std::optional<StratifyStats> stratify_stats;
  std::vector<SegmentResult> segments;
};

/// parse, optional stratify, then per segment discretize, filter, count and partition.
PipelineResult run_pipeline(std::istream& csv, const PipelineConfig& config);

}  // namespace ssc::taxi
