#include "ssc/taxi.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include <json.hpp>

#include "ssc/error.hpp"
#include "ssc/io.hpp"
#include "ssc/markov.hpp"

namespace ssc::taxi {

namespace {

constexpr std::int32_t kDay = 86400;
constexpr double kEdgeSlack = 1e-9;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_coordinate(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::optional<int> digits(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    v = v * 10 + (c - '0');
  }
  return v;
}

std::string format_clock(std::int32_t s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%02d:%02d:%02d", s / 3600, (s / 60) % 60, s % 60);
  return buf;
}

}  // namespace

std::optional<std::int32_t> parse_clock(std::string_view ts) {
  ts = trim(ts);
  // YYYY-MM-DD HH:MM:SS
  if (ts.size() != 19 || ts[4] != '-' || ts[7] != '-' || (ts[10] != ' ' && ts[10] != 'T') ||
      ts[13] != ':' || ts[16] != ':') {
    return std::nullopt;
  }
  const auto year = digits(ts.substr(0, 4));
  const auto month = digits(ts.substr(5, 2));
  const auto day = digits(ts.substr(8, 2));
  const auto hh = digits(ts.substr(11, 2));
  const auto mm = digits(ts.substr(14, 2));
  const auto ss = digits(ts.substr(17, 2));
  if (!year || !month || !day || !hh || !mm || !ss) return std::nullopt;
  if (*month < 1 || *month > 12 || *day < 1 || *day > 31 || *hh > 23 || *mm > 59 || *ss > 59) {
    return std::nullopt;
  }
  return *hh * 3600 + *mm * 60 + *ss;
}

ParsedTrips parse_trips(std::istream& in, const TripSchema& schema) {
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw SchemaError("trip csv: missing header row");
  }
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    throw SchemaError("trip csv: required column \"" + name + "\" not found in header");
  };
  const std::size_t c_time = column(schema.pickup_time);
  const std::size_t c_plat = column(schema.pickup_lat);
  const std::size_t c_plon = column(schema.pickup_lon);
  const std::size_t c_dlat = column(schema.dropoff_lat);
  const std::size_t c_dlon = column(schema.dropoff_lon);
  const std::size_t needed = std::max({c_time, c_plat, c_plon, c_dlat, c_dlon}) + 1;

  ParsedTrips out;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++out.stats.rows_in;
    const auto fields = split_csv_line(line);
    if (fields.size() < needed) {
      ++out.stats.dropped_bad;
      continue;
    }
    const auto clock = parse_clock(fields[c_time]);
    const auto plat = parse_coordinate(fields[c_plat]);
    const auto plon = parse_coordinate(fields[c_plon]);
    const auto dlat = parse_coordinate(fields[c_dlat]);
    const auto dlon = parse_coordinate(fields[c_dlon]);
    if (!clock || !plat || !plon || !dlat || !dlon) {
      ++out.stats.dropped_bad;
      continue;
    }
    const std::int32_t shifted = ((*clock + schema.clock_offset_seconds) % kDay + kDay) % kDay;
    out.trips.push_back(TripRecord{*plat, *plon, *dlat, *dlon, shifted});
    ++out.stats.parsed;
  }
  return out;
}

void GridSpec::validate() const {
  if (!(cell_lat > 0.0) || !(cell_lon > 0.0)) throw ConfigError("grid: cell sizes must be positive");
  if (!(box.lat_max > box.lat_min) || !(box.lon_max > box.lon_min)) {
    throw ConfigError("grid: bounding box is empty");
  }
}

int GridSpec::n_lat() const {
  return static_cast<int>(std::ceil((box.lat_max - box.lat_min) / cell_lat - kEdgeSlack));
}

int GridSpec::n_lon() const {
  return static_cast<int>(std::ceil((box.lon_max - box.lon_min) / cell_lon - kEdgeSlack));
}

std::optional<int> GridSpec::cell_of(double lat, double lon) const {
  if (!(lat >= box.lat_min && lat < box.lat_max && lon >= box.lon_min && lon < box.lon_max)) {
    return std::nullopt;
  }
  // The slack puts points that sit on a boundary up to rounding into the upper cell.
  const int i = std::min(n_lat() - 1,
                         static_cast<int>(std::floor((lat - box.lat_min) / cell_lat + kEdgeSlack)));
  const int j = std::min(n_lon() - 1,
                         static_cast<int>(std::floor((lon - box.lon_min) / cell_lon + kEdgeSlack)));
  return i * n_lon() + j;
}

Discretized discretize(std::span<const TripRecord> trips, const GridSpec& grid) {
  grid.validate();
  Discretized out;
  out.stats.trips_in = trips.size();
  for (const auto& t : trips) {
    const auto from = grid.cell_of(t.pickup_lat, t.pickup_lon);
    const auto to = grid.cell_of(t.dropoff_lat, t.dropoff_lon);
    if (!from || !to) {
      ++out.stats.dropped_out_of_box;
      continue;
    }
    out.pairs.push_back({*from, *to});
    ++out.stats.kept;
  }
  return out;
}

std::optional<StateIndex> StateMap::state_of(int cell) const {
  const auto it = std::lower_bound(cells.begin(), cells.end(), cell);
  if (it == cells.end() || *it != cell) return std::nullopt;
  return static_cast<StateIndex>(it - cells.begin());
}

Filtered filter_states(std::span<const CellPair> pairs, std::size_t min_visits) {
  if (min_visits < 1) throw ParameterError("filter_states: min_visits must be at least 1");
  std::map<int, std::size_t> visits;
  for (const auto& pr : pairs) {
    ++visits[pr.from];
    ++visits[pr.to];
  }
  Filtered out;
  out.stats.pairs_in = pairs.size();
  out.stats.cells_seen = visits.size();
  for (const auto& [cell, count] : visits) {
    if (count >= min_visits) {
      out.states.cells.push_back(cell);
      out.states.visits.push_back(count);
    }
  }
  out.stats.cells_kept = out.states.size();
  if (out.states.size() == 0) {
    throw EmptyStateSpaceError("filter_states: no cell reaches " + std::to_string(min_visits) +
                               " visits");
  }
  for (const auto& pr : pairs) {
    const auto from = out.states.state_of(pr.from);
    const auto to = out.states.state_of(pr.to);
    if (from && to) {
      out.pairs.emplace_back(*from, *to);
      ++out.stats.kept;
    } else {
      ++out.stats.dropped;
    }
  }
  return out;
}

std::vector<TimeSegment> default_segments() {
  return {{"morning", 6 * 3600, 12 * 3600},
          {"afternoon", 12 * 3600, 18 * 3600},
          {"evening", 18 * 3600, 24 * 3600}};
}

Stratified stratify_time(std::span<const TripRecord> trips, std::span<const TimeSegment> segments) {
  if (segments.empty()) throw ConfigError("stratify_time: no segments");
  for (std::size_t a = 0; a < segments.size(); ++a) {
    const auto& s = segments[a];
    if (s.start < 0 || s.end > kDay || s.start >= s.end) {
      throw ConfigError("stratify_time: segment \"" + s.name + "\" must satisfy 0 <= start < end <= 24:00");
    }
    for (std::size_t b = 0; b < a; ++b) {
      const auto& t = segments[b];
      if (s.start < t.end && t.start < s.end) {
        throw ConfigError("stratify_time: segments \"" + t.name + "\" and \"" + s.name +
                          "\" overlap (" + format_clock(std::max(s.start, t.start)) + ")");
      }
    }
  }
  Stratified out;
  out.buckets.resize(segments.size());
  out.stats.trips_in = trips.size();
  for (const auto& trip : trips) {
    bool placed = false;
    for (std::size_t k = 0; k < segments.size(); ++k) {
      if (trip.pickup_clock >= segments[k].start && trip.pickup_clock < segments[k].end) {
        out.buckets[k].push_back(trip);
        placed = true;
        break;
      }
    }
    ++(placed ? out.stats.assigned : out.stats.dropped);
  }
  return out;
}

TransitionCounts build_counts(std::span<const ObservationPair> pairs, std::size_t num_states) {
  if (pairs.empty()) throw InsufficientDataError("build_counts: no transitions");
  if (num_states == 0) throw EmptyStateSpaceError("build_counts: no states");
  const auto p = static_cast<Eigen::Index>(num_states);
  Matrix counts = Matrix::Zero(p, p);
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= p || j >= p) {
      throw DimensionError("build_counts: pair (" + std::to_string(i) + "," + std::to_string(j) +
                           ") outside [0, " + std::to_string(p) + ")");
    }
    counts(i, j) += 1.0;
  }
  const double total = static_cast<double>(pairs.size());
  Matrix f = counts / total;
  Matrix pm(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double row = counts.row(i).sum();
    if (row > 0.0) {
      pm.row(i) = counts.row(i) / row;
    } else {
      pm.row(i).setConstant(1.0 / static_cast<double>(p));
    }
  }
  return TransitionCounts{std::move(counts), FrequencyMatrix::from_matrix(std::move(f)),
                          StochasticMatrix::from_matrix(std::move(pm))};
}

void export_partition(std::ostream& out, const StateMap& states, const GridSpec& grid,
                      const PartitionLabels& labels, PartitionFormat format) {
  if (labels.size() != states.size()) {
    throw DimensionError("export_partition: " + std::to_string(labels.size()) + " labels for " +
                         std::to_string(states.size()) + " states");
  }
  using io::format_double;
  if (format == PartitionFormat::Csv) {
    out << "cell_lat_index,cell_lon_index,centroid_lat,centroid_lon,block\n";
    for (std::size_t s = 0; s < states.size(); ++s) {
      const int i = grid.lat_index(states.cells[s]);
      const int j = grid.lon_index(states.cells[s]);
      out << i << ',' << j << ',' << format_double(grid.box.lat_min + (i + 0.5) * grid.cell_lat)
          << ',' << format_double(grid.box.lon_min + (j + 0.5) * grid.cell_lon) << ','
          << labels[s] << '\n';
    }
    return;
  }
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t s = 0; s < states.size(); ++s) {
    const int i = grid.lat_index(states.cells[s]);
    const int j = grid.lon_index(states.cells[s]);
    const double lat0 = grid.box.lat_min + i * grid.cell_lat;
    const double lon0 = grid.box.lon_min + j * grid.cell_lon;
    const double lat1 = lat0 + grid.cell_lat;
    const double lon1 = lon0 + grid.cell_lon;
    nlohmann::json ring = {{lon0, lat0}, {lon1, lat0}, {lon1, lat1}, {lon0, lat1}, {lon0, lat0}};
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "Polygon"}, {"coordinates", {ring}}}},
                        {"properties",
                         {{"state", s},
                          {"cell_lat_index", i},
                          {"cell_lon_index", j},
                          {"visits", states.visits[s]},
                          {"block", labels[s]}}}});
  }
  nlohmann::json doc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
  out << doc.dump() << '\n';
}

PartitionLabels read_partition_export(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      trim(line) != "cell_lat_index,cell_lon_index,centroid_lat,centroid_lon,block") {
    throw SchemaError("partition export: unexpected header");
  }
  std::vector<int> labels;
  int max_block = -1;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_csv_line(line);
    const auto block = fields.size() == 5 ? digits(trim(fields[4])) : std::nullopt;
    if (!block) throw SchemaError("partition export: malformed row \"" + line + "\"");
    labels.push_back(*block);
    max_block = std::max(max_block, *block);
  }
  if (labels.empty()) throw InsufficientDataError("partition export: no rows");
  return PartitionLabels(std::move(labels), max_block + 1);
}

PipelineResult run_pipeline(std::istream& csv, const PipelineConfig& config) {
  config.grid.validate();
  PipelineResult out;
  ParsedTrips parsed = parse_trips(csv, config.schema);
  out.parse_stats = parsed.stats;
  if (parsed.trips.empty()) throw InsufficientDataError("taxi: no valid trip records");

  std::vector<std::pair<std::string, std::vector<TripRecord>>> groups;
  if (config.stratify) {
    auto strat = stratify_time(parsed.trips, config.segments);
    out.stratify_stats = strat.stats;
    for (std::size_t k = 0; k < config.segments.size(); ++k) {
      groups.emplace_back(config.segments[k].name, std::move(strat.buckets[k]));
    }
  } else {
    groups.emplace_back("all", std::move(parsed.trips));
  }

  for (auto& [name, trips] : groups) {
    auto disc = discretize(trips, config.grid);
    auto filtered = filter_states(disc.pairs, config.min_visits);
    auto counts = build_counts(filtered.pairs, filtered.states.size());
    PartitionLabels partition =
        config.method == CompressionMethod::Aggregate
            ? spectral_state_aggregation(counts.P_tilde.matrix(), config.r, config.kmeans)
            : spectral_lumpable_partition(counts.F_tilde.matrix(), config.r, config.kmeans);
    out.segments.push_back(SegmentResult{name, disc.stats, filtered.stats,
                                         std::move(filtered.states), std::move(counts),
                                         std::move(partition)});
  }
  return out;
}

}  // namespace ssc::taxi
