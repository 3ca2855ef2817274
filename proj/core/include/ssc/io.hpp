#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include "ssc/synth.hpp"
#include "ssc/types.hpp"

namespace ssc::io {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// Dense CSV: a first line "p,q" with the dimensions, then p rows of q values.
void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

/// JSON envelope {"kind", "p", "q", "entries"} with entries as a list of rows.
void write_matrix_json(std::ostream& out, const Matrix& m, std::string_view kind);
Matrix read_matrix_json(std::istream& in, std::string* kind = nullptr);

/// Picks the format from the extension: ".json" is the envelope, anything else CSV.
Matrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const Matrix& m, std::string_view kind = "matrix");

/// One state index per line. Without `num_states`, p is one past the largest index.
void write_trajectory(std::ostream& out, const Trajectory& traj);
Trajectory read_trajectory(std::istream& in, std::optional<std::size_t> num_states = std::nullopt);

/// "state,block" header then one row per state, states in order 0..p-1.
void write_partition_csv(std::ostream& out, const PartitionLabels& labels);
PartitionLabels read_partition_csv(std::istream& in);

/// P, pi, F, partition and metadata for replaying a generated chain.
void write_ground_truth_json(std::ostream& out, const GroundTruthChain& truth);
GroundTruthChain read_ground_truth_json(std::istream& in);

}  // namespace ssc::io
