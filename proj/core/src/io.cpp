#include "ssc/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "ssc/error.hpp"

namespace ssc::io {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto res = std::from_chars(s.data(), end, out);
  return res.ec == std::errc() && res.ptr == end;
}

json matrix_rows(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_rows(const json& rows, std::size_t p, std::size_t q) {
  if (!rows.is_array() || rows.size() != p) {
    throw DimensionError("matrix json: expected " + std::to_string(p) + " rows");
  }
  Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < p; ++i) {
    const auto& row = rows[i];
    if (!row.is_array() || row.size() != q) {
      throw DimensionError("matrix json: row " + std::to_string(i) + " does not have " +
                           std::to_string(q) + " entries");
    }
    for (std::size_t j = 0; j < q; ++j) {
      if (!row[j].is_number()) {
        throw SchemaError("matrix json: entry (" + std::to_string(i) + "," + std::to_string(j) +
                          ") is not a number");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j].get<double>();
    }
  }
  return m;
}

json envelope(const Matrix& m, std::string_view kind) {
  json j;
  j["kind"] = std::string(kind);
  j["p"] = m.rows();
  j["q"] = m.cols();
  j["entries"] = matrix_rows(m);
  return j;
}

json parse_json(std::istream& in, const char* what) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string(what) + ": invalid JSON: " + e.what());
  }
}

Matrix matrix_from_envelope(const json& j, std::string* kind) {
  if (!j.is_object() || !j.contains("p") || !j.contains("q") || !j.contains("entries")) {
    throw SchemaError("matrix json: expected an object with p, q and entries");
  }
  if (!j["p"].is_number_unsigned() || !j["q"].is_number_unsigned()) {
    throw SchemaError("matrix json: p and q must be nonnegative integers");
  }
  if (kind != nullptr) *kind = j.value("kind", std::string{});
  return matrix_from_rows(j["entries"], j["p"].get<std::size_t>(), j["q"].get<std::size_t>());
}

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  out << m.rows() << ',' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!trim(line).empty()) return true;
    }
    return false;
  };
  if (!next_line()) throw SchemaError("matrix csv: empty input");
  const auto header = split_commas(trim(line));
  std::size_t p = 0;
  std::size_t q = 0;
  if (header.size() != 2 || !parse_number(header[0], p) || !parse_number(header[1], q) || p == 0 ||
      q == 0) {
    throw SchemaError("matrix csv: first line must be the dimensions \"p,q\"");
  }
  Matrix m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < p; ++i) {
    if (!next_line()) {
      throw DimensionError("matrix csv: expected " + std::to_string(p) + " rows, found " +
                           std::to_string(i));
    }
    const auto fields = split_commas(trim(line));
    if (fields.size() != q) {
      throw DimensionError("matrix csv: line " + std::to_string(line_no) + " has " +
                           std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(q));
    }
    for (std::size_t j = 0; j < q; ++j) {
      double v = 0.0;
      if (!parse_number(fields[j], v)) {
        throw SchemaError("matrix csv: line " + std::to_string(line_no) + ", field " +
                          std::to_string(j + 1) + " is not a number");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  if (next_line()) throw DimensionError("matrix csv: more than " + std::to_string(p) + " rows");
  return m;
}

void write_matrix_json(std::ostream& out, const Matrix& m, std::string_view kind) {
  out << envelope(m, kind).dump() << '\n';
}

Matrix read_matrix_json(std::istream& in, std::string* kind) {
  return matrix_from_envelope(parse_json(in, "matrix json"), kind);
}

Matrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return ends_with(path, ".json") ? read_matrix_json(in) : read_matrix_csv(in);
}

void write_matrix_file(const std::string& path, const Matrix& m, std::string_view kind) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  if (ends_with(path, ".json")) {
    write_matrix_json(out, m, kind);
  } else {
    write_matrix_csv(out, m);
  }
}

void write_trajectory(std::ostream& out, const Trajectory& traj) {
  for (const auto s : traj.states()) out << s << '\n';
}

Trajectory read_trajectory(std::istream& in, std::optional<std::size_t> num_states) {
  std::vector<StateIndex> states;
  std::string line;
  std::size_t line_no = 0;
  StateIndex max_state = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    StateIndex s = 0;
    if (!parse_number(t, s) || s < 0) {
      throw SchemaError("trajectory: line " + std::to_string(line_no) +
                        " is not a nonnegative integer");
    }
    max_state = std::max(max_state, s);
    states.push_back(s);
  }
  if (states.empty()) throw InsufficientDataError("trajectory: no states");
  const std::size_t p = num_states.value_or(static_cast<std::size_t>(max_state) + 1);
  if (static_cast<std::size_t>(max_state) >= p) {
    throw DimensionError("trajectory: state " + std::to_string(max_state) +
                         " does not fit a state space of size " + std::to_string(p));
  }
  return Trajectory(std::move(states), p);
}

void write_partition_csv(std::ostream& out, const PartitionLabels& labels) {
  out << "state,block\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out << i << ',' << labels[i] << '\n';
}

PartitionLabels read_partition_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "state,block") {
    throw SchemaError("partition csv: header must be \"state,block\"");
  }
  std::vector<int> labels;
  std::size_t line_no = 1;
  int max_block = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty()) continue;
    const auto fields = split_commas(t);
    std::size_t state = 0;
    int block = 0;
    if (fields.size() != 2 || !parse_number(fields[0], state) || !parse_number(fields[1], block) ||
        block < 0) {
      throw SchemaError("partition csv: line " + std::to_string(line_no) + " is malformed");
    }
    if (state != labels.size()) {
      throw SchemaError("partition csv: line " + std::to_string(line_no) +
                        " is out of order (expected state " + std::to_string(labels.size()) + ")");
    }
    labels.push_back(block);
    max_block = std::max(max_block, block);
  }
  if (labels.empty()) throw InsufficientDataError("partition csv: no rows");
  return PartitionLabels(std::move(labels), max_block + 1);
}

void write_ground_truth_json(std::ostream& out, const GroundTruthChain& truth) {
  json j;
  j["generator"] = truth.generator;
  j["rank"] = truth.rank;
  j["p"] = truth.P.rows();
  j["P"] = matrix_rows(truth.P.matrix());
  j["pi"] = std::vector<double>(truth.pi.probs.data(), truth.pi.probs.data() + truth.pi.probs.size());
  if (truth.partition) {
    const auto labels = truth.partition->labels();
    j["partition"] = {{"num_blocks", truth.partition->num_blocks()},
                      {"labels", std::vector<int>(labels.begin(), labels.end())}};
  }
  out << j.dump() << '\n';
}

GroundTruthChain read_ground_truth_json(std::istream& in) {
  const json j = parse_json(in, "ground truth json");
  try {
    if (!j.is_object() || !j.contains("P") || !j.contains("p")) {
      throw SchemaError("ground truth json: expected an object with p and P");
    }
    const auto p = j["p"].get<std::size_t>();
    auto truth = make_ground_truth(j.value("generator", std::string{}),
                                   StochasticMatrix::from_matrix(matrix_from_rows(j["P"], p, p)),
                                   j.value("rank", 0));
    if (j.contains("partition")) {
      const auto& part = j["partition"];
      truth.partition = PartitionLabels(part.at("labels").get<std::vector<int>>(),
                                        part.at("num_blocks").get<int>());
    }
    return truth;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("ground truth json: ") + e.what());
  }
}

}  // namespace ssc::io
