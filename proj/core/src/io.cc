// Copyright 2026 The musclearm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "musclearm/io.h"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

namespace musclearm {
namespace {

constexpr const char* kSchemaPrefix = "# musclearm-csv v";

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) ensure_dir(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void append_series(std::vector<std::string>& header, const std::string& prefix,
                   Eigen::Index n) {
  for (Eigen::Index i = 0; i < n; ++i) header.push_back(fmt::format("{}{}", prefix, i));
}

}  // namespace

std::string csv_schema_line(const std::string& schema) {
  return fmt::format("{}{} {}", kSchemaPrefix, kCsvVersion, schema);
}

std::string format_number(double v) { return fmt::format("{}", v); }

void write_csv(const std::filesystem::path& path, const std::string& schema,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  out << csv_schema_line(schema) << '\n' << fmt::format("{}", fmt::join(header, ","))
      << '\n';
  std::string line;
  for (const auto& row : rows) {
    if (row.size() != header.size()) {
      throw IoError("row width does not match the header in " + path.string());
    }
    line.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ',';
      line += format_number(row[i]);
    }
    out << line << '\n';
  }
  finish(out, path);
}

std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::vector<std::string>* header,
                                          std::string* schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind(kSchemaPrefix, 0) != 0) {
    throw IoError(path.string() + " lacks the musclearm-csv schema line");
  }
  if (schema) {
    const auto sp = line.find(' ', std::string(kSchemaPrefix).size());
    *schema = sp == std::string::npos ? std::string() : line.substr(sp + 1);
  }
  if (!std::getline(in, line)) throw IoError(path.string() + " lacks a header");
  const auto cols = split(line);
  if (header) *header = cols;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      double v = 0.0;
      const auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || end != cell.data() + cell.size()) {
        throw IoError("bad number '" + cell + "' in " + path.string());
      }
      row.push_back(v);
    }
    if (row.size() != cols.size()) throw IoError("ragged row in " + path.string());
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<std::vector<double>> curve_rows(const MuscleParams& p, double x_min,
                                            double x_max, int samples) {
  std::vector<std::vector<double>> rows;
  rows.reserve(samples);
  for (int i = 0; i < samples; ++i) {
    const double x = x_min + (x_max - x_min) * i / std::max(1, samples - 1);
    rows.push_back({x, active_force_length(p, x), passive_force_length(p, x),
                    force_velocity(x - 1.0), tendon_force(p, (x - 1.0) * p.eps0_t)});
  }
  return rows;
}

void write_curves_csv(const std::filesystem::path& path, const MuscleParams& p) {
  write_csv(path,
            "curves fl,fpe@l_norm=x fv@v_norm=x-1 ft@strain=(x-1)*eps0_t",
            {"x", "fl", "fpe", "fv", "ft"}, curve_rows(p, 0.4, 1.8, 281));
}

void write_trial_csv(const std::filesystem::path& path, const TrialLog& log,
                     int stride) {
  if (stride < 1) throw IoError("log stride must be >= 1");
  std::vector<std::string> header = {"t"};
  append_series(header, "yd", log.y_d.rows());
  append_series(header, "y", log.y.rows());
  append_series(header, "q", log.q.rows());
  append_series(header, "qdot", log.qdot.rows());
  append_series(header, "u", log.commands.rows());
  append_series(header, "a", log.activations.rows());
  append_series(header, "f", log.forces.rows());
  append_series(header, "lerr", log.l_mtu.rows());
  header.push_back("err_mm");

  const int last = log.ticks_completed;
  const int input_ticks = static_cast<int>(log.commands.cols());
  std::vector<std::vector<double>> rows;
  for (int t = 0; t <= last; t = (t == last) ? last + 1 : std::min(t + stride, last)) {
    std::vector<double> row;
    row.reserve(header.size());
    row.push_back(t * log.dt);
    for (Eigen::Index i = 0; i < log.y_d.rows(); ++i) row.push_back(log.y_d(i, t));
    for (Eigen::Index i = 0; i < log.y.rows(); ++i) row.push_back(log.y(i, t));
    for (Eigen::Index i = 0; i < log.q.rows(); ++i) row.push_back(log.q(i, t));
    for (Eigen::Index i = 0; i < log.qdot.rows(); ++i) row.push_back(log.qdot(i, t));
    // Inputs exist for t < T; the terminal row repeats the last one.
    const int ti = std::min(t, input_ticks - 1);
    for (Eigen::Index i = 0; i < log.commands.rows(); ++i) {
      row.push_back(log.commands(i, ti));
    }
    for (Eigen::Index i = 0; i < log.activations.rows(); ++i) {
      row.push_back(log.activations(i, ti));
    }
    for (Eigen::Index i = 0; i < log.forces.rows(); ++i) row.push_back(log.forces(i, ti));
    for (Eigen::Index i = 0; i < log.l_mtu.rows(); ++i) {
      row.push_back(log.l_mtu(i, t) - log.l_desired(i, t));
    }
    row.push_back((log.y_d.col(t) - log.y.col(t)).norm() * 1000.0);
    rows.push_back(std::move(row));
  }
  write_csv(path, "trial", header, rows);
}

void write_matrix_csv(const std::filesystem::path& path, const std::string& schema,
                      const Eigen::MatrixXd& m) {
  std::vector<std::string> header;
  append_series(header, "c", m.cols());
  std::vector<std::vector<double>> rows(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    rows[i].reserve(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i].push_back(m(i, j));
  }
  write_csv(path, schema, header, rows);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  finish(out, path);
}

void write_config_copy(const std::filesystem::path& dir,
                       const ExperimentConfig& config) {
  write_text(dir / "config.ini", serialize_config(config));
}

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  return dir;
}

}  // namespace musclearm
