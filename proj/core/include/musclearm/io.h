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

// Flat-file artifacts. CSV files start with a schema comment line
// "# musclearm-csv v1 <schema>", use LF line endings, '.' decimals and the
// shortest round-trip representation of doubles.

#ifndef MUSCLEARM_IO_H_
#define MUSCLEARM_IO_H_

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "musclearm/config.h"
#include "musclearm/errors.h"
#include "musclearm/harness.h"
#include "musclearm/muscle.h"

namespace musclearm {

inline constexpr int kCsvVersion = 1;

std::string csv_schema_line(const std::string& schema);

// Formats one value as written to CSV and JSON-free text.
std::string format_number(double v);

// Writes the schema line, the header and the rows. Throws IoError.
void write_csv(const std::filesystem::path& path, const std::string& schema,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

// Reads a file written by write_csv. Returns the rows; `header` and
// `schema` receive the column names and schema tag.
std::vector<std::vector<double>> read_csv(const std::filesystem::path& path,
                                          std::vector<std::string>* header = nullptr,
                                          std::string* schema = nullptr);

// Muscle curves on a shared abscissa x: fl and fpe at l_norm = x, fv at
// v_norm = x - 1, ft at tendon strain (x - 1) eps0_t.
std::vector<std::vector<double>> curve_rows(const MuscleParams& p, double x_min,
                                            double x_max, int samples);
void write_curves_csv(const std::filesystem::path& path, const MuscleParams& p);

// Every `stride`-th tick plus the last completed one.
void write_trial_csv(const std::filesystem::path& path, const TrialLog& log,
                     int stride);

// Matrix dump, one row per matrix row, columns c0..c{n-1}.
void write_matrix_csv(const std::filesystem::path& path, const std::string& schema,
                      const Eigen::MatrixXd& m);

void write_text(const std::filesystem::path& path, const std::string& text);

// Writes config.ini (canonical form of the config actually used) into dir.
void write_config_copy(const std::filesystem::path& dir, const ExperimentConfig& config);

std::filesystem::path ensure_dir(const std::filesystem::path& dir);

}  // namespace musclearm

#endif  // MUSCLEARM_IO_H_
