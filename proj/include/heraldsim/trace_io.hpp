// Copyright 2026 The heraldsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trace containers on disk.
//
// Binary (little-endian):
//   "TRCL" | u16 version | u32 num_traces | u32 samples_per_trace | f64 dt_ps |
//   u8 has_labels | num_traces x samples_per_trace f32 (mV) | [num_traces u8 labels]
//
// CSV: a "# schema" comment line carrying dt_ps, a header row
// "label,s0,s1,...", then one trace per row; label is empty when unknown.

#ifndef HERALDSIM_TRACE_IO_HPP
#define HERALDSIM_TRACE_IO_HPP

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "heraldsim/trace_lab.hpp"

namespace heraldsim {

inline constexpr std::uint16_t kTraceFileVersion = 1;

/// All traces must share length and time step; labels must be all present or all absent.
void write_traces_binary(std::ostream &out, std::span<const Trace> traces);
std::vector<Trace> read_traces_binary(std::istream &in);

void write_traces_csv(std::ostream &out, std::span<const Trace> traces);
std::vector<Trace> read_traces_csv(std::istream &in);

/// Format chosen from the extension: ".csv" for CSV, anything else binary.
void save_traces(const std::filesystem::path &path, std::span<const Trace> traces);
std::vector<Trace> load_traces(const std::filesystem::path &path);

/// Columns trace_id,slope_mV_per_ns,assigned_n,residual_rms. `assigned` may be
/// empty, leaving the column blank.
void write_slopes_csv(std::ostream &out, std::span<const SlopeSample> slopes,
                      std::span<const int> assigned);

}  // namespace heraldsim

#endif  // HERALDSIM_TRACE_IO_HPP
