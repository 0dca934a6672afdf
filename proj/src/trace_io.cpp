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

#include "heraldsim/trace_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "heraldsim/error.hpp"

namespace heraldsim {

namespace {

constexpr char kMagic[4] = {'T', 'R', 'C', 'L'};

template <typename T>
void put_le(std::ostream &out, T value) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    U bits = std::bit_cast<U>(value);
    char bytes[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>(bits & 0xFF);
        bits = static_cast<U>(bits >> 8);
    }
    out.write(bytes, sizeof(T));
}

template <typename T>
T get_le(std::istream &in) {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
              std::conditional_t<sizeof(T) == 2, std::uint16_t,
              std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>>;
    unsigned char bytes[sizeof(T)];
    in.read(reinterpret_cast<char *>(bytes), sizeof(T));
    if (!in) {
        throw IoError("trace file truncated");
    }
    U bits = 0;
    for (std::size_t i = sizeof(T); i-- > 0;) {
        bits = static_cast<U>((bits << 8) | bytes[i]);
    }
    return std::bit_cast<T>(bits);
}

struct Shape {
    std::size_t samples = 0;
    double dt_ps = 0.0;
    bool labelled = false;
};

Shape common_shape(std::span<const Trace> traces) {
    Shape shape;
    if (traces.empty()) return shape;
    shape.samples = static_cast<std::size_t>(traces.front().samples.size());
    shape.dt_ps = traces.front().dt_ps;
    shape.labelled = traces.front().label.has_value();
    for (const auto &t : traces) {
        t.validate();
        if (static_cast<std::size_t>(t.samples.size()) != shape.samples || t.dt_ps != shape.dt_ps) {
            throw ConfigError("traces in one file must share length and time step");
        }
        if (t.label.has_value() != shape.labelled) {
            throw ConfigError("trace labels must be present on all traces or none");
        }
        if (t.label && (*t.label < 0 || *t.label > 255)) {
            throw ConfigError("trace labels must fit in one byte");
        }
    }
    return shape;
}

std::vector<std::string> split_commas(const std::string &line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double(const std::string &s, std::size_t line) {
    double v = 0.0;
    const auto *begin = s.data();
    const auto *end = s.data() + s.size();
    while (begin < end && *begin == ' ') ++begin;
    const auto r = std::from_chars(begin, end, v);
    if (r.ec != std::errc() || r.ptr != end) {
        throw IoError("malformed number '" + s + "' on line " + std::to_string(line));
    }
    return v;
}

}  // namespace

void write_traces_binary(std::ostream &out, std::span<const Trace> traces) {
    const Shape shape = common_shape(traces);
    if (traces.size() > std::numeric_limits<std::uint32_t>::max() ||
        shape.samples > std::numeric_limits<std::uint32_t>::max()) {
        throw ConfigError("too many traces or samples for the binary format");
    }
    out.write(kMagic, 4);
    put_le<std::uint16_t>(out, kTraceFileVersion);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(traces.size()));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(shape.samples));
    put_le<double>(out, shape.dt_ps);
    put_le<std::uint8_t>(out, shape.labelled ? 1 : 0);
    for (const auto &t : traces) {
        for (Eigen::Index i = 0; i < t.samples.size(); ++i) {
            put_le<float>(out, static_cast<float>(t.samples(i)));
        }
    }
    if (shape.labelled) {
        for (const auto &t : traces) put_le<std::uint8_t>(out, static_cast<std::uint8_t>(*t.label));
    }
    if (!out) {
        throw IoError("failed writing trace file");
    }
}

std::vector<Trace> read_traces_binary(std::istream &in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw IoError("not a trace file (bad magic)");
    }
    const auto version = get_le<std::uint16_t>(in);
    if (version != kTraceFileVersion) {
        throw IoError("unsupported trace file version " + std::to_string(version));
    }
    const auto count = get_le<std::uint32_t>(in);
    const auto samples = get_le<std::uint32_t>(in);
    const auto dt_ps = get_le<double>(in);
    const auto labelled = get_le<std::uint8_t>(in);
    if (labelled > 1) {
        throw IoError("bad label flag in trace file");
    }
    std::vector<Trace> traces(count);
    for (auto &t : traces) {
        t.dt_ps = dt_ps;
        t.samples.resize(samples);
        for (std::uint32_t i = 0; i < samples; ++i) t.samples(i) = get_le<float>(in);
    }
    if (labelled) {
        for (auto &t : traces) t.label = get_le<std::uint8_t>(in);
    }
    return traces;
}

void write_traces_csv(std::ostream &out, std::span<const Trace> traces) {
    const Shape shape = common_shape(traces);
    out << "# schema heraldsim.traces/1 dt_ps=" << std::setprecision(17) << shape.dt_ps << "\n";
    out << "label";
    for (std::size_t i = 0; i < shape.samples; ++i) out << ",s" << i;
    out << "\n";
    out << std::setprecision(9);
    for (const auto &t : traces) {
        if (t.label) out << *t.label;
        for (Eigen::Index i = 0; i < t.samples.size(); ++i) out << ',' << t.samples(i);
        out << "\n";
    }
    if (!out) {
        throw IoError("failed writing trace CSV");
    }
}

std::vector<Trace> read_traces_csv(std::istream &in) {
    std::string line;
    std::size_t line_no = 0;
    double dt_ps = 0.0;
    bool header_seen = false;
    std::size_t columns = 0;
    std::vector<Trace> traces;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const auto pos = line.find("dt_ps=");
            if (pos != std::string::npos) {
                dt_ps = parse_double(line.substr(pos + 6, line.find(' ', pos) - pos - 6), line_no);
            }
            continue;
        }
        const auto cells = split_commas(line);
        if (!header_seen) {
            if (cells.empty() || cells.front() != "label") {
                throw IoError("trace CSV header must start with 'label'");
            }
            columns = cells.size();
            header_seen = true;
            continue;
        }
        if (cells.size() != columns) {
            throw IoError("trace CSV row " + std::to_string(line_no) + " has " +
                          std::to_string(cells.size()) + " cells, expected " + std::to_string(columns));
        }
        Trace t;
        t.dt_ps = dt_ps;
        if (!cells.front().empty()) t.label = static_cast<int>(parse_double(cells.front(), line_no));
        t.samples.resize(static_cast<Eigen::Index>(columns - 1));
        for (std::size_t i = 1; i < columns; ++i) t.samples(i - 1) = parse_double(cells[i], line_no);
        traces.push_back(std::move(t));
    }
    if (!header_seen) {
        throw IoError("trace CSV has no header");
    }
    if (!(dt_ps > 0.0)) {
        throw IoError("trace CSV schema line must give dt_ps");
    }
    return traces;
}

void save_traces(const std::filesystem::path &path, std::span<const Trace> traces) {
    const bool csv = path.extension() == ".csv";
    std::ofstream out(path, csv ? std::ios::out : std::ios::out | std::ios::binary);
    if (!out) {
        throw IoError("cannot open " + path.string() + " for writing");
    }
    csv ? write_traces_csv(out, traces) : write_traces_binary(out, traces);
}

std::vector<Trace> load_traces(const std::filesystem::path &path) {
    const bool csv = path.extension() == ".csv";
    std::ifstream in(path, csv ? std::ios::in : std::ios::in | std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    return csv ? read_traces_csv(in) : read_traces_binary(in);
}

void write_slopes_csv(std::ostream &out, std::span<const SlopeSample> slopes,
                      std::span<const int> assigned) {
    if (!assigned.empty() && assigned.size() != slopes.size()) {
        throw ConfigError("one assignment per slope is required");
    }
    out << "# schema heraldsim.slopes/1\n";
    out << "trace_id,slope_mV_per_ns,assigned_n,residual_rms\n";
    out << std::setprecision(10);
    for (std::size_t i = 0; i < slopes.size(); ++i) {
        out << slopes[i].source_trace_id << ',' << slopes[i].slope << ',';
        if (!assigned.empty()) out << assigned[i];
        out << ',' << slopes[i].fit_residual_rms << "\n";
    }
    if (!out) {
        throw IoError("failed writing slope CSV");
    }
}

}  // namespace heraldsim
