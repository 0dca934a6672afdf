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

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "heraldsim/error.hpp"
#include "heraldsim/trace_io.hpp"

using namespace heraldsim;

namespace {

std::vector<Trace> sample_traces(bool labelled) {
    std::vector<Trace> out;
    for (int k = 0; k < 3; ++k) {
        Trace t;
        t.dt_ps = 40.0;
        t.samples = Eigen::VectorXd::LinSpaced(5, 0.1 * k, 1.0 + k);
        if (labelled) t.label = k + 1;
        out.push_back(t);
    }
    return out;
}

}  // namespace

TEST(trace_binary, header_layout_is_little_endian) {
    std::ostringstream out;
    write_traces_binary(out, sample_traces(true));
    const std::string bytes = out.str();
    const std::string expected_header("TRCL\x01\x00\x03\x00\x00\x00\x05\x00\x00\x00", 14);
    EXPECT_EQ(bytes.substr(0, 14), expected_header);
    // dt = 40.0 as IEEE double, then the label flag.
    EXPECT_EQ(bytes.substr(14, 8), std::string("\x00\x00\x00\x00\x00\x00\x44\x40", 8));
    EXPECT_EQ(bytes[22], '\x01');
    EXPECT_EQ(bytes.size(), 23u + 3 * 5 * 4 + 3);
    EXPECT_EQ(bytes.substr(bytes.size() - 3), std::string("\x01\x02\x03", 3));
}

TEST(trace_binary, round_trip_keeps_float_precision) {
    for (bool labelled : {false, true}) {
        const auto traces = sample_traces(labelled);
        std::stringstream buf;
        write_traces_binary(buf, traces);
        const auto back = read_traces_binary(buf);
        ASSERT_EQ(back.size(), traces.size());
        for (std::size_t i = 0; i < traces.size(); ++i) {
            EXPECT_EQ(back[i].dt_ps, 40.0);
            EXPECT_EQ(back[i].label, traces[i].label);
            EXPECT_TRUE(back[i].samples.isApprox(traces[i].samples.cast<float>().cast<double>(), 0.0));
        }
    }
}

TEST(trace_binary, rejects_bad_input) {
    std::istringstream bad_magic("TRCX\x01\x00");
    EXPECT_THROW(read_traces_binary(bad_magic), IoError);
    std::ostringstream out;
    write_traces_binary(out, sample_traces(false));
    std::istringstream truncated(out.str().substr(0, 30));
    EXPECT_THROW(read_traces_binary(truncated), IoError);
    std::string wrong_version = out.str();
    wrong_version[4] = '\x02';
    std::istringstream v2(wrong_version);
    EXPECT_THROW(read_traces_binary(v2), IoError);
}

TEST(trace_binary, rejects_mixed_shapes_and_labels) {
    auto traces = sample_traces(true);
    traces[1].label.reset();
    std::ostringstream out;
    EXPECT_THROW(write_traces_binary(out, traces), ConfigError);
    traces = sample_traces(false);
    traces[2].samples = Eigen::VectorXd::Zero(7);
    EXPECT_THROW(write_traces_binary(out, traces), ConfigError);
    traces = sample_traces(false);
    traces[0].dt_ps = 20.0;
    EXPECT_THROW(write_traces_binary(out, traces), ConfigError);
}

TEST(trace_csv, golden_layout) {
    std::vector<Trace> one(1);
    one[0].dt_ps = 40.0;
    one[0].samples = Eigen::Vector3d(0.0, 0.5, 1.25);
    one[0].label = 2;
    std::ostringstream out;
    write_traces_csv(out, one);
    EXPECT_EQ(out.str(), "# schema heraldsim.traces/1 dt_ps=40\nlabel,s0,s1,s2\n2,0,0.5,1.25\n");
}

TEST(trace_csv, round_trip) {
    for (bool labelled : {false, true}) {
        const auto traces = sample_traces(labelled);
        std::stringstream buf;
        write_traces_csv(buf, traces);
        const auto back = read_traces_csv(buf);
        ASSERT_EQ(back.size(), traces.size());
        for (std::size_t i = 0; i < traces.size(); ++i) {
            EXPECT_EQ(back[i].label, traces[i].label);
            EXPECT_DOUBLE_EQ(back[i].dt_ps, 40.0);
            EXPECT_TRUE(back[i].samples.isApprox(traces[i].samples, 1e-8));
        }
    }
}

TEST(trace_csv, rejects_malformed_rows) {
    std::istringstream ragged("# schema heraldsim.traces/1 dt_ps=40\nlabel,s0,s1\n1,0.1\n");
    EXPECT_THROW(read_traces_csv(ragged), IoError);
    std::istringstream junk("# schema heraldsim.traces/1 dt_ps=40\nlabel,s0\n1,abc\n");
    EXPECT_THROW(read_traces_csv(junk), IoError);
    std::istringstream no_dt("label,s0\n1,0.5\n");
    EXPECT_THROW(read_traces_csv(no_dt), IoError);
    std::istringstream empty("");
    EXPECT_THROW(read_traces_csv(empty), IoError);
}

TEST(trace_files, save_and_load_by_extension) {
    const auto dir = std::filesystem::temp_directory_path() / "heraldsim_trace_io_test";
    std::filesystem::create_directories(dir);
    const auto traces = sample_traces(true);
    for (const char *name : {"t.trcl", "t.csv"}) {
        save_traces(dir / name, traces);
        const auto back = load_traces(dir / name);
        ASSERT_EQ(back.size(), traces.size());
        EXPECT_EQ(back[2].label, 3);
    }
    EXPECT_THROW(load_traces(dir / "missing.trcl"), IoError);
    std::filesystem::remove_all(dir);
}

TEST(slope_csv, golden_layout) {
    std::vector<SlopeSample> s(2);
    s[0] = {0.42, 0.0, 0.001, 7, 10};
    s[1] = {0.8, 0.0, 0.002, 9, 10};
    std::ostringstream with;
    write_slopes_csv(with, s, std::vector<int>{1, 2});
    EXPECT_EQ(with.str(),
              "# schema heraldsim.slopes/1\n"
              "trace_id,slope_mV_per_ns,assigned_n,residual_rms\n"
              "7,0.42,1,0.001\n"
              "9,0.8,2,0.002\n");
    std::ostringstream without;
    write_slopes_csv(without, s, {});
    EXPECT_NE(without.str().find("7,0.42,,0.001\n"), std::string::npos);
    EXPECT_THROW(write_slopes_csv(without, s, std::vector<int>{1}), ConfigError);
}
