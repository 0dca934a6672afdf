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

// Self-contained SVG figures from result tables.

#ifndef HERALDSIM_PLOT_HPP
#define HERALDSIM_PLOT_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heraldsim/data_table.hpp"

namespace heraldsim {

enum class LegendCorner { kTopRight, kTopLeft, kBottomRight, kBottomLeft };

enum class PlotKind {
    kLines,      // one polyline per series
    kPoints,     // markers, optional error bars and model overlay
    kHistogram,  // bars with an optional overlay line
    kHeatmap,    // x/y grid coloured by z
};

struct PlotSpec {
    PlotKind kind = PlotKind::kLines;
    std::string title;
    std::string schema;  // when set, the dataset schema name must match
    std::string x;
    std::string y;
    std::string x_label;
    std::string y_label;
    std::vector<std::string> series;  // columns whose values split rows into series
    std::optional<std::string> style_by;  // click -> dashed, ppnr -> dotted, pnr -> dash-dot
    std::optional<std::string> y_error;
    std::optional<std::string> y_overlay;  // drawn as a line on the left axis
    std::optional<std::string> y2;         // right axis
    std::string y2_label;
    std::optional<std::string> z;  // heatmap value
    std::string z_label;
    bool log_x = false;
    bool log_y = false;
    bool log_z = false;
    LegendCorner legend = LegendCorner::kTopRight;
    int width = 720;
    int height = 480;
};

/// Named presets: fig3a_curves, fig3a_points, fig3b_sweep, fig4_surface,
/// fig2b_histogram, klyshko_calibration. Throws ConfigError for other names.
PlotSpec plot_preset(std::string_view name);

/// A preset name, or a TOML file carrying PlotSpec keys.
PlotSpec load_plot_spec(const std::string &name_or_path);

/// Deterministic SVG document. Throws ConfigError on a schema mismatch.
std::string emit_plot(const DataTable &data, const PlotSpec &spec);

}  // namespace heraldsim

#endif  // HERALDSIM_PLOT_HPP
