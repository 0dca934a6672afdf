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

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "heraldsim/error.hpp"
#include "heraldsim/plot.hpp"
#include "heraldsim/scenario.hpp"

namespace heraldsim {

namespace {

constexpr std::pair<ScenarioKind, std::string_view> kScenarioNames[] = {
    {ScenarioKind::kFig3aCurves, "fig3a_curves"},
    {ScenarioKind::kFig3aPoints, "fig3a_points"},
    {ScenarioKind::kFig3bSweep, "fig3b_sweep"},
    {ScenarioKind::kFig4Surface, "fig4_surface"},
    {ScenarioKind::kFig2bHistogram, "fig2b_histogram"},
    {ScenarioKind::kKlyshkoCalibration, "klyshko_calibration"},
    {ScenarioKind::kCustom, "custom"},
};

// Typed access to one TOML table that remembers which keys were read, so
// misspelt keys surface as errors instead of silently taking defaults.
class Section {
  public:
    Section(const toml::table *table, std::string name, const std::string &origin)
        : table_(table), name_(std::move(name)), origin_(origin) {}

    bool present() const { return table_ != nullptr; }

    std::optional<double> number(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        if (auto v = n->value<double>(); v && (n->is_integer() || n->is_floating_point())) return *v;
        fail(*n, key, "a number");
    }

    std::optional<std::int64_t> integer(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        if (n->is_integer()) return *n->value<std::int64_t>();
        if (n->is_floating_point()) {
            const double d = *n->value<double>();
            if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
        }
        fail(*n, key, "an integer");
    }

    std::optional<bool> boolean(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        if (n->is_boolean()) return *n->value<bool>();
        fail(*n, key, "true or false");
    }

    std::optional<std::string> string(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        if (n->is_string()) return *n->value<std::string>();
        fail(*n, key, "a string");
    }

    std::optional<std::vector<std::string>> strings(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        std::vector<std::string> out;
        if (const auto *arr = n->as_array()) {
            for (const auto &e : *arr) {
                if (!e.is_string()) fail(e, key, "an array of strings");
                out.push_back(*e.value<std::string>());
            }
            return out;
        }
        if (n->is_string()) return std::vector<std::string>{*n->value<std::string>()};
        fail(*n, key, "an array of strings");
    }

    // An array of numbers, a single number, or {start, stop, steps, spacing}.
    std::optional<std::vector<double>> grid(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        std::vector<double> out;
        if (const auto *arr = n->as_array()) {
            for (const auto &e : *arr) {
                if (!(e.is_integer() || e.is_floating_point())) fail(e, key, "an array of numbers");
                out.push_back(*e.value<double>());
            }
            return out;
        }
        if (n->is_integer() || n->is_floating_point()) return std::vector<double>{*n->value<double>()};
        if (const auto *tbl = n->as_table()) {
            Section range(tbl, name_ + "." + std::string(key), origin_);
            const auto start = range.number("start");
            const auto stop = range.number("stop");
            const auto steps = range.integer("steps");
            const auto spacing = range.string("spacing").value_or("linear");
            range.finish();
            if (!start || !stop || !steps) fail(*n, key, "a table with start, stop and steps");
            if (spacing == "linear") return linspace(*start, *stop, static_cast<int>(*steps));
            if (spacing == "log") {
                if (!(*start > 0.0 && *stop > 0.0)) fail(*n, key, "positive bounds for log spacing");
                auto v = linspace(std::log10(*start), std::log10(*stop), static_cast<int>(*steps));
                for (double &x : v) x = std::pow(10.0, x);
                v.front() = *start;
                v.back() = *stop;
                return v;
            }
            fail(*n, key, "spacing \"linear\" or \"log\"");
        }
        fail(*n, key, "a number, an array of numbers or a range table");
    }

    std::optional<std::vector<std::vector<double>>> matrix(std::string_view key) {
        const toml::node *n = get(key);
        if (!n) return std::nullopt;
        std::vector<std::vector<double>> out;
        const auto *arr = n->as_array();
        if (!arr) fail(*n, key, "an array of rows");
        for (const auto &row : *arr) {
            const auto *r = row.as_array();
            if (!r) fail(row, key, "an array of rows");
            out.emplace_back();
            for (const auto &e : *r) {
                if (!(e.is_integer() || e.is_floating_point())) fail(e, key, "numeric rows");
                out.back().push_back(*e.value<double>());
            }
        }
        return out;
    }

    void finish() const {
        if (!table_) return;
        for (const auto &[k, v] : *table_) {
            const std::string key(k.str());
            if (!used_.count(key) && !nested_.count(key)) {
                throw ConfigError(origin_ + ":" + std::to_string(v.source().begin.line) + ": unknown key '" +
                                  key + "' in " + (name_.empty() ? std::string("top level") : "[" + name_ + "]"));
            }
        }
    }

    Section child(std::string_view key) {
        nested_.insert(std::string(key));
        if (!table_) return Section(nullptr, std::string(key), origin_);
        const toml::node *n = table_->get(key);
        if (n && !n->is_table()) fail(*n, key, "a table");
        return Section(n ? n->as_table() : nullptr, std::string(key), origin_);
    }

  private:
    const toml::node *get(std::string_view key) {
        used_.insert(std::string(key));
        return table_ ? table_->get(key) : nullptr;
    }

    [[noreturn]] void fail(const toml::node &n, std::string_view key, const std::string &expected) const {
        throw ConfigError(origin_ + ":" + std::to_string(n.source().begin.line) + ": " +
                          (name_.empty() ? "" : name_ + ".") + std::string(key) + " must be " + expected);
    }

    const toml::table *table_;
    std::string name_;
    std::string origin_;
    std::set<std::string> used_;
    std::set<std::string> nested_;
};

HeraldDetector parse_detector(const std::string &name, int ppnr_default) {
    if (name == "click") return HeraldDetector::click();
    if (name == "pnr") return HeraldDetector::pnr();
    if (name.rfind("ppnr", 0) == 0) {
        if (name == "ppnr") return HeraldDetector::pseudo_pnr(ppnr_default);
        if (name.size() > 5 && name[4] == ':') {
            try {
                std::size_t used = 0;
                const int m = std::stoi(name.substr(5), &used);
                if (used == name.size() - 5) return HeraldDetector::pseudo_pnr(m);
            } catch (const std::exception &) {
            }
        }
    }
    throw ConfigError("unknown detector '" + name + "' (expected click, ppnr, ppnr:<M> or pnr)");
}

MixtureBackend parse_backend(const std::string &name) {
    if (name == "lsq" || name == "histogram") return MixtureBackend::kHistogramLeastSquares;
    if (name == "em") return MixtureBackend::kExpectationMaximization;
    throw ConfigError("unknown mixture backend '" + name + "' (expected lsq or em)");
}

std::string_view backend_name(MixtureBackend b) {
    return b == MixtureBackend::kExpectationMaximization ? "em" : "lsq";
}

void require(bool ok, const std::string &message) {
    if (!ok) throw ConfigError(message);
}

bool uses_monte_carlo(ScenarioKind k) {
    return k == ScenarioKind::kFig3aPoints || k == ScenarioKind::kFig3bSweep ||
           k == ScenarioKind::kFig2bHistogram || k == ScenarioKind::kKlyshkoCalibration ||
           k == ScenarioKind::kCustom;
}

}  // namespace

std::string_view to_string(ScenarioKind kind) {
    for (const auto &[k, name] : kScenarioNames) {
        if (k == kind) return name;
    }
    return "unknown";
}

ScenarioKind scenario_from_string(std::string_view name) {
    for (const auto &[k, n] : kScenarioNames) {
        if (n == name) return k;
    }
    throw ConfigError("unknown scenario '" + std::string(name) + "'");
}

std::vector<double> ScenarioConfig::squeezing_grid() const {
    if (!lambda_sq.empty()) return lambda_sq;
    std::vector<double> out;
    out.reserve(pump_power.size());
    for (double p : pump_power) out.push_back(squeezing_from_pump(p, pump_slope).lambda_sq());
    return out;
}

void ScenarioConfig::validate() const {
    const std::string where = std::string(to_string(scenario)) + ": ";
    require(threads >= 1, where + "threads must be at least 1");
    require(!formats.empty(), where + "at least one output format is required");
    require(lambda_sq.empty() || pump_power.empty(), where + "give lambda_sq or pump_power, not both");
    const auto grid = squeezing_grid();
    require(!grid.empty(), where + "the source needs lambda_sq or pump_power values");
    const bool surface = scenario == ScenarioKind::kFig4Surface;
    for (double x : grid) {
        require(std::isfinite(x) && x >= 0.0 && x < 1.0, where + "lambda^2 values must lie in [0, 1)");
        require(surface || x > 0.0, where + "lambda^2 must be positive outside fig4_surface");
    }
    require(!eta_herald.empty(), where + "herald.eta needs at least one value");
    for (double e : eta_herald) {
        require(e >= 0.0 && e <= 1.0, where + "herald efficiencies must lie in [0, 1]");
        require(surface || e > 0.0, where + "herald efficiency must be positive outside fig4_surface");
    }
    for (double e : {eta_signal, eta_d1, eta_d2}) {
        require(e >= 0.0 && e <= 1.0, where + "signal-arm efficiencies must lie in [0, 1]");
    }
    require(dark_click_prob >= 0.0 && dark_click_prob <= 1.0, where + "dark_click_prob must lie in [0, 1]");
    require(fock_cutoff >= 0, where + "fock_cutoff must be non-negative");
    if (scenario == ScenarioKind::kFig3aCurves || scenario == ScenarioKind::kFig3aPoints ||
        scenario == ScenarioKind::kCustom) {
        require(!detectors.empty(), where + "herald.detectors needs at least one detector");
    }
    for (const auto &d : detectors) {
        require(d.kind != HeraldDetector::Kind::kPseudoPnr || d.num_detectors >= 1,
                where + "pseudo-PNR needs at least one detector");
    }
    if (uses_monte_carlo(scenario)) require(shots >= 1, where + "monte_carlo.shots must be at least 1");
    if (scenario == ScenarioKind::kKlyshkoCalibration) {
        require(pump_power.size() >= 2, where + "the Klyshko fit needs at least two pump powers");
        for (double x : calibration_lambda_sq) {
            require(x > 0.0 && x < 1.0, where + "calibration.lambda_sq values must lie in (0, 1)");
        }
        require(target_reduction > 0.0 && target_reduction < 1.0,
                where + "calibration.target_reduction must lie in (0, 1)");
    }
    if (scenario == ScenarioKind::kFig3bSweep) {
        require(!sweep_edges.empty(), where + "sweep.edges needs at least one edge");
        for (double e : sweep_edges) require(std::isfinite(e), where + "sweep edges must be finite");
    }
    if (scenario == ScenarioKind::kFig3bSweep || scenario == ScenarioKind::kFig2bHistogram) {
        synth.validate();
        require(slope.lower_frac > 0.0 && slope.lower_frac < slope.upper_frac && slope.upper_frac < 1.0,
                where + "slope window must satisfy 0 < lower < upper < 1");
    }
    if (scenario == ScenarioKind::kFig2bHistogram) {
        require(num_traces >= mixture.min_samples, where + "traces.count is below the fit's minimum sample size");
        require(!mixture.num_components || *mixture.num_components >= 1,
                where + "fit.components must be at least 1 (or 0 for automatic)");
    }
}

std::vector<std::string> ScenarioConfig::expected_outputs() const {
    std::vector<std::string> tables;
    std::vector<std::string> extra;
    switch (scenario) {
        case ScenarioKind::kFig3aCurves: tables = {"fig3a_curves"}; break;
        case ScenarioKind::kFig3aPoints: tables = {"fig3a_points", "fig3a_ratio"}; break;
        case ScenarioKind::kFig3bSweep: tables = {"fig3b_sweep"}; break;
        case ScenarioKind::kFig4Surface: tables = {"fig4_surface"}; break;
        case ScenarioKind::kFig2bHistogram:
            tables = {"fig2b_histogram", "fig2b_mixture", "fig2b_confusion", "fig2b_distribution"};
            if (write_slopes) extra.push_back("fig2b_slopes.csv");
            break;
        case ScenarioKind::kKlyshkoCalibration:
            tables = {"klyshko_points", "klyshko_fit", "reduction_calibration"};
            break;
        case ScenarioKind::kCustom: tables = {"custom"}; break;
    }
    std::vector<std::string> out;
    for (const auto &t : tables) {
        for (auto f : formats) out.push_back(t + (f == OutputFormat::kCsv ? ".csv" : ".json"));
    }
    out.insert(out.end(), extra.begin(), extra.end());
    if (plots && scenario != ScenarioKind::kCustom) out.push_back(std::string(to_string(scenario)) + ".svg");
    return out;
}

std::string ScenarioConfig::canonical_json() const {
    nlohmann::ordered_json j;
    j["scenario"] = to_string(scenario);
    j["seed"] = seed;
    j["source"] = {{"lambda_sq", lambda_sq},         {"pump_power", pump_power},
                   {"pump_slope", pump_slope},       {"eta_signal", eta_signal},
                   {"eta_d1", eta_d1},               {"eta_d2", eta_d2},
                   {"dark_click_prob", dark_click_prob}, {"fock_cutoff", fock_cutoff}};
    std::vector<std::string> dets;
    for (const auto &d : detectors) {
        dets.push_back(d.kind == HeraldDetector::Kind::kPseudoPnr ? "ppnr:" + std::to_string(d.num_detectors)
                                                                  : d.describe());
    }
    j["herald"] = {{"eta", eta_herald}, {"detectors", dets}};
    if (confusion) {
        std::vector<std::vector<double>> rows;
        for (Eigen::Index r = 0; r < confusion->matrix().rows(); ++r) {
            rows.emplace_back();
            for (Eigen::Index c = 0; c < confusion->matrix().cols(); ++c) rows.back().push_back(confusion->matrix()(r, c));
        }
        j["herald"]["confusion"] = rows;
    }
    j["monte_carlo"] = {{"shots", shots}};
    j["traces"] = {{"count", num_traces},
                   {"synthesize", synthesize_traces},
                   {"write_slopes", write_slopes},
                   {"rise_time_ps", synth.rise_time_ps},
                   {"slope_means", synth.slope_means},
                   {"slope_sigmas", synth.slope_sigmas},
                   {"amplitude_mv", synth.amplitude_mv},
                   {"noise_mv", synth.noise_rms_mv},
                   {"sample_rate_hz", synth.sample_rate_hz},
                   {"pre_trigger_ps", synth.pre_trigger_ps},
                   {"decay_time_ps", synth.decay_time_ps},
                   {"samples_per_trace", synth.samples_per_trace},
                   {"lower_frac", slope.lower_frac},
                   {"upper_frac", slope.upper_frac}};
    j["fit"] = {{"components", mixture.num_components.value_or(0)},
                {"backend", backend_name(mixture.backend)},
                {"bin_width", mixture.bin_width.value_or(0.0)},
                {"max_iterations", mixture.max_iterations},
                {"min_samples", mixture.min_samples}};
    j["sweep"] = {{"edges", sweep_edges}};
    j["calibration"] = {{"lambda_sq", calibration_lambda_sq}, {"target_reduction", target_reduction}};
    std::vector<std::string> fmts;
    for (auto f : formats) fmts.push_back(f == OutputFormat::kCsv ? "csv" : "json");
    j["output"] = {{"formats", fmts}, {"plots", plots}};
    return j.dump();
}

ScenarioConfig parse_scenario_config(std::string_view text, const std::string &origin) {
    toml::table doc;
    try {
        doc = toml::parse(text, origin);
    } catch (const toml::parse_error &e) {
        throw ConfigError(origin + ":" + std::to_string(e.source().begin.line) + ": " +
                          std::string(e.description()));
    }
    ScenarioConfig c;
    Section top(&doc, "", origin);
    const auto scenario = top.string("scenario");
    require(scenario.has_value(), origin + ": missing required key 'scenario'");
    c.scenario = scenario_from_string(*scenario);
    if (auto v = top.integer("seed")) {
        require(*v >= 0, origin + ": seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(*v);
    }
    if (auto v = top.integer("threads")) c.threads = static_cast<int>(*v);

    Section source = top.child("source");
    if (auto v = source.grid("lambda_sq")) c.lambda_sq = *v;
    if (auto v = source.grid("pump_power")) c.pump_power = *v;
    if (auto v = source.number("pump_slope")) c.pump_slope = *v;
    if (auto v = source.number("eta_signal")) c.eta_signal = *v;
    if (auto v = source.number("eta_d1")) c.eta_d1 = *v;
    if (auto v = source.number("eta_d2")) c.eta_d2 = *v;
    if (auto v = source.number("dark_click_prob")) c.dark_click_prob = *v;
    if (auto v = source.integer("fock_cutoff")) c.fock_cutoff = static_cast<int>(*v);
    source.finish();

    Section herald = top.child("herald");
    c.eta_herald = herald.grid("eta").value_or(std::vector<double>{0.1622, 0.2961});
    const int ppnr = static_cast<int>(herald.integer("ppnr_detectors").value_or(2));
    const auto p12 = herald.number("p_1_given_2");
    const auto p21 = herald.number("p_2_given_1");
    const int resolved = static_cast<int>(herald.integer("resolved").value_or(4));
    const auto full = herald.matrix("confusion");
    if (full) {
        require(!p12 && !p21, origin + ": give herald.confusion or the pair probabilities, not both");
        Eigen::MatrixXd m(full->size(), full->size());
        for (std::size_t r = 0; r < full->size(); ++r) {
            require((*full)[r].size() == full->size(), origin + ": herald.confusion must be square");
            for (std::size_t k = 0; k < full->size(); ++k) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = (*full)[r][k];
            }
        }
        c.confusion = ConfusionMatrix(m);
    } else if (p12 || p21) {
        c.confusion = ConfusionMatrix::from_pair(p12.value_or(0.0), p21.value_or(0.0), resolved);
    }
    const auto names = herald.strings("detectors").value_or(
        c.scenario == ScenarioKind::kFig3aCurves ? std::vector<std::string>{"click", "ppnr", "pnr"}
                                                 : std::vector<std::string>{"pnr"});
    for (const auto &n : names) {
        auto d = parse_detector(n, ppnr);
        if (d.kind == HeraldDetector::Kind::kPnr) d.confusion = c.confusion;
        c.detectors.push_back(std::move(d));
    }
    herald.finish();

    Section mc = top.child("monte_carlo");
    if (auto v = mc.integer("shots")) {
        require(*v >= 0, origin + ": monte_carlo.shots must be non-negative");
        c.shots = static_cast<std::uint64_t>(*v);
    }
    mc.finish();

    Section traces = top.child("traces");
    if (auto v = traces.integer("count")) {
        require(*v >= 0, origin + ": traces.count must be non-negative");
        c.num_traces = static_cast<std::uint64_t>(*v);
    }
    if (auto v = traces.boolean("synthesize")) c.synthesize_traces = *v;
    if (auto v = traces.boolean("write_slopes")) c.write_slopes = *v;
    if (auto v = traces.number("rise_time_ps")) c.synth.rise_time_ps = *v;
    if (auto v = traces.grid("slope_means")) c.synth.slope_means = *v;
    if (auto v = traces.grid("slope_sigmas")) c.synth.slope_sigmas = *v;
    if (auto v = traces.number("amplitude_mv")) c.synth.amplitude_mv = *v;
    if (auto v = traces.number("noise_mv")) c.synth.noise_rms_mv = *v;
    if (auto v = traces.number("sample_rate_hz")) c.synth.sample_rate_hz = *v;
    if (auto v = traces.number("pre_trigger_ps")) c.synth.pre_trigger_ps = *v;
    if (auto v = traces.number("decay_time_ps")) c.synth.decay_time_ps = *v;
    if (auto v = traces.integer("samples_per_trace")) c.synth.samples_per_trace = static_cast<int>(*v);
    if (auto v = traces.number("lower_frac")) c.slope.lower_frac = *v;
    if (auto v = traces.number("upper_frac")) c.slope.upper_frac = *v;
    traces.finish();

    Section fit = top.child("fit");
    if (auto v = fit.integer("components"); v && *v != 0) c.mixture.num_components = static_cast<int>(*v);
    if (auto v = fit.string("backend")) c.mixture.backend = parse_backend(*v);
    if (auto v = fit.number("bin_width"); v && *v > 0.0) c.mixture.bin_width = *v;
    if (auto v = fit.integer("max_iterations")) c.mixture.max_iterations = static_cast<int>(*v);
    if (auto v = fit.integer("min_samples")) {
        require(*v >= 1, origin + ": fit.min_samples must be at least 1");
        c.mixture.min_samples = static_cast<std::size_t>(*v);
    }
    fit.finish();

    Section sweep = top.child("sweep");
    if (auto v = sweep.grid("edges")) c.sweep_edges = *v;
    sweep.finish();

    Section calibration = top.child("calibration");
    if (auto v = calibration.grid("lambda_sq")) c.calibration_lambda_sq = *v;
    if (auto v = calibration.number("target_reduction")) c.target_reduction = *v;
    calibration.finish();

    Section output = top.child("output");
    if (auto v = output.string("directory")) c.out_dir = *v;
    if (auto v = output.strings("formats")) {
        c.formats.clear();
        for (const auto &f : *v) {
            if (f == "csv") {
                c.formats.push_back(OutputFormat::kCsv);
            } else if (f == "json") {
                c.formats.push_back(OutputFormat::kJson);
            } else {
                throw ConfigError(origin + ": unknown output format '" + f + "' (expected csv or json)");
            }
        }
    }
    if (auto v = output.boolean("plots")) c.plots = *v;
    output.finish();

    top.finish();
    c.validate();
    return c;
}

ScenarioConfig load_scenario_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config " + path.string());
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_scenario_config(text.str(), path.string());
}

PlotSpec load_plot_spec(const std::string &name_or_path) {
    const std::filesystem::path path(name_or_path);
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        if (path.has_extension()) {
            throw IoError("cannot open plot spec " + name_or_path);
        }
        return plot_preset(name_or_path);
    }
    toml::table doc;
    try {
        doc = toml::parse_file(name_or_path);
    } catch (const toml::parse_error &e) {
        throw ConfigError(name_or_path + ":" + std::to_string(e.source().begin.line) + ": " +
                          std::string(e.description()));
    }
    Section s(&doc, "", name_or_path);
    PlotSpec spec;
    if (auto v = s.string("preset")) spec = plot_preset(*v);
    if (auto v = s.string("kind")) {
        if (*v == "lines") {
            spec.kind = PlotKind::kLines;
        } else if (*v == "points") {
            spec.kind = PlotKind::kPoints;
        } else if (*v == "histogram") {
            spec.kind = PlotKind::kHistogram;
        } else if (*v == "heatmap") {
            spec.kind = PlotKind::kHeatmap;
        } else {
            throw ConfigError(name_or_path + ": unknown plot kind '" + *v + "'");
        }
    }
    const auto text = [&](std::string_view key, std::string &field) {
        if (auto v = s.string(key)) field = *v;
    };
    const auto opt = [&](std::string_view key, std::optional<std::string> &field) {
        if (auto v = s.string(key)) field = *v;
    };
    text("title", spec.title);
    text("schema", spec.schema);
    text("x", spec.x);
    text("y", spec.y);
    text("x_label", spec.x_label);
    text("y_label", spec.y_label);
    text("y2_label", spec.y2_label);
    text("z_label", spec.z_label);
    opt("style_by", spec.style_by);
    opt("y_error", spec.y_error);
    opt("y_overlay", spec.y_overlay);
    opt("y2", spec.y2);
    opt("z", spec.z);
    if (auto v = s.strings("series")) spec.series = *v;
    if (auto v = s.boolean("log_x")) spec.log_x = *v;
    if (auto v = s.boolean("log_y")) spec.log_y = *v;
    if (auto v = s.boolean("log_z")) spec.log_z = *v;
    if (auto v = s.string("legend")) {
        if (*v == "top-right") {
            spec.legend = LegendCorner::kTopRight;
        } else if (*v == "top-left") {
            spec.legend = LegendCorner::kTopLeft;
        } else if (*v == "bottom-right") {
            spec.legend = LegendCorner::kBottomRight;
        } else if (*v == "bottom-left") {
            spec.legend = LegendCorner::kBottomLeft;
        } else {
            throw ConfigError(name_or_path + ": unknown legend corner '" + *v + "'");
        }
    }
    if (auto v = s.integer("width")) spec.width = static_cast<int>(*v);
    if (auto v = s.integer("height")) spec.height = static_cast<int>(*v);
    s.finish();
    require(!spec.x.empty() && !spec.y.empty(), name_or_path + ": plot spec needs x and y columns");
    require(spec.width >= 200 && spec.height >= 150, name_or_path + ": plot size too small");
    return spec;
}

}  // namespace heraldsim
