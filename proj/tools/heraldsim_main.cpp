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

// heraldsim command-line front end.
//
// Exit codes: 0 success, 1 unexpected failure, 2 configuration or usage error,
// 3 computation error (including failed agreement checks), 4 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "heraldsim/error.hpp"
#include "heraldsim/plot.hpp"
#include "heraldsim/scenario.hpp"
#include "heraldsim/trace_io.hpp"

namespace {

using namespace heraldsim;

constexpr int kExitConfig = 2;
constexpr int kExitCompute = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<int> threads;
    std::optional<std::string> format;
};

void add_common(CLI::App *cmd, CommonFlags &f) {
    cmd->add_option("--seed", f.seed, "Base RNG seed (overrides the config)");
    cmd->add_option("--out-dir", f.out_dir, "Output directory (overrides HERALDSIM_OUT_DIR and the config)");
    cmd->add_option("--threads", f.threads, "Worker threads (overrides HERALDSIM_THREADS and the config)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--format", f.format, "Table format")->check(CLI::IsMember({"csv", "json"}));
}

std::optional<std::string> env(const char *name) {
    const char *v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

int env_threads() {
    const auto v = env("HERALDSIM_THREADS");
    if (!v) return 0;
    try {
        std::size_t used = 0;
        const int n = std::stoi(*v, &used);
        if (used == v->size() && n >= 1) return n;
    } catch (const std::exception &) {
    }
    throw ConfigError("HERALDSIM_THREADS must be a positive integer, got '" + *v + "'");
}

// Flag, then environment, then the given fallback.
std::filesystem::path resolve_out_dir(const CommonFlags &f, const std::filesystem::path &fallback) {
    if (f.out_dir) return *f.out_dir;
    if (auto e = env("HERALDSIM_OUT_DIR")) return *e;
    return fallback;
}

int resolve_threads(const CommonFlags &f, int fallback) {
    if (f.threads) return *f.threads;
    if (int n = env_threads()) return n;
    return fallback;
}

void apply_overrides(ScenarioConfig &c, const CommonFlags &f) {
    if (f.seed) c.seed = *f.seed;
    c.out_dir = resolve_out_dir(f, c.out_dir);
    c.threads = resolve_threads(f, c.threads);
    if (f.format) c.formats = {*f.format == "json" ? OutputFormat::kJson : OutputFormat::kCsv};
    c.validate();
}

int cmd_run(const std::string &config_path, const CommonFlags &f) {
    ScenarioConfig c = load_scenario_config(config_path);
    apply_overrides(c, f);
    std::cout << "running " << to_string(c.scenario) << " -> " << c.out_dir.string() << "\n";
    RunManifest m;
    try {
        m = run_scenario(c);
    } catch (const ComputeError &) {
        std::cerr << "outputs and manifest.json were written to " << c.out_dir.string() << "\n";
        throw;
    }
    for (const auto &o : m.outputs) std::cout << "  " << o.file << "  " << o.checksum << "\n";
    for (const auto &[k, v] : m.summary) std::cout << "  " << k << " = " << format_number(v) << "\n";
    for (const auto &ch : m.checks) {
        std::cout << "  check " << ch.name << ": " << (ch.passed ? "ok" : "FAILED") << " (" << ch.detail << ")\n";
    }
    std::cout << "config hash " << m.config_hash << "\n";
    return 0;
}

int cmd_validate(const std::string &config_path, const CommonFlags &f) {
    ScenarioConfig c = load_scenario_config(config_path);
    apply_overrides(c, f);
    std::cout << config_path << ": valid " << to_string(c.scenario) << " scenario\n";
    std::cout << "config hash " << fnv1a64_hex(c.canonical_json()) << "\n";
    std::cout << "outputs in " << c.out_dir.string() << ":\n";
    for (const auto &o : c.expected_outputs()) std::cout << "  " << o << "\n";
    std::cout << "  manifest.json\n";
    return 0;
}

void write_file(const std::filesystem::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    out.close();
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

int cmd_plot(const std::string &csv, const std::string &spec_name, const std::string &output, const CommonFlags &f) {
    const DataTable data = load_csv(csv);
    const PlotSpec spec = load_plot_spec(spec_name);
    std::filesystem::path target = output;
    if (target.empty()) {
        const std::filesystem::path src(csv);
        const auto dir = resolve_out_dir(f, src.parent_path());
        target = dir / src.filename().replace_extension(".svg");
    }
    write_file(target, emit_plot(data, spec));
    std::cout << "wrote " << target.string() << "\n";
    return 0;
}

struct SynthFlags {
    std::string output;
    std::uint64_t count = 10000;
    double lambda_sq = 0.08;
    double eta = 0.2961;
    double noise_mv = 0.0;
    double rise_time_ps = 400.0;
    double sample_rate_hz = 25e9;
};

int cmd_traces_synth(const SynthFlags &s, const CommonFlags &f) {
    ExperimentConfig mc;
    mc.squeezing = SqueezingParam::from_lambda_sq(s.lambda_sq);
    mc.eta_herald = s.eta;
    mc.herald = HeraldDetector::pnr();
    mc.rng_seed = f.seed.value_or(1);
    const int threads = resolve_threads(f, 1);
    const auto labels = heralded_photon_numbers(mc, s.count, threads);
    TraceSynthConfig synth;
    synth.noise_rms_mv = s.noise_mv;
    synth.rise_time_ps = s.rise_time_ps;
    synth.sample_rate_hz = s.sample_rate_hz;
    const auto traces = synthesize_traces(synth, labels, mix64(mc.rng_seed + 1), threads);
    std::filesystem::path target = s.output;
    if (target.is_relative() && (f.out_dir || env("HERALDSIM_OUT_DIR"))) target = resolve_out_dir(f, ".") / target;
    if (target.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(target.parent_path(), ec);
    }
    save_traces(target, traces);
    std::cout << "wrote " << traces.size() << " labelled traces (" << synth.effective_samples()
              << " samples each) to " << target.string() << "\n";
    return 0;
}

struct AnalyzeFlags {
    std::string input;
    int components = 0;
    std::string backend = "lsq";
};

int cmd_traces_analyze(const AnalyzeFlags &a, const CommonFlags &f) {
    const auto traces = load_traces(a.input);
    const int threads = resolve_threads(f, 1);
    const auto batch = extract_slopes(traces, {}, threads);
    MixtureOptions opts;
    if (a.components > 0) opts.num_components = a.components;
    opts.backend = a.backend == "em" ? MixtureBackend::kExpectationMaximization : MixtureBackend::kHistogramLeastSquares;
    const auto mixture = fit_mixture(std::span<const SlopeSample>(batch.slopes), opts);
    const auto edges = compute_bin_edges(mixture);
    std::vector<double> values;
    for (const auto &s : batch.slopes) values.push_back(s.slope);
    const auto assigned = assign_photon_numbers(values, edges);
    const auto confusion = confusion_from_mixture(mixture, edges);

    const auto dir = resolve_out_dir(f, ".");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ostringstream slopes_csv;
    write_slopes_csv(slopes_csv, batch.slopes, assigned);
    write_file(dir / "slopes.csv", slopes_csv.str());

    DataTable comps("heraldsim.trace_mixture/1", {"component", "weight", "mean", "sigma", "upper_edge"});
    for (int k = 0; k < mixture.size(); ++k) {
        const auto &g = mixture.components[k];
        comps.add_row({static_cast<std::int64_t>(k + 1), g.weight, g.mean, g.sigma,
                       k + 1 < mixture.size() ? Cell(edges.edges[k]) : Cell(std::string("inf"))});
    }
    DataTable conf("heraldsim.trace_confusion/1", {"true_n", "reported_n", "probability"});
    for (int t = confusion.first_label(); t <= confusion.last_label(); ++t) {
        for (int r = confusion.first_label(); r <= confusion.last_label(); ++r) {
            conf.add_row({static_cast<std::int64_t>(t), static_cast<std::int64_t>(r), confusion(t, r)});
        }
    }
    const bool json = f.format && *f.format == "json";
    write_file(dir / (json ? "mixture.json" : "mixture.csv"), json ? to_json(comps) : to_csv(comps));
    write_file(dir / (json ? "confusion.json" : "confusion.csv"), json ? to_json(conf) : to_csv(conf));

    std::cout << traces.size() << " traces, " << batch.rejected.size() << " rejected, " << mixture.size()
              << " components\n";
    for (std::size_t k = 0; k < edges.edges.size(); ++k) {
        std::cout << "  edge " << k + 1 << "|" << k + 2 << " = " << format_number(edges.edges[k]) << " mV/ns"
                  << (edges.fallback[k] ? " (fallback)" : "") << "\n";
    }
    if (confusion.dim() >= 2) {
        std::cout << "  P(1|2) = " << format_number(confusion(2, 1)) << ", P(2|1) = " << format_number(confusion(1, 2))
                  << "\n";
    }
    if (!traces.empty() && traces.front().label) {
        std::vector<int> truth;
        for (const auto &s : batch.slopes) truth.push_back(*traces[static_cast<std::size_t>(s.source_trace_id)].label);
        const int max_label = std::max(4, edges.num_classes());
        const auto p = label_distribution(truth, max_label);
        const auto q = label_distribution(assigned, max_label);
        std::cout << "  TV(binned, true) = "
                  << format_number(total_variation_distance(std::span<const double>(p.data(), p.size()),
                                                            std::span<const double>(q.data(), q.size())))
                  << ", TV(click, true) = " << format_number(1.0 - p(1)) << "\n";
    }
    std::cout << "wrote slopes.csv, " << (json ? "mixture.json, confusion.json" : "mixture.csv, confusion.csv")
              << " to " << dir.string() << "\n";
    return 0;
}

int exit_code(const heraldsim::Error &e) {
    switch (e.kind()) {
        case ErrorKind::kConfig: return kExitConfig;
        case ErrorKind::kCompute: return kExitCompute;
        case ErrorKind::kIo: return kExitIo;
    }
    return 1;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"heraldsim: heralded single-photon source simulation and waveform analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(heraldsim::kArtifactVersion));

    CommonFlags flags;
    std::string config_path;
    auto *run = app.add_subcommand("run", "Run a scenario and write its outputs and manifest");
    run->add_option("config", config_path, "Scenario TOML file")->required();
    add_common(run, flags);

    auto *validate = app.add_subcommand("validate", "Check a scenario file and list the outputs it would write");
    validate->add_option("config", config_path, "Scenario TOML file")->required();
    add_common(validate, flags);

    std::string csv_path;
    std::string spec_name;
    std::string plot_output;
    auto *plot = app.add_subcommand("plot", "Render a result CSV as SVG");
    plot->add_option("csv", csv_path, "Result table")->required();
    plot->add_option("spec", spec_name, "Preset name (e.g. fig3b_sweep) or plot-spec TOML file")->required();
    plot->add_option("-o,--output", plot_output, "SVG path (default: next to the CSV, or in --out-dir)");
    add_common(plot, flags);

    auto *traces = app.add_subcommand("traces", "Synthesize or analyze detector waveforms");
    traces->require_subcommand(1);
    SynthFlags synth;
    auto *synth_cmd = traces->add_subcommand("synth", "Write labelled synthetic traces (.trcl binary or .csv)");
    synth_cmd->add_option("output", synth.output, "Trace file to write")->required();
    synth_cmd->add_option("--count", synth.count, "Number of heralded traces")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--lambda-sq", synth.lambda_sq, "Squeezing lambda^2")->check(CLI::Range(0.0, 0.999));
    synth_cmd->add_option("--eta", synth.eta, "Herald efficiency")->check(CLI::Range(1e-9, 1.0));
    synth_cmd->add_option("--noise-mv", synth.noise_mv, "RMS white noise (mV)")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--rise-time-ps", synth.rise_time_ps, "Fastest edge duration (ps)")
        ->check(CLI::PositiveNumber);
    synth_cmd->add_option("--sample-rate-hz", synth.sample_rate_hz, "Sample rate")->check(CLI::PositiveNumber);
    add_common(synth_cmd, flags);

    AnalyzeFlags analyze;
    auto *analyze_cmd = traces->add_subcommand("analyze", "Extract slopes, fit the mixture and bin photon numbers");
    analyze_cmd->add_option("input", analyze.input, "Trace file (.trcl or .csv)")->required();
    analyze_cmd->add_option("--components", analyze.components, "Mixture components (0 = automatic)")
        ->check(CLI::NonNegativeNumber);
    analyze_cmd->add_option("--backend", analyze.backend, "Mixture fit backend")->check(CLI::IsMember({"lsq", "em"}));
    add_common(analyze_cmd, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run) return cmd_run(config_path, flags);
        if (*validate) return cmd_validate(config_path, flags);
        if (*plot) return cmd_plot(csv_path, spec_name, plot_output, flags);
        if (*synth_cmd) return cmd_traces_synth(synth, flags);
        if (*analyze_cmd) return cmd_traces_analyze(analyze, flags);
    } catch (const heraldsim::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e);
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
