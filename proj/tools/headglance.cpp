// headglance: command-line front end for the head-pose glance pipeline.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "headglance/config.hpp"
#include "headglance/dataset_io.hpp"
#include "headglance/differences.hpp"
#include "headglance/error.hpp"
#include "headglance/experiment.hpp"
#include "headglance/pca.hpp"
#include "headglance/pose.hpp"
#include "headglance/preprocess.hpp"
#include "headglance/synth.hpp"

#ifndef HEADGLANCE_VERSION
#define HEADGLANCE_VERSION "dev"
#endif

namespace fs = std::filesystem;
using namespace headglance;
using ojson = nlohmann::ordered_json;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kValidation = 3, kRuntime = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Manifest {
    std::string command;
    std::vector<fs::path> inputs;
    std::string config_hash;
    std::uint64_t seed = 0;
    ojson parameters = ojson::object();
    std::vector<std::string> outputs;
};

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

template <typename Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ostringstream ss;
    fn(ss);
    write_file(path, ss.str());
}

void write_manifest(const fs::path& out_dir, const Manifest& m) {
    ojson j;
    j["command"] = m.command;
    ojson inputs = ojson::array();
    for (const auto& p : m.inputs) {
        inputs.push_back({{"path", p.string()}, {"fnv1a64", fnv1a_hex(read_text_file(p))}});
    }
    j["inputs"] = std::move(inputs);
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["parameters"] = m.parameters;
    j["outputs"] = m.outputs;
    j["versions"] = {{"headglance", HEADGLANCE_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    write_file(out_dir / "manifest.json", j.dump(2) + "\n");
}

fs::path require_out(const std::string& out) {
    if (out.empty()) throw UsageError("--out is required");
    fs::create_directories(out);
    return fs::path(out);
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw DataError(what + " not found: '" + path + "'");
}

std::pair<GlanceRegion, GlanceRegion> parse_pair(const std::string& s) {
    const auto comma = s.find(',');
    if (comma == std::string::npos) throw UsageError("--pair expects 'reference,target'");
    const auto a = parse_glance_region(s.substr(0, comma));
    const auto b = parse_glance_region(s.substr(comma + 1));
    if (a == b) throw DataError("--pair needs two distinct regions");
    return {a, b};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string scenario, profile = "mixed", out, format = "csv";
    int subjects = 22;
    std::optional<std::uint64_t> seed;
};

int cmd_synth(const SynthArgs& a) {
    ScenarioSpec spec;
    Manifest m;
    m.command = "synth";
    if (!a.scenario.empty()) {
        require_file(a.scenario, "scenario file");
        const auto text = read_text_file(a.scenario);
        spec = scenario_from_json(text);
        m.inputs.push_back(a.scenario);
        m.config_hash = config_hash(text);
        if (a.seed) spec.seed = *a.seed;
    } else {
        spec = default_scenario(parse_driver_profile(a.profile), a.subjects, a.seed.value_or(0));
        m.config_hash = config_hash(scenario_to_json(spec));
    }
    m.seed = spec.seed;
    m.parameters = {{"profile", a.scenario.empty() ? a.profile : "file"}, {"subjects", spec.drivers.size()},
                    {"format", a.format}};
    const auto out = require_out(a.out);
    const Dataset ds = generate(spec);
    const bool json = a.format == "json";
    const std::string data_name = json ? "dataset.json" : "dataset.csv";
    save_dataset(out / data_name, ds, json ? DataFormat::Json : DataFormat::Csv);
    write_file(out / "scenario.json", scenario_to_json(spec));
    m.outputs = {data_name, "scenario.json"};
    write_manifest(out, m);
    return kOk;
}

// ---------------------------------------------------------------------------

struct PoseArgs {
    std::string landmarks, reference_face, spans, subject, task, out;
    double max_disagreement = 3.5;
    double frame_period_ms = 1000.0 / 15.0;
};

int cmd_pose(const PoseArgs& a) {
    require_file(a.landmarks, "landmark file");
    Manifest m;
    m.command = "pose";
    m.inputs.push_back(a.landmarks);
    ReferenceFace ref = ReferenceFace::standard();
    if (!a.reference_face.empty()) {
        require_file(a.reference_face, "reference face file");
        ref = load_reference_face(a.reference_face);
        m.inputs.push_back(a.reference_face);
        m.config_hash = config_hash(read_text_file(a.reference_face));
    }
    if (!a.spans.empty() && (a.subject.empty() || a.task.empty())) {
        throw UsageError("--glance-spans requires --subject and --task");
    }
    m.parameters = {{"max_disagreement_px", a.max_disagreement}, {"frame_period_ms", a.frame_period_ms}};
    const auto frames = load_landmark_csv(a.landmarks);
    std::vector<GlanceSpan> spans;
    if (!a.spans.empty()) {
        require_file(a.spans, "glance span file");
        std::ifstream in(a.spans);
        spans = parse_glance_span_csv(in);
        m.inputs.push_back(a.spans);
    }
    const auto out = require_out(a.out);
    const auto result = reduce_frames(frames, ref, a.max_disagreement);

    std::vector<TimedRotation> timed;
    write_with(out / "rotations.csv", [&](std::ostream& os) {
        os << "frame_id,timestamp_ms,rot_x,rot_y,rot_z\n";
        for (const auto& r : result.rotations) {
            const auto t = std::llround(static_cast<double>(r.frame_id) * a.frame_period_ms);
            timed.push_back({t, r.rotation});
            os << r.frame_id << ',' << t << ',' << format_fixed(r.rotation.rot_x) << ','
               << format_fixed(r.rotation.rot_y) << ',' << format_fixed(r.rotation.rot_z) << '\n';
        }
    });
    write_file(out / "reduction_summary.json", reduction_summary_json(result.summary));
    m.outputs = {"rotations.csv", "reduction_summary.json"};
    if (!spans.empty()) {
        const auto merged = merge_glance_labels(a.subject, a.task, timed, spans);
        save_dataset(out / "dataset.csv", merged.dataset, DataFormat::Csv);
        m.outputs.push_back("dataset.csv");
        m.parameters["unlabelled_dropped"] = merged.dropped;
    }
    write_manifest(out, m);
    return kOk;
}

// ---------------------------------------------------------------------------

struct RunArgs {
    std::string config, out;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
};

int cmd_run(const RunArgs& a) {
    require_file(a.config, "experiment config");
    const auto text = read_text_file(a.config);
    auto cfg = parse_experiment_config(text, fs::path(a.config).parent_path());
    if (a.seed) cfg.plan.seed = *a.seed;
    if (a.jobs) cfg.options.jobs = *a.jobs;
    if (!a.out.empty()) cfg.output_dir = a.out;
    if (cfg.output_dir.empty()) throw UsageError("no output directory: pass --out or set output_dir");
    if (!cfg.source.scenario) require_file(cfg.source.file.string(), "dataset file");

    Manifest m;
    m.command = "run";
    m.inputs.push_back(a.config);
    if (!cfg.source.scenario) m.inputs.push_back(cfg.source.file);
    m.config_hash = config_hash(text);
    m.seed = cfg.plan.seed;
    m.parameters = {{"jobs", cfg.options.jobs},
                    {"iterations", cfg.plan.iterations},
                    {"normalization", to_string(cfg.options.normalize_scope)},
                    {"balance_scope", to_string(cfg.options.balance_scope)}};

    const Dataset ds = load_source(cfg.source);
    std::vector<EvaluationReport> reports;
    for (const auto& [ref, target] : cfg.pairs) {
        for (auto kind : cfg.classifiers) {
            for (auto cond : cfg.conditions) {
                reports.push_back(run_experiment(ds, ref, target, kind, cond, cfg.plan, cfg.options));
            }
        }
    }
    const auto out = require_out(cfg.output_dir.string());
    write_with(out / "report.csv", [&](std::ostream& os) { write_report_csv(os, reports); });
    write_with(out / "summary.txt", [&](std::ostream& os) { write_summary_table(os, reports); });
    write_with(out / "summary.csv", [&](std::ostream& os) { write_summary_csv(os, reports); });

    ojson audit = ojson::array();
    bool all_ok = true;
    for (const auto& r : reports) {
        all_ok = all_ok && r.audit.all();
        audit.push_back({{"classifier", r.classifier},
                         {"pair", r.pair_name()},
                         {"condition", to_string(r.condition)},
                         {"unit", r.unit},
                         {"skipped", r.skipped},
                         {"split_disjoint", r.audit.split_disjoint},
                         {"train_normalized", r.audit.train_normalized},
                         {"balanced_counts", r.audit.balanced_counts},
                         {"confusion_totals", r.audit.confusion_totals},
                         {"metric_recount", r.audit.metric_recount}});
    }
    write_file(out / "audit.json", audit.dump(2) + "\n");
    m.outputs = {"report.csv", "summary.txt", "summary.csv", "audit.json"};
    write_manifest(out, m);
    std::cout << std::ifstream(out / "summary.txt").rdbuf();
    if (!all_ok) throw Error("protocol invariant audit failed; see audit.json");
    return kOk;
}

// ---------------------------------------------------------------------------

struct PcaArgs {
    std::string dataset, pair = "forward,center-stack", out;
    int components = 2;
    int iterations = 50;
    double train_fraction = 0.8;
    bool normalize = false;
    std::optional<std::uint64_t> seed;
};

int cmd_pca(const PcaArgs& a) {
    require_file(a.dataset, "dataset file");
    const auto [ref, target] = parse_pair(a.pair);
    SplitPlan plan{a.iterations, a.train_fraction, a.seed.value_or(0)};
    plan.validate();
    const Dataset ds = filter_binary(load_dataset(a.dataset), ref, target);
    auto prepare = [&](const Dataset& d) { return a.normalize ? apply_normalizer(d, fit_normalizer(d)) : d; };

    const PcaModel full = fit_pca(prepare(ds));
    std::vector<PcaModel> runs;
    for (int it = 0; it < plan.iterations; ++it) runs.push_back(fit_pca(prepare(split_subjects(ds, plan, it).train)));
    const auto averaged = averaged_components(runs);

    const auto out = require_out(a.out);
    write_with(out / "projection.csv",
               [&](std::ostream& os) { write_projection_csv(os, project(full, prepare(ds), a.components), a.components); });
    write_file(out / "components.json", pca_json(full, &averaged));

    Manifest m;
    m.command = "pca";
    m.inputs.push_back(a.dataset);
    m.seed = plan.seed;
    m.parameters = {{"pair", a.pair},
                    {"components", a.components},
                    {"iterations", plan.iterations},
                    {"train_fraction", plan.train_fraction},
                    {"normalize", a.normalize}};
    m.config_hash = fnv1a_hex(m.parameters.dump());
    m.outputs = {"projection.csv", "components.json"};
    write_manifest(out, m);
    return kOk;
}

// ---------------------------------------------------------------------------

struct DiffsArgs {
    std::string dataset, task = "radio-on-off", target = "center-stack", out, range_mode = "percentile";
    std::vector<std::string> series;
    double lower = 5.0, upper = 95.0, range_threshold = 10.0, diff_threshold = 5.0;
    int min_samples = 10;
};

int cmd_diffs(const DiffsArgs& a) {
    require_file(a.dataset, "dataset file");
    ProfileOptions opt;
    if (a.range_mode == "minmax") {
        opt.range_mode = RangeMode::MinMax;
    } else if (a.range_mode != "percentile") {
        throw UsageError("--range-mode must be percentile or minmax");
    }
    if (!(a.lower >= 0.0 && a.lower < a.upper && a.upper <= 100.0)) throw DataError("percentiles must satisfy 0 <= lower < upper <= 100");
    opt.lower_percentile = a.lower;
    opt.upper_percentile = a.upper;
    opt.thresholds = {a.range_threshold, a.diff_threshold, static_cast<std::size_t>(std::max(0, a.min_samples))};
    const auto target = parse_glance_region(a.target);
    const Dataset ds = load_dataset(a.dataset);
    const auto profiles = profile_subjects(ds, a.task, target, opt);
    const auto corr = correlate_profiles(profiles.profiles);

    const auto out = require_out(a.out);
    write_with(out / "profiles.csv", [&](std::ostream& os) { write_profiles_csv(os, profiles); });
    write_file(out / "correlation.json", correlation_json(corr, profiles));
    Manifest m;
    m.command = "diffs";
    m.inputs.push_back(a.dataset);
    m.outputs = {"profiles.csv", "correlation.json"};
    for (const auto& s : a.series) {
        const std::string name = "series_" + s + ".csv";
        write_with(out / name, [&](std::ostream& os) { write_subject_series_csv(os, ds, s, a.task); });
        m.outputs.push_back(name);
    }
    m.parameters = {{"task", a.task},
                    {"target", a.target},
                    {"range_mode", a.range_mode},
                    {"lower_percentile", a.lower},
                    {"upper_percentile", a.upper},
                    {"range_threshold_deg", a.range_threshold},
                    {"mean_diff_threshold_deg", a.diff_threshold},
                    {"min_samples", a.min_samples}};
    m.config_hash = fnv1a_hex(m.parameters.dump());
    write_manifest(out, m);
    return kOk;
}

void report_error(const char* kind, const std::string& message) {
    std::cerr << ojson{{"error", kind}, {"message", message}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Head-pose glance classification pipeline", "headglance"};
    app.set_version_flag("--version", HEADGLANCE_VERSION);
    app.require_subcommand(1);

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "Generate a synthetic driver dataset");
    s->add_option("--scenario", synth.scenario, "Scenario JSON (full or short form)");
    s->add_option("--profile", synth.profile, "Driver profile when no scenario file: mixed, all_owl, all_lizard");
    s->add_option("--subjects", synth.subjects, "Number of drivers when no scenario file")->check(CLI::Range(2, 100000));
    s->add_option("--format", synth.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--seed", synth.seed, "Master seed (overrides the scenario's)");
    s->add_option("--out", synth.out, "Output directory")->required();

    PoseArgs pose;
    auto* p = app.add_subcommand("pose", "Reduce landmark annotations to head rotations");
    p->add_option("--landmarks", pose.landmarks, "Landmark CSV")->required();
    p->add_option("--reference-face", pose.reference_face, "Reference face JSON (default: built-in)");
    p->add_option("--max-disagreement", pose.max_disagreement, "Analyst disagreement threshold, pixels");
    p->add_option("--frame-period-ms", pose.frame_period_ms, "Milliseconds per frame id");
    p->add_option("--glance-spans", pose.spans, "Glance span CSV to label the rotations");
    p->add_option("--subject", pose.subject, "Subject id for the labelled dataset");
    p->add_option("--task", pose.task, "Task id for the labelled dataset");
    p->add_option("--out", pose.out, "Output directory")->required();

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run a Monte-Carlo classification experiment");
    r->add_option("--config", run.config, "Experiment config JSON")->required();
    r->add_option("--seed", run.seed, "Split seed (overrides the config)");
    r->add_option("--jobs", run.jobs, "Worker threads")->check(CLI::Range(1, 1024));
    r->add_option("--out", run.out, "Output directory (overrides the config)");

    PcaArgs pca;
    auto* c = app.add_subcommand("pca", "PCA of the rotation variables for one class pair");
    c->add_option("--dataset", pca.dataset, "Dataset CSV/JSON")->required();
    c->add_option("--pair", pca.pair, "reference,target regions");
    c->add_option("--components", pca.components, "Projected components")->check(CLI::Range(1, 3));
    c->add_option("--iterations", pca.iterations, "Monte-Carlo training sets to average")->check(CLI::Range(1, 100000));
    c->add_option("--train-fraction", pca.train_fraction, "Training subject fraction");
    c->add_flag("--normalize", pca.normalize, "z-score before PCA");
    c->add_option("--seed", pca.seed, "Split seed");
    c->add_option("--out", pca.out, "Output directory")->required();

    DiffsArgs diffs;
    auto* d = app.add_subcommand("diffs", "Per-subject head-glance profiles and owl/lizard typing");
    d->add_option("--dataset", diffs.dataset, "Dataset CSV/JSON")->required();
    d->add_option("--task", diffs.task, "Task id to analyse");
    d->add_option("--target", diffs.target, "Target glance region");
    d->add_option("--range-mode", diffs.range_mode, "percentile or minmax");
    d->add_option("--lower-percentile", diffs.lower);
    d->add_option("--upper-percentile", diffs.upper);
    d->add_option("--range-threshold", diffs.range_threshold, "Owl/lizard Y-range threshold, degrees");
    d->add_option("--diff-threshold", diffs.diff_threshold, "Owl/lizard mean-difference threshold, degrees");
    d->add_option("--min-samples", diffs.min_samples, "Minimum samples per region before typing");
    d->add_option("--series", diffs.series, "Subject ids to export as time series");
    d->add_option("--out", diffs.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        report_error("usage", e.what());
        return kUsage;
    }

    try {
        if (s->parsed()) return cmd_synth(synth);
        if (p->parsed()) return cmd_pose(pose);
        if (r->parsed()) return cmd_run(run);
        if (c->parsed()) return cmd_pca(pca);
        if (d->parsed()) return cmd_diffs(diffs);
    } catch (const UsageError& e) {
        report_error("usage", e.what());
        return kUsage;
    } catch (const DataError& e) {
        report_error("validation", e.what());
        return kValidation;
    } catch (const PreconditionError& e) {
        report_error("validation", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        report_error("runtime", e.what());
        return kRuntime;
    }
    return kUsage;
}
