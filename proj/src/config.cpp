#include "headglance/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "headglance/dataset_io.hpp"
#include "headglance/error.hpp"

namespace headglance {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw DataError("config " + where + ": " + what);
}

void check_keys(const json& j, const std::string& where, std::initializer_list<std::string_view> allowed,
                std::initializer_list<std::string_view> required = {}) {
    if (!j.is_object()) fail(where, "expected an object");
    for (const auto& [k, v] : j.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || k == a;
        if (!ok) fail(where, "unknown key '" + k + "'");
    }
    for (auto r : required) {
        if (!j.contains(std::string(r))) fail(where, "missing required key '" + std::string(r) + "'");
    }
}

int get_int(const json& j, const std::string& key, const std::string& where, int lo, int hi, int fallback) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number_integer()) fail(where + "." + key, "expected an integer");
    const auto x = v.get<long long>();
    if (x < lo || x > hi) fail(where + "." + key, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(x);
}

double get_number(const json& j, const std::string& key, const std::string& where, double lo, double hi,
                  double fallback, bool open_lo = false) {
    if (!j.contains(key)) return fallback;
    const auto& v = j.at(key);
    if (!v.is_number()) fail(where + "." + key, "expected a number");
    const double x = v.get<double>();
    if (open_lo ? !(x > lo) : !(x >= lo)) fail(where + "." + key, "below the allowed range");
    if (!(x <= hi)) fail(where + "." + key, "above the allowed range");
    return x;
}

std::string get_string(const json& j, const std::string& key, const std::string& where) {
    const auto& v = j.at(key);
    if (!v.is_string()) fail(where + "." + key, "expected a string");
    return v.get<std::string>();
}

template <typename T, typename Parse>
std::vector<T> get_enum_list(const json& j, const std::string& key, const std::string& where, Parse parse) {
    const auto& v = j.at(key);
    if (!v.is_array() || v.empty()) fail(where + "." + key, "expected a non-empty array");
    std::vector<T> out;
    for (const auto& e : v) {
        if (!e.is_string()) fail(where + "." + key, "expected strings");
        T x = parse(e.get<std::string>());
        if (std::find(out.begin(), out.end(), x) != out.end()) fail(where + "." + key, "duplicate entry '" + e.get<std::string>() + "'");
        out.push_back(x);
    }
    return out;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() || base.empty() ? path : base / path;
}

void parse_params(const json& j, ClassifierParams& p) {
    check_keys(j, "params", {"knn", "forest", "mlp", "hmm"});
    if (j.contains("knn")) {
        const auto& k = j.at("knn");
        check_keys(k, "params.knn", {"k"});
        p.knn.k = get_int(k, "k", "params.knn", 1, 1'000'001, p.knn.k);
        if (p.knn.k % 2 == 0) fail("params.knn.k", "must be odd");
    }
    if (j.contains("forest")) {
        const auto& f = j.at("forest");
        const std::string w = "params.forest";
        check_keys(f, w, {"tree_count", "max_depth", "min_leaf", "features_per_split", "bootstrap"});
        p.forest.tree_count = get_int(f, "tree_count", w, 1, 10000, p.forest.tree_count);
        p.forest.max_depth = get_int(f, "max_depth", w, 0, 64, p.forest.max_depth);
        p.forest.min_leaf = get_int(f, "min_leaf", w, 1, 1'000'000, p.forest.min_leaf);
        p.forest.features_per_split = get_int(f, "features_per_split", w, 1, 3, p.forest.features_per_split);
        if (f.contains("bootstrap")) {
            if (!f.at("bootstrap").is_boolean()) fail(w + ".bootstrap", "expected a boolean");
            p.forest.bootstrap = f.at("bootstrap").get<bool>();
        }
    }
    if (j.contains("mlp")) {
        const auto& m = j.at("mlp");
        const std::string w = "params.mlp";
        check_keys(m, w, {"hidden", "batch_size", "learning_rate", "epochs", "init_range"});
        p.mlp.hidden = get_int(m, "hidden", w, 1, 4096, p.mlp.hidden);
        p.mlp.batch_size = get_int(m, "batch_size", w, 1, 1'000'000, p.mlp.batch_size);
        p.mlp.learning_rate = get_number(m, "learning_rate", w, 0.0, 10.0, p.mlp.learning_rate, true);
        p.mlp.epochs = get_int(m, "epochs", w, 1, 100000, p.mlp.epochs);
        p.mlp.init_range = get_number(m, "init_range", w, 0.0, 10.0, p.mlp.init_range);
    }
    if (j.contains("hmm")) {
        const auto& h = j.at("hmm");
        const std::string w = "params.hmm";
        check_keys(h, w, {"states", "max_iterations", "tolerance", "variance_floor", "max_reinitialisations",
                          "max_block_length"});
        p.hmm.states = get_int(h, "states", w, 1, 64, p.hmm.states);
        p.hmm.max_iterations = get_int(h, "max_iterations", w, 1, 100000, p.hmm.max_iterations);
        p.hmm.tolerance = get_number(h, "tolerance", w, 0.0, 1.0, p.hmm.tolerance);
        p.hmm.variance_floor = get_number(h, "variance_floor", w, 0.0, 1e6, p.hmm.variance_floor, true);
        p.hmm.max_reinitialisations = get_int(h, "max_reinitialisations", w, 0, 100, p.hmm.max_reinitialisations);
        p.hmm.max_block_length = get_int(h, "max_block_length", w, 0, 1'000'000, p.hmm.max_block_length);
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(j, "root",
               {"dataset", "pairs", "classifiers", "conditions", "split", "normalization", "balance_scope", "params",
                "jobs", "output_dir"},
               {"dataset", "pairs", "classifiers", "conditions", "split"});

    ExperimentConfig cfg;
    const auto& d = j.at("dataset");
    check_keys(d, "dataset", {"file", "scenario", "scenario_file"});
    if (d.size() != 1) fail("dataset", "exactly one of file, scenario, scenario_file is required");
    if (d.contains("file")) {
        cfg.source.file = resolve(base_dir, get_string(d, "file", "dataset"));
    } else if (d.contains("scenario")) {
        if (!d.at("scenario").is_object()) fail("dataset.scenario", "expected an object");
        cfg.source.scenario = scenario_from_json(d.at("scenario").dump());
    } else {
        const auto path = resolve(base_dir, get_string(d, "scenario_file", "dataset"));
        cfg.source.scenario = scenario_from_json(read_text_file(path));
    }

    const auto& pairs = j.at("pairs");
    if (!pairs.is_array() || pairs.empty()) fail("pairs", "expected a non-empty array");
    for (const auto& p : pairs) {
        if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string()) {
            fail("pairs", "each pair must be [reference, target] region names");
        }
        const auto a = parse_glance_region(p[0].get<std::string>());
        const auto b = parse_glance_region(p[1].get<std::string>());
        if (a == b) fail("pairs", "a pair needs two distinct regions");
        cfg.pairs.emplace_back(a, b);
    }
    cfg.classifiers = get_enum_list<ClassifierKind>(j, "classifiers", "root", parse_classifier_kind);
    cfg.conditions = get_enum_list<Condition>(j, "conditions", "root", parse_condition);

    const auto& s = j.at("split");
    check_keys(s, "split", {"iterations", "train_fraction", "seed"});
    cfg.plan.iterations = get_int(s, "iterations", "split", 1, 100000, cfg.plan.iterations);
    cfg.plan.train_fraction = get_number(s, "train_fraction", "split", 0.0, 1.0, cfg.plan.train_fraction, true);
    if (cfg.plan.train_fraction >= 1.0) fail("split.train_fraction", "must be < 1");
    if (s.contains("seed")) {
        if (!s.at("seed").is_number_unsigned()) fail("split.seed", "expected a non-negative integer");
        cfg.plan.seed = s.at("seed").get<std::uint64_t>();
    }

    if (j.contains("normalization")) cfg.options.normalize_scope = parse_normalize_scope(get_string(j, "normalization", "root"));
    if (j.contains("balance_scope")) cfg.options.balance_scope = parse_balance_scope(get_string(j, "balance_scope", "root"));
    if (j.contains("params")) parse_params(j.at("params"), cfg.options.params);
    cfg.options.jobs = get_int(j, "jobs", "root", 1, 1024, 1);
    if (j.contains("output_dir")) cfg.output_dir = resolve(base_dir, get_string(j, "output_dir", "root"));
    return cfg;
}

Dataset load_source(const DatasetSource& source) {
    if (source.scenario) return generate(*source.scenario);
    if (!std::filesystem::exists(source.file)) {
        throw DataError("dataset file not found: '" + source.file.string() + "'");
    }
    return load_dataset(source.file);
}

std::string fnv1a_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream out;
    out << std::hex;
    out.width(16);
    out.fill('0');
    out << h;
    return out.str();
}

std::string config_hash(std::string_view json_text) {
    try {
        return fnv1a_hex(nlohmann::json::parse(json_text).dump());
    } catch (const json::parse_error&) {
        return fnv1a_hex(json_text);
    }
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace headglance
