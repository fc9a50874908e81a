#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "headglance/experiment.hpp"
#include "headglance/synth.hpp"

namespace headglance {

// Where an experiment's data comes from: a dataset file or a scenario that is
// generated on the fly.
struct DatasetSource {
    std::filesystem::path file;          // empty when a scenario is given
    std::optional<ScenarioSpec> scenario;
};

struct ExperimentConfig {
    DatasetSource source;
    std::vector<std::pair<GlanceRegion, GlanceRegion>> pairs;  // (reference, target)
    std::vector<ClassifierKind> classifiers;
    std::vector<Condition> conditions;
    SplitPlan plan;
    ExperimentOptions options;
    std::filesystem::path output_dir;  // empty when not given
};

// Strict structural validation (unknown keys, wrong types and out-of-range
// values are rejected) followed by conversion. Relative paths are resolved
// against base_dir. Throws DataError naming the offending field.
ExperimentConfig parse_experiment_config(std::string_view text, const std::filesystem::path& base_dir = {});

Dataset load_source(const DatasetSource& source);

// 64-bit FNV-1a, hex encoded. Used for manifest input and config hashes.
std::string fnv1a_hex(std::string_view bytes);
// Hash of the config's canonical (key-sorted, whitespace-free) JSON form.
std::string config_hash(std::string_view json_text);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace headglance
