#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

enum class DataFormat { Csv, Json };

// Canonical CSV column order.
inline constexpr std::array<std::string_view, 7> kDatasetColumns{
    "subject_id", "task_id", "timestamp_ms", "rot_x", "rot_y", "rot_z", "glance",
};

// Fixed 6-fractional-digit rendering used for every emitted float.
std::string format_fixed(double v, int digits = 6);

// Splits one CSV line on commas. Quoting is not supported: identifiers
// must not contain commas.
std::vector<std::string> split_csv_line(std::string_view line);

// Parsing collects up to 10 offending rows (1-based, header is row 1) and
// throws DataError listing them.
Dataset parse_dataset_csv(std::istream& in, std::string provenance = {});
Dataset parse_dataset_json(std::istream& in, std::string provenance = {});
Dataset load_dataset(const std::filesystem::path& path, DataFormat format);
// Format picked from the extension (.json, otherwise CSV).
Dataset load_dataset(const std::filesystem::path& path);

void write_dataset_csv(std::ostream& out, const Dataset& ds);
void write_dataset_json(std::ostream& out, const Dataset& ds);
void save_dataset(const std::filesystem::path& path, const Dataset& ds, DataFormat format);

}  // namespace headglance
