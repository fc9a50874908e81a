#include "headglance/dataset_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "headglance/error.hpp"

namespace headglance {

namespace {

constexpr std::size_t kMaxReportedRows = 10;

template <typename T>
std::optional<T> parse_number(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::string trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return std::string(s);
}

// Shared row validation for both input formats; records problems in `errors`.
class RowCollector {
public:
    void add(std::size_t row, RotationSample s) {
        for (double v : {s.rot_x, s.rot_y, s.rot_z}) {
            if (!std::isfinite(v)) {
                fail(row, "non-finite rotation");
                return;
            }
            if (std::abs(v) >= 180.0) {
                fail(row, "rotation magnitude must be below 180 degrees");
                return;
            }
        }
        auto key = std::make_pair(s.subject_id, s.task_id);
        if (auto it = last_ts_.find(key); it != last_ts_.end() && s.timestamp_ms <= it->second) {
            fail(row, "timestamp not strictly increasing within (" + s.subject_id + ", " + s.task_id + ")");
            return;
        }
        last_ts_[key] = s.timestamp_ms;
        samples_.push_back(std::move(s));
    }

    void fail(std::size_t row, const std::string& reason) {
        ++error_count_;
        if (errors_.size() < kMaxReportedRows) errors_.push_back("row " + std::to_string(row) + ": " + reason);
    }

    Dataset finish(std::string provenance) {
        if (error_count_ > 0) {
            std::ostringstream msg;
            msg << "dataset parse failed (" << error_count_ << " bad rows)";
            for (const auto& e : errors_) msg << "; " << e;
            throw DataError(msg.str());
        }
        return Dataset(std::move(samples_), std::move(provenance));
    }

private:
    std::vector<RotationSample> samples_;
    std::map<std::pair<std::string, std::string>, std::int64_t> last_ts_;
    std::vector<std::string> errors_;
    std::size_t error_count_ = 0;
};

}  // namespace

std::string format_fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    std::string s(buf);
    // Avoid emitting "-0.000000".
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

Dataset parse_dataset_csv(std::istream& in, std::string provenance) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("dataset CSV is empty (missing header row)");
    auto header = split_csv_line(line);
    std::array<std::size_t, kDatasetColumns.size()> col{};
    for (std::size_t c = 0; c < kDatasetColumns.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), kDatasetColumns[c]);
        if (it == header.end()) {
            throw DataError("dataset CSV header is missing required column '" + std::string(kDatasetColumns[c]) + "'");
        }
        col[c] = static_cast<std::size_t>(it - header.begin());
    }

    RowCollector rows;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != header.size()) {
            rows.fail(row, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(f.size()));
            continue;
        }
        RotationSample s;
        s.subject_id = f[col[0]];
        s.task_id = f[col[1]];
        if (s.subject_id.empty() || s.task_id.empty()) {
            rows.fail(row, "empty subject_id or task_id");
            continue;
        }
        auto ts = parse_number<std::int64_t>(f[col[2]]);
        auto rx = parse_number<double>(f[col[3]]);
        auto ry = parse_number<double>(f[col[4]]);
        auto rz = parse_number<double>(f[col[5]]);
        if (!ts) {
            rows.fail(row, "malformed timestamp_ms '" + f[col[2]] + "'");
            continue;
        }
        if (!rx || !ry || !rz) {
            rows.fail(row, "malformed rotation value");
            continue;
        }
        try {
            s.glance = parse_glance_region(f[col[6]]);
        } catch (const DataError&) {
            rows.fail(row, "unknown glance label '" + f[col[6]] + "'");
            continue;
        }
        s.timestamp_ms = *ts;
        s.rot_x = *rx;
        s.rot_y = *ry;
        s.rot_z = *rz;
        rows.add(row, std::move(s));
    }
    return rows.finish(std::move(provenance));
}

Dataset parse_dataset_json(std::istream& in, std::string provenance) {
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("dataset JSON is malformed: ") + e.what());
    }
    const nlohmann::json* arr = &doc;
    if (doc.is_object()) {
        if (!doc.contains("samples")) throw DataError("dataset JSON object lacks a 'samples' array");
        arr = &doc["samples"];
        if (provenance.empty() && doc.contains("provenance") && doc["provenance"].is_string()) {
            provenance = doc["provenance"].get<std::string>();
        }
    }
    if (!arr->is_array()) throw DataError("dataset JSON 'samples' must be an array");

    RowCollector rows;
    std::size_t row = 0;
    for (const auto& item : *arr) {
        ++row;
        try {
            RotationSample s;
            s.subject_id = item.at("subject_id").get<std::string>();
            s.task_id = item.at("task_id").get<std::string>();
            s.timestamp_ms = item.at("timestamp_ms").get<std::int64_t>();
            s.rot_x = item.at("rot_x").get<double>();
            s.rot_y = item.at("rot_y").get<double>();
            s.rot_z = item.at("rot_z").get<double>();
            auto label = item.at("glance").get<std::string>();
            try {
                s.glance = parse_glance_region(label);
            } catch (const DataError&) {
                rows.fail(row, "unknown glance label '" + label + "'");
                continue;
            }
            rows.add(row, std::move(s));
        } catch (const nlohmann::json::exception& e) {
            rows.fail(row, std::string("malformed sample: ") + e.what());
        }
    }
    return rows.finish(std::move(provenance));
}

Dataset load_dataset(const std::filesystem::path& path, DataFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open dataset file '" + path.string() + "'");
    return format == DataFormat::Json ? parse_dataset_json(in, path.string()) : parse_dataset_csv(in, path.string());
}

Dataset load_dataset(const std::filesystem::path& path) {
    return load_dataset(path, path.extension() == ".json" ? DataFormat::Json : DataFormat::Csv);
}

void write_dataset_csv(std::ostream& out, const Dataset& ds) {
    for (std::size_t c = 0; c < kDatasetColumns.size(); ++c) out << (c ? "," : "") << kDatasetColumns[c];
    out << '\n';
    for (const auto& s : ds.samples()) {
        out << s.subject_id << ',' << s.task_id << ',' << s.timestamp_ms << ',' << format_fixed(s.rot_x) << ','
            << format_fixed(s.rot_y) << ',' << format_fixed(s.rot_z) << ',' << to_string(s.glance) << '\n';
    }
}

void write_dataset_json(std::ostream& out, const Dataset& ds) {
    // Hand-written so floats keep the fixed 6-digit rendering.
    auto str = [](const std::string& s) { return nlohmann::json(s).dump(); };
    out << "{\n  \"provenance\": " << str(ds.provenance()) << ",\n  \"samples\": [";
    bool first = true;
    for (const auto& s : ds.samples()) {
        out << (first ? "\n" : ",\n");
        first = false;
        out << "    {\"subject_id\": " << str(s.subject_id) << ", \"task_id\": " << str(s.task_id)
            << ", \"timestamp_ms\": " << s.timestamp_ms << ", \"rot_x\": " << format_fixed(s.rot_x)
            << ", \"rot_y\": " << format_fixed(s.rot_y) << ", \"rot_z\": " << format_fixed(s.rot_z)
            << ", \"glance\": \"" << to_string(s.glance) << "\"}";
    }
    out << "\n  ]\n}\n";
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds, DataFormat format) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write dataset file '" + path.string() + "'");
    if (format == DataFormat::Json) {
        write_dataset_json(out, ds);
    } else {
        write_dataset_csv(out, ds);
    }
}

}  // namespace headglance
