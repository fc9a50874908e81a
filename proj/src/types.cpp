#include "headglance/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "headglance/error.hpp"

namespace headglance {

std::string_view to_string(GlanceRegion r) {
    return kGlanceRegionNames.at(static_cast<std::size_t>(r));
}

GlanceRegion parse_glance_region(std::string_view s) {
    for (std::size_t i = 0; i < kGlanceRegionNames.size(); ++i) {
        if (kGlanceRegionNames[i] == s) return static_cast<GlanceRegion>(i);
    }
    throw DataError("unknown glance label '" + std::string(s) + "'");
}

std::string_view to_string(TaskKind t) {
    return kTaskKindNames.at(static_cast<std::size_t>(t));
}

TaskKind parse_task_kind(std::string_view s) {
    for (std::size_t i = 0; i < kTaskKindNames.size(); ++i) {
        if (kTaskKindNames[i] == s) return static_cast<TaskKind>(i);
    }
    throw DataError("unknown task kind '" + std::string(s) + "'");
}

Dataset::Dataset(std::vector<RotationSample> samples, std::string provenance)
    : samples_(std::move(samples)), provenance_(std::move(provenance)) {
    std::map<std::pair<std::string, std::string>, std::int64_t> last_ts;
    std::set<std::string> subjects;
    std::vector<std::size_t> bad;
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const auto& s = samples_[i];
        bool ok = true;
        for (double v : {s.rot_x, s.rot_y, s.rot_z}) {
            if (!std::isfinite(v) || std::abs(v) >= 180.0) ok = false;
        }
        auto key = std::make_pair(s.subject_id, s.task_id);
        auto it = last_ts.find(key);
        if (it != last_ts.end() && s.timestamp_ms <= it->second) ok = false;
        last_ts[key] = s.timestamp_ms;
        subjects.insert(s.subject_id);
        if (!ok) bad.push_back(i);
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "dataset invariant violated (non-finite/out-of-range rotation or "
               "non-increasing timestamp) at sample indices";
        for (std::size_t k = 0; k < std::min<std::size_t>(bad.size(), 10); ++k) msg << ' ' << bad[k];
        throw DataError(msg.str());
    }
    subjects_.assign(subjects.begin(), subjects.end());
}

std::size_t Dataset::count(GlanceRegion r) const {
    return static_cast<std::size_t>(
        std::count_if(samples_.begin(), samples_.end(), [r](const auto& s) { return s.glance == r; }));
}

Dataset Dataset::select_subjects(std::span<const std::string> subjects) const {
    std::set<std::string_view> keep(subjects.begin(), subjects.end());
    std::vector<RotationSample> out;
    for (const auto& s : samples_) {
        if (keep.contains(s.subject_id)) out.push_back(s);
    }
    return Dataset(std::move(out), provenance_);
}

Dataset filter_binary(const Dataset& ds, GlanceRegion class_a, GlanceRegion class_b) {
    if (class_a == class_b) {
        throw PreconditionError("filter_binary requires two distinct classes, got '" +
                                std::string(to_string(class_a)) + "' twice");
    }
    std::vector<RotationSample> out;
    for (const auto& s : ds.samples()) {
        if (s.glance == class_a || s.glance == class_b) out.push_back(s);
    }
    if (out.empty()) throw DataError("no samples for requested class pair");
    return Dataset(std::move(out), ds.provenance());
}

}  // namespace headglance
