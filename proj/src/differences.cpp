#include "headglance/differences.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>
#include <nlohmann/json.hpp>

#include "headglance/dataset_io.hpp"
#include "headglance/error.hpp"

namespace headglance {

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double round6(double v) { return std::round(v * 1e6) / 1e6 + 0.0; }

}  // namespace

std::string_view to_string(MoverType t) {
    switch (t) {
        case MoverType::Owl: return "owl";
        case MoverType::Lizard: return "lizard";
        case MoverType::Unassigned: return "unassigned";
    }
    return "unassigned";
}

double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw PreconditionError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = std::clamp(q, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MoverType classify_mover(const SubjectProfile& p, const MoverThresholds& t) {
    if (p.target_count < t.min_samples || p.forward_count < t.min_samples) return MoverType::Unassigned;
    if (p.y_range < t.range_deg && p.y_mean_diff < t.mean_diff_deg) return MoverType::Lizard;
    if (p.y_range > t.range_deg && p.y_mean_diff > t.mean_diff_deg) return MoverType::Owl;
    return MoverType::Unassigned;
}

ProfileSet profile_subjects(const Dataset& ds, std::string_view task_id, GlanceRegion target,
                            const ProfileOptions& options) {
    struct Acc {
        std::vector<double> target;
        std::vector<double> forward;
    };
    std::map<std::string, Acc> per_subject;
    for (const auto& s : ds.samples()) {
        if (s.task_id != task_id) continue;
        auto& a = per_subject[s.subject_id];
        if (s.glance == target) a.target.push_back(s.rot_y);
        if (s.glance == GlanceRegion::Forward && target != GlanceRegion::Forward) a.forward.push_back(s.rot_y);
    }
    if (per_subject.empty()) throw DataError("dataset contains no samples for task '" + std::string(task_id) + "'");

    ProfileSet out;
    for (auto& [id, a] : per_subject) {
        if (a.target.empty()) {
            ++out.excluded_no_target;
            continue;
        }
        if (a.forward.empty()) {
            ++out.excluded_no_forward;
            continue;
        }
        SubjectProfile p;
        p.subject_id = id;
        p.target_count = a.target.size();
        p.forward_count = a.forward.size();
        if (options.range_mode == RangeMode::MinMax) {
            const auto [mn, mx] = std::minmax_element(a.target.begin(), a.target.end());
            p.y_range = *mx - *mn;
        } else {
            p.y_range = percentile(a.target, options.upper_percentile) - percentile(a.target, options.lower_percentile);
        }
        p.y_mean_diff = std::abs(mean_of(a.target) - mean_of(a.forward));
        p.mover = classify_mover(p, options.thresholds);
        out.profiles.push_back(std::move(p));
    }
    if (out.profiles.empty()) {
        throw DataError("no subject glanced at '" + std::string(to_string(target)) + "' during task '" +
                        std::string(task_id) + "'");
    }
    return out;
}

Correlation pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw PreconditionError("pearson: length mismatch");
    if (x.size() < 3) throw PreconditionError("pearson: need at least 3 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0 || syy <= 0.0) throw NumericalError("correlation undefined: zero variance in one dimension");
    Correlation c;
    c.n = x.size();
    c.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double df = n - 2.0;
    if (std::abs(c.r) >= 1.0) {
        c.p_value = 0.0;
    } else {
        const double t = c.r * std::sqrt(df / (1.0 - c.r * c.r));
        const boost::math::students_t dist(df);
        c.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    }
    c.p_flag = c.p_value < 0.001 ? "p<.001" : c.p_value < 0.01 ? "p<.01" : c.p_value < 0.05 ? "p<.05" : "n.s.";
    return c;
}

Correlation correlate_profiles(std::span<const SubjectProfile> profiles) {
    std::vector<double> range, diff;
    for (const auto& p : profiles) {
        range.push_back(p.y_range);
        diff.push_back(p.y_mean_diff);
    }
    return pearson(range, diff);
}

void write_profiles_csv(std::ostream& out, const ProfileSet& set) {
    out << "subject_id,y_mean_diff,y_range,target_count,forward_count,mover_type\n";
    for (const auto& p : set.profiles) {
        out << p.subject_id << ',' << format_fixed(p.y_mean_diff) << ',' << format_fixed(p.y_range) << ','
            << p.target_count << ',' << p.forward_count << ',' << to_string(p.mover) << '\n';
    }
}

std::string correlation_json(const Correlation& c, const ProfileSet& set) {
    nlohmann::ordered_json j;
    j["pearson_r"] = round6(c.r);
    j["n"] = c.n;
    j["df"] = c.n >= 2 ? c.n - 2 : 0;
    j["p_value"] = round6(c.p_value);
    j["p_flag"] = c.p_flag;
    j["excluded_no_target"] = set.excluded_no_target;
    j["excluded_no_forward"] = set.excluded_no_forward;
    std::size_t owls = 0, lizards = 0;
    for (const auto& p : set.profiles) {
        owls += p.mover == MoverType::Owl;
        lizards += p.mover == MoverType::Lizard;
    }
    j["owl_count"] = owls;
    j["lizard_count"] = lizards;
    return j.dump(2) + "\n";
}

void write_subject_series_csv(std::ostream& out, const Dataset& ds, std::string_view subject_id,
                              std::string_view task_id) {
    out << "timestamp_ms,rot_y,glance\n";
    for (const auto& s : ds.samples()) {
        if (s.subject_id == subject_id && s.task_id == task_id) {
            out << s.timestamp_ms << ',' << format_fixed(s.rot_y) << ',' << to_string(s.glance) << '\n';
        }
    }
}

}  // namespace headglance
