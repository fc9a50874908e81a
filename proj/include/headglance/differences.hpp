#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

enum class MoverType { Owl, Lizard, Unassigned };
std::string_view to_string(MoverType t);

enum class RangeMode { Percentile, MinMax };

struct MoverThresholds {
    double range_deg = 10.0;      // lizard below, owl above
    double mean_diff_deg = 5.0;   // lizard below, owl above
    std::size_t min_samples = 10; // per region, before any type is assigned
};

struct ProfileOptions {
    RangeMode range_mode = RangeMode::Percentile;
    double lower_percentile = 5.0;
    double upper_percentile = 95.0;
    MoverThresholds thresholds;
};

struct SubjectProfile {
    std::string subject_id;
    double y_range = 0.0;      // width of rot_y during target glances, degrees
    double y_mean_diff = 0.0;  // |mean rot_y (target) - mean rot_y (forward)|, degrees
    std::size_t target_count = 0;
    std::size_t forward_count = 0;
    MoverType mover = MoverType::Unassigned;
};

struct ProfileSet {
    std::vector<SubjectProfile> profiles;  // sorted by subject_id
    std::size_t excluded_no_target = 0;    // subjects with no target-region glance
    std::size_t excluded_no_forward = 0;   // subjects with target glances but no forward glance
};

// Linear-interpolation percentile (the "type 7" estimator); q in [0, 100].
double percentile(std::vector<double> values, double q);

// Profiles every subject that performed `task_id`. Throws DataError when no
// sample carries the task or no subject qualifies.
ProfileSet profile_subjects(const Dataset& ds, std::string_view task_id, GlanceRegion target,
                            const ProfileOptions& options = {});

struct Correlation {
    double r = 0.0;
    std::size_t n = 0;
    double p_value = 1.0;  // two-sided, Student t with n - 2 degrees of freedom
    std::string p_flag;    // "p<.001", "p<.01", "p<.05" or "n.s."
};

Correlation pearson(std::span<const double> x, std::span<const double> y);
// Pearson r between y_range and y_mean_diff. Needs >= 3 profiles.
Correlation correlate_profiles(std::span<const SubjectProfile> profiles);

// Two-threshold rule: both statistics below -> lizard, both above -> owl.
MoverType classify_mover(const SubjectProfile& profile, const MoverThresholds& thresholds = {});

void write_profiles_csv(std::ostream& out, const ProfileSet& set);
std::string correlation_json(const Correlation& c, const ProfileSet& set);
// timestamp_ms, rot_y, glance for one subject and task.
void write_subject_series_csv(std::ostream& out, const Dataset& ds, std::string_view subject_id,
                              std::string_view task_id);

}  // namespace headglance
