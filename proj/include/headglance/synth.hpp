#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

// Nominal gaze direction of a region relative to the forward roadway, degrees.
struct Eccentricity {
    double yaw = 0.0;
    double pitch = 0.0;
};

struct RegionLayout {
    std::vector<GlanceRegion> regions;     // index order used by every per-region vector
    std::vector<Eccentricity> eccentricity;

    [[nodiscard]] std::size_t index_of(GlanceRegion r) const;  // throws if absent
};

struct DriverSpec {
    std::string subject_id;
    double head_gain = 0.5;                      // 0 = eyes only (lizard), 1 = head only (owl)
    std::array<double, 3> noise_sigma{1, 1, 1};  // (pitch, yaw, roll) degrees
    std::vector<double> dwell_means;             // frames, per layout region
    std::array<double, 3> resting_offset{};      // (pitch, yaw, roll) degrees
};

using TransitionMatrix = std::vector<std::vector<double>>;

struct TaskSpec {
    std::string id;
    int frames = 0;                // 0: use ScenarioSpec::frames_per_task
    TransitionMatrix transition;   // empty: use ScenarioSpec::transition
};

struct ScenarioSpec {
    std::vector<DriverSpec> drivers;
    RegionLayout layout;
    // Glance-to-glance jump probabilities between layout regions (zero
    // diagonal, rows sum to 1). Dwell within a region is geometric with the
    // driver's mean.
    TransitionMatrix transition;
    double forward_share = 0.95;
    int frames_per_task = 300;
    double frame_period_ms = 1000.0 / 15.0;
    double smoothing = 0.7;  // AR(1) coefficient of the head-noise process
    std::vector<TaskSpec> tasks;
    std::uint64_t seed = 0;

    [[nodiscard]] const TransitionMatrix& transition_for(const TaskSpec& task) const {
        return task.transition.empty() ? transition : task.transition;
    }
    [[nodiscard]] int frames_for(const TaskSpec& task) const { return task.frames > 0 ? task.frames : frames_per_task; }

    // Throws DataError on any violated invariant, including a driver whose
    // stationary forward probability is more than 0.02 from forward_share.
    void validate() const;
};

// Frame-level stationary distribution of one driver's glance chain.
std::vector<double> stationary_distribution(const TransitionMatrix& transition, const DriverSpec& driver);

// Per driver and task: Markov glance chain with geometric dwell; each frame's
// head rotation = resting offset + gain * region eccentricity + AR(1)
// Gaussian noise. rot_x carries pitch, rot_y yaw, rot_z roll.
Dataset generate(const ScenarioSpec& spec);

enum class DriverProfile { Mixed, AllOwl, AllLizard };
std::string_view to_string(DriverProfile p);
DriverProfile parse_driver_profile(std::string_view s);

// Default in-cab layout (instrument cluster, left mirror, center stack,
// right mirror), the five standard tasks with task-typical glance targets,
// and gains drawn per profile. Deterministic in seed.
ScenarioSpec default_scenario(DriverProfile profile, int n_subjects, std::uint64_t seed);

std::string scenario_to_json(const ScenarioSpec& spec);
// Accepts either a full scenario or the short form
// {"profile": "mixed", "n_subjects": 22, "seed": 7, ...overrides}.
ScenarioSpec scenario_from_json(std::string_view text);

}  // namespace headglance
