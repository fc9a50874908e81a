#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace headglance {

// The 16 manually coded glance locations.
enum class GlanceRegion : std::uint8_t {
    Forward,
    LeftForward,
    RightForward,
    RearviewMirror,
    LeftWindowMirror,
    RightWindowMirror,
    OverShoulder,
    InstrumentCluster,
    CenterStack,
    CellPhone,
    InteriorObject,
    Passenger,
    NoEyesUnknown,
    NoEyesOffroad,
    EyesClosed,
    Other,
};

inline constexpr std::size_t kGlanceRegionCount = 16;

inline constexpr std::array<std::string_view, kGlanceRegionCount> kGlanceRegionNames{
    "forward",          "left-forward",       "right-forward",   "rearview-mirror",
    "left-window-mirror", "right-window-mirror", "over-shoulder",  "instrument-cluster",
    "center-stack",     "cell-phone",         "interior-object", "passenger",
    "no-eyes-unknown",  "no-eyes-offroad",    "eyes-closed",     "other",
};

std::string_view to_string(GlanceRegion r);
// Throws DataError("unknown glance label ...") for anything outside the 16 names.
GlanceRegion parse_glance_region(std::string_view s);

// The five secondary tasks of the driving protocol.
enum class TaskKind : std::uint8_t {
    ReportSpeed,
    AdjacentVehicles,
    RadioOnOff,
    LocatePhone,
    PhoneConversation,
};

inline constexpr std::array<std::string_view, 5> kTaskKindNames{
    "report-speed", "adjacent-vehicles", "radio-on-off", "locate-phone", "phone-conversation",
};

std::string_view to_string(TaskKind t);
TaskKind parse_task_kind(std::string_view s);

// One timestamped head rotation, in degrees. rot_x is pitch, rot_y yaw,
// rot_z roll.
struct RotationSample {
    std::string subject_id;
    std::string task_id;
    std::int64_t timestamp_ms = 0;
    double rot_x = 0.0;
    double rot_y = 0.0;
    double rot_z = 0.0;
    GlanceRegion glance = GlanceRegion::Forward;

    bool operator==(const RotationSample&) const = default;
};

// Immutable, validated collection of rotation samples.
//
// Invariants checked at construction:
//   - rotations finite with |rot| < 180
//   - within each (subject, task) stream, timestamps strictly increase in
//     the order the samples appear
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<RotationSample> samples, std::string provenance = {});

    [[nodiscard]] std::span<const RotationSample> samples() const { return samples_; }
    [[nodiscard]] const std::vector<std::string>& subjects() const { return subjects_; }
    [[nodiscard]] const std::string& provenance() const { return provenance_; }
    [[nodiscard]] std::size_t size() const { return samples_.size(); }
    [[nodiscard]] bool empty() const { return samples_.empty(); }
    [[nodiscard]] const RotationSample& operator[](std::size_t i) const { return samples_[i]; }

    // Number of samples carrying the given label.
    [[nodiscard]] std::size_t count(GlanceRegion r) const;

    // Keeps samples whose subject is in `subjects` (order preserved).
    [[nodiscard]] Dataset select_subjects(std::span<const std::string> subjects) const;

    bool operator==(const Dataset& other) const { return samples_ == other.samples_; }

private:
    std::vector<RotationSample> samples_;
    std::vector<std::string> subjects_;  // sorted, unique
    std::string provenance_;
};

// Keeps only samples labelled class_a or class_b, preserving order.
Dataset filter_binary(const Dataset& ds, GlanceRegion class_a, GlanceRegion class_b);

}  // namespace headglance
