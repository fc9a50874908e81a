#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

// Landmark roles in their fixed order.
enum class LandmarkRole : std::uint8_t {
    RightEyeOuter,
    RightEyeInner,
    LeftEyeOuter,
    LeftEyeInner,
    NoseTip,
    MouthRight,
    MouthLeft,
};

inline constexpr std::size_t kLandmarkCount = 7;

inline constexpr std::array<std::string_view, kLandmarkCount> kLandmarkRoleNames{
    "right-eye-outer", "right-eye-inner", "left-eye-outer", "left-eye-inner",
    "nose-tip",        "mouth-right",     "mouth-left",
};

std::string_view to_string(LandmarkRole r);
LandmarkRole parse_landmark_role(std::string_view s);

struct Point2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Point2&) const = default;
};

struct Point3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

// One analyst's 7 landmarks; std::nullopt marks a landmark flagged missing.
struct AnalystAnnotation {
    std::string analyst_id;
    std::array<std::optional<Point2>, kLandmarkCount> points;
};

struct LandmarkFrame {
    std::int64_t frame_id = 0;
    std::vector<AnalystAnnotation> annotations;
};

struct MergedFrame {
    std::int64_t frame_id = 0;
    std::array<Point2, kLandmarkCount> points;
    double disagreement = 0.0;  // mean per-landmark distance between analysts, px
};

enum class ExclusionReason : std::uint8_t { Disagreement, Missing, Degenerate };
std::string_view to_string(ExclusionReason r);

struct Excluded {
    std::int64_t frame_id = 0;
    ExclusionReason reason = ExclusionReason::Missing;
};

using MergeResult = std::variant<MergedFrame, Excluded>;

// Averages the two analysts' landmarks. Frames with any missing landmark
// or with mean disagreement above `max_disagreement_px` are excluded.
// Throws PreconditionError unless exactly two analysts are present.
MergeResult merge_annotations(const LandmarkFrame& frame, double max_disagreement_px = 3.5);

// 3D landmark positions in a face-fixed frame: x to the image right, y down,
// z away from the camera (the nose tip has negative z). Must be symmetric
// about the x = 0 plane.
struct ReferenceFace {
    std::array<Point3, kLandmarkCount> points;

    // Outer-eye distance 1.0, nose tip 0.35 toward the camera, mouth
    // corners 0.55 below the eye line and 0.65 apart.
    static ReferenceFace standard();
    // Throws DataError if mirror symmetry or midplane placement is violated.
    void validate(double tol = 1e-9) const;
};

// Head rotation in degrees: rot_x pitch, rot_y yaw, rot_z roll. The rotation
// matrix is Rz(rot_z) * Ry(rot_y) * Rx(rot_x) acting on face coordinates.
struct HeadRotation {
    double rot_x = 0.0;
    double rot_y = 0.0;
    double rot_z = 0.0;
};

struct PoseFitOptions {
    double step_tolerance = 1e-8;
    int max_iterations = 100;
};

struct PoseFit {
    HeadRotation rotation;
    double scale = 0.0;
    Point2 translation;
    double rms_residual_px = 0.0;
    int iterations = 0;
};

// Weak-perspective pose fit of the reference face to the merged landmarks:
// least squares over rotation, uniform scale and 2D translation. Affine
// initialisation, then Gauss-Newton refinement.
// Throws NumericalError for degenerate constellations (coincident outer eye
// corners, all landmarks collinear).
PoseFit fit_pose(const std::array<Point2, kLandmarkCount>& image_points, const ReferenceFace& ref,
                 const PoseFitOptions& opts = {});

HeadRotation estimate_rotation(const MergedFrame& frame, const ReferenceFace& ref,
                               const PoseFitOptions& opts = {});

// Weak-perspective projection of the reference face; the inverse of fit_pose.
std::array<Point2, kLandmarkCount> project_face(const ReferenceFace& ref, const HeadRotation& rot,
                                                double scale, Point2 translation);

// Frame data reduction: merge, exclude, estimate.
struct ReductionSummary {
    std::size_t merged = 0;
    std::size_t excluded_disagreement = 0;
    std::size_t excluded_missing = 0;
    std::size_t excluded_degenerate = 0;
};

struct FrameRotation {
    std::int64_t frame_id = 0;
    HeadRotation rotation;
};

struct ReductionResult {
    std::vector<FrameRotation> rotations;  // frames that survived every rule
    ReductionSummary summary;
};

ReductionResult reduce_frames(const std::vector<LandmarkFrame>& frames, const ReferenceFace& ref,
                              double max_disagreement_px = 3.5, const PoseFitOptions& opts = {});

std::string reduction_summary_json(const ReductionSummary& s);

// Landmark CSV: frame_id, analyst_id, landmark_role, x_px, y_px, missing_flag.
// Frames come back sorted by frame_id; each analyst must supply all 7 roles.
std::vector<LandmarkFrame> parse_landmark_csv(std::istream& in);
std::vector<LandmarkFrame> load_landmark_csv(const std::filesystem::path& path);
void write_landmark_csv(std::ostream& out, const std::vector<LandmarkFrame>& frames);

// Reference face JSON: {"points": {"nose-tip": [x, y, z], ...}} with all 7 roles.
ReferenceFace load_reference_face(const std::filesystem::path& path);
ReferenceFace parse_reference_face_json(std::string_view text);

// Labelled glance span covering [start_ms, end_ms): closed start, open end,
// so back-to-back spans do not overlap.
struct GlanceSpan {
    std::int64_t start_ms = 0;
    std::int64_t end_ms = 0;
    GlanceRegion region = GlanceRegion::Forward;
};

struct TimedRotation {
    std::int64_t timestamp_ms = 0;
    HeadRotation rotation;
};

struct LabelMergeResult {
    Dataset dataset;
    std::size_t dropped = 0;  // rotations not covered by any span
};

// Labels each rotation with the span containing its timestamp. Both inputs
// must be time-sorted; overlapping spans raise DataError.
LabelMergeResult merge_glance_labels(const std::string& subject_id, const std::string& task_id,
                                     const std::vector<TimedRotation>& rotations,
                                     const std::vector<GlanceSpan>& spans);

// Glance span CSV: start_ms, end_ms, glance.
std::vector<GlanceSpan> parse_glance_span_csv(std::istream& in);

}  // namespace headglance
