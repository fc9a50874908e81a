#include "headglance/pose.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "headglance/dataset_io.hpp"
#include "headglance/error.hpp"

namespace headglance {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;

Mat3 rot_x(double a) {
    Mat3 m;
    m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
    return m;
}
Mat3 rot_y(double a) {
    Mat3 m;
    m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
    return m;
}
Mat3 rot_z(double a) {
    Mat3 m;
    m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
    return m;
}
Mat3 d_rot_x(double a) {
    Mat3 m;
    m << 0, 0, 0, 0, -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a);
    return m;
}
Mat3 d_rot_y(double a) {
    Mat3 m;
    m << -std::sin(a), 0, std::cos(a), 0, 0, 0, -std::cos(a), 0, -std::sin(a);
    return m;
}
Mat3 d_rot_z(double a) {
    Mat3 m;
    m << -std::sin(a), -std::cos(a), 0, std::cos(a), -std::sin(a), 0, 0, 0, 0;
    return m;
}

Mat3 rotation_matrix(double ax, double ay, double az) { return rot_z(az) * rot_y(ay) * rot_x(ax); }

// Inverse of rotation_matrix for R = Rz * Ry * Rx.
Vec3 euler_from_matrix(const Mat3& r) {
    const double ay = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
    const double ax = std::atan2(r(2, 1), r(2, 2));
    const double az = std::atan2(r(1, 0), r(0, 0));
    return {ax, ay, az};
}

Eigen::Matrix<double, 3, kLandmarkCount> ref_matrix(const ReferenceFace& ref) {
    Eigen::Matrix<double, 3, kLandmarkCount> x;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) x.col(i) << ref.points[i].x, ref.points[i].y, ref.points[i].z;
    return x;
}

struct Residuals {
    Eigen::Matrix<double, 2 * kLandmarkCount, 1> r;
    Eigen::Matrix<double, 2 * kLandmarkCount, 6> jac;
};

// Parameters: (ax, ay, az, log scale, tx, ty).
Residuals evaluate(const Eigen::Matrix<double, 6, 1>& p, const Eigen::Matrix<double, 3, kLandmarkCount>& x,
                   const Eigen::Matrix<double, 2, kLandmarkCount>& img) {
    const Mat3 rx = rot_x(p[0]), ry = rot_y(p[1]), rz = rot_z(p[2]);
    const Mat3 r = rz * ry * rx;
    const Mat3 dr_ax = rz * ry * d_rot_x(p[0]);
    const Mat3 dr_ay = rz * d_rot_y(p[1]) * rx;
    const Mat3 dr_az = d_rot_z(p[2]) * ry * rx;
    const double s = std::exp(p[3]);
    Residuals out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const Vec3 xi = x.col(i);
        const Vec3 rxv = r * xi;
        const Eigen::Index row = static_cast<Eigen::Index>(2 * i);
        out.r(row) = s * rxv.x() + p[4] - img(0, i);
        out.r(row + 1) = s * rxv.y() + p[5] - img(1, i);
        const Vec3 ga = dr_ax * xi, gb = dr_ay * xi, gc = dr_az * xi;
        out.jac.row(row) << s * ga.x(), s * gb.x(), s * gc.x(), s * rxv.x(), 1.0, 0.0;
        out.jac.row(row + 1) << s * ga.y(), s * gb.y(), s * gc.y(), s * rxv.y(), 0.0, 1.0;
    }
    return out;
}

}  // namespace

std::string_view to_string(LandmarkRole r) { return kLandmarkRoleNames.at(static_cast<std::size_t>(r)); }

LandmarkRole parse_landmark_role(std::string_view s) {
    for (std::size_t i = 0; i < kLandmarkRoleNames.size(); ++i) {
        if (kLandmarkRoleNames[i] == s) return static_cast<LandmarkRole>(i);
    }
    throw DataError("unknown landmark role '" + std::string(s) + "'");
}

std::string_view to_string(ExclusionReason r) {
    switch (r) {
        case ExclusionReason::Disagreement: return "disagreement";
        case ExclusionReason::Missing: return "missing";
        case ExclusionReason::Degenerate: return "degenerate";
    }
    return "unknown";
}

MergeResult merge_annotations(const LandmarkFrame& frame, double max_disagreement_px) {
    if (frame.annotations.size() != 2) {
        throw PreconditionError("frame " + std::to_string(frame.frame_id) + " has " +
                                std::to_string(frame.annotations.size()) + " analyst annotations, need exactly 2");
    }
    const auto& a = frame.annotations[0].points;
    const auto& b = frame.annotations[1].points;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        if (!a[i] || !b[i]) return Excluded{frame.frame_id, ExclusionReason::Missing};
    }
    MergedFrame merged;
    merged.frame_id = frame.frame_id;
    double total = 0.0;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        merged.points[i] = {(a[i]->x + b[i]->x) / 2.0, (a[i]->y + b[i]->y) / 2.0};
        total += std::hypot(a[i]->x - b[i]->x, a[i]->y - b[i]->y);
    }
    merged.disagreement = total / static_cast<double>(kLandmarkCount);
    if (merged.disagreement > max_disagreement_px) return Excluded{frame.frame_id, ExclusionReason::Disagreement};
    return merged;
}

ReferenceFace ReferenceFace::standard() {
    ReferenceFace f;
    f.points = {{
        {-0.50, 0.00, 0.00},   // right-eye-outer (image left)
        {-0.18, 0.00, 0.00},   // right-eye-inner
        {0.50, 0.00, 0.00},    // left-eye-outer
        {0.18, 0.00, 0.00},    // left-eye-inner
        {0.00, 0.30, -0.35},   // nose-tip
        {-0.325, 0.55, 0.00},  // mouth-right
        {0.325, 0.55, 0.00},   // mouth-left
    }};
    return f;
}

void ReferenceFace::validate(double tol) const {
    auto mirrored = [&](LandmarkRole r, LandmarkRole l) {
        const auto& p = points[static_cast<std::size_t>(r)];
        const auto& q = points[static_cast<std::size_t>(l)];
        return std::abs(p.x + q.x) <= tol && std::abs(p.y - q.y) <= tol && std::abs(p.z - q.z) <= tol;
    };
    if (!mirrored(LandmarkRole::RightEyeOuter, LandmarkRole::LeftEyeOuter) ||
        !mirrored(LandmarkRole::RightEyeInner, LandmarkRole::LeftEyeInner) ||
        !mirrored(LandmarkRole::MouthRight, LandmarkRole::MouthLeft)) {
        throw DataError("reference face is not mirror-symmetric about x = 0");
    }
    if (std::abs(points[static_cast<std::size_t>(LandmarkRole::NoseTip)].x) > tol) {
        throw DataError("reference face nose tip must lie on the midplane x = 0");
    }
    // The affine initialisation needs a non-planar constellation.
    auto x = ref_matrix(*this);
    Eigen::Matrix<double, 3, kLandmarkCount> c = x.colwise() - x.rowwise().mean();
    Eigen::SelfAdjointEigenSolver<Mat3> es(c * c.transpose());
    if (es.eigenvalues()(0) <= 1e-12 * es.eigenvalues()(2)) {
        throw DataError("reference face landmarks are coplanar; depth is required for pose recovery");
    }
}

std::array<Point2, kLandmarkCount> project_face(const ReferenceFace& ref, const HeadRotation& rot, double scale,
                                                Point2 translation) {
    const Mat3 r = rotation_matrix(rot.rot_x * kDeg, rot.rot_y * kDeg, rot.rot_z * kDeg);
    std::array<Point2, kLandmarkCount> out;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        const Vec3 v = r * Vec3(ref.points[i].x, ref.points[i].y, ref.points[i].z);
        out[i] = {scale * v.x() + translation.x, scale * v.y() + translation.y};
    }
    return out;
}

PoseFit fit_pose(const std::array<Point2, kLandmarkCount>& image_points, const ReferenceFace& ref,
                 const PoseFitOptions& opts) {
    Eigen::Matrix<double, 2, kLandmarkCount> img;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) img.col(i) << image_points[i].x, image_points[i].y;
    for (std::size_t i = 0; i < kLandmarkCount; ++i) {
        if (!std::isfinite(img(0, i)) || !std::isfinite(img(1, i))) {
            throw NumericalError("degenerate landmark configuration: non-finite coordinate");
        }
    }

    const auto reo = static_cast<Eigen::Index>(LandmarkRole::RightEyeOuter);
    const auto leo = static_cast<Eigen::Index>(LandmarkRole::LeftEyeOuter);
    const Eigen::Vector2d img_mean = img.rowwise().mean();
    const Eigen::Matrix<double, 2, kLandmarkCount> pc = img.colwise() - img_mean;
    const double spread = std::sqrt(pc.squaredNorm() / kLandmarkCount);
    if (spread <= 0.0 || (img.col(reo) - img.col(leo)).norm() <= 1e-9 * spread) {
        throw NumericalError("degenerate landmark configuration: zero inter-ocular distance");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(pc * pc.transpose());
    if (es2.eigenvalues()(0) <= 1e-12 * es2.eigenvalues()(1)) {
        throw NumericalError("degenerate landmark configuration: landmarks are collinear");
    }

    // Affine initialisation: M = argmin |Pc - M Xc|, then nearest scaled rotation.
    const auto x = ref_matrix(ref);
    const Vec3 x_mean = x.rowwise().mean();
    const Eigen::Matrix<double, 3, kLandmarkCount> xc = x.colwise() - x_mean;
    const Eigen::Matrix<double, 2, 3> m = pc * xc.transpose() * (xc * xc.transpose()).inverse();
    Eigen::JacobiSVD<Eigen::Matrix<double, 2, 3>> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix<double, 2, 3> rows = svd.matrixU() * Eigen::Matrix<double, 2, 3>::Identity() * svd.matrixV().transpose();
    Mat3 r0;
    r0.row(0) = rows.row(0);
    r0.row(1) = rows.row(1);
    r0.row(2) = rows.row(0).cross(rows.row(1));
    const double s0 = svd.singularValues().mean();

    Eigen::Matrix<double, 6, 1> p;
    const Vec3 e0 = euler_from_matrix(r0);
    const Eigen::Vector2d t0 = img_mean - s0 * (r0 * x_mean).head<2>();
    p << e0, std::log(s0), t0;

    // Gauss-Newton with step halving; the problem is small and well conditioned.
    Residuals res = evaluate(p, x, img);
    double cost = res.r.squaredNorm();
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        const Eigen::Matrix<double, 6, 6> jtj = res.jac.transpose() * res.jac;
        const Eigen::Matrix<double, 6, 1> g = res.jac.transpose() * res.r;
        Eigen::Matrix<double, 6, 1> step = -jtj.ldlt().solve(g);
        if (!step.allFinite()) throw NumericalError("degenerate landmark configuration: singular pose system");
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 30; ++k) {
            Eigen::Matrix<double, 6, 1> cand = p + lambda * step;
            Residuals cr = evaluate(cand, x, img);
            const double cc = cr.r.squaredNorm();
            if (cc <= cost) {
                p = cand;
                res = std::move(cr);
                cost = cc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted || (lambda * step).norm() < opts.step_tolerance) {
            ++it;
            break;
        }
    }

    // Normalise back to a canonical Euler triple.
    const Vec3 e = euler_from_matrix(rotation_matrix(p[0], p[1], p[2]));
    PoseFit fit;
    fit.rotation = {e[0] / kDeg, e[1] / kDeg, e[2] / kDeg};
    fit.scale = std::exp(p[3]);
    fit.translation = {p[4], p[5]};
    fit.rms_residual_px = std::sqrt(cost / kLandmarkCount);
    fit.iterations = it;
    return fit;
}

HeadRotation estimate_rotation(const MergedFrame& frame, const ReferenceFace& ref, const PoseFitOptions& opts) {
    return fit_pose(frame.points, ref, opts).rotation;
}

ReductionResult reduce_frames(const std::vector<LandmarkFrame>& frames, const ReferenceFace& ref,
                              double max_disagreement_px, const PoseFitOptions& opts) {
    ReductionResult out;
    for (const auto& frame : frames) {
        auto merged = merge_annotations(frame, max_disagreement_px);
        if (const auto* ex = std::get_if<Excluded>(&merged)) {
            if (ex->reason == ExclusionReason::Missing) {
                ++out.summary.excluded_missing;
            } else {
                ++out.summary.excluded_disagreement;
            }
            continue;
        }
        try {
            out.rotations.push_back({frame.frame_id, estimate_rotation(std::get<MergedFrame>(merged), ref, opts)});
            ++out.summary.merged;
        } catch (const NumericalError&) {
            ++out.summary.excluded_degenerate;
        }
    }
    return out;
}

std::string reduction_summary_json(const ReductionSummary& s) {
    nlohmann::ordered_json j;
    j["merged"] = s.merged;
    j["excluded_disagreement"] = s.excluded_disagreement;
    j["excluded_missing"] = s.excluded_missing;
    j["excluded_degenerate"] = s.excluded_degenerate;
    return j.dump(2) + "\n";
}

std::vector<LandmarkFrame> parse_landmark_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("landmark CSV is empty (missing header row)");
    const auto header = split_csv_line(line);
    static constexpr std::array<std::string_view, 6> kCols{"frame_id", "analyst_id", "landmark_role",
                                                           "x_px",     "y_px",       "missing_flag"};
    std::array<std::size_t, 6> col{};
    for (std::size_t c = 0; c < kCols.size(); ++c) {
        auto it = std::find(header.begin(), header.end(), kCols[c]);
        if (it == header.end()) throw DataError("landmark CSV header is missing column '" + std::string(kCols[c]) + "'");
        col[c] = static_cast<std::size_t>(it - header.begin());
    }

    struct Partial {
        std::array<std::optional<Point2>, kLandmarkCount> points;
        std::array<bool, kLandmarkCount> seen{};
    };
    std::map<std::int64_t, std::vector<std::pair<std::string, Partial>>> frames;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        auto bad = [&](const std::string& why) {
            return DataError("landmark CSV row " + std::to_string(row) + ": " + why);
        };
        if (f.size() != header.size()) throw bad("wrong field count");
        std::int64_t frame_id = 0;
        try {
            std::size_t used = 0;
            frame_id = std::stoll(f[col[0]], &used);
            if (used != f[col[0]].size()) throw bad("malformed frame_id");
        } catch (const std::logic_error&) {
            throw bad("malformed frame_id");
        }
        const auto role = static_cast<std::size_t>(parse_landmark_role(f[col[2]]));
        const std::string& flag = f[col[5]];
        const bool missing = flag == "1" || flag == "true";
        if (!missing && flag != "0" && flag != "false") throw bad("missing_flag must be 0/1");
        auto& analysts = frames[frame_id];
        auto it = std::find_if(analysts.begin(), analysts.end(), [&](const auto& a) { return a.first == f[col[1]]; });
        if (it == analysts.end()) {
            analysts.emplace_back(f[col[1]], Partial{});
            it = std::prev(analysts.end());
        }
        if (it->second.seen[role]) throw bad("duplicate landmark for analyst");
        it->second.seen[role] = true;
        if (!missing) {
            try {
                it->second.points[role] = Point2{std::stod(f[col[3]]), std::stod(f[col[4]])};
            } catch (const std::logic_error&) {
                throw bad("malformed pixel coordinate");
            }
        }
    }

    std::vector<LandmarkFrame> out;
    for (auto& [id, analysts] : frames) {
        LandmarkFrame lf;
        lf.frame_id = id;
        for (auto& [analyst, part] : analysts) {
            if (std::find(part.seen.begin(), part.seen.end(), false) != part.seen.end()) {
                throw DataError("landmark CSV: analyst '" + analyst + "' in frame " + std::to_string(id) +
                                " does not provide all 7 landmark entries");
            }
            lf.annotations.push_back({analyst, part.points});
        }
        out.push_back(std::move(lf));
    }
    return out;
}

std::vector<LandmarkFrame> load_landmark_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open landmark file '" + path.string() + "'");
    return parse_landmark_csv(in);
}

void write_landmark_csv(std::ostream& out, const std::vector<LandmarkFrame>& frames) {
    out << "frame_id,analyst_id,landmark_role,x_px,y_px,missing_flag\n";
    for (const auto& f : frames) {
        for (const auto& a : f.annotations) {
            for (std::size_t i = 0; i < kLandmarkCount; ++i) {
                out << f.frame_id << ',' << a.analyst_id << ',' << kLandmarkRoleNames[i] << ',';
                if (a.points[i]) {
                    out << format_fixed(a.points[i]->x) << ',' << format_fixed(a.points[i]->y) << ",0\n";
                } else {
                    out << ",,1\n";
                }
            }
        }
    }
}

ReferenceFace parse_reference_face_json(std::string_view text) {
    ReferenceFace face;
    try {
        const auto j = nlohmann::json::parse(text);
        const auto& pts = j.at("points");
        for (std::size_t i = 0; i < kLandmarkCount; ++i) {
            const auto& v = pts.at(std::string(kLandmarkRoleNames[i]));
            if (!v.is_array() || v.size() != 3) throw DataError("reference face point must be [x, y, z]");
            face.points[i] = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        }
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("reference face JSON invalid: ") + e.what());
    }
    face.validate();
    return face;
}

ReferenceFace load_reference_face(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open reference face file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_reference_face_json(ss.str());
}

LabelMergeResult merge_glance_labels(const std::string& subject_id, const std::string& task_id,
                                     const std::vector<TimedRotation>& rotations,
                                     const std::vector<GlanceSpan>& spans) {
    for (std::size_t i = 0; i < spans.size(); ++i) {
        if (spans[i].end_ms <= spans[i].start_ms) {
            throw DataError("glance span " + std::to_string(i) + " is empty or reversed");
        }
        if (i > 0 && spans[i].start_ms < spans[i - 1].end_ms) {
            throw DataError("glance spans overlap: [" + std::to_string(spans[i - 1].start_ms) + ", " +
                            std::to_string(spans[i - 1].end_ms) + ") and [" + std::to_string(spans[i].start_ms) +
                            ", " + std::to_string(spans[i].end_ms) + ")");
        }
    }
    for (std::size_t i = 1; i < rotations.size(); ++i) {
        if (rotations[i].timestamp_ms <= rotations[i - 1].timestamp_ms) {
            throw DataError("rotation timestamps must strictly increase");
        }
    }

    LabelMergeResult out;
    std::vector<RotationSample> samples;
    std::size_t k = 0;
    for (const auto& r : rotations) {
        while (k < spans.size() && spans[k].end_ms <= r.timestamp_ms) ++k;
        if (k < spans.size() && spans[k].start_ms <= r.timestamp_ms) {
            samples.push_back({subject_id, task_id, r.timestamp_ms, r.rotation.rot_x, r.rotation.rot_y,
                               r.rotation.rot_z, spans[k].region});
        } else {
            ++out.dropped;
        }
    }
    out.dataset = Dataset(std::move(samples), "merged:" + subject_id + "/" + task_id);
    return out;
}

std::vector<GlanceSpan> parse_glance_span_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw DataError("glance span CSV is empty");
    const auto header = split_csv_line(line);
    if (header.size() < 3 || header[0] != "start_ms" || header[1] != "end_ms" || header[2] != "glance") {
        throw DataError("glance span CSV header must be start_ms,end_ms,glance");
    }
    std::vector<GlanceSpan> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        if (f.size() < 3) throw DataError("glance span CSV row " + std::to_string(row) + ": wrong field count");
        try {
            out.push_back({std::stoll(f[0]), std::stoll(f[1]), parse_glance_region(f[2])});
        } catch (const std::logic_error&) {
            throw DataError("glance span CSV row " + std::to_string(row) + ": malformed time");
        }
    }
    return out;
}

}  // namespace headglance
