#pragma once

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "headglance/types.hpp"

namespace headglance {

using Matrix3 = std::array<std::array<double, 3>, 3>;
using Vector3 = std::array<double, 3>;

struct EigenResult {
    Vector3 values;   // descending
    Matrix3 vectors;  // row i is the unit eigenvector for values[i]
    int sweeps = 0;
};

// Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix. Stops when the
// off-diagonal Frobenius norm drops below `tol` or after `max_sweeps`.
EigenResult jacobi_eigen(const Matrix3& sym, double tol = 1e-12, int max_sweeps = 100);

// Population covariance of (rot_x, rot_y, rot_z).
Matrix3 covariance(const Dataset& ds, Vector3* mean_out = nullptr);

struct PcaModel {
    Matrix3 components{};  // rows: principal components over (rot_x, rot_y, rot_z)
    Vector3 eigenvalues{};  // descending, clamped at 0
    Vector3 mean{};

    [[nodiscard]] Vector3 explained_variance_ratio() const;
};

// Needs >= 4 samples. Each component's largest-magnitude loading is made
// non-negative so the decomposition is deterministic.
PcaModel fit_pca(const Dataset& ds);

struct ProjectionRow {
    std::string subject_id;
    GlanceRegion glance = GlanceRegion::Forward;
    std::vector<double> scores;  // pc_1..pc_k
};

std::vector<ProjectionRow> project(const PcaModel& model, const Dataset& ds, int k);
Vector3 project_point(const PcaModel& model, const Vector3& x);
// Inverse map from the first k scores back to rotation space.
Vector3 reconstruct(const PcaModel& model, std::span<const double> scores);

struct AveragedComponents {
    Matrix3 mean{};
    Matrix3 stddev{};  // population dispersion of the sign-aligned runs
    Vector3 mean_ratio{};
};

// Sign-aligns every run's component rows to the first run (flip when the
// dot product is negative), then averages element-wise.
AveragedComponents averaged_components(std::span<const PcaModel> runs);

void write_projection_csv(std::ostream& out, const std::vector<ProjectionRow>& rows, int k);
std::string pca_json(const PcaModel& model, const AveragedComponents* averaged = nullptr);

}  // namespace headglance
