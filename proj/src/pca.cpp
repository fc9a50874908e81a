#include "headglance/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include <nlohmann/json.hpp>

#include "headglance/dataset_io.hpp"
#include "headglance/error.hpp"

namespace headglance {

namespace {

double off_diagonal_norm(const Matrix3& a) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            if (i != j) s += a[i][j] * a[i][j];
    return std::sqrt(s);
}

double round6(double v) { return std::round(v * 1e6) / 1e6 + 0.0; }

}  // namespace

EigenResult jacobi_eigen(const Matrix3& sym, double tol, int max_sweeps) {
    Matrix3 a = sym;
    Matrix3 v{};  // columns accumulate eigenvectors
    for (int i = 0; i < 3; ++i) v[i][i] = 1.0;

    int sweep = 0;
    for (; sweep < max_sweeps && off_diagonal_norm(a) >= tol; ++sweep) {
        for (int p = 0; p < 2; ++p) {
            for (int q = p + 1; q < 3; ++q) {
                if (a[p][q] == 0.0) continue;
                // Rotation angle zeroing a[p][q] (Golub & Van Loan, symmetric Schur).
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < 3; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (int k = 0; k < 3; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for (int k = 0; k < 3; ++k) {
                    const double vkp = v[k][p], vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }

    std::array<int, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a[i][i] > a[j][j]; });
    EigenResult out;
    out.sweeps = sweep;
    for (int r = 0; r < 3; ++r) {
        out.values[r] = a[order[r]][order[r]];
        for (int k = 0; k < 3; ++k) out.vectors[r][k] = v[k][order[r]];
    }
    return out;
}

Matrix3 covariance(const Dataset& ds, Vector3* mean_out) {
    Vector3 mean{};
    const double n = static_cast<double>(ds.size());
    for (const auto& s : ds.samples()) {
        mean[0] += s.rot_x;
        mean[1] += s.rot_y;
        mean[2] += s.rot_z;
    }
    for (auto& m : mean) m /= n;
    Matrix3 c{};
    for (const auto& s : ds.samples()) {
        const Vector3 d{s.rot_x - mean[0], s.rot_y - mean[1], s.rot_z - mean[2]};
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) c[i][j] += d[i] * d[j];
    }
    for (auto& row : c)
        for (auto& x : row) x /= n;
    if (mean_out) *mean_out = mean;
    return c;
}

Vector3 PcaModel::explained_variance_ratio() const {
    const double total = eigenvalues[0] + eigenvalues[1] + eigenvalues[2];
    if (total <= 0.0) return {0.0, 0.0, 0.0};
    return {eigenvalues[0] / total, eigenvalues[1] / total, eigenvalues[2] / total};
}

PcaModel fit_pca(const Dataset& ds) {
    if (ds.size() < 4) throw PreconditionError("fit_pca needs at least 4 samples");
    // Dataset already enforces finite rotations.
    PcaModel m;
    const Matrix3 cov = covariance(ds, &m.mean);
    const auto eig = jacobi_eigen(cov);
    for (int r = 0; r < 3; ++r) {
        m.eigenvalues[r] = std::max(0.0, eig.values[r]);
        m.components[r] = eig.vectors[r];
        std::size_t big = 0;
        for (std::size_t k = 1; k < 3; ++k) {
            if (std::abs(m.components[r][k]) > std::abs(m.components[r][big])) big = k;
        }
        if (m.components[r][big] < 0.0) {
            for (auto& x : m.components[r]) x = -x;
        }
    }
    return m;
}

Vector3 project_point(const PcaModel& model, const Vector3& x) {
    Vector3 out{};
    for (int r = 0; r < 3; ++r)
        for (int k = 0; k < 3; ++k) out[r] += model.components[r][k] * (x[k] - model.mean[k]);
    return out;
}

Vector3 reconstruct(const PcaModel& model, std::span<const double> scores) {
    Vector3 out = model.mean;
    for (std::size_t r = 0; r < scores.size() && r < 3; ++r)
        for (int k = 0; k < 3; ++k) out[k] += scores[r] * model.components[r][k];
    return out;
}

std::vector<ProjectionRow> project(const PcaModel& model, const Dataset& ds, int k) {
    if (k < 1 || k > 3) throw PreconditionError("project: k must be 1, 2 or 3");
    std::vector<ProjectionRow> rows;
    rows.reserve(ds.size());
    for (const auto& s : ds.samples()) {
        const auto p = project_point(model, {s.rot_x, s.rot_y, s.rot_z});
        rows.push_back({s.subject_id, s.glance, std::vector<double>(p.begin(), p.begin() + k)});
    }
    return rows;
}

AveragedComponents averaged_components(std::span<const PcaModel> runs) {
    AveragedComponents out;
    if (runs.empty()) return out;
    const auto& ref = runs.front().components;
    std::vector<Matrix3> aligned;
    aligned.reserve(runs.size());
    for (const auto& run : runs) {
        Matrix3 c = run.components;
        for (int r = 0; r < 3; ++r) {
            double dot = 0.0;
            for (int k = 0; k < 3; ++k) dot += c[r][k] * ref[r][k];
            if (dot < 0.0)
                for (auto& x : c[r]) x = -x;
        }
        aligned.push_back(c);
        const auto ratio = run.explained_variance_ratio();
        for (int r = 0; r < 3; ++r) out.mean_ratio[r] += ratio[r];
    }
    const double n = static_cast<double>(runs.size());
    for (int r = 0; r < 3; ++r) {
        out.mean_ratio[r] /= n;
        for (int k = 0; k < 3; ++k) {
            double s = 0.0;
            for (const auto& c : aligned) s += c[r][k];
            const double mu = s / n;
            double v = 0.0;
            for (const auto& c : aligned) v += (c[r][k] - mu) * (c[r][k] - mu);
            out.mean[r][k] = mu;
            out.stddev[r][k] = std::sqrt(v / n);
        }
    }
    return out;
}

void write_projection_csv(std::ostream& out, const std::vector<ProjectionRow>& rows, int k) {
    out << "subject_id,glance";
    for (int i = 1; i <= k; ++i) out << ",pc_" << i;
    out << '\n';
    for (const auto& r : rows) {
        out << r.subject_id << ',' << to_string(r.glance);
        for (double v : r.scores) out << ',' << format_fixed(v);
        out << '\n';
    }
}

std::string pca_json(const PcaModel& model, const AveragedComponents* averaged) {
    auto matrix = [](const Matrix3& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : m) rows.push_back({round6(r[0]), round6(r[1]), round6(r[2])});
        return rows;
    };
    auto vec = [](const Vector3& v) { return nlohmann::json{round6(v[0]), round6(v[1]), round6(v[2])}; };
    nlohmann::ordered_json j;
    j["variables"] = {"rot_x", "rot_y", "rot_z"};
    j["components"] = matrix(model.components);
    j["eigenvalues"] = vec(model.eigenvalues);
    j["explained_variance_ratio"] = vec(model.explained_variance_ratio());
    j["mean"] = vec(model.mean);
    if (averaged) {
        j["averaged"] = {{"components_mean", matrix(averaged->mean)},
                         {"components_std", matrix(averaged->stddev)},
                         {"explained_variance_ratio_mean", vec(averaged->mean_ratio)}};
    }
    return j.dump(2) + "\n";
}

}  // namespace headglance
