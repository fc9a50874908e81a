#include <algorithm>
#include <map>
#include <numeric>
#include <queue>

#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"

namespace headglance {

namespace {

double squared_distance(const FeatureVector& a, const FeatureVector& b) {
    double d = 0.0;
    for (int k = 0; k < 3; ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
    return d;
}

// (distance, index) ordered lexicographically so equal distances are
// resolved by index.
using Candidate = std::pair<double, std::uint32_t>;

}  // namespace

KnnModel::KnnModel(LabeledSet train, KnnParams params) : train_(std::move(train)), params_(params) {
    if (params_.k < 1 || params_.k % 2 == 0) throw PreconditionError("kNN: k must be a positive odd number");
    if (static_cast<std::size_t>(params_.k) > train_.size()) {
        throw PreconditionError("kNN: k exceeds the training set size");
    }
    std::vector<std::uint32_t> idx(train_.size());
    std::iota(idx.begin(), idx.end(), 0U);
    nodes_.reserve(idx.size());
    root_ = build(idx, 0, idx.size(), 0);
}

std::int32_t KnnModel::build(std::vector<std::uint32_t>& idx, std::size_t lo, std::size_t hi, int depth) {
    if (lo >= hi) return -1;
    const auto axis = static_cast<std::uint8_t>(depth % 3);
    const std::size_t mid = lo + (hi - lo) / 2;
    std::nth_element(idx.begin() + static_cast<std::ptrdiff_t>(lo), idx.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx.begin() + static_cast<std::ptrdiff_t>(hi), [&](std::uint32_t a, std::uint32_t b) {
                         const double va = train_.x[a][axis], vb = train_.x[b][axis];
                         return va < vb || (va == vb && a < b);
                     });
    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({idx[mid], -1, -1, axis});
    const auto left = build(idx, lo, mid, depth + 1);
    const auto right = build(idx, mid + 1, hi, depth + 1);
    nodes_[static_cast<std::size_t>(self)].left = left;
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

std::vector<std::size_t> KnnModel::neighbours(const FeatureVector& q) const {
    const auto k = static_cast<std::size_t>(params_.k);
    std::priority_queue<Candidate> best;  // max-heap: worst candidate on top
    auto visit = [&](auto&& self, std::int32_t n) -> void {
        if (n < 0) return;
        const Node& node = nodes_[static_cast<std::size_t>(n)];
        const Candidate c{squared_distance(q, train_.x[node.point]), node.point};
        if (best.size() < k) {
            best.push(c);
        } else if (c < best.top()) {
            best.pop();
            best.push(c);
        }
        const double diff = q[node.axis] - train_.x[node.point][node.axis];
        const std::int32_t near = diff <= 0.0 ? node.left : node.right;
        const std::int32_t far = diff <= 0.0 ? node.right : node.left;
        self(self, near);
        // <= keeps equal-distance points on the far side reachable for the tie rule.
        if (best.size() < k || diff * diff <= best.top().first) self(self, far);
    };
    visit(visit, root_);
    std::vector<std::size_t> out(best.size());
    for (std::size_t i = out.size(); i-- > 0;) {
        out[i] = best.top().second;
        best.pop();
    }
    return out;
}

Label KnnModel::classify(const FeatureVector& q) const {
    std::map<Label, int> votes;
    for (auto i : neighbours(q)) ++votes[train_.y[i]];
    Label winner = votes.begin()->first;
    int top = -1;
    for (const auto& [label, n] : votes) {
        if (n > top || (n == top && label_less(label, winner))) {
            winner = label;
            top = n;
        }
    }
    return winner;
}

}  // namespace headglance
