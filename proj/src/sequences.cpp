#include <algorithm>
#include <map>

#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"

namespace headglance {

LabeledSet to_labeled_set(const Dataset& ds) {
    LabeledSet out;
    out.x.reserve(ds.size());
    out.y.reserve(ds.size());
    for (const auto& s : ds.samples()) {
        out.x.push_back({s.rot_x, s.rot_y, s.rot_z});
        out.y.push_back(s.glance);
    }
    return out;
}

bool label_less(Label a, Label b) { return to_string(a) < to_string(b); }

std::vector<Label> distinct_labels(std::span<const Label> y) {
    std::vector<Label> out(y.begin(), y.end());
    std::sort(out.begin(), out.end(), label_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<SampleSequence> make_sequences(const Dataset& ds, Label class_a, Label class_b,
                                           std::size_t max_length) {
    // Stream index by first appearance, then the open sequence for each stream.
    std::map<std::pair<std::string, std::string>, std::size_t> stream_of;
    std::vector<std::vector<SampleSequence>> streams;
    for (const auto& s : ds.samples()) {
        if (s.glance != class_a && s.glance != class_b) {
            throw PreconditionError("make_sequences: sample labelled '" + std::string(to_string(s.glance)) +
                                    "' is outside the class pair");
        }
        auto [it, inserted] = stream_of.try_emplace({s.subject_id, s.task_id}, streams.size());
        if (inserted) streams.emplace_back();
        auto& seqs = streams[it->second];
        if (seqs.empty() || seqs.back().label != s.glance ||
            (max_length > 0 && seqs.back().observations.size() >= max_length)) {
            seqs.push_back({s.subject_id, s.task_id, s.glance, {}});
        }
        seqs.back().observations.push_back({s.rot_x, s.rot_y, s.rot_z});
    }
    std::vector<SampleSequence> out;
    for (auto& seqs : streams) {
        for (auto& q : seqs) out.push_back(std::move(q));
    }
    return out;
}

}  // namespace headglance
