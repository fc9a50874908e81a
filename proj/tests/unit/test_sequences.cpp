#include "doctest.h"
#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"

using namespace headglance;

namespace {

constexpr auto F = GlanceRegion::Forward;
constexpr auto C = GlanceRegion::CenterStack;

RotationSample at(const char* subject, const char* task, std::int64_t t, GlanceRegion g) {
    return {subject, task, t, double(t), 0.0, 0.0, g};
}

}  // namespace

TEST_CASE("runs split on label changes and streams stay separate") {
    const Dataset ds({at("a", "x", 0, F), at("a", "x", 1, F), at("b", "x", 0, F), at("a", "x", 2, C),
                      at("a", "x", 3, C), at("a", "y", 0, C), at("a", "x", 4, F), at("b", "x", 1, C)});
    const auto seqs = make_sequences(ds, F, C);
    REQUIRE(seqs.size() == 6);
    // Stream (a, x) first, then (b, x), then (a, y).
    CHECK(seqs[0].label == F);
    CHECK(seqs[0].observations.size() == 2);
    CHECK(seqs[1].label == C);
    CHECK(seqs[1].observations.size() == 2);
    CHECK(seqs[1].observations[0][0] == 2.0);
    CHECK(seqs[2].label == F);
    CHECK(seqs[2].observations.size() == 1);
    CHECK(seqs[3].subject_id == "b");
    CHECK(seqs[4].subject_id == "b");
    CHECK(seqs[4].label == C);
    CHECK(seqs[5].task_id == "y");

    std::size_t total = 0;
    for (const auto& s : seqs) total += s.observations.size();
    CHECK(total == ds.size());
}

TEST_CASE("long runs are cut into capped blocks") {
    std::vector<RotationSample> s;
    for (int t = 0; t < 37; ++t) s.push_back(at("a", "x", t, F));
    for (int t = 37; t < 40; ++t) s.push_back(at("a", "x", t, C));
    const Dataset ds(s);
    const auto seqs = make_sequences(ds, F, C, 15);
    REQUIRE(seqs.size() == 4);
    CHECK(seqs[0].observations.size() == 15);
    CHECK(seqs[1].observations.size() == 15);
    CHECK(seqs[2].observations.size() == 7);
    CHECK(seqs[3].observations.size() == 3);
    CHECK(seqs[1].observations.front()[0] == 15.0);
    CHECK(make_sequences(ds, F, C).size() == 2);
}

TEST_CASE("labels outside the pair are rejected") {
    const Dataset ds({at("a", "x", 0, GlanceRegion::Passenger)});
    CHECK_THROWS_AS(make_sequences(ds, F, C), PreconditionError);
}
