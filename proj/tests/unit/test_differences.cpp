#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "headglance/differences.hpp"
#include "headglance/error.hpp"
#include "headglance/synth.hpp"

using namespace headglance;

namespace {

constexpr auto F = GlanceRegion::Forward;
constexpr auto C = GlanceRegion::CenterStack;

void add_subject(std::vector<RotationSample>& out, const std::string& id, const std::vector<double>& forward_y,
                 const std::vector<double>& target_y, const std::string& task = "radio-on-off") {
    std::int64_t t = 0;
    for (double y : forward_y) out.push_back({id, task, t++ * 67, 0.0, y, 0.0, F});
    for (double y : target_y) out.push_back({id, task, t++ * 67, -5.0, y, 0.0, C});
}

}  // namespace

TEST_CASE("type-7 percentile") {
    CHECK(percentile({1, 2, 3, 4}, 25) == doctest::Approx(1.75));
    CHECK(percentile({4, 1, 3, 2}, 50) == doctest::Approx(2.5));
    CHECK(percentile({5}, 95) == 5.0);
    CHECK(percentile({1, 9}, 0) == 1.0);
    CHECK(percentile({1, 9}, 100) == 9.0);
    CHECK_THROWS_AS(percentile({}, 50), PreconditionError);
}

TEST_CASE("a narrow, near-forward subject is a lizard") {
    std::vector<RotationSample> s;
    std::vector<double> target(10, 1.05);
    target.push_back(-1.95);
    target.push_back(4.05);
    add_subject(s, "s244", std::vector<double>(12, 0.0), target);
    ProfileOptions opt;
    opt.range_mode = RangeMode::MinMax;
    const auto set = profile_subjects(Dataset(s), "radio-on-off", C, opt);
    REQUIRE(set.profiles.size() == 1);
    const auto& p = set.profiles[0];
    CHECK(p.y_range == doctest::Approx(6.0));
    CHECK(p.y_mean_diff == doctest::Approx(1.05));
    CHECK(p.target_count == 12);
    CHECK(p.forward_count == 12);
    CHECK(p.mover == MoverType::Lizard);
}

TEST_CASE("mover rule needs both statistics on the same side and enough samples") {
    SubjectProfile p{"x", 20.0, 30.0, 50, 50, MoverType::Unassigned};
    CHECK(classify_mover(p) == MoverType::Owl);
    p.y_mean_diff = 2.0;
    CHECK(classify_mover(p) == MoverType::Unassigned);
    p.y_range = 3.0;
    CHECK(classify_mover(p) == MoverType::Lizard);
    p.target_count = 9;
    CHECK(classify_mover(p) == MoverType::Unassigned);
}

TEST_CASE("subjects without target or forward glances are counted and excluded") {
    std::vector<RotationSample> s;
    add_subject(s, "a", {0, 1, 2}, {5, 6, 7});
    add_subject(s, "b", {0, 1, 2}, {});
    add_subject(s, "c", {}, {5, 6});
    add_subject(s, "d", {0, 0}, {1, 1}, "report-speed");
    const auto set = profile_subjects(Dataset(s), "radio-on-off", C);
    CHECK(set.profiles.size() == 1);
    CHECK(set.excluded_no_target == 1);
    CHECK(set.excluded_no_forward == 1);
    CHECK_THROWS_AS(profile_subjects(Dataset(s), "locate-phone", C), DataError);
    CHECK_THROWS_AS(profile_subjects(Dataset(s), "radio-on-off", GlanceRegion::Passenger), DataError);
}

TEST_CASE("pearson r and p-value against closed forms") {
    const std::vector<double> x{1, 2, 3, 4, 5}, y{2, 4, 5, 4, 5};
    const auto c = pearson(x, y);
    // Sxy = 6, Sxx = 10, Syy = 6.
    CHECK(c.r == doctest::Approx(6.0 / std::sqrt(60.0)).epsilon(1e-12));
    CHECK(c.n == 5);

    // n = 4: two-sided Student t with 2 df has p = 1 - |t| / sqrt(2 + t^2).
    const std::vector<double> a{1, 2, 3, 4}, b{1, 3, 2, 5};
    const auto d = pearson(a, b);
    const double t = d.r * std::sqrt(2.0 / (1.0 - d.r * d.r));
    CHECK(d.p_value == doctest::Approx(1.0 - std::abs(t) / std::sqrt(2.0 + t * t)).epsilon(1e-10));

    // n = 3: 1 df (Cauchy), p = 1 - 2 atan|t| / pi.
    const std::vector<double> u{0, 1, 2}, v{0, 2, 1};
    const auto e = pearson(u, v);
    const double t1 = e.r * std::sqrt(1.0 / (1.0 - e.r * e.r));
    CHECK(e.p_value == doctest::Approx(1.0 - 2.0 * std::atan(std::abs(t1)) / std::numbers::pi).epsilon(1e-10));
    CHECK(e.p_flag == "n.s.");

    std::vector<double> big_x, big_y;
    for (int i = 0; i < 40; ++i) {
        big_x.push_back(i);
        big_y.push_back(i + ((i * 7) % 5));
    }
    const auto f = pearson(big_x, big_y);
    CHECK(f.p_value < 0.001);
    CHECK(f.p_flag == "p<.001");

    CHECK(std::abs(pearson(x, std::vector<double>{5, 4, 3, 2, 1}).r + 1.0) < 1e-12);
    CHECK_THROWS_AS(pearson(u, x), PreconditionError);
    CHECK_THROWS_AS(pearson(std::vector<double>{1, 2}, std::vector<double>{1, 2}), PreconditionError);
    CHECK_THROWS_AS(pearson(x, std::vector<double>{1, 1, 1, 1, 1}), NumericalError);
}

TEST_CASE("owls and lizards separate in a synthetic population") {
    const auto owl = profile_subjects(generate(default_scenario(DriverProfile::AllOwl, 6, 3)), "radio-on-off", C);
    const auto lizard = profile_subjects(generate(default_scenario(DriverProfile::AllLizard, 6, 3)), "radio-on-off", C);
    double owl_diff = 0, lizard_diff = 0;
    for (const auto& p : owl.profiles) owl_diff += p.y_mean_diff / double(owl.profiles.size());
    for (const auto& p : lizard.profiles) lizard_diff += p.y_mean_diff / double(lizard.profiles.size());
    CHECK(owl_diff > 3.0 * lizard_diff);
}

TEST_CASE("outputs") {
    std::vector<RotationSample> s;
    add_subject(s, "a", {0, 1, 2}, {5, 6, 7});
    add_subject(s, "b", {0, 1, 2}, {9, 15, 12});
    add_subject(s, "c", {1, 1, 2}, {2, 3, 3});
    const Dataset ds(s);
    const auto set = profile_subjects(ds, "radio-on-off", C);
    std::ostringstream csv, series;
    write_profiles_csv(csv, set);
    const auto table = csv.str();
    CHECK(std::count(table.begin(), table.end(), '\n') == 4);
    const auto js = correlation_json(correlate_profiles(set.profiles), set);
    CHECK(js.find("\"n\"") != std::string::npos);
    write_subject_series_csv(series, ds, "b", "radio-on-off");
    const auto rows = series.str();
    CHECK(std::count(rows.begin(), rows.end(), '\n') == 7);
}
