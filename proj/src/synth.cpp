#include "headglance/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "headglance/error.hpp"
#include "headglance/rng.hpp"

namespace headglance {

namespace {

constexpr double kRowTolerance = 1e-9;
constexpr double kShareTolerance = 0.02;

// Default geometry, degrees. Plausible in-cab values, not measurements.
constexpr std::array<std::pair<GlanceRegion, Eccentricity>, 5> kDefaultLayout{{
    {GlanceRegion::Forward, {0.0, 0.0}},
    {GlanceRegion::LeftWindowMirror, {-40.0, 0.0}},
    {GlanceRegion::RightWindowMirror, {55.0, 0.0}},
    {GlanceRegion::InstrumentCluster, {0.0, -15.0}},
    {GlanceRegion::CenterStack, {30.0, -20.0}},
}};

// Exit probabilities from forward, in the order left mirror, right mirror,
// instrument cluster, center stack. Off-road regions always return forward.
using ExitRow = std::array<double, 4>;
constexpr ExitRow kGenericExits{0.20, 0.20, 0.25, 0.35};

struct DefaultTask {
    TaskKind kind;
    int frames;
    ExitRow exits;
};

constexpr std::array<DefaultTask, 5> kDefaultTasks{{
    {TaskKind::ReportSpeed, 216, {0.10, 0.10, 0.60, 0.20}},
    {TaskKind::AdjacentVehicles, 216, {0.35, 0.35, 0.10, 0.20}},
    {TaskKind::RadioOnOff, 720, {0.10, 0.10, 0.10, 0.70}},
    {TaskKind::LocatePhone, 216, {0.10, 0.10, 0.20, 0.60}},
    {TaskKind::PhoneConversation, 216, kGenericExits},
}};

constexpr double kOffRoadDwell = 8.0;  // frames

std::size_t draw(Rng& rng, const std::vector<double>& probs) {
    const double u = uniform01(rng);
    double acc = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) return i;
    }
    // Rounding slack: fall back to the last positive entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return 0;
}


void validate_matrix(const TransitionMatrix& t, const RegionLayout& layout, const std::string& where) {
    const std::size_t n = layout.regions.size();
    if (t.size() != n) throw DataError(where + ": transition matrix must be square over the layout");
    for (std::size_t i = 0; i < n; ++i) {
        if (t[i].size() != n) throw DataError(where + ": transition matrix must be square over the layout");
        double s = 0.0;
        for (double p : t[i]) {
            if (!(p >= 0.0)) throw DataError(where + ": transition probabilities must be non-negative");
            s += p;
        }
        if (std::abs(s - 1.0) > kRowTolerance) {
            throw DataError(where + ": transition row '" + std::string(to_string(layout.regions[i])) + "' sums to " +
                            std::to_string(s));
        }
        if (t[i][i] != 0.0) throw DataError(where + ": transition matrix must have a zero diagonal");
    }
}

TransitionMatrix exit_matrix(const RegionLayout& layout, const ExitRow& exits) {
    const std::size_t n = layout.regions.size();
    const std::size_t fwd = layout.index_of(GlanceRegion::Forward);
    TransitionMatrix t(n, std::vector<double>(n, 0.0));
    constexpr std::array<GlanceRegion, 4> order{GlanceRegion::LeftWindowMirror, GlanceRegion::RightWindowMirror,
                                                GlanceRegion::InstrumentCluster, GlanceRegion::CenterStack};
    for (std::size_t k = 0; k < order.size(); ++k) t[fwd][layout.index_of(order[k])] = exits[k];
    for (std::size_t i = 0; i < n; ++i) {
        if (i != fwd) t[i][fwd] = 1.0;
    }
    return t;
}

nlohmann::ordered_json matrix_json(const TransitionMatrix& t, const RegionLayout& layout) {
    nlohmann::ordered_json out = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < layout.regions.size(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (std::size_t k = 0; k < layout.regions.size(); ++k) {
            if (t[i][k] != 0.0) row[std::string(to_string(layout.regions[k]))] = t[i][k];
        }
        out[std::string(to_string(layout.regions[i]))] = std::move(row);
    }
    return out;
}

TransitionMatrix matrix_from_json(const nlohmann::ordered_json& j, const RegionLayout& layout) {
    const std::size_t n = layout.regions.size();
    TransitionMatrix t(n, std::vector<double>(n, 0.0));
    for (const auto& [from, row] : j.items()) {
        const auto i = layout.index_of(parse_glance_region(from));
        for (const auto& [to, p] : row.items()) t[i][layout.index_of(parse_glance_region(to))] = p.get<double>();
    }
    return t;
}

}  // namespace

std::size_t RegionLayout::index_of(GlanceRegion r) const {
    auto it = std::find(regions.begin(), regions.end(), r);
    if (it == regions.end()) throw DataError("region '" + std::string(to_string(r)) + "' is not in the layout");
    return static_cast<std::size_t>(it - regions.begin());
}

std::vector<double> stationary_distribution(const TransitionMatrix& transition, const DriverSpec& driver) {
    const auto n = static_cast<Eigen::Index>(transition.size());
    // Frame-level chain: stay with 1 - 1/d, otherwise jump along `transition`.
    // Solve pi (P - I) = 0 with sum(pi) = 1 as an overdetermined system.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double leave = 1.0 / driver.dwell_means[static_cast<std::size_t>(i)];
        for (Eigen::Index j = 0; j < n; ++j) {
            const double p = i == j ? 1.0 - leave : leave * transition[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
            a(j, i) += p;
        }
        a(i, i) -= 1.0;
    }
    a.row(n).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;
    const Eigen::VectorXd pi = a.colPivHouseholderQr().solve(rhs);
    return {pi.data(), pi.data() + pi.size()};
}

void ScenarioSpec::validate() const {
    const std::size_t n = layout.regions.size();
    if (n < 2 || layout.eccentricity.size() != n) throw DataError("scenario layout needs >= 2 regions with angles");
    const std::size_t fwd = layout.index_of(GlanceRegion::Forward);
    if (layout.eccentricity[fwd].yaw != 0.0 || layout.eccentricity[fwd].pitch != 0.0) {
        throw DataError("scenario layout: forward must sit at (0, 0)");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(layout.eccentricity[i].yaw) || !std::isfinite(layout.eccentricity[i].pitch)) {
            throw DataError("scenario layout: angles must be finite");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (layout.regions[i] == layout.regions[j]) throw DataError("scenario layout lists a region twice");
        }
    }
    validate_matrix(transition, layout, "scenario");
    if (!(forward_share > 0.0 && forward_share < 1.0)) throw DataError("forward_share must lie in (0, 1)");
    if (frames_per_task < 1) throw DataError("frames_per_task must be >= 1");
    if (!(frame_period_ms >= 1.0)) throw DataError("frame_period_ms must be >= 1");
    if (!(smoothing >= 0.0 && smoothing < 1.0)) throw DataError("smoothing must lie in [0, 1)");
    if (tasks.empty()) throw DataError("scenario needs at least one task");
    for (std::size_t t = 0; t < tasks.size(); ++t) {
        if (tasks[t].id.empty()) throw DataError("task id must not be empty");
        if (tasks[t].frames < 0) throw DataError("task '" + tasks[t].id + "': frames must be >= 0");
        for (std::size_t u = 0; u < t; ++u) {
            if (tasks[u].id == tasks[t].id) throw DataError("task '" + tasks[t].id + "' listed twice");
        }
        if (!tasks[t].transition.empty()) validate_matrix(tasks[t].transition, layout, "task '" + tasks[t].id + "'");
    }
    if (drivers.empty()) throw DataError("scenario needs at least one driver");
    for (std::size_t i = 0; i < drivers.size(); ++i) {
        const auto& d = drivers[i];
        const std::string who = "driver '" + d.subject_id + "'";
        if (d.subject_id.empty()) throw DataError("driver subject_id must not be empty");
        for (std::size_t j = 0; j < i; ++j) {
            if (drivers[j].subject_id == d.subject_id) throw DataError(who + " listed twice");
        }
        if (!(d.head_gain >= 0.0 && d.head_gain <= 1.0)) throw DataError(who + ": head_gain must lie in [0, 1]");
        for (double s : d.noise_sigma) {
            if (!(s > 0.0) || !std::isfinite(s)) throw DataError(who + ": noise sigma must be > 0");
        }
        for (double o : d.resting_offset) {
            if (!std::isfinite(o)) throw DataError(who + ": resting offset must be finite");
        }
        if (d.dwell_means.size() != n) throw DataError(who + ": one dwell mean per layout region required");
        for (double m : d.dwell_means) {
            if (!(m >= 1.0) || !std::isfinite(m)) throw DataError(who + ": dwell means must be >= 1 frame");
        }
        for (const auto& task : tasks) {
            const auto pi = stationary_distribution(transition_for(task), d);
            if (std::abs(pi[fwd] - forward_share) > kShareTolerance) {
                throw DataError(who + ", task '" + task.id + "': stationary forward probability " +
                                std::to_string(pi[fwd]) + " is not within 0.02 of forward_share " +
                                std::to_string(forward_share));
            }
        }
    }
}

Dataset generate(const ScenarioSpec& spec) {
    spec.validate();
    const double phi = spec.smoothing;
    const double innovation = std::sqrt(1.0 - phi * phi);

    std::vector<RotationSample> samples;
    for (std::size_t di = 0; di < spec.drivers.size(); ++di) {
        const auto& d = spec.drivers[di];
        for (std::size_t ti = 0; ti < spec.tasks.size(); ++ti) {
            const auto& task = spec.tasks[ti];
            const auto& trans = spec.transition_for(task);
            const auto pi = stationary_distribution(trans, d);
            auto rng = make_rng(spec.seed, "synth-stream", di * 1000003ULL + ti);
            std::size_t region = draw(rng, pi);
            // Stationary start for the AR(1) noise as well.
            std::array<double, 3> noise{};
            for (std::size_t k = 0; k < 3; ++k) noise[k] = d.noise_sigma[k] * standard_normal(rng);
            const int frames = spec.frames_for(task);
            for (int f = 0; f < frames; ++f) {
                if (f > 0) {
                    if (uniform01(rng) < 1.0 / d.dwell_means[region]) region = draw(rng, trans[region]);
                    for (std::size_t k = 0; k < 3; ++k) {
                        noise[k] = phi * noise[k] + innovation * d.noise_sigma[k] * standard_normal(rng);
                    }
                }
                const auto& ecc = spec.layout.eccentricity[region];
                RotationSample s;
                s.subject_id = d.subject_id;
                s.task_id = task.id;
                s.timestamp_ms = std::llround(static_cast<double>(f) * spec.frame_period_ms);
                s.rot_x = d.resting_offset[0] + d.head_gain * ecc.pitch + noise[0];
                s.rot_y = d.resting_offset[1] + d.head_gain * ecc.yaw + noise[1];
                s.rot_z = d.resting_offset[2] + noise[2];
                s.glance = spec.layout.regions[region];
                samples.push_back(std::move(s));
            }
        }
    }
    return Dataset(std::move(samples), "synthetic:seed=" + std::to_string(spec.seed));
}

std::string_view to_string(DriverProfile p) {
    switch (p) {
        case DriverProfile::Mixed: return "mixed";
        case DriverProfile::AllOwl: return "all_owl";
        case DriverProfile::AllLizard: return "all_lizard";
    }
    return "mixed";
}

DriverProfile parse_driver_profile(std::string_view s) {
    if (s == "mixed") return DriverProfile::Mixed;
    if (s == "all_owl") return DriverProfile::AllOwl;
    if (s == "all_lizard") return DriverProfile::AllLizard;
    throw DataError("unknown driver profile '" + std::string(s) + "' (expected mixed, all_owl or all_lizard)");
}

ScenarioSpec default_scenario(DriverProfile profile, int n_subjects, std::uint64_t seed) {
    if (n_subjects < 2) throw PreconditionError("default_scenario: need at least 2 subjects");
    ScenarioSpec spec;
    spec.seed = seed;
    for (const auto& [r, e] : kDefaultLayout) {
        spec.layout.regions.push_back(r);
        spec.layout.eccentricity.push_back(e);
    }
    const std::size_t n = spec.layout.regions.size();
    const std::size_t fwd = spec.layout.index_of(GlanceRegion::Forward);
    spec.transition = exit_matrix(spec.layout, kGenericExits);
    for (const auto& t : kDefaultTasks) {
        spec.tasks.push_back({std::string(to_string(t.kind)), t.frames, exit_matrix(spec.layout, t.exits)});
    }

    // Equal off-road dwell makes the forward share independent of the exit
    // row; forward dwell is set so it hits the target exactly.
    std::vector<double> dwell(n, kOffRoadDwell);
    dwell[fwd] = spec.forward_share / (1.0 - spec.forward_share) * kOffRoadDwell;

    const auto [g_lo, g_hi] = profile == DriverProfile::AllOwl     ? std::pair{0.70, 0.95}
                              : profile == DriverProfile::AllLizard ? std::pair{0.05, 0.30}
                                                                    : std::pair{0.05, 0.95};
    auto rng = make_rng(seed, "default-scenario");
    for (int i = 0; i < n_subjects; ++i) {
        DriverSpec d;
        d.subject_id = "s" + std::to_string(201 + i);
        d.head_gain = g_lo + (g_hi - g_lo) * uniform01(rng);
        // Active head movers also show wider head-motion variability.
        d.noise_sigma = {0.7 + 1.5 * d.head_gain, 0.7 + 3.0 * d.head_gain, 0.7};
        d.dwell_means = dwell;
        // Resting pitch varies more between drivers than resting yaw.
        d.resting_offset = {4.0 * standard_normal(rng), 1.5 * standard_normal(rng), 2.0 * standard_normal(rng)};
        spec.drivers.push_back(std::move(d));
    }
    return spec;
}

std::string scenario_to_json(const ScenarioSpec& spec) {
    using json = nlohmann::ordered_json;
    json j;
    j["seed"] = spec.seed;
    j["forward_share"] = spec.forward_share;
    j["frames_per_task"] = spec.frames_per_task;
    j["frame_period_ms"] = spec.frame_period_ms;
    j["smoothing"] = spec.smoothing;
    json layout = json::object();
    for (std::size_t i = 0; i < spec.layout.regions.size(); ++i) {
        layout[std::string(to_string(spec.layout.regions[i]))] = {spec.layout.eccentricity[i].yaw,
                                                                   spec.layout.eccentricity[i].pitch};
    }
    j["layout"] = std::move(layout);
    j["transition"] = matrix_json(spec.transition, spec.layout);
    json tasks = json::array();
    for (const auto& t : spec.tasks) {
        json tj;
        tj["id"] = t.id;
        if (t.frames > 0) tj["frames"] = t.frames;
        if (!t.transition.empty()) tj["transition"] = matrix_json(t.transition, spec.layout);
        tasks.push_back(std::move(tj));
    }
    j["tasks"] = std::move(tasks);
    json drivers = json::array();
    for (const auto& d : spec.drivers) {
        json dj;
        dj["subject_id"] = d.subject_id;
        dj["head_gain"] = d.head_gain;
        dj["noise_sigma"] = {d.noise_sigma[0], d.noise_sigma[1], d.noise_sigma[2]};
        json dwell = json::object();
        for (std::size_t i = 0; i < spec.layout.regions.size(); ++i) {
            dwell[std::string(to_string(spec.layout.regions[i]))] = d.dwell_means[i];
        }
        dj["dwell_means"] = std::move(dwell);
        dj["resting_offset"] = {d.resting_offset[0], d.resting_offset[1], d.resting_offset[2]};
        drivers.push_back(std::move(dj));
    }
    j["drivers"] = std::move(drivers);
    return j.dump(2) + "\n";
}

ScenarioSpec scenario_from_json(std::string_view text) {
    using json = nlohmann::ordered_json;
    try {
        const json j = json::parse(text);
        if (!j.is_object()) throw DataError("scenario JSON must be an object");
        ScenarioSpec spec;
        if (j.contains("profile")) {
            spec = default_scenario(parse_driver_profile(j.at("profile").get<std::string>()),
                                    j.value("n_subjects", 22), j.value("seed", std::uint64_t{0}));
            if (j.contains("frames_per_task")) {
                // Short-form override scales every task to the same length.
                spec.frames_per_task = j.at("frames_per_task").get<int>();
                for (auto& t : spec.tasks) t.frames = 0;
            }
            spec.validate();
            return spec;
        }
        spec.seed = j.at("seed").get<std::uint64_t>();
        spec.forward_share = j.value("forward_share", spec.forward_share);
        spec.frames_per_task = j.value("frames_per_task", spec.frames_per_task);
        spec.frame_period_ms = j.value("frame_period_ms", spec.frame_period_ms);
        spec.smoothing = j.value("smoothing", spec.smoothing);
        for (const auto& [name, angles] : j.at("layout").items()) {
            spec.layout.regions.push_back(parse_glance_region(name));
            spec.layout.eccentricity.push_back({angles.at(0).get<double>(), angles.at(1).get<double>()});
        }
        spec.transition = matrix_from_json(j.at("transition"), spec.layout);
        for (const auto& tj : j.at("tasks")) {
            TaskSpec t;
            if (tj.is_string()) {
                t.id = tj.get<std::string>();
            } else {
                t.id = tj.at("id").get<std::string>();
                t.frames = tj.value("frames", 0);
                if (tj.contains("transition")) t.transition = matrix_from_json(tj.at("transition"), spec.layout);
            }
            spec.tasks.push_back(std::move(t));
        }
        for (const auto& dj : j.at("drivers")) {
            DriverSpec d;
            d.subject_id = dj.at("subject_id").get<std::string>();
            d.head_gain = dj.at("head_gain").get<double>();
            d.noise_sigma = dj.at("noise_sigma").get<std::array<double, 3>>();
            d.resting_offset = dj.value("resting_offset", std::array<double, 3>{});
            d.dwell_means.assign(spec.layout.regions.size(), 0.0);
            for (const auto& [name, m] : dj.at("dwell_means").items()) {
                d.dwell_means[spec.layout.index_of(parse_glance_region(name))] = m.get<double>();
            }
            spec.drivers.push_back(std::move(d));
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("scenario JSON invalid: ") + e.what());
    }
}

}  // namespace headglance
