// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if any fail.
// Usage: acceptance [path-to-cli] [work-dir]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "headglance/classifiers.hpp"
#include "headglance/config.hpp"
#include "headglance/differences.hpp"
#include "headglance/experiment.hpp"
#include "headglance/metrics.hpp"
#include "headglance/pca.hpp"
#include "headglance/pose.hpp"
#include "headglance/rng.hpp"
#include "headglance/synth.hpp"

using namespace headglance;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and limits.
constexpr double kMetricTol = 1e-12;
constexpr double kHmmLogTol = 1e-9;
constexpr double kEmSlack = 1e-9;
constexpr double kGradTol = 1e-4;
constexpr double kOrthoTol = 1e-9;
constexpr double kEigenResidualTol = 1e-8;
constexpr double kRatioSumTol = 1e-9;
constexpr double kPoseTolDeg = 1.0;
constexpr double kKappaLift = 0.1;
constexpr double kRightMirrorFloor = 0.85;
constexpr double kRightMirrorCeil = 0.95;
constexpr double kMinPearson = 0.5;
constexpr double kOwlLizardGap = 0.1;
constexpr double kNormTol = 1e-9;

constexpr int kIterations = 50;
constexpr std::uint64_t kScenarioSeed = 7;
constexpr std::uint64_t kSplitSeed = 11;
constexpr int kSubjects = 22;

constexpr auto F = GlanceRegion::Forward;
constexpr auto CS = GlanceRegion::CenterStack;

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, double limit_s, const std::function<Outcome()>& body) {
    const auto start = Clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    if (secs >= limit_s) {
        o.pass = false;
        o.detail += "; runtime limit exceeded";
    }
    if (!o.pass) ++failures;
    std::printf("criterion %2d: %s  %s  [%.1f s, limit %.0f s]\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs,
                limit_s);
    std::fflush(stdout);
}

std::string fmt(double v, int digits = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

// Shared audit results for criterion 10.
struct AuditLog {
    int runs = 0;
    int failed = 0;
    double max_mean_err = 0.0;
    double max_std_err = 0.0;

    void add(const EvaluationReport& r) {
        ++runs;
        if (!r.audit.all()) ++failed;
        max_mean_err = std::max(max_mean_err, r.audit.max_train_mean_error);
        max_std_err = std::max(max_std_err, r.audit.max_train_std_error);
    }
} audit_log;

EvaluationReport run(const Dataset& ds, GlanceRegion target, ClassifierKind kind, Condition cond) {
    auto r = run_experiment(ds, F, target, kind, cond, {kIterations, 0.8, kSplitSeed});
    audit_log.add(r);
    return r;
}

// ---------------------------------------------------------------------------

Outcome metrics_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> d(0, 200);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        ConfusionCounts c{std::uint64_t(d(rng)), std::uint64_t(d(rng)), std::uint64_t(d(rng)), std::uint64_t(d(rng))};
        if (trial % 10 == 0) c.tp = 0;
        if (c.total() == 0) c.tn = 1;
        std::vector<GlanceRegion> pred, truth;
        auto push = [&](std::uint64_t k, GlanceRegion p, GlanceRegion t) {
            pred.insert(pred.end(), k, p);
            truth.insert(truth.end(), k, t);
        };
        push(c.tp, CS, CS);
        push(c.fp, CS, F);
        push(c.fn, F, CS);
        push(c.tn, F, F);
        // Brute-force recount from the raw lists.
        double agree = 0, tp = 0, fp = 0, fn = 0, pred_pos = 0, true_pos = 0;
        for (std::size_t i = 0; i < pred.size(); ++i) {
            agree += pred[i] == truth[i];
            tp += pred[i] == CS && truth[i] == CS;
            fp += pred[i] == CS && truth[i] != CS;
            fn += pred[i] != CS && truth[i] == CS;
            pred_pos += pred[i] == CS;
            true_pos += truth[i] == CS;
        }
        const double n = double(pred.size());
        const double po = agree / n;
        const double pe = (pred_pos * true_pos + (n - pred_pos) * (n - true_pos)) / (n * n);
        const double kp = pe >= 1.0 ? 0.0 : (po - pe) / (1.0 - pe);
        const double fs = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
        const auto m = evaluate(confusion_from(pred, truth, CS));
        worst = std::max({worst, std::abs(m.ac - po), std::abs(m.fs - fs), std::abs(m.kp - kp)});
    }
    return {worst <= kMetricTol, "1000 tables, max |diff| " + sci(worst)};
}

Outcome hmm_forward() {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> g(0.0, 1.5);
    std::uniform_real_distribution<double> u(0.05, 1.0), var(0.3, 2.0);
    auto simplex = [&](std::size_t n) {
        std::vector<double> v(n);
        double s = 0;
        for (auto& x : v) s += (x = u(rng));
        for (auto& x : v) x /= s;
        return v;
    };
    auto random_model = [&](std::size_t n) {
        HmmModel m;
        m.initial = simplex(n);
        for (std::size_t i = 0; i < n; ++i) {
            m.transition.push_back(simplex(n));
            m.means.push_back({g(rng), g(rng), g(rng)});
            m.variances.push_back({var(rng), var(rng), var(rng)});
        }
        return m;
    };
    double worst = 0.0;
    int toys = 0;
    for (std::size_t n : {2u, 3u}) {
        for (std::size_t len = 1; len <= 5; ++len) {
            for (int rep = 0; rep < 20; ++rep, ++toys) {
                const auto m = random_model(n);
                std::vector<FeatureVector> obs;
                for (std::size_t t = 0; t < len; ++t) obs.push_back({g(rng), g(rng), g(rng)});
                std::size_t paths = 1;
                for (std::size_t t = 0; t < len; ++t) paths *= n;
                double total = 0;
                for (std::size_t code = 0; code < paths; ++code) {
                    std::size_t c = code, prev = 0;
                    double p = 1;
                    for (std::size_t t = 0; t < len; ++t) {
                        const std::size_t s = c % n;
                        c /= n;
                        double e = 1;
                        for (int k = 0; k < 3; ++k) {
                            const double v = m.variances[s][k], d = obs[t][k] - m.means[s][k];
                            e *= std::exp(-d * d / (2 * v)) / std::sqrt(2 * std::numbers::pi * v);
                        }
                        p *= (t == 0 ? m.initial[s] : m.transition[prev][s]) * e;
                        prev = s;
                    }
                    total += p;
                }
                worst = std::max(worst, std::abs(hmm_log_likelihood(m, obs) - std::log(total)));
            }
        }
    }
    int decreases = 0;
    for (int run = 0; run < 100; ++run) {
        auto srng = make_rng(std::uint64_t(run), "acceptance-em");
        std::vector<SampleSequence> seqs(5);
        const double shift = 1.0 + run % 4;
        for (auto& s : seqs) {
            for (int t = 0; t < 12; ++t) {
                const double c = (t / 4) % 2 ? shift : -shift;
                s.observations.push_back({c + standard_normal(srng), standard_normal(srng), 0.5 * standard_normal(srng)});
            }
        }
        HmmParams p;
        p.states = 2 + run % 3;
        p.max_iterations = 40;
        const auto r = hmm_train(seqs, F, p, std::uint64_t(run));
        for (std::size_t i = 1; i < r.log_likelihood_trace.size(); ++i) {
            const double prev = r.log_likelihood_trace[i - 1];
            if (r.log_likelihood_trace[i] < prev - kEmSlack * std::max(1.0, std::abs(prev))) ++decreases;
        }
    }
    return {worst <= kHmmLogTol && decreases == 0,
            std::to_string(toys) + " toys max |dlogL| " + sci(worst) + ", EM decreases " + std::to_string(decreases) +
                "/100 runs"};
}

Outcome mlp_gradient() {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    double worst = 0.0;
    for (int config = 0; config < 10; ++config) {
        MlpParams p;
        p.hidden = 3 + 2 * config;
        p.init_range = 0.2 + 0.15 * config;
        const auto m = mlp_init({F, CS}, p, std::uint64_t(100 + config));
        std::vector<FeatureVector> x;
        std::vector<int> t;
        for (int i = 0; i < 16; ++i) {
            x.push_back({g(rng), g(rng), g(rng)});
            t.push_back(g(rng) > 0 ? 1 : 0);
        }
        std::vector<double> grad;
        mlp_loss(m, x, t, &grad);
        auto params = m.parameters();
        MlpModel probe = m;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double keep = params[i], h = 1e-6;
            params[i] = keep + h;
            probe.set_parameters(params);
            const double up = mlp_loss(probe, x, t);
            params[i] = keep - h;
            probe.set_parameters(params);
            const double down = mlp_loss(probe, x, t);
            params[i] = keep;
            const double num = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(num - grad[i]) / std::max({std::abs(num), std::abs(grad[i]), 1e-7}));
        }
    }
    return {worst < kGradTol, "10 configs, max relative error " + sci(worst)};
}

Outcome pca_identities() {
    const auto ds = generate(default_scenario(DriverProfile::Mixed, 6, kScenarioSeed));
    const auto m = fit_pca(ds);
    const auto cov = covariance(ds);
    double ortho = 0, resid = 0;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double dot = 0;
            for (int k = 0; k < 3; ++k) dot += m.components[i][k] * m.components[j][k];
            ortho = std::max(ortho, std::abs(dot - (i == j)));
        }
        for (int r = 0; r < 3; ++r) {
            double cv = 0;
            for (int k = 0; k < 3; ++k) cv += cov[r][k] * m.components[i][k];
            resid = std::max(resid, std::abs(cv - m.eigenvalues[i] * m.components[i][r]));
        }
    }
    const auto ratio = m.explained_variance_ratio();
    const double sum_err = std::abs(ratio[0] + ratio[1] + ratio[2] - 1.0);

    std::vector<RotationSample> line;
    for (int i = 0; i < 40; ++i) line.push_back({"a", "t", i, 0.0, 0.5 * i - 7.0, 0.0, F});
    const double single = fit_pca(Dataset(line)).explained_variance_ratio()[0];
    const bool ok = ortho <= kOrthoTol && resid < kEigenResidualTol && sum_err <= kRatioSumTol &&
                    std::abs(single - 1.0) <= kRatioSumTol;
    return {ok, "orthonormality " + sci(ortho) + ", residual " + sci(resid) + ", ratio sum err " + sci(sum_err) +
                    ", single-axis PC1 " + fmt(single, 12)};
}

Outcome pose_roundtrip() {
    const auto ref = ReferenceFace::standard();
    double worst = 0.0;
    int n = 0;
    for (int yaw = -45; yaw <= 45; yaw += 5) {
        for (int pitch = -30; pitch <= 30; pitch += 5) {
            for (int roll = -30; roll <= 30; roll += 5, ++n) {
                const HeadRotation truth{double(pitch), double(yaw), double(roll)};
                const auto fit = fit_pose(project_face(ref, truth, 100.0, {320.0, 240.0}), ref);
                worst = std::max({worst, std::abs(fit.rotation.rot_x - truth.rot_x),
                                  std::abs(fit.rotation.rot_y - truth.rot_y), std::abs(fit.rotation.rot_z - truth.rot_z)});
            }
        }
    }
    return {worst < kPoseTolDeg, std::to_string(n) + " poses, max angle error " + sci(worst) + " deg"};
}

Outcome balancing_lift(const Dataset& mixed, std::map<ClassifierKind, EvaluationReport>& balanced_out) {
    Outcome o;
    for (auto kind : {ClassifierKind::Knn, ClassifierKind::Forest, ClassifierKind::Mlp, ClassifierKind::Hmm}) {
        const auto orig = run(mixed, CS, kind, Condition::Original);
        const auto bal = run(mixed, CS, kind, Condition::Balanced);
        balanced_out.emplace(kind, bal);
        const double lift = bal.mean.kp - orig.mean.kp;
        o.pass = o.pass && lift >= kKappaLift;
        if (kind == ClassifierKind::Knn) o.pass = o.pass && orig.mean.ac > bal.mean.ac;
        o.detail += std::string(to_string(kind)) + " KP " + fmt(orig.mean.kp) + "->" + fmt(bal.mean.kp) + " AC " +
                    fmt(orig.mean.ac) + "->" + fmt(bal.mean.ac) + "; ";
    }
    return o;
}

Outcome eccentricity(const Dataset& mixed, const EvaluationReport& forest_cs) {
    const double ic = run(mixed, GlanceRegion::InstrumentCluster, ClassifierKind::Forest, Condition::Balanced).mean.ac;
    const double cs = forest_cs.mean.ac;
    const double rm = run(mixed, GlanceRegion::RightWindowMirror, ClassifierKind::Forest, Condition::Balanced).mean.ac;
    const bool ok = ic < cs && cs < rm && rm >= kRightMirrorFloor && rm <= kRightMirrorCeil;
    return {ok, "RF balanced AC instrument-cluster " + fmt(ic) + " < center-stack " + fmt(cs) + " < right-window-mirror " +
                    fmt(rm)};
}

Outcome owl_lizard(const Dataset& mixed) {
    const auto profiles = profile_subjects(mixed, "radio-on-off", CS);
    const auto corr = correlate_profiles(profiles.profiles);
    const auto owl = generate(default_scenario(DriverProfile::AllOwl, kSubjects, kScenarioSeed));
    const auto lizard = generate(default_scenario(DriverProfile::AllLizard, kSubjects, kScenarioSeed));
    const double a_owl = run(owl, CS, ClassifierKind::Forest, Condition::Balanced).mean.ac;
    const double a_lizard = run(lizard, CS, ClassifierKind::Forest, Condition::Balanced).mean.ac;
    const bool ok = corr.r > kMinPearson && a_owl - a_lizard >= kOwlLizardGap;
    return {ok, "r = " + fmt(corr.r) + " (n = " + std::to_string(corr.n) + ", " + corr.p_flag + "); RF balanced AC owl " +
                    fmt(a_owl) + " vs lizard " + fmt(a_lizard)};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int sh(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

std::vector<fs::path> csv_files(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().extension() == ".csv") out.push_back(fs::relative(e.path(), dir));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// synth -> run -> pca -> diffs, all outputs under `root`.
bool pipeline(const std::string& cli, const fs::path& root, int jobs) {
    fs::remove_all(root);
    fs::create_directories(root);
    const auto config = root / "config.json";
    std::ofstream(config) << R"({
  "dataset": {"file": "synth/dataset.csv"},
  "pairs": [["forward", "center-stack"], ["forward", "right-window-mirror"]],
  "classifiers": ["knn", "forest", "mlp", "hmm"],
  "conditions": ["original", "balanced"],
  "split": {"iterations": 6, "train_fraction": 0.8, "seed": 5},
  "params": {"forest": {"tree_count": 15}, "mlp": {"epochs": 15}, "hmm": {"max_iterations": 25}}
})";
    const std::string q = "'" + cli + "'";
    const std::string r = "'" + root.string() + "'";
    return sh(q + " synth --profile mixed --subjects 8 --seed 3 --out " + r + "/synth") == 0 &&
           sh(q + " run --config " + r + "/config.json --jobs " + std::to_string(jobs) + " --out " + r + "/run") == 0 &&
           sh(q + " pca --dataset " + r + "/synth/dataset.csv --iterations 10 --seed 2 --out " + r + "/pca") == 0 &&
           sh(q + " diffs --dataset " + r + "/synth/dataset.csv --series s201 --out " + r + "/diffs") == 0;
}

Outcome determinism(const std::string& cli, const fs::path& work) {
    if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not available"};
    const auto a = work / "serial", b = work / "parallel";
    if (!pipeline(cli, a, 1)) return {false, "pipeline failed (jobs 1)"};
    if (!pipeline(cli, b, 3)) return {false, "pipeline failed (jobs 3)"};
    const auto files = csv_files(a);
    if (files != csv_files(b) || files.size() < 6) return {false, "output file sets differ"};
    for (const auto& f : files) {
        if (slurp(a / f) != slurp(b / f)) return {false, "differs: " + f.string()};
    }
    return {true, std::to_string(files.size()) + " CSV files byte-identical across reruns with --jobs 1 and 3"};
}

Outcome preprocessing(const Dataset& mixed) {
    // Explicit 50-iteration sweep plus the audits of every experiment above.
    const SplitPlan plan{kIterations, 0.8, kSplitSeed};
    const auto bin = filter_binary(mixed, F, CS);
    int bad_split = 0, bad_norm = 0, bad_balance = 0;
    for (int it = 0; it < plan.iterations; ++it) {
        const auto tt = split_subjects(bin, plan, it);
        for (const auto& s : tt.test.subjects()) {
            if (std::binary_search(tt.train.subjects().begin(), tt.train.subjects().end(), s)) ++bad_split;
        }
        const auto z = apply_normalizer(tt.train, fit_normalizer(tt.train));
        const auto check = fit_normalizer(z);
        for (int k = 0; k < 3; ++k) {
            if (std::abs(check.mean[k]) > kNormTol || std::abs(check.stddev[k] - 1.0) > kNormTol) ++bad_norm;
        }
        const auto b = balance(z, F, CS, std::uint64_t(it));
        if (b.count(F) != b.count(CS)) ++bad_balance;
    }
    const bool ok = bad_split == 0 && bad_norm == 0 && bad_balance == 0 && audit_log.failed == 0 &&
                    audit_log.max_mean_err <= kNormTol && audit_log.max_std_err <= kNormTol;
    return {ok, "50 splits: overlap " + std::to_string(bad_split) + ", norm " + std::to_string(bad_norm) +
                    ", balance " + std::to_string(bad_balance) + "; audited runs " + std::to_string(audit_log.runs) +
                    " failed " + std::to_string(audit_log.failed) + ", max train |mean| " + sci(audit_log.max_mean_err) +
                    ", |std-1| " + sci(audit_log.max_std_err)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::string cli = argc > 1 ? argv[1] : "";
    const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "headglance_acceptance";

    report(1, 1.0, metrics_oracle);
    report(2, 10.0, hmm_forward);
    report(3, 5.0, mlp_gradient);
    report(4, 1.0, pca_identities);
    report(5, 10.0, pose_roundtrip);

    const auto mixed = generate(default_scenario(DriverProfile::Mixed, kSubjects, kScenarioSeed));
    std::map<ClassifierKind, EvaluationReport> balanced;
    report(6, 300.0, [&] { return balancing_lift(mixed, balanced); });
    report(7, 300.0, [&] {
        if (!balanced.count(ClassifierKind::Forest)) return Outcome{false, "criterion 6 runs missing"};
        return eccentricity(mixed, balanced.at(ClassifierKind::Forest));
    });
    report(8, 120.0, [&] { return owl_lizard(mixed); });
    report(9, 300.0, [&] { return determinism(cli, work); });
    report(10, 60.0, [&] { return preprocessing(mixed); });

    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
