#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "headglance/config.hpp"
#include "headglance/dataset_io.hpp"
#include "headglance/differences.hpp"
#include "headglance/error.hpp"
#include "headglance/experiment.hpp"
#include "headglance/metrics.hpp"
#include "headglance/pca.hpp"
#include "headglance/pose.hpp"
#include "headglance/synth.hpp"

namespace py = pybind11;
using namespace headglance;

namespace {

py::dict metrics_dict(const MetricTriple& m) { return py::dict(py::arg("ac") = m.ac, py::arg("fs") = m.fs, py::arg("kp") = m.kp); }

py::dict report_dict(const EvaluationReport& r) {
    py::list iterations;
    for (const auto& it : r.iterations) {
        py::dict d;
        d["iteration"] = it.iteration;
        d["skipped"] = it.skipped;
        d["skip_reason"] = it.skip_reason;
        d["metrics"] = metrics_dict(it.metrics);
        d["confusion"] = py::dict(py::arg("tp") = it.confusion.tp, py::arg("fp") = it.confusion.fp,
                                  py::arg("fn") = it.confusion.fn, py::arg("tn") = it.confusion.tn);
        iterations.append(d);
    }
    py::dict out;
    out["classifier"] = r.classifier;
    out["pair"] = r.pair_name();
    out["condition"] = std::string(to_string(r.condition));
    out["unit"] = r.unit;
    out["mean"] = metrics_dict(r.mean);
    out["skipped"] = r.skipped;
    out["audit_ok"] = r.audit.all();
    out["iterations"] = iterations;
    return out;
}

std::array<Point2, kLandmarkCount> to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2 || a.shape(0) != static_cast<py::ssize_t>(kLandmarkCount) || a.shape(1) != 2) {
        throw py::value_error("expected a (7, 2) array of landmark pixel coordinates");
    }
    std::array<Point2, kLandmarkCount> p{};
    auto r = a.unchecked<2>();
    for (std::size_t i = 0; i < kLandmarkCount; ++i) p[i] = {r(static_cast<py::ssize_t>(i), 0), r(static_cast<py::ssize_t>(i), 1)};
    return p;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Head-pose glance classification core";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

    m.attr("GLANCE_REGIONS") = std::vector<std::string>(kGlanceRegionNames.begin(), kGlanceRegionNames.end());
    m.attr("TASKS") = std::vector<std::string>(kTaskKindNames.begin(), kTaskKindNames.end());

    py::class_<Dataset>(m, "Dataset")
        .def("__len__", &Dataset::size)
        .def_property_readonly("subjects", &Dataset::subjects)
        .def_property_readonly("provenance", &Dataset::provenance)
        .def("count", [](const Dataset& d, const std::string& region) { return d.count(parse_glance_region(region)); })
        .def("rotations",
             [](const Dataset& d) {
                 py::array_t<double> out({static_cast<py::ssize_t>(d.size()), py::ssize_t{3}});
                 auto w = out.mutable_unchecked<2>();
                 for (std::size_t i = 0; i < d.size(); ++i) {
                     const auto k = static_cast<py::ssize_t>(i);
                     w(k, 0) = d[i].rot_x;
                     w(k, 1) = d[i].rot_y;
                     w(k, 2) = d[i].rot_z;
                 }
                 return out;
             },
             "(n, 3) array of rot_x, rot_y, rot_z in degrees")
        .def("labels",
             [](const Dataset& d) {
                 std::vector<std::string> out;
                 for (const auto& s : d.samples()) out.emplace_back(to_string(s.glance));
                 return out;
             })
        .def("subject_ids",
             [](const Dataset& d) {
                 std::vector<std::string> out;
                 for (const auto& s : d.samples()) out.push_back(s.subject_id);
                 return out;
             })
        .def("task_ids",
             [](const Dataset& d) {
                 std::vector<std::string> out;
                 for (const auto& s : d.samples()) out.push_back(s.task_id);
                 return out;
             })
        .def("save", [](const Dataset& d, const std::filesystem::path& p) {
            save_dataset(p, d, p.extension() == ".json" ? DataFormat::Json : DataFormat::Csv);
        });

    m.def("load_dataset", py::overload_cast<const std::filesystem::path&>(&load_dataset), py::arg("path"));
    m.def(
        "generate_dataset",
        [](const std::string& profile, int n_subjects, std::uint64_t seed) {
            return generate(default_scenario(parse_driver_profile(profile), n_subjects, seed));
        },
        py::arg("profile") = "mixed", py::arg("n_subjects") = 22, py::arg("seed") = 0,
        "Synthetic dataset from the default scenario");
    m.def(
        "generate_from_scenario", [](const std::string& json_text) { return generate(scenario_from_json(json_text)); },
        py::arg("scenario_json"));
    m.def(
        "default_scenario_json",
        [](const std::string& profile, int n_subjects, std::uint64_t seed) {
            return scenario_to_json(default_scenario(parse_driver_profile(profile), n_subjects, seed));
        },
        py::arg("profile") = "mixed", py::arg("n_subjects") = 22, py::arg("seed") = 0);

    m.def(
        "run_experiment",
        [](const Dataset& ds, const std::string& reference, const std::string& target, const std::string& classifier,
           const std::string& condition, int iterations, double train_fraction, std::uint64_t seed, int jobs,
           const std::string& balance_scope) {
            SplitPlan plan{iterations, train_fraction, seed};
            ExperimentOptions opt;
            opt.jobs = jobs;
            opt.balance_scope = parse_balance_scope(balance_scope);
            EvaluationReport r;
            {
                py::gil_scoped_release release;
                r = run_experiment(ds, parse_glance_region(reference), parse_glance_region(target),
                                   parse_classifier_kind(classifier), parse_condition(condition), plan, opt);
            }
            return report_dict(r);
        },
        py::arg("dataset"), py::arg("reference") = "forward", py::arg("target") = "center-stack",
        py::arg("classifier") = "knn", py::arg("condition") = "balanced", py::arg("iterations") = 50,
        py::arg("train_fraction") = 0.8, py::arg("seed") = 0, py::arg("jobs") = 1,
        py::arg("balance_scope") = "train_and_test");

    m.def(
        "metrics",
        [](std::uint64_t tp, std::uint64_t fp, std::uint64_t fn, std::uint64_t tn) {
            return metrics_dict(evaluate(ConfusionCounts{tp, fp, fn, tn}));
        },
        py::arg("tp"), py::arg("fp"), py::arg("fn"), py::arg("tn"), "Accuracy, F1 and Cohen's kappa");

    m.def(
        "fit_pca",
        [](const Dataset& ds) {
            const auto model = fit_pca(ds);
            py::dict d;
            d["components"] = model.components;
            d["eigenvalues"] = model.eigenvalues;
            d["explained_variance_ratio"] = model.explained_variance_ratio();
            d["mean"] = model.mean;
            return d;
        },
        py::arg("dataset"));

    m.def(
        "estimate_pose",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points) {
            const auto fit = fit_pose(to_points(points), ReferenceFace::standard());
            py::dict d;
            d["rot_x"] = fit.rotation.rot_x;
            d["rot_y"] = fit.rotation.rot_y;
            d["rot_z"] = fit.rotation.rot_z;
            d["scale"] = fit.scale;
            d["rms_residual_px"] = fit.rms_residual_px;
            return d;
        },
        py::arg("points"), "Head rotation (degrees) from 7 landmark pixel positions");
    m.def(
        "project_face",
        [](double rot_x, double rot_y, double rot_z, double scale, double tx, double ty) {
            const auto pts = project_face(ReferenceFace::standard(), {rot_x, rot_y, rot_z}, scale, {tx, ty});
            py::array_t<double> out({py::ssize_t{7}, py::ssize_t{2}});
            auto w = out.mutable_unchecked<2>();
            for (std::size_t i = 0; i < pts.size(); ++i) {
                w(static_cast<py::ssize_t>(i), 0) = pts[i].x;
                w(static_cast<py::ssize_t>(i), 1) = pts[i].y;
            }
            return out;
        },
        py::arg("rot_x"), py::arg("rot_y"), py::arg("rot_z"), py::arg("scale") = 100.0, py::arg("tx") = 320.0,
        py::arg("ty") = 240.0);

    m.def(
        "profile_subjects",
        [](const Dataset& ds, const std::string& task, const std::string& target) {
            const auto set = profile_subjects(ds, task, parse_glance_region(target));
            py::list rows;
            for (const auto& p : set.profiles) {
                py::dict d;
                d["subject_id"] = p.subject_id;
                d["y_range"] = p.y_range;
                d["y_mean_diff"] = p.y_mean_diff;
                d["target_count"] = p.target_count;
                d["forward_count"] = p.forward_count;
                d["mover_type"] = std::string(to_string(p.mover));
                rows.append(d);
            }
            const auto c = correlate_profiles(set.profiles);
            py::dict out;
            out["profiles"] = rows;
            out["pearson_r"] = c.r;
            out["p_value"] = c.p_value;
            out["n"] = c.n;
            return out;
        },
        py::arg("dataset"), py::arg("task") = "radio-on-off", py::arg("target") = "center-stack");

    m.def(
        "validate_experiment_config",
        [](const std::string& text) {
            const auto cfg = parse_experiment_config(text);
            return cfg.pairs.size() * cfg.classifiers.size() * cfg.conditions.size();
        },
        py::arg("config_json"), "Validates a config; returns the number of experiments it describes");
}
