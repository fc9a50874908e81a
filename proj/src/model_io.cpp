#include <nlohmann/json.hpp>

#include "headglance/classifiers.hpp"
#include "headglance/error.hpp"

namespace headglance {

namespace {

using json = nlohmann::ordered_json;

json labels_json(std::span<const Label> labels) {
    json a = json::array();
    for (auto l : labels) a.push_back(std::string(to_string(l)));
    return a;
}

std::vector<Label> labels_from(const json& a) {
    std::vector<Label> out;
    for (const auto& s : a) out.push_back(parse_glance_region(s.get<std::string>()));
    return out;
}

json to_json(const KnnModel& m) {
    json j;
    j["kind"] = "knn";
    j["params"] = {{"k", m.params().k}};
    json xs = json::array();
    for (const auto& x : m.train().x) xs.push_back({x[0], x[1], x[2]});
    j["train_x"] = std::move(xs);
    j["train_y"] = labels_json(m.train().y);
    return j;
}

json to_json(const ForestModel& m) {
    json j;
    j["kind"] = "forest";
    j["seed"] = m.seed;
    j["params"] = {{"tree_count", m.params.tree_count},
                   {"max_depth", m.params.max_depth},
                   {"min_leaf", m.params.min_leaf},
                   {"features_per_split", m.params.features_per_split},
                   {"bootstrap", m.params.bootstrap}};
    j["classes"] = labels_json(m.classes);
    json trees = json::array();
    for (const auto& t : m.trees) {
        json nodes = json::array();
        for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.leaf_class, n.count});
        trees.push_back(std::move(nodes));
    }
    j["trees"] = std::move(trees);
    return j;
}

json to_json(const MlpModel& m) {
    json j;
    j["kind"] = "mlp";
    j["seed"] = m.seed;
    j["params"] = {{"hidden", m.params.hidden},
                   {"batch_size", m.params.batch_size},
                   {"learning_rate", m.params.learning_rate},
                   {"epochs", m.params.epochs},
                   {"init_range", m.params.init_range}};
    j["classes"] = labels_json(m.classes);
    j["w1"] = m.w1;
    j["b1"] = m.b1;
    j["w2"] = m.w2;
    j["b2"] = m.b2;
    j["loss_trace"] = m.loss_trace;
    return j;
}

json to_json(const HmmClassifier& c) {
    json j;
    j["kind"] = "hmm";
    j["seed"] = c.seed;
    j["params"] = {{"states", c.params.states},
                   {"max_iterations", c.params.max_iterations},
                   {"tolerance", c.params.tolerance},
                   {"variance_floor", c.params.variance_floor},
                   {"max_reinitialisations", c.params.max_reinitialisations},
                   {"max_block_length", c.params.max_block_length}};
    json models = json::array();
    for (const auto& m : c.models) {
        json mj;
        mj["label"] = std::string(to_string(m.label));
        mj["initial"] = m.initial;
        mj["transition"] = m.transition;
        mj["means"] = m.means;
        mj["variances"] = m.variances;
        models.push_back(std::move(mj));
    }
    j["models"] = std::move(models);
    return j;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
    json j = std::visit([](const auto& m) { return to_json(m); }, model);
    json out;
    out["version"] = kModelFormatVersion;
    for (auto& [k, v] : j.items()) out[k] = v;
    return out.dump(2) + "\n";
}

TrainedModel model_from_json(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("version").get<int>() != kModelFormatVersion) {
            throw DataError("model JSON version " + std::to_string(j.at("version").get<int>()) + " is not supported");
        }
        const auto kind = j.at("kind").get<std::string>();
        const auto& p = j.at("params");
        if (kind == "knn") {
            LabeledSet train;
            for (const auto& x : j.at("train_x")) train.x.push_back({x[0].get<double>(), x[1].get<double>(), x[2].get<double>()});
            train.y = labels_from(j.at("train_y"));
            return KnnModel(std::move(train), KnnParams{p.at("k").get<int>()});
        }
        if (kind == "forest") {
            ForestModel m;
            m.seed = j.at("seed").get<std::uint64_t>();
            m.params = {p.at("tree_count").get<int>(), p.at("max_depth").get<int>(), p.at("min_leaf").get<int>(),
                        p.at("features_per_split").get<int>(), p.at("bootstrap").get<bool>()};
            m.classes = labels_from(j.at("classes"));
            for (const auto& tj : j.at("trees")) {
                DecisionTree t;
                for (const auto& n : tj) {
                    t.nodes.push_back({n[0].get<int>(), n[1].get<double>(), n[2].get<std::int32_t>(),
                                       n[3].get<std::int32_t>(), n[4].get<std::uint32_t>(), n[5].get<std::uint32_t>()});
                }
                m.trees.push_back(std::move(t));
            }
            return m;
        }
        if (kind == "mlp") {
            MlpModel m;
            m.seed = j.at("seed").get<std::uint64_t>();
            m.params = {p.at("hidden").get<int>(), p.at("batch_size").get<int>(), p.at("learning_rate").get<double>(),
                        p.at("epochs").get<int>(), p.at("init_range").get<double>()};
            const auto cls = labels_from(j.at("classes"));
            if (cls.size() != 2) throw DataError("MLP model must list exactly 2 classes");
            m.classes = {cls[0], cls[1]};
            m.w1 = j.at("w1").get<std::vector<double>>();
            m.b1 = j.at("b1").get<std::vector<double>>();
            m.w2 = j.at("w2").get<std::vector<double>>();
            m.b2 = j.at("b2").get<std::vector<double>>();
            m.loss_trace = j.at("loss_trace").get<std::vector<double>>();
            const auto h = static_cast<std::size_t>(m.params.hidden);
            if (m.w1.size() != 3 * h || m.b1.size() != h || m.w2.size() != 2 * h || m.b2.size() != 2) {
                throw DataError("MLP weight shapes do not match the hidden size");
            }
            return m;
        }
        if (kind == "hmm") {
            HmmClassifier c;
            c.seed = j.at("seed").get<std::uint64_t>();
            c.params = {p.at("states").get<int>(), p.at("max_iterations").get<int>(), p.at("tolerance").get<double>(),
                        p.at("variance_floor").get<double>(), p.at("max_reinitialisations").get<int>(),
                        p.value("max_block_length", HmmParams{}.max_block_length)};
            for (const auto& mj : j.at("models")) {
                HmmModel m;
                m.label = parse_glance_region(mj.at("label").get<std::string>());
                m.initial = mj.at("initial").get<std::vector<double>>();
                m.transition = mj.at("transition").get<std::vector<std::vector<double>>>();
                m.means = mj.at("means").get<std::vector<FeatureVector>>();
                m.variances = mj.at("variances").get<std::vector<FeatureVector>>();
                c.models.push_back(std::move(m));
            }
            return c;
        }
        throw DataError("unknown model kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("model JSON invalid: ") + e.what());
    }
}

}  // namespace headglance
