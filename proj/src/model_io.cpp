#include "vulnscreen/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vulnscreen/errors.hpp"

namespace vulnscreen {

namespace {

using nlohmann::json;

json vec_to_json(const Vec& v) {
    json out = json::array();
    for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

Vec vec_from_json(const json& j) {
    Vec out(static_cast<Index>(j.size()));
    Index i = 0;
    for (const auto& x : j) out(i++) = x.get<Scalar>();
    return out;
}

json mat_to_json(const Mat& m) {
    json out = json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        out.push_back(std::move(row));
    }
    return out;
}

Mat mat_from_json(const json& j) {
    const auto rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    Mat out(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index jj = 0; jj < cols; ++jj)
            out(i, jj) = j[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)].get<Scalar>();
    return out;
}

json tree_to_json(const Tree& tree) {
    // preorder node list
    json nodes = json::array();
    for (const TreeNode& n : tree.nodes) {
        nodes.push_back({{"feature", n.feature},
                         {"threshold", n.threshold},
                         {"left", n.left},
                         {"right", n.right},
                         {"leaf_score", n.leaf_score},
                         {"impurity_decrease", n.impurity_decrease}});
    }
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree tree;
    tree.nodes.reserve(j.size());
    for (const auto& jn : j) {
        TreeNode n;
        n.feature = jn.at("feature").get<int>();
        n.threshold = jn.at("threshold").get<Scalar>();
        n.left = jn.at("left").get<int>();
        n.right = jn.at("right").get<int>();
        n.leaf_score = jn.at("leaf_score").get<Scalar>();
        n.impurity_decrease = jn.at("impurity_decrease").get<Scalar>();
        tree.nodes.push_back(n);
    }
    return tree;
}

json config_to_json(const TrainConfig& c) {
    return {{"kind", to_string(c.kind)},
            {"seed", c.seed},
            {"standardize", c.standardize},
            {"logit_learning_rate", c.logit_learning_rate},
            {"logit_l2", c.logit_l2},
            {"logit_max_iters", c.logit_max_iters},
            {"logit_grad_tol", c.logit_grad_tol},
            {"svm_l2", c.svm_l2},
            {"svm_epochs", c.svm_epochs},
            {"knn_k", c.knn_k},
            {"tree_max_depth", c.tree_max_depth},
            {"tree_min_samples_leaf", c.tree_min_samples_leaf},
            {"tree_min_impurity_decrease", c.tree_min_impurity_decrease},
            {"forest_trees", c.forest_trees},
            {"forest_mtry", c.forest_mtry},
            {"forest_bootstrap", c.forest_bootstrap}};
}

TrainConfig config_from_json(const json& j) {
    TrainConfig c;
    c.kind = model_kind_from_string(j.at("kind").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.standardize = j.at("standardize").get<bool>();
    c.logit_learning_rate = j.at("logit_learning_rate").get<Scalar>();
    c.logit_l2 = j.at("logit_l2").get<Scalar>();
    c.logit_max_iters = j.at("logit_max_iters").get<int>();
    c.logit_grad_tol = j.at("logit_grad_tol").get<Scalar>();
    c.svm_l2 = j.at("svm_l2").get<Scalar>();
    c.svm_epochs = j.at("svm_epochs").get<int>();
    c.knn_k = j.at("knn_k").get<int>();
    c.tree_max_depth = j.at("tree_max_depth").get<int>();
    c.tree_min_samples_leaf = j.at("tree_min_samples_leaf").get<int>();
    c.tree_min_impurity_decrease = j.at("tree_min_impurity_decrease").get<Scalar>();
    c.forest_trees = j.at("forest_trees").get<int>();
    c.forest_mtry = j.at("forest_mtry").get<int>();
    c.forest_bootstrap = j.at("forest_bootstrap").get<bool>();
    return c;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    json doc;
    doc["model_version"] = 1;
    doc["kind"] = to_string(model.kind);
    doc["feature_ids"] = model.feature_ids;
    doc["schema_fingerprint"] = model.schema_fingerprint;
    doc["train_config"] = config_to_json(model.config);
    doc["standardization"] = {{"mean", vec_to_json(model.standardize_mean)},
                              {"scale", vec_to_json(model.standardize_scale)}};

    json params;
    switch (model.kind) {
        case ModelKind::LogisticRegression:
        case ModelKind::LinearSvm:
            params["weights"] = vec_to_json(model.weights);
            params["bias"] = model.bias;
            break;
        case ModelKind::GaussianNb:
            params["class_log_prior"] = vec_to_json(model.class_log_prior);
            params["mean"] = mat_to_json(model.nb_mean);
            params["var"] = mat_to_json(model.nb_var);
            break;
        case ModelKind::Knn: {
            params["train"] = mat_to_json(model.knn_train);
            json labels = json::array();
            for (Index i = 0; i < model.knn_labels.size(); ++i) labels.push_back(model.knn_labels(i));
            params["labels"] = std::move(labels);
            break;
        }
        case ModelKind::DecisionTree:
        case ModelKind::RandomForest: {
            json trees = json::array();
            for (const Tree& t : model.trees) trees.push_back(tree_to_json(t));
            params["trees"] = std::move(trees);
            break;
        }
    }
    doc["parameters"] = std::move(params);
    return doc.dump(2) + "\n";
}

TrainedModel deserialize_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
    try {
        if (doc.at("model_version").get<int>() != 1)
            throw ParseError("model: unsupported model_version");

        TrainedModel model;
        model.kind = model_kind_from_string(doc.at("kind").get<std::string>());
        model.feature_ids = doc.at("feature_ids").get<std::vector<std::string>>();
        model.schema_fingerprint = doc.at("schema_fingerprint").get<std::string>();
        model.config = config_from_json(doc.at("train_config"));
        model.standardize_mean = vec_from_json(doc.at("standardization").at("mean"));
        model.standardize_scale = vec_from_json(doc.at("standardization").at("scale"));

        const json& params = doc.at("parameters");
        switch (model.kind) {
            case ModelKind::LogisticRegression:
            case ModelKind::LinearSvm:
                model.weights = vec_from_json(params.at("weights"));
                model.bias = params.at("bias").get<Scalar>();
                break;
            case ModelKind::GaussianNb:
                model.class_log_prior = vec_from_json(params.at("class_log_prior"));
                model.nb_mean = mat_from_json(params.at("mean"));
                model.nb_var = mat_from_json(params.at("var"));
                break;
            case ModelKind::Knn: {
                model.knn_train = mat_from_json(params.at("train"));
                const json& labels = params.at("labels");
                model.knn_labels.resize(static_cast<Index>(labels.size()));
                Index i = 0;
                for (const auto& v : labels) model.knn_labels(i++) = v.get<int>();
                break;
            }
            case ModelKind::DecisionTree:
            case ModelKind::RandomForest:
                for (const auto& jt : params.at("trees")) model.trees.push_back(tree_from_json(jt));
                break;
        }
        return model;
    } catch (const json::exception& e) {
        throw ParseError(std::string("model: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open model file for writing: " + path);
    out << serialize_model(model);
}

TrainedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

}  // namespace vulnscreen
