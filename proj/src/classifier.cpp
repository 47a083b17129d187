#include "vulnscreen/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "vulnscreen/errors.hpp"

namespace vulnscreen {

namespace {

Scalar sigmoid(Scalar z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const Scalar e = std::exp(z);
    return e / (1.0 + e);
}

void require_both_classes(const Eigen::Ref<const LabelVec>& y, const char* what) {
    const bool has0 = (y.array() == 0).any();
    const bool has1 = (y.array() == 1).any();
    if (!has0 || !has1) throw ValidationError(std::string(what) + ": both classes must be present");
}

// Compares two Gini decreases num/den exactly.
bool decrease_greater(long long num_a, long long den_a, long long num_b, long long den_b) {
    return static_cast<__int128>(num_a) * den_b > static_cast<__int128>(num_b) * den_a;
}

// Recursive CART builder shared by the single tree and the forest. When
// `sampler` is set, each split attempt draws `mtry` candidate features
// without replacement (sorted ascending before the search).
class TreeBuilder {
public:
    TreeBuilder(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                const TrainConfig& config, SplitMix64* sampler, int mtry)
        : X_(X), y_(y), config_(config), sampler_(sampler), mtry_(mtry) {}

    Tree build(std::vector<Index> rows) {
        Tree tree;
        grow(tree, std::move(rows), 0);
        return tree;
    }

private:
    int grow(Tree& tree, std::vector<Index> rows, int depth) {
        const int node_index = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();

        const auto n = static_cast<long long>(rows.size());
        long long positives = 0;
        for (Index r : rows) positives += y_(r);
        const bool pure = positives == 0 || positives == n;

        auto make_leaf = [&] {
            tree.nodes[static_cast<std::size_t>(node_index)].leaf_score =
                static_cast<Scalar>(positives) / static_cast<Scalar>(n);
            return node_index;
        };

        if (pure || depth >= config_.tree_max_depth ||
            n < 2LL * config_.tree_min_samples_leaf)
            return make_leaf();

        const SplitChoice choice =
            best_split(X_, y_, rows, candidate_features(), config_.tree_min_samples_leaf);
        if (!choice.valid || choice.decrease() < config_.tree_min_impurity_decrease)
            return make_leaf();

        std::vector<Index> left_rows, right_rows;
        for (Index r : rows) {
            if (X_(r, choice.feature) <= choice.threshold) left_rows.push_back(r);
            else right_rows.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        {
            TreeNode& node = tree.nodes[static_cast<std::size_t>(node_index)];
            node.feature = choice.feature;
            node.threshold = choice.threshold;
            node.impurity_decrease = choice.decrease();
        }
        const int left = grow(tree, std::move(left_rows), depth + 1);
        const int right = grow(tree, std::move(right_rows), depth + 1);
        tree.nodes[static_cast<std::size_t>(node_index)].left = left;
        tree.nodes[static_cast<std::size_t>(node_index)].right = right;
        return node_index;
    }

    std::vector<int> candidate_features() const {
        const int p = static_cast<int>(X_.cols());
        std::vector<int> features(static_cast<std::size_t>(p));
        std::iota(features.begin(), features.end(), 0);
        if (sampler_ == nullptr || mtry_ >= p) return features;
        // Partial Fisher-Yates: the first mtry entries are a uniform draw
        // without replacement.
        for (int i = 0; i < mtry_; ++i) {
            const auto j =
                i + static_cast<int>(sampler_->next_below(static_cast<std::uint64_t>(p - i)));
            std::swap(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
        }
        features.resize(static_cast<std::size_t>(mtry_));
        std::sort(features.begin(), features.end());
        return features;
    }

    const Eigen::Ref<const Mat> X_;
    const Eigen::Ref<const LabelVec> y_;
    const TrainConfig& config_;
    SplitMix64* sampler_;
    int mtry_;
};

}  // namespace

const char* to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::LogisticRegression: return "logistic_regression";
        case ModelKind::DecisionTree: return "decision_tree";
        case ModelKind::RandomForest: return "random_forest";
        case ModelKind::Knn: return "knn";
        case ModelKind::LinearSvm: return "linear_svm";
        case ModelKind::GaussianNb: return "gaussian_nb";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    for (ModelKind kind : kAllModelKinds)
        if (s == to_string(kind)) return kind;
    throw ParseError("unknown model kind: '" + s + "'");
}

int kind_order(ModelKind kind) {
    for (std::size_t i = 0; i < kAllModelKinds.size(); ++i)
        if (kAllModelKinds[i] == kind) return static_cast<int>(i);
    return static_cast<int>(kAllModelKinds.size());
}

TrainConfig TrainConfig::defaults_for(ModelKind kind) {
    TrainConfig config;
    config.kind = kind;
    config.standardize = kind == ModelKind::LogisticRegression || kind == ModelKind::LinearSvm ||
                         kind == ModelKind::Knn;
    return config;
}

void TrainConfig::validate() const {
    if (logit_learning_rate <= 0.0) throw ValidationError("learning rate must be positive");
    if (logit_l2 < 0.0 || svm_l2 <= 0.0) throw ValidationError("regularization out of range");
    if (logit_max_iters < 1 || svm_epochs < 1) throw ValidationError("iteration counts must be >= 1");
    if (knn_k < 1) throw ValidationError("knn_k must be >= 1");
    if (tree_max_depth < 0) throw ValidationError("tree_max_depth must be >= 0");
    if (tree_min_samples_leaf < 1) throw ValidationError("tree_min_samples_leaf must be >= 1");
    if (tree_min_impurity_decrease < 0.0)
        throw ValidationError("tree_min_impurity_decrease must be >= 0");
    if (forest_trees < 1) throw ValidationError("forest_trees must be >= 1");
    if (forest_mtry < 0) throw ValidationError("forest_mtry must be >= 0");
}

Standardizer fit_standardizer(const Eigen::Ref<const Mat>& X) {
    Standardizer s;
    const Index p = X.cols();
    s.mean.resize(p);
    s.scale.resize(p);
    if (X.rows() == 0) throw ValidationError("fit_standardizer: empty matrix");
    for (Index j = 0; j < p; ++j) {
        const Scalar mean = X.col(j).mean();
        const Scalar var = (X.col(j).array() - mean).square().mean();
        Scalar scale = std::sqrt(var);
        if (scale < 1e-12) scale = 1.0;
        s.mean(j) = mean;
        s.scale(j) = scale;
    }
    return s;
}

Mat apply_standardizer(const Standardizer& s, const Eigen::Ref<const Mat>& X) {
    return (X.rowwise() - s.mean.transpose()).array().rowwise() /
           s.scale.transpose().array();
}

Scalar logistic_objective(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                          const Eigen::Ref<const Vec>& w, Scalar b, Scalar l2) {
    const Index n = X.rows();
    const Vec z = (X * w).array() + b;
    Scalar nll = 0.0;
    for (Index i = 0; i < n; ++i) {
        // log(1 + exp(z)) - y z, evaluated without overflow
        const Scalar zi = z(i);
        const Scalar softplus = zi > 0.0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
        nll += softplus - static_cast<Scalar>(y(i)) * zi;
    }
    return nll / static_cast<Scalar>(n) + 0.5 * l2 * w.squaredNorm();
}

void logistic_gradient(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                       const Eigen::Ref<const Vec>& w, Scalar b, Scalar l2, Vec& grad_w,
                       Scalar& grad_b) {
    const Index n = X.rows();
    Vec residual = (X * w).array() + b;
    for (Index i = 0; i < n; ++i) residual(i) = sigmoid(residual(i)) - static_cast<Scalar>(y(i));
    grad_w = X.transpose() * residual / static_cast<Scalar>(n) + l2 * w;
    grad_b = residual.mean();
}

TrainedModel train_logistic(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                            const TrainConfig& config) {
    require_both_classes(y, "train_logistic");
    TrainedModel model;
    model.kind = ModelKind::LogisticRegression;
    model.config = config;
    model.weights = Vec::Zero(X.cols());
    model.bias = 0.0;
    model.converged = false;

    Vec grad_w(X.cols());
    Scalar grad_b = 0.0;
    for (int iter = 0; iter < config.logit_max_iters; ++iter) {
        logistic_gradient(X, y, model.weights, model.bias, config.logit_l2, grad_w, grad_b);
        const Scalar gnorm =
            std::max(X.cols() > 0 ? grad_w.cwiseAbs().maxCoeff() : 0.0, std::abs(grad_b));
        model.iterations = iter;
        if (gnorm < config.logit_grad_tol) {
            model.converged = true;
            break;
        }
        model.weights -= config.logit_learning_rate * grad_w;
        model.bias -= config.logit_learning_rate * grad_b;
        model.iterations = iter + 1;
    }
    return model;
}

TrainedModel train_linear_svm(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                              const TrainConfig& config) {
    require_both_classes(y, "train_linear_svm");
    const Index n = X.rows();
    TrainedModel model;
    model.kind = ModelKind::LinearSvm;
    model.config = config;
    model.weights = Vec::Zero(X.cols());
    model.bias = 0.0;

    // labels in {-1, +1}
    Vec sy(n);
    for (Index i = 0; i < n; ++i) sy(i) = y(i) == 1 ? 1.0 : -1.0;

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    SplitMix64 rng(config.seed);

    const Scalar lambda = config.svm_l2;
    long long t = 0;
    model.objective_trace.reserve(static_cast<std::size_t>(config.svm_epochs));
    for (int epoch = 0; epoch < config.svm_epochs; ++epoch) {
        fisher_yates_shuffle(order, rng);
        for (Index i : order) {
            ++t;
            const Scalar eta = 1.0 / (lambda * static_cast<Scalar>(t));
            const Scalar margin = sy(i) * (model.weights.dot(X.row(i)) + model.bias);
            model.weights *= (1.0 - eta * lambda);
            if (margin < 1.0) {
                model.weights += eta * sy(i) * X.row(i).transpose();
                model.bias += eta * sy(i);  // bias stays unregularized
            }
        }
        const Vec margins = sy.array() * ((X * model.weights).array() + model.bias);
        const Scalar hinge = (1.0 - margins.array()).max(0.0).mean();
        model.objective_trace.push_back(0.5 * lambda * model.weights.squaredNorm() + hinge);
    }
    model.iterations = config.svm_epochs;
    return model;
}

TrainedModel train_gaussian_nb(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                               const TrainConfig& config) {
    require_both_classes(y, "train_gaussian_nb");
    const Index n = X.rows();
    const Index p = X.cols();
    TrainedModel model;
    model.kind = ModelKind::GaussianNb;
    model.config = config;
    model.class_log_prior.resize(2);
    model.nb_mean = Mat::Zero(2, p);
    model.nb_var = Mat::Zero(2, p);

    // Variance floor: 1e-9 of the largest pooled feature variance (itself
    // floored at 1e-9), so constant features stay usable.
    Scalar max_var = 0.0;
    for (Index j = 0; j < p; ++j) {
        const Scalar mean = X.col(j).mean();
        max_var = std::max(max_var, (X.col(j).array() - mean).square().mean());
    }
    const Scalar floor = 1e-9 * std::max(max_var, 1e-9);

    for (int c = 0; c < 2; ++c) {
        std::vector<Index> members;
        for (Index i = 0; i < n; ++i)
            if (y(i) == c) members.push_back(i);
        const auto nc = static_cast<Scalar>(members.size());
        model.class_log_prior(c) = std::log(nc / static_cast<Scalar>(n));
        for (Index j = 0; j < p; ++j) {
            Scalar mean = 0.0;
            for (Index i : members) mean += X(i, j);
            mean /= nc;
            Scalar var = 0.0;
            for (Index i : members) var += (X(i, j) - mean) * (X(i, j) - mean);
            var /= nc;
            model.nb_mean(c, j) = mean;
            model.nb_var(c, j) = std::max(var, floor);
        }
    }
    return model;
}

TrainedModel train_knn(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                       const TrainConfig& config) {
    if (X.rows() == 0) throw ValidationError("train_knn: empty training set");
    TrainedModel model;
    model.kind = ModelKind::Knn;
    model.config = config;
    model.knn_train = X;
    model.knn_labels = y;
    return model;
}

SplitChoice best_split(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                       const std::vector<Index>& rows, const std::vector<int>& features,
                       int min_samples_leaf) {
    SplitChoice best;
    const auto n = static_cast<long long>(rows.size());
    if (n < 2) return best;

    long long total_pos = 0;
    for (Index r : rows) total_pos += y(r);
    const long long total_neg = n - total_pos;
    if (total_pos == 0 || total_neg == 0) return best;  // pure node

    std::vector<std::pair<Scalar, int>> values(rows.size());
    for (int f : features) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            values[i] = {X(rows[i], f), y(rows[i])};
        std::sort(values.begin(), values.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });

        long long left_n = 0, left_pos = 0;
        for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            ++left_n;
            left_pos += values[i].second;
            if (values[i].first == values[i + 1].first) continue;  // not a boundary
            const long long right_n = n - left_n;
            if (left_n < min_samples_leaf || right_n < min_samples_leaf) continue;

            // Gini decrease as an exact rational:
            //   decrease = [-(P^2+N^2) nL nR + (PL^2+NL^2) n nR + (PR^2+NR^2) n nL]
            //              / (n^2 nL nR)
            const long long right_pos = total_pos - left_pos;
            const long long left_neg = left_n - left_pos;
            const long long right_neg = right_n - right_pos;
            const long long num = -(total_pos * total_pos + total_neg * total_neg) * left_n * right_n +
                                  (left_pos * left_pos + left_neg * left_neg) * n * right_n +
                                  (right_pos * right_pos + right_neg * right_neg) * n * left_n;
            const long long den = n * n * left_n * right_n;
            if (!best.valid || decrease_greater(num, den, best.decrease_num, best.decrease_den)) {
                best.valid = true;
                best.feature = f;
                best.threshold = (values[i].first + values[i + 1].first) / 2.0;
                best.decrease_num = num;
                best.decrease_den = den;
            }
        }
    }
    return best;
}

TrainedModel train_tree(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                        const TrainConfig& config) {
    if (X.rows() == 0) throw ValidationError("train_tree: empty training set");
    TrainedModel model;
    model.kind = ModelKind::DecisionTree;
    model.config = config;
    std::vector<Index> rows(static_cast<std::size_t>(X.rows()));
    std::iota(rows.begin(), rows.end(), Index{0});
    TreeBuilder builder(X, y, config, nullptr, 0);
    model.trees.push_back(builder.build(std::move(rows)));
    return model;
}

TrainedModel train_forest(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                          const TrainConfig& config) {
    if (X.rows() == 0) throw ValidationError("train_forest: empty training set");
    const Index n = X.rows();
    const int p = static_cast<int>(X.cols());
    int mtry = config.forest_mtry > 0 ? std::min(config.forest_mtry, p)
                                      : std::max(1, static_cast<int>(std::floor(std::sqrt(p))));

    TrainedModel model;
    model.kind = ModelKind::RandomForest;
    model.config = config;
    model.trees.reserve(static_cast<std::size_t>(config.forest_trees));
    for (int t = 0; t < config.forest_trees; ++t) {
        SplitMix64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(t)));
        std::vector<Index> rows(static_cast<std::size_t>(n));
        if (config.forest_bootstrap) {
            for (Index i = 0; i < n; ++i)
                rows[static_cast<std::size_t>(i)] =
                    static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n)));
        } else {
            std::iota(rows.begin(), rows.end(), Index{0});
        }
        TreeBuilder builder(X, y, config, &rng, mtry);
        model.trees.push_back(builder.build(std::move(rows)));
    }
    return model;
}

TrainedModel train(const Dataset& data, const TrainConfig& config) {
    config.validate();
    if (!data.labeled) throw ValidationError("train: dataset has no labels");
    if (data.n_rows() == 0) throw ValidationError("train: empty dataset");

    Mat X = data.codes.cast<Scalar>();
    Standardizer standardizer;
    if (config.standardize) {
        standardizer = fit_standardizer(X);
        X = apply_standardizer(standardizer, X);
    }

    TrainedModel model;
    switch (config.kind) {
        case ModelKind::LogisticRegression: model = train_logistic(X, data.labels, config); break;
        case ModelKind::DecisionTree: model = train_tree(X, data.labels, config); break;
        case ModelKind::RandomForest: model = train_forest(X, data.labels, config); break;
        case ModelKind::Knn: model = train_knn(X, data.labels, config); break;
        case ModelKind::LinearSvm: model = train_linear_svm(X, data.labels, config); break;
        case ModelKind::GaussianNb: model = train_gaussian_nb(X, data.labels, config); break;
    }
    if (config.standardize) {
        model.standardize_mean = standardizer.mean;
        model.standardize_scale = standardizer.scale;
    }
    model.feature_ids = data.feature_ids;
    model.schema_fingerprint = data.schema_fingerprint;
    return model;
}

Scalar Tree::score(const Eigen::Ref<const Vec>& x) const {
    int node = 0;
    while (!nodes[static_cast<std::size_t>(node)].is_leaf()) {
        const TreeNode& cur = nodes[static_cast<std::size_t>(node)];
        node = x(cur.feature) <= cur.threshold ? cur.left : cur.right;
    }
    return nodes[static_cast<std::size_t>(node)].leaf_score;
}

Scalar knn_score(const TrainedModel& model, const Eigen::Ref<const Vec>& x, int k) {
    const Index n = model.knn_train.rows();
    if (k < 1) throw ValidationError("knn_score: k must be >= 1");
    if (k > n) throw ValidationError("knn_score: k exceeds the stored training set size");

    std::vector<std::pair<Scalar, Index>> dist(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        dist[static_cast<std::size_t>(i)] = {(model.knn_train.row(i).transpose() - x).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

    int positives = 0;
    for (int i = 0; i < k; ++i) positives += model.knn_labels(dist[static_cast<std::size_t>(i)].second);
    return static_cast<Scalar>(positives) / static_cast<Scalar>(k);
}

namespace {

Vec prepare_row(const TrainedModel& model, const Eigen::Ref<const Vec>& raw_row) {
    if (raw_row.size() != static_cast<Index>(model.feature_ids.size()))
        throw ValidationError("predict: row has " + std::to_string(raw_row.size()) +
                              " features, model expects " + std::to_string(model.feature_ids.size()));
    if (model.standardize_mean.size() > 0)
        return (raw_row - model.standardize_mean).cwiseQuotient(model.standardize_scale);
    return raw_row;
}

Scalar nb_log_likelihood(const TrainedModel& model, const Eigen::Ref<const Vec>& x, int c, Index j) {
    const Scalar var = model.nb_var(c, j);
    const Scalar diff = x(j) - model.nb_mean(c, j);
    return -0.5 * std::log(2.0 * std::numbers::pi_v<Scalar> * var) - diff * diff / (2.0 * var);
}

Scalar model_score(const TrainedModel& model, const Eigen::Ref<const Vec>& x) {
    switch (model.kind) {
        case ModelKind::LogisticRegression:
            return sigmoid(model.weights.dot(x) + model.bias);
        case ModelKind::LinearSvm:
            return model.weights.dot(x) + model.bias;
        case ModelKind::GaussianNb: {
            Scalar lp0 = model.class_log_prior(0);
            Scalar lp1 = model.class_log_prior(1);
            for (Index j = 0; j < x.size(); ++j) {
                lp0 += nb_log_likelihood(model, x, 0, j);
                lp1 += nb_log_likelihood(model, x, 1, j);
            }
            const Scalar m = std::max(lp0, lp1);
            return std::exp(lp1 - m) / (std::exp(lp0 - m) + std::exp(lp1 - m));
        }
        case ModelKind::Knn:
            return knn_score(model, x, model.config.knn_k);
        case ModelKind::DecisionTree:
        case ModelKind::RandomForest: {
            Scalar sum = 0.0;
            for (const Tree& tree : model.trees) sum += tree.score(x);
            return sum / static_cast<Scalar>(model.trees.size());
        }
    }
    throw InternalError("model_score: unhandled kind");
}

}  // namespace

Prediction predict(const TrainedModel& model, const Eigen::Ref<const Vec>& raw_row) {
    const Vec x = prepare_row(model, raw_row);
    Prediction out;
    out.score = model_score(model, x);
    if (margin_scored(model.kind)) {
        out.label = out.score > 0.0 ? 1 : 0;
        out.probability = sigmoid(out.score);
    } else {
        out.label = out.score > 0.5 ? 1 : 0;
        out.probability = out.score;
    }
    return out;
}

std::vector<Prediction> predict_all(const TrainedModel& model, const Dataset& data,
                                    std::vector<std::string>* warnings) {
    if (warnings && !model.schema_fingerprint.empty() && !data.schema_fingerprint.empty() &&
        model.schema_fingerprint != data.schema_fingerprint)
        warnings->push_back("schema fingerprint mismatch: model " + model.schema_fingerprint +
                            ", data " + data.schema_fingerprint);
    const Dataset* source = &data;
    Dataset reordered;
    if (data.feature_ids != model.feature_ids) {
        reordered = select_columns(data, model.feature_ids);
        source = &reordered;
    }
    std::vector<Prediction> out;
    out.reserve(static_cast<std::size_t>(source->n_rows()));
    for (Index i = 0; i < source->n_rows(); ++i)
        out.push_back(predict(model, source->codes.row(i).cast<Scalar>().transpose()));
    return out;
}

std::vector<std::pair<std::string, Scalar>> feature_contributions(
    const TrainedModel& model, const Eigen::Ref<const Vec>& raw_row) {
    const Vec x = prepare_row(model, raw_row);
    const Index p = x.size();
    Vec contrib = Vec::Zero(p);
    switch (model.kind) {
        case ModelKind::LogisticRegression:
        case ModelKind::LinearSvm:
            contrib = (model.weights.array() * x.array()).abs();
            break;
        case ModelKind::GaussianNb:
            for (Index j = 0; j < p; ++j)
                contrib(j) = std::abs(nb_log_likelihood(model, x, 1, j) -
                                      nb_log_likelihood(model, x, 0, j));
            break;
        case ModelKind::DecisionTree:
        case ModelKind::RandomForest:
            for (const Tree& tree : model.trees) {
                int node = 0;
                while (!tree.nodes[static_cast<std::size_t>(node)].is_leaf()) {
                    const TreeNode& cur = tree.nodes[static_cast<std::size_t>(node)];
                    contrib(cur.feature) += cur.impurity_decrease;
                    node = x(cur.feature) <= cur.threshold ? cur.left : cur.right;
                }
            }
            break;
        case ModelKind::Knn:
            return {};  // no per-feature attribution for KNN
    }
    std::vector<std::pair<std::string, Scalar>> out;
    out.reserve(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j)
        out.emplace_back(model.feature_ids[static_cast<std::size_t>(j)], contrib(j));
    return out;
}

}  // namespace vulnscreen
