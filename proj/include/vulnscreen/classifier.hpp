#ifndef VULNSCREEN_CLASSIFIER_HPP
#define VULNSCREEN_CLASSIFIER_HPP

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vulnscreen/dataset.hpp"
#include "vulnscreen/prng.hpp"
#include "vulnscreen/types.hpp"

namespace vulnscreen {

// Order matters: grid ties are broken by this listing.
enum class ModelKind {
    LogisticRegression,
    DecisionTree,
    RandomForest,
    Knn,
    LinearSvm,
    GaussianNb,
};

inline constexpr std::array<ModelKind, 6> kAllModelKinds = {
    ModelKind::LogisticRegression, ModelKind::DecisionTree, ModelKind::RandomForest,
    ModelKind::Knn,                ModelKind::LinearSvm,    ModelKind::GaussianNb,
};

const char* to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);
int kind_order(ModelKind kind);  // position in kAllModelKinds

// Margin-scored kinds threshold at 0, probability-scored kinds at 0.5; the
// boundary itself maps to label 0 in both cases.
inline bool margin_scored(ModelKind kind) { return kind == ModelKind::LinearSvm; }

struct TrainConfig {
    ModelKind kind = ModelKind::LogisticRegression;
    std::uint64_t seed = 42;
    bool standardize = true;

    // logistic regression: full-batch gradient descent on mean NLL + l2/2 |w|^2
    Scalar logit_learning_rate = 0.1;
    Scalar logit_l2 = 1e-4;
    int logit_max_iters = 5000;
    Scalar logit_grad_tol = 1e-6;

    // linear SVM: Pegasos stochastic subgradient, step 1/(l2 * t)
    Scalar svm_l2 = 1e-3;
    int svm_epochs = 200;

    // k-nearest neighbors
    int knn_k = 5;

    // decision tree (CART, Gini)
    int tree_max_depth = 10;
    int tree_min_samples_leaf = 2;
    Scalar tree_min_impurity_decrease = 1e-7;

    // random forest
    int forest_trees = 100;
    int forest_mtry = 0;  // 0 -> floor(sqrt(p))
    bool forest_bootstrap = true;

    // Per-kind defaults; only LR, SVM and KNN standardize.
    static TrainConfig defaults_for(ModelKind kind);
    void validate() const;
};

struct TreeNode {
    int feature = -1;  // position within the model's feature list; -1 for leaves
    Scalar threshold = 0.0;
    int left = -1;
    int right = -1;
    Scalar leaf_score = 0.0;          // positive fraction at the leaf
    Scalar impurity_decrease = 0.0;   // at internal nodes

    bool is_leaf() const { return feature < 0; }
};

// Nodes stored in preorder; node 0 is the root.
struct Tree {
    std::vector<TreeNode> nodes;

    Scalar score(const Eigen::Ref<const Vec>& x) const;
};

struct TrainedModel {
    ModelKind kind = ModelKind::LogisticRegression;
    std::vector<std::string> feature_ids;
    std::string schema_fingerprint;
    TrainConfig config;

    // standardization fitted on the training split (empty when unused)
    Vec standardize_mean;
    Vec standardize_scale;

    // linear kinds
    Vec weights;
    Scalar bias = 0.0;

    // gaussian naive bayes
    Vec class_log_prior;  // size 2
    Mat nb_mean;          // 2 x p
    Mat nb_var;           // 2 x p

    // knn: the stored (standardized) training set
    Mat knn_train;
    LabelVec knn_labels;

    // trees: one for DecisionTree, forest_trees for RandomForest
    std::vector<Tree> trees;

    // training diagnostics (not persisted)
    bool converged = true;
    int iterations = 0;
    std::vector<Scalar> objective_trace;  // SVM: per-epoch Pegasos objective
};

struct Prediction {
    Scalar score = 0.0;        // higher = more likely positive; raw margin for SVM
    int label = 0;
    Scalar probability = 0.5;  // sigmoid of the margin for SVM, else the score
};

// --- standardization ------------------------------------------------------

struct Standardizer {
    Vec mean;
    Vec scale;  // population std dev; constant columns get 1
};

Standardizer fit_standardizer(const Eigen::Ref<const Mat>& X);
Mat apply_standardizer(const Standardizer& s, const Eigen::Ref<const Mat>& X);

// --- kind-level trainers on prepared matrices ------------------------------
// X is the matrix the kind consumes: standardized for LR/SVM/KNN, raw codes
// for tree, forest and NB. The Dataset-level train() below handles that.

TrainedModel train_logistic(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                            const TrainConfig& config);
TrainedModel train_linear_svm(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                              const TrainConfig& config);
TrainedModel train_gaussian_nb(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                               const TrainConfig& config);
TrainedModel train_knn(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                       const TrainConfig& config);
TrainedModel train_tree(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                        const TrainConfig& config);
TrainedModel train_forest(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                          const TrainConfig& config);

// Trains config.kind on an encoded dataset (fits the standardizer first when
// the kind calls for it).
TrainedModel train(const Dataset& data, const TrainConfig& config);

// Logistic objective and gradient at (w, b), exposed for gradient checks.
Scalar logistic_objective(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                          const Eigen::Ref<const Vec>& w, Scalar b, Scalar l2);
void logistic_gradient(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                       const Eigen::Ref<const Vec>& w, Scalar b, Scalar l2, Vec& grad_w,
                       Scalar& grad_b);

// Fraction of positive labels among the k nearest stored rows (Euclidean on
// the standardized row; distance ties break toward the lower row index).
Scalar knn_score(const TrainedModel& model, const Eigen::Ref<const Vec>& x, int k);

// Best CART split of `rows` by Gini decrease over `features` (ascending
// feature positions). Candidate thresholds are midpoints between consecutive
// distinct values; ties resolve to the lowest feature, then lowest
// threshold. Decreases are compared as exact rationals.
struct SplitChoice {
    bool valid = false;
    int feature = -1;
    Scalar threshold = 0.0;
    long long decrease_num = 0;  // decrease = num / den, both nonnegative
    long long decrease_den = 1;

    Scalar decrease() const {
        return static_cast<Scalar>(decrease_num) / static_cast<Scalar>(decrease_den);
    }
};
SplitChoice best_split(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const LabelVec>& y,
                       const std::vector<Index>& rows, const std::vector<int>& features,
                       int min_samples_leaf);

// --- prediction -----------------------------------------------------------

// `raw_row` holds unstandardized codes ordered like model.feature_ids.
Prediction predict(const TrainedModel& model, const Eigen::Ref<const Vec>& raw_row);

// Predicts every row; reorders dataset columns to the model's feature list
// when needed. A fingerprint mismatch is reported through `warnings`.
std::vector<Prediction> predict_all(const TrainedModel& model, const Dataset& data,
                                    std::vector<std::string>* warnings = nullptr);

// Per-feature contribution magnitudes for one row: |w_j x_j| for linear
// kinds, impurity decrease along the taken path for trees, absolute
// log-likelihood ratio for NB. Empty for KNN.
std::vector<std::pair<std::string, Scalar>> feature_contributions(const TrainedModel& model,
                                                                  const Eigen::Ref<const Vec>& raw_row);

}  // namespace vulnscreen

#endif  // VULNSCREEN_CLASSIFIER_HPP
