#include "vulnscreen/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "vulnscreen/errors.hpp"

namespace vulnscreen {

namespace {

void check_binary_inputs(const std::vector<Scalar>& scores, const std::vector<int>& labels,
                         const char* what) {
    if (scores.size() != labels.size())
        throw ValidationError(std::string(what) + ": scores and labels differ in length");
    if (scores.empty()) throw ValidationError(std::string(what) + ": empty input");
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!std::isfinite(scores[i]))
            throw ValidationError(std::string(what) + ": non-finite score");
        if (labels[i] == 0) has0 = true;
        else if (labels[i] == 1) has1 = true;
        else throw ValidationError(std::string(what) + ": labels must be 0 or 1");
    }
    if (!has0 || !has1) throw ValidationError(std::string(what) + ": both classes must be present");
}

}  // namespace

Scalar accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
    if (predicted.size() != truth.size()) throw ValidationError("accuracy: length mismatch");
    if (predicted.empty()) throw ValidationError("accuracy: empty input");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        if (predicted[i] == truth[i]) ++correct;
    return static_cast<Scalar>(correct) / static_cast<Scalar>(predicted.size());
}

std::vector<RocPoint> roc_curve(const std::vector<Scalar>& scores, const std::vector<int>& labels) {
    check_binary_inputs(scores, labels, "roc_curve");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    long long positives = 0;
    for (int label : labels) positives += label;
    const auto negatives = static_cast<long long>(labels.size()) - positives;

    std::vector<RocPoint> points{{0.0, 0.0}};
    long long tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (labels[order[i]] == 1) ++tp;
        else ++fp;
        // emit one point per distinct score, so tied samples move together
        if (i + 1 < order.size() && scores[order[i + 1]] == scores[order[i]]) continue;
        points.push_back({static_cast<Scalar>(fp) / static_cast<Scalar>(negatives),
                          static_cast<Scalar>(tp) / static_cast<Scalar>(positives)});
    }
    return points;
}

Scalar auc(const std::vector<RocPoint>& points) {
    if (points.size() < 2) throw ValidationError("auc: need at least two ROC points");
    Scalar area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
    return area;
}

Scalar auc_pairwise_oracle(const std::vector<Scalar>& scores, const std::vector<int>& labels) {
    check_binary_inputs(scores, labels, "auc_pairwise_oracle");
    long long wins2 = 0;  // 2 per win, 1 per tie
    long long pairs = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i] != 1) continue;
        for (std::size_t j = 0; j < scores.size(); ++j) {
            if (labels[j] != 0) continue;
            ++pairs;
            if (scores[i] > scores[j]) wins2 += 2;
            else if (scores[i] == scores[j]) wins2 += 1;
        }
    }
    return static_cast<Scalar>(wins2) / (2.0 * static_cast<Scalar>(pairs));
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
    if (test.n_rows() == 0) throw ValidationError("evaluate: empty test set");
    if (!test.labeled) throw ValidationError("evaluate: test set has no labels");

    const std::vector<Prediction> predictions = predict_all(model, test);
    EvalReport report;
    report.n_test = test.n_rows();

    std::vector<Scalar> scores(predictions.size());
    std::vector<int> predicted(predictions.size());
    std::vector<int> truth(predictions.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        scores[i] = predictions[i].score;
        predicted[i] = predictions[i].label;
        truth[i] = test.labels(static_cast<Index>(i));
        if (predicted[i] == 1 && truth[i] == 1) ++report.confusion.tp;
        else if (predicted[i] == 1 && truth[i] == 0) ++report.confusion.fp;
        else if (predicted[i] == 0 && truth[i] == 0) ++report.confusion.tn;
        else ++report.confusion.fn;
    }
    report.accuracy = accuracy(predicted, truth);
    report.roc = roc_curve(scores, truth);
    report.auc = auc(report.roc);
    return report;
}

void write_roc_csv(const std::vector<RocPoint>& points, std::ostream& out) {
    out << "fpr,tpr\n";
    char buf[96];
    for (const RocPoint& p : points) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.fpr, p.tpr);
        out << buf;
    }
}

}  // namespace vulnscreen
