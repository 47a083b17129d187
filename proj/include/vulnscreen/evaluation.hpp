#ifndef VULNSCREEN_EVALUATION_HPP
#define VULNSCREEN_EVALUATION_HPP

#include <iosfwd>
#include <vector>

#include "vulnscreen/classifier.hpp"
#include "vulnscreen/dataset.hpp"
#include "vulnscreen/types.hpp"

namespace vulnscreen {

struct Confusion {
    long long tp = 0;
    long long fp = 0;
    long long tn = 0;
    long long fn = 0;
};

struct RocPoint {
    Scalar fpr = 0.0;
    Scalar tpr = 0.0;
};

// Fraction of exact matches.
Scalar accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

// Threshold sweep over distinct scores, descending. Tied scores move as one
// block (a diagonal segment); the curve starts at (0,0) and ends at (1,1).
std::vector<RocPoint> roc_curve(const std::vector<Scalar>& scores, const std::vector<int>& labels);

// Trapezoidal area under the curve.
Scalar auc(const std::vector<RocPoint>& points);

// Independent AUC route: (#correctly ordered positive-negative pairs + half
// the ties) / (P * N). Must agree with auc(roc_curve(...)) to 1e-9.
Scalar auc_pairwise_oracle(const std::vector<Scalar>& scores, const std::vector<int>& labels);

struct EvalReport {
    Index n_test = 0;
    Scalar accuracy = 0.0;
    Confusion confusion;
    std::vector<RocPoint> roc;
    Scalar auc = 0.0;
};

EvalReport evaluate(const TrainedModel& model, const Dataset& test);

// Two-column CSV "fpr,tpr" for external plotting.
void write_roc_csv(const std::vector<RocPoint>& points, std::ostream& out);

}  // namespace vulnscreen

#endif  // VULNSCREEN_EVALUATION_HPP
