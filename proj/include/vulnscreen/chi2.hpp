#ifndef VULNSCREEN_CHI2_HPP
#define VULNSCREEN_CHI2_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "vulnscreen/dataset.hpp"
#include "vulnscreen/types.hpp"

namespace vulnscreen {

// Cross-tabulation of one feature against the two classes. Rows cover only
// the category codes that actually occur; columns are class 0, class 1.
struct ContingencyTable {
    Eigen::MatrixXi observed;            // R x 2
    std::vector<int> row_category_codes; // length R, ascending
    long long grand_total = 0;
};

// Tallies feature codes against labels, dropping empty categories.
// Throws when labels hold a single class or the feature is constant.
ContingencyTable build_contingency(const Eigen::Ref<const CodeVec>& feature,
                                   const Eigen::Ref<const LabelVec>& labels);

// e[i][j] = row_i total * col_j total / grand total.
Mat expected_counts(const ContingencyTable& table);

// Pearson statistic sum((o - e)^2 / e). When `low_expected` is given it is
// set if any expected cell falls below 5.
Scalar chi2_statistic(const ContingencyTable& table, bool* low_expected = nullptr);

// Survival function of the chi-square distribution: 1 - P(df/2, x/2) with P
// the regularized lower incomplete gamma function (series / continued
// fraction, tolerance 1e-14, 10000-iteration cap).
Scalar chi2_sf(Scalar x, int df);

// x* with chi2_sf(x*, df) = alpha, by bisection on [0, 1e6].
Scalar critical_value(Scalar alpha, int df);

struct ChiSquareResult {
    std::string feature_id;
    Scalar statistic = 0.0;
    int df = 0;
    Scalar p_value = 1.0;
    Scalar critical_value = 0.0;
    bool reject_null = false;
    bool low_expected_warning = false;
    bool degenerate = false;  // constant feature, excluded from testing
};

// Full independence test of one feature at significance alpha. The null is
// rejected iff statistic > critical value (strict).
ChiSquareResult test_feature(const Dataset& dataset, const std::string& feature_id, Scalar alpha);

struct RankedFeature {
    std::string feature_id;
    Scalar statistic = 0.0;
};

// Total order: statistic descending, ties by ascending column index;
// degenerate features close the list.
struct FeatureRanking {
    std::vector<RankedFeature> entries;

    std::vector<std::string> top_ids(Index n) const;
};

struct ChiSquareReport {
    Scalar alpha = 0.05;
    FeatureRanking ranking;
    std::vector<ChiSquareResult> results;  // in ranking order
    std::vector<std::string> warnings;
};

// Tests every feature and ranks them. Constant features are excluded from
// testing (warning, ranked last) rather than failing the run.
ChiSquareReport rank_features(const Dataset& dataset, Scalar alpha);

// TSV: feature_id, statistic, df, p_value, critical_value, reject,
// low_expected_warning -- in ranking order.
void write_chi2_tsv(const ChiSquareReport& report, std::ostream& out);

}  // namespace vulnscreen

#endif  // VULNSCREEN_CHI2_HPP
