#include "vulnscreen/chi2.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>

#include "vulnscreen/errors.hpp"

namespace vulnscreen {

namespace {

constexpr int kMaxIterations = 10000;
constexpr Scalar kGammaTol = 1e-14;

// Regularized lower incomplete gamma P(a, x), series form. Valid for x < a+1.
Scalar gamma_p_series(Scalar a, Scalar x) {
    Scalar ap = a;
    Scalar term = 1.0 / a;
    Scalar sum = term;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kGammaTol)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw InternalError("incomplete gamma series did not converge");
}

// Regularized upper incomplete gamma Q(a, x) by modified Lentz continued
// fraction. Valid for x >= a+1.
Scalar gamma_q_cf(Scalar a, Scalar x) {
    constexpr Scalar fpmin = 1e-300;
    Scalar b = x + 1.0 - a;
    Scalar c = 1.0 / fpmin;
    Scalar d = 1.0 / b;
    Scalar h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const Scalar an = -static_cast<Scalar>(i) * (static_cast<Scalar>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < fpmin) d = fpmin;
        c = b + an / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const Scalar delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < kGammaTol)
            return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw InternalError("incomplete gamma continued fraction did not converge");
}

}  // namespace

Scalar chi2_sf(Scalar x, int df) {
    if (df < 1) throw ValidationError("df must be >= 1");
    if (!(x >= 0.0)) throw ValidationError("chi2_sf requires x >= 0");
    if (x == 0.0) return 1.0;
    const Scalar a = static_cast<Scalar>(df) / 2.0;
    const Scalar t = x / 2.0;
    if (t < a + 1.0) return 1.0 - gamma_p_series(a, t);
    return gamma_q_cf(a, t);
}

Scalar critical_value(Scalar alpha, int df) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("alpha must lie in (0, 1)");
    Scalar lo = 0.0;
    Scalar hi = 1e6;
    if (chi2_sf(hi, df) > alpha) throw InternalError("critical_value: bracket failure");
    // sf is monotone non-increasing; 500 halvings take the bracket far below
    // any representable spacing.
    for (int i = 0; i < 500 && hi - lo > 1e-12 * (1.0 + hi); ++i) {
        const Scalar mid = 0.5 * (lo + hi);
        if (chi2_sf(mid, df) > alpha) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

ContingencyTable build_contingency(const Eigen::Ref<const CodeVec>& feature,
                                   const Eigen::Ref<const LabelVec>& labels) {
    if (feature.size() == 0) throw ValidationError("contingency: empty feature column");
    if (feature.size() != labels.size())
        throw ValidationError("contingency: feature and label lengths differ");

    std::map<int, std::array<int, 2>> counts;
    std::array<long long, 2> class_totals{0, 0};
    for (Index i = 0; i < feature.size(); ++i) {
        const int label = labels(i);
        if (label != 0 && label != 1)
            throw ValidationError("contingency: labels must be 0 or 1");
        ++counts[feature(i)][static_cast<std::size_t>(label)];
        ++class_totals[static_cast<std::size_t>(label)];
    }
    if (class_totals[0] == 0 || class_totals[1] == 0)
        throw ValidationError("contingency: both classes must be present");
    if (counts.size() < 2)
        throw ValidationError("contingency: feature is constant (single category)");

    ContingencyTable table;
    table.observed.resize(static_cast<Index>(counts.size()), 2);
    Index r = 0;
    for (const auto& [code, row] : counts) {
        table.row_category_codes.push_back(code);
        table.observed(r, 0) = row[0];
        table.observed(r, 1) = row[1];
        ++r;
    }
    table.grand_total = class_totals[0] + class_totals[1];
    return table;
}

Mat expected_counts(const ContingencyTable& table) {
    if (table.grand_total <= 0) throw ValidationError("expected_counts: empty table");
    const Vec row_totals = table.observed.cast<Scalar>().rowwise().sum();
    const RowVec col_totals = table.observed.cast<Scalar>().colwise().sum();
    return row_totals * col_totals / static_cast<Scalar>(table.grand_total);
}

Scalar chi2_statistic(const ContingencyTable& table, bool* low_expected) {
    const Mat expected = expected_counts(table);
    if ((expected.array() <= 0.0).any())
        throw ValidationError("chi2_statistic: zero expected count");
    if (low_expected) *low_expected = (expected.array() < 5.0).any();
    const Mat diff = table.observed.cast<Scalar>() - expected;
    return (diff.array().square() / expected.array()).sum();
}

ChiSquareResult test_feature(const Dataset& dataset, const std::string& feature_id, Scalar alpha) {
    auto it = std::find(dataset.feature_ids.begin(), dataset.feature_ids.end(), feature_id);
    if (it == dataset.feature_ids.end())
        throw ValidationError("unknown feature: '" + feature_id + "'");
    if (!dataset.labeled) throw ValidationError("test_feature: dataset has no labels");
    const Index col = static_cast<Index>(it - dataset.feature_ids.begin());

    const ContingencyTable table = build_contingency(dataset.codes.col(col), dataset.labels);
    ChiSquareResult res;
    res.feature_id = feature_id;
    res.statistic = chi2_statistic(table, &res.low_expected_warning);
    res.df = static_cast<int>(table.observed.rows() - 1) * static_cast<int>(table.observed.cols() - 1);
    res.p_value = chi2_sf(res.statistic, res.df);
    res.critical_value = vulnscreen::critical_value(alpha, res.df);
    res.reject_null = res.statistic > res.critical_value;
    return res;
}

std::vector<std::string> FeatureRanking::top_ids(Index n) const {
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n && i < static_cast<Index>(entries.size()); ++i)
        out.push_back(entries[static_cast<std::size_t>(i)].feature_id);
    return out;
}

ChiSquareReport rank_features(const Dataset& dataset, Scalar alpha) {
    if (!dataset.labeled) throw ValidationError("rank_features: dataset has no labels");
    if (dataset.n_rows() == 0) throw ValidationError("rank_features: empty dataset");
    const bool has0 = (dataset.labels.array() == 0).any();
    const bool has1 = (dataset.labels.array() == 1).any();
    if (!has0 || !has1) throw ValidationError("rank_features: both classes must be present");

    ChiSquareReport report;
    report.alpha = alpha;

    struct Entry {
        ChiSquareResult result;
        Index column = 0;
    };
    std::vector<Entry> tested;
    std::vector<Entry> degenerate;
    for (Index col = 0; col < dataset.n_features(); ++col) {
        const std::string& id = dataset.feature_ids[static_cast<std::size_t>(col)];
        Entry entry;
        entry.column = col;
        try {
            entry.result = test_feature(dataset, id, alpha);
            tested.push_back(std::move(entry));
        } catch (const ValidationError&) {
            entry.result.feature_id = id;
            entry.result.degenerate = true;
            report.warnings.push_back("feature " + id + " is constant; excluded from testing");
            degenerate.push_back(std::move(entry));
        }
    }

    std::sort(tested.begin(), tested.end(), [](const Entry& a, const Entry& b) {
        if (a.result.statistic != b.result.statistic) return a.result.statistic > b.result.statistic;
        return a.column < b.column;
    });

    for (auto& e : tested) {
        report.ranking.entries.push_back({e.result.feature_id, e.result.statistic});
        report.results.push_back(std::move(e.result));
    }
    for (auto& e : degenerate) {
        report.ranking.entries.push_back({e.result.feature_id, 0.0});
        report.results.push_back(std::move(e.result));
    }
    return report;
}

void write_chi2_tsv(const ChiSquareReport& report, std::ostream& out) {
    out << "feature_id\tstatistic\tdf\tp_value\tcritical_value\treject\tlow_expected_warning\n";
    char buf[160];
    for (const auto& r : report.results) {
        std::snprintf(buf, sizeof(buf), "%s\t%.6f\t%d\t%.6g\t%.6f\t%d\t%d\n", r.feature_id.c_str(),
                      r.statistic, r.df, r.p_value, r.critical_value, r.reject_null ? 1 : 0,
                      r.low_expected_warning ? 1 : 0);
        out << buf;
    }
}

}  // namespace vulnscreen
