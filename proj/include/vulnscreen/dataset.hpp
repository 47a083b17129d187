#ifndef VULNSCREEN_DATASET_HPP
#define VULNSCREEN_DATASET_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vulnscreen/schema.hpp"
#include "vulnscreen/types.hpp"

namespace vulnscreen {

// Encoded respondent rows. Immutable by convention once built; every
// operation below returns a new Dataset.
struct Dataset {
    std::string schema_fingerprint;
    std::vector<std::string> feature_ids;  // column order
    CodeMat codes;                         // n x p category codes
    LabelVec labels;                       // n when labeled, else empty
    std::vector<std::string> row_ids;      // n external ids, or empty
    bool labeled = false;

    Index n_rows() const { return codes.rows(); }
    Index n_features() const { return codes.cols(); }
};

enum class MissingPolicy {
    Reject,             // drop the row, report its line number
    ImputeMostFrequent  // fill with the column's most frequent code (ties: lowest)
};

struct ParseOptions {
    bool labeled = true;
    MissingPolicy missing = MissingPolicy::Reject;
};

// Reads a survey CSV (RFC 4180; header of question ids plus the target
// column when labeled, plus an optional leading "id" column). Cells may hold
// category labels or numeric codes. Collected warnings (rejected rows,
// imputed cells) go to `warnings` when given.
Dataset parse_csv(const std::string& path, const SurveySchema& schema, const ParseOptions& options,
                  std::vector<std::string>* warnings = nullptr);
Dataset parse_csv_stream(std::istream& in, const SurveySchema& schema, const ParseOptions& options,
                         std::vector<std::string>* warnings = nullptr);

// Writes the mirror-image CSV: integer codes, class names in the target
// column. parse_csv(write_csv(d)) == d.
void write_csv(const Dataset& dataset, const SurveySchema& schema, std::ostream& out);
void write_csv_file(const Dataset& dataset, const SurveySchema& schema, const std::string& path);

struct SplitIndices {
    std::vector<Index> train;  // ascending
    std::vector<Index> test;   // ascending
    std::uint64_t seed = 0;
    Scalar test_fraction = 0;
};

// Seeded stratified train/test partition. Per class: a Fisher-Yates shuffle
// driven by SplitMix64(derive_seed(seed, class)) picks round-half-up(count *
// test_fraction) members for the test side (clamped so both sides keep at
// least one member); a residual off-by-one against round-half-up(n *
// test_fraction) is charged to the larger class.
SplitIndices stratified_split(const Dataset& dataset, Scalar test_fraction, std::uint64_t seed);

// Dataset restricted to the given rows, in the given order.
Dataset subset_rows(const Dataset& dataset, const std::vector<Index>& rows);

// Dataset restricted to the given columns, in the given order.
Dataset select_columns(const Dataset& dataset, const std::vector<std::string>& feature_ids);

}  // namespace vulnscreen

#endif  // VULNSCREEN_DATASET_HPP
