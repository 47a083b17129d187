#ifndef VULNSCREEN_SELECTION_HPP
#define VULNSCREEN_SELECTION_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "vulnscreen/chi2.hpp"
#include "vulnscreen/classifier.hpp"
#include "vulnscreen/dataset.hpp"
#include "vulnscreen/evaluation.hpp"

namespace vulnscreen {

struct GridCell {
    Index n_features = 0;
    ModelKind kind = ModelKind::LogisticRegression;
    bool ok = false;
    Scalar accuracy = 0.0;
    Scalar auc = 0.0;
    std::string error;  // set when !ok
};

struct Winner {
    ModelKind kind = ModelKind::LogisticRegression;
    Index n_features = 0;
    std::vector<std::string> feature_ids;
    Scalar accuracy = 0.0;
    Scalar auc = 0.0;
};

struct SelectionTrace {
    std::vector<GridCell> grid;  // n descending, kinds in listing order
    FeatureRanking ranking;
    SplitIndices split;
    Winner winner;
};

// The backward-elimination sweep: for n = p .. 1, keep the n highest-ranked
// features (each step drops the lowest-ranked remaining one), train every
// kind on the train side and score it on the test side. Cell seeds derive
// from (seed, kind, n), so cells are independent and any execution order --
// including `threads` > 1 -- produces the identical trace.
SelectionTrace backward_eliminate(const Dataset& dataset, const FeatureRanking& ranking,
                                  const SplitIndices& split, const std::vector<ModelKind>& kinds,
                                  const std::vector<TrainConfig>& base_configs,
                                  std::uint64_t seed, int threads = 1);

// Argmax accuracy; ties fall to fewer features, then higher AUC, then the
// kind listing order.
Winner select_winner(const SelectionTrace& trace);

// TSV: n, kind, accuracy, auc, status.
void write_trace_tsv(const SelectionTrace& trace, std::ostream& out);

struct PipelineConfig {
    std::uint64_t seed = 42;
    Scalar alpha = 0.05;
    Scalar test_fraction = 0.333333;
    std::vector<ModelKind> kinds{kAllModelKinds.begin(), kAllModelKinds.end()};
    std::vector<TrainConfig> base_configs;  // empty -> per-kind defaults
    int threads = 1;
};

struct PipelineResult {
    TrainedModel model;
    SelectionTrace trace;
    ChiSquareReport chi2;
    EvalReport eval;
};

// ingest -> rank -> split -> sweep -> winner -> retrain -> final evaluation.
// When `out_dir` is nonempty, persists model.json, trace.tsv,
// chi2_report.tsv, roc.csv and summary.txt there. Errors carry the failing
// stage's name.
PipelineResult run_pipeline(const std::string& data_path, const std::string& schema_path,
                            const PipelineConfig& config, const std::string& out_dir = "");

// Same, on an already-ingested dataset.
PipelineResult run_pipeline_on(const Dataset& dataset, const PipelineConfig& config,
                               const std::string& out_dir = "");

}  // namespace vulnscreen

#endif  // VULNSCREEN_SELECTION_HPP
