#include "vulnscreen/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <thread>

#include "vulnscreen/errors.hpp"
#include "vulnscreen/model_io.hpp"
#include "vulnscreen/prng.hpp"

namespace vulnscreen {

namespace {

TrainConfig base_config_for(const std::vector<TrainConfig>& base_configs, ModelKind kind) {
    for (const TrainConfig& c : base_configs)
        if (c.kind == kind) return c;
    return TrainConfig::defaults_for(kind);
}

std::uint64_t cell_seed(std::uint64_t seed, ModelKind kind, Index n_features) {
    return derive_seed(derive_seed(seed, static_cast<std::uint64_t>(kind_order(kind))),
                       static_cast<std::uint64_t>(n_features));
}

}  // namespace

SelectionTrace backward_eliminate(const Dataset& dataset, const FeatureRanking& ranking,
                                  const SplitIndices& split, const std::vector<ModelKind>& kinds,
                                  const std::vector<TrainConfig>& base_configs,
                                  std::uint64_t seed, int threads) {
    if (kinds.empty()) throw ValidationError("backward_eliminate: no classifier kinds given");
    const Index p = dataset.n_features();
    if (static_cast<Index>(ranking.entries.size()) != p)
        throw ValidationError("backward_eliminate: ranking does not cover the dataset features");

    SelectionTrace trace;
    trace.ranking = ranking;
    trace.split = split;

    const Dataset train_full = subset_rows(dataset, split.train);
    const Dataset test_full = subset_rows(dataset, split.test);

    trace.grid.resize(static_cast<std::size_t>(p) * kinds.size());
    struct Job {
        Index n_features;
        std::size_t kind_pos;
        std::size_t slot;
    };
    std::vector<Job> jobs;
    jobs.reserve(trace.grid.size());
    for (Index n = p; n >= 1; --n) {
        for (std::size_t k = 0; k < kinds.size(); ++k) {
            const std::size_t slot = static_cast<std::size_t>(p - n) * kinds.size() + k;
            jobs.push_back({n, k, slot});
        }
    }

    auto run_job = [&](const Job& job) {
        GridCell& cell = trace.grid[job.slot];
        cell.n_features = job.n_features;
        cell.kind = kinds[job.kind_pos];
        try {
            const std::vector<std::string> ids = ranking.top_ids(job.n_features);
            const Dataset train = select_columns(train_full, ids);
            const Dataset test = select_columns(test_full, ids);
            TrainConfig config = base_config_for(base_configs, cell.kind);
            config.seed = cell_seed(seed, cell.kind, job.n_features);
            const TrainedModel model = train_full.n_rows() > 0 ? vulnscreen::train(train, config)
                                                               : throw ValidationError("empty train split");
            const EvalReport report = evaluate(model, test);
            cell.accuracy = report.accuracy;
            cell.auc = report.auc;
            cell.ok = true;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
    };

    if (threads <= 1) {
        for (const Job& job : jobs) run_job(job);
    } else {
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            while (true) {
                const std::size_t i = next.fetch_add(1);
                if (i >= jobs.size()) break;
                run_job(jobs[i]);
            }
        };
        std::vector<std::thread> pool;
        const auto count = static_cast<std::size_t>(threads);
        pool.reserve(count);
        for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    bool any_ok = false;
    for (const GridCell& cell : trace.grid) any_ok = any_ok || cell.ok;
    if (!any_ok) throw ValidationError("backward_eliminate: every grid cell failed");

    trace.winner = select_winner(trace);
    return trace;
}

Winner select_winner(const SelectionTrace& trace) {
    const GridCell* best = nullptr;
    for (const GridCell& cell : trace.grid) {
        if (!cell.ok) continue;
        if (best == nullptr) {
            best = &cell;
            continue;
        }
        if (cell.accuracy != best->accuracy) {
            if (cell.accuracy > best->accuracy) best = &cell;
        } else if (cell.n_features != best->n_features) {
            if (cell.n_features < best->n_features) best = &cell;
        } else if (cell.auc != best->auc) {
            if (cell.auc > best->auc) best = &cell;
        } else if (kind_order(cell.kind) < kind_order(best->kind)) {
            best = &cell;
        }
    }
    if (best == nullptr) throw ValidationError("select_winner: no successful grid cell");

    Winner winner;
    winner.kind = best->kind;
    winner.n_features = best->n_features;
    winner.feature_ids = trace.ranking.top_ids(best->n_features);
    winner.accuracy = best->accuracy;
    winner.auc = best->auc;
    return winner;
}

void write_trace_tsv(const SelectionTrace& trace, std::ostream& out) {
    out << "n\tkind\taccuracy\tauc\tstatus\n";
    char buf[128];
    for (const GridCell& cell : trace.grid) {
        if (cell.ok) {
            std::snprintf(buf, sizeof(buf), "%lld\t%s\t%.6f\t%.6f\tok\n",
                          static_cast<long long>(cell.n_features), to_string(cell.kind),
                          cell.accuracy, cell.auc);
            out << buf;
        } else {
            out << cell.n_features << '\t' << to_string(cell.kind) << "\t\t\tfailed: " << cell.error
                << '\n';
        }
    }
}

PipelineResult run_pipeline_on(const Dataset& dataset, const PipelineConfig& config,
                               const std::string& out_dir) {
    PipelineResult result;

    try {
        result.chi2 = rank_features(dataset, config.alpha);
    } catch (const std::exception& e) {
        throw PipelineError("ranking", e.what());
    }

    SplitIndices split;
    try {
        split = stratified_split(dataset, config.test_fraction, config.seed);
    } catch (const std::exception& e) {
        throw PipelineError("split", e.what());
    }

    try {
        result.trace = backward_eliminate(dataset, result.chi2.ranking, split, config.kinds,
                                          config.base_configs, config.seed, config.threads);
    } catch (const std::exception& e) {
        throw PipelineError("selection", e.what());
    }

    try {
        const Winner& winner = result.trace.winner;
        const Dataset train = select_columns(subset_rows(dataset, split.train), winner.feature_ids);
        const Dataset test = select_columns(subset_rows(dataset, split.test), winner.feature_ids);
        TrainConfig train_config = base_config_for(config.base_configs, winner.kind);
        train_config.seed = cell_seed(config.seed, winner.kind, winner.n_features);
        result.model = train(train, train_config);
        result.eval = evaluate(result.model, test);
    } catch (const std::exception& e) {
        throw PipelineError("final_training", e.what());
    }

    if (!out_dir.empty()) {
        try {
            namespace fs = std::filesystem;
            fs::create_directories(out_dir);
            save_model(result.model, (fs::path(out_dir) / "model.json").string());

            std::ofstream trace_out(fs::path(out_dir) / "trace.tsv", std::ios::binary);
            write_trace_tsv(result.trace, trace_out);

            std::ofstream chi2_out(fs::path(out_dir) / "chi2_report.tsv", std::ios::binary);
            write_chi2_tsv(result.chi2, chi2_out);

            std::ofstream roc_out(fs::path(out_dir) / "roc.csv", std::ios::binary);
            write_roc_csv(result.eval.roc, roc_out);

            std::ofstream summary(fs::path(out_dir) / "summary.txt", std::ios::binary);
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "winner_kind=%s\nwinner_n_features=%lld\naccuracy=%.6f\nauc=%.6f\n"
                          "n_rows=%lld\nn_train=%lld\nn_test=%lld\nseed=%llu\nalpha=%g\n"
                          "test_fraction=%g\n",
                          to_string(result.trace.winner.kind),
                          static_cast<long long>(result.trace.winner.n_features),
                          result.trace.winner.accuracy, result.trace.winner.auc,
                          static_cast<long long>(dataset.n_rows()),
                          static_cast<long long>(split.train.size()),
                          static_cast<long long>(split.test.size()),
                          static_cast<unsigned long long>(config.seed), config.alpha,
                          config.test_fraction);
            summary << buf << "features=";
            for (std::size_t i = 0; i < result.trace.winner.feature_ids.size(); ++i) {
                if (i > 0) summary << ',';
                summary << result.trace.winner.feature_ids[i];
            }
            summary << '\n';
        } catch (const std::exception& e) {
            throw PipelineError("persistence", e.what());
        }
    }
    return result;
}

PipelineResult run_pipeline(const std::string& data_path, const std::string& schema_path,
                            const PipelineConfig& config, const std::string& out_dir) {
    Dataset dataset;
    try {
        const SurveySchema schema = load_schema(schema_path);
        dataset = parse_csv(data_path, schema, ParseOptions{});
    } catch (const std::exception& e) {
        throw PipelineError("ingest", e.what());
    }
    return run_pipeline_on(dataset, config, out_dir);
}

}  // namespace vulnscreen
