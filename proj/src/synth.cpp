#include "vulnscreen/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vulnscreen/errors.hpp"
#include "vulnscreen/prng.hpp"

namespace vulnscreen {

Dataset generate(const SurveySchema& schema, const SynthConfig& config) {
    if (config.n < 2) throw ValidationError("synth: n must be >= 2");
    if (!(config.positive_fraction > 0.0 && config.positive_fraction < 1.0))
        throw ValidationError("synth: positive_fraction must lie in (0, 1)");
    if (!(config.delta >= 0.0 && config.delta < 1.0))
        throw ValidationError("synth: delta must lie in [0, 1)");

    const auto& questions = schema.questions();
    std::vector<bool> informative(questions.size(), false);
    for (const auto& id : config.informative_ids)
        informative[static_cast<std::size_t>(schema.question_index(id))] = true;

    const Index n = config.n;
    const auto n_pos = static_cast<Index>(
        std::floor(static_cast<Scalar>(n) * config.positive_fraction + 0.5));
    if (n_pos < 1 || n_pos > n - 1)
        throw ValidationError("synth: positive_fraction leaves a class empty");

    SplitMix64 rng(config.seed);

    // Exactly n_pos positives, placed by one Fisher-Yates pass.
    std::vector<int> labels(static_cast<std::size_t>(n), 0);
    std::fill(labels.begin(), labels.begin() + n_pos, 1);
    fisher_yates_shuffle(labels, rng);

    Dataset out;
    out.schema_fingerprint = schema.fingerprint();
    out.labeled = true;
    out.feature_ids.reserve(questions.size());
    for (const auto& q : questions) out.feature_ids.push_back(q.id);
    out.codes.resize(n, static_cast<Index>(questions.size()));
    out.labels.resize(n);

    for (Index i = 0; i < n; ++i) {
        const int label = labels[static_cast<std::size_t>(i)];
        out.labels(i) = label;
        for (std::size_t j = 0; j < questions.size(); ++j) {
            const auto m = static_cast<std::uint64_t>(questions[j].categories.size());
            int code;
            if (informative[j] && rng.next_double() < config.delta) {
                code = label == 1 ? static_cast<int>(m) - 1 : 0;
            } else {
                code = static_cast<int>(rng.next_below(m));
            }
            out.codes(i, static_cast<Index>(j)) = code;
        }
    }
    return out;
}

SynthConfig paper_shaped_preset() {
    SynthConfig config;
    config.n = 486;
    config.positive_fraction = 0.5;
    config.delta = 0.6;
    config.seed = 42;
    config.informative_ids = {"Q6",  "Q8",  "Q9",  "Q10", "Q14", "Q16", "Q17", "Q19", "Q20",
                              "Q21", "Q23", "Q24", "Q25", "Q26", "Q31", "Q33", "Q34", "Q36"};
    return config;
}

}  // namespace vulnscreen
