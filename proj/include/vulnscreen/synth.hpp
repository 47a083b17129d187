#ifndef VULNSCREEN_SYNTH_HPP
#define VULNSCREEN_SYNTH_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "vulnscreen/dataset.hpp"
#include "vulnscreen/schema.hpp"

namespace vulnscreen {

// Seeded generator of survey-shaped datasets with known ground truth.
//
// Noise features draw categories uniformly regardless of class. An
// informative feature with m categories draws, with probability delta, the
// extreme code (0 for class 0, m-1 for class 1) and otherwise a uniform
// category. The total-variation distance between the two class-conditional
// distributions is then exactly delta, for any delta in [0, 1). Draw order
// is fixed in docs/formats.md so output is byte-identical everywhere.
struct SynthConfig {
    Index n = 486;
    Scalar positive_fraction = 0.5;
    std::vector<std::string> informative_ids;
    Scalar delta = 0.6;
    std::uint64_t seed = 42;
};

Dataset generate(const SurveySchema& schema, const SynthConfig& config);

// n = 486, balanced classes, 18 informative questions, delta 0.6, seed 42.
// Pairs with the default 36-question schema.
SynthConfig paper_shaped_preset();

}  // namespace vulnscreen

#endif  // VULNSCREEN_SYNTH_HPP
