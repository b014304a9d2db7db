#pragma once

#include <cstddef>
#include <string_view>

#include "dal/numerics.hpp"

namespace dal {

/// Who supplied an example's label. Seed examples form the initial
/// annotated set and are accounted for separately from oracle queries.
enum class Source { Seed, Oracle, Auto };

constexpr std::string_view to_string(Source s) {
    switch (s) {
        case Source::Seed: return "seed";
        case Source::Oracle: return "oracle";
        case Source::Auto: return "auto";
    }
    return "?";
}

/// One element of the labeled set.
///
/// `ground_truth` exists only so the simulation can play the annotator and
/// measure label noise. Training, labeling decisions and acquisition read
/// `x` and `label` only.
struct LabeledExample {
    Vector x;
    std::size_t label = 0;
    Source source = Source::Seed;
    std::size_t cycle_added = 0;
    std::size_t ground_truth = 0;
};

}  // namespace dal
