#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fmtk/equivalence.hpp"
#include "fmtk/family.hpp"
#include "fmtk/logic.hpp"
#include "fmtk/structures.hpp"

namespace fmtk {

// Searches the induced substructures B of a with: B in the family, the pins
// (and constants) inside B, |B| <= bound, and rank-m type of (B, pins) equal
// to that of (a, pins). Returns the smallest, then lexicographically first,
// such B. Successes are re-verified through the generic type path.
std::optional<Structure> ebsp_condition(const Family& family, const Structure& a, const Tuple& pins,
                                        int m, std::size_t bound, Logic logic,
                                        const Caps& caps = {});

struct WitnessProfile {
    Logic logic = Logic::FO;
    int k = 0;
    int m = 0;
    std::string familyName;
    struct Sample {
        std::size_t structureSize = 0;
        std::size_t minimalBound = 0;
    };
    std::vector<Sample> samples;
    std::size_t maxBound = 0;  // empirical theta(m) over the samples
};

// Samples (structure, tuple) pairs from the family slice and binary-searches
// the minimal bound at which ebsp_condition succeeds.
WitnessProfile estimate_witness(const Family& family, std::size_t memberSizeCap, int k, int m,
                                Logic logic, int sampleCount, std::uint64_t seed,
                                const Caps& caps = {});

// The k -> 0 reduction: pins become labels, the search runs with k = 0 over
// the (k+1)-labeled family, and the result is label-stripped and re-verified
// against the original condition. Pins must be distinct.
std::optional<Structure> reduce_k_to_zero(const Family& family, const Structure& a,
                                          const Tuple& pins, int m, std::size_t bound, Logic logic,
                                          const Caps& caps = {});

struct TheoryDecision {
    bool inTheory = false;
    std::optional<Structure> certificate;  // a member refuting phi
    std::size_t checkedBound = 0;
};

// Decides phi's membership in the bounded L-theory of the family: phi holds
// in every member of size <= witness(rank(phi)).
TheoryDecision decide_bounded_theory(const Family& family,
                                     const std::function<std::size_t(int)>& witness,
                                     const FormulaPtr& phi, Logic logic, const Caps& caps = {});

}  // namespace fmtk
