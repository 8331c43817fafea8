#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fmtk/logic.hpp"
#include "fmtk/structures.hpp"

namespace fmtk {

// Canonical rank-m type of a structure-with-tuple, hash-consed inside a
// TypeContext. Two types computed in the same context are equal iff their ids
// are equal; across contexts compare fingerprints.
using TypeId = std::int32_t;

struct RankTypeNode {
    Logic logic;
    int rank;
    std::string atomicCore;
    std::vector<TypeId> pointExtensions;  // sorted, deduplicated
    std::vector<TypeId> setExtensions;    // MSO only; sorted, deduplicated

    auto operator<=>(const RankTypeNode&) const = default;
};

class TypeContext {
public:
    TypeId intern(RankTypeNode node);
    const RankTypeNode& node(TypeId id) const;
    std::size_t size() const { return nodes_.size(); }

    // Stable textual fingerprint: identical across runs, platforms and
    // contexts for structurally equal types.
    std::string fingerprint(TypeId id) const;

private:
    std::map<RankTypeNode, TypeId> table_;
    std::vector<RankTypeNode> nodes_;
    mutable std::vector<std::string> fingerprints_;
};

// tp^{L,m} of the pinned tuple: rank 0 is the atomic core; rank m adds one
// point extension per element choice and, for MSO, one set extension per
// subset choice (realized as a fresh unary predicate per nesting level).
TypeId rank_type(TypeContext& ctx, const PointedStructure& a, int m, Logic logic,
                 const Caps& caps = {});

// Type-based (m, L)-equivalence decision.
bool equivalent(const PointedStructure& a, const PointedStructure& b, int m, Logic logic,
                const Caps& caps = {});

// Independent oracle: complete minimax search of the m-round EF game. The win
// condition is the partial-isomorphism check from structures.hpp, applied to
// set-expanded structures for MSO.
bool ef_game_decide(const PointedStructure& a, const PointedStructure& b, int m, Logic logic,
                    const Caps& caps = {});

// Number of distinct rank-m types realized in the family.
std::size_t count_equivalence_classes(const std::vector<PointedStructure>& family, int m,
                                      Logic logic, const Caps& caps = {});

}  // namespace fmtk
