#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fmtk/logic.hpp"
#include "fmtk/structures.hpp"

namespace fmtk {

// A class of structures: explicit members or a recognizer-plus-enumerator
// generator. Enumeration is deterministic, ascending in size, and up to
// isomorphism. Membership is structural recognition, never a formula.
class Family {
public:
    virtual ~Family() = default;
    virtual std::string name() const = 0;
    virtual Vocabulary vocabulary() const = 0;
    virtual bool contains(const Structure& s) const = 0;
    virtual std::vector<Structure> enumerate(std::size_t maxSize) const = 0;
};

using FamilyPtr = std::shared_ptr<const Family>;

FamilyPtr explicit_family(std::vector<Structure> members, std::string name = "explicit");

// All finite structures over the vocabulary (loops and directedness allowed);
// isomorphism classes are deduplicated with canonical keys, so enumeration is
// capped at small sizes.
FamilyPtr all_structures_family(const Vocabulary& vocab);

// Undirected loop-free graphs over {E/2}.
FamilyPtr undirected_graph_family();

// All structures over a purely unary vocabulary.
FamilyPtr unary_family(const std::vector<std::string>& predicates);

// Non-empty words over the alphabet, as order-plus-label structures.
FamilyPtr word_family(const std::vector<std::string>& alphabet);

// Undirected loop-free graphs that are disjoint unions of at most
// maxComponents paths (each path has >= 1 vertex).
FamilyPtr path_union_family(int maxComponents);

// The labeled class S_p: expansions of base members with unary Q0..Q{p-1}
// partitioning the universe. Enumeration is unsupported (membership only).
FamilyPtr labeled_family(FamilyPtr base, int labelCount);

// Members of base that satisfy the class sentence.
FamilyPtr modulo_sentence(FamilyPtr base, FormulaPtr classSentence, Caps caps = {});

// "graphs" | "unary:P,Q" | "words:ab" | "paths:2" | "all:E/2,P/1"
FamilyPtr parse_family_spec(const std::string& spec);

// A family together with the finite size slice all checks range over.
struct FamilySpec {
    FamilyPtr family;
    std::size_t sizeBound = 0;
};

}  // namespace fmtk
