#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmtk/errors.hpp"

namespace fmtk {

// Element ids are non-negative integers. 64-bit because translation schemes
// of dimension t >= 2 encode t-tuples of ids into single ids.
using Element = std::int64_t;
using Tuple = std::vector<Element>;

struct Vocabulary {
    std::map<std::string, int> relations;  // name -> arity (>= 1)
    std::vector<std::string> constants;

    bool hasRelation(const std::string& name) const { return relations.count(name) != 0; }
    bool hasConstant(const std::string& name) const;
    int arity(const std::string& relation) const;

    // Throws PreconditionError on duplicate/empty names or arity < 1.
    void validate() const;

    bool operator==(const Vocabulary&) const = default;
};

// A finite relational structure with optional constants. Universe ids are
// kept sorted; relation interpretations are sets of tuples of the declared
// arity; every declared symbol has an entry (possibly empty for relations).
struct Structure {
    Vocabulary vocab;
    std::vector<Element> universe;
    std::map<std::string, std::set<Tuple>> relations;
    std::map<std::string, Element> constants;

    std::size_t size() const { return universe.size(); }
    bool contains(Element e) const;
    bool holds(const std::string& relation, const Tuple& args) const;
    Element constant(const std::string& name) const;

    void validate() const;

    bool operator==(const Structure&) const = default;
    auto operator<=>(const Structure&) const = default;
};

// (A, a-bar): a structure with a distinguished tuple. Components may repeat.
struct PointedStructure {
    Structure structure;
    Tuple tuple;

    void validate() const;
    bool operator==(const PointedStructure&) const = default;
};

struct ElementMap {
    std::map<Element, Element> mapping;

    Element at(Element e) const;
    bool operator==(const ElementMap&) const = default;
};

// --- text format -----------------------------------------------------------
//
//   # comment
//   vocab E/2 P/1 c/const
//   universe 1 2 3
//   E 1 2
//   c = 1
//
// Canonical serialization sorts the universe, the tuples of every relation,
// and emits vocabulary entries relations-then-constants, each alphabetically.

Structure parse_structure(const std::string& text);
Structure parse_structure_file(const std::string& path);
std::string serialize_structure(const Structure& s);

// --- substructures ----------------------------------------------------------

Structure induced_substructure(const Structure& a, const std::set<Element>& x);

// All induced substructures on sets X with mustContain <= X <= universe and
// |X| <= maxSize, ordered by |X| then lexicographically on the sorted sets.
std::vector<Structure> enumerate_substructures(const Structure& a, std::size_t maxSize,
                                               const std::set<Element>& mustContain);

// Streaming variant; visit returns false to stop early.
void for_each_subuniverse(const Structure& a, std::size_t maxSize, const std::set<Element>& mustContain,
                          const std::function<bool(const std::set<Element>&)>& visit);

// True iff b equals the substructure of a induced by universe(b).
bool is_induced_substructure(const Structure& b, const Structure& a);

// Universe/relations/constants contained pointwise (not necessarily induced).
bool is_weak_substructure(const Structure& b, const Structure& a);

// --- embeddings and homomorphisms -------------------------------------------

bool is_embedding(const PointedStructure& a, const PointedStructure& b, const ElementMap& h);
bool is_homomorphism(const PointedStructure& a, const PointedStructure& b, const ElementMap& h);

// Complete backtracking search, most-constrained element first, candidates in
// ascending order; the returned witness is deterministic.
std::optional<ElementMap> find_embedding(const PointedStructure& a, const PointedStructure& b);
std::optional<ElementMap> find_homomorphism(const PointedStructure& a, const PointedStructure& b);

// Smallest (i, j), 1-based, with i < j and seq[i] embeddable in seq[j].
struct QuasiOrderHit {
    std::size_t first = 0;
    std::size_t second = 0;
    ElementMap witness;
};
std::optional<QuasiOrderHit> embedding_quasi_order_probe(const std::vector<PointedStructure>& seq);

// --- constructions -----------------------------------------------------------

Structure disjoint_union(const Structure& a, const Structure& b);
Structure n_disjoint_sum(const std::vector<PointedStructure>& parts);
Structure n_copy(const Structure& a, const std::vector<Tuple>& tuples);
Structure cartesian_product(const Structure& a, const Structure& b);
Structure underlying_graph(const Structure& a);
Structure label_expand(const Structure& a, const std::map<Element, int>& labeling, int labelCount);
Structure tuple_pin_expand(const Structure& a, const Tuple& pins);

// Vocabulary of the n-disjoint sum / n-copy of structures over tau, with the
// given pinned-tuple lengths. Exposed for the translation-scheme registry.
Vocabulary disjoint_sum_vocabulary(const Vocabulary& tau, const std::vector<int>& tupleLengths);
Vocabulary copy_vocabulary(const Vocabulary& tau, const std::vector<int>& tupleLengths);

// --- misc --------------------------------------------------------------------

// Partial-isomorphism test on (tupleA + constants, tupleB + constants).
bool is_partial_isomorphism(const Structure& a, const Tuple& tupleA, const Structure& b,
                            const Tuple& tupleB);

// Canonical key under isomorphism (brute force over universe permutations;
// throws CapError when |universe| > permCap). Pins are relabeled alongside.
std::string canonical_key(const Structure& s, std::size_t permCap = 8);
std::string canonical_key(const PointedStructure& s, std::size_t permCap = 8);

// Deterministic enumeration of all k-tuples over the universe, row-major on
// ascending ids.
std::vector<Tuple> all_tuples(const Structure& s, int k);

}  // namespace fmtk
