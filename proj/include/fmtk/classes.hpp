#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmtk/structures.hpp"
#include "fmtk/treerep.hpp"

namespace fmtk {

// --- words ---------------------------------------------------------------------

// Word as a structure: universe 1..n, reflexive total order `le`, one unary
// predicate per alphabet letter. An empty alphabet derives the letters that
// occur (comparisons need a shared alphabet, so pass one explicitly then).
Structure word_to_structure(const std::vector<std::string>& letters,
                            const std::vector<std::string>& alphabet = {});

// --- trees as structures ---------------------------------------------------------

// Ancestor order `le` (reflexive) plus unary label predicates.
Structure str_unordered(const LabeledOrderedTree& t, const std::vector<std::string>& alphabet = {});
// Adds the sibling order `sib`: reflexive linear order within each sibling
// group, incomparable across groups.
Structure str_ordered(const LabeledOrderedTree& t, const std::vector<std::string>& alphabet = {});

// Every internal node has exactly rho(label) children; leaves unconstrained.
bool check_ranked(const LabeledOrderedTree& t, const std::map<std::string, int>& rho);

// --- nested words -----------------------------------------------------------------

// Positions are 1..n; matching edges go forward, share no position, never cross.
struct NestedWord {
    std::vector<std::string> labels;               // labels[i] is the label of position i+1
    std::vector<std::pair<int, int>> matching;     // sorted by call position

    std::size_t size() const { return labels.size(); }
    void validate() const;
    bool operator==(const NestedWord&) const = default;
};

// Text format (single-character letters):
//   letters: abaabba
//   edges: (2,6) (4,5)
NestedWord parse_nested_word(const std::string& text);
NestedWord parse_nested_word_file(const std::string& path);
std::string serialize_nested_word(const NestedWord& w);

// Insert of v in u at position e; positions are renumbered 1..n afterwards.
NestedWord nested_word_insert(const NestedWord& u, int e, const NestedWord& v);
// Concatenation: insert at the last position (or v itself when u is empty).
NestedWord nested_word_concat(const NestedWord& u, const NestedWord& v);

// Tree encoding over Sigma_leaf = Sigma + pairs "x:y" and Sigma_int =
// Sigma_leaf + "@". Empty word <-> empty tree.
LabeledOrderedTree nested_word_to_tree(const NestedWord& w);
NestedWord tree_to_nested_word(const LabeledOrderedTree& t);

// (A, le, labels, match) structure.
Structure nested_word_to_structure(const NestedWord& w,
                                   const std::vector<std::string>& alphabet = {});

// --- n-partite cographs -------------------------------------------------------------

// Cotree labels: leaves "leaf:i:sigma" with part 1 <= i <= n; internal nodes
// "fn:BITS" with the symmetric n-by-n adjacency-decision table, row-major.
struct CotreeLeaf {
    int part;
    std::string sigma;
};
std::optional<CotreeLeaf> parse_cotree_leaf(const std::string& label);
std::optional<std::vector<std::vector<int>>> parse_cotree_fn(const std::string& label);
std::string cotree_leaf_label(int part, const std::string& sigma);
std::string cotree_fn_label(const std::vector<std::vector<int>>& table);

// Labeled graph on the cotree's leaves: vertices adjacent iff the function at
// their greatest common ancestor maps their parts to 1.
Structure cotree_to_graph(const LabeledOrderedTree& t,
                          const std::vector<std::string>& alphabet = {});

// --- builtin oracles ----------------------------------------------------------------

// names: words | unordered | ordered | ranked | nested | cograph.
// sigma fixes the letter alphabet; cographParts fixes n for cograph cotrees.
RepresentationOracle builtin_oracle(const std::string& name,
                                    const std::vector<std::string>& sigma = {"a", "b"},
                                    int cographParts = 2);

}  // namespace fmtk
