#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fmtk/equivalence.hpp"
#include "fmtk/structures.hpp"

namespace fmtk {

// Ordered labeled tree with stable integer node ids. Surgery operations keep
// the surviving nodes' ids, so reduction outputs are literal id-subsets of
// their inputs; only replace/merge/join introduce fresh ids for copied nodes.
struct TreeNode {
    std::string label;
    int parent = -1;  // -1 for the root
    std::vector<int> children;
};

struct LabeledOrderedTree {
    std::map<int, TreeNode> nodes;
    int root = -1;  // -1 for the empty tree
    int nextId = 0;

    bool empty() const { return root < 0; }
    std::size_t size() const { return nodes.size(); }
    const TreeNode& node(int id) const;
    bool isLeaf(int id) const { return node(id).children.empty(); }
    const std::string& label(int id) const { return node(id).label; }

    int height() const;  // of the empty tree: -1; singleton: 0
    int degree() const;  // max child count
    std::vector<int> preorder() const;
    std::vector<int> subtree_ids(int a) const;

    void validate() const;
    static LabeledOrderedTree singleton(std::string label);
    static LabeledOrderedTree leaf_children(std::string rootLabel,
                                            const std::vector<std::string>& leafLabels);
};

// Text format: one node per line, two spaces of indent per depth, children in
// order. Node ids are assigned in document (preorder) order starting at 0.
LabeledOrderedTree parse_tree(const std::string& text);
LabeledOrderedTree parse_tree_file(const std::string& path);
std::string serialize_tree(const LabeledOrderedTree& t);

// Ordered-labeled isomorphism; with ordered=false sibling order is ignored.
bool tree_isomorphic(const LabeledOrderedTree& a, const LabeledOrderedTree& b,
                     bool ordered = true);

LabeledOrderedTree subtree_at(const LabeledOrderedTree& t, int a);
LabeledOrderedTree delete_subtree(const LabeledOrderedTree& t, int a);
// Replaces the subtree rooted at non-root a with a fresh-id copy of s at the
// same sibling position; copyMap (optional) receives s-id -> new-id.
LabeledOrderedTree replace(const LabeledOrderedTree& t, int a, const LabeledOrderedTree& s,
                           std::map<int, int>* copyMap = nullptr);
// Root labels must agree and s must have at least one child (merging a lone
// root transfers nothing). Fresh ids for the copied children of s.
LabeledOrderedTree merge(const LabeledOrderedTree& t, const LabeledOrderedTree& s);
LabeledOrderedTree join_right(const LabeledOrderedTree& t, int a, const LabeledOrderedTree& s);
LabeledOrderedTree join_left(const LabeledOrderedTree& t, int a, const LabeledOrderedTree& s);
LabeledOrderedTree join_below(const LabeledOrderedTree& t, int a, const LabeledOrderedTree& s);

// --- representation oracles and the pruning engine ---------------------------

struct RepresentationOracle {
    std::string name;
    // Empty alphabet vector means unconstrained.
    std::vector<std::string> leafAlphabet;
    std::vector<std::string> internalAlphabet;
    std::function<Structure(const LabeledOrderedTree&)> str;
    bool heightFavourable = false;
    bool degreeFavourable = false;
    int minRank = 0;  // m_0: the composition lemmas hold for all m >= minRank
    bool closedUnderSubtrees = false;
    // Tree-class membership beyond the alphabet discipline (e.g. chains for
    // words, rank consistency for ranked trees). Unset means no restriction.
    std::function<bool(const LabeledOrderedTree&)> inClass;
};

bool representation_feasible(const LabeledOrderedTree& t, const RepresentationOracle& oracle);

struct OracleRequest {
    RepresentationOracle oracle;
    int m = 2;
    Logic logic = Logic::FO;
};

struct ReduceStats {
    int splices = 0;
    // Distinct type-vector counts observed on the final tree: the degree and
    // height of the output are bounded by these.
    std::size_t maxSuffixTypeCount = 0;
    std::size_t maxPathTypeCount = 0;
};

struct ReduceResult {
    LabeledOrderedTree tree;
    ReduceStats stats;
};

// Both reductions splice at type-vector collisions until none remain, then
// re-verify per oracle that Str(out) embeds into Str(in) and is m-equivalent
// to it; a failed re-check throws VerificationError.
ReduceResult degree_reduce(const LabeledOrderedTree& t, const std::vector<OracleRequest>& oracles,
                           const Caps& caps = {});
ReduceResult height_reduce(const LabeledOrderedTree& t, const std::vector<OracleRequest>& oracles,
                           const Caps& caps = {});
// height_reduce then degree_reduce, iterated to a fixpoint.
ReduceResult reduce(const LabeledOrderedTree& t, const std::vector<OracleRequest>& oracles,
                    const Caps& caps = {});

}  // namespace fmtk
