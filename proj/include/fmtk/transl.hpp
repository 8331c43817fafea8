#pragma once

#include <map>
#include <string>
#include <vector>

#include "fmtk/logic.hpp"
#include "fmtk/structures.hpp"
#include "fmtk/treerep.hpp"

namespace fmtk {

// A (t, tau, sigma, L)-translation scheme. The domain formula is over the
// variables x1_1..x1_t; the formula for a relation R of arity r is over
// x1_1..x1_t, ..., xr_1..xr_t.
struct TranslationScheme {
    int dimension = 1;
    Vocabulary source;
    Vocabulary target;
    FormulaPtr domain;
    std::map<std::string, FormulaPtr> relationFormulas;
    Logic flavor = Logic::FO;  // MSO forces dimension 1

    void validate() const;
};

// Conventional name of the j-th component (1-based) of the i-th variable
// tuple: "x{i}_{j}" for t >= 2, plain "x{i}" for scalar schemes.
std::string scheme_variable(int i, int j, int dimension);

int scheme_rank(const TranslationScheme& xi);
bool is_quantifier_free(const TranslationScheme& xi);

// Xi applied to a structure. For vectorized schemes the id of a satisfying
// t-tuple is a canonical pairing of its component ids, so quantifier-free
// schemes map substructures to literal substructures (same ids). Tuples are
// enumerated row-major over ascending ids.
Structure apply_structure(const TranslationScheme& xi, const Structure& a, const Caps& caps = {});

// Xi applied to a formula, clause by clause. Bound variables are renamed
// canonically; a free variable v becomes v_1..v_t (v itself when t = 1).
FormulaPtr apply_formula(const TranslationScheme& xi, const FormulaPtr& phi);

// Builtin schemes over the graph vocabulary {E/2} (and the sum/copy
// vocabularies where applicable):
//   cartesian (alias: tensor), across_connect, complement, transpose,
//   line_graph, order_successor (the non-quantifier-free fixture over {le}).
TranslationScheme builtin_scheme(const std::string& name);

// Scheme text format:
//   dim 2
//   source E/2 P1/1 P2/1
//   target E/2
//   domain: (P1(x1_1) & P2(x1_2))
//   rel E: (E(x1_1, x2_1) & E(x1_2, x2_2))
TranslationScheme parse_scheme(const std::string& text);
TranslationScheme parse_scheme_file(const std::string& path);

// --- operation trees -------------------------------------------------------------

// Operation backed by a quantifier-free scheme acting directly on a
// structure, on the n-disjoint-sum of the arguments, or on the n-copy.
struct RegisteredOperation {
    std::string name;
    int arity = 1;
    enum class Kind { Direct, Sum, Copy } kind = Kind::Direct;
    TranslationScheme scheme;
    bool sumLike = true;  // dimension 1
};

// Graph-vocabulary registry: disjoint-union, cartesian, tensor,
// across-connect, complement, transpose.
const std::map<std::string, RegisteredOperation>& operation_registry();

// Operation tree: internal nodes carry registry names, leaves carry "<>".
Structure operation_tree_eval(const LabeledOrderedTree& opTree,
                              const std::vector<Structure>& leaves, const Caps& caps = {});

}  // namespace fmtk
