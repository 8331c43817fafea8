#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmtk/family.hpp"
#include "fmtk/logic.hpp"
#include "fmtk/structures.hpp"

namespace fmtk {

// True iff every induced substructure of a that contains c and belongs to the
// family models phi. Requires a in the family and a |= phi.
bool is_k_crux(const Structure& a, const std::set<Element>& c, const FormulaPtr& phi,
               const Family& family, const Caps& caps = {});

struct CruxReport {
    std::string structureKey;
    std::vector<std::set<Element>> minimalCruxes;  // ascending size, then lexicographic
    std::optional<std::size_t> minimalSize;        // absent: no crux of size <= k
};

CruxReport find_cruxes(const Structure& a, const FormulaPtr& phi, const Family& family, int k,
                       const Caps& caps = {});

enum class Verdict { Holds, Violated, Inconclusive };
std::string to_string(Verdict v);

struct PropertyCheck {
    Verdict verdict = Verdict::Holds;
    std::optional<Structure> counterexample;
    std::vector<Structure> witnessCover;  // PCE violations: the covering R
    std::string detail;
};

// phi is PSC(k) over the family slice iff every member modeling phi has a
// k-crux. Exhaustive over the slice; two-valued.
PropertyCheck check_psc_k(const FamilySpec& family, const FormulaPtr& phi, int k,
                          const Caps& caps = {});

// Extension and coverage conditions of a k-ary cover; members of r must be
// induced substructures of a (checked, error otherwise).
bool is_k_ary_cover(const Structure& a, const std::vector<Structure>& r, int k);

// Searches, for every member A with A |/= phi, for a k-ary cover of A by
// induced substructures in the family that model phi. A found cover violates
// PCE(k); greedy cover construction beyond coverCap reports Inconclusive.
PropertyCheck check_pce_k(const FamilySpec& family, const FormulaPtr& phi, int k,
                          std::size_t coverCap, const Caps& caps = {});

// The effective GLT(k) sentence: exists^k x forall^p y of
// ((size_bound(p) & classSentence) -> phi) relativized to x,y.
FormulaPtr glt_translate(const FormulaPtr& phi, int k, int p, const FormulaPtr& classSentence);

// The effective HPT sentence: forall^k x of the disjunction of the canonical
// conjunctive queries of Mod(family^k, phi, p), deduplicated up to pinned
// isomorphism.
FormulaPtr hpt_translate(const FormulaPtr& phi, int k, int p, const FamilySpec& family,
                         const Caps& caps = {});

// |r| must equal the number of k-tuples of a (row-major enumeration); true
// iff each pinned member maps homomorphically onto its tuple.
bool is_k_ary_hom_cover(const Structure& a, const std::vector<PointedStructure>& r, int k);

// --- counterexample fixtures -----------------------------------------------------

struct GltCounterexample {
    Structure a;               // models psi_k
    Structure b;               // weak substructure of a, fails psi_k
    FormulaPtr psi;            // psi_k
    int k = 0;
    int n = 0;
    Element droppedMark = 0;   // the P-element removed from b (block k)
};

// The linear-order fixture: universe {1..(8n+1)(k+1)}, marks
// P = {(4n+1) + i(8n+1)}, constants c = 1 and d = max; b drops the last mark.
GltCounterexample glt_counterexample(int k, int n);

// The contiguous-segment partial isomorphism from the fixture's proof:
// witnesses must avoid block k (the block whose mark b drops). The returned
// map is verified as a partial isomorphism from b to a; hard error otherwise.
ElementMap glt_segment_partial_iso(const GltCounterexample& fixture, const Tuple& witnesses,
                                   const Tuple& tuple);

// "at least k isolated vertices, or at least k+1 vertices of degree <= 1".
FormulaPtr phi_k_paths(int k);

}  // namespace fmtk
