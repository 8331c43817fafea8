#include "fmtk/preservation.hpp"

#include <algorithm>
#include <sstream>

namespace fmtk {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Holds:
            return "holds";
        case Verdict::Violated:
            return "violated";
        case Verdict::Inconclusive:
            return "inconclusive";
    }
    return "?";
}

bool is_k_crux(const Structure& a, const std::set<Element>& c, const FormulaPtr& phi,
               const Family& family, const Caps& caps) {
    if (!family.contains(a)) throw PreconditionError("is_k_crux: structure outside the family");
    if (!evaluate_sentence(a, phi, caps))
        throw PreconditionError("is_k_crux: structure does not model the sentence");
    for (Element e : c) {
        if (!a.contains(e)) throw PreconditionError("is_k_crux: crux element outside universe");
    }
    bool crux = true;
    for_each_subuniverse(a, a.size(), c, [&](const std::set<Element>& x) {
        Structure b = induced_substructure(a, x);
        if (family.contains(b) && !evaluate_sentence(b, phi, caps)) {
            crux = false;
            return false;
        }
        return true;
    });
    return crux;
}

CruxReport find_cruxes(const Structure& a, const FormulaPtr& phi, const Family& family, int k,
                       const Caps& caps) {
    CruxReport report;
    report.structureKey = a.size() <= 8 ? canonical_key(a) : serialize_structure(a);
    // candidate sets by size then lexicographic order; only minimal cruxes
    std::vector<Element> pool = a.universe;
    std::vector<std::set<Element>> found;
    for (int size = 0; size <= k; ++size) {
        std::vector<std::size_t> pick(static_cast<std::size_t>(size));
        for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
        if (static_cast<std::size_t>(size) > pool.size()) break;
        bool more = true;
        while (more) {
            std::set<Element> c;
            for (std::size_t i : pick) c.insert(pool[i]);
            bool dominated = std::any_of(found.begin(), found.end(), [&](const auto& smaller) {
                return std::includes(c.begin(), c.end(), smaller.begin(), smaller.end());
            });
            if (!dominated && is_k_crux(a, c, phi, family, caps)) found.push_back(c);
            more = false;
            for (std::size_t i = pick.size(); i-- > 0;) {
                if (pick[i] != i + pool.size() - pick.size()) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
    report.minimalCruxes = std::move(found);
    if (!report.minimalCruxes.empty())
        report.minimalSize = report.minimalCruxes.front().size();
    // every reported crux re-verifies
    for (const auto& c : report.minimalCruxes) {
        if (!is_k_crux(a, c, phi, family, caps))
            throw VerificationError("reported crux failed re-verification");
    }
    return report;
}

PropertyCheck check_psc_k(const FamilySpec& spec, const FormulaPtr& phi, int k, const Caps& caps) {
    PropertyCheck out;
    for (const Structure& a : spec.family->enumerate(spec.sizeBound)) {
        if (!evaluate_sentence(a, phi, caps)) continue;
        bool hasCrux = false;
        // candidates by size then lex, early exit on the first crux
        for (int size = 0; size <= k && !hasCrux; ++size) {
            std::vector<Element> pool = a.universe;
            if (static_cast<std::size_t>(size) > pool.size()) break;
            std::vector<std::size_t> pick(static_cast<std::size_t>(size));
            for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
            bool more = true;
            while (more && !hasCrux) {
                std::set<Element> c;
                for (std::size_t i : pick) c.insert(pool[i]);
                if (is_k_crux(a, c, phi, *spec.family, caps)) hasCrux = true;
                more = false;
                for (std::size_t i = pick.size(); i-- > 0;) {
                    if (pick[i] != i + pool.size() - pick.size()) {
                        ++pick[i];
                        for (std::size_t j = i + 1; j < pick.size(); ++j) pick[j] = pick[j - 1] + 1;
                        more = true;
                        break;
                    }
                }
            }
        }
        if (!hasCrux) {
            out.verdict = Verdict::Violated;
            out.counterexample = a;
            out.detail = "member models the sentence but has no k-crux";
            return out;
        }
    }
    out.verdict = Verdict::Holds;
    return out;
}

bool is_k_ary_cover(const Structure& a, const std::vector<Structure>& r, int k) {
    if (r.empty()) throw PreconditionError("is_k_ary_cover: empty collection");
    for (const Structure& b : r) {
        if (!is_induced_substructure(b, a))
            throw PreconditionError("is_k_ary_cover: member is not an induced substructure");
    }
    if (k == 0) return true;
    // every subset of size <= k must lie inside some member
    bool covered = true;
    for_each_subuniverse(a, static_cast<std::size_t>(k), {}, [&](const std::set<Element>& c) {
        for (const Structure& b : r) {
            if (std::all_of(c.begin(), c.end(), [&](Element e) { return b.contains(e); }))
                return true;
        }
        covered = false;
        return false;
    });
    return covered;
}

PropertyCheck check_pce_k(const FamilySpec& spec, const FormulaPtr& phi, int k,
                          std::size_t coverCap, const Caps& caps) {
    PropertyCheck out;
    for (const Structure& a : spec.family->enumerate(spec.sizeBound)) {
        if (evaluate_sentence(a, phi, caps)) continue;
        // candidate pool: induced substructures in the family that model phi
        std::vector<Structure> pool;
        for_each_subuniverse(a, a.size(), {}, [&](const std::set<Element>& x) {
            Structure b = induced_substructure(a, x);
            if (spec.family->contains(b) && evaluate_sentence(b, phi, caps))
                pool.push_back(std::move(b));
            return true;
        });
        if (pool.empty()) continue;
        // a cover exists iff every <= k-subset lies inside some pool member
        std::vector<std::set<Element>> uncovered;
        for_each_subuniverse(a, static_cast<std::size_t>(k), {}, [&](const std::set<Element>& c) {
            bool hit = std::any_of(pool.begin(), pool.end(), [&](const Structure& b) {
                return std::all_of(c.begin(), c.end(),
                                   [&](Element e) { return b.contains(e); });
            });
            if (!hit) uncovered.push_back(c);
            return uncovered.empty();
        });
        if (!uncovered.empty()) continue;  // no cover; this member cannot violate
        // build a small witness cover greedily (largest members first)
        std::vector<std::set<Element>> targets;
        for_each_subuniverse(a, static_cast<std::size_t>(k), {}, [&](const std::set<Element>& c) {
            targets.push_back(c);
            return true;
        });
        std::vector<Structure> cover;
        std::vector<bool> done(targets.size(), false);
        std::size_t remaining = targets.size();
        while (remaining > 0 && cover.size() < coverCap) {
            std::size_t bestGain = 0;
            const Structure* best = nullptr;
            for (const Structure& b : pool) {
                std::size_t gain = 0;
                for (std::size_t i = 0; i < targets.size(); ++i) {
                    if (done[i]) continue;
                    if (std::all_of(targets[i].begin(), targets[i].end(),
                                    [&](Element e) { return b.contains(e); }))
                        ++gain;
                }
                if (gain > bestGain) {
                    bestGain = gain;
                    best = &b;
                }
            }
            if (!best) break;
            cover.push_back(*best);
            for (std::size_t i = 0; i < targets.size(); ++i) {
                if (done[i]) continue;
                if (std::all_of(targets[i].begin(), targets[i].end(),
                                [&](Element e) { return best->contains(e); })) {
                    done[i] = true;
                    --remaining;
                }
            }
        }
        if (remaining > 0) {
            out.verdict = Verdict::Inconclusive;
            out.counterexample = a;
            out.detail = "a cover exists but exceeds the cover cap";
            return out;
        }
        if (!is_k_ary_cover(a, cover, k))
            throw VerificationError("constructed cover failed re-verification");
        out.verdict = Verdict::Violated;
        out.counterexample = a;
        out.witnessCover = std::move(cover);
        out.detail = "member fails the sentence yet has a k-ary cover by models";
        return out;
    }
    out.verdict = Verdict::Holds;
    return out;
}

// --- translations ---------------------------------------------------------------------

namespace {

std::vector<std::string> fresh_variables(const FormulaPtr& phi, const std::string& prefix,
                                         int count, const std::set<std::string>& alsoAvoid = {}) {
    std::set<std::string> used = all_point_variables(phi);
    used.insert(alsoAvoid.begin(), alsoAvoid.end());
    std::vector<std::string> out;
    int next = 0;
    while (static_cast<int>(out.size()) < count) {
        std::string cand = prefix + std::to_string(++next);
        if (!used.count(cand)) {
            out.push_back(cand);
            used.insert(cand);
        }
    }
    return out;
}

}  // namespace

FormulaPtr glt_translate(const FormulaPtr& phi, int k, int p, const FormulaPtr& classSentence) {
    if (!is_sentence(phi)) throw PreconditionError("glt_translate: phi must be a sentence");
    if (!is_sentence(classSentence))
        throw PreconditionError("glt_translate: class sentence must be a sentence");
    if (k < 0 || p < 0) throw PreconditionError("glt_translate: negative parameters");
    FormulaPtr psi = f_implies(f_and(size_bound_sentence(p), classSentence), phi);
    std::set<std::string> avoid = all_point_variables(psi);
    std::vector<std::string> xs = fresh_variables(psi, "gx", k, avoid);
    for (const auto& v : xs) avoid.insert(v);
    std::vector<std::string> ys = fresh_variables(psi, "gy", p, avoid);
    std::vector<std::string> all = xs;
    all.insert(all.end(), ys.begin(), ys.end());
    FormulaPtr body = relativize(psi, all);
    for (auto it = ys.rbegin(); it != ys.rend(); ++it) body = f_forall(*it, body);
    for (auto it = xs.rbegin(); it != xs.rend(); ++it) body = f_exists(*it, body);
    return body;
}

FormulaPtr hpt_translate(const FormulaPtr& phi, int k, int p, const FamilySpec& family,
                         const Caps& caps) {
    if (!is_sentence(phi)) throw PreconditionError("hpt_translate: phi must be a sentence");
    if (k < 0 || p < 0) throw PreconditionError("hpt_translate: negative parameters");
    std::vector<FormulaPtr> disjuncts;
    std::set<std::string> seen;
    for (const Structure& b : family.family->enumerate(static_cast<std::size_t>(p))) {
        if (!evaluate_sentence(b, phi, caps)) continue;
        for (const Tuple& pins : all_tuples(b, k)) {
            PointedStructure pinned{b, pins};
            std::string key = canonical_key(pinned);
            if (!seen.insert(key).second) continue;
            disjuncts.push_back(canonical_conjunctive_query(pinned));
        }
    }
    FormulaPtr body = f_or_all(disjuncts);
    for (int i = k; i >= 1; --i) body = f_forall("x" + std::to_string(i), body);
    return body;
}

bool is_k_ary_hom_cover(const Structure& a, const std::vector<PointedStructure>& r, int k) {
    std::vector<Tuple> tuples = all_tuples(a, k);
    if (r.size() != tuples.size())
        throw PreconditionError("is_k_ary_hom_cover: expected exactly " +
                                std::to_string(tuples.size()) + " pinned structures, got " +
                                std::to_string(r.size()));
    for (std::size_t i = 0; i < tuples.size(); ++i) {
        if (!find_homomorphism(r[i], PointedStructure{a, tuples[i]})) return false;
    }
    return true;
}

// --- fixtures -----------------------------------------------------------------------

namespace {

FormulaPtr linear_order_axiom() {
    // reflexive, antisymmetric, transitive, total over `le`
    FormulaPtr refl = parse_formula("le(x, x)");
    FormulaPtr antisym = parse_formula("((le(x, y) & le(y, x)) -> x = y)");
    FormulaPtr trans = parse_formula("((le(x, y) & le(y, z)) -> le(x, z))");
    FormulaPtr total = parse_formula("(le(x, y) | le(y, x))");
    return f_forall("x",
                    f_forall("y", f_forall("z", f_and(f_and(refl, antisym), f_and(trans, total)))));
}

}  // namespace

GltCounterexample glt_counterexample(int k, int n) {
    if (k < 0 || n < 1) throw PreconditionError("glt_counterexample needs k >= 0 and n >= 1");
    GltCounterexample out;
    out.k = k;
    out.n = n;
    Element blockLen = 8LL * n + 1;
    Element total = blockLen * (k + 1);

    Structure a;
    a.vocab.relations["le"] = 2;
    a.vocab.relations["S"] = 2;
    a.vocab.relations["P"] = 1;
    a.vocab.constants = {"c", "d"};
    for (Element e = 1; e <= total; ++e) a.universe.push_back(e);
    a.relations["le"] = {};
    a.relations["S"] = {};
    a.relations["P"] = {};
    for (Element x = 1; x <= total; ++x) {
        for (Element y = x; y <= total; ++y) a.relations["le"].insert({x, y});
        if (x < total) a.relations["S"].insert({x, x + 1});
    }
    for (int i = 0; i <= k; ++i)
        a.relations["P"].insert({(4LL * n + 1) + static_cast<Element>(i) * blockLen});
    a.constants["c"] = 1;
    a.constants["d"] = total;
    a.validate();

    out.droppedMark = (4LL * n + 1) + static_cast<Element>(k) * blockLen;
    Structure b = a;
    b.relations["P"].erase(Tuple{out.droppedMark});

    // psi_k = (xi1 & xi2 & xi3) & !(xi4 & xi5)
    Vocabulary v = a.vocab;
    FormulaPtr xi1 = linear_order_axiom();
    FormulaPtr xi2 = parse_formula("forall x. (le(c, x) & le(x, d))", v);
    FormulaPtr xi3 = parse_formula(
        "forall x. forall y. (S(x, y) -> ((le(x, y) & !(x = y)) & forall z. ((le(x, z) & le(z, y)) "
        "-> (z = x | z = y))))",
        v);
    FormulaPtr xi4 = parse_formula("forall x. (!(x = d) -> exists y. S(x, y))", v);
    // xi5: at most k elements in P
    FormulaPtr xi5;
    {
        std::vector<std::string> vars;
        for (int i = 0; i <= k; ++i) vars.push_back("p" + std::to_string(i));
        std::vector<FormulaPtr> all;
        for (const auto& var : vars) all.push_back(f_rel("P", {Term::var(var)}));
        std::vector<FormulaPtr> collisions;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            for (std::size_t j = i + 1; j < vars.size(); ++j)
                collisions.push_back(f_eq(Term::var(vars[i]), Term::var(vars[j])));
        }
        FormulaPtr body = f_implies(f_and_all(all), f_or_all(collisions));
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = f_forall(*it, body);
        xi5 = body;
    }
    out.psi = f_and(f_and(f_and(xi1, xi2), xi3), f_not(f_and(xi4, xi5)));
    out.a = std::move(a);
    out.b = std::move(b);
    return out;
}

ElementMap glt_segment_partial_iso(const GltCounterexample& fixture, const Tuple& witnesses,
                                   const Tuple& tuple) {
    const Structure& a = fixture.a;
    const Structure& b = fixture.b;
    Element blockLen = 8LL * fixture.n + 1;
    Element blockStart = blockLen * fixture.k + 1;  // block k: [blockStart, blockEnd]
    Element blockEnd = blockLen * (fixture.k + 1);
    Element total = blockEnd;

    if (static_cast<int>(witnesses.size()) != fixture.k)
        throw PreconditionError("expected exactly k witnesses");
    for (Element w : witnesses) {
        if (w < 1 || w > total) throw PreconditionError("witness outside the universe");
        if (w >= blockStart && w <= blockEnd)
            throw PreconditionError("witnesses must avoid the block whose mark was dropped");
    }
    if (static_cast<int>(tuple.size()) != fixture.n)
        throw PreconditionError("expected exactly n tuple elements");
    for (Element e : tuple) {
        if (e < 1 || e > total) throw PreconditionError("tuple element outside the universe");
    }

    // Pinned elements are absorbed into the contiguous segments so that the
    // relocated segments cannot become spuriously order- or successor-related
    // to a fixed element.
    std::set<Element> pinned = {1, total};
    for (Element w : witnesses) pinned.insert(w);
    std::set<Element> domain = pinned;
    for (Element e : tuple) domain.insert(e);

    // maximal contiguous runs
    std::vector<std::pair<Element, Element>> runs;
    for (auto it = domain.begin(); it != domain.end();) {
        Element start = *it;
        Element end = start;
        ++it;
        while (it != domain.end() && *it == end + 1) {
            end = *it;
            ++it;
        }
        runs.emplace_back(start, end);
    }

    std::map<Element, Element> rho;
    // Relocation starts at (8n+1) * i_star + n + 1, pushed right past any
    // fixed run poking into the block from the left.
    Element nextSlot = blockStart + fixture.n;
    std::vector<std::pair<Element, Element>> relocatable;
    for (auto [start, end] : runs) {
        bool fixedRun = false;
        for (Element e = start; e <= end; ++e) {
            if (pinned.count(e)) fixedRun = true;
        }
        if (start < blockStart || end > blockEnd) fixedRun = true;
        if (fixedRun) {
            for (Element e = start; e <= end; ++e) rho[e] = e;
            // left-side fixed material inside the block pushes relocations right
            if (end >= blockStart && end <= (4LL * fixture.n) + static_cast<Element>(fixture.k) * blockLen)
                nextSlot = std::max(nextSlot, end + 2);
        } else {
            relocatable.emplace_back(start, end);
        }
    }
    Element mark = fixture.droppedMark;
    for (auto [start, end] : relocatable) {
        Element len = end - start + 1;
        if (nextSlot <= mark && mark < nextSlot + len) nextSlot = mark + 2;  // dodge the mark slot
        for (Element e = start; e <= end; ++e) rho[e] = nextSlot + (e - start);
        nextSlot += len + 1;  // gap of one between relocated runs
    }

    // verify as a partial isomorphism from b to a over the pinned tuple
    Tuple fromB, toA;
    for (Element e : domain) {
        fromB.push_back(e);
        toA.push_back(rho.at(e));
    }
    if (!is_partial_isomorphism(b, fromB, a, toA))
        throw VerificationError("segment recipe did not produce a partial isomorphism");
    ElementMap out;
    out.mapping = std::move(rho);
    return out;
}

FormulaPtr phi_k_paths(int k) {
    if (k < 0) throw PreconditionError("phi_k_paths: negative k");
    auto distinct = [](const std::vector<std::string>& vars) {
        std::vector<FormulaPtr> parts;
        for (std::size_t i = 0; i < vars.size(); ++i) {
            for (std::size_t j = i + 1; j < vars.size(); ++j)
                parts.push_back(f_not(f_eq(Term::var(vars[i]), Term::var(vars[j]))));
        }
        return f_and_all(parts);
    };
    auto degree0 = [](const std::string& x) {
        return f_forall("y", f_or(f_eq(Term::var("y"), Term::var(x)),
                                  f_not(f_rel("E", {Term::var(x), Term::var("y")}))));
    };
    auto degreeLe1 = [](const std::string& x) {
        FormulaPtr body = f_implies(
            f_and(f_and(f_rel("E", {Term::var(x), Term::var("y")}),
                        f_rel("E", {Term::var(x), Term::var("z")})),
                  f_and(f_not(f_eq(Term::var("y"), Term::var(x))),
                        f_not(f_eq(Term::var("z"), Term::var(x))))),
            f_eq(Term::var("y"), Term::var("z")));
        return f_forall("y", f_forall("z", body));
    };
    // clause (i): at least k vertices of degree exactly 0
    FormulaPtr isolated;
    {
        std::vector<std::string> vars;
        for (int i = 1; i <= k; ++i) vars.push_back("u" + std::to_string(i));
        std::vector<FormulaPtr> parts = {distinct(vars)};
        for (const auto& v : vars) parts.push_back(degree0(v));
        FormulaPtr body = f_and_all(parts);
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = f_exists(*it, body);
        isolated = body;
    }
    // clause (ii): at least k+1 vertices of degree at most 1
    FormulaPtr endpoints;
    {
        std::vector<std::string> vars;
        for (int i = 1; i <= k + 1; ++i) vars.push_back("v" + std::to_string(i));
        std::vector<FormulaPtr> parts = {distinct(vars)};
        for (const auto& v : vars) parts.push_back(degreeLe1(v));
        FormulaPtr body = f_and_all(parts);
        for (auto it = vars.rbegin(); it != vars.rend(); ++it) body = f_exists(*it, body);
        endpoints = body;
    }
    return f_or(isolated, endpoints);
}

}  // namespace fmtk
