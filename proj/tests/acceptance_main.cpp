// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Tolerances and thresholds are pinned in code.
#include <chrono>
#include <functional>
#include <iostream>
#include <random>

#include "fmtk/classes.hpp"
#include "fmtk/ebsp.hpp"
#include "fmtk/equivalence.hpp"
#include "fmtk/family.hpp"
#include "fmtk/logic.hpp"
#include "fmtk/preservation.hpp"
#include "fmtk/structures.hpp"
#include "fmtk/transl.hpp"
#include "fmtk/treerep.hpp"
#include "test_support.hpp"

using namespace fmtk;
using namespace fmtk::testsupport;

namespace {

struct Harness {
    int failures = 0;

    void criterion(int number, const std::string& label, double budgetSeconds,
                   const std::function<void()>& body) {
        auto start = std::chrono::steady_clock::now();
        std::string error;
        try {
            body();
        } catch (const std::exception& e) {
            error = e.what();
        }
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        bool ok = error.empty() && elapsed < budgetSeconds;
        if (!ok) ++failures;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << number << ": " << label << " ("
                  << elapsed << "s of " << budgetSeconds << "s)";
        if (!error.empty()) std::cout << " -- " << error;
        if (error.empty() && elapsed >= budgetSeconds) std::cout << " -- over time budget";
        std::cout << "\n" << std::flush;
    }
};

void require(bool condition, const std::string& message) {
    if (!condition) throw std::runtime_error(message);
}

// --- random formula generator ---------------------------------------------------

FormulaPtr random_body(std::mt19937_64& rng, const Vocabulary& vocab,
                       const std::vector<std::string>& vars, int depth) {
    std::uniform_int_distribution<int> kind(0, depth > 0 ? 5 : 1);
    auto var = [&] {
        std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
        return Term::var(vars[pick(rng)]);
    };
    switch (kind(rng)) {
        case 0: {
            std::vector<std::pair<std::string, int>> rels(vocab.relations.begin(),
                                                          vocab.relations.end());
            std::uniform_int_distribution<std::size_t> pick(0, rels.size() - 1);
            auto [name, ar] = rels[pick(rng)];
            std::vector<Term> args;
            for (int i = 0; i < ar; ++i) args.push_back(var());
            return f_rel(name, args);
        }
        case 1:
            return f_eq(var(), var());
        case 2:
            return f_not(random_body(rng, vocab, vars, depth - 1));
        case 3:
            return f_and(random_body(rng, vocab, vars, depth - 1),
                         random_body(rng, vocab, vars, depth - 1));
        case 4:
            return f_or(random_body(rng, vocab, vars, depth - 1),
                        random_body(rng, vocab, vars, depth - 1));
        default:
            return f_implies(random_body(rng, vocab, vars, depth - 1),
                             random_body(rng, vocab, vars, depth - 1));
    }
}

FormulaPtr random_sentence(std::mt19937_64& rng, const Vocabulary& vocab, int quantifiers) {
    std::vector<std::string> vars;
    for (int i = 0; i < quantifiers; ++i) vars.push_back("v" + std::to_string(i));
    FormulaPtr body = random_body(rng, vocab, vars, 2);
    std::bernoulli_distribution forall(0.5);
    for (int i = quantifiers - 1; i >= 0; --i)
        body = forall(rng) ? f_forall(vars[static_cast<std::size_t>(i)], body)
                           : f_exists(vars[static_cast<std::size_t>(i)], body);
    return body;
}

// --- equivalent-pair machinery for the composition suites -------------------------

// A pool entry: some object plus its pinned structure encoding.
template <typename T>
struct PoolEntry {
    T object;
    PointedStructure encoded;
};

// First pair of pool indices whose rank-m types collide; the pair is a
// verified non-isomorphic equivalent pair for the suite.
template <typename T>
std::optional<std::pair<std::size_t, std::size_t>> find_collision(
    const std::vector<PoolEntry<T>>& pool, int m, Logic logic, const Caps& caps) {
    TypeContext ctx;
    std::map<TypeId, std::size_t> seen;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        TypeId id = rank_type(ctx, pool[i].encoded, m, logic, caps);
        auto [it, fresh] = seen.emplace(id, i);
        if (!fresh) return std::make_pair(it->second, i);
    }
    return std::nullopt;
}

}  // namespace

int main() {
    Harness h;

    // 1. Relativization oracle
    h.criterion(1, "relativization agrees with induced-substructure evaluation", 10.0, [] {
        std::mt19937_64 rng(101);
        Caps caps;
        caps.foEval = 16;
        Vocabulary plain;
        plain.relations["E"] = 2;
        plain.relations["P"] = 1;
        Vocabulary withConst = plain;
        withConst.constants = {"c"};
        for (int it = 0; it < 200; ++it) {
            const Vocabulary& vocab = it % 3 == 0 ? withConst : plain;
            Structure a = random_structure(rng, vocab, 1 + static_cast<int>(rng() % 6), 0.4);
            FormulaPtr psi = random_sentence(rng, vocab, 1 + static_cast<int>(rng() % 3));
            int k = 1 + static_cast<int>(rng() % 3);
            Tuple tuple = random_tuple(rng, a, k);
            for (const auto& [name, e] : a.constants) tuple[0] = e;  // tuple set covers constants
            std::vector<std::string> xs;
            PointEnv env;
            for (int i = 0; i < k; ++i) {
                xs.push_back("rx" + std::to_string(i + 1));
                env[xs.back()] = tuple[static_cast<std::size_t>(i)];
            }
            FormulaPtr rel = relativize(psi, xs);
            require(rank(rel) == 0, "relativization must be quantifier-free");
            std::set<Element> sub(tuple.begin(), tuple.end());
            bool lhs = evaluate(a, env, {}, rel, caps);
            bool rhs = evaluate_sentence(induced_substructure(a, sub), psi, caps);
            require(lhs == rhs, "relativized evaluation disagreed with the induced substructure");
        }
    });

    // 2. Type/game agreement
    h.criterion(2, "rank types agree with the EF game oracle", 60.0, [] {
        std::mt19937_64 rng(202);
        Caps caps;
        Vocabulary v;
        v.relations["E"] = 2;
        for (int it = 0; it < 60; ++it) {
            int m = static_cast<int>(rng() % 4);
            Structure a = random_structure(rng, v, 1 + static_cast<int>(rng() % 5), 0.4);
            Structure b = random_structure(rng, v, 1 + static_cast<int>(rng() % 5), 0.4);
            bool types = equivalent({a, {}}, {b, {}}, m, Logic::FO, caps);
            bool game = ef_game_decide({a, {}}, {b, {}}, m, Logic::FO, caps);
            require(types == game, "FO type/game mismatch");
        }
        for (int it = 0; it < 40; ++it) {
            int m = static_cast<int>(rng() % 3);
            Structure a = random_structure(rng, v, 1 + static_cast<int>(rng() % 4), 0.4);
            Structure b = random_structure(rng, v, 1 + static_cast<int>(rng() % 4), 0.4);
            bool types = equivalent({a, {}}, {b, {}}, m, Logic::MSO, caps);
            bool game = ef_game_decide({a, {}}, {b, {}}, m, Logic::MSO, caps);
            require(types == game, "MSO type/game mismatch");
        }
    });

    // 3. Path threshold facts
    h.criterion(3, "path threshold facts at rank 2", 5.0, [] {
        Caps caps;
        caps.foType = 64;
        require(equivalent(pointed(path(9)), pointed(path(10)), 2, Logic::FO, caps),
                "P_9 and P_10 must be 2-equivalent");
        require(equivalent(pointed(path(9)), pointed(path(12)), 2, Logic::FO, caps),
                "P_9 and P_12 must be 2-equivalent");
        require(!equivalent(pointed(path(1)), pointed(path(9)), 2, Logic::FO, caps),
                "P_1 and P_9 must differ at rank 2");
        require(!equivalent(pointed(path(0)), pointed(path(9)), 2, Logic::FO, caps),
                "P_0 and P_9 must differ at rank 2");
    });

    // 4. Chandra-Merlin
    h.criterion(4, "canonical queries characterize homomorphisms", 30.0, [] {
        std::mt19937_64 rng(404);
        Caps caps;
        Vocabulary v;
        v.relations["E"] = 2;
        v.relations["P"] = 1;
        for (int it = 0; it < 200; ++it) {
            Structure a = random_structure(rng, v, 1 + static_cast<int>(rng() % 4), 0.4);
            Structure b = random_structure(rng, v, 1 + static_cast<int>(rng() % 5), 0.4);
            bool models = evaluate_sentence(b, canonical_conjunctive_query({a, {}}), caps);
            bool hom = find_homomorphism({a, {}}, {b, {}}).has_value();
            require(models == hom, "canonical query disagreed with homomorphism search");
        }
    });

    // 5. GLT translation
    h.criterion(5, "GLT translation agrees exhaustively over unary structures", 10.0, [] {
        FamilyPtr unary = unary_family({"P"});
        FormulaPtr phi = parse_formula("exists x. P(x)");
        FormulaPtr chi = glt_translate(phi, 1, 3, f_true());
        Caps caps;
        caps.foEval = 16;
        int checked = 0;
        for (const Structure& s : unary->enumerate(6)) {
            require(evaluate_sentence(s, phi, caps) == evaluate_sentence(s, chi, caps),
                    "translated sentence disagreed on a unary structure");
            ++checked;
        }
        require(checked == 28, "expected 28 isomorphism classes of {P}-structures up to size 6");
    });

    // 6. PSC/PCE duality
    h.criterion(6, "PSC(k) of phi matches PCE(k) of not-phi", 120.0, [] {
        std::mt19937_64 rng(606);
        Vocabulary gv;
        gv.relations["E"] = 2;
        FamilySpec spec{undirected_graph_family(), 4};
        Caps caps;
        caps.foEval = 16;
        for (int it = 0; it < 20; ++it) {
            FormulaPtr phi = random_sentence(rng, gv, 1 + static_cast<int>(rng() % 2));
            int k = static_cast<int>(rng() % 3);
            PropertyCheck psc = check_psc_k(spec, phi, k, caps);
            PropertyCheck pce = check_pce_k(spec, f_not(phi), k, 6, caps);
            require(psc.verdict != Verdict::Inconclusive && pce.verdict != Verdict::Inconclusive,
                    "no inconclusive outcomes expected at this scale");
            require((psc.verdict == Verdict::Holds) == (pce.verdict == Verdict::Holds),
                    "duality violated");
        }
    });

    // 7. Composition suites
    h.criterion(7, "composition lemmas for joins, inserts and merges", 300.0, [] {
        std::mt19937_64 rng(707);
        Caps caps;
        caps.msoType = 12;
        caps.foType = 64;

        // ---- ordered-tree joins at m = 2 (MSO)
        {
            const int m = 2;
            std::vector<std::string> sigma = {"a"};
            // pool of pinned chains: (chain of length L, pin = deepest node)
            std::vector<PoolEntry<std::pair<LabeledOrderedTree, int>>> pinnedPool;
            for (int len = 2; len <= 7; ++len) {
                LabeledOrderedTree t = chain_tree(len, "a");
                int leaf = t.preorder().back();
                pinnedPool.push_back(
                    {{t, leaf}, {str_ordered(t, sigma), {leaf}}});
            }
            auto pinnedHit = find_collision(pinnedPool, m, Logic::MSO, caps);
            std::vector<PoolEntry<LabeledOrderedTree>> plainPool;
            for (int len = 1; len <= 7; ++len) {
                LabeledOrderedTree t = chain_tree(len, "a");
                plainPool.push_back({t, {str_ordered(t, sigma), {}}});
            }
            auto plainHit = find_collision(plainPool, m, Logic::MSO, caps);
            TypeContext ctx;
            for (int it = 0; it < 100; ++it) {
                LabeledOrderedTree t1, t2, s1, s2;
                int a1, a2;
                bool collide = pinnedHit && plainHit && it % 2 == 0;
                if (collide) {
                    t1 = pinnedPool[pinnedHit->first].object.first;
                    a1 = pinnedPool[pinnedHit->first].object.second;
                    t2 = pinnedPool[pinnedHit->second].object.first;
                    a2 = pinnedPool[pinnedHit->second].object.second;
                    s1 = plainPool[plainHit->first].object;
                    s2 = plainPool[plainHit->second].object;
                } else {
                    t1 = random_tree(rng, 2 + static_cast<int>(rng() % 3), {"a"});
                    t2 = t1;
                    auto nonRoot = t1.preorder();
                    a1 = a2 = nonRoot[1 + rng() % (nonRoot.size() - 1)];
                    s1 = random_tree(rng, 1 + static_cast<int>(rng() % 3), {"a"});
                    s2 = s1;
                }
                // verify input equivalences, then the joined outputs
                require(rank_type(ctx, {str_ordered(t1, sigma), {a1}}, m, Logic::MSO, caps) ==
                            rank_type(ctx, {str_ordered(t2, sigma), {a2}}, m, Logic::MSO, caps),
                        "ordered suite: pinned inputs not equivalent");
                require(rank_type(ctx, {str_ordered(s1, sigma), {}}, m, Logic::MSO, caps) ==
                            rank_type(ctx, {str_ordered(s2, sigma), {}}, m, Logic::MSO, caps),
                        "ordered suite: joined trees not equivalent");
                LabeledOrderedTree j1 = it % 3 == 0 ? join_left(t1, a1, s1) : join_right(t1, a1, s1);
                LabeledOrderedTree j2 = it % 3 == 0 ? join_left(t2, a2, s2) : join_right(t2, a2, s2);
                require(rank_type(ctx, {str_ordered(j1, sigma), {a1}}, m, Logic::MSO, caps) ==
                            rank_type(ctx, {str_ordered(j2, sigma), {a2}}, m, Logic::MSO, caps),
                        "ordered-tree join broke pinned equivalence");
            }
        }

        // ---- nested-word insert and concatenation at m <= 2 (MSO)
        {
            std::vector<std::string> sigma = {"a", "b"};
            TypeContext ctx;
            for (int it = 0; it < 100; ++it) {
                int m = static_cast<int>(rng() % 3);
                NestedWord u1 = random_nested_word(rng, 2 + static_cast<int>(rng() % 3), sigma);
                NestedWord v1 = random_nested_word(rng, 1 + static_cast<int>(rng() % 3), sigma);
                NestedWord u2 = u1, v2 = v1;
                int e1 = 1 + static_cast<int>(rng() % u1.size());
                int e2 = e1;
                require(rank_type(ctx, {nested_word_to_structure(u1, sigma), {e1}}, m, Logic::MSO,
                                  caps) ==
                            rank_type(ctx, {nested_word_to_structure(u2, sigma), {e2}}, m,
                                      Logic::MSO, caps),
                        "nested suite: pinned inputs not equivalent");
                NestedWord out1 = nested_word_insert(u1, e1, v1);
                NestedWord out2 = nested_word_insert(u2, e2, v2);
                require(rank_type(ctx, {nested_word_to_structure(out1, sigma), {}}, m, Logic::MSO,
                                  caps) ==
                            rank_type(ctx, {nested_word_to_structure(out2, sigma), {}}, m,
                                      Logic::MSO, caps),
                        "nested-word insert broke equivalence");
                NestedWord cat1 = nested_word_concat(u1, v1);
                NestedWord cat2 = nested_word_concat(u2, v2);
                require(rank_type(ctx, {nested_word_to_structure(cat1, sigma), {}}, m, Logic::MSO,
                                  caps) ==
                            rank_type(ctx, {nested_word_to_structure(cat2, sigma), {}}, m,
                                      Logic::MSO, caps),
                        "nested-word concatenation broke equivalence");
            }
        }

        // ---- cograph merges at m <= 2 (MSO)
        {
            std::vector<std::string> sigma = {"a", "b"};
            TypeContext ctx;
            for (int it = 0; it < 100; ++it) {
                int m = static_cast<int>(rng() % 3);
                LabeledOrderedTree t1 = random_cotree(rng, 2 + static_cast<int>(rng() % 2), 2, sigma);
                LabeledOrderedTree s1 = random_cotree(rng, 2, 2, sigma);
                // force equal root labels (merge requires it)
                if (t1.isLeaf(t1.root) || s1.isLeaf(s1.root)) continue;
                LabeledOrderedTree s1b = s1;
                s1b.nodes[s1b.root].label = t1.label(t1.root);
                LabeledOrderedTree t2 = t1, s2 = s1b;
                require(rank_type(ctx, {cotree_to_graph(s1b, sigma), {}}, m, Logic::MSO, caps) ==
                            rank_type(ctx, {cotree_to_graph(s2, sigma), {}}, m, Logic::MSO, caps),
                        "cograph suite: inputs not equivalent");
                LabeledOrderedTree m1 = merge(t1, s1b);
                LabeledOrderedTree m2 = merge(t2, s2);
                require(rank_type(ctx, {cotree_to_graph(m1, sigma), {}}, m, Logic::MSO, caps) ==
                            rank_type(ctx, {cotree_to_graph(m2, sigma), {}}, m, Logic::MSO, caps),
                        "cograph merge broke equivalence");
            }
        }

        // ---- unordered-tree joins at m <= 2 (MSO), with threshold pairs
        {
            std::vector<std::string> sigma = {"a"};
            for (int m = 0; m <= 2; ++m) {
                std::vector<PoolEntry<LabeledOrderedTree>> pool;
                for (int leaves = 1; leaves <= 6; ++leaves) {
                    LabeledOrderedTree star = LabeledOrderedTree::leaf_children(
                        "a", std::vector<std::string>(static_cast<std::size_t>(leaves), "a"));
                    pool.push_back({star, {str_unordered(star, sigma), {}}});
                }
                auto hit = find_collision(pool, m, Logic::MSO, caps);
                TypeContext ctx;
                for (int it = 0; it < 34; ++it) {
                    LabeledOrderedTree t1 = random_tree(rng, 2 + static_cast<int>(rng() % 3), {"a"});
                    LabeledOrderedTree t2 = t1;
                    auto leaves1 = t1.preorder();
                    int a1 = -1;
                    for (int id : leaves1) {
                        if (t1.isLeaf(id)) a1 = id;
                    }
                    int a2 = a1;
                    LabeledOrderedTree s1, s2;
                    if (hit && it % 2 == 0) {
                        s1 = pool[hit->first].object;
                        s2 = pool[hit->second].object;
                    } else {
                        s1 = s2 = random_tree(rng, 1 + static_cast<int>(rng() % 3), {"a"});
                    }
                    require(rank_type(ctx, {str_unordered(s1, sigma), {}}, m, Logic::MSO, caps) ==
                                rank_type(ctx, {str_unordered(s2, sigma), {}}, m, Logic::MSO, caps),
                            "unordered suite: inputs not equivalent");
                    LabeledOrderedTree j1 = join_below(t1, a1, s1);
                    LabeledOrderedTree j2 = join_below(t2, a2, s2);
                    require(rank_type(ctx, {str_unordered(j1, sigma), {a1}}, m, Logic::MSO, caps) ==
                                rank_type(ctx, {str_unordered(j2, sigma), {a2}}, m, Logic::MSO,
                                          caps),
                            "unordered-tree join broke pinned equivalence");
                }
            }
        }
    });

    // 8. Abstract tree theorem
    h.criterion(8, "reduce output embeds, stays 2-equivalent and meets the bounds", 120.0, [] {
        std::mt19937_64 rng(808);
        Caps caps;
        caps.foType = 1024;
        // random branching trees under the unordered oracle
        for (int it = 0; it < 25; ++it) {
            int size = 20 + static_cast<int>(rng() % 181);
            LabeledOrderedTree t = random_tree(rng, size, {"a", "b"});
            std::vector<std::string> sigma = {"a", "b"};
            std::vector<OracleRequest> oracles = {{builtin_oracle("unordered", sigma), 2, Logic::FO}};
            ReduceResult res = reduce(t, oracles, caps);
            Structure big = str_unordered(t, sigma);
            Structure small = str_unordered(res.tree, sigma);
            require(equivalent({small, {}}, {big, {}}, 2, Logic::FO, caps),
                    "reduced tree lost 2-equivalence");
            ElementMap identity;
            for (Element e : small.universe) identity.mapping[e] = e;
            require(is_embedding({small, {}}, {big, {}}, identity),
                    "reduced tree does not embed via the identity witness");
            require(res.stats.splices == 0 || res.tree.size() < t.size(),
                    "splices must strictly shrink the tree");
            require(res.tree.degree() <= static_cast<int>(std::max<std::size_t>(
                                              res.stats.maxSuffixTypeCount, 1)),
                    "degree exceeds the observed type count");
            require(res.tree.height() <= static_cast<int>(res.stats.maxPathTypeCount),
                    "height exceeds the observed type count");
        }
        // chains under the word oracle (jointly with the unordered oracle)
        for (int it = 0; it < 25; ++it) {
            int len = 20 + static_cast<int>(rng() % 181);
            LabeledOrderedTree t = chain_tree(len, "a");
            std::vector<std::string> sigma = {"a"};
            std::vector<OracleRequest> oracles = {{builtin_oracle("words", sigma), 2, Logic::FO},
                                                  {builtin_oracle("unordered", sigma), 2, Logic::FO}};
            ReduceResult res = reduce(t, oracles, caps);
            Structure big = str_unordered(t, sigma);
            Structure small = str_unordered(res.tree, sigma);
            require(equivalent({small, {}}, {big, {}}, 2, Logic::FO, caps),
                    "reduced word lost 2-equivalence");
            ElementMap identity;
            for (Element e : small.universe) identity.mapping[e] = e;
            require(is_embedding({small, {}}, {big, {}}, identity),
                    "reduced word does not embed via the identity witness");
            require(res.tree.height() <= static_cast<int>(res.stats.maxPathTypeCount),
                    "word height exceeds the observed type count");
        }
    });

    // 9. EBSP unary bound
    h.criterion(9, "ebsp_condition succeeds within the unary witness bound", 60.0, [] {
        std::mt19937_64 rng(909);
        FamilyPtr unary = unary_family({"P", "Q"});
        Caps caps;
        caps.foType = 4096;
        for (int it = 0; it < 100; ++it) {
            int n = 1 + static_cast<int>(rng() % 30);
            int m = static_cast<int>(rng() % 3);
            int k = static_cast<int>(rng() % 2);
            Structure a;
            a.vocab = unary->vocabulary();
            for (const auto& [name, ar] : a.vocab.relations) a.relations[name] = {};
            for (int i = 0; i < n; ++i) a.universe.push_back(i);
            for (Element e : a.universe) {
                for (const auto& [name, ar] : a.vocab.relations) {
                    if (rng() % 2) a.relations[name].insert({e});
                }
            }
            Tuple pins;
            for (int i = 0; i < k; ++i)
                pins.push_back(a.universe[rng() % a.universe.size()]);
            std::size_t bound =
                std::max<std::size_t>(static_cast<std::size_t>(m * 4 + k), pins.size());
            auto b = ebsp_condition(*unary, a, pins, m, bound, Logic::FO, caps);
            require(b.has_value(), "no witness within the paper bound m*2^|tau| + k");
        }
    });

    // 10. psi_k fixture
    h.criterion(10, "psi_1 fixture models and segment partial isomorphisms", 30.0, [] {
        GltCounterexample fx = glt_counterexample(1, 1);
        Caps caps;
        caps.foEval = 20;
        require(fx.a.size() == 18, "fixture universe must have 18 elements");
        require(fx.a.relations.at("P") == std::set<Tuple>{{5}, {14}}, "marks must be {5, 14}");
        require(evaluate_sentence(fx.a, fx.psi, caps), "A must model psi_1");
        require(!evaluate_sentence(fx.b, fx.psi, caps), "B must fail psi_1");
        require(is_weak_substructure(fx.b, fx.a), "B must be contained in A");
        std::mt19937_64 rng(1010);
        std::uniform_int_distribution<Element> witness(1, 9);
        std::uniform_int_distribution<Element> anywhere(1, 18);
        for (int it = 0; it < 100; ++it) {
            // glt_segment_partial_iso re-verifies the map and throws otherwise
            glt_segment_partial_iso(fx, {witness(rng)}, {anywhere(rng)});
        }
    });

    // 11. Transduction fundamental property
    h.criterion(11, "translation schemes relate structures and formulas", 60.0, [] {
        std::mt19937_64 rng(1111);
        Caps caps;
        caps.foEval = 20;
        std::vector<std::string> names = {"cartesian", "across_connect", "complement",
                                          "transpose",  "line_graph",     "order_successor"};
        for (int it = 0; it < 100; ++it) {
            const std::string& name = names[it % names.size()];
            TranslationScheme xi = builtin_scheme(name);
            Structure a;
            if (name == "order_successor") {
                int len = 1 + static_cast<int>(rng() % 4);
                a.vocab = xi.source;
                a.relations["le"] = {};
                for (int i = 1; i <= len; ++i) a.universe.push_back(i);
                for (int i = 1; i <= len; ++i) {
                    for (int j = i; j <= len; ++j) a.relations["le"].insert({i, j});
                }
            } else {
                a = random_structure(rng, xi.source, 1 + static_cast<int>(rng() % 4), 0.4);
            }
            FormulaPtr phi = random_sentence(rng, xi.target, 1 + static_cast<int>(rng() % 2));
            bool onImage = evaluate_sentence(apply_structure(xi, a, caps), phi, caps);
            bool onSource = evaluate_sentence(a, apply_formula(xi, phi), caps);
            require(onImage == onSource, "fundamental property failed for " + name);
            if (is_quantifier_free(xi)) {
                std::set<Element> x;
                for (Element e : a.universe) {
                    if (rng() % 2) x.insert(e);
                }
                Structure b = induced_substructure(a, x);
                require(is_induced_substructure(apply_structure(xi, b, caps),
                                                apply_structure(xi, a, caps)),
                        "quantifier-free scheme broke literal substructure inclusion");
            }
        }
    });

    // 12. Bounded theory decision
    h.criterion(12, "bounded theory decision over two-letter words", 5.0, [] {
        FamilyPtr words = word_family({"a", "b"});
        Caps caps;
        caps.foEval = 16;
        auto witness = [](int) { return static_cast<std::size_t>(3); };
        TheoryDecision yes = decide_bounded_theory(
            *words, witness, parse_formula("forall x. (a(x) | b(x))", words->vocabulary()),
            Logic::FO, caps);
        require(yes.inTheory, "label partition sentence must be accepted");
        TheoryDecision no = decide_bounded_theory(
            *words, witness, parse_formula("exists x. a(x)", words->vocabulary()), Logic::FO, caps);
        require(!no.inTheory, "exists-a must be rejected");
        require(no.certificate.has_value(), "rejection must carry a certificate");
        require(no.certificate->size() == 1 && no.certificate->relations.at("b").size() == 1,
                "certificate must be the single-letter word b");
    });

    // 13. Nested-word round-trip
    h.criterion(13, "nested-word encode/decode is the identity", 30.0, [] {
        int count = 0;
        for (const NestedWord& w : all_nested_words(6, {"a", "b"})) {
            NestedWord back = tree_to_nested_word(nested_word_to_tree(w));
            require(back == w, "round trip failed on a word of length " +
                                   std::to_string(w.size()));
            ++count;
        }
        require(count > 4000, "exhaustive enumeration looks too small");
        NestedWord fixture = parse_nested_word("letters: abaabba\nedges: (2,6) (4,5)\n");
        require(tree_to_nested_word(nested_word_to_tree(fixture)) == fixture,
                "round trip failed on the abaabba fixture");
        LabeledOrderedTree t = nested_word_to_tree(fixture);
        require(t.size() == 7, "fixture tree must have 7 nodes");
    });

    std::cout << (h.failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ")
              << (h.failures == 0 ? "" : std::to_string(h.failures)) << "\n";
    return h.failures == 0 ? 0 : 1;
}
