#pragma once

#include <random>
#include <string>
#include <vector>

#include "fmtk/structures.hpp"

namespace fmtk::testsupport {

inline Vocabulary graph_vocab() {
    Vocabulary v;
    v.relations["E"] = 2;
    return v;
}

// Undirected path with n edges (n + 1 vertices); P_0 is a single vertex.
inline Structure path(int edges) {
    Structure s;
    s.vocab = graph_vocab();
    s.relations["E"] = {};
    for (int i = 0; i <= edges; ++i) s.universe.push_back(i);
    for (int i = 0; i < edges; ++i) {
        s.relations["E"].insert({i, i + 1});
        s.relations["E"].insert({i + 1, i});
    }
    return s;
}

// Loop-free complete graph on n vertices.
inline Structure clique(int n) {
    Structure s;
    s.vocab = graph_vocab();
    s.relations["E"] = {};
    for (int i = 0; i < n; ++i) s.universe.push_back(i);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i != j) s.relations["E"].insert({i, j});
        }
    }
    return s;
}

inline Structure edgeless(int n) {
    Structure s;
    s.vocab = graph_vocab();
    s.relations["E"] = {};
    for (int i = 0; i < n; ++i) s.universe.push_back(i);
    return s;
}

inline Structure directed_edge() {
    Structure s;
    s.vocab = graph_vocab();
    s.universe = {1, 2};
    s.relations["E"] = {{1, 2}};
    return s;
}

inline PointedStructure pointed(Structure s, Tuple t = {}) {
    return PointedStructure{std::move(s), std::move(t)};
}

// Random structure over the given vocabulary: n elements, each possible
// tuple included with probability density.
inline Structure random_structure(std::mt19937_64& rng, const Vocabulary& vocab, int n,
                                  double density = 0.35) {
    Structure s;
    s.vocab = vocab;
    for (int i = 0; i < n; ++i) s.universe.push_back(i);
    std::bernoulli_distribution flip(density);
    for (const auto& [name, ar] : vocab.relations) {
        s.relations[name] = {};
        std::vector<Tuple> domain = all_tuples(s, ar);
        for (const Tuple& t : domain) {
            if (flip(rng)) s.relations[name].insert(t);
        }
    }
    if (!vocab.constants.empty() && n == 0)
        throw PreconditionError("random_structure: constants need a nonempty universe");
    std::uniform_int_distribution<int> pick(0, n - 1);
    for (const auto& c : vocab.constants) s.constants[c] = s.universe[pick(rng)];
    return s;
}

// Isomorphic copy with shuffled, shifted element ids.
inline Structure shuffled_copy(std::mt19937_64& rng, const Structure& s, Element shift = 100) {
    std::vector<Element> target = s.universe;
    std::shuffle(target.begin(), target.end(), rng);
    std::map<Element, Element> to;
    for (std::size_t i = 0; i < s.universe.size(); ++i) to[s.universe[i]] = target[i] + shift;
    Structure out;
    out.vocab = s.vocab;
    for (Element e : s.universe) out.universe.push_back(to[e]);
    std::sort(out.universe.begin(), out.universe.end());
    for (const auto& [name, tuples] : s.relations) {
        auto& rel = out.relations[name];
        for (const Tuple& t : tuples) {
            Tuple m;
            for (Element e : t) m.push_back(to[e]);
            rel.insert(m);
        }
    }
    for (const auto& [name, e] : s.constants) out.constants[name] = to[e];
    return out;
}

inline Tuple random_tuple(std::mt19937_64& rng, const Structure& s, int k) {
    Tuple t;
    std::uniform_int_distribution<std::size_t> pick(0, s.universe.size() - 1);
    for (int i = 0; i < k; ++i) t.push_back(s.universe[pick(rng)]);
    return t;
}

}  // namespace fmtk::testsupport

#include "fmtk/classes.hpp"
#include "fmtk/treerep.hpp"

namespace fmtk::testsupport {

// Random ordered tree with exactly `size` nodes: each new node attaches under
// a uniformly chosen existing node.
inline LabeledOrderedTree random_tree(std::mt19937_64& rng, int size,
                                      const std::vector<std::string>& labels) {
    std::uniform_int_distribution<std::size_t> pickLabel(0, labels.size() - 1);
    LabeledOrderedTree t = LabeledOrderedTree::singleton(labels[pickLabel(rng)]);
    for (int i = 1; i < size; ++i) {
        std::uniform_int_distribution<int> pickParent(0, t.nextId - 1);
        int parent = pickParent(rng);
        int id = t.nextId++;
        t.nodes[id] = TreeNode{labels[pickLabel(rng)], parent, {}};
        t.nodes[parent].children.push_back(id);
    }
    return t;
}

inline LabeledOrderedTree chain_tree(int length, const std::string& label) {
    LabeledOrderedTree t = LabeledOrderedTree::singleton(label);
    int prev = 0;
    for (int i = 1; i < length; ++i) {
        int id = t.nextId++;
        t.nodes[id] = TreeNode{label, prev, {}};
        t.nodes[prev].children.push_back(id);
        prev = id;
    }
    return t;
}

// All non-crossing forward matchings on positions 1..n with no shared slots.
inline void all_matchings_rec(int from, int to, std::vector<std::pair<int, int>>& current,
                              std::vector<std::vector<std::pair<int, int>>>& out) {
    if (from > to) {
        out.push_back(current);
        return;
    }
    all_matchings_rec(from + 1, to, current, out);  // `from` unmatched
    for (int q = from + 1; q <= to; ++q) {
        current.emplace_back(from, q);
        // inner and outer parts stay independent: enumerate inner then
        // continue after q via a nested call structure
        std::vector<std::vector<std::pair<int, int>>> inner;
        std::vector<std::pair<int, int>> innerCur;
        all_matchings_rec(from + 1, q - 1, innerCur, inner);
        for (const auto& in : inner) {
            std::size_t mark = current.size();
            for (auto e : in) current.push_back(e);
            all_matchings_rec(q + 1, to, current, out);
            current.resize(mark);
        }
        current.pop_back();
    }
}

inline std::vector<NestedWord> all_nested_words(int maxLen, const std::vector<std::string>& sigma) {
    std::vector<NestedWord> out;
    for (int n = 0; n <= maxLen; ++n) {
        std::vector<std::vector<std::pair<int, int>>> matchings;
        std::vector<std::pair<int, int>> cur;
        all_matchings_rec(1, n, cur, matchings);
        std::vector<std::size_t> word(static_cast<std::size_t>(n), 0);
        while (true) {
            for (auto& matching : matchings) {
                NestedWord w;
                for (std::size_t i : word) w.labels.push_back(sigma[i]);
                w.matching = matching;
                std::sort(w.matching.begin(), w.matching.end());
                w.validate();
                out.push_back(std::move(w));
            }
            int pos = n - 1;
            while (pos >= 0) {
                if (++word[static_cast<std::size_t>(pos)] < sigma.size()) break;
                word[static_cast<std::size_t>(pos)] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
    return out;
}

inline NestedWord random_nested_word(std::mt19937_64& rng, int len,
                                     const std::vector<std::string>& sigma) {
    NestedWord w;
    std::uniform_int_distribution<std::size_t> pickLabel(0, sigma.size() - 1);
    for (int i = 0; i < len; ++i) w.labels.push_back(sigma[pickLabel(rng)]);
    // random non-crossing matching: repeatedly wrap a random free interval
    std::vector<int> free;
    for (int i = 1; i <= len; ++i) free.push_back(i);
    std::bernoulli_distribution again(0.6);
    while (free.size() >= 2 && again(rng)) {
        std::uniform_int_distribution<std::size_t> pick(0, free.size() - 2);
        std::size_t ci = pick(rng);
        // match free[ci] with the next free position to stay non-crossing
        w.matching.emplace_back(free[ci], free[ci + 1]);
        free.erase(free.begin() + static_cast<long>(ci), free.begin() + static_cast<long>(ci) + 2);
    }
    std::sort(w.matching.begin(), w.matching.end());
    w.validate();
    return w;
}

// Random cotree with the given number of leaves over parts 1..n and sigma.
inline LabeledOrderedTree random_cotree(std::mt19937_64& rng, int leafCount, int parts,
                                        const std::vector<std::string>& sigma) {
    std::uniform_int_distribution<int> pickPart(1, parts);
    std::uniform_int_distribution<std::size_t> pickSigma(0, sigma.size() - 1);
    std::uniform_int_distribution<int> bit(0, 1);
    auto randomFn = [&] {
        std::vector<std::vector<int>> table(static_cast<std::size_t>(parts),
                                            std::vector<int>(static_cast<std::size_t>(parts)));
        for (int i = 0; i < parts; ++i) {
            for (int j = i; j < parts; ++j) {
                int b = bit(rng);
                table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = b;
                table[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = b;
            }
        }
        return cotree_fn_label(table);
    };
    auto leafLabel = [&] { return cotree_leaf_label(pickPart(rng), sigma[pickSigma(rng)]); };
    if (leafCount == 1) return LabeledOrderedTree::singleton(leafLabel());
    LabeledOrderedTree t = LabeledOrderedTree::singleton(randomFn());
    std::vector<int> internals = {0};
    int leaves = 0;
    while (leaves < leafCount) {
        std::uniform_int_distribution<std::size_t> pickInternal(0, internals.size() - 1);
        int parent = internals[pickInternal(rng)];
        int id = t.nextId++;
        std::bernoulli_distribution internal(0.25);
        // keep at least two children per internal node eventually; bias to leaves
        if (internal(rng) && leaves + 2 < leafCount) {
            t.nodes[id] = TreeNode{randomFn(), parent, {}};
            internals.push_back(id);
        } else {
            t.nodes[id] = TreeNode{leafLabel(), parent, {}};
            ++leaves;
        }
        t.nodes[parent].children.push_back(id);
    }
    // prune childless internal nodes (they would parse as malformed leaves)
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto it = t.nodes.begin(); it != t.nodes.end(); ++it) {
            if (it->second.children.empty() && !parse_cotree_leaf(it->second.label) &&
                it->first != t.root) {
                int id = it->first;
                auto& siblings = t.nodes[it->second.parent].children;
                siblings.erase(std::find(siblings.begin(), siblings.end(), id));
                t.nodes.erase(it);
                changed = true;
                break;
            }
        }
    }
    t.validate();
    return t;
}

}  // namespace fmtk::testsupport
