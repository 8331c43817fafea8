#include "fmtk/classes.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

namespace fmtk {

namespace {

std::vector<std::string> derive_alphabet(std::vector<std::string> seen,
                                         const std::vector<std::string>& provided) {
    if (!provided.empty()) return provided;
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    return seen;
}

void add_label_predicates(Structure& s, const std::vector<std::string>& alphabet) {
    for (const auto& letter : alphabet) {
        if (s.vocab.hasRelation(letter) || s.vocab.hasConstant(letter))
            throw PreconditionError("label predicate clashes with symbol " + letter);
        s.vocab.relations[letter] = 1;
        s.relations[letter] = {};
    }
}

}  // namespace

Structure word_to_structure(const std::vector<std::string>& letters,
                            const std::vector<std::string>& alphabet) {
    std::vector<std::string> sigma = derive_alphabet(letters, alphabet);
    Structure s;
    s.vocab.relations["le"] = 2;
    s.relations["le"] = {};
    add_label_predicates(s, sigma);
    for (std::size_t i = 1; i <= letters.size(); ++i) s.universe.push_back(static_cast<Element>(i));
    for (std::size_t i = 1; i <= letters.size(); ++i) {
        for (std::size_t j = i; j <= letters.size(); ++j)
            s.relations["le"].insert({static_cast<Element>(i), static_cast<Element>(j)});
        const std::string& l = letters[i - 1];
        if (std::find(sigma.begin(), sigma.end(), l) == sigma.end())
            throw PreconditionError("letter '" + l + "' outside the alphabet");
        s.relations[l].insert({static_cast<Element>(i)});
    }
    return s;
}

namespace {

Structure str_tree_common(const LabeledOrderedTree& t, const std::vector<std::string>& alphabet,
                          bool withSiblingOrder) {
    t.validate();
    std::vector<std::string> seen;
    for (const auto& [id, n] : t.nodes) seen.push_back(n.label);
    std::vector<std::string> sigma = derive_alphabet(std::move(seen), alphabet);

    Structure s;
    s.vocab.relations["le"] = 2;
    s.relations["le"] = {};
    if (withSiblingOrder) {
        s.vocab.relations["sib"] = 2;
        s.relations["sib"] = {};
    }
    add_label_predicates(s, sigma);
    for (const auto& [id, n] : t.nodes) {
        s.universe.push_back(id);
        if (std::find(sigma.begin(), sigma.end(), n.label) == sigma.end())
            throw PreconditionError("tree label '" + n.label + "' outside the alphabet");
        s.relations[n.label].insert({id});
    }
    std::sort(s.universe.begin(), s.universe.end());
    // ancestor-or-self order
    std::function<void(int, std::vector<int>&)> walk = [&](int id, std::vector<int>& ancestors) {
        for (int anc : ancestors) s.relations["le"].insert({anc, id});
        s.relations["le"].insert({id, id});
        ancestors.push_back(id);
        for (int c : t.node(id).children) walk(c, ancestors);
        ancestors.pop_back();
    };
    if (!t.empty()) {
        std::vector<int> ancestors;
        walk(t.root, ancestors);
    }
    if (withSiblingOrder) {
        for (const auto& [id, n] : t.nodes) {
            for (std::size_t i = 0; i < n.children.size(); ++i) {
                for (std::size_t j = i; j < n.children.size(); ++j)
                    s.relations["sib"].insert({n.children[i], n.children[j]});
            }
        }
    }
    return s;
}

}  // namespace

Structure str_unordered(const LabeledOrderedTree& t, const std::vector<std::string>& alphabet) {
    return str_tree_common(t, alphabet, /*withSiblingOrder=*/false);
}

Structure str_ordered(const LabeledOrderedTree& t, const std::vector<std::string>& alphabet) {
    return str_tree_common(t, alphabet, /*withSiblingOrder=*/true);
}

bool check_ranked(const LabeledOrderedTree& t, const std::map<std::string, int>& rho) {
    for (const auto& [id, n] : t.nodes) {
        if (n.children.empty()) continue;
        auto it = rho.find(n.label);
        if (it == rho.end()) return false;
        if (static_cast<int>(n.children.size()) != it->second) return false;
    }
    return true;
}

// --- nested words -----------------------------------------------------------------

void NestedWord::validate() const {
    int n = static_cast<int>(labels.size());
    std::set<int> calls, returns;
    for (auto [i, j] : matching) {
        if (i < 1 || j < 1 || i > n || j > n)
            throw PreconditionError("nesting edge position out of range");
        if (i >= j) throw PreconditionError("nesting edges must go forward");
        if (!calls.insert(i).second) throw PreconditionError("position shared by two call slots");
        if (!returns.insert(j).second)
            throw PreconditionError("position shared by two return slots");
    }
    for (auto [i1, j1] : matching) {
        for (auto [i2, j2] : matching) {
            if (i1 < i2 && i2 <= j1 && j1 < j2)
                throw PreconditionError("nesting edges cross");
        }
    }
    if (!std::is_sorted(matching.begin(), matching.end()))
        throw PreconditionError("matching must be sorted by call position");
}

NestedWord parse_nested_word(const std::string& text) {
    NestedWord w;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool sawLetters = false;
    while (std::getline(in, raw)) {
        ++line;
        std::istringstream ls(raw);
        std::string head;
        ls >> head;
        if (head.empty() || head[0] == '#') continue;
        if (head == "letters:") {
            std::string word;
            ls >> word;
            for (char c : word) w.labels.push_back(std::string(1, c));
            sawLetters = true;
        } else if (head == "edges:") {
            std::string pair;
            while (ls >> pair) {
                int i, j;
                if (std::sscanf(pair.c_str(), "(%d,%d)", &i, &j) != 2)
                    throw ParseError("expected edge of the form (i,j), got '" + pair + "'", line, 1);
                w.matching.emplace_back(i, j);
            }
        } else {
            throw ParseError("expected 'letters:' or 'edges:' line", line, 1);
        }
    }
    if (!sawLetters) throw ParseError("missing 'letters:' line", line, 1);
    std::sort(w.matching.begin(), w.matching.end());
    w.validate();
    return w;
}

NestedWord parse_nested_word_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_nested_word(buf.str());
}

std::string serialize_nested_word(const NestedWord& w) {
    std::ostringstream out;
    out << "letters: ";
    for (const auto& l : w.labels) {
        if (l.size() != 1)
            throw PreconditionError("text format supports single-character letters only");
        out << l;
    }
    out << "\nedges:";
    for (auto [i, j] : w.matching) out << " (" << i << ',' << j << ')';
    out << '\n';
    return out.str();
}

NestedWord nested_word_insert(const NestedWord& u, int e, const NestedWord& v) {
    u.validate();
    v.validate();
    if (e < 1 || e > static_cast<int>(u.size()))
        throw PreconditionError("insert position outside the word");
    NestedWord out;
    int shift = static_cast<int>(v.size());
    auto mapU = [&](int p) { return p <= e ? p : p + shift; };
    for (int p = 1; p <= e; ++p) out.labels.push_back(u.labels[static_cast<std::size_t>(p - 1)]);
    for (const auto& l : v.labels) out.labels.push_back(l);
    for (int p = e + 1; p <= static_cast<int>(u.size()); ++p)
        out.labels.push_back(u.labels[static_cast<std::size_t>(p - 1)]);
    for (auto [i, j] : u.matching) out.matching.emplace_back(mapU(i), mapU(j));
    for (auto [i, j] : v.matching) out.matching.emplace_back(i + e, j + e);
    std::sort(out.matching.begin(), out.matching.end());
    out.validate();
    return out;
}

NestedWord nested_word_concat(const NestedWord& u, const NestedWord& v) {
    if (u.size() == 0) return v;
    return nested_word_insert(u, static_cast<int>(u.size()), v);
}

namespace {

constexpr const char* kConcatLabel = "@";

std::string pair_label(const std::string& a, const std::string& b) { return a + ":" + b; }

std::optional<std::pair<std::string, std::string>> split_pair_label(const std::string& label) {
    auto colon = label.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 >= label.size()) return std::nullopt;
    std::string a = label.substr(0, colon);
    std::string b = label.substr(colon + 1);
    if (b.find(':') != std::string::npos) return std::nullopt;
    return std::make_pair(a, b);
}

NestedWord sub_word(const NestedWord& w, int from, int to) {
    NestedWord out;
    for (int p = from; p <= to; ++p) out.labels.push_back(w.labels[static_cast<std::size_t>(p - 1)]);
    for (auto [i, j] : w.matching) {
        if (i >= from && j <= to) out.matching.emplace_back(i - from + 1, j - from + 1);
    }
    std::sort(out.matching.begin(), out.matching.end());
    return out;
}

// Attach a fresh-id copy of `sub` under `parent` in `into`, or make it the
// root when parent < 0. `sub` is never empty here.
void graft(LabeledOrderedTree& into, const LabeledOrderedTree& sub, int parent) {
    std::function<int(int, int)> rec = [&](int sid, int par) {
        int id = into.nextId++;
        into.nodes[id] = TreeNode{sub.label(sid), par, {}};
        for (int c : sub.node(sid).children) into.nodes[id].children.push_back(rec(c, id));
        return id;
    };
    int top = rec(sub.root, parent);
    if (parent < 0)
        into.root = top;
    else
        into.nodes[parent].children.push_back(top);
}

}  // namespace

LabeledOrderedTree nested_word_to_tree(const NestedWord& w) {
    w.validate();
    if (w.size() == 0) return LabeledOrderedTree{};

    std::function<LabeledOrderedTree(const NestedWord&)> encode =
        [&](const NestedWord& word) -> LabeledOrderedTree {
        if (word.size() == 0) return LabeledOrderedTree{};
        // Maximal type-A factors: [q, match(q)] when q opens an edge, [q, q]
        // otherwise; non-crossing keeps each factor self-contained.
        std::map<int, int> c2r;
        for (auto [i, j] : word.matching) c2r[i] = j;
        std::vector<std::pair<int, int>> fs;
        int q = 1;
        int len = static_cast<int>(word.size());
        while (q <= len) {
            auto it = c2r.find(q);
            int end = it == c2r.end() ? q : it->second;
            fs.emplace_back(q, end);
            q = end + 1;
        }
        if (fs.size() == 1) {
            auto [from, to] = fs[0];
            if (from == to) return LabeledOrderedTree::singleton(word.labels[static_cast<std::size_t>(from - 1)]);
            // from ~> to wraps the interior
            NestedWord inner = sub_word(word, from + 1, to - 1);
            LabeledOrderedTree t = LabeledOrderedTree::singleton(
                pair_label(word.labels[static_cast<std::size_t>(from - 1)],
                           word.labels[static_cast<std::size_t>(to - 1)]));
            if (inner.size() > 0) {
                LabeledOrderedTree innerTree = encode(inner);
                graft(t, innerTree, t.root);
            }
            return t;
        }
        LabeledOrderedTree t = LabeledOrderedTree::singleton(kConcatLabel);
        for (auto [from, to] : fs) {
            LabeledOrderedTree sub = encode(sub_word(word, from, to));
            graft(t, sub, t.root);
        }
        return t;
    };
    return encode(w);
}

NestedWord tree_to_nested_word(const LabeledOrderedTree& t) {
    if (t.empty()) return NestedWord{};
    t.validate();
    std::function<NestedWord(int)> decode = [&](int id) -> NestedWord {
        const TreeNode& n = t.node(id);
        const std::string& label = n.label;
        if (n.children.empty()) {
            if (label == kConcatLabel) return NestedWord{};  // empty concatenation
            if (auto pair = split_pair_label(label)) {
                NestedWord w;
                w.labels = {pair->first, pair->second};
                w.matching = {{1, 2}};
                return w;
            }
            NestedWord w;
            w.labels = {label};
            return w;
        }
        NestedWord v;
        for (int c : n.children) v = nested_word_concat(v, decode(c));
        if (label == kConcatLabel) return v;
        auto pair = split_pair_label(label);
        if (!pair)
            throw PreconditionError("internal node label '" + label +
                                    "' is neither a pair nor the concatenation symbol");
        NestedWord wrapper;
        wrapper.labels = {pair->first, pair->second};
        wrapper.matching = {{1, 2}};
        return nested_word_insert(wrapper, 1, v);
    };
    return decode(t.root);
}

Structure nested_word_to_structure(const NestedWord& w, const std::vector<std::string>& alphabet) {
    w.validate();
    std::vector<std::string> sigma = derive_alphabet(w.labels, alphabet);
    Structure s;
    s.vocab.relations["le"] = 2;
    s.vocab.relations["match"] = 2;
    s.relations["le"] = {};
    s.relations["match"] = {};
    add_label_predicates(s, sigma);
    int n = static_cast<int>(w.size());
    for (int i = 1; i <= n; ++i) s.universe.push_back(i);
    for (int i = 1; i <= n; ++i) {
        for (int j = i; j <= n; ++j) s.relations["le"].insert({i, j});
        const std::string& l = w.labels[static_cast<std::size_t>(i - 1)];
        if (std::find(sigma.begin(), sigma.end(), l) == sigma.end())
            throw PreconditionError("letter '" + l + "' outside the alphabet");
        s.relations[l].insert({i});
    }
    for (auto [i, j] : w.matching) s.relations["match"].insert({i, j});
    return s;
}

// --- cotrees -----------------------------------------------------------------------

std::optional<CotreeLeaf> parse_cotree_leaf(const std::string& label) {
    if (label.rfind("leaf:", 0) != 0) return std::nullopt;
    auto second = label.find(':', 5);
    if (second == std::string::npos) return std::nullopt;
    std::string num = label.substr(5, second - 5);
    std::string sigma = label.substr(second + 1);
    if (num.empty() || sigma.empty()) return std::nullopt;
    for (char c : num) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    return CotreeLeaf{std::stoi(num), sigma};
}

std::optional<std::vector<std::vector<int>>> parse_cotree_fn(const std::string& label) {
    if (label.rfind("fn:", 0) != 0) return std::nullopt;
    std::string bits = label.substr(3);
    int n = 1;
    while (n * n < static_cast<int>(bits.size())) ++n;
    if (n * n != static_cast<int>(bits.size()) || bits.empty()) return std::nullopt;
    std::vector<std::vector<int>> table(static_cast<std::size_t>(n),
                                        std::vector<int>(static_cast<std::size_t>(n)));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            char c = bits[static_cast<std::size_t>(i * n + j)];
            if (c != '0' && c != '1') return std::nullopt;
            table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = c - '0';
        }
    }
    return table;
}

std::string cotree_leaf_label(int part, const std::string& sigma) {
    return "leaf:" + std::to_string(part) + ":" + sigma;
}

std::string cotree_fn_label(const std::vector<std::vector<int>>& table) {
    std::string out = "fn:";
    for (const auto& row : table) {
        for (int bit : row) out += bit ? '1' : '0';
    }
    return out;
}

Structure cotree_to_graph(const LabeledOrderedTree& t, const std::vector<std::string>& alphabet) {
    t.validate();
    if (t.empty()) throw PreconditionError("cotree_to_graph: empty cotree");

    int parts = 0;
    std::map<int, CotreeLeaf> leaves;
    std::map<int, std::vector<std::vector<int>>> tables;
    for (int id : t.preorder()) {
        if (t.isLeaf(id)) {
            auto leaf = parse_cotree_leaf(t.label(id));
            if (!leaf)
                throw PreconditionError("cotree leaf label '" + t.label(id) + "' is malformed");
            if (leaf->part < 1) throw PreconditionError("cotree leaf part must be >= 1");
            parts = std::max(parts, leaf->part);
            leaves[id] = *leaf;
        } else {
            auto table = parse_cotree_fn(t.label(id));
            if (!table)
                throw PreconditionError("cotree internal label '" + t.label(id) + "' is malformed");
            int n = static_cast<int>(table->size());
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if ((*table)[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
                        (*table)[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)])
                        throw PreconditionError("cotree function table is not symmetric");
                }
            }
            parts = std::max(parts, n);
            tables[id] = *table;
        }
    }
    for (const auto& [id, leaf] : leaves) {
        if (leaf.part > parts) throw PreconditionError("leaf part exceeds table size");
    }
    for (const auto& [id, table] : tables) {
        if (static_cast<int>(table.size()) != parts)
            throw PreconditionError("cotree function tables disagree on the part count");
    }

    std::vector<std::string> seen;
    for (const auto& [id, leaf] : leaves) seen.push_back(leaf.sigma);
    std::vector<std::string> sigma = derive_alphabet(std::move(seen), alphabet);

    Structure g;
    g.vocab.relations["E"] = 2;
    g.relations["E"] = {};
    add_label_predicates(g, sigma);
    for (const auto& [id, leaf] : leaves) {
        g.universe.push_back(id);
        if (std::find(sigma.begin(), sigma.end(), leaf.sigma) == sigma.end())
            throw PreconditionError("leaf letter '" + leaf.sigma + "' outside the alphabet");
        g.relations[leaf.sigma].insert({id});
    }
    std::sort(g.universe.begin(), g.universe.end());

    auto pathToRoot = [&](int id) {
        std::vector<int> out;
        for (int cur = id; cur != -1; cur = t.node(cur).parent) out.push_back(cur);
        return out;
    };
    for (const auto& [u, lu] : leaves) {
        for (const auto& [v, lv] : leaves) {
            if (u >= v) continue;
            std::vector<int> pu = pathToRoot(u);
            std::set<int> pv;
            for (int x : pathToRoot(v)) pv.insert(x);
            int gca = -1;
            for (int x : pu) {
                if (pv.count(x)) {
                    gca = x;
                    break;
                }
            }
            const auto& table = tables.at(gca);
            if (table[static_cast<std::size_t>(lu.part - 1)][static_cast<std::size_t>(lv.part - 1)]) {
                g.relations["E"].insert({u, v});
                g.relations["E"].insert({v, u});
            }
        }
    }
    return g;
}

// --- builtin oracles -----------------------------------------------------------------

RepresentationOracle builtin_oracle(const std::string& name, const std::vector<std::string>& sigma,
                                    int cographParts) {
    RepresentationOracle o;
    o.name = name;
    if (name == "words") {
        o.leafAlphabet = sigma;
        o.internalAlphabet = sigma;
        o.str = [sigma](const LabeledOrderedTree& t) { return str_unordered(t, sigma); };
        o.heightFavourable = true;
        o.degreeFavourable = true;
        o.minRank = 0;
        o.closedUnderSubtrees = true;
        o.inClass = [](const LabeledOrderedTree& t) {
            for (const auto& [id, n] : t.nodes) {
                if (n.children.size() > 1) return false;
            }
            return true;
        };
        return o;
    }
    if (name == "unordered") {
        o.leafAlphabet = sigma;
        o.internalAlphabet = sigma;
        o.str = [sigma](const LabeledOrderedTree& t) { return str_unordered(t, sigma); };
        o.heightFavourable = true;
        o.degreeFavourable = true;
        o.minRank = 0;
        o.closedUnderSubtrees = true;
        return o;
    }
    if (name == "ordered") {
        o.leafAlphabet = sigma;
        o.internalAlphabet = sigma;
        o.str = [sigma](const LabeledOrderedTree& t) { return str_ordered(t, sigma); };
        o.heightFavourable = true;
        o.degreeFavourable = false;
        o.minRank = 2;
        o.closedUnderSubtrees = true;
        return o;
    }
    if (name == "ranked") {
        o.leafAlphabet = sigma;
        o.internalAlphabet = sigma;
        o.str = [sigma](const LabeledOrderedTree& t) { return str_ordered(t, sigma); };
        o.heightFavourable = true;
        o.degreeFavourable = false;  // bounded-degree class: type I
        o.minRank = 2;
        o.closedUnderSubtrees = false;
        o.inClass = [](const LabeledOrderedTree& t) {
            std::map<std::string, int> rho;
            for (const auto& [id, n] : t.nodes) {
                if (n.children.empty()) continue;
                auto [it, fresh] = rho.emplace(n.label, static_cast<int>(n.children.size()));
                if (!fresh && it->second != static_cast<int>(n.children.size())) return false;
            }
            return true;
        };
        return o;
    }
    if (name == "nested") {
        std::vector<std::string> leaf = sigma;
        for (const auto& a : sigma) {
            for (const auto& b : sigma) leaf.push_back(a + ":" + b);
        }
        std::vector<std::string> internal = leaf;
        internal.push_back("@");
        o.leafAlphabet = leaf;
        o.internalAlphabet = internal;
        o.str = [sigma](const LabeledOrderedTree& t) {
            return nested_word_to_structure(tree_to_nested_word(t), sigma);
        };
        o.heightFavourable = true;
        o.degreeFavourable = true;
        o.minRank = 2;
        o.closedUnderSubtrees = true;
        return o;
    }
    if (name == "cograph") {
        int n = cographParts;
        if (n < 1) throw PreconditionError("cograph oracle needs at least one part");
        std::vector<std::string> leaf;
        for (int i = 1; i <= n; ++i) {
            for (const auto& s : sigma) leaf.push_back(cotree_leaf_label(i, s));
        }
        std::vector<std::string> internal;
        if (n <= 3) {
            int bits = n * n;
            for (int mask = 0; mask < (1 << bits); ++mask) {
                std::vector<std::vector<int>> table(static_cast<std::size_t>(n),
                                                    std::vector<int>(static_cast<std::size_t>(n)));
                bool symmetric = true;
                for (int i = 0; i < n && symmetric; ++i) {
                    for (int j = 0; j < n; ++j) {
                        table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                            (mask >> (i * n + j)) & 1;
                    }
                }
                for (int i = 0; i < n && symmetric; ++i) {
                    for (int j = 0; j < n; ++j) {
                        if (table[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] !=
                            table[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]) {
                            symmetric = false;
                            break;
                        }
                    }
                }
                if (symmetric) internal.push_back(cotree_fn_label(table));
            }
        }
        o.leafAlphabet = leaf;
        o.internalAlphabet = internal;  // empty (unconstrained) when n > 3
        std::vector<std::string> sigmaCopy = sigma;
        o.str = [sigmaCopy](const LabeledOrderedTree& t) { return cotree_to_graph(t, sigmaCopy); };
        o.heightFavourable = true;
        o.degreeFavourable = true;
        o.minRank = 0;
        o.closedUnderSubtrees = true;
        o.inClass = [n](const LabeledOrderedTree& t) {
            for (int id : t.preorder()) {
                if (t.isLeaf(id)) {
                    auto leafLabel = parse_cotree_leaf(t.label(id));
                    if (!leafLabel || leafLabel->part > n) return false;
                } else {
                    auto table = parse_cotree_fn(t.label(id));
                    if (!table || static_cast<int>(table->size()) != n) return false;
                }
            }
            return true;
        };
        return o;
    }
    throw PreconditionError("unknown oracle name: " + name);
}

}  // namespace fmtk
