#include "fmtk/structures.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fmtk {

namespace {

bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

}  // namespace

bool Vocabulary::hasConstant(const std::string& name) const {
    return std::find(constants.begin(), constants.end(), name) != constants.end();
}

int Vocabulary::arity(const std::string& relation) const {
    auto it = relations.find(relation);
    if (it == relations.end()) throw PreconditionError("unknown relation: " + relation);
    return it->second;
}

void Vocabulary::validate() const {
    std::set<std::string> seen;
    for (const auto& [name, ar] : relations) {
        if (!valid_identifier(name)) throw PreconditionError("bad relation name: '" + name + "'");
        if (ar < 1) throw PreconditionError("relation " + name + " has arity < 1");
        if (!seen.insert(name).second) throw PreconditionError("duplicate symbol: " + name);
    }
    for (const auto& name : constants) {
        if (!valid_identifier(name)) throw PreconditionError("bad constant name: '" + name + "'");
        if (!seen.insert(name).second) throw PreconditionError("duplicate symbol: " + name);
    }
}

bool Structure::contains(Element e) const {
    return std::binary_search(universe.begin(), universe.end(), e);
}

bool Structure::holds(const std::string& relation, const Tuple& args) const {
    auto it = relations.find(relation);
    if (it == relations.end()) throw PreconditionError("unknown relation: " + relation);
    return it->second.count(args) != 0;
}

Element Structure::constant(const std::string& name) const {
    auto it = constants.find(name);
    if (it == constants.end()) throw PreconditionError("unknown constant: " + name);
    return it->second;
}

void Structure::validate() const {
    vocab.validate();
    if (!std::is_sorted(universe.begin(), universe.end())) throw PreconditionError("universe not sorted");
    if (std::adjacent_find(universe.begin(), universe.end()) != universe.end())
        throw PreconditionError("duplicate universe element");
    for (Element e : universe) {
        if (e < 0) throw PreconditionError("negative element id");
    }
    if (universe.empty() && !vocab.constants.empty())
        throw PreconditionError("empty universe with constants");
    for (const auto& [name, ar] : vocab.relations) {
        auto it = relations.find(name);
        if (it == relations.end()) throw PreconditionError("missing interpretation for " + name);
        for (const Tuple& t : it->second) {
            if (static_cast<int>(t.size()) != ar)
                throw PreconditionError("arity mismatch in interpretation of " + name);
            for (Element e : t) {
                if (!contains(e))
                    throw PreconditionError("element " + std::to_string(e) + " outside universe in " + name);
            }
        }
    }
    if (relations.size() != vocab.relations.size())
        throw PreconditionError("interpretation for undeclared relation");
    for (const auto& name : vocab.constants) {
        auto it = constants.find(name);
        if (it == constants.end()) throw PreconditionError("missing interpretation for constant " + name);
        if (!contains(it->second))
            throw PreconditionError("constant " + name + " outside universe");
    }
    if (constants.size() != vocab.constants.size())
        throw PreconditionError("interpretation for undeclared constant");
}

void PointedStructure::validate() const {
    structure.validate();
    for (Element e : tuple) {
        if (!structure.contains(e))
            throw PreconditionError("tuple element " + std::to_string(e) + " outside universe");
    }
}

Element ElementMap::at(Element e) const {
    auto it = mapping.find(e);
    if (it == mapping.end()) throw PreconditionError("element not in map domain: " + std::to_string(e));
    return it->second;
}

// --- parsing -----------------------------------------------------------------

namespace {

struct Line {
    int number;
    std::vector<std::pair<int, std::string>> tokens;  // (column, token)
};

std::vector<Line> tokenize_lines(const std::string& text) {
    std::vector<Line> out;
    std::istringstream in(text);
    std::string raw;
    int number = 0;
    while (std::getline(in, raw)) {
        ++number;
        Line line{number, {}};
        std::size_t i = 0;
        while (i < raw.size()) {
            if (std::isspace(static_cast<unsigned char>(raw[i]))) {
                ++i;
                continue;
            }
            if (raw[i] == '#') break;
            std::size_t start = i;
            while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            line.tokens.emplace_back(static_cast<int>(start + 1), raw.substr(start, i - start));
        }
        if (!line.tokens.empty()) out.push_back(std::move(line));
    }
    return out;
}

Element parse_element(const std::string& tok, int lineNo, int col) {
    if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](char c) {
            return std::isdigit(static_cast<unsigned char>(c));
        }))
        throw ParseError("expected element id, got '" + tok + "'", lineNo, col);
    return static_cast<Element>(std::stoll(tok));
}

}  // namespace

Structure parse_structure(const std::string& text) {
    std::vector<Line> lines = tokenize_lines(text);
    if (lines.empty()) throw ParseError("empty structure description", 1, 1);

    Structure s;
    std::size_t idx = 0;

    const Line& vline = lines[idx];
    if (vline.tokens[0].second != "vocab")
        throw ParseError("expected 'vocab' line", vline.number, vline.tokens[0].first);
    for (std::size_t i = 1; i < vline.tokens.size(); ++i) {
        const auto& [col, tok] = vline.tokens[i];
        auto slash = tok.rfind('/');
        if (slash == std::string::npos)
            throw ParseError("expected NAME/ARITY or NAME/const, got '" + tok + "'", vline.number, col);
        std::string name = tok.substr(0, slash);
        std::string kind = tok.substr(slash + 1);
        if (name.empty()) throw ParseError("empty symbol name", vline.number, col);
        if (kind == "const") {
            if (s.vocab.hasConstant(name) || s.vocab.hasRelation(name))
                throw ParseError("duplicate symbol '" + name + "'", vline.number, col);
            s.vocab.constants.push_back(name);
        } else {
            int ar;
            try {
                std::size_t pos = 0;
                ar = std::stoi(kind, &pos);
                if (pos != kind.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw ParseError("bad arity '" + kind + "'", vline.number, col);
            }
            if (ar < 1) throw ParseError("arity must be >= 1", vline.number, col);
            if (s.vocab.hasConstant(name) || s.vocab.hasRelation(name))
                throw ParseError("duplicate symbol '" + name + "'", vline.number, col);
            s.vocab.relations[name] = ar;
        }
    }
    ++idx;

    if (idx >= lines.size())
        throw ParseError("expected 'universe' line", vline.number + 1, 1);
    const Line& uline = lines[idx];
    if (uline.tokens[0].second != "universe")
        throw ParseError("expected 'universe' line", uline.number, uline.tokens[0].first);
    for (std::size_t i = 1; i < uline.tokens.size(); ++i)
        s.universe.push_back(parse_element(uline.tokens[i].second, uline.number, uline.tokens[i].first));
    std::sort(s.universe.begin(), s.universe.end());
    if (std::adjacent_find(s.universe.begin(), s.universe.end()) != s.universe.end())
        throw ParseError("duplicate universe element", uline.number, uline.tokens[0].first);
    ++idx;

    for (const auto& [name, ar] : s.vocab.relations) s.relations[name] = {};

    for (; idx < lines.size(); ++idx) {
        const Line& line = lines[idx];
        const std::string& head = line.tokens[0].second;
        if (line.tokens.size() >= 2 && line.tokens[1].second == "=") {
            if (!s.vocab.hasConstant(head))
                throw ParseError("unknown constant '" + head + "'", line.number, line.tokens[0].first);
            if (line.tokens.size() != 3)
                throw ParseError("expected 'NAME = id'", line.number, line.tokens[0].first);
            Element e = parse_element(line.tokens[2].second, line.number, line.tokens[2].first);
            if (!s.contains(e))
                throw ParseError("element " + std::to_string(e) + " outside declared universe",
                                 line.number, line.tokens[2].first);
            if (s.constants.count(head))
                throw ParseError("duplicate constant assignment for '" + head + "'", line.number,
                                 line.tokens[0].first);
            s.constants[head] = e;
            continue;
        }
        if (!s.vocab.hasRelation(head))
            throw ParseError("unknown relation '" + head + "'", line.number, line.tokens[0].first);
        int ar = s.vocab.relations[head];
        if (static_cast<int>(line.tokens.size()) - 1 != ar)
            throw ParseError("arity mismatch: " + head + " expects " + std::to_string(ar) +
                                 " arguments",
                             line.number, line.tokens[0].first);
        Tuple t;
        for (std::size_t i = 1; i < line.tokens.size(); ++i) {
            Element e = parse_element(line.tokens[i].second, line.number, line.tokens[i].first);
            if (!s.contains(e))
                throw ParseError("element " + std::to_string(e) + " outside declared universe",
                                 line.number, line.tokens[i].first);
            t.push_back(e);
        }
        s.relations[head].insert(std::move(t));
    }

    for (const auto& name : s.vocab.constants) {
        if (!s.constants.count(name)) throw ParseError("constant '" + name + "' never assigned", 0, 0);
    }
    s.validate();
    return s;
}

Structure parse_structure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_structure(buf.str());
}

std::string serialize_structure(const Structure& s) {
    std::ostringstream out;
    out << "vocab";
    for (const auto& [name, ar] : s.vocab.relations) out << ' ' << name << '/' << ar;
    std::vector<std::string> consts = s.vocab.constants;
    std::sort(consts.begin(), consts.end());
    for (const auto& name : consts) out << ' ' << name << "/const";
    out << '\n';
    out << "universe";
    for (Element e : s.universe) out << ' ' << e;
    out << '\n';
    for (const auto& [name, tuples] : s.relations) {
        for (const Tuple& t : tuples) {
            out << name;
            for (Element e : t) out << ' ' << e;
            out << '\n';
        }
    }
    for (const auto& name : consts) out << name << " = " << s.constants.at(name) << '\n';
    return out.str();
}

// --- substructures -----------------------------------------------------------

Structure induced_substructure(const Structure& a, const std::set<Element>& x) {
    for (Element e : x) {
        if (!a.contains(e))
            throw PreconditionError("element " + std::to_string(e) + " not in universe");
    }
    for (const auto& [name, e] : a.constants) {
        if (!x.count(e)) throw PreconditionError("constant " + name + " outside induced set");
    }
    Structure b;
    b.vocab = a.vocab;
    b.universe.assign(x.begin(), x.end());
    b.constants = a.constants;
    for (const auto& [name, tuples] : a.relations) {
        auto& target = b.relations[name];
        for (const Tuple& t : tuples) {
            if (std::all_of(t.begin(), t.end(), [&](Element e) { return x.count(e) != 0; }))
                target.insert(t);
        }
    }
    return b;
}

void for_each_subuniverse(const Structure& a, std::size_t maxSize, const std::set<Element>& mustContain,
                          const std::function<bool(const std::set<Element>&)>& visit) {
    for (Element e : mustContain) {
        if (!a.contains(e))
            throw PreconditionError("mustContain element " + std::to_string(e) + " not in universe");
    }
    for (const auto& [name, e] : a.constants) {
        if (!mustContain.count(e))
            throw PreconditionError("mustContain omits constant " + name);
    }
    if (mustContain.size() > maxSize) return;

    std::vector<Element> pool;
    for (Element e : a.universe) {
        if (!mustContain.count(e)) pool.push_back(e);
    }
    std::size_t maxExtra = std::min(pool.size(), maxSize - mustContain.size());

    // Subsets by size, each size in lexicographic order of the chosen pool
    // indices (pool is ascending, so this is lexicographic on element sets).
    std::set<Element> current(mustContain);
    for (std::size_t extra = 0; extra <= maxExtra; ++extra) {
        std::vector<std::size_t> pick(extra);
        for (std::size_t i = 0; i < extra; ++i) pick[i] = i;
        bool more = true;
        while (more) {
            for (std::size_t i : pick) current.insert(pool[i]);
            bool keepGoing = visit(current);
            for (std::size_t i : pick) current.erase(pool[i]);
            if (!keepGoing) return;
            // advance to the next combination of `extra` indices out of pool
            more = false;
            for (std::size_t i = extra; i-- > 0;) {
                if (pick[i] != i + pool.size() - extra) {
                    ++pick[i];
                    for (std::size_t j = i + 1; j < extra; ++j) pick[j] = pick[j - 1] + 1;
                    more = true;
                    break;
                }
            }
        }
    }
}

std::vector<Structure> enumerate_substructures(const Structure& a, std::size_t maxSize,
                                               const std::set<Element>& mustContain) {
    std::vector<Structure> out;
    for_each_subuniverse(a, maxSize, mustContain, [&](const std::set<Element>& x) {
        out.push_back(induced_substructure(a, x));
        return true;
    });
    return out;
}

bool is_induced_substructure(const Structure& b, const Structure& a) {
    if (b.vocab != a.vocab) return false;
    for (Element e : b.universe) {
        if (!a.contains(e)) return false;
    }
    if (b.constants != a.constants) return false;
    std::set<Element> x(b.universe.begin(), b.universe.end());
    for (const auto& [name, tuples] : a.relations) {
        std::set<Tuple> restricted;
        for (const Tuple& t : tuples) {
            if (std::all_of(t.begin(), t.end(), [&](Element e) { return x.count(e) != 0; }))
                restricted.insert(t);
        }
        if (restricted != b.relations.at(name)) return false;
    }
    return true;
}

bool is_weak_substructure(const Structure& b, const Structure& a) {
    if (b.vocab != a.vocab) return false;
    for (Element e : b.universe) {
        if (!a.contains(e)) return false;
    }
    if (b.constants != a.constants) return false;
    for (const auto& [name, tuples] : b.relations) {
        const auto& big = a.relations.at(name);
        for (const Tuple& t : tuples) {
            if (!big.count(t)) return false;
        }
    }
    return true;
}

// --- embeddings / homomorphisms -----------------------------------------------

namespace {

void check_search_preconditions(const PointedStructure& a, const PointedStructure& b) {
    if (a.structure.vocab != b.structure.vocab)
        throw PreconditionError("vocabulary mismatch between search source and target");
    if (a.tuple.size() != b.tuple.size()) throw PreconditionError("pinned tuple length mismatch");
    a.validate();
    b.validate();
}

bool check_map_common(const PointedStructure& a, const PointedStructure& b, const ElementMap& h) {
    for (Element e : a.structure.universe) {
        if (!h.mapping.count(e)) return false;
    }
    for (const auto& [src, dst] : h.mapping) {
        if (!a.structure.contains(src) || !b.structure.contains(dst)) return false;
    }
    for (std::size_t i = 0; i < a.tuple.size(); ++i) {
        if (h.at(a.tuple[i]) != b.tuple[i]) return false;
    }
    for (const auto& [name, e] : a.structure.constants) {
        if (h.at(e) != b.structure.constants.at(name)) return false;
    }
    return true;
}

}  // namespace

bool is_embedding(const PointedStructure& a, const PointedStructure& b, const ElementMap& h) {
    if (a.structure.vocab != b.structure.vocab || a.tuple.size() != b.tuple.size()) return false;
    if (!check_map_common(a, b, h)) return false;
    std::set<Element> image;
    for (const auto& [src, dst] : h.mapping) {
        if (!image.insert(dst).second) return false;  // not injective
    }
    for (const auto& [name, tuples] : a.structure.relations) {
        int ar = a.structure.vocab.relations.at(name);
        std::vector<Tuple> domain = all_tuples(a.structure, ar);
        for (const Tuple& t : domain) {
            Tuple mapped;
            mapped.reserve(t.size());
            for (Element e : t) mapped.push_back(h.at(e));
            if ((tuples.count(t) != 0) != (b.structure.relations.at(name).count(mapped) != 0))
                return false;
        }
    }
    return true;
}

bool is_homomorphism(const PointedStructure& a, const PointedStructure& b, const ElementMap& h) {
    if (a.structure.vocab != b.structure.vocab || a.tuple.size() != b.tuple.size()) return false;
    if (!check_map_common(a, b, h)) return false;
    for (const auto& [name, tuples] : a.structure.relations) {
        for (const Tuple& t : tuples) {
            Tuple mapped;
            mapped.reserve(t.size());
            for (Element e : t) mapped.push_back(h.at(e));
            if (!b.structure.relations.at(name).count(mapped)) return false;
        }
    }
    return true;
}

namespace {

// Shared backtracking engine for embeddings (injective, iff-preserving) and
// homomorphisms (forward preservation only).
class MapSearch {
public:
    MapSearch(const PointedStructure& a, const PointedStructure& b, bool injective)
        : a_(a.structure), b_(b.structure), injective_(injective) {
        for (Element e : a_.universe) candidates_[e] = {};
        // Unary self-profile filter: sound for both modes.
        for (Element ea : a_.universe) {
            for (Element eb : b_.universe) {
                if (compatible(ea, eb)) candidates_[ea].push_back(eb);
            }
        }
        ok_ = true;
        for (std::size_t i = 0; i < a.tuple.size() && ok_; ++i) ok_ = assign(a.tuple[i], b.tuple[i]);
        for (const auto& [name, e] : a_.constants) {
            if (!ok_) break;
            ok_ = assign(e, b_.constants.at(name));
        }
    }

    std::optional<ElementMap> run() {
        if (!ok_) return std::nullopt;
        if (search()) {
            ElementMap h;
            h.mapping = assignment_;
            return h;
        }
        return std::nullopt;
    }

private:
    bool compatible(Element ea, Element eb) const {
        for (const auto& [name, tuples] : a_.relations) {
            int ar = a_.vocab.relations.at(name);
            Tuple ta(static_cast<std::size_t>(ar), ea), tb(static_cast<std::size_t>(ar), eb);
            bool inA = tuples.count(ta) != 0;
            bool inB = b_.relations.at(name).count(tb) != 0;
            if (injective_ ? (inA != inB) : (inA && !inB)) return false;
        }
        return true;
    }

    bool assign(Element ea, Element eb) {
        auto it = assignment_.find(ea);
        if (it != assignment_.end()) return it->second == eb;
        if (injective_ && used_.count(eb)) return false;
        if (!consistent(ea, eb)) return false;
        assignment_[ea] = eb;
        if (injective_) used_.insert(eb);
        return true;
    }

    void unassign(Element ea) {
        auto it = assignment_.find(ea);
        if (injective_) used_.erase(it->second);
        assignment_.erase(it);
    }

    // Check all relation tuples fully determined by assignment_ plus (ea->eb).
    bool consistent(Element ea, Element eb) const {
        for (const auto& [name, tuples] : a_.relations) {
            int ar = a_.vocab.relations.at(name);
            std::vector<Element> assigned;
            assigned.reserve(assignment_.size() + 1);
            for (const auto& [k, v] : assignment_) assigned.push_back(k);
            assigned.push_back(ea);
            // Enumerate tuples over assigned elements that involve ea.
            std::vector<Tuple> work;
            Tuple cur(static_cast<std::size_t>(ar));
            enumerate_involving(assigned, ea, static_cast<std::size_t>(ar), 0, false, cur, work);
            const auto& btuples = b_.relations.at(name);
            for (const Tuple& t : work) {
                Tuple mapped;
                mapped.reserve(t.size());
                for (Element e : t) mapped.push_back(e == ea ? eb : assignment_.at(e));
                bool inA = tuples.count(t) != 0;
                bool inB = btuples.count(mapped) != 0;
                if (injective_ ? (inA != inB) : (inA && !inB)) return false;
            }
        }
        return true;
    }

    static void enumerate_involving(const std::vector<Element>& pool, Element required, std::size_t ar,
                                    std::size_t pos, bool has, Tuple& cur, std::vector<Tuple>& out) {
        if (pos == ar) {
            if (has) out.push_back(cur);
            return;
        }
        for (Element e : pool) {
            cur[pos] = e;
            enumerate_involving(pool, required, ar, pos + 1, has || e == required, cur, out);
        }
    }

    bool search() {
        // Most-constrained unassigned element; ties by ascending id.
        Element best = -1;
        std::size_t bestCount = 0;
        for (const auto& [ea, cands] : candidates_) {
            if (assignment_.count(ea)) continue;
            std::size_t live = 0;
            for (Element eb : cands) {
                if (injective_ && used_.count(eb)) continue;
                ++live;
            }
            if (best == -1 || live < bestCount) {
                best = ea;
                bestCount = live;
            }
        }
        if (best == -1) return true;  // everything assigned
        for (Element eb : candidates_.at(best)) {
            if (injective_ && used_.count(eb)) continue;
            if (!consistent(best, eb)) continue;
            assignment_[best] = eb;
            if (injective_) used_.insert(eb);
            if (search()) return true;
            unassign(best);
        }
        return false;
    }

    const Structure& a_;
    const Structure& b_;
    bool injective_;
    bool ok_ = false;
    std::map<Element, std::vector<Element>> candidates_;
    std::map<Element, Element> assignment_;
    std::set<Element> used_;
};

}  // namespace

std::optional<ElementMap> find_embedding(const PointedStructure& a, const PointedStructure& b) {
    check_search_preconditions(a, b);
    if (a.structure.size() > b.structure.size()) return std::nullopt;
    auto result = MapSearch(a, b, /*injective=*/true).run();
    if (result && !is_embedding(a, b, *result))
        throw VerificationError("embedding witness failed re-verification");
    return result;
}

std::optional<ElementMap> find_homomorphism(const PointedStructure& a, const PointedStructure& b) {
    check_search_preconditions(a, b);
    if (a.structure.size() > 0 && b.structure.size() == 0) return std::nullopt;
    auto result = MapSearch(a, b, /*injective=*/false).run();
    if (result && !is_homomorphism(a, b, *result))
        throw VerificationError("homomorphism witness failed re-verification");
    return result;
}

std::optional<QuasiOrderHit> embedding_quasi_order_probe(const std::vector<PointedStructure>& seq) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
        for (std::size_t j = i + 1; j < seq.size(); ++j) {
            if (auto h = find_embedding(seq[i], seq[j])) {
                return QuasiOrderHit{i + 1, j + 1, *h};
            }
        }
    }
    return std::nullopt;
}

// --- constructions -------------------------------------------------------------

namespace {

void require_constant_free(const Structure& s, const char* op) {
    if (!s.vocab.constants.empty())
        throw PreconditionError(std::string(op) + " is undefined for vocabularies with constants");
}

Structure relabel(const Structure& s, const std::function<Element(Element)>& f) {
    Structure out;
    out.vocab = s.vocab;
    for (Element e : s.universe) out.universe.push_back(f(e));
    std::sort(out.universe.begin(), out.universe.end());
    for (const auto& [name, tuples] : s.relations) {
        auto& target = out.relations[name];
        for (const Tuple& t : tuples) {
            Tuple mapped;
            mapped.reserve(t.size());
            for (Element e : t) mapped.push_back(f(e));
            target.insert(std::move(mapped));
        }
    }
    for (const auto& [name, e] : s.constants) out.constants[name] = f(e);
    return out;
}

}  // namespace

Structure disjoint_union(const Structure& a, const Structure& b) {
    if (a.vocab != b.vocab) throw PreconditionError("disjoint union needs equal vocabularies");
    require_constant_free(a, "disjoint_union");
    Element shift = a.universe.empty() ? 0 : a.universe.back() + 1;
    Structure bShifted = relabel(b, [shift](Element e) { return e + shift; });
    Structure out = a;
    for (Element e : bShifted.universe) out.universe.push_back(e);
    std::sort(out.universe.begin(), out.universe.end());
    for (const auto& [name, tuples] : bShifted.relations) out.relations[name].insert(tuples.begin(), tuples.end());
    return out;
}

Vocabulary disjoint_sum_vocabulary(const Vocabulary& tau, const std::vector<int>& tupleLengths) {
    Vocabulary out = tau;
    int n = static_cast<int>(tupleLengths.size());
    for (int i = 1; i <= n; ++i) {
        std::string p = "P" + std::to_string(i);
        if (out.hasRelation(p) || out.hasConstant(p))
            throw PreconditionError("vocabulary already contains " + p);
        out.relations[p] = 1;
    }
    int total = 0;
    for (int k : tupleLengths) total += k;
    for (int j = 1; j <= total; ++j) {
        std::string c = "c" + std::to_string(j);
        if (out.hasRelation(c) || out.hasConstant(c))
            throw PreconditionError("vocabulary already contains " + c);
        out.constants.push_back(c);
    }
    return out;
}

Vocabulary copy_vocabulary(const Vocabulary& tau, const std::vector<int>& tupleLengths) {
    Vocabulary out = disjoint_sum_vocabulary(tau, tupleLengths);
    if (out.hasRelation("sim") || out.hasConstant("sim"))
        throw PreconditionError("vocabulary already contains sim");
    out.relations["sim"] = 2;
    return out;
}

Structure n_disjoint_sum(const std::vector<PointedStructure>& parts) {
    if (parts.empty()) throw PreconditionError("n_disjoint_sum needs at least one part");
    const Vocabulary& tau = parts[0].structure.vocab;
    std::vector<int> lengths;
    for (const auto& p : parts) {
        if (p.structure.vocab != tau) throw PreconditionError("n_disjoint_sum: vocabulary mismatch");
        require_constant_free(p.structure, "n_disjoint_sum");
        p.validate();
        lengths.push_back(static_cast<int>(p.tuple.size()));
    }
    Structure out;
    out.vocab = disjoint_sum_vocabulary(tau, lengths);
    for (const auto& [name, ar] : out.vocab.relations) out.relations[name] = {};

    Element shift = 0;
    int constIndex = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const Structure& part = parts[i].structure;
        Structure moved = relabel(part, [shift](Element e) { return e + shift; });
        for (Element e : moved.universe) {
            out.universe.push_back(e);
            out.relations["P" + std::to_string(i + 1)].insert(Tuple{e});
        }
        for (const auto& [name, tuples] : moved.relations)
            out.relations[name].insert(tuples.begin(), tuples.end());
        for (Element e : parts[i].tuple) {
            ++constIndex;
            out.constants["c" + std::to_string(constIndex)] = e + shift;
        }
        if (!moved.universe.empty()) shift = moved.universe.back() + 1;
    }
    std::sort(out.universe.begin(), out.universe.end());
    out.validate();
    return out;
}

Structure n_copy(const Structure& a, const std::vector<Tuple>& tuples) {
    if (tuples.empty()) throw PreconditionError("n_copy needs n >= 1");
    require_constant_free(a, "n_copy");
    for (const Tuple& t : tuples) {
        for (Element e : t) {
            if (!a.contains(e))
                throw PreconditionError("n_copy: tuple element outside universe");
        }
    }
    std::size_t n = tuples.size();
    if (n == 1) {
        // 1-copy(A, a-bar) = (A, a-bar): expansion with constants only.
        Structure out = a;
        for (std::size_t j = 0; j < tuples[0].size(); ++j) {
            std::string c = "c" + std::to_string(j + 1);
            if (out.vocab.hasRelation(c) || out.vocab.hasConstant(c))
                throw PreconditionError("vocabulary already contains " + c);
            out.vocab.constants.push_back(c);
            out.constants[c] = tuples[0][j];
        }
        return out;
    }
    std::vector<int> lengths;
    for (const Tuple& t : tuples) lengths.push_back(static_cast<int>(t.size()));

    Element stride = a.universe.empty() ? 1 : a.universe.back() + 1;
    auto copyId = [stride](std::size_t copy, Element e) {
        return static_cast<Element>(copy) * stride + e;
    };

    Structure out;
    out.vocab = copy_vocabulary(a.vocab, lengths);
    for (const auto& [name, ar] : out.vocab.relations) out.relations[name] = {};
    int constIndex = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (Element e : a.universe) {
            out.universe.push_back(copyId(i, e));
            out.relations["P" + std::to_string(i + 1)].insert(Tuple{copyId(i, e)});
        }
        for (const auto& [name, rel] : a.relations) {
            for (const Tuple& t : rel) {
                Tuple mapped;
                for (Element e : t) mapped.push_back(copyId(i, e));
                out.relations[name].insert(std::move(mapped));
            }
        }
        for (Element e : tuples[i]) {
            ++constIndex;
            out.constants["c" + std::to_string(constIndex)] = copyId(i, e);
        }
    }
    for (Element e : a.universe) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                out.relations["sim"].insert(Tuple{copyId(i, e), copyId(j, e)});
            }
        }
    }
    std::sort(out.universe.begin(), out.universe.end());
    out.validate();
    return out;
}

Structure cartesian_product(const Structure& a, const Structure& b) {
    if (a.vocab != b.vocab) throw PreconditionError("cartesian product needs equal vocabularies");
    require_constant_free(a, "cartesian_product");
    auto indexOf = [](const Structure& s, Element e) {
        return static_cast<Element>(
            std::lower_bound(s.universe.begin(), s.universe.end(), e) - s.universe.begin());
    };
    Element cols = static_cast<Element>(b.universe.size());
    auto pairId = [&](Element ea, Element eb) { return indexOf(a, ea) * cols + indexOf(b, eb); };

    Structure out;
    out.vocab = a.vocab;
    for (Element ea : a.universe) {
        for (Element eb : b.universe) out.universe.push_back(pairId(ea, eb));
    }
    std::sort(out.universe.begin(), out.universe.end());
    for (const auto& [name, ra] : a.relations) {
        auto& target = out.relations[name];
        const auto& rb = b.relations.at(name);
        for (const Tuple& ta : ra) {
            for (const Tuple& tb : rb) {
                Tuple mapped;
                mapped.reserve(ta.size());
                for (std::size_t i = 0; i < ta.size(); ++i) mapped.push_back(pairId(ta[i], tb[i]));
                target.insert(std::move(mapped));
            }
        }
    }
    return out;
}

Structure underlying_graph(const Structure& a) {
    if (!a.vocab.constants.empty())
        throw PreconditionError("underlying_graph: constants not allowed");
    for (const auto& [name, ar] : a.vocab.relations) {
        if (ar > 2)
            throw PreconditionError("underlying_graph: relation " + name + " has arity > 2");
    }
    Structure g;
    g.vocab.relations["E"] = 2;
    g.universe = a.universe;
    g.relations["E"] = {};
    for (const auto& [name, ar] : a.vocab.relations) {
        if (ar != 2) continue;
        for (const Tuple& t : a.relations.at(name)) {
            g.relations["E"].insert(Tuple{t[0], t[1]});
            g.relations["E"].insert(Tuple{t[1], t[0]});
        }
    }
    return g;
}

Structure label_expand(const Structure& a, const std::map<Element, int>& labeling, int labelCount) {
    if (labelCount < 0) throw PreconditionError("label_expand: negative label count");
    for (Element e : a.universe) {
        auto it = labeling.find(e);
        if (it == labeling.end())
            throw PreconditionError("label_expand: labeling not total on universe");
        if (it->second < 0 || it->second >= labelCount)
            throw PreconditionError("label_expand: label out of range");
    }
    Structure out = a;
    for (int i = 0; i < labelCount; ++i) {
        std::string q = "Q" + std::to_string(i);
        if (out.vocab.hasRelation(q) || out.vocab.hasConstant(q))
            throw PreconditionError("label_expand: vocabulary already contains " + q);
        out.vocab.relations[q] = 1;
        out.relations[q] = {};
    }
    for (Element e : a.universe) {
        out.relations["Q" + std::to_string(labeling.at(e))].insert(Tuple{e});
    }
    return out;
}

Structure tuple_pin_expand(const Structure& a, const Tuple& pins) {
    std::set<Element> seen;
    for (Element e : pins) {
        if (!a.contains(e)) throw PreconditionError("tuple_pin_expand: element outside universe");
        if (!seen.insert(e).second) throw PreconditionError("tuple_pin_expand: repeated element");
    }
    int k = static_cast<int>(pins.size());
    std::map<Element, int> labeling;
    for (Element e : a.universe) labeling[e] = k;
    for (int i = 0; i < k; ++i) labeling[pins[static_cast<std::size_t>(i)]] = i;
    return label_expand(a, labeling, k + 1);
}

// --- misc ------------------------------------------------------------------------

bool is_partial_isomorphism(const Structure& a, const Tuple& tupleA, const Structure& b,
                            const Tuple& tupleB) {
    if (a.vocab != b.vocab || tupleA.size() != tupleB.size()) return false;
    Tuple ea = tupleA, eb = tupleB;
    for (const auto& name : a.vocab.constants) {
        ea.push_back(a.constants.at(name));
        eb.push_back(b.constants.at(name));
    }
    std::size_t m = ea.size();
    if (m == 0) return true;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if ((ea[i] == ea[j]) != (eb[i] == eb[j])) return false;
        }
    }
    for (const auto& [name, ar] : a.vocab.relations) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
        while (true) {
            Tuple ta, tb;
            for (std::size_t p : idx) {
                ta.push_back(ea[p]);
                tb.push_back(eb[p]);
            }
            if ((a.relations.at(name).count(ta) != 0) != (b.relations.at(name).count(tb) != 0))
                return false;
            std::size_t i = idx.size();
            bool done = true;
            while (i > 0) {
                --i;
                if (++idx[i] < m) {
                    done = false;
                    break;
                }
                idx[i] = 0;
            }
            if (done) break;
        }
    }
    return true;
}

namespace {

std::string keyed_serialization(const Structure& s, const Tuple& pins,
                                const std::vector<Element>& order) {
    // order[i] = the element placed at position i; renumber to 0..n-1.
    std::map<Element, int> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<int>(i);
    std::ostringstream out;
    for (const auto& [name, tuples] : s.relations) {
        out << name << ':';
        std::set<std::vector<int>> mapped;
        for (const Tuple& t : tuples) {
            std::vector<int> m;
            for (Element e : t) m.push_back(pos.at(e));
            mapped.insert(std::move(m));
        }
        for (const auto& t : mapped) {
            for (int v : t) out << v << ',';
            out << ';';
        }
        out << '|';
    }
    out << "c:";
    for (const auto& [name, e] : s.constants) out << name << '=' << pos.at(e) << ';';
    out << "|t:";
    for (Element e : pins) out << pos.at(e) << ',';
    return out.str();
}

}  // namespace

std::string canonical_key(const PointedStructure& s, std::size_t permCap) {
    if (s.structure.size() > permCap)
        throw CapError("canonical_key: universe larger than permutation cap");
    std::vector<Element> order = s.structure.universe;
    std::string best;
    bool first = true;
    std::sort(order.begin(), order.end());
    do {
        std::string key = keyed_serialization(s.structure, s.tuple, order);
        if (first || key < best) {
            best = std::move(key);
            first = false;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    std::ostringstream out;
    out << s.structure.size() << '#' << best;
    return out.str();
}

std::string canonical_key(const Structure& s, std::size_t permCap) {
    return canonical_key(PointedStructure{s, {}}, permCap);
}

std::vector<Tuple> all_tuples(const Structure& s, int k) {
    if (k < 0) throw PreconditionError("negative tuple length");
    std::vector<Tuple> out;
    Tuple cur(static_cast<std::size_t>(k));
    std::function<void(int)> rec = [&](int pos) {
        if (pos == k) {
            out.push_back(cur);
            return;
        }
        for (Element e : s.universe) {
            cur[static_cast<std::size_t>(pos)] = e;
            rec(pos + 1);
        }
    };
    if (k == 0) {
        out.push_back({});
        return out;
    }
    if (s.universe.empty()) return out;
    rec(0);
    return out;
}

}  // namespace fmtk
