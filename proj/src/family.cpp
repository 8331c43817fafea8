#include "fmtk/family.hpp"

#include <algorithm>
#include <mutex>
#include <sstream>

namespace fmtk {

namespace {

class ExplicitFamily : public Family {
public:
    ExplicitFamily(std::vector<Structure> members, std::string name)
        : members_(std::move(members)), name_(std::move(name)) {
        if (members_.empty()) throw PreconditionError("explicit family needs at least one member");
        for (const auto& m : members_) {
            m.validate();
            if (m.vocab != members_[0].vocab)
                throw PreconditionError("explicit family members share one vocabulary");
        }
    }

    std::string name() const override { return name_; }
    Vocabulary vocabulary() const override { return members_[0].vocab; }

    bool contains(const Structure& s) const override {
        if (s.vocab != members_[0].vocab) return false;
        if (s.size() <= 8) {
            std::string key = canonical_key(s);
            for (const auto& m : members_) {
                if (m.size() == s.size() && canonical_key(m) == key) return true;
            }
            return false;
        }
        return std::find(members_.begin(), members_.end(), s) != members_.end();
    }

    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        std::vector<Structure> out;
        for (const auto& m : members_) {
            if (m.size() <= maxSize) out.push_back(m);
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const Structure& a, const Structure& b) { return a.size() < b.size(); });
        return out;
    }

private:
    std::vector<Structure> members_;
    std::string name_;
};

// Enumeration helper: all interpretations of `vocab` on a fixed n-element
// universe, deduplicated by canonical key. Only usable for small n.
std::vector<Structure> all_on_universe(const Vocabulary& vocab, std::size_t n,
                                       std::size_t isoCap = 8) {
    if (n > isoCap)
        throw CapError("family enumeration needs canonical forms; size " + std::to_string(n) +
                       " exceeds the permutation cap");
    Structure base;
    base.vocab = vocab;
    for (std::size_t i = 0; i < n; ++i) base.universe.push_back(static_cast<Element>(i));
    for (const auto& [name, ar] : vocab.relations) base.relations[name] = {};

    // all tuples per relation, flattened into one big choice vector
    std::vector<std::pair<std::string, Tuple>> slots;
    for (const auto& [name, ar] : vocab.relations) {
        for (const Tuple& t : all_tuples(base, ar)) slots.emplace_back(name, t);
    }
    if (slots.size() > 24)
        throw CapError("family enumeration would iterate 2^" + std::to_string(slots.size()) +
                       " interpretations");
    std::vector<Structure> out;
    std::set<std::string> seen;
    for (std::uint64_t mask = 0; mask < (1ULL << slots.size()); ++mask) {
        Structure s = base;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (mask & (1ULL << i)) s.relations[slots[i].first].insert(slots[i].second);
        }
        if (seen.insert(canonical_key(s)).second) out.push_back(std::move(s));
    }
    return out;
}

class AllStructuresFamily : public Family {
public:
    explicit AllStructuresFamily(Vocabulary vocab) : vocab_(std::move(vocab)) {
        vocab_.validate();
        if (!vocab_.constants.empty())
            throw PreconditionError("generator families are over relational vocabularies");
    }

    std::string name() const override { return "all"; }
    Vocabulary vocabulary() const override { return vocab_; }
    bool contains(const Structure& s) const override { return s.vocab == vocab_; }

    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(maxSize);
        if (it != cache_.end()) return it->second;
        std::vector<Structure> out;
        for (std::size_t n = 0; n <= maxSize; ++n) {
            for (auto& s : all_on_universe(vocab_, n)) out.push_back(std::move(s));
        }
        cache_[maxSize] = out;
        return out;
    }

private:
    Vocabulary vocab_;
    mutable std::mutex mutex_;
    mutable std::map<std::size_t, std::vector<Structure>> cache_;
};

class UndirectedGraphFamily : public Family {
public:
    UndirectedGraphFamily() { vocab_.relations["E"] = 2; }

    std::string name() const override { return "ugraphs"; }
    Vocabulary vocabulary() const override { return vocab_; }

    bool contains(const Structure& s) const override {
        if (s.vocab != vocab_) return false;
        for (const Tuple& t : s.relations.at("E")) {
            if (t[0] == t[1]) return false;
            if (!s.relations.at("E").count({t[1], t[0]})) return false;
        }
        return true;
    }

    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(maxSize);
        if (it != cache_.end()) return it->second;
        std::vector<Structure> out;
        for (std::size_t n = 0; n <= maxSize; ++n) {
            Structure base;
            base.vocab = vocab_;
            base.relations["E"] = {};
            for (std::size_t i = 0; i < n; ++i) base.universe.push_back(static_cast<Element>(i));
            std::vector<std::pair<Element, Element>> slots;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j)
                    slots.emplace_back(static_cast<Element>(i), static_cast<Element>(j));
            }
            if (slots.size() > 20) throw CapError("undirected graph enumeration too large");
            std::set<std::string> seen;
            for (std::uint64_t mask = 0; mask < (1ULL << slots.size()); ++mask) {
                Structure s = base;
                for (std::size_t i = 0; i < slots.size(); ++i) {
                    if (mask & (1ULL << i)) {
                        s.relations["E"].insert({slots[i].first, slots[i].second});
                        s.relations["E"].insert({slots[i].second, slots[i].first});
                    }
                }
                if (seen.insert(canonical_key(s)).second) out.push_back(std::move(s));
            }
        }
        cache_[maxSize] = out;
        return out;
    }

private:
    Vocabulary vocab_;
    mutable std::mutex mutex_;
    mutable std::map<std::size_t, std::vector<Structure>> cache_;
};

class UnaryFamily : public Family {
public:
    explicit UnaryFamily(std::vector<std::string> predicates) : predicates_(std::move(predicates)) {
        std::sort(predicates_.begin(), predicates_.end());
        for (const auto& p : predicates_) vocab_.relations[p] = 1;
        vocab_.validate();
    }

    std::string name() const override { return "unary"; }
    Vocabulary vocabulary() const override { return vocab_; }
    bool contains(const Structure& s) const override { return s.vocab == vocab_; }

    // Isomorphism classes are the color-count vectors: one count per subset
    // of predicates.
    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        std::size_t colors = 1ULL << predicates_.size();
        std::vector<Structure> out;
        std::vector<std::size_t> counts(colors, 0);
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t color,
                                                                std::size_t left) {
            if (color + 1 == colors) {
                counts[color] = left;
                out.push_back(build(counts));
                return;
            }
            for (std::size_t take = 0; take <= left; ++take) {
                counts[color] = take;
                rec(color + 1, left - take);
            }
        };
        for (std::size_t n = 0; n <= maxSize; ++n) rec(0, n);
        return out;
    }

    Structure build(const std::vector<std::size_t>& counts) const {
        Structure s;
        s.vocab = vocab_;
        for (const auto& p : predicates_) s.relations[p] = {};
        Element next = 0;
        for (std::size_t color = 0; color < counts.size(); ++color) {
            for (std::size_t i = 0; i < counts[color]; ++i) {
                Element e = next++;
                s.universe.push_back(e);
                for (std::size_t bit = 0; bit < predicates_.size(); ++bit) {
                    if (color & (1ULL << bit)) s.relations[predicates_[bit]].insert({e});
                }
            }
        }
        return s;
    }

private:
    std::vector<std::string> predicates_;
    Vocabulary vocab_;
};

class WordFamily : public Family {
public:
    explicit WordFamily(std::vector<std::string> alphabet) : alphabet_(std::move(alphabet)) {
        if (alphabet_.empty()) throw PreconditionError("word family needs a non-empty alphabet");
        std::sort(alphabet_.begin(), alphabet_.end());
        vocab_.relations["le"] = 2;
        for (const auto& l : alphabet_) vocab_.relations[l] = 1;
        vocab_.validate();
    }

    std::string name() const override { return "words"; }
    Vocabulary vocabulary() const override { return vocab_; }

    bool contains(const Structure& s) const override {
        if (s.vocab != vocab_) return false;
        if (s.universe.empty()) return false;  // the empty word is not a member
        // le must be a reflexive total order
        const auto& le = s.relations.at("le");
        for (Element x : s.universe) {
            if (!le.count({x, x})) return false;
            for (Element y : s.universe) {
                bool xy = le.count({x, y}) != 0, yx = le.count({y, x}) != 0;
                if (!xy && !yx) return false;
                if (x != y && xy && yx) return false;
                for (Element z : s.universe) {
                    if (xy && le.count({y, z}) && !le.count({x, z})) return false;
                }
            }
        }
        // labels partition the universe
        for (Element x : s.universe) {
            int hits = 0;
            for (const auto& l : alphabet_) hits += s.relations.at(l).count({x}) ? 1 : 0;
            if (hits != 1) return false;
        }
        return true;
    }

    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        std::vector<Structure> out;
        std::vector<std::size_t> word;
        for (std::size_t n = 1; n <= maxSize; ++n) {
            word.assign(n, 0);
            while (true) {
                out.push_back(build(word));
                std::size_t pos = n;
                bool done = true;
                while (pos > 0) {
                    --pos;
                    if (++word[pos] < alphabet_.size()) {
                        done = false;
                        break;
                    }
                    word[pos] = 0;
                }
                if (done) break;
            }
        }
        return out;
    }

    Structure build(const std::vector<std::size_t>& word) const {
        Structure s;
        s.vocab = vocab_;
        for (const auto& [name, ar] : vocab_.relations) s.relations[name] = {};
        for (std::size_t i = 1; i <= word.size(); ++i) s.universe.push_back(static_cast<Element>(i));
        for (std::size_t i = 1; i <= word.size(); ++i) {
            for (std::size_t j = i; j <= word.size(); ++j)
                s.relations["le"].insert({static_cast<Element>(i), static_cast<Element>(j)});
            s.relations[alphabet_[word[i - 1]]].insert({static_cast<Element>(i)});
        }
        return s;
    }

private:
    std::vector<std::string> alphabet_;
    Vocabulary vocab_;
};

class PathUnionFamily : public Family {
public:
    explicit PathUnionFamily(int maxComponents) : maxComponents_(maxComponents) {
        if (maxComponents < 1) throw PreconditionError("path union family needs >= 1 component");
        vocab_.relations["E"] = 2;
    }

    std::string name() const override { return "paths"; }
    Vocabulary vocabulary() const override { return vocab_; }

    bool contains(const Structure& s) const override {
        if (s.vocab != vocab_) return false;
        const auto& e = s.relations.at("E");
        // symmetric, loop-free
        for (const Tuple& t : e) {
            if (t[0] == t[1]) return false;
            if (!e.count({t[1], t[0]})) return false;
        }
        // degree <= 2, acyclic, and at most maxComponents components
        std::map<Element, std::vector<Element>> adj;
        for (Element x : s.universe) adj[x];
        for (const Tuple& t : e) adj[t[0]].push_back(t[1]);
        for (auto& [x, nbrs] : adj) {
            if (nbrs.size() > 2) return false;
        }
        std::set<Element> seen;
        int components = 0;
        for (Element start : s.universe) {
            if (seen.count(start)) continue;
            ++components;
            // BFS counting edges; a tree component has edges = nodes - 1
            std::vector<Element> queue = {start};
            seen.insert(start);
            std::size_t nodes = 0, edgeEnds = 0;
            while (!queue.empty()) {
                Element x = queue.back();
                queue.pop_back();
                ++nodes;
                edgeEnds += adj[x].size();
                for (Element y : adj[x]) {
                    if (seen.insert(y).second) queue.push_back(y);
                }
            }
            if (edgeEnds != 2 * (nodes - 1)) return false;  // cycle
        }
        if (s.universe.empty()) return false;
        return components <= maxComponents_;
    }

    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        // multisets of path sizes (vertex counts), at most maxComponents_,
        // total <= maxSize, ordered by total size then lexicographically
        std::vector<Structure> out;
        std::vector<std::size_t> parts;
        std::vector<std::vector<std::size_t>> shapes;
        std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t minPart,
                                                                std::size_t left) {
            if (!parts.empty()) shapes.push_back(parts);
            if (parts.size() == static_cast<std::size_t>(maxComponents_)) return;
            for (std::size_t p = minPart; p <= left; ++p) {
                parts.push_back(p);
                rec(p, left - p);
                parts.pop_back();
            }
        };
        rec(1, maxSize);
        std::stable_sort(shapes.begin(), shapes.end(),
                         [](const auto& a, const auto& b) {
                             std::size_t sa = 0, sb = 0;
                             for (auto v : a) sa += v;
                             for (auto v : b) sb += v;
                             if (sa != sb) return sa < sb;
                             return a < b;
                         });
        for (const auto& shape : shapes) out.push_back(build(shape));
        return out;
    }

    Structure build(const std::vector<std::size_t>& pathSizes) const {
        Structure s;
        s.vocab = vocab_;
        s.relations["E"] = {};
        Element next = 0;
        for (std::size_t size : pathSizes) {
            Element first = next;
            for (std::size_t i = 0; i < size; ++i) s.universe.push_back(next++);
            for (Element v = first; v + 1 < next; ++v) {
                s.relations["E"].insert({v, v + 1});
                s.relations["E"].insert({v + 1, v});
            }
        }
        return s;
    }

private:
    int maxComponents_;
    Vocabulary vocab_;
};

class LabeledFamily : public Family {
public:
    LabeledFamily(FamilyPtr base, int labelCount) : base_(std::move(base)), p_(labelCount) {
        if (p_ < 1) throw PreconditionError("labeled family needs >= 1 label");
        vocab_ = base_->vocabulary();
        for (int i = 0; i < p_; ++i) vocab_.relations["Q" + std::to_string(i)] = 1;
    }

    std::string name() const override { return base_->name() + "-labeled"; }
    Vocabulary vocabulary() const override { return vocab_; }

    bool contains(const Structure& s) const override {
        if (s.vocab != vocab_) return false;
        // labels partition the universe
        for (Element x : s.universe) {
            int hits = 0;
            for (int i = 0; i < p_; ++i)
                hits += s.relations.at("Q" + std::to_string(i)).count({x}) ? 1 : 0;
            if (hits != 1) return false;
        }
        Structure reduct;
        reduct.vocab = base_->vocabulary();
        reduct.universe = s.universe;
        reduct.constants = s.constants;
        for (const auto& [name, ar] : reduct.vocab.relations) reduct.relations[name] = s.relations.at(name);
        return base_->contains(reduct);
    }

    std::vector<Structure> enumerate(std::size_t) const override {
        throw CapError("labeled families do not enumerate");
    }

private:
    FamilyPtr base_;
    int p_;
    Vocabulary vocab_;
};

class ModuloSentenceFamily : public Family {
public:
    ModuloSentenceFamily(FamilyPtr base, FormulaPtr sentence, Caps caps)
        : base_(std::move(base)), sentence_(std::move(sentence)), caps_(caps) {
        if (!is_sentence(sentence_))
            throw PreconditionError("class sentence must have no free variables");
    }

    std::string name() const override { return base_->name() + "-mod"; }
    Vocabulary vocabulary() const override { return base_->vocabulary(); }

    bool contains(const Structure& s) const override {
        return base_->contains(s) && evaluate_sentence(s, sentence_, caps_);
    }

    std::vector<Structure> enumerate(std::size_t maxSize) const override {
        std::vector<Structure> out;
        for (auto& s : base_->enumerate(maxSize)) {
            if (evaluate_sentence(s, sentence_, caps_)) out.push_back(std::move(s));
        }
        return out;
    }

private:
    FamilyPtr base_;
    FormulaPtr sentence_;
    Caps caps_;
};

}  // namespace

FamilyPtr explicit_family(std::vector<Structure> members, std::string name) {
    return std::make_shared<ExplicitFamily>(std::move(members), std::move(name));
}

FamilyPtr all_structures_family(const Vocabulary& vocab) {
    return std::make_shared<AllStructuresFamily>(vocab);
}

FamilyPtr undirected_graph_family() { return std::make_shared<UndirectedGraphFamily>(); }

FamilyPtr unary_family(const std::vector<std::string>& predicates) {
    return std::make_shared<UnaryFamily>(predicates);
}

FamilyPtr word_family(const std::vector<std::string>& alphabet) {
    return std::make_shared<WordFamily>(alphabet);
}

FamilyPtr path_union_family(int maxComponents) {
    return std::make_shared<PathUnionFamily>(maxComponents);
}

FamilyPtr labeled_family(FamilyPtr base, int labelCount) {
    return std::make_shared<LabeledFamily>(std::move(base), labelCount);
}

FamilyPtr modulo_sentence(FamilyPtr base, FormulaPtr classSentence, Caps caps) {
    return std::make_shared<ModuloSentenceFamily>(std::move(base), std::move(classSentence), caps);
}

FamilyPtr parse_family_spec(const std::string& spec) {
    auto colon = spec.find(':');
    std::string kind = colon == std::string::npos ? spec : spec.substr(0, colon);
    std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (kind == "graphs") {
        Vocabulary v;
        v.relations["E"] = 2;
        return all_structures_family(v);
    }
    if (kind == "all") {
        Vocabulary v;
        std::istringstream in(arg);
        std::string tok;
        while (std::getline(in, tok, ',')) {
            auto slash = tok.rfind('/');
            if (slash == std::string::npos)
                throw ParseError("family spec: expected NAME/ARITY, got '" + tok + "'");
            v.relations[tok.substr(0, slash)] = std::stoi(tok.substr(slash + 1));
        }
        return all_structures_family(v);
    }
    if (kind == "ugraphs") {
        return undirected_graph_family();
    }
    if (kind == "unary") {
        std::vector<std::string> preds;
        std::istringstream in(arg);
        std::string tok;
        while (std::getline(in, tok, ',')) preds.push_back(tok);
        return unary_family(preds);
    }
    if (kind == "words") {
        std::vector<std::string> letters;
        for (char c : arg) letters.push_back(std::string(1, c));
        return word_family(letters);
    }
    if (kind == "paths") {
        return path_union_family(arg.empty() ? 2 : std::stoi(arg));
    }
    throw ParseError("unknown family spec '" + spec + "'");
}

}  // namespace fmtk
