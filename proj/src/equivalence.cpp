#include "fmtk/equivalence.hpp"

#include <algorithm>
#include <unordered_set>
#include <sstream>

namespace fmtk {

TypeId TypeContext::intern(RankTypeNode node) {
    auto it = table_.find(node);
    if (it != table_.end()) return it->second;
    TypeId id = static_cast<TypeId>(nodes_.size());
    nodes_.push_back(node);
    table_.emplace(std::move(node), id);
    return id;
}

const RankTypeNode& TypeContext::node(TypeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }

namespace {

std::uint64_t fnv64(const std::string& s, std::uint64_t seed = 14695981039346656037ULL) {
    std::uint64_t h = seed;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

}  // namespace

std::string TypeContext::fingerprint(TypeId id) const {
    if (fingerprints_.size() < nodes_.size()) fingerprints_.resize(nodes_.size());
    std::string& memo = fingerprints_[static_cast<std::size_t>(id)];
    if (!memo.empty()) return memo;
    const RankTypeNode& n = node(id);
    std::vector<std::string> childFps;
    for (TypeId c : n.pointExtensions) childFps.push_back(fingerprint(c));
    std::sort(childFps.begin(), childFps.end());
    std::vector<std::string> setFps;
    for (TypeId c : n.setExtensions) setFps.push_back(fingerprint(c));
    std::sort(setFps.begin(), setFps.end());
    std::ostringstream material;
    material << (n.logic == Logic::FO ? "fo" : "mso") << '|' << n.rank << '|' << n.atomicCore
             << "|P";
    for (const auto& f : childFps) material << f << ',';
    material << "|S";
    for (const auto& f : setFps) material << f << ',';
    memo = hex64(fnv64(material.str()));
    return memo;
}

namespace {

// Indexed view of a structure: tuples travel as dense universe positions and
// relation membership probes hit packed hash sets, so atomic cores cost a few
// array/hash operations. MSO set moves are a stack of membership masks, never
// structure copies.
struct TypeEval {
    const Structure& s;
    Logic logic;
    TypeContext& ctx;
    std::vector<std::vector<bool>> sets;  // per expansion level, by position

    struct RelIndex {
        std::string name;
        int arity;
        std::unordered_set<std::uint64_t> packed;  // arity <= 3: 21-bit positions
        const std::set<Tuple>* fallback = nullptr;
    };
    std::vector<RelIndex> rels;
    std::vector<std::size_t> constantPositions;
    std::map<Element, std::size_t> indexOf;

    TypeEval(const Structure& structure, Logic lg, TypeContext& c)
        : s(structure), logic(lg), ctx(c) {
        for (std::size_t i = 0; i < s.universe.size(); ++i) indexOf[s.universe[i]] = i;
        for (const auto& [name, tuples] : s.relations) {
            RelIndex idx;
            idx.name = name;
            idx.arity = s.vocab.relations.at(name);
            if (idx.arity <= 3 && s.universe.size() < (1ULL << 21)) {
                for (const Tuple& t : tuples) {
                    std::uint64_t key = 0;
                    for (Element e : t) key = (key << 21) | (indexOf.at(e) + 1);
                    idx.packed.insert(key);
                }
            } else {
                idx.fallback = &tuples;
            }
            rels.push_back(std::move(idx));
        }
        for (const auto& name : s.vocab.constants)
            constantPositions.push_back(indexOf.at(s.constants.at(name)));
    }

    bool holds(const RelIndex& rel, const std::vector<std::size_t>& combined,
               const std::vector<std::size_t>& idx) const {
        if (rel.fallback) {
            Tuple probe;
            probe.reserve(idx.size());
            for (std::size_t p : idx) probe.push_back(s.universe[combined[p]]);
            return rel.fallback->count(probe) != 0;
        }
        std::uint64_t key = 0;
        for (std::size_t p : idx) key = (key << 21) | (combined[p] + 1);
        return rel.packed.count(key) != 0;
    }

    std::string atomic_core(const std::vector<std::size_t>& tuple) const {
        std::vector<std::size_t> combined = tuple;
        combined.insert(combined.end(), constantPositions.begin(), constantPositions.end());
        std::size_t m = combined.size();
        std::string out;
        out.reserve(m * m + 8 * rels.size() + 8);
        out += 'E';
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = i + 1; j < m; ++j)
                out += combined[i] == combined[j] ? '1' : '0';
        }
        std::vector<std::size_t> idx;
        for (const RelIndex& rel : rels) {
            out += '|';
            out += rel.name;
            out += ':';
            if (m == 0) continue;
            idx.assign(static_cast<std::size_t>(rel.arity), 0);
            while (true) {
                out += holds(rel, combined, idx) ? '1' : '0';
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
        for (std::size_t level = 0; level < sets.size(); ++level) {
            out += '|';
            for (std::size_t p : combined) out += sets[level][p] ? '1' : '0';
        }
        return out;
    }

    TypeId type_of(std::vector<std::size_t>& tuple, int m) {
        RankTypeNode node;
        node.logic = logic;
        node.rank = m;
        node.atomicCore = atomic_core(tuple);
        if (m > 0) {
            for (std::size_t b = 0; b < s.universe.size(); ++b) {
                tuple.push_back(b);
                node.pointExtensions.push_back(type_of(tuple, m - 1));
                tuple.pop_back();
            }
            std::sort(node.pointExtensions.begin(), node.pointExtensions.end());
            node.pointExtensions.erase(
                std::unique(node.pointExtensions.begin(), node.pointExtensions.end()),
                node.pointExtensions.end());
            if (logic == Logic::MSO) {
                std::size_t n = s.universe.size();
                if (n > 62) throw CapError("rank_type: MSO subset enumeration over 62 elements");
                sets.emplace_back(n, false);
                for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
                    auto& level = sets.back();
                    for (std::size_t i = 0; i < n; ++i) level[i] = (mask & (1ULL << i)) != 0;
                    node.setExtensions.push_back(type_of(tuple, m - 1));
                }
                sets.pop_back();
                std::sort(node.setExtensions.begin(), node.setExtensions.end());
                node.setExtensions.erase(
                    std::unique(node.setExtensions.begin(), node.setExtensions.end()),
                    node.setExtensions.end());
            }
        }
        return ctx.intern(std::move(node));
    }
};

void check_type_caps(const Structure& s, Logic logic, const Caps& caps, const char* who) {
    std::size_t cap = logic == Logic::FO ? caps.foType : caps.msoType;
    if (s.size() > cap)
        throw CapError(std::string(who) + ": universe size " + std::to_string(s.size()) +
                       " exceeds " + (logic == Logic::FO ? "FO" : "MSO") + " cap " +
                       std::to_string(cap));
}

}  // namespace

TypeId rank_type(TypeContext& ctx, const PointedStructure& a, int m, Logic logic, const Caps& caps) {
    if (m < 0) throw PreconditionError("rank_type: negative rank");
    a.validate();
    check_type_caps(a.structure, logic, caps, "rank_type");
    TypeEval eval(a.structure, logic, ctx);
    std::vector<std::size_t> tuple;
    tuple.reserve(a.tuple.size());
    for (Element e : a.tuple) tuple.push_back(eval.indexOf.at(e));
    return eval.type_of(tuple, m);
}

bool equivalent(const PointedStructure& a, const PointedStructure& b, int m, Logic logic,
                const Caps& caps) {
    if (a.structure.vocab != b.structure.vocab)
        throw PreconditionError("equivalent: vocabulary mismatch");
    if (a.tuple.size() != b.tuple.size())
        throw PreconditionError("equivalent: tuple length mismatch");
    TypeContext ctx;
    return rank_type(ctx, a, m, logic, caps) == rank_type(ctx, b, m, logic, caps);
}

// --- EF games ----------------------------------------------------------------

namespace {

// Game positions carry the tuples chosen so far plus, for MSO, the chosen
// sets as bitmasks over the ascending universe.
struct GameState {
    Tuple tupleA, tupleB;
    std::vector<std::uint64_t> setsA, setsB;
    int roundsLeft;

    auto operator<=>(const GameState&) const = default;
};

class EfGame {
public:
    EfGame(const PointedStructure& a, const PointedStructure& b, Logic logic, const Caps& caps)
        : a_(a.structure), b_(b.structure), logic_(logic) {
        check_type_caps(a_, logic, caps, "ef_game_decide");
        check_type_caps(b_, logic, caps, "ef_game_decide");
        if (logic == Logic::MSO && (a_.size() > 62 || b_.size() > 62))
            throw CapError("ef_game_decide: MSO subset enumeration over 62 elements");
        start_.tupleA = a.tuple;
        start_.tupleB = b.tuple;
    }

    bool duplicator_wins(int rounds) {
        GameState st = start_;
        st.roundsLeft = rounds;
        return wins(st);
    }

private:
    Structure expanded(const Structure& s, const std::vector<std::uint64_t>& sets) const {
        Structure out = s;
        for (std::size_t level = 0; level < sets.size(); ++level) {
            std::string name = "Xset" + std::to_string(level);
            out.vocab.relations[name] = 1;
            auto& rel = out.relations[name];
            for (std::size_t i = 0; i < s.universe.size(); ++i) {
                if (sets[level] & (1ULL << i)) rel.insert(Tuple{s.universe[i]});
            }
        }
        return out;
    }

    bool winning_position(const GameState& st) const {
        Structure ea = expanded(a_, st.setsA);
        Structure eb = expanded(b_, st.setsB);
        return is_partial_isomorphism(ea, st.tupleA, eb, st.tupleB);
    }

    bool wins(GameState& st) {
        if (st.roundsLeft == 0) return winning_position(st);
        auto memo = memo_.find(st);
        if (memo != memo_.end()) return memo->second;

        bool result = true;
        // Spoiler point move in A.
        for (Element a : a_.universe) {
            bool matched = false;
            for (Element b : b_.universe) {
                st.tupleA.push_back(a);
                st.tupleB.push_back(b);
                --st.roundsLeft;
                bool w = wins(st);
                ++st.roundsLeft;
                st.tupleA.pop_back();
                st.tupleB.pop_back();
                if (w) {
                    matched = true;
                    break;
                }
            }
            if (!matched) {
                result = false;
                break;
            }
        }
        // Spoiler point move in B.
        if (result) {
            for (Element b : b_.universe) {
                bool matched = false;
                for (Element a : a_.universe) {
                    st.tupleA.push_back(a);
                    st.tupleB.push_back(b);
                    --st.roundsLeft;
                    bool w = wins(st);
                    ++st.roundsLeft;
                    st.tupleA.pop_back();
                    st.tupleB.pop_back();
                    if (w) {
                        matched = true;
                        break;
                    }
                }
                if (!matched) {
                    result = false;
                    break;
                }
            }
        }
        if (result && logic_ == Logic::MSO) {
            result = set_moves_ok(st, /*spoilerInA=*/true) && set_moves_ok(st, /*spoilerInA=*/false);
        }
        memo_.emplace(st, result);
        return result;
    }

    bool set_moves_ok(GameState& st, bool spoilerInA) {
        const Structure& sp = spoilerInA ? a_ : b_;
        const Structure& du = spoilerInA ? b_ : a_;
        auto& spSets = spoilerInA ? st.setsA : st.setsB;
        auto& duSets = spoilerInA ? st.setsB : st.setsA;
        std::uint64_t spLimit = 1ULL << sp.universe.size();
        std::uint64_t duLimit = 1ULL << du.universe.size();
        for (std::uint64_t spMask = 0; spMask < spLimit; ++spMask) {
            bool matched = false;
            for (std::uint64_t duMask = 0; duMask < duLimit; ++duMask) {
                spSets.push_back(spMask);
                duSets.push_back(duMask);
                --st.roundsLeft;
                bool w = wins(st);
                ++st.roundsLeft;
                spSets.pop_back();
                duSets.pop_back();
                if (w) {
                    matched = true;
                    break;
                }
            }
            if (!matched) return false;
        }
        return true;
    }

    const Structure& a_;
    const Structure& b_;
    Logic logic_;
    GameState start_;
    std::map<GameState, bool> memo_;
};

}  // namespace

bool ef_game_decide(const PointedStructure& a, const PointedStructure& b, int m, Logic logic,
                    const Caps& caps) {
    if (a.structure.vocab != b.structure.vocab)
        throw PreconditionError("ef_game_decide: vocabulary mismatch");
    if (a.tuple.size() != b.tuple.size())
        throw PreconditionError("ef_game_decide: tuple length mismatch");
    if (m < 0) throw PreconditionError("ef_game_decide: negative round count");
    a.validate();
    b.validate();
    return EfGame(a, b, logic, caps).duplicator_wins(m);
}

std::size_t count_equivalence_classes(const std::vector<PointedStructure>& family, int m,
                                      Logic logic, const Caps& caps) {
    if (family.empty()) return 0;
    for (const auto& p : family) {
        if (p.structure.vocab != family[0].structure.vocab)
            throw PreconditionError("count_equivalence_classes: vocabulary mismatch");
        if (p.tuple.size() != family[0].tuple.size())
            throw PreconditionError("count_equivalence_classes: tuple length mismatch");
    }
    TypeContext ctx;
    std::set<TypeId> distinct;
    for (const auto& p : family) distinct.insert(rank_type(ctx, p, m, logic, caps));
    return distinct.size();
}

}  // namespace fmtk
