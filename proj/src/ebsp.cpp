#include "fmtk/ebsp.hpp"

#include <algorithm>
#include <random>

namespace fmtk {

namespace {

// FO types of induced substructures of one fixed structure. Atomic types
// restrict, so the core of a tuple in an induced substructure equals its core
// in the full structure; candidate subsets only change which point extensions
// exist. Atomic cores are interned per suffix into dense integer tables and
// types are hash-consed on small integer keys, which keeps the per-candidate
// cost at a few microseconds during the subsets-by-size scan.
class SubsetTypeOracle {
public:
    using LocalId = int;

    SubsetTypeOracle(const Structure& a, Tuple pins, int m)
        : a_(a), pins_(std::move(pins)), m_(m), n_(a.universe.size()) {
        std::size_t slots = 1;
        for (int j = 0; j < m_; ++j) slots *= n_ + 1;
        atomBySuffix_.assign(slots * (static_cast<std::size_t>(m_) + 1), -1);
    }

    LocalId full_type() {
        std::vector<std::size_t> all(n_);
        for (std::size_t i = 0; i < n_; ++i) all[i] = i;
        return type_over_positions(all);
    }

    LocalId type_over(const std::vector<Element>& members) {
        std::vector<std::size_t> positions;
        positions.reserve(members.size());
        for (Element e : members) {
            auto it = std::lower_bound(a_.universe.begin(), a_.universe.end(), e);
            positions.push_back(static_cast<std::size_t>(it - a_.universe.begin()));
        }
        return type_over_positions(positions);
    }

private:
    LocalId type_over_positions(const std::vector<std::size_t>& members) {
        std::vector<std::size_t> suffix;
        return rec(suffix, m_, members);
    }

    LocalId rec(std::vector<std::size_t>& suffix, int m, const std::vector<std::size_t>& members) {
        int atomId = atom(suffix);
        // a rank-0 type is exactly its atomic core, so the atom id serves as
        // the type id directly (ranks never mix inside one child vector)
        if (m == 0) return atomId;
        std::vector<LocalId> children;
        children.reserve(members.size());
        for (std::size_t b : members) {
            suffix.push_back(b);
            children.push_back(rec(suffix, m - 1, members));
            suffix.pop_back();
        }
        std::sort(children.begin(), children.end());
        children.erase(std::unique(children.begin(), children.end()), children.end());
        key_.clear();
        key_.push_back(m);
        key_.push_back(atomId);
        key_.insert(key_.end(), children.begin(), children.end());
        return intern();
    }

    LocalId intern() {
        auto [it, fresh] = nodeIntern_.emplace(key_, nextId_);
        if (fresh) ++nextId_;
        return it->second;
    }

    // flat index of a suffix: length-tagged mixed radix over positions
    std::size_t suffix_slot(const std::vector<std::size_t>& suffix) const {
        std::size_t idx = 0;
        for (std::size_t p : suffix) idx = idx * (n_ + 1) + (p + 1);
        return idx * (static_cast<std::size_t>(m_) + 1) + suffix.size();
    }

    int atom(const std::vector<std::size_t>& suffix) {
        std::size_t slot = suffix_slot(suffix);
        int& memo = atomBySuffix_[slot];
        if (memo >= 0) return memo;
        Tuple combined = pins_;
        for (std::size_t p : suffix) combined.push_back(a_.universe[p]);
        for (const auto& name : a_.vocab.constants) combined.push_back(a_.constants.at(name));
        std::size_t n = combined.size();
        std::string out;
        out.reserve(n * n + 16);
        out += 'E';
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) out += combined[i] == combined[j] ? '1' : '0';
        }
        for (const auto& [name, tuples] : a_.relations) {
            out += '|';
            out += name;
            out += ':';
            int ar = a_.vocab.relations.at(name);
            if (n == 0) continue;
            Tuple probe(static_cast<std::size_t>(ar));
            std::vector<std::size_t> idx(static_cast<std::size_t>(ar), 0);
            while (true) {
                for (std::size_t p = 0; p < idx.size(); ++p) probe[p] = combined[idx[p]];
                out += tuples.count(probe) ? '1' : '0';
                std::size_t i = idx.size();
                bool done = true;
                while (i > 0) {
                    --i;
                    if (++idx[i] < n) {
                        done = false;
                        break;
                    }
                    idx[i] = 0;
                }
                if (done) break;
            }
        }
        auto [it, fresh] = atomIntern_.emplace(std::move(out), static_cast<int>(atomIntern_.size()));
        memo = it->second;
        return memo;
    }

    const Structure& a_;
    Tuple pins_;
    int m_;
    std::size_t n_;
    std::vector<int> atomBySuffix_;
    std::map<std::string, int> atomIntern_;
    std::map<std::vector<int>, LocalId> nodeIntern_;
    std::vector<int> key_;
    LocalId nextId_ = 0;
};

void verify_ebsp_witness(const Family& family, const Structure& a, const Structure& b,
                         const Tuple& pins, int m, std::size_t bound, Logic logic,
                         const Caps& caps) {
    if (!family.contains(b)) throw VerificationError("ebsp witness left the family");
    if (!is_induced_substructure(b, a))
        throw VerificationError("ebsp witness is not an induced substructure");
    for (Element e : pins) {
        if (!b.contains(e)) throw VerificationError("ebsp witness lost a pinned element");
    }
    if (b.size() > bound) throw VerificationError("ebsp witness exceeds the bound");
    TypeContext ctx;
    if (rank_type(ctx, {b, pins}, m, logic, caps) != rank_type(ctx, {a, pins}, m, logic, caps))
        throw VerificationError("ebsp witness is not rank-m equivalent");
}

}  // namespace

std::optional<Structure> ebsp_condition(const Family& family, const Structure& a, const Tuple& pins,
                                        int m, std::size_t bound, Logic logic, const Caps& caps) {
    a.validate();
    if (!family.contains(a)) throw PreconditionError("ebsp_condition: structure outside family");
    for (Element e : pins) {
        if (!a.contains(e)) throw PreconditionError("ebsp_condition: pin outside universe");
    }
    std::set<Element> mustContain(pins.begin(), pins.end());
    for (const auto& [name, e] : a.constants) mustContain.insert(e);

    std::optional<Structure> hit;
    if (logic == Logic::FO) {
        std::size_t cap = caps.foType;
        if (a.size() > cap) throw CapError("ebsp_condition: universe exceeds FO cap");
        SubsetTypeOracle oracle(a, pins, m);
        SubsetTypeOracle::LocalId target = oracle.full_type();
        for_each_subuniverse(a, bound, mustContain, [&](const std::set<Element>& x) {
            std::vector<Element> members(x.begin(), x.end());
            if (oracle.type_over(members) != target) return true;
            Structure b = induced_substructure(a, x);
            if (!family.contains(b)) return true;
            hit = std::move(b);
            return false;
        });
    } else {
        if (a.size() > caps.msoType) throw CapError("ebsp_condition: universe exceeds MSO cap");
        TypeContext ctx;
        TypeId target = rank_type(ctx, {a, pins}, m, logic, caps);
        for_each_subuniverse(a, bound, mustContain, [&](const std::set<Element>& x) {
            Structure b = induced_substructure(a, x);
            if (!family.contains(b)) return true;
            if (rank_type(ctx, {b, pins}, m, logic, caps) != target) return true;
            hit = std::move(b);
            return false;
        });
    }
    if (hit) verify_ebsp_witness(family, a, *hit, pins, m, bound, logic, caps);
    return hit;
}

WitnessProfile estimate_witness(const Family& family, std::size_t memberSizeCap, int k, int m,
                                Logic logic, int sampleCount, std::uint64_t seed, const Caps& caps) {
    WitnessProfile profile;
    profile.logic = logic;
    profile.k = k;
    profile.m = m;
    profile.familyName = family.name();
    std::vector<Structure> members = family.enumerate(memberSizeCap);
    if (members.empty()) throw PreconditionError("estimate_witness: empty family slice");
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pickMember(0, members.size() - 1);
    for (int s = 0; s < sampleCount; ++s) {
        const Structure& a = members[pickMember(rng)];
        if (a.universe.empty() && k > 0) continue;
        Tuple pins;
        if (!a.universe.empty()) {
            std::uniform_int_distribution<std::size_t> pickElement(0, a.universe.size() - 1);
            for (int i = 0; i < k; ++i) pins.push_back(a.universe[pickElement(rng)]);
        }
        std::set<Element> mustContain(pins.begin(), pins.end());
        for (const auto& [name, e] : a.constants) mustContain.insert(e);
        // the trivial case B = A always succeeds
        if (!ebsp_condition(family, a, pins, m, a.size(), logic, caps))
            throw VerificationError("estimate_witness: sample admits no witness at all");
        std::size_t lo = mustContain.size(), hi = a.size();
        while (lo < hi) {
            std::size_t mid = lo + (hi - lo) / 2;
            if (ebsp_condition(family, a, pins, m, mid, logic, caps))
                hi = mid;
            else
                lo = mid + 1;
        }
        profile.samples.push_back({a.size(), lo});
        profile.maxBound = std::max(profile.maxBound, lo);
    }
    return profile;
}

std::optional<Structure> reduce_k_to_zero(const Family& family, const Structure& a,
                                          const Tuple& pins, int m, std::size_t bound, Logic logic,
                                          const Caps& caps) {
    std::set<Element> distinct(pins.begin(), pins.end());
    if (distinct.size() != pins.size())
        throw PreconditionError("reduce_k_to_zero: pins must be distinct");
    int k = static_cast<int>(pins.size());
    FamilyPtr labeled = labeled_family(
        std::shared_ptr<const Family>(&family, [](const Family*) {}), k + 1);
    Structure expanded = tuple_pin_expand(a, pins);
    auto labeledHit = ebsp_condition(*labeled, expanded, {}, m, bound, logic, caps);
    if (!labeledHit) return std::nullopt;
    // strip the Q labels
    Structure b;
    b.vocab = a.vocab;
    b.universe = labeledHit->universe;
    b.constants = labeledHit->constants;
    for (const auto& [name, ar] : a.vocab.relations) b.relations[name] = labeledHit->relations.at(name);
    // the stripped witness must satisfy the original k-condition
    verify_ebsp_witness(family, a, b, pins, m, bound, logic, caps);
    return b;
}

TheoryDecision decide_bounded_theory(const Family& family,
                                     const std::function<std::size_t(int)>& witness,
                                     const FormulaPtr& phi, Logic logic, const Caps& caps) {
    if (!is_sentence(phi)) throw PreconditionError("decide_bounded_theory: phi must be a sentence");
    if (logic == Logic::FO && !is_fo(phi))
        throw PreconditionError("decide_bounded_theory: MSO sentence with logic fo");
    TheoryDecision out;
    int m = rank(phi);
    out.checkedBound = witness(m);
    for (const Structure& c : family.enumerate(out.checkedBound)) {
        if (!evaluate_sentence(c, phi, caps)) {
            out.inTheory = false;
            out.certificate = c;
            return out;
        }
    }
    out.inTheory = true;
    return out;
}

}  // namespace fmtk
