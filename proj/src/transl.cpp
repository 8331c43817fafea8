#include "fmtk/transl.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fmtk {

std::string scheme_variable(int i, int j, int dimension) {
    if (dimension == 1) return "x" + std::to_string(i);
    return "x" + std::to_string(i) + "_" + std::to_string(j);
}

void TranslationScheme::validate() const {
    if (dimension < 1) throw PreconditionError("scheme dimension must be >= 1");
    if (flavor == Logic::MSO && dimension != 1)
        throw PreconditionError("MSO translation schemes must be scalar");
    source.validate();
    target.validate();
    if (!target.constants.empty())
        throw PreconditionError("translation scheme targets must be relational");
    if (!domain) throw PreconditionError("scheme has no domain formula");
    std::set<std::string> allowed;
    for (int j = 1; j <= dimension; ++j) allowed.insert(scheme_variable(1, j, dimension));
    for (const auto& v : free_point_variables(domain)) {
        if (!allowed.count(v))
            throw PreconditionError("domain formula uses unexpected variable " + v);
    }
    for (const auto& [name, arity] : target.relations) {
        auto it = relationFormulas.find(name);
        if (it == relationFormulas.end())
            throw PreconditionError("scheme lacks a formula for relation " + name);
        std::set<std::string> ok;
        for (int i = 1; i <= arity; ++i) {
            for (int j = 1; j <= dimension; ++j) ok.insert(scheme_variable(i, j, dimension));
        }
        for (const auto& v : free_point_variables(it->second)) {
            if (!ok.count(v))
                throw PreconditionError("formula for " + name + " uses unexpected variable " + v);
        }
        if (flavor == Logic::FO && !is_fo(it->second))
            throw PreconditionError("FO scheme contains an MSO formula");
    }
    if (flavor == Logic::FO && !is_fo(domain))
        throw PreconditionError("FO scheme contains an MSO formula");
}

int scheme_rank(const TranslationScheme& xi) {
    int best = rank(xi.domain);
    for (const auto& [name, f] : xi.relationFormulas) best = std::max(best, rank(f));
    return best;
}

bool is_quantifier_free(const TranslationScheme& xi) {
    if (!is_quantifier_free(xi.domain)) return false;
    for (const auto& [name, f] : xi.relationFormulas) {
        if (!is_quantifier_free(f)) return false;
    }
    return true;
}

// --- structures --------------------------------------------------------------------

namespace {

// Canonical pairing: base-independent so that quantifier-free schemes take
// literal substructures to literal substructures. Guarded against overflow.
Element cantor_pair(Element x, Element y) {
    __int128 sum = static_cast<__int128>(x) + y;
    __int128 id = sum * (sum + 1) / 2 + y;
    if (id > (static_cast<__int128>(1) << 62))
        throw CapError("tuple id exceeds the representable range");
    return static_cast<Element>(id);
}

Element tuple_id(const Tuple& t) {
    Element id = t[0];
    for (std::size_t i = 1; i < t.size(); ++i) id = cantor_pair(id, t[i]);
    return id;
}

}  // namespace

Structure apply_structure(const TranslationScheme& xi, const Structure& a, const Caps& caps) {
    xi.validate();
    a.validate();
    if (a.vocab != xi.source)
        throw PreconditionError("structure vocabulary does not match the scheme source");
    int t = xi.dimension;

    std::vector<Tuple> domainTuples;
    {
        std::vector<Tuple> candidates = all_tuples(a, t);
        for (const Tuple& cand : candidates) {
            PointEnv env;
            for (int j = 1; j <= t; ++j)
                env[scheme_variable(1, j, t)] = cand[static_cast<std::size_t>(j - 1)];
            if (evaluate(a, env, {}, xi.domain, caps)) domainTuples.push_back(cand);
        }
    }

    Structure out;
    out.vocab = xi.target;
    std::map<Tuple, Element> idOf;
    for (const Tuple& cand : domainTuples) {
        Element id = t == 1 ? cand[0] : tuple_id(cand);
        idOf[cand] = id;
        out.universe.push_back(id);
    }
    std::sort(out.universe.begin(), out.universe.end());
    out.universe.erase(std::unique(out.universe.begin(), out.universe.end()), out.universe.end());
    if (out.universe.size() != domainTuples.size())
        throw VerificationError("tuple id collision in apply_structure");

    for (const auto& [name, arity] : xi.target.relations) {
        const FormulaPtr& formula = xi.relationFormulas.at(name);
        auto& rel = out.relations[name];
        // all arity-tuples of domain tuples, row-major
        std::vector<std::size_t> idx(static_cast<std::size_t>(arity), 0);
        if (domainTuples.empty()) continue;
        while (true) {
            PointEnv env;
            for (int i = 1; i <= arity; ++i) {
                const Tuple& component = domainTuples[idx[static_cast<std::size_t>(i - 1)]];
                for (int j = 1; j <= t; ++j)
                    env[scheme_variable(i, j, t)] = component[static_cast<std::size_t>(j - 1)];
            }
            if (evaluate(a, env, {}, formula, caps)) {
                Tuple mapped;
                for (int i = 1; i <= arity; ++i)
                    mapped.push_back(idOf.at(domainTuples[idx[static_cast<std::size_t>(i - 1)]]));
                rel.insert(std::move(mapped));
            }
            std::size_t pos = idx.size();
            bool done = true;
            while (pos > 0) {
                --pos;
                if (++idx[pos] < domainTuples.size()) {
                    done = false;
                    break;
                }
                idx[pos] = 0;
            }
            if (done) break;
        }
    }
    return out;
}

// --- formulas ----------------------------------------------------------------------

namespace {

class FormulaTranslator {
public:
    FormulaTranslator(const TranslationScheme& xi, const FormulaPtr& phi)
        : xi_(xi), t_(xi.dimension) {
        // avoid collisions between generated names and anything in sight
        for (const auto& v : all_point_variables(phi)) used_.insert(v);
        auto absorb = [&](const FormulaPtr& f) {
            for (const auto& v : all_point_variables(f)) used_.insert(v);
        };
        absorb(xi.domain);
        for (const auto& [name, f] : xi.relationFormulas) absorb(f);
        if (t_ >= 2) {
            for (const auto& v : free_point_variables(phi)) {
                for (int j = 1; j <= t_; ++j) used_.insert(v + "_" + std::to_string(j));
            }
        }
    }

    FormulaPtr run(const FormulaPtr& phi) {
        // free variables keep their names (suffixed per component)
        for (const auto& v : free_point_variables(phi)) vars_[v] = component_names(v);
        return rec(phi);
    }

private:
    std::vector<std::string> component_names(const std::string& v) {
        std::vector<std::string> out;
        if (t_ == 1) {
            out.push_back(v);
            return out;
        }
        for (int j = 1; j <= t_; ++j) out.push_back(v + "_" + std::to_string(j));
        return out;
    }

    std::string fresh_name(const char* prefix) {
        while (true) {
            std::string cand = prefix + std::to_string(++freshCounter_);
            if (!used_.count(cand) && (t_ == 1 || !used_.count(cand + "_1"))) {
                used_.insert(cand);
                return cand;
            }
        }
    }

    std::vector<std::string> fresh_tuple() {
        std::string base = fresh_name("q");
        std::vector<std::string> out;
        if (t_ == 1) {
            out.push_back(base);
            return out;
        }
        for (int j = 1; j <= t_; ++j) {
            out.push_back(base + "_" + std::to_string(j));
            used_.insert(out.back());
        }
        return out;
    }

    // Instantiates a scheme formula: its bound variables are renamed fresh,
    // its free variables x{i}(_{j}) are replaced by the given actual names.
    FormulaPtr instantiate(const FormulaPtr& schemeFormula,
                           const std::vector<std::vector<std::string>>& actuals) {
        Substitution subst;
        for (std::size_t i = 0; i < actuals.size(); ++i) {
            for (int j = 1; j <= t_; ++j) {
                subst.varToVar[scheme_variable(static_cast<int>(i + 1), j, t_)] =
                    actuals[i][static_cast<std::size_t>(j - 1)];
            }
        }
        return substitute(rename_bound(schemeFormula), subst);
    }

    FormulaPtr rename_bound(const FormulaPtr& f) {
        switch (f->kind) {
            case Formula::Kind::Exists:
            case Formula::Kind::Forall: {
                std::string fresh = fresh_name("w");
                FormulaPtr body = rename_bound(f->children[0]);
                body = substitute_binder(body, f->name, fresh);
                return f->kind == Formula::Kind::Exists ? f_exists(fresh, body)
                                                        : f_forall(fresh, body);
            }
            case Formula::Kind::ExistsSet:
            case Formula::Kind::ForallSet: {
                FormulaPtr body = rename_bound(f->children[0]);
                return f->kind == Formula::Kind::ExistsSet ? f_exists_set(f->name, body)
                                                           : f_forall_set(f->name, body);
            }
            case Formula::Kind::Not:
                return f_not(rename_bound(f->children[0]));
            case Formula::Kind::And:
                return f_and(rename_bound(f->children[0]), rename_bound(f->children[1]));
            case Formula::Kind::Or:
                return f_or(rename_bound(f->children[0]), rename_bound(f->children[1]));
            case Formula::Kind::Implies:
                return f_implies(rename_bound(f->children[0]), rename_bound(f->children[1]));
            default:
                return f;
        }
    }

    static FormulaPtr substitute_binder(const FormulaPtr& f, const std::string& from,
                                        const std::string& to) {
        Substitution subst;
        subst.varToVar[from] = to;
        return substitute(f, subst);
    }

    FormulaPtr domain_of(const std::vector<std::string>& tuple) {
        return instantiate(xi_.domain, {tuple});
    }

    FormulaPtr rec(const FormulaPtr& phi) {
        switch (phi->kind) {
            case Formula::Kind::True:
            case Formula::Kind::False:
                return phi;
            case Formula::Kind::Rel: {
                auto it = xi_.target.relations.find(phi->name);
                if (it == xi_.target.relations.end())
                    throw PreconditionError("formula mentions unknown target relation " +
                                            phi->name);
                std::vector<std::vector<std::string>> actuals;
                for (const Term& term : phi->terms) {
                    if (term.kind != Term::Kind::Variable)
                        throw PreconditionError(
                            "apply_formula supports variable arguments only");
                    actuals.push_back(vars_.at(term.name));
                }
                FormulaPtr out = instantiate(xi_.relationFormulas.at(phi->name), actuals);
                for (const auto& tuple : actuals) out = f_and(out, domain_of(tuple));
                return out;
            }
            case Formula::Kind::Eq: {
                for (const Term& term : phi->terms) {
                    if (term.kind != Term::Kind::Variable)
                        throw PreconditionError(
                            "apply_formula supports variable arguments only");
                }
                const auto& lhs = vars_.at(phi->terms[0].name);
                const auto& rhs = vars_.at(phi->terms[1].name);
                std::vector<FormulaPtr> eqs;
                for (int j = 0; j < t_; ++j)
                    eqs.push_back(f_eq(Term::var(lhs[static_cast<std::size_t>(j)]),
                                       Term::var(rhs[static_cast<std::size_t>(j)])));
                FormulaPtr out = f_and_all(eqs);
                out = f_and(out, domain_of(lhs));
                out = f_and(out, domain_of(rhs));
                return out;
            }
            case Formula::Kind::SetMember: {
                if (xi_.flavor != Logic::MSO || t_ != 1)
                    throw PreconditionError(
                        "set atoms require a scalar MSO translation scheme");
                const auto& x = vars_.at(phi->terms[0].name);
                return f_and(f_set_member(phi->name, Term::var(x[0])), domain_of(x));
            }
            case Formula::Kind::Not:
                return f_not(rec(phi->children[0]));
            case Formula::Kind::And:
                return f_and(rec(phi->children[0]), rec(phi->children[1]));
            case Formula::Kind::Or:
                return f_or(rec(phi->children[0]), rec(phi->children[1]));
            case Formula::Kind::Implies:
                return f_implies(rec(phi->children[0]), rec(phi->children[1]));
            case Formula::Kind::Exists:
            case Formula::Kind::Forall: {
                std::vector<std::string> tuple = fresh_tuple();
                auto saved = vars_.find(phi->name) != vars_.end()
                                 ? std::optional<std::vector<std::string>>(vars_[phi->name])
                                 : std::nullopt;
                vars_[phi->name] = tuple;
                FormulaPtr body = rec(phi->children[0]);
                if (saved)
                    vars_[phi->name] = *saved;
                else
                    vars_.erase(phi->name);
                if (phi->kind == Formula::Kind::Exists) {
                    FormulaPtr out = f_and(body, domain_of(tuple));
                    for (auto it = tuple.rbegin(); it != tuple.rend(); ++it)
                        out = f_exists(*it, out);
                    return out;
                }
                FormulaPtr out = f_implies(domain_of(tuple), body);
                for (auto it = tuple.rbegin(); it != tuple.rend(); ++it) out = f_forall(*it, out);
                return out;
            }
            case Formula::Kind::ExistsSet:
            case Formula::Kind::ForallSet: {
                if (xi_.flavor != Logic::MSO || t_ != 1)
                    throw PreconditionError(
                        "set quantifiers require a scalar MSO translation scheme");
                FormulaPtr body = rec(phi->children[0]);
                return phi->kind == Formula::Kind::ExistsSet ? f_exists_set(phi->name, body)
                                                             : f_forall_set(phi->name, body);
            }
        }
        throw Error("unreachable");
    }

    const TranslationScheme& xi_;
    int t_;
    int freshCounter_ = 0;
    std::map<std::string, std::vector<std::string>> vars_;
    std::set<std::string> used_;
};

}  // namespace

FormulaPtr apply_formula(const TranslationScheme& xi, const FormulaPtr& phi) {
    xi.validate();
    if (xi.flavor == Logic::FO && !is_fo(phi))
        throw PreconditionError("MSO formula with a vectorized/FO translation scheme");
    return FormulaTranslator(xi, phi).run(phi);
}

// --- builtin schemes -----------------------------------------------------------------

namespace {

Vocabulary graph_vocabulary() {
    Vocabulary v;
    v.relations["E"] = 2;
    return v;
}

TranslationScheme qf_scalar_graph_scheme(const std::string& edgeFormula) {
    TranslationScheme xi;
    xi.dimension = 1;
    xi.source = graph_vocabulary();
    xi.target = graph_vocabulary();
    xi.domain = f_eq(Term::var("x1"), Term::var("x1"));
    xi.relationFormulas["E"] = parse_formula(edgeFormula, xi.source);
    return xi;
}

}  // namespace

TranslationScheme builtin_scheme(const std::string& name) {
    if (name == "complement")
        return qf_scalar_graph_scheme("(!E(x1, x2) & !(x1 = x2))");
    if (name == "transpose") return qf_scalar_graph_scheme("E(x2, x1)");
    if (name == "cartesian" || name == "tensor") {
        TranslationScheme xi;
        xi.dimension = 2;
        xi.source = disjoint_sum_vocabulary(graph_vocabulary(), {0, 0});
        xi.target = graph_vocabulary();
        xi.domain = parse_formula("(P1(x1_1) & P2(x1_2))", xi.source);
        xi.relationFormulas["E"] = parse_formula("(E(x1_1, x2_1) & E(x1_2, x2_2))", xi.source);
        return xi;
    }
    if (name == "across_connect") {
        TranslationScheme xi;
        xi.dimension = 1;
        xi.source = copy_vocabulary(graph_vocabulary(), {0, 0});
        xi.target = graph_vocabulary();
        xi.domain = parse_formula("x1 = x1", xi.source);
        xi.relationFormulas["E"] =
            parse_formula("(E(x1, x2) | ((P1(x1) & P2(x2)) & sim(x1, x2)))", xi.source);
        return xi;
    }
    if (name == "line_graph") {
        TranslationScheme xi;
        xi.dimension = 2;
        xi.source = graph_vocabulary();
        xi.target = graph_vocabulary();
        xi.domain = parse_formula("E(x1_1, x1_2)", xi.source);
        xi.relationFormulas["E"] = parse_formula(
            "(((x1_1 = x2_1 | x1_1 = x2_2) | (x1_2 = x2_1 | x1_2 = x2_2)) & !(x1_1 = x2_1 & "
            "x1_2 = x2_2))",
            xi.source);
        return xi;
    }
    if (name == "order_successor") {
        // The non-quantifier-free fixture: E(x, y) iff y is the le-successor
        // of x, so finite linear orders map to directed paths.
        TranslationScheme xi;
        xi.dimension = 1;
        xi.source.relations["le"] = 2;
        xi.target = graph_vocabulary();
        xi.domain = parse_formula("x1 = x1", xi.source);
        xi.relationFormulas["E"] = parse_formula(
            "((le(x1, x2) & !(x1 = x2)) & forall z. ((le(x1, z) & !(x1 = z)) -> le(x2, z)))",
            xi.source);
        return xi;
    }
    throw PreconditionError("unknown builtin scheme: " + name);
}

// --- scheme files --------------------------------------------------------------------

TranslationScheme parse_scheme(const std::string& text) {
    TranslationScheme xi;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    bool sawDim = false, sawSource = false, sawTarget = false, sawDomain = false;
    std::map<std::string, std::string> relTexts;
    std::string domainText;

    auto parseVocab = [&](std::istringstream& ls) {
        Vocabulary v;
        std::string tok;
        while (ls >> tok) {
            auto slash = tok.rfind('/');
            if (slash == std::string::npos)
                throw ParseError("expected NAME/ARITY in vocabulary", line, 1);
            std::string name = tok.substr(0, slash);
            std::string kind = tok.substr(slash + 1);
            if (kind == "const")
                v.constants.push_back(name);
            else
                v.relations[name] = std::stoi(kind);
        }
        v.validate();
        return v;
    };

    while (std::getline(in, raw)) {
        ++line;
        std::istringstream ls(raw);
        std::string head;
        ls >> head;
        if (head.empty() || head[0] == '#') continue;
        if (head == "dim") {
            ls >> xi.dimension;
            sawDim = true;
        } else if (head == "logic") {
            std::string l;
            ls >> l;
            xi.flavor = parse_logic(l);
        } else if (head == "source") {
            xi.source = parseVocab(ls);
            sawSource = true;
        } else if (head == "target") {
            xi.target = parseVocab(ls);
            sawTarget = true;
        } else if (head == "domain:") {
            std::getline(ls, domainText);
            sawDomain = true;
        } else if (head == "rel") {
            std::string rel;
            ls >> rel;
            if (rel.empty() || rel.back() != ':')
                throw ParseError("expected 'rel NAME:'", line, 1);
            rel.pop_back();
            std::string body;
            std::getline(ls, body);
            relTexts[rel] = body;
        } else {
            throw ParseError("unknown scheme line '" + head + "'", line, 1);
        }
    }
    if (!sawDim || !sawSource || !sawTarget || !sawDomain)
        throw ParseError("scheme needs dim, source, target and domain lines");
    xi.domain = parse_formula(domainText, xi.source);
    for (const auto& [rel, body] : relTexts) xi.relationFormulas[rel] = parse_formula(body, xi.source);
    xi.validate();
    return xi;
}

TranslationScheme parse_scheme_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scheme(buf.str());
}

// --- operation registry -----------------------------------------------------------------

const std::map<std::string, RegisteredOperation>& operation_registry() {
    static const std::map<std::string, RegisteredOperation> registry = [] {
        std::map<std::string, RegisteredOperation> r;

        RegisteredOperation du;
        du.name = "disjoint-union";
        du.arity = 2;
        du.kind = RegisteredOperation::Kind::Sum;
        du.sumLike = true;
        {
            TranslationScheme xi;
            xi.dimension = 1;
            xi.source = disjoint_sum_vocabulary(graph_vocabulary(), {0, 0});
            xi.target = graph_vocabulary();
            xi.domain = parse_formula("x1 = x1", xi.source);
            xi.relationFormulas["E"] = parse_formula("E(x1, x2)", xi.source);
            du.scheme = xi;
        }
        r[du.name] = du;

        RegisteredOperation cart;
        cart.name = "cartesian";
        cart.arity = 2;
        cart.kind = RegisteredOperation::Kind::Sum;
        cart.sumLike = false;
        cart.scheme = builtin_scheme("cartesian");
        r[cart.name] = cart;
        RegisteredOperation tensor = cart;
        tensor.name = "tensor";
        r[tensor.name] = tensor;

        RegisteredOperation across;
        across.name = "across-connect";
        across.arity = 1;
        across.kind = RegisteredOperation::Kind::Copy;
        across.sumLike = true;
        across.scheme = builtin_scheme("across_connect");
        r[across.name] = across;

        RegisteredOperation comp;
        comp.name = "complement";
        comp.arity = 1;
        comp.kind = RegisteredOperation::Kind::Direct;
        comp.sumLike = true;
        comp.scheme = builtin_scheme("complement");
        r[comp.name] = comp;

        RegisteredOperation trans;
        trans.name = "transpose";
        trans.arity = 1;
        trans.kind = RegisteredOperation::Kind::Direct;
        trans.sumLike = true;
        trans.scheme = builtin_scheme("transpose");
        r[trans.name] = trans;

        return r;
    }();
    return registry;
}

namespace {

Structure eval_op_node(const LabeledOrderedTree& t, int id, const std::vector<Structure>& leaves,
                       std::size_t& nextLeaf, const Caps& caps) {
    const TreeNode& n = t.node(id);
    if (n.label == "<>") {
        if (!n.children.empty())
            throw PreconditionError("operation-tree leaf placeholder has children");
        if (nextLeaf >= leaves.size())
            throw PreconditionError("operation tree has more placeholders than inputs");
        return leaves[nextLeaf++];
    }
    auto it = operation_registry().find(n.label);
    if (it == operation_registry().end())
        throw PreconditionError("unregistered operation: " + n.label);
    const RegisteredOperation& op = it->second;
    if (static_cast<int>(n.children.size()) != op.arity)
        throw PreconditionError("operation " + n.label + " expects " + std::to_string(op.arity) +
                                " children, got " + std::to_string(n.children.size()));
    std::vector<Structure> args;
    for (int c : n.children) args.push_back(eval_op_node(t, c, leaves, nextLeaf, caps));
    switch (op.kind) {
        case RegisteredOperation::Kind::Direct:
            return apply_structure(op.scheme, args[0], caps);
        case RegisteredOperation::Kind::Sum: {
            std::vector<PointedStructure> parts;
            for (auto& a : args) parts.push_back({std::move(a), {}});
            return apply_structure(op.scheme, n_disjoint_sum(parts), caps);
        }
        case RegisteredOperation::Kind::Copy:
            return apply_structure(op.scheme, n_copy(args[0], std::vector<Tuple>(2)), caps);
    }
    throw Error("unreachable");
}

}  // namespace

Structure operation_tree_eval(const LabeledOrderedTree& opTree, const std::vector<Structure>& leaves,
                              const Caps& caps) {
    opTree.validate();
    if (opTree.empty()) throw PreconditionError("empty operation tree");
    std::size_t nextLeaf = 0;
    Structure out = eval_op_node(opTree, opTree.root, leaves, nextLeaf, caps);
    if (nextLeaf != leaves.size())
        throw PreconditionError("operation tree consumed " + std::to_string(nextLeaf) +
                                " inputs but " + std::to_string(leaves.size()) + " were given");
    return out;
}

}  // namespace fmtk
