#include "fmtk/logic.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace fmtk {

bool Formula::operator==(const Formula& o) const {
    if (kind != o.kind || name != o.name || terms != o.terms ||
        children.size() != o.children.size())
        return false;
    for (std::size_t i = 0; i < children.size(); ++i) {
        if (!(*children[i] == *o.children[i])) return false;
    }
    return true;
}

namespace {

FormulaPtr make(Formula::Kind kind, std::string name, std::vector<Term> terms,
                std::vector<FormulaPtr> children) {
    auto f = std::make_shared<Formula>();
    f->kind = kind;
    f->name = std::move(name);
    f->terms = std::move(terms);
    f->children = std::move(children);
    return f;
}

}  // namespace

FormulaPtr f_true() { return make(Formula::Kind::True, "", {}, {}); }
FormulaPtr f_false() { return make(Formula::Kind::False, "", {}, {}); }
FormulaPtr f_rel(std::string name, std::vector<Term> terms) {
    return make(Formula::Kind::Rel, std::move(name), std::move(terms), {});
}
FormulaPtr f_eq(Term a, Term b) { return make(Formula::Kind::Eq, "", {std::move(a), std::move(b)}, {}); }
FormulaPtr f_set_member(std::string setVar, Term t) {
    return make(Formula::Kind::SetMember, std::move(setVar), {std::move(t)}, {});
}
FormulaPtr f_not(FormulaPtr a) { return make(Formula::Kind::Not, "", {}, {std::move(a)}); }
FormulaPtr f_and(FormulaPtr a, FormulaPtr b) {
    return make(Formula::Kind::And, "", {}, {std::move(a), std::move(b)});
}
FormulaPtr f_or(FormulaPtr a, FormulaPtr b) {
    return make(Formula::Kind::Or, "", {}, {std::move(a), std::move(b)});
}
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b) {
    return make(Formula::Kind::Implies, "", {}, {std::move(a), std::move(b)});
}
FormulaPtr f_exists(std::string var, FormulaPtr body) {
    return make(Formula::Kind::Exists, std::move(var), {}, {std::move(body)});
}
FormulaPtr f_forall(std::string var, FormulaPtr body) {
    return make(Formula::Kind::Forall, std::move(var), {}, {std::move(body)});
}
FormulaPtr f_exists_set(std::string var, FormulaPtr body) {
    return make(Formula::Kind::ExistsSet, std::move(var), {}, {std::move(body)});
}
FormulaPtr f_forall_set(std::string var, FormulaPtr body) {
    return make(Formula::Kind::ForallSet, std::move(var), {}, {std::move(body)});
}

FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return f_true();
    FormulaPtr acc = fs[0];
    for (std::size_t i = 1; i < fs.size(); ++i) acc = f_and(acc, fs[i]);
    return acc;
}

FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs) {
    if (fs.empty()) return f_false();
    FormulaPtr acc = fs[0];
    for (std::size_t i = 1; i < fs.size(); ++i) acc = f_or(acc, fs[i]);
    return acc;
}

std::string to_string(Logic logic) { return logic == Logic::FO ? "fo" : "mso"; }

Logic parse_logic(const std::string& text) {
    if (text == "fo" || text == "FO") return Logic::FO;
    if (text == "mso" || text == "MSO") return Logic::MSO;
    throw ParseError("unknown logic '" + text + "' (expected fo or mso)");
}

int rank(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::True:
        case Formula::Kind::False:
        case Formula::Kind::Rel:
        case Formula::Kind::Eq:
        case Formula::Kind::SetMember:
            return 0;
        case Formula::Kind::Not:
            return rank(f->children[0]);
        case Formula::Kind::And:
        case Formula::Kind::Or:
        case Formula::Kind::Implies:
            return std::max(rank(f->children[0]), rank(f->children[1]));
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
        case Formula::Kind::ExistsSet:
        case Formula::Kind::ForallSet:
            return 1 + rank(f->children[0]);
    }
    throw Error("unreachable");
}

bool is_fo(const FormulaPtr& f) {
    if (f->kind == Formula::Kind::SetMember || f->kind == Formula::Kind::ExistsSet ||
        f->kind == Formula::Kind::ForallSet)
        return false;
    for (const auto& c : f->children) {
        if (!is_fo(c)) return false;
    }
    return true;
}

bool is_quantifier_free(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
        case Formula::Kind::ExistsSet:
        case Formula::Kind::ForallSet:
            return false;
        default:
            break;
    }
    for (const auto& c : f->children) {
        if (!is_quantifier_free(c)) return false;
    }
    return true;
}

namespace {

void collect_point_vars(const FormulaPtr& f, std::set<std::string>& bound,
                        std::set<std::string>& free) {
    switch (f->kind) {
        case Formula::Kind::Rel:
        case Formula::Kind::Eq:
        case Formula::Kind::SetMember:
            for (const Term& t : f->terms) {
                if (t.kind == Term::Kind::Variable && !bound.count(t.name)) free.insert(t.name);
            }
            return;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            bool wasBound = bound.count(f->name) != 0;
            bound.insert(f->name);
            collect_point_vars(f->children[0], bound, free);
            if (!wasBound) bound.erase(f->name);
            return;
        }
        default:
            for (const auto& c : f->children) collect_point_vars(c, bound, free);
            return;
    }
}

void collect_set_vars(const FormulaPtr& f, std::set<std::string>& bound,
                      std::set<std::string>& free) {
    switch (f->kind) {
        case Formula::Kind::SetMember:
            if (!bound.count(f->name)) free.insert(f->name);
            return;
        case Formula::Kind::ExistsSet:
        case Formula::Kind::ForallSet: {
            bool wasBound = bound.count(f->name) != 0;
            bound.insert(f->name);
            collect_set_vars(f->children[0], bound, free);
            if (!wasBound) bound.erase(f->name);
            return;
        }
        default:
            for (const auto& c : f->children) collect_set_vars(c, bound, free);
            return;
    }
}

void collect_all_point_vars(const FormulaPtr& f, std::set<std::string>& out) {
    switch (f->kind) {
        case Formula::Kind::Rel:
        case Formula::Kind::Eq:
        case Formula::Kind::SetMember:
            for (const Term& t : f->terms) {
                if (t.kind == Term::Kind::Variable) out.insert(t.name);
            }
            return;
        case Formula::Kind::Exists:
        case Formula::Kind::Forall:
            out.insert(f->name);
            collect_all_point_vars(f->children[0], out);
            return;
        default:
            for (const auto& c : f->children) collect_all_point_vars(c, out);
            return;
    }
}

}  // namespace

std::set<std::string> free_point_variables(const FormulaPtr& f) {
    std::set<std::string> bound, free;
    collect_point_vars(f, bound, free);
    return free;
}

std::set<std::string> free_set_variables(const FormulaPtr& f) {
    std::set<std::string> bound, free;
    collect_set_vars(f, bound, free);
    return free;
}

std::set<std::string> all_point_variables(const FormulaPtr& f) {
    std::set<std::string> out;
    collect_all_point_vars(f, out);
    return out;
}

bool is_sentence(const FormulaPtr& f) {
    return free_point_variables(f).empty() && free_set_variables(f).empty();
}

// --- printing ----------------------------------------------------------------

namespace {

std::string print_term(const Term& t) { return t.name; }

}  // namespace

std::string print_formula(const FormulaPtr& f) {
    switch (f->kind) {
        case Formula::Kind::True:
            return "true";
        case Formula::Kind::False:
            return "false";
        case Formula::Kind::Rel:
        case Formula::Kind::SetMember: {
            std::string out = f->name + "(";
            for (std::size_t i = 0; i < f->terms.size(); ++i) {
                if (i) out += ", ";
                out += print_term(f->terms[i]);
            }
            return out + ")";
        }
        case Formula::Kind::Eq:
            return print_term(f->terms[0]) + " = " + print_term(f->terms[1]);
        case Formula::Kind::Not:
            return "!" + ((f->children[0]->kind == Formula::Kind::Rel ||
                           f->children[0]->kind == Formula::Kind::SetMember ||
                           f->children[0]->kind == Formula::Kind::True ||
                           f->children[0]->kind == Formula::Kind::False ||
                           f->children[0]->kind == Formula::Kind::Not)
                              ? print_formula(f->children[0])
                              : "(" + print_formula(f->children[0]) + ")");
        case Formula::Kind::And:
            return "(" + print_formula(f->children[0]) + " & " + print_formula(f->children[1]) + ")";
        case Formula::Kind::Or:
            return "(" + print_formula(f->children[0]) + " | " + print_formula(f->children[1]) + ")";
        case Formula::Kind::Implies:
            return "(" + print_formula(f->children[0]) + " -> " + print_formula(f->children[1]) +
                   ")";
        case Formula::Kind::Exists:
            return "exists " + f->name + ". " + print_formula(f->children[0]);
        case Formula::Kind::Forall:
            return "forall " + f->name + ". " + print_formula(f->children[0]);
        case Formula::Kind::ExistsSet:
            return "Exists " + f->name + ". " + print_formula(f->children[0]);
        case Formula::Kind::ForallSet:
            return "Forall " + f->name + ". " + print_formula(f->children[0]);
    }
    throw Error("unreachable");
}

// --- parsing -----------------------------------------------------------------

namespace {

struct FmlToken {
    enum class Kind { Ident, LParen, RParen, Comma, Eq, Bang, Amp, Pipe, Arrow, Dot, End };
    Kind kind;
    std::string text;
    int line;
    int column;
};

class FmlLexer {
public:
    explicit FmlLexer(const std::string& text) : text_(text) { advance(); }

    const FmlToken& peek() const { return current_; }

    FmlToken take() {
        FmlToken t = current_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++col_;
                ++pos_;
            } else if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
        int line = line_, col = col_;
        if (pos_ >= text_.size()) {
            current_ = {FmlToken::Kind::End, "", line, col};
            return;
        }
        char c = text_[pos_];
        auto single = [&](FmlToken::Kind k) {
            current_ = {k, std::string(1, c), line, col};
            ++pos_;
            ++col_;
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                           text_[pos_] == '_'))
                ++pos_;
            std::string word = text_.substr(start, pos_ - start);
            col_ += static_cast<int>(word.size());
            current_ = {FmlToken::Kind::Ident, word, line, col};
        } else if (c == '(') {
            single(FmlToken::Kind::LParen);
        } else if (c == ')') {
            single(FmlToken::Kind::RParen);
        } else if (c == ',') {
            single(FmlToken::Kind::Comma);
        } else if (c == '=') {
            single(FmlToken::Kind::Eq);
        } else if (c == '!') {
            single(FmlToken::Kind::Bang);
        } else if (c == '&') {
            single(FmlToken::Kind::Amp);
        } else if (c == '|') {
            single(FmlToken::Kind::Pipe);
        } else if (c == '.') {
            single(FmlToken::Kind::Dot);
        } else if (c == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] == '>') {
            current_ = {FmlToken::Kind::Arrow, "->", line, col};
            pos_ += 2;
            col_ += 2;
        } else {
            throw ParseError("unexpected character '" + std::string(1, c) + "'", line, col);
        }
    }

    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
    FmlToken current_{FmlToken::Kind::End, "", 1, 1};
};

class FmlParser {
public:
    FmlParser(const std::string& text, const std::optional<Vocabulary>& vocab)
        : lexer_(text), vocab_(vocab) {}

    FormulaPtr parse() {
        FormulaPtr f = formula();
        const FmlToken& t = lexer_.peek();
        if (t.kind != FmlToken::Kind::End)
            throw ParseError("trailing input after formula", t.line, t.column);
        return f;
    }

private:
    static bool lowercase_start(const std::string& s) {
        return !s.empty() && (std::islower(static_cast<unsigned char>(s[0])) || s[0] == '_');
    }

    FmlToken expect(FmlToken::Kind kind, const char* what) {
        FmlToken t = lexer_.take();
        if (t.kind != kind) throw ParseError(std::string("expected ") + what, t.line, t.column);
        return t;
    }

    Term term() {
        FmlToken t = expect(FmlToken::Kind::Ident, "term");
        if (vocab_ && vocab_->hasConstant(t.text)) return Term::constant(t.text);
        if (!lowercase_start(t.text))
            throw ParseError("term '" + t.text + "' must be a lowercase variable or a constant",
                             t.line, t.column);
        return Term::var(t.text);
    }

    FormulaPtr formula() {
        const FmlToken& t = lexer_.peek();
        switch (t.kind) {
            case FmlToken::Kind::Bang: {
                lexer_.take();
                return f_not(formula());
            }
            case FmlToken::Kind::LParen: {
                lexer_.take();
                FormulaPtr left = formula();
                FmlToken op = lexer_.take();
                FormulaPtr right;
                switch (op.kind) {
                    case FmlToken::Kind::Amp:
                        right = formula();
                        expect(FmlToken::Kind::RParen, "')'");
                        return f_and(left, right);
                    case FmlToken::Kind::Pipe:
                        right = formula();
                        expect(FmlToken::Kind::RParen, "')'");
                        return f_or(left, right);
                    case FmlToken::Kind::Arrow:
                        right = formula();
                        expect(FmlToken::Kind::RParen, "')'");
                        return f_implies(left, right);
                    case FmlToken::Kind::RParen:
                        return left;
                    default:
                        throw ParseError("expected '&', '|', '->' or ')'", op.line, op.column);
                }
            }
            case FmlToken::Kind::Ident:
                return ident_formula();
            default:
                throw ParseError("expected formula", t.line, t.column);
        }
    }

    FormulaPtr ident_formula() {
        FmlToken head = lexer_.take();
        const std::string& word = head.text;
        if (word == "true") return f_true();
        if (word == "false") return f_false();
        if (word == "exists" || word == "forall") {
            FmlToken v = expect(FmlToken::Kind::Ident, "variable");
            if (!lowercase_start(v.text))
                throw ParseError("point variable must be lowercase", v.line, v.column);
            expect(FmlToken::Kind::Dot, "'.'");
            FormulaPtr body = formula();
            return word == "exists" ? f_exists(v.text, body) : f_forall(v.text, body);
        }
        if (word == "Exists" || word == "Forall") {
            FmlToken v = expect(FmlToken::Kind::Ident, "set variable");
            if (lowercase_start(v.text))
                throw ParseError("set variable must start uppercase", v.line, v.column);
            expect(FmlToken::Kind::Dot, "'.'");
            boundSetVars_.push_back(v.text);
            FormulaPtr body = formula();
            boundSetVars_.pop_back();
            return word == "Exists" ? f_exists_set(v.text, body) : f_forall_set(v.text, body);
        }
        const FmlToken& next = lexer_.peek();
        if (next.kind == FmlToken::Kind::LParen) {
            lexer_.take();
            std::vector<Term> args;
            if (lexer_.peek().kind != FmlToken::Kind::RParen) {
                args.push_back(term());
                while (lexer_.peek().kind == FmlToken::Kind::Comma) {
                    lexer_.take();
                    args.push_back(term());
                }
            }
            expect(FmlToken::Kind::RParen, "')'");
            bool relationKnown = vocab_ && vocab_->hasRelation(word);
            // An uppercase application is a set atom when the name is not a
            // declared relation; without a vocabulary, when it is bound by an
            // enclosing set quantifier.
            bool setAtom = !lowercase_start(word) &&
                           (vocab_ ? !relationKnown
                                   : std::find(boundSetVars_.begin(), boundSetVars_.end(), word) !=
                                         boundSetVars_.end());
            if (setAtom) {
                if (args.size() != 1)
                    throw ParseError("set atom '" + word + "' takes exactly one term", head.line,
                                     head.column);
                return f_set_member(word, args[0]);
            }
            if (vocab_) {
                if (!relationKnown)
                    throw ParseError("unknown relation '" + word + "'", head.line, head.column);
                int ar = vocab_->relations.at(word);
                if (static_cast<int>(args.size()) != ar)
                    throw ParseError("relation " + word + " expects " + std::to_string(ar) +
                                         " arguments, got " + std::to_string(args.size()),
                                     head.line, head.column);
            }
            return f_rel(word, std::move(args));
        }
        if (next.kind == FmlToken::Kind::Eq) {
            lexer_.take();
            Term lhs = vocab_ && vocab_->hasConstant(word) ? Term::constant(word) : Term::var(word);
            if (lhs.kind == Term::Kind::Variable && !lowercase_start(word))
                throw ParseError("term '" + word + "' must be a lowercase variable or a constant",
                                 head.line, head.column);
            Term rhs = term();
            return f_eq(lhs, rhs);
        }
        throw ParseError("expected '(' or '=' after identifier '" + word + "'", next.line,
                         next.column);
    }

    FmlLexer lexer_;
    const std::optional<Vocabulary>& vocab_;
    std::vector<std::string> boundSetVars_;
};

}  // namespace

FormulaPtr parse_formula(const std::string& text, const std::optional<Vocabulary>& vocab) {
    return FmlParser(text, vocab).parse();
}

FormulaPtr parse_formula_file(const std::string& path, const std::optional<Vocabulary>& vocab) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_formula(buf.str(), vocab);
}

// --- evaluation -----------------------------------------------------------------

namespace {

bool contains_set_quantifier(const FormulaPtr& f) {
    if (f->kind == Formula::Kind::ExistsSet || f->kind == Formula::Kind::ForallSet) return true;
    for (const auto& c : f->children) {
        if (contains_set_quantifier(c)) return true;
    }
    return false;
}

Element resolve(const Structure& a, const PointEnv& env, const Term& t) {
    if (t.kind == Term::Kind::Variable) {
        auto it = env.find(t.name);
        if (it != env.end()) return it->second;
        auto ct = a.constants.find(t.name);
        if (ct != a.constants.end()) return ct->second;
        throw PreconditionError("unbound variable: " + t.name);
    }
    return a.constant(t.name);
}

bool eval_rec(const Structure& a, PointEnv& pe, SetEnv& se, const FormulaPtr& f, const Caps& caps) {
    switch (f->kind) {
        case Formula::Kind::True:
            return true;
        case Formula::Kind::False:
            return false;
        case Formula::Kind::Rel: {
            Tuple args;
            args.reserve(f->terms.size());
            for (const Term& t : f->terms) args.push_back(resolve(a, pe, t));
            return a.holds(f->name, args);
        }
        case Formula::Kind::Eq:
            return resolve(a, pe, f->terms[0]) == resolve(a, pe, f->terms[1]);
        case Formula::Kind::SetMember: {
            auto it = se.find(f->name);
            if (it == se.end()) throw PreconditionError("unbound set variable: " + f->name);
            return it->second.count(resolve(a, pe, f->terms[0])) != 0;
        }
        case Formula::Kind::Not:
            return !eval_rec(a, pe, se, f->children[0], caps);
        case Formula::Kind::And:
            return eval_rec(a, pe, se, f->children[0], caps) &&
                   eval_rec(a, pe, se, f->children[1], caps);
        case Formula::Kind::Or:
            return eval_rec(a, pe, se, f->children[0], caps) ||
                   eval_rec(a, pe, se, f->children[1], caps);
        case Formula::Kind::Implies:
            return !eval_rec(a, pe, se, f->children[0], caps) ||
                   eval_rec(a, pe, se, f->children[1], caps);
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            bool isExists = f->kind == Formula::Kind::Exists;
            auto previous = pe.find(f->name) != pe.end() ? std::optional<Element>(pe[f->name])
                                                         : std::nullopt;
            bool result = !isExists;
            for (Element e : a.universe) {
                pe[f->name] = e;
                bool sub = eval_rec(a, pe, se, f->children[0], caps);
                if (isExists && sub) {
                    result = true;
                    break;
                }
                if (!isExists && !sub) {
                    result = false;
                    break;
                }
            }
            if (previous)
                pe[f->name] = *previous;
            else
                pe.erase(f->name);
            return result;
        }
        case Formula::Kind::ExistsSet:
        case Formula::Kind::ForallSet: {
            bool isExists = f->kind == Formula::Kind::ExistsSet;
            auto previous = se.find(f->name) != se.end()
                                ? std::optional<std::set<Element>>(se[f->name])
                                : std::nullopt;
            std::size_t n = a.universe.size();
            bool result = !isExists;
            for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
                std::set<Element> subset;
                for (std::size_t i = 0; i < n; ++i) {
                    if (mask & (1ULL << i)) subset.insert(a.universe[i]);
                }
                se[f->name] = std::move(subset);
                bool sub = eval_rec(a, pe, se, f->children[0], caps);
                if (isExists && sub) {
                    result = true;
                    break;
                }
                if (!isExists && !sub) {
                    result = false;
                    break;
                }
            }
            if (previous)
                se[f->name] = *previous;
            else
                se.erase(f->name);
            return result;
        }
    }
    throw Error("unreachable");
}

}  // namespace

bool evaluate(const Structure& a, const PointEnv& pointEnv, const SetEnv& setEnv,
              const FormulaPtr& f, const Caps& caps) {
    std::size_t cap = contains_set_quantifier(f) ? caps.msoEval : caps.foEval;
    if (a.size() > cap)
        throw CapError("evaluate: universe size " + std::to_string(a.size()) +
                       " exceeds cap " + std::to_string(cap));
    for (const auto& [name, e] : pointEnv) {
        if (!a.contains(e))
            throw PreconditionError("environment element outside universe for " + name);
    }
    for (const auto& [name, xs] : setEnv) {
        for (Element e : xs) {
            if (!a.contains(e))
                throw PreconditionError("environment set element outside universe for " + name);
        }
    }
    PointEnv pe = pointEnv;
    SetEnv se = setEnv;
    return eval_rec(a, pe, se, f, caps);
}

bool evaluate_sentence(const Structure& a, const FormulaPtr& f, const Caps& caps) {
    if (!is_sentence(f)) throw PreconditionError("formula has free variables");
    return evaluate(a, {}, {}, f, caps);
}

// --- relativization --------------------------------------------------------------

namespace {

FormulaPtr relativize_rec(const FormulaPtr& f, const std::vector<std::string>& xs,
                          std::map<std::string, std::string>& env) {
    switch (f->kind) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return f;
        case Formula::Kind::Rel:
        case Formula::Kind::Eq: {
            std::vector<Term> terms;
            terms.reserve(f->terms.size());
            for (const Term& t : f->terms) {
                if (t.kind == Term::Kind::Variable) {
                    auto it = env.find(t.name);
                    if (it == env.end())
                        throw PreconditionError("free variable in relativized sentence: " + t.name);
                    terms.push_back(Term::var(it->second));
                } else {
                    terms.push_back(t);
                }
            }
            return f->kind == Formula::Kind::Rel ? f_rel(f->name, std::move(terms))
                                                 : f_eq(terms[0], terms[1]);
        }
        case Formula::Kind::Not:
            return f_not(relativize_rec(f->children[0], xs, env));
        case Formula::Kind::And:
            return f_and(relativize_rec(f->children[0], xs, env),
                         relativize_rec(f->children[1], xs, env));
        case Formula::Kind::Or:
            return f_or(relativize_rec(f->children[0], xs, env),
                        relativize_rec(f->children[1], xs, env));
        case Formula::Kind::Implies:
            return f_implies(relativize_rec(f->children[0], xs, env),
                             relativize_rec(f->children[1], xs, env));
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            std::vector<FormulaPtr> parts;
            parts.reserve(xs.size());
            auto previous = env.find(f->name) != env.end()
                                ? std::optional<std::string>(env[f->name])
                                : std::nullopt;
            for (const std::string& x : xs) {
                env[f->name] = x;
                parts.push_back(relativize_rec(f->children[0], xs, env));
            }
            if (previous)
                env[f->name] = *previous;
            else
                env.erase(f->name);
            return f->kind == Formula::Kind::Exists ? f_or_all(parts) : f_and_all(parts);
        }
        default:
            throw PreconditionError("relativize: sentence must be first-order");
    }
}

}  // namespace

FormulaPtr relativize(const FormulaPtr& sentence, const std::vector<std::string>& xs) {
    if (!is_fo(sentence)) throw PreconditionError("relativize: sentence must be first-order");
    if (!is_sentence(sentence)) throw PreconditionError("relativize: formula has free variables");
    std::set<std::string> used = all_point_variables(sentence);
    std::vector<std::string> distinct;
    for (const std::string& x : xs) {
        if (used.count(x))
            throw PreconditionError("relativize: variable " + x + " occurs in the sentence");
        if (std::find(distinct.begin(), distinct.end(), x) == distinct.end()) distinct.push_back(x);
    }
    std::map<std::string, std::string> env;
    return relativize_rec(sentence, distinct, env);
}

FormulaPtr size_bound_sentence(int n) {
    if (n < 0) throw PreconditionError("size_bound_sentence: negative n");
    std::vector<FormulaPtr> eqs;
    for (int i = 1; i <= n; ++i) eqs.push_back(f_eq(Term::var("y"), Term::var("x" + std::to_string(i))));
    FormulaPtr body = f_forall("y", f_or_all(eqs));
    for (int i = n; i >= 1; --i) body = f_exists("x" + std::to_string(i), body);
    return body;
}

FormulaPtr canonical_conjunctive_query(const PointedStructure& a) {
    if (!a.structure.vocab.constants.empty())
        throw PreconditionError("canonical_conjunctive_query: structure must be relational");
    a.validate();
    const Structure& s = a.structure;
    std::size_t k = a.tuple.size();

    std::map<Element, std::string> varOf;
    std::vector<FormulaPtr> conjuncts;
    for (std::size_t i = 0; i < k; ++i) {
        std::string xi = "x" + std::to_string(i + 1);
        auto it = varOf.find(a.tuple[i]);
        if (it == varOf.end()) {
            varOf[a.tuple[i]] = xi;
        } else {
            // Repeated pin: force the later variable to agree with the first.
            conjuncts.push_back(f_eq(Term::var(xi), Term::var(it->second)));
        }
    }
    std::vector<std::string> quantified;
    int next = static_cast<int>(k) + 1;
    for (Element e : s.universe) {
        if (!varOf.count(e)) {
            std::string v = "x" + std::to_string(next++);
            varOf[e] = v;
            quantified.push_back(v);
        }
    }
    for (const auto& [name, tuples] : s.relations) {
        for (const Tuple& t : tuples) {
            std::vector<Term> args;
            args.reserve(t.size());
            for (Element e : t) args.push_back(Term::var(varOf.at(e)));
            conjuncts.push_back(f_rel(name, std::move(args)));
        }
    }
    FormulaPtr body = f_and_all(conjuncts);
    for (auto it = quantified.rbegin(); it != quantified.rend(); ++it) body = f_exists(*it, body);
    return body;
}

// --- substitution -----------------------------------------------------------------

namespace {

FormulaPtr substitute_rec(const FormulaPtr& f, const Substitution& subst,
                          std::set<std::string>& shadowed) {
    switch (f->kind) {
        case Formula::Kind::True:
        case Formula::Kind::False:
            return f;
        case Formula::Kind::Rel:
        case Formula::Kind::Eq:
        case Formula::Kind::SetMember: {
            std::vector<Term> terms;
            terms.reserve(f->terms.size());
            for (const Term& t : f->terms) {
                if (t.kind == Term::Kind::Constant) {
                    auto it = subst.constantToVar.find(t.name);
                    terms.push_back(it == subst.constantToVar.end() ? t : Term::var(it->second));
                } else {
                    auto it = subst.varToVar.find(t.name);
                    if (it != subst.varToVar.end() && !shadowed.count(t.name)) {
                        terms.push_back(Term::var(it->second));
                    } else {
                        terms.push_back(t);
                    }
                }
            }
            if (f->kind == Formula::Kind::Rel) return f_rel(f->name, std::move(terms));
            if (f->kind == Formula::Kind::Eq) return f_eq(terms[0], terms[1]);
            return f_set_member(f->name, terms[0]);
        }
        case Formula::Kind::Not:
            return f_not(substitute_rec(f->children[0], subst, shadowed));
        case Formula::Kind::And:
            return f_and(substitute_rec(f->children[0], subst, shadowed),
                         substitute_rec(f->children[1], subst, shadowed));
        case Formula::Kind::Or:
            return f_or(substitute_rec(f->children[0], subst, shadowed),
                        substitute_rec(f->children[1], subst, shadowed));
        case Formula::Kind::Implies:
            return f_implies(substitute_rec(f->children[0], subst, shadowed),
                             substitute_rec(f->children[1], subst, shadowed));
        case Formula::Kind::Exists:
        case Formula::Kind::Forall: {
            for (const auto& [from, to] : subst.constantToVar) {
                if (to == f->name)
                    throw PreconditionError("substitution target " + to + " captured by binder");
            }
            for (const auto& [from, to] : subst.varToVar) {
                if (to == f->name && !shadowed.count(from))
                    throw PreconditionError("substitution target " + to + " captured by binder");
            }
            bool added = shadowed.insert(f->name).second;
            FormulaPtr body = substitute_rec(f->children[0], subst, shadowed);
            if (added) shadowed.erase(f->name);
            return f->kind == Formula::Kind::Exists ? f_exists(f->name, body)
                                                    : f_forall(f->name, body);
        }
        case Formula::Kind::ExistsSet:
        case Formula::Kind::ForallSet: {
            FormulaPtr body = substitute_rec(f->children[0], subst, shadowed);
            return f->kind == Formula::Kind::ExistsSet ? f_exists_set(f->name, body)
                                                       : f_forall_set(f->name, body);
        }
    }
    throw Error("unreachable");
}

}  // namespace

FormulaPtr substitute(const FormulaPtr& f, const Substitution& subst) {
    std::set<std::string> shadowed;
    return substitute_rec(f, subst, shadowed);
}

}  // namespace fmtk
