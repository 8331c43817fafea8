#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fmtk/structures.hpp"

namespace fmtk {

// FO/MSO terms: a point variable or a vocabulary constant.
struct Term {
    enum class Kind { Variable, Constant };
    Kind kind;
    std::string name;

    static Term var(std::string name) { return {Kind::Variable, std::move(name)}; }
    static Term constant(std::string name) { return {Kind::Constant, std::move(name)}; }
    bool operator==(const Term&) const = default;
    auto operator<=>(const Term&) const = default;
};

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable FO/MSO abstract syntax. Set variables are second-order monadic.
struct Formula {
    enum class Kind {
        True,
        False,
        Rel,        // name(terms...)
        Eq,         // terms[0] = terms[1]
        SetMember,  // name(terms[0]) with set variable `name`
        Not,        // child[0]
        And,
        Or,
        Implies,
        Exists,     // binds point variable `name` in child[0]
        Forall,
        ExistsSet,  // binds set variable `name` in child[0]
        ForallSet,
    };

    Kind kind;
    std::string name;
    std::vector<Term> terms;
    std::vector<FormulaPtr> children;

    bool operator==(const Formula& o) const;
};

// Builders.
FormulaPtr f_true();
FormulaPtr f_false();
FormulaPtr f_rel(std::string name, std::vector<Term> terms);
FormulaPtr f_eq(Term a, Term b);
FormulaPtr f_set_member(std::string setVar, Term t);
FormulaPtr f_not(FormulaPtr a);
FormulaPtr f_and(FormulaPtr a, FormulaPtr b);
FormulaPtr f_or(FormulaPtr a, FormulaPtr b);
FormulaPtr f_implies(FormulaPtr a, FormulaPtr b);
FormulaPtr f_exists(std::string var, FormulaPtr body);
FormulaPtr f_forall(std::string var, FormulaPtr body);
FormulaPtr f_exists_set(std::string var, FormulaPtr body);
FormulaPtr f_forall_set(std::string var, FormulaPtr body);
// Folds over a list; empty list gives the stated unit (true for and, false for or).
FormulaPtr f_and_all(const std::vector<FormulaPtr>& fs);
FormulaPtr f_or_all(const std::vector<FormulaPtr>& fs);

enum class Logic { FO, MSO };
std::string to_string(Logic logic);
Logic parse_logic(const std::string& text);

// Quantifier rank, counting point and set quantifiers.
int rank(const FormulaPtr& f);

// True iff no set quantifier and no set atom occurs.
bool is_fo(const FormulaPtr& f);
bool is_quantifier_free(const FormulaPtr& f);

std::set<std::string> free_point_variables(const FormulaPtr& f);
std::set<std::string> free_set_variables(const FormulaPtr& f);
// Every variable name occurring, bound or free.
std::set<std::string> all_point_variables(const FormulaPtr& f);
bool is_sentence(const FormulaPtr& f);

// Fully parenthesized canonical form; parse(print(f)) == f.
std::string print_formula(const FormulaPtr& f);

// Parses the ASCII grammar:
//   true | false | R(t,...,t) | t=t | X(t) | !f | (f & f) | (f | f) | (f -> f)
//   | exists v. f | forall v. f | Exists V. f | Forall V. f
// Point variables are lowercase identifiers, set variables start uppercase,
// and an identifier in term position denotes a constant iff the supplied
// vocabulary declares it. Arities are checked against the vocabulary when one
// is given.
FormulaPtr parse_formula(const std::string& text,
                         const std::optional<Vocabulary>& vocab = std::nullopt);
FormulaPtr parse_formula_file(const std::string& path,
                              const std::optional<Vocabulary>& vocab = std::nullopt);

// Evaluation caps; exceeding one raises CapError, never a truncated answer.
struct Caps {
    std::size_t foEval = 12;    // evaluate() on formulas without set quantifiers
    std::size_t msoEval = 10;   // evaluate() when a set quantifier occurs
    std::size_t foType = 4096;  // FO rank types and FO games
    std::size_t msoType = 10;   // MSO rank types and MSO games (subset enumeration)
};

using PointEnv = std::map<std::string, Element>;
using SetEnv = std::map<std::string, std::set<Element>>;

bool evaluate(const Structure& a, const PointEnv& pointEnv, const SetEnv& setEnv,
              const FormulaPtr& f, const Caps& caps = {});
bool evaluate_sentence(const Structure& a, const FormulaPtr& f, const Caps& caps = {});

// Quantifier-free relativization of an FO sentence to the variables xs:
// (A, a-bar) |= relativize(psi, xs) iff induced(A, set(a-bar)) |= psi.
FormulaPtr relativize(const FormulaPtr& sentence, const std::vector<std::string>& xs);

// exists x1..xn forall y (y = x1 | ... | y = xn); for n = 0: forall y false.
FormulaPtr size_bound_sentence(int n);

// Canonical conjunctive query of (A, a-bar): free variables x1..xk stand for
// the tuple, the remaining universe elements are existentially quantified.
FormulaPtr canonical_conjunctive_query(const PointedStructure& a);

// Capture-avoiding substitution of constants and/or variables by variables.
struct Substitution {
    std::map<std::string, std::string> constantToVar;
    std::map<std::string, std::string> varToVar;
};
FormulaPtr substitute(const FormulaPtr& f, const Substitution& subst);

}  // namespace fmtk
