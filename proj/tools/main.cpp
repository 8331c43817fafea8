// Batch command-line frontend over the toolkit with stable text/JSON output.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fmtk/classes.hpp"
#include "fmtk/ebsp.hpp"
#include "fmtk/equivalence.hpp"
#include "fmtk/family.hpp"
#include "fmtk/logic.hpp"
#include "fmtk/preservation.hpp"
#include "fmtk/structures.hpp"
#include "fmtk/transl.hpp"
#include "fmtk/treerep.hpp"

using json = nlohmann::ordered_json;
using namespace fmtk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRefuted = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCap = 3;
constexpr int kExitInternal = 4;

struct Options {
    bool jsonOutput = false;
    Caps caps;
    std::uint64_t seed = 1;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Arguments that name an existing file are read from it, otherwise the
// argument text itself is parsed.
std::string file_or_text(const std::string& arg) {
    std::error_code ec;
    if (std::filesystem::exists(arg, ec)) return slurp(arg);
    return arg;
}

FormulaPtr load_formula(const std::string& arg, const std::optional<Vocabulary>& vocab) {
    return parse_formula(file_or_text(arg), vocab);
}

Structure load_structure(const std::string& arg) { return parse_structure(file_or_text(arg)); }

LabeledOrderedTree load_tree(const std::string& arg) { return parse_tree(file_or_text(arg)); }

Tuple parse_tuple_arg(const std::string& text) {
    Tuple out;
    std::istringstream in(text);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (!tok.empty()) out.push_back(std::stoll(tok));
    }
    return out;
}

void emit(const Options& opt, const json& report, const std::string& textLine) {
    if (opt.jsonOutput)
        std::cout << report.dump(2) << "\n";
    else
        std::cout << textLine << "\n";
}

json verdict_report(const std::string& property, int k, const PropertyCheck& check) {
    json j;
    j["verb"] = property + "-check";
    j["property"] = property;
    j["k"] = k;
    j["verdict"] = to_string(check.verdict);
    if (check.counterexample) j["counterexample"] = serialize_structure(*check.counterexample);
    if (!check.witnessCover.empty()) {
        json cover = json::array();
        for (const auto& s : check.witnessCover) cover.push_back(serialize_structure(s));
        j["witness"] = cover;
    }
    if (!check.detail.empty()) j["detail"] = check.detail;
    return j;
}

int verdict_exit(const PropertyCheck& check) {
    return check.verdict == Verdict::Violated ? kExitRefuted : kExitOk;
}

std::vector<OracleRequest> parse_oracle_requests(const std::string& names, int m,
                                                 const std::string& logic,
                                                 const std::vector<std::string>& sigma,
                                                 int cographParts) {
    std::vector<OracleRequest> out;
    std::istringstream in(names);
    std::string tok;
    while (std::getline(in, tok, ',')) {
        if (tok.empty()) continue;
        OracleRequest req;
        req.oracle = builtin_oracle(tok, sigma, cographParts);
        req.m = m;
        req.logic = parse_logic(logic);
        out.push_back(std::move(req));
    }
    if (out.empty()) throw ParseError("no oracle names given");
    return out;
}

std::vector<std::string> tree_alphabet(const LabeledOrderedTree& t) {
    std::set<std::string> letters;
    for (int id : t.preorder()) letters.insert(t.label(id));
    return {letters.begin(), letters.end()};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-model-theory toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the verb

    Options opt;
    app.add_flag("--json", opt.jsonOutput, "emit a JSON report");
    app.add_option("--max-universe", opt.caps.foEval, "FO evaluation universe cap");
    app.add_option("--max-mso-universe", opt.caps.msoEval,
                   "MSO evaluation / subset enumeration cap");
    app.add_option("--max-type-universe", opt.caps.foType, "FO rank-type universe cap");
    app.add_option("--seed", opt.seed, "seed for sampling verbs");

    // shared option storage
    std::string argA, argB, argFormula, argFamily, argTuple, argLogic = "fo", argVars;
    std::string argScheme, argOracles = "unordered", argOut = ".", argClassSentence = "true";
    std::vector<std::string> argInputs;
    int optM = 2, optK = 0, optP = 0, optParts = 2;
    std::size_t optBound = 8, optCoverCap = 6, optSizeBound = 4, optSamples = 20;

    auto* evalCmd = app.add_subcommand("eval", "evaluate a sentence on a structure");
    evalCmd->add_option("structure", argA)->required();
    evalCmd->add_option("formula", argFormula)->required();

    auto* rankCmd = app.add_subcommand("rank", "quantifier rank of a formula");
    rankCmd->add_option("formula", argFormula)->required();

    auto* equivCmd = app.add_subcommand("equiv", "decide (m, L)-equivalence of two structures");
    equivCmd->add_option("a", argA)->required();
    equivCmd->add_option("b", argB)->required();
    equivCmd->add_option("--m", optM);
    equivCmd->add_option("--logic", argLogic);

    auto* typeCmd = app.add_subcommand("type", "rank-type fingerprint of a structure");
    typeCmd->add_option("structure", argA)->required();
    typeCmd->add_option("--m", optM);
    typeCmd->add_option("--logic", argLogic);
    typeCmd->add_option("--tuple", argTuple);

    auto* relCmd = app.add_subcommand("relativize", "relativize an FO sentence to variables");
    relCmd->add_option("formula", argFormula)->required();
    relCmd->add_option("--vars", argVars)->required();

    auto* ccqCmd = app.add_subcommand("ccq", "canonical conjunctive query of a structure");
    ccqCmd->add_option("structure", argA)->required();
    ccqCmd->add_option("--tuple", argTuple);

    auto* cruxCmd = app.add_subcommand("crux", "minimal cruxes of a structure");
    cruxCmd->add_option("structure", argA)->required();
    cruxCmd->add_option("formula", argFormula)->required();
    cruxCmd->add_option("--family", argFamily)->required();
    cruxCmd->add_option("--k", optK);

    auto* pscCmd = app.add_subcommand("psc-check", "check PSC(k) over a family slice");
    pscCmd->add_option("formula", argFormula)->required();
    pscCmd->add_option("--family", argFamily)->required();
    pscCmd->add_option("--size-bound", optSizeBound);
    pscCmd->add_option("--k", optK);

    auto* pceCmd = app.add_subcommand("pce-check", "check PCE(k) over a family slice");
    pceCmd->add_option("formula", argFormula)->required();
    pceCmd->add_option("--family", argFamily)->required();
    pceCmd->add_option("--size-bound", optSizeBound);
    pceCmd->add_option("--k", optK);
    pceCmd->add_option("--cover-cap", optCoverCap);

    auto* coverCmd = app.add_subcommand("cover-check", "check a k-ary cover");
    coverCmd->add_option("structure", argA)->required();
    coverCmd->add_option("members", argInputs)->required();
    coverCmd->add_option("--k", optK);

    auto* gltCmd = app.add_subcommand("glt-translate", "effective GLT(k) translation");
    gltCmd->add_option("formula", argFormula)->required();
    gltCmd->add_option("--k", optK);
    gltCmd->add_option("--p", optP);
    gltCmd->add_option("--class-sentence", argClassSentence);

    auto* hptCmd = app.add_subcommand("hpt-translate", "effective HPT translation");
    hptCmd->add_option("formula", argFormula)->required();
    hptCmd->add_option("--k", optK);
    hptCmd->add_option("--p", optP);
    hptCmd->add_option("--family", argFamily)->required();

    auto* schemeCmd = app.add_subcommand("scheme-apply", "apply a translation scheme");
    schemeCmd->add_option("scheme", argScheme)->required();
    schemeCmd->add_option("--structure", argA);
    schemeCmd->add_option("--formula", argFormula);

    auto* optreeCmd = app.add_subcommand("optree-eval", "evaluate an operation tree");
    optreeCmd->add_option("tree", argA)->required();
    optreeCmd->add_option("structures", argInputs);

    auto* pruneCmd = app.add_subcommand("prune", "height/degree reduction of a tree");
    pruneCmd->add_option("tree", argA)->required();
    pruneCmd->add_option("--oracles", argOracles);
    pruneCmd->add_option("--m", optM);
    pruneCmd->add_option("--logic", argLogic);
    pruneCmd->add_option("--cograph-parts", optParts);

    auto* ebspCmd = app.add_subcommand("ebsp-search", "bounded equivalent substructure search");
    ebspCmd->add_option("structure", argA)->required();
    ebspCmd->add_option("--family", argFamily)->required();
    ebspCmd->add_option("--tuple", argTuple);
    ebspCmd->add_option("--m", optM);
    ebspCmd->add_option("--bound", optBound);
    ebspCmd->add_option("--logic", argLogic);

    auto* witnessCmd = app.add_subcommand("witness-profile", "empirical witness-function profile");
    witnessCmd->add_option("--family", argFamily)->required();
    witnessCmd->add_option("--k", optK);
    witnessCmd->add_option("--m", optM);
    witnessCmd->add_option("--logic", argLogic);
    witnessCmd->add_option("--samples", optSamples);
    witnessCmd->add_option("--size-bound", optSizeBound);

    auto* theoryCmd = app.add_subcommand("decide-theory", "bounded theory membership");
    theoryCmd->add_option("formula", argFormula)->required();
    theoryCmd->add_option("--family", argFamily)->required();
    theoryCmd->add_option("--bound", optBound);
    theoryCmd->add_option("--logic", argLogic);

    auto* nwEncodeCmd = app.add_subcommand("nw-encode", "nested word to tree");
    nwEncodeCmd->add_option("word", argA)->required();

    auto* nwDecodeCmd = app.add_subcommand("nw-decode", "tree to nested word");
    nwDecodeCmd->add_option("tree", argA)->required();

    auto* cotreeCmd = app.add_subcommand("cotree-graph", "cotree to labeled graph");
    cotreeCmd->add_option("tree", argA)->required();

    auto* fixtureCmd = app.add_subcommand("fixture", "write counterexample fixtures");
    fixtureCmd->add_option("name", argB)->required();
    fixtureCmd->add_option("--k", optK);
    fixtureCmd->add_option("--n", optP);
    fixtureCmd->add_option("--out", argOut);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_name() == "CallForHelp" ? kExitOk : kExitUsage;
    }

    try {
        if (evalCmd->parsed()) {
            Structure s = load_structure(argA);
            FormulaPtr f = load_formula(argFormula, s.vocab);
            bool result = evaluate_sentence(s, f, opt.caps);
            json j{{"verb", "eval"}, {"result", result}};
            emit(opt, j, result ? "true" : "false");
            return kExitOk;
        }
        if (rankCmd->parsed()) {
            FormulaPtr f = load_formula(argFormula, std::nullopt);
            int r = rank(f);
            emit(opt, json{{"verb", "rank"}, {"rank", r}}, std::to_string(r));
            return kExitOk;
        }
        if (equivCmd->parsed()) {
            Structure a = load_structure(argA);
            Structure b = load_structure(argB);
            bool eq = equivalent({a, {}}, {b, {}}, optM, parse_logic(argLogic), opt.caps);
            emit(opt, json{{"verb", "equiv"}, {"m", optM}, {"logic", argLogic}, {"equivalent", eq}},
                 eq ? "equivalent" : "inequivalent");
            return eq ? kExitOk : kExitRefuted;
        }
        if (typeCmd->parsed()) {
            Structure s = load_structure(argA);
            Tuple tuple = argTuple.empty() ? Tuple{} : parse_tuple_arg(argTuple);
            TypeContext ctx;
            TypeId id = rank_type(ctx, {s, tuple}, optM, parse_logic(argLogic), opt.caps);
            std::string fp = ctx.fingerprint(id);
            emit(opt, json{{"verb", "type"}, {"m", optM}, {"logic", argLogic}, {"fingerprint", fp}},
                 fp);
            return kExitOk;
        }
        if (relCmd->parsed()) {
            FormulaPtr f = load_formula(argFormula, std::nullopt);
            std::vector<std::string> vars;
            std::istringstream in(argVars);
            std::string tok;
            while (std::getline(in, tok, ',')) vars.push_back(tok);
            std::string out = print_formula(relativize(f, vars));
            emit(opt, json{{"verb", "relativize"}, {"formula", out}}, out);
            return kExitOk;
        }
        if (ccqCmd->parsed()) {
            Structure s = load_structure(argA);
            Tuple tuple = argTuple.empty() ? Tuple{} : parse_tuple_arg(argTuple);
            std::string out = print_formula(canonical_conjunctive_query({s, tuple}));
            emit(opt, json{{"verb", "ccq"}, {"formula", out}}, out);
            return kExitOk;
        }
        if (cruxCmd->parsed()) {
            Structure s = load_structure(argA);
            FamilyPtr family = parse_family_spec(argFamily);
            FormulaPtr f = load_formula(argFormula, s.vocab);
            CruxReport report = find_cruxes(s, f, *family, optK, opt.caps);
            json j{{"verb", "crux"}, {"k", optK}};
            json cruxes = json::array();
            for (const auto& c : report.minimalCruxes)
                cruxes.push_back(std::vector<Element>(c.begin(), c.end()));
            j["minimal_cruxes"] = cruxes;
            if (report.minimalSize)
                j["minimal_size"] = *report.minimalSize;
            else
                j["minimal_size"] = nullptr;
            std::ostringstream line;
            if (report.minimalSize)
                line << report.minimalCruxes.size() << " minimal crux(es), smallest size "
                     << *report.minimalSize;
            else
                line << "no crux of size <= " << optK;
            emit(opt, j, line.str());
            return report.minimalSize ? kExitOk : kExitRefuted;
        }
        if (pscCmd->parsed()) {
            FamilySpec spec{parse_family_spec(argFamily), optSizeBound};
            FormulaPtr f = load_formula(argFormula, spec.family->vocabulary());
            PropertyCheck check = check_psc_k(spec, f, optK, opt.caps);
            emit(opt, verdict_report("psc", optK, check),
                 "psc(" + std::to_string(optK) + "): " + to_string(check.verdict));
            return verdict_exit(check);
        }
        if (pceCmd->parsed()) {
            FamilySpec spec{parse_family_spec(argFamily), optSizeBound};
            FormulaPtr f = load_formula(argFormula, spec.family->vocabulary());
            PropertyCheck check = check_pce_k(spec, f, optK, optCoverCap, opt.caps);
            emit(opt, verdict_report("pce", optK, check),
                 "pce(" + std::to_string(optK) + "): " + to_string(check.verdict));
            return verdict_exit(check);
        }
        if (coverCmd->parsed()) {
            Structure s = load_structure(argA);
            std::vector<Structure> members;
            for (const auto& m : argInputs) members.push_back(load_structure(m));
            bool ok = is_k_ary_cover(s, members, optK);
            emit(opt, json{{"verb", "cover-check"}, {"k", optK}, {"covers", ok}},
                 ok ? "cover" : "not-a-cover");
            return ok ? kExitOk : kExitRefuted;
        }
        if (gltCmd->parsed()) {
            FormulaPtr f = load_formula(argFormula, std::nullopt);
            FormulaPtr cls = load_formula(argClassSentence, std::nullopt);
            std::string out = print_formula(glt_translate(f, optK, optP, cls));
            emit(opt, json{{"verb", "glt-translate"}, {"k", optK}, {"p", optP}, {"formula", out}},
                 out);
            return kExitOk;
        }
        if (hptCmd->parsed()) {
            FamilySpec spec{parse_family_spec(argFamily), static_cast<std::size_t>(optP)};
            FormulaPtr f = load_formula(argFormula, spec.family->vocabulary());
            std::string out = print_formula(hpt_translate(f, optK, optP, spec, opt.caps));
            emit(opt, json{{"verb", "hpt-translate"}, {"k", optK}, {"p", optP}, {"formula", out}},
                 out);
            return kExitOk;
        }
        if (schemeCmd->parsed()) {
            TranslationScheme xi;
            try {
                xi = builtin_scheme(argScheme);
            } catch (const PreconditionError&) {
                xi = parse_scheme(file_or_text(argScheme));
            }
            if (!argA.empty()) {
                Structure s = load_structure(argA);
                std::string out = serialize_structure(apply_structure(xi, s, opt.caps));
                emit(opt, json{{"verb", "scheme-apply"}, {"structure", out}}, out);
                return kExitOk;
            }
            if (!argFormula.empty()) {
                FormulaPtr f = load_formula(argFormula, xi.target);
                std::string out = print_formula(apply_formula(xi, f));
                emit(opt, json{{"verb", "scheme-apply"}, {"formula", out}}, out);
                return kExitOk;
            }
            throw ParseError("scheme-apply needs --structure or --formula");
        }
        if (optreeCmd->parsed()) {
            LabeledOrderedTree t = load_tree(argA);
            std::vector<Structure> leaves;
            for (const auto& path : argInputs) leaves.push_back(load_structure(path));
            std::string out = serialize_structure(operation_tree_eval(t, leaves, opt.caps));
            emit(opt, json{{"verb", "optree-eval"}, {"structure", out}}, out);
            return kExitOk;
        }
        if (pruneCmd->parsed()) {
            LabeledOrderedTree t = load_tree(argA);
            std::vector<OracleRequest> oracles =
                parse_oracle_requests(argOracles, optM, argLogic, tree_alphabet(t), optParts);
            ReduceResult res = reduce(t, oracles, opt.caps);
            json j{{"verb", "prune"},
                   {"m", optM},
                   {"logic", argLogic},
                   {"splices", res.stats.splices},
                   {"observed_height_types", res.stats.maxPathTypeCount},
                   {"observed_suffix_types", res.stats.maxSuffixTypeCount},
                   {"input_size", t.size()},
                   {"output_size", res.tree.size()},
                   {"tree", serialize_tree(res.tree)}};
            std::ostringstream line;
            line << "reduced " << t.size() << " -> " << res.tree.size() << " nodes ("
                 << res.stats.splices << " splices)\n"
                 << serialize_tree(res.tree);
            emit(opt, j, line.str());
            return kExitOk;
        }
        if (ebspCmd->parsed()) {
            Structure s = load_structure(argA);
            FamilyPtr family = parse_family_spec(argFamily);
            Tuple tuple = argTuple.empty() ? Tuple{} : parse_tuple_arg(argTuple);
            auto b =
                ebsp_condition(*family, s, tuple, optM, optBound, parse_logic(argLogic), opt.caps);
            json j{{"verb", "ebsp-search"}, {"m", optM}, {"bound", optBound}};
            if (b) {
                j["witness"] = serialize_structure(*b);
                emit(opt, j, serialize_structure(*b));
                return kExitOk;
            }
            j["witness"] = nullptr;
            emit(opt, j, "no witness within bound");
            return kExitRefuted;
        }
        if (witnessCmd->parsed()) {
            FamilyPtr family = parse_family_spec(argFamily);
            WitnessProfile profile =
                estimate_witness(*family, optSizeBound, optK, optM, parse_logic(argLogic),
                                 static_cast<int>(optSamples), opt.seed, opt.caps);
            if (opt.jsonOutput) {
                json j{{"verb", "witness-profile"},
                       {"m", optM},
                       {"k", optK},
                       {"logic", argLogic},
                       {"family", profile.familyName},
                       {"max_bound", profile.maxBound},
                       {"sample_count", profile.samples.size()}};
                std::cout << j.dump(2) << "\n";
            } else {
                std::cout << "m,k,logic,family,max_bound,sample_count\n"
                          << optM << ',' << optK << ',' << argLogic << ',' << profile.familyName
                          << ',' << profile.maxBound << ',' << profile.samples.size() << "\n";
            }
            return kExitOk;
        }
        if (theoryCmd->parsed()) {
            FamilyPtr family = parse_family_spec(argFamily);
            FormulaPtr f = load_formula(argFormula, family->vocabulary());
            std::size_t bound = optBound;
            TheoryDecision decision = decide_bounded_theory(
                *family, [bound](int) { return bound; }, f, parse_logic(argLogic), opt.caps);
            json j{{"verb", "decide-theory"}, {"bound", bound}, {"in_theory", decision.inTheory}};
            if (decision.certificate) j["certificate"] = serialize_structure(*decision.certificate);
            emit(opt, j,
                 decision.inTheory ? "accepted"
                                   : "rejected\n" + serialize_structure(*decision.certificate));
            return decision.inTheory ? kExitOk : kExitRefuted;
        }
        if (nwEncodeCmd->parsed()) {
            NestedWord w = parse_nested_word(file_or_text(argA));
            std::string out = serialize_tree(nested_word_to_tree(w));
            emit(opt, json{{"verb", "nw-encode"}, {"tree", out}}, out);
            return kExitOk;
        }
        if (nwDecodeCmd->parsed()) {
            LabeledOrderedTree t = load_tree(argA);
            std::string out = serialize_nested_word(tree_to_nested_word(t));
            emit(opt, json{{"verb", "nw-decode"}, {"word", out}}, out);
            return kExitOk;
        }
        if (cotreeCmd->parsed()) {
            LabeledOrderedTree t = load_tree(argA);
            std::string out = serialize_structure(cotree_to_graph(t));
            emit(opt, json{{"verb", "cotree-graph"}, {"structure", out}}, out);
            return kExitOk;
        }
        if (fixtureCmd->parsed()) {
            std::filesystem::create_directories(argOut);
            auto write = [&](const std::string& name, const std::string& contents) {
                std::ofstream out(argOut + "/" + name);
                out << contents;
            };
            json j{{"verb", "fixture"}, {"name", argB}};
            if (argB == "glt-counterexample") {
                if (optP < 1) optP = 1;
                GltCounterexample fx = glt_counterexample(optK, optP);
                write("A.str", serialize_structure(fx.a));
                write("B.str", serialize_structure(fx.b));
                write("psi_k.fml", print_formula(fx.psi));
                j["files"] = {"A.str", "B.str", "psi_k.fml"};
                emit(opt, j, "wrote A.str B.str psi_k.fml");
                return kExitOk;
            }
            if (argB == "phi-k") {
                write("phi_k.fml", print_formula(phi_k_paths(optK)));
                j["files"] = {"phi_k.fml"};
                emit(opt, j, "wrote phi_k.fml");
                return kExitOk;
            }
            if (argB == "psi-k") {
                GltCounterexample fx = glt_counterexample(optK, optP < 1 ? 1 : optP);
                write("psi_k.fml", print_formula(fx.psi));
                j["files"] = {"psi_k.fml"};
                emit(opt, j, "wrote psi_k.fml");
                return kExitOk;
            }
            if (argB == "scheme-xi1") {
                TranslationScheme xi = builtin_scheme("order_successor");
                std::ostringstream out;
                out << "dim 1\nsource le/2\ntarget E/2\ndomain: " << print_formula(xi.domain)
                    << "\nrel E: " << print_formula(xi.relationFormulas.at("E")) << "\n";
                write("xi1.scm", out.str());
                j["files"] = {"xi1.scm"};
                emit(opt, j, "wrote xi1.scm");
                return kExitOk;
            }
            throw ParseError("unknown fixture '" + argB + "'");
        }
        throw ParseError("no subcommand");
    } catch (const CapError& e) {
        std::cerr << "cap exceeded: " << e.what() << "\n";
        return kExitCap;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const VerificationError& e) {
        std::cerr << "internal verification failure: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}
