#include <random>

#include "doctest.h"
#include "fmtk/structures.hpp"
#include "test_support.hpp"

using namespace fmtk;
using namespace fmtk::testsupport;

TEST_CASE("parse_structure transcribes the description") {
    Structure s = parse_structure("vocab E/2\nuniverse 1 2\nE 1 2\n");
    CHECK(s.universe == std::vector<Element>{1, 2});
    CHECK(s.relations.at("E") == std::set<Tuple>{{1, 2}});

    Structure t = parse_structure("vocab P/1 c/const\nuniverse 1\nP 1\nc = 1\n");
    CHECK(t.universe == std::vector<Element>{1});
    CHECK(t.relations.at("P") == std::set<Tuple>{{1}});
    CHECK(t.constants.at("c") == 1);

    CHECK_THROWS_AS(parse_structure("vocab E/2\nuniverse 1\nE 1 2\n"), ParseError);
    CHECK_THROWS_AS(parse_structure("vocab E/2\nuniverse 1\nE 1\n"), ParseError);
    CHECK_THROWS_AS(parse_structure("vocab c/const\nuniverse 1\nc = 1\nc = 1\n"), ParseError);
}

TEST_CASE("serialize_structure is canonical and round-trips") {
    Structure empty = parse_structure("vocab\nuniverse\n");
    CHECK(serialize_structure(empty) == "vocab\nuniverse\n");

    Structure s;
    s.vocab.relations["E"] = 2;
    s.universe = {1, 2};
    s.relations["E"] = {{1, 2}};
    CHECK(serialize_structure(s) == "vocab E/2\nuniverse 1 2\nE 1 2\n");

    std::string text = "vocab E/2 P/1 c/const\nuniverse 1 2 3\nE 1 2\nE 2 1\nP 3\nc = 1\n";
    Structure parsed = parse_structure(text);
    CHECK(parse_structure(serialize_structure(parsed)) == parsed);
    // parse . serialize is a fixed point
    CHECK(serialize_structure(parse_structure(serialize_structure(parsed))) ==
          serialize_structure(parsed));
}

TEST_CASE("induced substructure") {
    Structure p2 = path(2);  // 0-1-2
    Structure sub = induced_substructure(p2, {0, 2});
    CHECK(sub.universe == std::vector<Element>{0, 2});
    CHECK(sub.relations.at("E").empty());

    std::set<Element> all(p2.universe.begin(), p2.universe.end());
    CHECK(induced_substructure(p2, all) == p2);

    CHECK(induced_substructure(p2, {}).universe.empty());
    CHECK_THROWS_AS(induced_substructure(p2, {7}), PreconditionError);

    Structure withConst = parse_structure("vocab c/const\nuniverse 1 2\nc = 1\n");
    CHECK_THROWS_AS(induced_substructure(withConst, {2}), PreconditionError);
}

TEST_CASE("induced substructure composes") {
    std::mt19937_64 rng(7);
    Vocabulary v;
    v.relations["E"] = 2;
    v.relations["P"] = 1;
    for (int it = 0; it < 20; ++it) {
        Structure a = random_structure(rng, v, 5);
        std::set<Element> y = {0, 1, 2, 3};
        std::set<Element> x = {1, 3};
        CHECK(induced_substructure(induced_substructure(a, y), x) == induced_substructure(a, x));
    }
}

TEST_CASE("enumerate_substructures order and count") {
    Structure a = edgeless(3);
    auto subs = enumerate_substructures(a, 3, {});
    CHECK(subs.size() == 8);  // 2^3 subsets including empty
    // sizes ascending
    for (std::size_t i = 1; i < subs.size(); ++i) CHECK(subs[i - 1].size() <= subs[i].size());

    std::set<Element> everything(a.universe.begin(), a.universe.end());
    auto exact = enumerate_substructures(a, 3, everything);
    REQUIRE(exact.size() == 1);
    CHECK(exact[0] == a);

    CHECK(enumerate_substructures(a, 0, {1}).empty());
}

TEST_CASE("find_embedding basics") {
    auto p2 = pointed(path(2));
    auto p9 = pointed(path(9));
    auto hit = find_embedding(p2, p9);
    REQUIRE(hit.has_value());
    CHECK(is_embedding(p2, p9, *hit));

    CHECK_FALSE(find_embedding(pointed(clique(3)), p9).has_value());

    auto a = pointed(path(3), {0, 3});
    auto self = find_embedding(a, a);
    REQUIRE(self.has_value());
    for (Element e : a.structure.universe) CHECK(self->at(e) == e);
}

TEST_CASE("find_homomorphism basics") {
    Structure loop;
    loop.vocab = graph_vocab();
    loop.universe = {0};
    loop.relations["E"] = {{0, 0}};

    auto edge = pointed(directed_edge());
    auto h = find_homomorphism(edge, pointed(loop));
    REQUIRE(h.has_value());
    CHECK(h->at(1) == 0);
    CHECK(h->at(2) == 0);

    // self-loop has no hom into loop-free K_2
    CHECK_FALSE(find_homomorphism(pointed(loop), pointed(clique(2))).has_value());

    auto same = find_homomorphism(edge, edge);
    REQUIRE(same.has_value());
    CHECK(is_homomorphism(edge, edge, *same));
}

TEST_CASE("embedding implies homomorphism on constant-free structures") {
    std::mt19937_64 rng(21);
    for (int it = 0; it < 30; ++it) {
        Structure a = random_structure(rng, graph_vocab(), 3, 0.4);
        Structure b = random_structure(rng, graph_vocab(), 4, 0.5);
        auto emb = find_embedding(pointed(a), pointed(b));
        if (emb) {
            CHECK(find_homomorphism(pointed(a), pointed(b)).has_value());
        }
    }
}

TEST_CASE("embedding_quasi_order_probe") {
    std::vector<PointedStructure> seq = {pointed(path(1)), pointed(path(2)), pointed(path(3))};
    auto hit = embedding_quasi_order_probe(seq);
    REQUIRE(hit.has_value());
    CHECK(hit->first == 1);
    CHECK(hit->second == 2);

    std::vector<PointedStructure> cliques = {pointed(clique(3)), pointed(clique(2)),
                                             pointed(clique(1))};
    CHECK_FALSE(embedding_quasi_order_probe(cliques).has_value());

    std::vector<PointedStructure> same = {pointed(path(1)), pointed(path(1))};
    auto identical = embedding_quasi_order_probe(same);
    REQUIRE(identical.has_value());
    CHECK(identical->first == 1);
    CHECK(identical->second == 2);
}

TEST_CASE("disjoint_union") {
    Structure k1 = clique(1);
    Structure u = disjoint_union(k1, k1);
    CHECK(u.size() == 2);
    CHECK(u.relations.at("E").empty());

    Structure twoEdges = disjoint_union(path(1), path(1));
    CHECK(twoEdges.size() == 4);
    CHECK(twoEdges.relations.at("E").size() == 4);

    Structure empty = edgeless(0);
    CHECK(disjoint_union(path(2), empty) == path(2));

    Structure withConst = parse_structure("vocab c/const\nuniverse 1\nc = 1\n");
    CHECK_THROWS_AS(disjoint_union(withConst, withConst), PreconditionError);
}

TEST_CASE("n_disjoint_sum marks parts and pins constants") {
    Structure k1 = clique(1);
    Structure s = n_disjoint_sum({pointed(k1), pointed(k1)});
    CHECK(s.size() == 2);
    CHECK(s.relations.at("P1").size() == 1);
    CHECK(s.relations.at("P2").size() == 1);
    CHECK(s.vocab.constants.empty());

    Structure single = n_disjoint_sum({pointed(path(1))});
    CHECK(single.relations.at("P1").size() == 2);

    Structure pinned = n_disjoint_sum({pointed(path(1), {0}), pointed(path(1), {1})});
    CHECK(pinned.vocab.constants == std::vector<std::string>{"c1", "c2"});
    CHECK(pinned.constants.at("c1") == 0);
    CHECK(pinned.constants.at("c2") == 3);  // second copy shifted by 2
}

TEST_CASE("n_copy") {
    Structure k1 = clique(1);
    SUBCASE("n = 1 returns the pinned structure") {
        Structure same = n_copy(path(1), {Tuple{0}});
        CHECK(same.size() == 2);
        CHECK(same.constants.at("c1") == 0);
        CHECK_FALSE(same.vocab.hasRelation("sim"));
    }
    SUBCASE("2-copy of K_1 relates the copies both ways and reflexively") {
        Structure c = n_copy(k1, {Tuple{}, Tuple{}});
        CHECK(c.size() == 2);
        CHECK(c.relations.at("sim").size() == 4);
    }
    SUBCASE("2-copy of P_1 has 8 sim pairs") {
        Structure c = n_copy(path(1), {Tuple{}, Tuple{}});
        CHECK(c.size() == 4);
        CHECK(c.relations.at("sim").size() == 8);
    }
}

TEST_CASE("cartesian_product follows the conjunction rule") {
    Structure e = directed_edge();
    Structure prod = cartesian_product(e, e);
    CHECK(prod.size() == 4);
    CHECK(prod.relations.at("E").size() == 1);

    Structure loop;
    loop.vocab = graph_vocab();
    loop.universe = {0};
    loop.relations["E"] = {{0, 0}};
    Structure same = cartesian_product(e, loop);
    CHECK(same.size() == 2);
    CHECK(same.relations.at("E").size() == 1);

    CHECK(cartesian_product(e, edgeless(0)).size() == 0);
}

TEST_CASE("underlying_graph symmetrizes binary relations") {
    Structure g = underlying_graph(directed_edge());
    CHECK(g.relations.at("E") == std::set<Tuple>{{1, 2}, {2, 1}});

    Vocabulary v;
    v.relations["P"] = 1;
    Structure unary;
    unary.vocab = v;
    unary.universe = {0, 1};
    unary.relations["P"] = {{0}};
    CHECK(underlying_graph(unary).relations.at("E").empty());

    Vocabulary two;
    two.relations["R"] = 2;
    two.relations["S"] = 2;
    Structure opposite;
    opposite.vocab = two;
    opposite.universe = {0, 1};
    opposite.relations["R"] = {{0, 1}};
    opposite.relations["S"] = {{1, 0}};
    Structure og = underlying_graph(opposite);
    CHECK(og.relations.at("E") == std::set<Tuple>{{0, 1}, {1, 0}});

    Vocabulary ternary;
    ternary.relations["T"] = 3;
    Structure bad;
    bad.vocab = ternary;
    bad.universe = {0};
    bad.relations["T"] = {};
    CHECK_THROWS_AS(underlying_graph(bad), PreconditionError);
}

TEST_CASE("underlying_graph matches the defining disjunction by brute force") {
    std::mt19937_64 rng(4);
    Vocabulary v;
    v.relations["R"] = 2;
    v.relations["S"] = 2;
    v.relations["P"] = 1;
    for (int it = 0; it < 25; ++it) {
        Structure a = random_structure(rng, v, 5, 0.3);
        Structure g = underlying_graph(a);
        for (Element x : a.universe) {
            for (Element y : a.universe) {
                bool expected = a.holds("R", {x, y}) || a.holds("R", {y, x}) ||
                                a.holds("S", {x, y}) || a.holds("S", {y, x});
                CHECK(g.holds("E", {x, y}) == expected);
                CHECK(g.holds("E", {x, y}) == g.holds("E", {y, x}));
            }
        }
    }
}

TEST_CASE("label_expand and tuple_pin_expand") {
    Structure a = edgeless(3);
    std::map<Element, int> zero = {{0, 0}, {1, 0}, {2, 0}};
    Structure e = label_expand(a, zero, 2);
    CHECK(e.relations.at("Q0").size() == 3);
    CHECK(e.relations.at("Q1").empty());

    Structure pinned = tuple_pin_expand(a, {1});
    CHECK(pinned.relations.at("Q0") == std::set<Tuple>{{1}});
    CHECK(pinned.relations.at("Q1") == std::set<Tuple>{{0}, {2}});

    Structure two = tuple_pin_expand(edgeless(2), {0, 1});
    CHECK(two.relations.at("Q2").empty());

    Structure none = tuple_pin_expand(a, {});
    CHECK(none.relations.at("Q0").size() == 3);

    CHECK_THROWS_AS(tuple_pin_expand(a, {0, 0}), PreconditionError);
}

TEST_CASE("returned witnesses re-verify") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 40; ++it) {
        Structure a = random_structure(rng, graph_vocab(), 3, 0.5);
        Structure b = random_structure(rng, graph_vocab(), 4, 0.5);
        if (auto h = find_embedding(pointed(a), pointed(b))) {
            CHECK(is_embedding(pointed(a), pointed(b), *h));
        }
        if (auto h = find_homomorphism(pointed(a), pointed(b))) {
            CHECK(is_homomorphism(pointed(a), pointed(b), *h));
        }
    }
}
