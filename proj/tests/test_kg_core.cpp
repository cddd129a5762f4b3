#include "doctest.h"
#include "support.hpp"

#include "kgreason/kg_core.hpp"

#include <algorithm>

using namespace kgr;

namespace {

ReasoningInstance composer_chain() {
    return make_chain({Triplet("It Goes Like It Goes", "composer", "David Shire"),
                       Triplet("David Shire", "spouse", "Didi Conn")});
}

}  // namespace

TEST_CASE("add_fact stores and reports replacement") {
    KnowledgeGraph kg;
    auto first = kg.add_fact(Triplet("It Goes Like It Goes", "composer", "David Shire"));
    CHECK_FALSE(first.replaced);
    CHECK(kg.lookup(Entity{"It Goes Like It Goes"}, Relation{"composer"}) == Entity{"David Shire"});

    auto again = kg.add_fact(Triplet("It Goes Like It Goes", "composer", "David Shire"));
    CHECK_FALSE(again.replaced);
    CHECK(kg.size() == 1);

    kg.add_fact(Triplet("A", "r", "B"));
    auto swap = kg.add_fact(Triplet("A", "r", "C"));
    CHECK(swap.replaced);
    REQUIRE(swap.previous);
    CHECK(swap.previous->label == "B");
    CHECK(kg.lookup(Entity{"A"}, Relation{"r"}) == Entity{"C"});
    CHECK(kg.size() == 2);
}

TEST_CASE("infer walks relations left to right") {
    const auto kg = chain_to_graph(composer_chain());
    const std::vector<Relation> one{Relation{"composer"}};
    const std::vector<Relation> two{Relation{"composer"}, Relation{"spouse"}};
    const std::vector<Relation> wrong{Relation{"spouse"}};
    CHECK(kg.infer(Entity{"It Goes Like It Goes"}, one) == Entity{"David Shire"});
    CHECK(kg.infer(Entity{"It Goes Like It Goes"}, two) == Entity{"Didi Conn"});
    CHECK(kg.infer(Entity{"X"}, {}) == Entity{"X"});
    CHECK_FALSE(kg.infer(Entity{"It Goes Like It Goes"}, wrong));
}

TEST_CASE("chain_to_graph holds exactly the chain's facts") {
    const auto chain = composer_chain();
    const auto kg = chain_to_graph(chain);
    CHECK(kg.size() == 2);
    auto facts = kg.facts();
    auto hops = chain.hops;
    std::sort(facts.begin(), facts.end());
    std::sort(hops.begin(), hops.end());
    CHECK(facts == hops);
    const auto rels = chain.relations();
    CHECK(kg.infer(chain.start(), rels) == chain.answer());

    CHECK(chain_to_graph(make_chain({Triplet("a", "r", "b")})).size() == 1);

    ReasoningInstance broken{{Triplet("a", "r", "b"), Triplet("c", "s", "d")}, std::nullopt};
    try {
        chain_to_graph(broken);
        FAIL("expected ChainError");
    } catch (const ChainError& e) {
        CHECK(e.index() == 0);
    }
}

TEST_CASE("validate_instance names each violation") {
    CHECK(validate_instance(composer_chain()).empty());

    ReasoningInstance empty_rel{{Triplet("a", "", "b")}, std::nullopt};
    const auto v = validate_instance(empty_rel);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == "hop 0: empty relation");

    ReasoningInstance broken{{Triplet("a", "r", "b"), Triplet("b", "s", "c"), Triplet("x", "t", "d")}, std::nullopt};
    const auto w = validate_instance(broken);
    REQUIRE(w.size() == 1);
    CHECK(w[0].starts_with("hop 1:"));

    CHECK_FALSE(validate_instance(ReasoningInstance{}).empty());
    CHECK_FALSE(validate_instance(ReasoningInstance{{Triplet("   ", "r", "b")}, std::nullopt}).empty());
}

TEST_CASE("labels: whitespace-only and control characters are invalid") {
    CHECK_FALSE(Entity{""}.valid());
    CHECK_FALSE(Entity{" \t"}.valid());
    CHECK_FALSE(Relation{"a\nb"}.valid());
    CHECK(Entity{"Zoë"}.valid());
    CHECK(Entity{" padded "}.valid());
}

TEST_CASE("infer agrees with a brute-force edge walk") {
    std::mt19937_64 rng(7);
    for (int g = 0; g < 200; ++g) {
        const int entities = 2 + static_cast<int>(rng() % 20);
        const int relations = 1 + static_cast<int>(rng() % 4);
        std::vector<Triplet> facts;
        KnowledgeGraph kg;
        const int n = static_cast<int>(rng() % 60);
        for (int i = 0; i < n; ++i) {
            Triplet t("e" + std::to_string(rng() % entities), "r" + std::to_string(rng() % relations),
                      "e" + std::to_string(rng() % entities));
            facts.push_back(t);
            kg.add_fact(t);
        }
        for (int s = 0; s < entities; ++s) {
            const Entity start{"e" + std::to_string(s)};
            for (int a = 0; a < relations; ++a)
                for (int b = 0; b < relations; ++b) {
                    const std::vector<Relation> rels{Relation{"r" + std::to_string(a)}, Relation{"r" + std::to_string(b)}};
                    REQUIRE(kg.infer(start, rels) == kgt::brute_force_walk(facts, start, rels));
                    // compositionality
                    const auto inner = kg.infer(start, std::span(rels).first(1));
                    if (inner)
                        CHECK(kg.infer(*inner, std::span(rels).subspan(1)) == kg.infer(start, rels));
                    else
                        CHECK_FALSE(kg.infer(start, rels));
                }
        }
    }
}
