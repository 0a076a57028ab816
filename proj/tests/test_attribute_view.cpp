#include "doctest.h"

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "multike/attribute_view.hpp"
#include "multike/kg.hpp"
#include "multike/params.hpp"
#include "multike/tensor.hpp"

using namespace multike;

namespace {

struct AttrFixture {
    ParameterStore params;
    Tensor values{1, 1};

    AttrFixture(int n_ent, int n_attr, int n_val, std::size_t d, std::size_t c, std::size_t f,
                std::uint64_t seed) {
        Rng rng(seed);
        params.add(kAttrEnt, xavier_init(n_ent, d, rng));
        params.add(kAttrAttr, xavier_init(n_attr, d, rng));
        init_attribute_cnn(params, d, c, f, rng);
        values = xavier_init(n_val, d, rng);
    }
};

} // namespace

TEST_CASE("cnn parameter shapes follow the filter and kernel configuration") {
    ParameterStore params;
    Rng rng(1);
    init_attribute_cnn(params, 75, 4, 2, rng);
    CHECK(params.at(kAttrConv).rows() == 2);
    CHECK(params.at(kAttrConv).cols() == 8); // two stacked rows of width c
    CHECK(params.at(kAttrProj).rows() == 2 * (75 - 4 + 1));
    CHECK(params.at(kAttrProj).cols() == 75);
    CHECK(params.at(kAttrProjB).rows() == 1);
    CHECK(params.at(kAttrProjB).cols() == 75);

    ParameterStore small;
    init_attribute_cnn(small, 6, 4, 2, rng);
    CHECK(small.at(kAttrProj).rows() == 6);
    CHECK(small.at(kAttrProj).cols() == 6);

    ParameterStore bad;
    CHECK_THROWS(init_attribute_cnn(bad, 4, 4, 2, rng));
}

TEST_CASE("cnn output and score collapse to hand values at zero parameters") {
    AttrFixture fx(3, 2, 2, 6, 3, 2, 4);
    fx.params.at(kAttrConv).fill(0.0);
    fx.params.at(kAttrProj).fill(0.0);
    fx.params.at(kAttrProjB).fill(0.0);

    auto a = fx.params.at(kAttrAttr).row(0);
    auto v = fx.values.row(0);
    auto out = cnn_forward(fx.params, a, v);
    REQUIRE(out.size() == 6);
    for (double x : out) CHECK(x == 0.0); // tanh(0 . W + 0) stays at zero

    auto h = fx.params.at(kAttrEnt).row(0);
    CHECK(score_attr(fx.params, h, a, v) == doctest::Approx(-norm2(h)));

    fx.params.at(kAttrEnt).fill(0.0);
    std::vector<AttrTriple> batch{{0, 0, 0}};
    // score 0 gives the logistic constant log 2
    CHECK(loss_attribute_view(fx.params, batch, fx.values, nullptr) ==
          doctest::Approx(std::log(2.0)));
}

TEST_CASE("triple score equals the negative distance to the cnn image") {
    AttrFixture fx(4, 3, 3, 5, 3, 2, 9);
    AttrTriple f{1, 2, 0};
    auto cnn = cnn_forward(fx.params, fx.params.at(kAttrAttr).row(2), fx.values.row(0));
    auto h = fx.params.at(kAttrEnt).row(1);
    double dist = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i)
        dist += (h[i] - cnn[i]) * (h[i] - cnn[i]);
    CHECK(score_attr(fx.params, f, fx.values) == doctest::Approx(-std::sqrt(dist)));
    CHECK(score_attr(fx.params, f, fx.values) <= 0.0);
}

TEST_CASE("attribute fact indexing validates value literals") {
    KnowledgeGraph a, b;
    parse_attribute_triples("x\tp\tred\ny\tq\tblue\n", a);
    parse_relation_triples("u\tr\tv\n", b);
    Vocabulary vocab(a, b);
    std::map<std::string, int> value_index{{"red", 0}, {"blue", 1}};
    auto facts = index_attribute_facts(a, Side::A, vocab, value_index);
    REQUIRE(facts.size() == 2);
    CHECK(facts[0].head == vocab.entity_index(Side::A, "x"));
    CHECK(facts[0].attribute == vocab.attribute_index(Side::A, "p"));
    CHECK(facts[0].value == 0);
    CHECK(facts[1].value == 1);

    std::map<std::string, int> missing{{"red", 0}};
    CHECK_THROWS_AS(index_attribute_facts(a, Side::A, vocab, missing), std::out_of_range);
}

TEST_CASE("attribute view gradient passes finite differences") {
    AttrFixture fx(5, 3, 4, 5, 3, 2, 21);
    std::vector<AttrTriple> batch{{0, 0, 0}, {1, 2, 3}, {4, 1, 2}, {0, 2, 1}};
    Gradients grads(fx.params);
    double loss = loss_attribute_view(fx.params, batch, fx.values, &grads);
    CHECK(loss > 0.0);

    // the frozen value matrix lives outside the store, so gradients can only
    // touch the five view tensors
    std::set<std::string> touched;
    for (const auto& [name, g] : grads.entries()) touched.insert(name);
    std::set<std::string> expected{kAttrEnt, kAttrAttr, kAttrConv, kAttrProj, kAttrProjB};
    CHECK(touched == expected);

    auto fn = [&](const ParameterStore& p) {
        return loss_attribute_view(p, batch, fx.values, nullptr);
    };
    FdReport report = finite_difference_check(fn, fx.params, grads, 1e-6, 1e-5);
    INFO("worst " << report.worst_param << "[" << report.worst_index << "] err "
                  << report.max_rel_err);
    CHECK(report.pass);
}

TEST_CASE("cross-entity attribute loss substitutes aligned heads") {
    AttrFixture fx(6, 2, 3, 5, 3, 2, 33);
    std::vector<AttrTriple> facts{{0, 0, 0}, {2, 1, 1}};

    CHECK(loss_cross_entity_attr(fx.params, facts, {}, fx.values, nullptr) == 0.0);

    std::map<int, int> seed{{0, 4}, {4, 0}};
    double expected = log1pexp(-score_attr(fx.params, AttrTriple{4, 0, 0}, fx.values));
    CHECK(loss_cross_entity_attr(fx.params, facts, seed, fx.values, nullptr) ==
          doctest::Approx(expected));

    Gradients grads(fx.params);
    loss_cross_entity_attr(fx.params, facts, seed, fx.values, &grads);
    auto fn = [&](const ParameterStore& p) {
        return loss_cross_entity_attr(p, facts, seed, fx.values, nullptr);
    };
    CHECK(finite_difference_check(fn, fx.params, grads, 1e-6, 1e-5).pass);
}

TEST_CASE("soft attribute alignment scales counterpart terms by their weight") {
    AttrFixture fx(4, 4, 3, 5, 3, 2, 41);
    std::vector<AttrTriple> facts{{0, 0, 0}, {1, 1, 2}};

    CHECK(loss_cross_attr_alignment(fx.params, facts, {}, fx.values, nullptr) == 0.0);

    SoftMap soft;
    soft[0] = {{3, 0.92}};
    double expected =
        0.92 * log1pexp(-score_attr(fx.params, AttrTriple{0, 3, 0}, fx.values));
    CHECK(loss_cross_attr_alignment(fx.params, facts, soft, fx.values, nullptr) ==
          doctest::Approx(expected));

    SoftMap halved;
    halved[0] = {{3, 0.46}};
    CHECK(loss_cross_attr_alignment(fx.params, facts, halved, fx.values, nullptr) ==
          doctest::Approx(expected / 2.0));

    SoftMap multi;
    multi[0] = {{2, 0.9}, {3, 0.95}};
    multi[1] = {{0, 0.99}};
    Gradients grads(fx.params);
    double loss = loss_cross_attr_alignment(fx.params, facts, multi, fx.values, &grads);
    CHECK(loss > 0.0);
    auto fn = [&](const ParameterStore& p) {
        return loss_cross_attr_alignment(p, facts, multi, fx.values, nullptr);
    };
    CHECK(finite_difference_check(fn, fx.params, grads, 1e-6, 1e-5).pass);
}
