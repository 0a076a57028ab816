#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "multike/common.hpp"
#include "multike/params.hpp"
#include "multike/tensor.hpp"

using namespace multike;

TEST_CASE("rng streams are reproducible") {
    Rng a(42), b(42);
    for (int i = 0; i < 200; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("rng uniform stays in the half-open unit interval") {
    Rng rng(7);
    double lo = 1.0, hi = 0.0, sum = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
        double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
        sum += u;
    }
    CHECK(lo < 0.01);
    CHECK(hi > 0.99);
    CHECK(sum / n == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("rng index covers the whole range and stays in bounds") {
    Rng rng(3);
    std::set<std::size_t> seen;
    for (int i = 0; i < 1000; ++i) {
        std::size_t k = rng.index(7);
        CHECK(k < 7);
        seen.insert(k);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("rng shuffle permutes deterministically") {
    std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::vector<int> w = v;
    Rng a(11), b(11);
    a.shuffle(v);
    b.shuffle(w);
    CHECK(v == w);
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});

    std::vector<int> one{42};
    Rng c(1);
    c.shuffle(one);
    CHECK(one == std::vector<int>{42});
}

TEST_CASE("derived substream seeds are distinct per stream and per seed") {
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 8; ++s) seeds.insert(Rng::derive(1, s));
    CHECK(seeds.size() == 8);
    CHECK(Rng::derive(1, 0) != Rng::derive(2, 0));
    CHECK(Rng::derive(5, 3) == Rng::derive(5, 3));
}

TEST_CASE("tensor rejects zero dimensions") {
    CHECK_THROWS_AS(Tensor(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(Tensor(3, 0), std::invalid_argument);
}

TEST_CASE("vector helpers match hand values") {
    std::vector<double> a{3.0, 4.0}, b{4.0, -3.0}, z{0.0, 0.0};
    CHECK(dot(a, b) == doctest::Approx(0.0));
    CHECK(norm2(a) == doctest::Approx(5.0));
    CHECK(norm1(b) == doctest::Approx(7.0));
    CHECK(cosine(a, a) == doctest::Approx(1.0));
    CHECK(cosine(a, b) == doctest::Approx(0.0));
    CHECK(cosine(a, z) == 0.0); // zero-norm operand is defined as 0
    std::vector<double> y{0.0, 5.0};
    axpy(2.0, a, y);
    CHECK(y[0] == doctest::Approx(6.0));
    CHECK(y[1] == doctest::Approx(13.0));
    CHECK(sigmoid(0.0) == doctest::Approx(0.5));
    CHECK(log1pexp(0.0) == doctest::Approx(std::log(2.0)));
    CHECK(log1pexp(1000.0) == doctest::Approx(1000.0)); // no overflow
    CHECK(log1pexp(-1000.0) == doctest::Approx(0.0));
}

TEST_CASE("xavier init respects the fan bound and is seed-deterministic") {
    Rng r1(9), r2(9), r3(10);
    Tensor t1 = xavier_init(30, 45, r1);
    Tensor t2 = xavier_init(30, 45, r2);
    Tensor t3 = xavier_init(30, 45, r3);
    double bound = std::sqrt(6.0 / (30 + 45));
    bool identical = true, differs = false;
    for (std::size_t i = 0; i < t1.size(); ++i) {
        CHECK(std::fabs(t1[i]) <= bound);
        identical = identical && t1[i] == t2[i];
        differs = differs || t1[i] != t3[i];
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("adagrad first and second steps match the closed form") {
    ParameterStore params;
    params.add("w", Tensor(1, 1, 1.0));
    Gradients grads(params);
    grads.of("w")[0] = 1.0;

    AdaGrad opt(0.001);
    opt.step(params, grads);
    double step1 = 0.001 / (1.0 + 1e-8); // accum = 1
    CHECK(params.at("w")[0] == doctest::Approx(1.0 - step1).epsilon(1e-12));

    double before = params.at("w")[0];
    opt.step(params, grads);
    double step2 = 0.001 / (std::sqrt(2.0) + 1e-8); // accum = 2
    CHECK(params.at("w")[0] == doctest::Approx(before - step2).epsilon(1e-12));
    CHECK(step2 < step1); // accumulated curvature shrinks the step

    const Tensor* acc = opt.accumulator("w");
    REQUIRE(acc != nullptr);
    CHECK((*acc)[0] == doctest::Approx(2.0));
}

TEST_CASE("adagrad skips frozen tensors and untouched gradients") {
    ParameterStore params;
    params.add("train", Tensor(1, 2, 1.0));
    params.add("frozen", Tensor(1, 2, 1.0), false);
    Gradients grads(params);
    grads.of("train")[0] = 1.0;
    grads.of("frozen")[0] = 1.0;

    AdaGrad opt(0.1);
    opt.step(params, grads);
    CHECK(params.at("train")[0] != 1.0);
    CHECK(params.at("train")[1] == 1.0); // zero gradient coordinate untouched
    CHECK(params.at("frozen")[0] == 1.0);
    CHECK(params.at("frozen")[1] == 1.0);
    CHECK(opt.accumulator("missing") == nullptr);
}

TEST_CASE("gradients are lazy and zero-initialized") {
    ParameterStore params;
    params.add("a", Tensor(2, 2, 3.0));
    Gradients grads(params);
    CHECK(grads.find("a") == nullptr);
    grads.of("a").at(1, 1) = 5.0;
    REQUIRE(grads.find("a") != nullptr);
    CHECK(grads.find("a")->at(0, 0) == 0.0);
    CHECK(grads.find("a")->at(1, 1) == 5.0);
    grads.clear();
    CHECK(grads.find("a") == nullptr);
}

TEST_CASE("finite differences accept a correct gradient and flag a wrong one") {
    ParameterStore params;
    Rng rng(4);
    params.add("w", xavier_init(2, 3, rng));

    auto loss = [](const ParameterStore& p) {
        double s = 0.0;
        auto w = p.at("w").flat();
        for (double v : w) s += v * v;
        return s + 3.0 * w[0];
    };

    Gradients good(params);
    {
        auto w = params.at("w").flat();
        auto g = good.of("w").flat();
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * w[i];
        g[0] += 3.0;
    }
    FdReport ok = finite_difference_check(loss, params, good, 1e-5, 1e-6);
    CHECK(ok.pass);
    CHECK(ok.max_rel_err < 1e-6);

    Gradients bad(params);
    {
        auto w = params.at("w").flat();
        auto g = bad.of("w").flat();
        for (std::size_t i = 0; i < w.size(); ++i) g[i] = w[i]; // missing factor 2
    }
    FdReport broken = finite_difference_check(loss, params, bad, 1e-5, 1e-6);
    CHECK(!broken.pass);
    CHECK(broken.worst_param == "w");

    // an absent analytic entry must read as zero, not as "skip this tensor"
    Gradients empty(params);
    FdReport missing = finite_difference_check(loss, params, empty, 1e-5, 1e-6);
    CHECK(!missing.pass);
}

TEST_CASE("parallel_for output is independent of the thread count") {
    auto run = [](int threads) {
        std::vector<double> out(101, -1.0);
        parallel_for(out.size(), threads, [&](std::size_t b, std::size_t e) {
            for (std::size_t i = b; i < e; ++i) out[i] = static_cast<double>(i * i);
        });
        return out;
    };
    auto serial = run(1);
    auto parallel = run(4);
    CHECK(serial == parallel);
    for (std::size_t i = 0; i < serial.size(); ++i)
        CHECK(serial[i] == static_cast<double>(i * i));
    parallel_for(0, 4, [](std::size_t b, std::size_t e) { CHECK(b == e); });
}

TEST_CASE("string helpers") {
    CHECK(split("a\tb\tc", '\t') == std::vector<std::string>{"a", "b", "c"});
    CHECK(split("a\t\tb", '\t') == std::vector<std::string>{"a", "", "b"});
    CHECK(lower_ascii("MiXeD") == "mixed");
    CHECK(trim("  x y \t") == "x y");
    CHECK(trim("") == "");
    CHECK(percent_decode("Born_in%282%29") == "Born_in(2)");
    CHECK(percent_decode("100%") == "100%"); // truncated escape left as-is
    CHECK(to_hex(fnv1a("abc")) == to_hex(fnv1a("abc")));
    CHECK(fnv1a("abc") != fnv1a("abd"));
}
