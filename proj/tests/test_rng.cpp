// Deterministic random number generation and stream forking.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "facedyn/rng.hpp"

using namespace facedyn;

TEST_CASE("identical seeds reproduce the stream", "[rng]") {
    Rng a(42), b(42);
    for (int i = 0; i < 200; ++i) REQUIRE(a.next_u64() == b.next_u64());
    Rng c(42), d(43);
    bool all_equal = true;
    for (int i = 0; i < 20; ++i)
        if (c.next_u64() != d.next_u64()) all_equal = false;
    REQUIRE_FALSE(all_equal);
}

TEST_CASE("forks are pure functions of state and stream id", "[rng]") {
    // Identical states fork identical children; ids separate streams.
    Rng a(7), b(7);
    auto f1 = a.fork(1);
    auto f1_again = b.fork(1);
    for (int i = 0; i < 50; ++i) REQUIRE(f1.next_u64() == f1_again.next_u64());
    REQUIRE(a.fork(1).next_u64() != a.fork(2).next_u64());

    // Draining a child leaves the parent's own stream untouched.
    Rng c(7);
    auto child = c.fork(3);
    for (int i = 0; i < 100; ++i) child.next_u64();
    Rng untouched(7);
    for (int i = 0; i < 50; ++i)
        REQUIRE(c.next_u64() == untouched.next_u64());
}

TEST_CASE("below stays in range and rejects zero", "[rng]") {
    Rng rng(123);
    for (int i = 0; i < 2000; ++i) REQUIRE(rng.below(17) < 17);
    REQUIRE_THROWS_AS(rng.below(0), InvalidParams);
    Rng one(5);
    for (int i = 0; i < 10; ++i) REQUIRE(one.below(1) == 0);
}

TEST_CASE("uniform lies in the half-open unit interval", "[rng]") {
    Rng rng(9);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const double u = rng.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    REQUIRE(lo < 0.01);
    REQUIRE(hi > 0.99);
    const double v = rng.uniform(-3.0, 5.0);
    REQUIRE(v >= -3.0);
    REQUIRE(v < 5.0);
}

TEST_CASE("normal draws have unit scale", "[rng]") {
    Rng rng(77);
    const int n = 20000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sq / n - mean * mean);
    REQUIRE(std::abs(mean) < 0.03);
    REQUIRE(sd == Catch::Approx(1.0).margin(0.03));
}

TEST_CASE("shuffle permutes without loss", "[rng]") {
    std::vector<int> v(20);
    std::iota(v.begin(), v.end(), 0);
    Rng rng(11);
    auto w = v;
    rng.shuffle(w);
    REQUIRE(w != v);
    std::sort(w.begin(), w.end());
    REQUIRE(w == v);

    // Same seed, same permutation.
    std::vector<int> x(20), y(20);
    std::iota(x.begin(), x.end(), 0);
    std::iota(y.begin(), y.end(), 0);
    Rng r1(3), r2(3);
    r1.shuffle(x);
    r2.shuffle(y);
    REQUIRE(x == y);
}

TEST_CASE("splitmix64 advances its state deterministically", "[rng]") {
    std::uint64_t s1 = 42, s2 = 42;
    const auto a1 = splitmix64(s1);
    const auto a2 = splitmix64(s2);
    REQUIRE(a1 == a2);
    REQUIRE(s1 == s2);
    REQUIRE(s1 != 42);
    REQUIRE(splitmix64(s1) != a1);
}
