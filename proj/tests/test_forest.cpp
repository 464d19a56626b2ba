// Random forest classifier: separability, weighting, determinism.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "facedyn/forest.hpp"
#include "facedyn/metrics.hpp"
#include "facedyn/rng.hpp"

using namespace facedyn;

namespace {

struct Blobs {
    std::vector<double> data;
    std::vector<int> y;
    std::size_t rows = 0;

    DataView view() const { return {data.data(), rows, 2}; }
};

Blobs make_blobs(std::size_t per_class, double sep, double sd,
                 std::uint64_t seed) {
    const double cx[3] = {0.0, sep, -sep};
    const double cy[3] = {0.0, sep, sep};
    Blobs b;
    Rng rng(seed);
    for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < per_class; ++i) {
            b.data.push_back(cx[c] + sd * rng.normal());
            b.data.push_back(cy[c] + sd * rng.normal());
            b.y.push_back(c);
            ++b.rows;
        }
    return b;
}

}  // namespace

TEST_CASE("well-separated blobs train to perfect accuracy", "[forest]") {
    auto b = make_blobs(20, 3.0, 0.3, 1);
    RandomForest f;
    ForestConfig cfg;
    cfg.n_trees = 50;
    cfg.seed = 1;
    f.fit(b.view(), b.y, 3, cfg);
    auto preds = f.predict(b.view());
    auto report = eval_metrics(preds, b.y, 3);
    REQUIRE(report.balanced_accuracy == 1.0);
}

TEST_CASE("single-class training is rejected", "[forest]") {
    std::vector<double> data = {0.0, 0.0, 1.0, 1.0};
    std::vector<int> y = {1, 1};
    RandomForest f;
    REQUIRE_THROWS_AS(f.fit({data.data(), 2, 2}, y, 3, ForestConfig{}),
                      SingleClassTraining);
    std::vector<int> bad_len = {0};
    REQUIRE_THROWS_AS(f.fit({data.data(), 2, 2}, bad_len, 3, ForestConfig{}),
                      InvalidParams);
}

TEST_CASE("probabilities are normalized", "[forest]") {
    auto b = make_blobs(15, 2.0, 0.6, 3);
    RandomForest f;
    ForestConfig cfg;
    cfg.n_trees = 30;
    f.fit(b.view(), b.y, 3, cfg);
    for (std::size_t r = 0; r < b.rows; ++r) {
        auto p = f.predict_proba(b.data.data() + 2 * r);
        double sum = 0.0;
        for (double v : p) {
            REQUIRE(v >= 0.0);
            sum += v;
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-9));
    }
}

TEST_CASE("the same seed grows the same forest", "[forest]") {
    auto b = make_blobs(15, 1.5, 0.8, 5);
    ForestConfig cfg;
    cfg.n_trees = 40;
    cfg.seed = 9;
    RandomForest f1, f2;
    f1.fit(b.view(), b.y, 3, cfg);
    f2.fit(b.view(), b.y, 3, cfg);
    auto p1 = f1.predict(b.view());
    auto p2 = f2.predict(b.view());
    REQUIRE(p1 == p2);
    for (std::size_t r = 0; r < b.rows; ++r)
        REQUIRE(f1.predict_proba(b.data.data() + 2 * r) ==
                f2.predict_proba(b.data.data() + 2 * r));

    ForestConfig other = cfg;
    other.seed = 10;
    RandomForest f3;
    f3.fit(b.view(), b.y, 3, other);
    bool identical = true;
    for (std::size_t r = 0; r < b.rows; ++r)
        if (f3.predict_proba(b.data.data() + 2 * r) !=
            f1.predict_proba(b.data.data() + 2 * r))
            identical = false;
    REQUIRE_FALSE(identical);
}

TEST_CASE("worker count does not change the forest", "[forest]") {
    auto b = make_blobs(15, 1.5, 0.8, 7);
    ForestConfig cfg;
    cfg.n_trees = 32;
    cfg.seed = 2;
    ::setenv("FACEDYN_WORKERS", "1", 1);
    RandomForest f1;
    f1.fit(b.view(), b.y, 3, cfg);
    ::setenv("FACEDYN_WORKERS", "4", 1);
    RandomForest f4;
    f4.fit(b.view(), b.y, 3, cfg);
    ::setenv("FACEDYN_WORKERS", "1", 1);
    for (std::size_t r = 0; r < b.rows; ++r)
        REQUIRE(f1.predict_proba(b.data.data() + 2 * r) ==
                f4.predict_proba(b.data.data() + 2 * r));
}

TEST_CASE("class weights rebalance skewed training sets", "[forest]") {
    auto w = balanced_class_weights({0, 0, 0, 1}, 2);
    REQUIRE(w[0] == Catch::Approx(4.0 / 6.0).margin(1e-15));
    REQUIRE(w[1] == Catch::Approx(2.0).margin(1e-15));

    // 40-vs-5 imbalance: the minority region still classifies correctly.
    std::vector<double> data;
    std::vector<int> y;
    Rng rng(13);
    for (int i = 0; i < 40; ++i) {
        data.push_back(0.0 + 0.3 * rng.normal());
        data.push_back(0.0 + 0.3 * rng.normal());
        y.push_back(0);
    }
    for (int i = 0; i < 5; ++i) {
        data.push_back(4.0 + 0.3 * rng.normal());
        data.push_back(4.0 + 0.3 * rng.normal());
        y.push_back(1);
    }
    RandomForest f;
    ForestConfig cfg;
    cfg.n_trees = 60;
    f.fit({data.data(), 45, 2}, y, 2, cfg);
    const double probe[2] = {4.0, 4.0};
    REQUIRE(f.predict(probe) == 1);
}

TEST_CASE("trees serialize through from_trees", "[forest]") {
    auto b = make_blobs(10, 2.0, 0.4, 21);
    RandomForest f;
    ForestConfig cfg;
    cfg.n_trees = 10;
    f.fit(b.view(), b.y, 3, cfg);
    auto copy = RandomForest::from_trees(f.trees(), f.n_classes());
    for (std::size_t r = 0; r < b.rows; ++r)
        REQUIRE(copy.predict(b.data.data() + 2 * r) ==
                f.predict(b.data.data() + 2 * r));
}
