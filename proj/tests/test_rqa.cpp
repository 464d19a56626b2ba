// Recurrence matrices and quantification measures, anchored by hand
// enumerations and an independent brute-force reference.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <string>

#include "facedyn/embedding.hpp"
#include "facedyn/rng.hpp"
#include "facedyn/rqa.hpp"
#include "facedyn/synth.hpp"

using namespace facedyn;

namespace {

Series alternating_pair() { return {1.0, 2.0, 1.0, 2.0, 1.0, 2.0}; }

Series sine_series(std::size_t n, double period_s, double fps = 60.0) {
    Series x(n);
    for (std::size_t t = 0; t < n; ++t)
        x[t] = 0.5 + 0.5 * std::sin(2.0 * M_PI * static_cast<double>(t) /
                                    (period_s * fps));
    return x;
}

Series noise_series(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    Series x(n);
    for (auto& v : x) v = rng.uniform();
    return x;
}

void require_close(double got, double want) {
    const double scale = std::max({1.0, std::abs(got), std::abs(want)});
    REQUIRE(std::abs(got - want) <= 1e-12 * scale);
}

void require_equal_metrics(const RqaMetrics& got, const RqaMetrics& want) {
    REQUIRE(got.lmax == want.lmax);
    REQUIRE(got.vmax == want.vmax);
    require_close(got.rr, want.rr);
    require_close(got.det, want.det);
    require_close(got.l_mean, want.l_mean);
    require_close(got.l_sd, want.l_sd);
    require_close(got.entropy, want.entropy);
    require_close(got.complexity, want.complexity);
    require_close(got.divergence, want.divergence);
    require_close(got.trend, want.trend);
    require_close(got.lam, want.lam);
    require_close(got.tt, want.tt);
    REQUIRE(got.no_recurrent_points == want.no_recurrent_points);
    REQUIRE(got.divergence_defined == want.divergence_defined);
}

}  // namespace

TEST_CASE("alternating series recurs at six tenths outside the band", "[rqa]") {
    RqaConfig cfg;  // radius 0.2, theiler 2
    auto tr = embed(alternating_pair(), {1, 1});
    auto plot = recurrence_matrix(tr, nullptr, cfg);

    // 36 cells minus the |i-j| < 2 band of 16 leaves 20; equal values pair up
    // at even offsets: 8 cells at |i-j| = 2 plus 4 at |i-j| = 4.
    REQUIRE(plot.valid_cells == 20);
    REQUIRE(plot.auto_mode);
    REQUIRE(plot.theiler == 2);
    std::size_t recurrent = 0;
    for (std::size_t i = 0; i < plot.na; ++i)
        for (std::size_t j = 0; j < plot.nb; ++j)
            if (plot.at(i, j)) ++recurrent;
    REQUIRE(recurrent == 12);

    auto m = rqa_metrics(plot, cfg);
    REQUIRE(m.rr == 0.6);

    // Mean distance over the same 20 cells: 8 ones and 12 zeros.
    REQUIRE(plot.mean_distance == Catch::Approx(0.4).margin(1e-15));
    REQUIRE(plot.epsilon == Catch::Approx(0.08).margin(1e-15));
}

TEST_CASE("theiler zero keeps the always-recurrent main diagonal", "[rqa]") {
    RqaConfig cfg;
    cfg.theiler = 0;
    auto tr = embed(noise_series(50, 3), {1, 2});
    auto plot = recurrence_matrix(tr, nullptr, cfg);
    REQUIRE(plot.valid_cells == plot.na * plot.nb);
    for (std::size_t i = 0; i < plot.na; ++i) REQUIRE(plot.at(i, i));

    RqaConfig banded;
    banded.theiler = 2;
    auto plot2 = recurrence_matrix(tr, nullptr, banded);
    for (std::size_t i = 0; i < plot2.na; ++i) {
        REQUIRE_FALSE(plot2.at(i, i));
        REQUIRE(plot2.excluded(i, i));
        if (i + 1 < plot2.na) REQUIRE(plot2.excluded(i, i + 1));
        if (i + 2 < plot2.na) REQUIRE_FALSE(plot2.excluded(i, i + 2));
    }
}

TEST_CASE("a single five-point diagonal fixes the line measures", "[rqa]") {
    RecurrencePlot plot;
    plot.na = 7;
    plot.nb = 7;
    plot.cells.assign(49, 0);
    for (std::size_t i = 0; i < 5; ++i) plot.cells[i * 7 + (i + 1)] = 1;
    plot.valid_cells = 49;
    plot.auto_mode = false;
    plot.theiler = 0;

    RqaConfig cfg;  // l_min = v_min = 4
    auto m = rqa_metrics(plot, cfg);
    REQUIRE(m.rr == Catch::Approx(5.0 / 49.0).margin(1e-15));
    REQUIRE(m.det == 1.0);
    REQUIRE(m.l_mean == 5.0);
    REQUIRE(m.l_sd == 0.0);
    REQUIRE(m.lmax == 5.0);
    REQUIRE(m.divergence == Catch::Approx(0.2).margin(1e-15));
    REQUIRE(m.entropy == 0.0);
    REQUIRE(m.complexity == 1.0);  // log2(5 - 4 + 1) observed range
    REQUIRE(m.lam == 0.0);
    REQUIRE(m.tt == 0.0);
    REQUIRE(m.vmax == 0.0);
    REQUIRE(m.divergence_defined);

    // The same plot with vertical minimum 1... complexity under the observed
    // mode counts distinct lengths instead.
    RqaConfig observed;
    observed.complexity = ComplexityMode::observed;
    auto mo = rqa_metrics(plot, observed);
    REQUIRE(mo.complexity == 0.0);  // log2(1 distinct length) - 0
}

TEST_CASE("production metrics match the brute-force reference", "[rqa]") {
    RqaConfig auto_cfg;
    RqaConfig cross_cfg;
    cross_cfg.radius_frac = 0.30;

    Rng rng(101);
    for (int c = 0; c < 8; ++c) {
        const std::size_t n = 40 + 30 * static_cast<std::size_t>(c);
        Series x;
        if (c % 3 == 0)
            x = sine_series(n, 0.5 + 0.2 * c);
        else if (c % 3 == 1)
            x = noise_series(n, 500 + static_cast<std::uint64_t>(c));
        else {
            x = sine_series(n, 0.8);
            for (auto& v : x) v = 0.7 * v + 0.3 * rng.uniform();
        }
        auto rs = rescale_unit(x).values;
        const EmbeddingParams p{1 + c % 4, 1 + c % 3};
        auto tr = embed(rs, p);

        auto got = rqa_metrics(recurrence_matrix(tr, nullptr, auto_cfg), auto_cfg);
        auto want = synth::brute_force_rqa(tr, nullptr, auto_cfg);
        require_equal_metrics(got, want);

        auto y = rescale_unit(noise_series(n, 900 + static_cast<std::uint64_t>(c))).values;
        auto trb = embed(y, p);
        auto got_x = rqa_metrics(recurrence_matrix(tr, &trb, cross_cfg), cross_cfg);
        auto want_x = synth::brute_force_rqa(tr, &trb, cross_cfg);
        require_equal_metrics(got_x, want_x);
    }
}

TEST_CASE("recurrence rate grows with the radius", "[rqa]") {
    auto rs = rescale_unit(noise_series(200, 77)).values;
    double prev = -1.0;
    for (double r : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        RqaConfig cfg;
        cfg.radius_frac = r;
        auto m = rqa(rs, {3, 2}, cfg);
        REQUIRE(m.rr >= prev);
        prev = m.rr;
    }
}

TEST_CASE("longer minimum lines never raise determinism", "[rqa]") {
    auto rs = rescale_unit(sine_series(400, 0.9)).values;
    auto tr = embed(rs, {4, 2});
    RqaConfig cfg;
    auto plot = recurrence_matrix(tr, nullptr, cfg);
    double prev = 2.0;
    for (int lmin : {2, 4, 6, 10}) {
        RqaConfig c2 = cfg;
        c2.l_min = lmin;
        auto m = rqa_metrics(plot, c2);
        REQUIRE(m.det <= prev + 1e-15);
        prev = m.det;
    }
}

TEST_CASE("auto plots are symmetric", "[rqa]") {
    RqaConfig cfg;
    auto tr = embed(rescale_unit(noise_series(120, 5)).values, {2, 3});
    auto plot = recurrence_matrix(tr, nullptr, cfg);
    for (std::size_t i = 0; i < plot.na; ++i)
        for (std::size_t j = 0; j < plot.nb; ++j)
            REQUIRE(plot.at(i, j) == plot.at(j, i));
}

TEST_CASE("swapping cross inputs transposes the plot", "[rqa]") {
    RqaConfig cfg;
    cfg.radius_frac = 0.30;
    auto a = embed(rescale_unit(sine_series(150, 0.7)).values, {2, 2});
    auto b = embed(rescale_unit(noise_series(150, 9)).values, {2, 2});
    auto ab = recurrence_matrix(a, &b, cfg);
    auto ba = recurrence_matrix(b, &a, cfg);
    REQUIRE(ab.na == ba.nb);
    REQUIRE(ab.nb == ba.na);
    // The distance sum runs in row order, so the transposed mean can differ
    // in the last ulp.
    require_close(ab.epsilon, ba.epsilon);
    for (std::size_t i = 0; i < ab.na; ++i)
        for (std::size_t j = 0; j < ab.nb; ++j)
            REQUIRE(ab.at(i, j) == ba.at(j, i));
    auto mab = rqa_metrics(ab, cfg);
    auto mba = rqa_metrics(ba, cfg);
    require_close(mab.rr, mba.rr);
    require_close(mab.det, mba.det);
}

TEST_CASE("a series is most similar to itself under cross recurrence", "[rqa]") {
    RqaConfig cfg;
    cfg.radius_frac = 0.30;
    auto x = rescale_unit(sine_series(300, 1.1)).values;
    auto y = rescale_unit(noise_series(300, 13)).values;
    auto self = crqa(x, x, {2, 2}, cfg);
    auto other = crqa(x, y, {2, 2}, cfg);
    REQUIRE(self.rr >= other.rr);

    // Identical inputs recur along the whole main diagonal.
    auto tr = embed(x, {2, 2});
    auto plot = recurrence_matrix(tr, &tr, cfg);
    REQUIRE(plot.theiler == 0);
    for (std::size_t i = 0; i < plot.na; ++i) REQUIRE(plot.at(i, i));
}

TEST_CASE("constant against constant recurs everywhere", "[rqa]") {
    Series a(120, 0.0);
    Series b(120, 0.0);
    RqaConfig cfg;
    cfg.radius_frac = 0.30;
    auto m = crqa(a, b, {1, 1}, cfg);
    REQUIRE(m.rr == 1.0);
    REQUIRE(m.det > 0.99);
    REQUIRE(m.lam > 0.99);
    REQUIRE(m.lmax == 120.0);
}

TEST_CASE("degenerate plots raise instead of dividing by zero", "[rqa]") {
    Trajectory empty;
    RqaConfig cfg;
    REQUIRE_THROWS_AS(recurrence_matrix(empty, nullptr, cfg), EmptyTrajectory);

    // A band wider than the matrix leaves no valid cells.
    auto tr = embed(Series{0.1, 0.2, 0.3}, {1, 1});
    RqaConfig wide;
    wide.theiler = 5;
    REQUIRE_THROWS_AS(recurrence_matrix(tr, nullptr, wide), EmptyTrajectory);

    RqaConfig bad;
    bad.radius_frac = 0.0;
    REQUIRE_THROWS_AS(recurrence_matrix(tr, nullptr, bad), InvalidParams);
}

TEST_CASE("separated constants yield an empty cross plot", "[rqa]") {
    Series a(30, 0.0);
    Series b(30, 1.0);
    RqaConfig cfg;
    cfg.radius_frac = 0.30;
    auto m = crqa(a, b, {1, 1}, cfg);
    REQUIRE(m.rr == 0.0);
    REQUIRE(m.no_recurrent_points);
    REQUIRE_FALSE(m.divergence_defined);
    REQUIRE(m.det == 0.0);
    REQUIRE(m.lam == 0.0);
}

TEST_CASE("short trajectories set the stability flag", "[rqa]") {
    RqaConfig cfg;
    auto small = rqa(rescale_unit(noise_series(200, 21)).values, {1, 2}, cfg);
    REQUIRE(small.short_window);
    RqaConfig relaxed;
    relaxed.stability_min_samples = 50;
    auto big = rqa(rescale_unit(noise_series(200, 21)).values, {1, 2}, relaxed);
    REQUIRE_FALSE(big.short_window);
}

TEST_CASE("metrics are identical for any worker count", "[rqa]") {
    auto rs = rescale_unit(noise_series(400, 33)).values;
    RqaConfig cfg;
    ::setenv("FACEDYN_WORKERS", "1", 1);
    auto m1 = rqa(rs, {2, 3}, cfg);
    ::setenv("FACEDYN_WORKERS", "4", 1);
    auto m4 = rqa(rs, {2, 3}, cfg);
    ::setenv("FACEDYN_WORKERS", "1", 1);
    REQUIRE(m1.rr == m4.rr);
    REQUIRE(m1.det == m4.det);
    REQUIRE(m1.l_mean == m4.l_mean);
    REQUIRE(m1.entropy == m4.entropy);
    REQUIRE(m1.trend == m4.trend);
    REQUIRE(m1.tt == m4.tt);
}

TEST_CASE("rle export lists runs per row", "[rqa]") {
    RecurrencePlot plot;
    plot.na = 2;
    plot.nb = 4;
    plot.cells = {1, 1, 0, 1, 0, 0, 0, 0};
    auto text = encode_plot_rle(plot);
    REQUIRE(text.substr(0, 8) == "rle 2 4\n");
    REQUIRE(text.find("0:2") != std::string::npos);
    REQUIRE(text.find("3:1") != std::string::npos);
}

TEST_CASE("metric name tables stay aligned", "[rqa]") {
    REQUIRE(rqa_metric_names().size() == 12);
    REQUIRE(table_metric_names().size() == 11);
    RqaMetrics m;
    m.rr = 0.5;
    m.vmax = 7.0;
    auto vals = table_metric_values(m);
    REQUIRE(vals.size() == 11);
    REQUIRE(vals[0] == 0.5);
    REQUIRE(vals[10] == 7.0);
    auto map = m.as_map();
    REQUIRE(map.at("rr") == 0.5);
    REQUIRE(map.count("lmax") == 1);
}
