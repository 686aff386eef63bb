#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "csp/clustering.hpp"
#include "csp/metrics.hpp"
#include "csp/rng.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace csp;
using namespace csp::clustering;

namespace {

Series pattern_sinusoid(std::size_t len) {
    Series s(len);
    for (std::size_t k = 0; k < len; ++k)
        s[k] = 0.5 + 0.35 * std::sin(4.0 * std::numbers::pi * static_cast<double>(k) /
                                     static_cast<double>(len - 1));
    return s;
}

Series pattern_ramp(std::size_t len) {
    Series s(len);
    for (std::size_t k = 0; k < len; ++k)
        s[k] = 0.1 + 0.8 * static_cast<double>(k) / static_cast<double>(len - 1);
    return s;
}

Series pattern_constant(std::size_t len, double v = 0.5) { return Series(len, v); }

struct Planted {
    std::vector<Series> series;
    std::vector<int> labels;
};

Planted planted_three_patterns(std::size_t len, int per_family, double sigma, std::uint64_t seed) {
    Planted out;
    Rng rng(seed);
    const std::vector<Series> bases = {pattern_sinusoid(len), pattern_ramp(len),
                                       pattern_constant(len)};
    for (int family = 0; family < 3; ++family) {
        for (int i = 0; i < per_family; ++i) {
            Series s = bases[static_cast<std::size_t>(family)];
            for (double& v : s) v += rng.normal(0.0, sigma);
            out.series.push_back(std::move(s));
            out.labels.push_back(family);
        }
    }
    return out;
}

}  // namespace

TEST_CASE("planted base patterns are mutually distant under DTW") {
    const std::size_t len = 30;
    const Series a = pattern_sinusoid(len), b = pattern_ramp(len), c = pattern_constant(len);
    CHECK(metrics::dtw(a, b) > kDefaultLambda);
    CHECK(metrics::dtw(a, c) > kDefaultLambda);
    CHECK(metrics::dtw(b, c) > kDefaultLambda);
}

TEST_CASE("kmeans_fit recovers three planted families") {
    Planted data = planted_three_patterns(30, 40, 0.05, 9001);
    KMeansFit fit = kmeans_fit(data.series, 3, 1.0, 1234);
    CHECK(oracles::adjusted_rand_index(fit.assignment, data.labels) >= 0.95);
    int total = 0;
    for (int c : fit.model.counts) total += c;
    CHECK(total == 120);
}

TEST_CASE("kmeans inertia trace is non-increasing") {
    Planted data = planted_three_patterns(30, 20, 0.08, 77);
    KMeansFit fit = kmeans_fit(data.series, 4, 1.0, 4321);
    for (std::size_t i = 1; i < fit.inertia_trace.size(); ++i)
        CHECK(fit.inertia_trace[i] <=
              fit.inertia_trace[i - 1] + 1e-9 * (1.0 + std::abs(fit.inertia_trace[i - 1])));
}

TEST_CASE("kmeans with k equal to the series count isolates every series") {
    Rng rng(5);
    std::vector<Series> series;
    for (int i = 0; i < 5; ++i) series.push_back(oracles::random_series(rng, 12, i, i + 0.5));
    KMeansFit fit = kmeans_fit(series, 5, 0.01, 99);
    std::vector<bool> used(5, false);
    for (int a : fit.assignment) used[static_cast<std::size_t>(a)] = true;
    for (bool u : used) CHECK(u);
    CHECK(std::abs(fit.inertia) < 0.05 * 5);  // near zero up to the soft-min offset
}

TEST_CASE("duplicated constant patterns yield the constants as centroids") {
    std::vector<Series> series;
    for (int rep = 0; rep < 2; ++rep) {
        series.push_back(Series(20, 0.2));
        series.push_back(Series(20, 0.9));
    }
    KMeansFit fit = kmeans_fit(series, 2, 1.0, 7);
    // each centroid matches one constant
    for (const Series& c : fit.model.centroids) {
        const double v = c.front();
        const double target = std::abs(v - 0.2) < std::abs(v - 0.9) ? 0.2 : 0.9;
        for (double x : c) CHECK(x == doctest::Approx(target).epsilon(1e-6));
    }
}

TEST_CASE("kmeans rejects bad inputs") {
    std::vector<Series> two = {Series(5, 0.0), Series(5, 1.0)};
    CHECK_THROWS_AS(kmeans_fit(two, 3, 1.0, 0), TooFewSeriesError);
    CHECK_THROWS_AS(kmeans_fit(two, 1, 1.0, 0), KTooSmallError);
    std::vector<Series> uneven = {Series(5, 0.0), Series(4, 1.0)};
    CHECK_THROWS_AS(kmeans_fit(uneven, 2, 1.0, 0), LengthMismatchError);
}

TEST_CASE("intra score of a perfect clustering is 1") {
    KMeansModel model;
    model.k = 2;
    model.centroids = {Series(6, 0.1), Series(6, 0.7)};
    model.gamma = 1.0;
    std::vector<Series> series = {Series(6, 0.1), Series(6, 0.7), Series(6, 0.1)};
    std::vector<int> assignment = {0, 1, 0};
    CHECK(intra_cluster_score(model, series, assignment) == doctest::Approx(1.0));
}

TEST_CASE("intra score with every member at DTW = ln 2 is 2") {
    // singleton series at scalar distance sqrt(ln 2) from the centroid value
    const double d = std::sqrt(std::log(2.0));
    KMeansModel model;
    model.k = 2;
    model.centroids = {Series{0.0}, Series{10.0}};
    std::vector<Series> series = {Series{d}, Series{10.0 + d}, Series{-d}, Series{10.0 - d}};
    std::vector<int> assignment = {0, 1, 0, 1};
    CHECK(intra_cluster_score(model, series, assignment) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("intra score matches naive direct summation") {
    Rng rng(31);
    KMeansModel model;
    model.k = 3;
    for (int j = 0; j < 3; ++j) model.centroids.push_back(oracles::random_series(rng, 8));
    std::vector<Series> series;
    std::vector<int> assignment;
    for (int i = 0; i < 17; ++i) {
        series.push_back(oracles::random_series(rng, 8));
        assignment.push_back(static_cast<int>(rng.next_below(3)));
    }
    // naive: dataset-wide mean of exp(DTW(centroid, sample))
    double acc = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i)
        acc += std::exp(metrics::dtw(model.centroids[static_cast<std::size_t>(assignment[i])], series[i]));
    const double naive = acc / static_cast<double>(series.size());
    CHECK(std::abs(intra_cluster_score(model, series, assignment) - naive) < 1e-12);
}

TEST_CASE("inter score hand values") {
    auto constant_model = [](std::vector<double> levels) {
        KMeansModel m;
        m.k = static_cast<int>(levels.size());
        for (double v : levels) m.centroids.push_back(Series(10, v));
        return m;
    };
    // all mutually distant: score 1
    CHECK(inter_centroid_score(constant_model({0.0, 2.0, 4.0}), 0.4) == doctest::Approx(1.0));
    // k=3, exactly one similar pair: (3 - 1) / 3
    CHECK(inter_centroid_score(constant_model({0.0, 0.1, 4.0}), 0.4) == doctest::Approx(2.0 / 3.0));
    // k=4, three similar pairs (one tight triple): (6 - 9) / 6
    CHECK(inter_centroid_score(constant_model({0.0, 0.01, 0.02, 4.0}), 0.4) == doctest::Approx(-0.5));
    KMeansModel one;
    one.k = 1;
    one.centroids = {Series(10, 0.0)};
    CHECK_THROWS_AS(inter_centroid_score(one, 0.4), KTooSmallError);
}

TEST_CASE("inter score weakly decreases as lambda grows") {
    Rng rng(13);
    KMeansModel m;
    m.k = 5;
    for (int j = 0; j < 5; ++j) m.centroids.push_back(oracles::random_series(rng, 10, 0, 2));
    double prev = 1.0;
    for (double lambda : {0.05, 0.2, 0.8, 2.0, 8.0}) {
        const double s = inter_centroid_score(m, lambda);
        CHECK(s <= prev + 1e-12);
        prev = s;
    }
}

TEST_CASE("sweep_k selects the planted k") {
    Planted data = planted_three_patterns(30, 20, 0.05, 321);
    SweepResult res = sweep_k(data.series, {2, 3, 4, 5}, 1.0, 42, kDefaultLambda);
    CHECK(res.best.model.k == 3);
    CHECK(oracles::adjusted_rand_index(res.best.assignment, data.labels) >= 0.95);
    REQUIRE(res.scores.size() == 4);
    // score table is self-consistent: goodness = inter / intra
    for (const ClusterScores& s : res.scores) {
        CHECK(s.goodness == doctest::Approx(s.inter / s.intra));
        CHECK(s.intra >= 1.0);
    }
}

TEST_CASE("sweep over a single repeated pattern maximizes at the smallest k") {
    Rng rng(17);
    std::vector<Series> series;
    for (int i = 0; i < 24; ++i) {
        Series s = pattern_constant(20, 0.4);
        for (double& v : s) v += rng.normal(0.0, 0.02);
        series.push_back(std::move(s));
    }
    SweepResult res = sweep_k(series, {2, 3, 4, 5}, 1.0, 11, kDefaultLambda);
    // no pattern structure: every model has similar centroids, all inter scores
    // are penalized, and ties resolve toward the smallest k
    CHECK(res.best.model.k == 2);
    // direct recomputation of the table
    for (std::size_t i = 0; i < res.scores.size(); ++i) {
        KMeansFit fit = kmeans_fit(series, res.scores[i].k, 1.0, 11);
        CHECK(intra_cluster_score(fit.model, series, fit.assignment) ==
              doctest::Approx(res.scores[i].intra));
        CHECK(inter_centroid_score(fit.model, kDefaultLambda) == doctest::Approx(res.scores[i].inter));
    }
}

TEST_CASE("sweep with a singleton k range returns that model") {
    Planted data = planted_three_patterns(20, 5, 0.05, 55);
    SweepResult res = sweep_k(data.series, {2}, 1.0, 1, kDefaultLambda);
    CHECK(res.best.model.k == 2);
    CHECK(res.scores.size() == 1);
}

TEST_CASE("sweep validates k range") {
    std::vector<Series> series(6, Series(10, 0.0));
    CHECK_THROWS_AS(sweep_k(series, {2, 7}, 1.0, 0, 0.4), TooFewSeriesError);
}

TEST_CASE("predict_cluster returns the exact centroid index") {
    Rng rng(23);
    KMeansModel model;
    model.k = 5;
    model.gamma = 1.0;
    for (int j = 0; j < 5; ++j) model.centroids.push_back(oracles::random_series(rng, 10, 2 * j, 2 * j + 1));
    CHECK(predict_cluster(model, model.centroids[2]) == 2);
    CHECK(predict_cluster(model, model.centroids[4]) == 4);
}

TEST_CASE("predict_cluster tie breaks toward the lowest index") {
    KMeansModel model;
    model.k = 2;
    model.gamma = 1.0;
    model.centroids = {Series(8, -1.0), Series(8, 1.0)};
    CHECK(predict_cluster(model, Series(8, 0.0)) == 0);
}

TEST_CASE("predict_cluster validates length") {
    KMeansModel model;
    model.k = 2;
    model.gamma = 1.0;
    model.centroids = {Series(8, 0.0), Series(8, 1.0)};
    CHECK_THROWS_AS(predict_cluster(model, Series(7, 0.0)), LengthMismatchError);
}

TEST_CASE("training series map to their fitted assignment") {
    Planted data = planted_three_patterns(25, 10, 0.05, 67);
    KMeansFit fit = kmeans_fit(data.series, 3, 1.0, 19);
    for (std::size_t i = 0; i < data.series.size(); ++i)
        CHECK(predict_cluster(fit.model, data.series[i]) == fit.assignment[i]);
}

TEST_CASE("prediction is stable under query batch shuffling") {
    Planted data = planted_three_patterns(20, 8, 0.05, 3);
    KMeansFit fit = kmeans_fit(data.series, 3, 1.0, 2);
    std::vector<int> forward;
    for (const Series& s : data.series) forward.push_back(predict_cluster(fit.model, s));
    for (std::size_t i = data.series.size(); i-- > 0;)
        CHECK(predict_cluster(fit.model, data.series[i]) == forward[i]);
}

TEST_CASE("same seed reproduces centroids bit-for-bit") {
    Planted data = planted_three_patterns(25, 10, 0.05, 13);
    KMeansFit a = kmeans_fit(data.series, 3, 1.0, 1001);
    KMeansFit b = kmeans_fit(data.series, 3, 1.0, 1001);
    REQUIRE(a.model.centroids.size() == b.model.centroids.size());
    for (std::size_t j = 0; j < a.model.centroids.size(); ++j)
        CHECK(a.model.centroids[j] == b.model.centroids[j]);
    CHECK(a.assignment == b.assignment);
}

TEST_CASE("model JSON round trip") {
    testutil::TempDir dir;
    Planted data = planted_three_patterns(15, 6, 0.05, 29);
    KMeansFit fit = kmeans_fit(data.series, 3, 0.8, 501);
    fit.model.variable = Channel::Pressure;
    const auto path = dir.path / "model_p.json";
    save_model(fit.model, 0.4, path);
    double lambda = 0.0;
    KMeansModel back = load_model(path, &lambda);
    CHECK(lambda == 0.4);
    CHECK(back.variable == Channel::Pressure);
    CHECK(back.k == fit.model.k);
    CHECK(back.gamma == fit.model.gamma);
    CHECK(back.seed == fit.model.seed);
    CHECK(back.counts == fit.model.counts);
    for (std::size_t j = 0; j < back.centroids.size(); ++j)
        CHECK(back.centroids[j] == fit.model.centroids[j]);
}
