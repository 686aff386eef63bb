#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "csp/metrics.hpp"
#include "csp/rng.hpp"
#include "oracles.hpp"

using namespace csp;
using namespace csp::metrics;

TEST_CASE("dtw trivial cases") {
    Series s{0.3, 1.2, -0.7, 0.0};
    CHECK(dtw(s, s) == doctest::Approx(0.0));
    CHECK(dtw(Series{0.0}, Series{2.0}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(dtw(Series{}, s), EmptySeriesError);
}

TEST_CASE("dtw equals brute-force path minimum on short series") {
    Rng rng(101);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + rng.next_below(4);
        const std::size_t n = 1 + rng.next_below(4);
        Series a = oracles::random_series(rng, m, -1.0, 1.0);
        Series b = oracles::random_series(rng, n, -1.0, 1.0);
        const double expect = oracles::dtw_brute_force(a, b);
        CHECK(dtw(a, b) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("dtw symmetry and non-negativity") {
    Rng rng(7);
    for (int rep = 0; rep < 100; ++rep) {
        Series a = oracles::random_series(rng, 1 + rng.next_below(12));
        Series b = oracles::random_series(rng, 1 + rng.next_below(12));
        const double ab = dtw(a, b);
        CHECK(ab >= 0.0);
        CHECK(ab == doctest::Approx(dtw(b, a)).epsilon(1e-15));
    }
}

TEST_CASE("soft_min examples") {
    CHECK(soft_min(std::vector<double>{3.0}, 1.0) == doctest::Approx(3.0));
    CHECK(soft_min(std::vector<double>{0.0, 0.0}, 1.0) == doctest::Approx(-std::log(2.0)));
    CHECK(soft_min(std::vector<double>{1.0, 5.0, 9.0}, 1e-4) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_THROWS_AS(soft_min(std::vector<double>{}, 1.0), EmptyListError);
}

TEST_CASE("soft_min lower-bounds the hard min and is monotone in gamma") {
    Rng rng(11);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> q;
        const std::size_t n = 2 + rng.next_below(6);
        for (std::size_t i = 0; i < n; ++i) q.push_back(rng.uniform(-5.0, 5.0));
        const double hard = *std::min_element(q.begin(), q.end());
        const double g1 = soft_min(q, 0.5);
        const double g2 = soft_min(q, 2.0);
        CHECK(g1 <= hard + 1e-15);
        CHECK(g2 <= g1 + 1e-15);  // larger gamma -> more negative
    }
    // overflow-prone regime: tiny gamma with large values must stay finite
    CHECK(std::isfinite(soft_min(std::vector<double>{1000.0, 1001.0}, 1e-6)));
}

TEST_CASE("soft_dtw singleton alignment") {
    Rng rng(3);
    for (double gamma : {0.1, 1.0, 10.0}) {
        const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
        CHECK(soft_dtw(Series{a}, Series{b}, gamma) == doctest::Approx((a - b) * (a - b)));
    }
}

TEST_CASE("soft_dtw equals brute-force soft-min over alignments") {
    Rng rng(41);
    for (int rep = 0; rep < 200; ++rep) {
        const std::size_t m = 1 + rng.next_below(4);
        const std::size_t n = 1 + rng.next_below(4);
        Series a = oracles::random_series(rng, m);
        Series b = oracles::random_series(rng, n);
        for (double gamma : {0.1, 1.0}) {
            const double expect = oracles::soft_dtw_brute_force(a, b, gamma);
            const double got = soft_dtw(a, b, gamma);
            CHECK(std::abs(got - expect) <= 1e-9 * (1.0 + std::abs(expect)));
        }
    }
}

TEST_CASE("soft_dtw converges to dtw as gamma -> 0") {
    Rng rng(57);
    for (int rep = 0; rep < 100; ++rep) {
        Series a = oracles::random_series(rng, 10);
        Series b = oracles::random_series(rng, 10);
        const double hard = dtw(a, b);
        const double soft = soft_dtw(a, b, 1e-3);
        CHECK(std::abs(soft - hard) < 1e-3 * (1.0 + hard));
    }
}

TEST_CASE("soft_dtw lower-bounds dtw for every gamma") {
    Rng rng(91);
    for (int rep = 0; rep < 100; ++rep) {
        Series a = oracles::random_series(rng, 1 + rng.next_below(10));
        Series b = oracles::random_series(rng, 1 + rng.next_below(10));
        const double hard = dtw(a, b);
        for (double gamma : {0.01, 0.1, 1.0, 10.0})
            CHECK(soft_dtw(a, b, gamma) <= hard + 1e-12);
    }
}

TEST_CASE("soft_dtw_grad singleton") {
    const double a = 1.7, b = -0.4;
    Series grad(1);
    const double v = soft_dtw_grad(Series{a}, Series{b}, 1.0, grad);
    CHECK(v == doctest::Approx((a - b) * (a - b)));
    CHECK(grad[0] == doctest::Approx(2.0 * (a - b)));
}

TEST_CASE("soft_dtw_grad matches central finite differences") {
    Rng rng(77);
    const double h = 1e-5;
    for (int rep = 0; rep < 30; ++rep) {
        Series a = oracles::random_series(rng, 10);
        Series b = oracles::random_series(rng, 10);
        for (double gamma : {0.1, 1.0, 10.0}) {
            Series grad(a.size());
            soft_dtw_grad(a, b, gamma, grad);
            for (std::size_t i = 0; i < a.size(); ++i) {
                const double fd = oracles::central_diff(
                    [&](const Series& x) { return soft_dtw(x, b, gamma); }, a, i, h);
                const double rel = std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-3);
                CHECK(rel < 1e-4);
            }
        }
    }
}

TEST_CASE("soft_dtw_grad on identical series at large gamma matches finite differences") {
    Rng rng(5);
    Series s = oracles::random_series(rng, 8);
    Series grad(s.size());
    soft_dtw_grad(s, s, 10.0, grad);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double fd = oracles::central_diff(
            [&](const Series& x) { return soft_dtw(x, s, 10.0); }, s, i, 1e-5);
        CHECK(std::abs(grad[i] - fd) / std::max(std::abs(fd), 1e-3) < 1e-4);
    }
}

TEST_CASE("workspace reuse is equivalent to fresh workspaces") {
    Rng rng(13);
    DpWorkspace ws;
    for (int rep = 0; rep < 20; ++rep) {
        Series a = oracles::random_series(rng, 1 + rng.next_below(15));
        Series b = oracles::random_series(rng, 1 + rng.next_below(15));
        CHECK(soft_dtw(a, b, 0.7, ws) == soft_dtw(a, b, 0.7));
        CHECK(dtw(a, b, ws) == dtw(a, b));
    }
}
