#include "affect/error.hpp"
#include "affect/metrics.hpp"

#include <doctest.h>

#include <random>

using namespace affect;
using V = std::vector<double>;

namespace {

// Direct evaluation of the concordance formula with long double moments.
double reference_ccc(const V& x, const V& y) {
    long double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    long double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    sxx /= x.size();
    syy /= x.size();
    sxy /= x.size();
    return static_cast<double>(2 * sxy / (sxx + syy + (mx - my) * (mx - my)));
}

}  // namespace

TEST_CASE("ccc golden values") {
    CHECK(metrics::ccc(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(8.0 / 22.0).epsilon(1e-13));
    const V x{0.3, -1.2, 4.0, 2.2};
    CHECK(metrics::ccc(x, x) == 1.0);
    CHECK(metrics::ccc(V{5, 5, 5}, V{1, 2, 3}) == 0.0);
    CHECK(metrics::ccc(V{2, 2}, V{2, 2}) == 1.0);
    CHECK_THROWS_AS(metrics::ccc(V{1, 2}, V{1}), Error);
    CHECK_THROWS_AS(metrics::ccc(V{1}, V{1}), Error);
}

TEST_CASE("ccc agrees with the reference and bounds") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 200; ++trial) {
        V x(50), y(50);
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = g(rng);
            y[i] = 0.5 * x[i] + g(rng) + 0.3;
        }
        const double c = metrics::ccc(x, y);
        CHECK(c == doctest::Approx(reference_ccc(x, y)).epsilon(1e-12));
        const auto e = metrics::evaluate(x, y);
        CHECK(std::abs(e.ccc) <= std::abs(e.pearson_r) + 1e-12);
        CHECK(e.n == 50);
    }
}

TEST_CASE("sse and pearson") {
    CHECK(metrics::sse(V{0, 0}, V{1, 2}) == 5.0);
    CHECK(metrics::sse(V{1, 2}, V{1, 2}) == 0.0);
    CHECK(metrics::sse(V{0, 0}, V{3, 6}) == doctest::Approx(9.0 * 5.0));
    CHECK(metrics::pearson(V{1, 2, 3}, V{3, 5, 7}) == doctest::Approx(1.0));
    CHECK(metrics::pearson(V{1, 2, 3}, V{-1, -2, -3}) == doctest::Approx(-1.0));
    CHECK(metrics::pearson(V{1, 2, 3}, V{2, 4, 6}) == doctest::Approx(1.0));
    CHECK(metrics::ccc(V{1, 2, 3}, V{2, 4, 6}) < 1.0);
    CHECK_THROWS_AS(metrics::pearson(V{1, 1, 1}, V{1, 2, 3}), Error);
}

TEST_CASE("partition pooling") {
    const std::vector<V> preds{{1, 2, 3}, {0, 1}};
    const std::vector<V> truths{{1, 2, 3}, {1, 0}};
    const double joined = metrics::ccc(V{1, 2, 3, 0, 1}, V{1, 2, 3, 1, 0});
    CHECK(metrics::partition_ccc(preds, truths) == doctest::Approx(joined));
    CHECK(metrics::partition_ccc(preds, truths, metrics::Pooling::MeanOfSubjects) ==
          doctest::Approx((1.0 + metrics::ccc(V{0, 1}, V{1, 0})) / 2));
}
