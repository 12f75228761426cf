#include "affect/error.hpp"
#include "affect/metrics.hpp"
#include "affect/model.hpp"
#include "oracle/finite_difference.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

#include <cstring>
#include <random>

using namespace affect;
using namespace affect::model;

namespace {

ModelConfig tiny(int input_dim) {
    ModelConfig c;
    c.input_dim = input_dim;
    c.hidden_sizes = {4, 3};
    return c;
}

Eigen::MatrixXd random_inputs(Eigen::Index t, Eigen::Index d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::MatrixXd x(t, d);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
    return x;
}

// Sequences whose target is a lagged sum of the inputs.
std::vector<Sequence> toy_sequences(int count, int steps, std::uint64_t seed) {
    std::vector<Sequence> out;
    for (int s = 0; s < count; ++s) {
        Sequence q{random_inputs(steps, 2, seed + s), {}};
        for (int t = 0; t < steps; ++t) q.targets.push_back(0.5 * q.inputs(std::max(0, t - 2), 0) - 0.3 * q.inputs(t, 1));
        out.push_back(std::move(q));
    }
    return out;
}

// Same network with the two directions exchanged in every layer.
ModelParameters swap_directions(const ModelParameters& p) {
    ModelParameters q = p;
    const Layout layout(p.config);
    for (std::size_t l = 0; l < layout.layers(); ++l) {
        const auto f = layout.block(p.weights, l, Direction::Forward);
        const auto b = layout.block(p.weights, l, Direction::Backward);
        auto qf = layout.block(q.weights, l, Direction::Forward);
        auto qb = layout.block(q.weights, l, Direction::Backward);
        auto copy = [&](LstmBlock& dst, const ConstLstmBlock& src) {
            dst.recurrent_weights = src.recurrent_weights;
            dst.bias = src.bias;
            if (l == 0) {
                dst.input_weights = src.input_weights;
                return;
            }
            // Inputs from the layer below arrive as [forward; backward].
            const Eigen::Index h = layout.hidden(l - 1);
            dst.input_weights.leftCols(h) = src.input_weights.rightCols(h);
            dst.input_weights.rightCols(h) = src.input_weights.leftCols(h);
        };
        copy(qf, b);
        copy(qb, f);
    }
    const Eigen::Index h = layout.hidden(layout.layers() - 1);
    const auto o = static_cast<Eigen::Index>(layout.output_offset());
    q.weights.segment(o, h) = p.weights.segment(o + h, h);
    q.weights.segment(o + h, h) = p.weights.segment(o, h);
    return q;
}

}  // namespace

TEST_CASE("init is deterministic and seed dependent") {
    const auto c = tiny(5);
    const auto a = init(c);
    const auto b = init(c);
    REQUIRE(a.weights.size() == b.weights.size());
    CHECK(std::memcmp(a.weights.data(), b.weights.data(), sizeof(double) * a.weights.size()) == 0);
    CHECK(a.weights.cwiseAbs().maxCoeff() < 0.1);
    auto other = c;
    other.seed = 42;
    CHECK(init(other).weights != a.weights);

    const Layout layout(c);
    const auto block = layout.block(a.weights, 0, Direction::Forward);
    CHECK(block.input_weights.rows() == 16);
    CHECK(block.input_weights.cols() == 5);
    CHECK(layout.block(a.weights, 1, Direction::Backward).input_weights.cols() == 8);
    CHECK(layout.size() == static_cast<std::size_t>(2 * (16 * 5 + 16 * 4 + 16) + 2 * (12 * 8 + 12 * 3 + 12) + 7));
}

TEST_CASE("forward boundaries") {
    auto p = init(tiny(3));
    p.weights.setZero();
    for (double y : forward(p, random_inputs(10, 3, 1))) CHECK(y == 0.0);

    const auto q = init(tiny(3));
    const auto single = forward(q, random_inputs(1, 3, 2));
    CHECK(single.size() == 1);
    CHECK(std::isfinite(single[0]));
    CHECK_THROWS_AS(forward(q, random_inputs(4, 2, 3)), Error);
}

TEST_CASE("direction swap reverses the output sequence") {
    auto c = tiny(2);
    c.init_range = 0.5;
    const auto p = init(c);
    const auto q = swap_directions(p);
    const auto x = random_inputs(9, 2, 4);
    const Eigen::MatrixXd rx = x.colwise().reverse();
    const auto y = forward(p, x);
    const auto ry = forward(q, rx);
    for (std::size_t t = 0; t < y.size(); ++t) CHECK(ry[y.size() - 1 - t] == doctest::Approx(y[t]).epsilon(1e-12));

    // Palindromic input: the swapped net gives the mirrored prediction on the same input.
    Eigen::MatrixXd pal(7, 2);
    for (int t = 0; t < 7; ++t) pal.row(t) = x.row(std::min(t, 6 - t));
    const auto yp = forward(p, pal);
    const auto qp = forward(q, pal);
    for (std::size_t t = 0; t < yp.size(); ++t) CHECK(qp[yp.size() - 1 - t] == doctest::Approx(yp[t]).epsilon(1e-12));
}

TEST_CASE("gradient matches central differences") {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const auto g = oracle::random_gradient_case(seed);
        INFO("seed " << seed);
        CHECK(oracle::max_relative_error(g) <= 1e-4);
    }
}

TEST_CASE("gradient of the reference tiny net") {
    oracle::GradientCase g{init(tiny(3)), random_inputs(10, 3, 77), {}};
    std::mt19937_64 rng(78);
    std::normal_distribution<double> n;
    for (int t = 0; t < 10; ++t) g.targets.push_back(n(rng));
    CHECK(oracle::max_relative_error(g) <= 1e-4);
}

TEST_CASE("gradient vanishes when predictions equal targets") {
    const auto p = init(tiny(2));
    const auto x = random_inputs(6, 2, 5);
    const auto y = forward(p, x);
    const auto lg = gradient(p, x, y);
    CHECK(lg.loss == 0.0);
    CHECK(lg.gradient.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("early stopping contract") {
    EarlyStopping improving(100, 10);
    int last = 0;
    for (int e = 1; e <= 100; ++e) {
        last = e;
        if (improving.update(e, 1000.0 - e)) break;
    }
    CHECK(last == 100);
    CHECK(improving.reason() == StopReason::MaxEpochs);
    CHECK(improving.best_epoch() == 100);

    EarlyStopping plateau(100, 10);
    const std::vector<double> losses{5, 4, 3, 3, 3.5, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4};
    int stop = 0;
    for (int e = 1; e <= static_cast<int>(losses.size()); ++e) {
        if (plateau.update(e, losses[e - 1])) {
            stop = e;
            break;
        }
    }
    CHECK(stop == 13);
    CHECK(plateau.best_epoch() == 3);
    CHECK(plateau.reason() == StopReason::EarlyStop);
}

TEST_CASE("training returns the best-validation parameters and is deterministic") {
    ModelConfig c;
    c.input_dim = 2;
    c.hidden_sizes = {6, 4};
    c.learning_rate = 1e-3;
    c.max_epochs = 12;
    c.patience = 4;
    const auto train_set = toy_sequences(4, 60, 10);
    const auto val_set = toy_sequences(2, 60, 20);
    const auto a = train(c, train_set, val_set);
    const auto b = train(c, train_set, val_set);
    CHECK(a.log.train_sse == b.log.train_sse);
    CHECK(a.log.validation_sse == b.log.validation_sse);
    CHECK(a.params.weights == b.params.weights);

    const auto& v = a.log.validation_sse;
    const auto best = std::min_element(v.begin(), v.end()) - v.begin();
    CHECK(a.log.best_epoch == best + 1);
    double sse = 0;
    for (const auto& s : val_set) sse += metrics::sse(forward(a.params, s.inputs), s.targets);
    CHECK(sse == v[static_cast<std::size_t>(best)]);
    CHECK(v.back() < v.front() * 1.5);
    CHECK(a.log.validation_sse[static_cast<std::size_t>(best)] < a.log.validation_sse.front() + 1e-12);

    auto fragmented = c;
    fragmented.truncate_frames = 25;
    CHECK(train(fragmented, train_set, val_set).log.train_sse != a.log.train_sse);
}

TEST_CASE("training learns a simple mapping") {
    ModelConfig c;
    c.input_dim = 2;
    c.hidden_sizes = {8, 6};
    c.learning_rate = 2e-3;
    c.max_epochs = 40;
    c.patience = 10;
    c.noise_std = 0.0;
    c.truncate_frames = 50;
    const auto train_set = toy_sequences(6, 200, 30);
    const auto val_set = toy_sequences(2, 200, 40);
    const auto r = train(c, train_set, val_set);
    std::vector<double> pred, truth;
    for (const auto& s : val_set) {
        const auto y = forward(r.params, s.inputs);
        pred.insert(pred.end(), y.begin(), y.end());
        truth.insert(truth.end(), s.targets.begin(), s.targets.end());
    }
    CHECK(metrics::ccc(pred, truth) > 0.8);
}

TEST_CASE("predict maps zero output to the target mean; artifacts round trip") {
    auto p = init(tiny(2));
    p.weights.setZero();
    Standardizer s;
    s.feature_mean = Eigen::Vector2d(1.0, 2.0);
    s.feature_std = Eigen::Vector2d(0.5, 3.0);
    s.degenerate = {false, false};
    s.target_mean = 0.25;
    s.target_std = 0.4;
    CHECK_THROWS_AS(predict(p, random_inputs(3, 2, 1)), Error);
    p.standardizer = s;
    for (double y : predict(p, random_inputs(5, 2, 1))) CHECK(y == doctest::Approx(0.25).epsilon(1e-15));

    TempDir dir;
    auto q = init(tiny(2));
    q.standardizer = s;
    q.feature_names = {"a", "b"};
    save(dir / "m.json", q);
    const auto back = load(dir / "m.json");
    CHECK(back.weights == q.weights);
    CHECK(back.feature_names == q.feature_names);
    CHECK(back.config.hidden_sizes == q.config.hidden_sizes);
    const auto x = random_inputs(7, 2, 9);
    CHECK(predict(back, x) == predict(q, x));
}
