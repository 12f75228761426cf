#pragma once

// Central finite differences of the sequence SSE, computed only through
// the forward pass.

#include "affect/metrics.hpp"
#include "affect/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace oracle {

struct GradientCase {
    affect::model::ModelParameters params;
    Eigen::MatrixXd inputs;
    std::vector<double> targets;
};

inline GradientCase random_gradient_case(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    affect::model::ModelConfig c;
    c.input_dim = pick(1, 3);
    c.hidden_sizes.clear();
    const int layers = pick(1, 2);
    for (int l = 0; l < layers; ++l) c.hidden_sizes.push_back(pick(1, 3));
    c.init_range = 0.5;
    c.seed = seed * 7919 + 1;
    GradientCase g{affect::model::init(c), {}, {}};
    const int steps = pick(1, 6);
    std::normal_distribution<double> normal;
    g.inputs.resize(steps, c.input_dim);
    for (Eigen::Index i = 0; i < g.inputs.size(); ++i) g.inputs.data()[i] = normal(rng);
    for (int t = 0; t < steps; ++t) g.targets.push_back(normal(rng));
    return g;
}

inline double sequence_sse(const affect::model::ModelParameters& p, const Eigen::MatrixXd& x,
                           const std::vector<double>& y) {
    return affect::metrics::sse(affect::model::forward(p, x), y);
}

// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor).  With
// h = 1e-5 the differences resolve about 1e-10 absolute, so components below
// the floor are compared at floor * tolerance absolute.
inline double max_relative_error(const GradientCase& g, double h = 1e-5, double floor = 1e-5) {
    const auto analytic = affect::model::gradient(g.params, g.inputs, g.targets).gradient;
    auto p = g.params;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p.weights.size(); ++i) {
        const double keep = p.weights[i];
        p.weights[i] = keep + h;
        const double up = sequence_sse(p, g.inputs, g.targets);
        p.weights[i] = keep - h;
        const double down = sequence_sse(p, g.inputs, g.targets);
        p.weights[i] = keep;
        const double numeric = (up - down) / (2 * h);
        const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
        worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
    }
    return worst;
}

}  // namespace oracle
