#include "affect/error.hpp"
#include "affect/functionals.hpp"
#include "oracle/naive_functionals.hpp"
#include "temp_dir.hpp"

#include <doctest.h>

#include <random>

using namespace affect;

namespace {

enum F { Min, Max, Mean, Median, Q1, Q3, Skew, Kurt, Std, Iqr, IqrLo, IqrHi, Slope, Intercept, Rms, Zcr };

RecordingSeries series(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    RecordingSeries s;
    s.subject_id = "S";
    s.frame_rate = 25;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = std::sin(0.05 * i) + 0.1 * g(rng);
        b[i] = (i / 13) % 3 == 0 ? 1.0 : 0.0;
    }
    s.add_channel({"head_yaw", ChannelKind::Continuous, ""}, a);
    s.add_channel({"blink", ChannelKind::Binary, ""}, b);
    return s;
}

}  // namespace

TEST_CASE("constant window uses the degenerate conventions") {
    const std::vector<double> w{2, 2, 2, 2};
    const auto f = continuous_functionals(w, 25);
    CHECK(f[Min] == 2);
    CHECK(f[Max] == 2);
    CHECK(f[Mean] == 2);
    CHECK(f[Median] == 2);
    CHECK(f[Rms] == 2);
    CHECK(f[Std] == 0);
    CHECK(f[Slope] == 0);
    CHECK(f[Zcr] == 0);
    CHECK(f[Skew] == 0);
    CHECK(f[Kurt] == 0);
    CHECK(f[Intercept] == 2);
}

TEST_CASE("hand-evaluated continuous functionals") {
    const auto f = continuous_functionals(std::vector<double>{1, 2, 3}, 25);
    CHECK(f[Mean] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(f[Std] == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-14));
    CHECK(f[Slope] == doctest::Approx(25.0).epsilon(1e-12));
    CHECK(f[Intercept] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f[Q1] == 1.5);
    CHECK(f[Q3] == 2.5);

    const auto z = continuous_functionals(std::vector<double>{1, -1, 1, -1}, 25);
    CHECK(z[Zcr] == 1.0);
}

TEST_CASE("binary functionals") {
    const auto f = binary_functionals(std::vector<double>{1, 1, 0, 1}, 25);
    CHECK(f[0] == 0.75);
    CHECK(f[1] == doctest::Approx(0.04));
    CHECK(f[2] == doctest::Approx(0.06));
    CHECK(f[3] == doctest::Approx(0.08));
    CHECK(f[4] == doctest::Approx(0.12));

    const auto zero = binary_functionals(std::vector<double>(10, 0.0), 25);
    for (double v : zero) CHECK(v == 0.0);

    const auto ones = binary_functionals(std::vector<double>(100, 1.0), 25);
    CHECK(ones[0] == 1.0);
    CHECK(ones[4] == doctest::Approx(4.0));
    CHECK(ones[3] == doctest::Approx(4.0));

    CHECK_THROWS_AS(binary_functionals(std::vector<double>{0, 0.5}, 25), Error);
    CHECK_THROWS_AS(continuous_functionals(std::vector<double>{1}, 25), Error);
}

TEST_CASE("functionals agree with the naive oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> len(2, 300);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = len(rng);
        const double scale = std::pow(10.0, 3 * u(rng));
        const double offset = 100 * u(rng);
        std::vector<double> x(n), b(n);
        for (int i = 0; i < n; ++i) {
            x[i] = offset + scale * (u(rng) + 0.3 * std::sin(0.2 * i));
            b[i] = u(rng) > 0.2 ? 1.0 : 0.0;
        }
        const auto got = continuous_functionals(x, 25);
        const auto want = oracle::continuous(x, 25);
        for (int k = 0; k < 16; ++k) {
            INFO("trial " << trial << " functional " << k);
            CHECK(std::abs(got[k] - want[k]) <= 1e-9 * std::max(1.0, std::abs(want[k])));
        }
        const auto gb = binary_functionals(b, 25);
        const auto wb = oracle::binary(b, 25);
        for (int k = 0; k < 5; ++k) CHECK(std::abs(gb[k] - wb[k]) <= 1e-12);
    }
}

TEST_CASE("feature matrix shape") {
    const auto s = series(7500, 1);
    const WindowPlan plan{4.0, 25, 1};
    CHECK(plan.window_frames() == 100);

    const std::vector<std::string> only{"head_yaw"};
    const auto m = extract_features(s, plan, WaveletOptions{false, 10}, only);
    CHECK(m.rows() == 7401);
    CHECK(m.cols() == 32);
    CHECK(m.end_frame(0) == 99);
    CHECK(m.columns[0].name == "head_yaw.static.min");
    CHECK(m.columns[16].name == "head_yaw.dynamic.min");

    const auto with_wavelets = extract_features(s, plan, WaveletOptions{}, only);
    CHECK(with_wavelets.cols() == 32 + 3 * 5);
    CHECK(with_wavelets.columns.back().name == "head_yaw.wavelet.a2_rms");

    const auto all = extract_features(s, WindowPlan{8.0, 25, 1}, WaveletOptions{});
    CHECK(all.cols() == 32 + 4 * 5 + 5);
    CHECK(all.columns.back().name == "blink.static.time_total");
}

TEST_CASE("window boundary and errors") {
    const auto s = series(100, 2);
    const std::vector<std::string> only{"head_yaw"};
    CHECK(extract_features(s, WindowPlan{4.0, 25, 1}, WaveletOptions{}, only).rows() == 1);
    CHECK_THROWS_AS(extract_features(s, WindowPlan{8.0, 25, 1}, WaveletOptions{}, only), Error);
    CHECK_THROWS_AS(WindowPlan(WindowPlan{0.03, 25, 1}).window_frames(), Error);
}

TEST_CASE("rows match functionals of the corresponding window") {
    const auto s = series(300, 3);
    const std::vector<std::string> only{"head_yaw"};
    const WindowPlan plan{2.0, 25, 1};
    const auto m = extract_features(s, plan, WaveletOptions{}, only);
    const auto x = s.channel("head_yaw");
    for (std::size_t r : {std::size_t{0}, std::size_t{17}, m.rows() - 1}) {
        const std::vector<double> w(x.begin() + r, x.begin() + r + 50);
        std::vector<double> d;
        for (std::size_t i = 1; i < w.size(); ++i) d.push_back(w[i] - w[i - 1]);
        const auto st = oracle::continuous(w, 25);
        const auto dy = oracle::continuous(d, 25);
        for (int k = 0; k < 16; ++k) {
            CHECK(m.values(r, k) == doctest::Approx(st[k]).epsilon(1e-9));
            CHECK(m.values(r, 16 + k) == doctest::Approx(dy[k]).epsilon(1e-9).scale(1.0));
        }
    }
}

TEST_CASE("feature csv round trip keeps provenance") {
    TempDir dir;
    const auto s = series(150, 4);
    const auto m = extract_features(s, WindowPlan{4.0, 25, 1}, WaveletOptions{});
    write_feature_csv(dir / "f.csv", m);
    const auto back = read_feature_csv(dir / "f.csv");
    CHECK(back.subject_id == "S");
    CHECK(back.plan.window_seconds == 4.0);
    REQUIRE(back.columns.size() == m.columns.size());
    CHECK(back.columns[20].channel == "head_yaw");
    CHECK(back.columns[20].view == View::Dynamic);
    CHECK(back.values == m.values);
}
