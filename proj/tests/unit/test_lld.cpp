#include "affect/error.hpp"
#include "affect/lld.hpp"

#include <doctest.h>

using namespace affect;

namespace {

RecordingSeries series_of(std::vector<std::pair<std::string, std::vector<double>>> channels) {
    RecordingSeries s;
    s.subject_id = "S";
    for (auto& [name, v] : channels) {
        const bool binary = name == "blink";
        s.add_channel({name, binary ? ChannelKind::Binary : ChannelKind::Continuous, ""}, v);
    }
    return s;
}

using V = std::vector<double>;

}  // namespace

TEST_CASE("deltas") {
    const auto s = series_of({{"pupil_diameter", {5.0, 5.0, 7.5}}, {"flat", {2, 2, 2}}, {"blink", {0, 1, 0}}});
    const std::vector<std::string> names{"pupil_diameter", "flat"};
    const auto d = compute_deltas(s, names);
    REQUIRE(d.deltas.size() == 2);
    CHECK(d.deltas[0].name == "pupil_diameter_delta");
    CHECK(d.deltas[0].values == V{0.0, 0.0, 2.5});
    CHECK(d.deltas[1].values == V{0, 0, 0});

    const std::vector<std::string> bad{"blink"};
    CHECK_THROWS_AS(compute_deltas(s, bad), Error);
    try {
        compute_deltas(s, bad);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::BinaryChannelNotAllowed);
    }
}

TEST_CASE("pupil events") {
    const V p{3.0, 3.1, 3.05};
    const auto e = pupil_events(p);
    CHECK(e.dilation == V{0, 1, 0});
    CHECK(e.constriction == V{0, 0, 1});

    const auto flat = pupil_events(V{4, 4, 4, 4});
    CHECK(flat.dilation == V{0, 0, 0, 0});
    CHECK(flat.constriction == V{0, 0, 0, 0});

    const auto up = pupil_events(V{1, 2, 3, 4});
    CHECK(up.dilation == V{0, 1, 1, 1});
    CHECK(up.constriction == V{0, 0, 0, 0});
}

TEST_CASE("gaze events") {
    const V still{0.1, 0.1, 0.1};
    const V dist{900, 880, 880};
    const auto e = gaze_events(still, still, dist, 0.02);
    CHECK(e.fixation == V{0, 1, 1});
    CHECK(e.approach == V{0, 1, 0});

    const V x{0.0, 0.05, 0.05};
    const V y{0.0, 0.0, 0.0};
    const auto moving = gaze_events(x, y, dist, 0.02);
    CHECK(moving.fixation[1] == 0.0);
    CHECK(moving.fixation[2] == 1.0);
}

TEST_CASE("direct gaze attachment") {
    const auto s = series_of({{"gaze_x", {0, 0, 0}}});
    const auto with = attach_direct_gaze(s, V{1, 1, 0});
    CHECK(with.has_channel("direct_gaze"));
    CHECK(with.spec("direct_gaze").kind == ChannelKind::Binary);

    auto code = [&](const V& a) {
        try {
            attach_direct_gaze(s, a);
        } catch (const Error& e) {
            return e.code();
        }
        return Errc::InvalidArgument;
    };
    CHECK(code(V{1, 0}) == Errc::LengthMismatch);
    CHECK(code(V{1, 0.5, 0}) == Errc::NonBinaryValue);
}

TEST_CASE("derived channels start at zero and keep the length") {
    V p, gx, gy, gd;
    for (int i = 0; i < 50; ++i) {
        p.push_back(3 + 0.1 * ((i * 7) % 5));
        gx.push_back(0.01 * ((i * 3) % 4));
        gy.push_back(0.0);
        gd.push_back(800 - (i % 3));
    }
    const auto pe = pupil_events(p);
    const auto ge = gaze_events(gx, gy, gd);
    for (const auto* v : {&pe.dilation, &pe.constriction, &ge.fixation, &ge.approach}) {
        CHECK(v->size() == 50);
        CHECK(v->front() == 0.0);
        for (double b : *v) CHECK((b == 0.0 || b == 1.0));
    }
    const auto s = series_of({{"pupil_diameter", p}});
    DerivedChannelSet d;
    d.events.push_back({"pupil_dilation", pe.dilation});
    const auto joined = with_derived(s, d);
    CHECK(joined.spec("pupil_dilation").kind == ChannelKind::Binary);
    CHECK(joined.frames() == 50);
}
