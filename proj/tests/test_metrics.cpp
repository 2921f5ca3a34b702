#include "idelog/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace idelog;

namespace {

Trajectory wiggle() {
    return oracle::sample([](double t) { return Vec2{300 * std::sin(3 * t) + 40 * t, 120 * std::cos(5 * t)}; }, 0, 0.005, 400);
}

// Time-weighted RMS radius about the time-weighted mean, written with Simpson-free trapezoids.
double rms_radius(const Trajectory& tr) {
    const std::size_t n = tr.size();
    auto w = [&](std::size_t i) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; };
    double sw = 0, mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sw += w(i);
        mx += w(i) * tr.points[i].x;
        my += w(i) * tr.points[i].y;
    }
    mx /= sw;
    my /= sw;
    double e = 0;
    for (std::size_t i = 0; i < n; ++i) e += w(i) * (std::pow(tr.points[i].x - mx, 2) + std::pow(tr.points[i].y - my, 2));
    return std::sqrt(e / sw);
}

}  // namespace

TEST_CASE("trapezoid") {
    const std::vector<double> y{0, 1, 2, 3};
    CHECK(trapezoid(y, 0.5) == doctest::Approx(2.25));
    CHECK(trapezoid(std::vector<double>{5.0}, 1.0) == 0.0);
}

TEST_CASE("speed SNR") {
    SpeedProfile v{0, 0.005, {}};
    for (int i = 0; i < 200; ++i) v.values.push_back(100 * std::sin(kPi * i / 199.0) + 1);
    CHECK(snr_v(v, v) == kSnrCapDb);
    CHECK(snr_v(v, {0, 0.005, std::vector<double>(200, 0.0)}) == doctest::Approx(0.0).epsilon(1e-12));
    auto scaled = v;
    for (auto& x : scaled.values) x *= 0.9;
    CHECK(snr_v(v, scaled) == doctest::Approx(20.0).epsilon(1e-9));

    SUBCASE("joint amplitude scaling") {
        auto r = v;
        for (std::size_t i = 0; i < r.size(); ++i) r.values[i] += 3 * std::cos(i * 0.3);
        auto v7 = v, r7 = r;
        for (auto& x : v7.values) x *= 7;
        for (auto& x : r7.values) x *= 7;
        CHECK(snr_v(v7, r7) == doctest::Approx(snr_v(v, r)).epsilon(1e-12));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(snr_v(v, {0, 0.005, std::vector<double>(10, 0.0)}), InputError);
        CHECK_THROWS_AS(snr_v(v, {0, 0.01, std::vector<double>(200, 0.0)}), InputError);
        CHECK_THROWS_AS(snr_v({0, 0.005, std::vector<double>(200, 0.0)}, v), InputError);
    }
}

TEST_CASE("trajectory SNR") {
    const auto obs = wiggle();
    CHECK(snr_t(obs, obs) == kSnrCapDb);

    SUBCASE("constant offset of a tenth of the RMS radius") {
        auto rec = obs;
        const double r = rms_radius(obs);
        for (auto& p : rec.points) p += Vec2{0.06 * r, 0.08 * r};
        CHECK(snr_t(obs, rec) == doctest::Approx(20.0).epsilon(1e-9));
    }
    SUBCASE("reconstruction frozen at the centroid") {
        double sw = 0, mx = 0, my = 0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
            const double w = (i == 0 || i + 1 == obs.size()) ? 0.5 : 1.0;
            sw += w;
            mx += w * obs.points[i].x;
            my += w * obs.points[i].y;
        }
        auto rec = obs;
        for (auto& p : rec.points) p = {mx / sw, my / sw};
        CHECK(std::abs(snr_t(obs, rec)) < 1e-9);
    }
    SUBCASE("translation invariance of both measures") {
        auto rec = obs;
        for (std::size_t i = 0; i < rec.size(); ++i) rec.points[i] += Vec2{std::sin(i * 0.1) * 5, 2.0};
        auto obs2 = obs, rec2 = rec;
        for (auto& p : obs2.points) p += Vec2{1e4, -3e3};
        for (auto& p : rec2.points) p += Vec2{1e4, -3e3};
        CHECK(snr_t(obs2, rec2) == doctest::Approx(snr_t(obs, rec)).epsilon(1e-9));
        const auto so = speed_profile(obs), sr = speed_profile(rec);
        CHECK(snr_v(speed_profile(obs2), speed_profile(rec2)) == doctest::Approx(snr_v(so, sr)).epsilon(1e-9));
    }
    SUBCASE("noise ladder degrades monotonically") {
        std::mt19937 rng(3);
        std::normal_distribution<double> g(0, 1);
        std::vector<Vec2> pattern(obs.size());
        for (auto& p : pattern) p = {g(rng), g(rng)};
        const double r = rms_radius(obs);
        double prev = kSnrCapDb + 1;
        for (double level : {0.001, 0.01, 0.1}) {
            auto rec = obs;
            for (std::size_t i = 0; i < rec.size(); ++i) rec.points[i] += level * r * pattern[i];
            const double s = snr_t(obs, rec);
            CHECK(s < prev);
            prev = s;
        }
    }
    SUBCASE("errors") {
        Trajectory still{0, 0.005, std::vector<Vec2>(50, Vec2{2, 2}), {}};
        CHECK_THROWS_AS(snr_t(still, still), InputError);
        auto shorter = obs;
        shorter.points.pop_back();
        CHECK_THROWS_AS(snr_t(obs, shorter), InputError);
    }
}

TEST_CASE("reports") {
    const auto obs = wiggle();
    ReconstructedMovement rec;
    rec.trajectory = obs;
    for (auto& p : rec.trajectory.points) p += Vec2{1, 0};
    rec.speed = speed_profile(rec.trajectory);

    SigmaLognormalModel m;
    m.strokes.resize(5, LognormalStroke{1, 0, -1, 0.2, 0, 0});
    const auto r = make_report(m, obs, rec, true);
    CHECK(r.nb_log == 5);
    REQUIRE(r.snr_t_per_log);
    CHECK(*r.snr_t_per_log == r.snr_t / 5);
    CHECK(*r.snr_v_per_log == r.snr_v / 5);
    CHECK(r.compared_against_preprocessed);
    CHECK(r.snr_v_capped);  // a translated copy moves at the same speed
    CHECK_FALSE(r.snr_t_capped);

    m.strokes.resize(1);
    const auto one = make_report(m, obs, rec, false);
    CHECK(*one.snr_t_per_log == one.snr_t);

    m.strokes.clear();
    const auto none = make_report(m, obs, rec, false);
    CHECK(none.nb_log == 0);
    CHECK_FALSE(none.snr_t_per_log);
    CHECK_FALSE(none.snr_v_per_log);
}
