#include "idelog/lognormal_model.hpp"
#include "idelog/metrics.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace idelog;

namespace {

LognormalStroke stroke(double D, double t0, double mu, double sigma, double ts, double te) {
    return {D, t0, mu, sigma, ts, te};
}

SigmaLognormalModel single(const LognormalStroke& s, double T = 2.0) {
    SigmaLognormalModel m;
    m.strokes.push_back(s);
    m.duration = T;
    return m;
}

TimeGrid grid_for(double T, double rate = 200.0) {
    return {0.0, 1.0 / rate, static_cast<std::size_t>(std::llround(T * rate)) + 1};
}

SigmaLognormalModel random_model(std::mt19937& rng, int n) {
    std::uniform_real_distribution<double> D(50, 400), ang(-3, 3), sw(-2, 2), mu(-1.6, -1.0), sg(0.15, 0.35),
        gap(0.1, 0.3);
    SigmaLognormalModel m;
    m.origin = {10, -4};
    double t0 = 0.0;
    for (int j = 0; j < n; ++j) {
        const double ts = ang(rng);
        m.strokes.push_back(stroke(D(rng), t0, mu(rng), sg(rng), ts, ts + sw(rng)));
        t0 += gap(rng);
    }
    double end = 0.0;
    for (const auto& s : m.strokes) end = std::max(end, s.support_end());
    m.duration = end;
    return m;
}

}  // namespace

TEST_CASE("lognormal density") {
    CHECK(lognormal_pdf(0.3, 0.3, -1, 0.3) == 0.0);
    CHECK(lognormal_pdf(0.1, 0.3, -1, 0.3) == 0.0);

    SUBCASE("mode and peak for mu=0, sigma=1") {
        const double mode = std::exp(-1.0);
        const double peak = std::exp(0.5) / std::sqrt(2 * kPi);
        CHECK(lognormal_pdf(mode, 0, 0, 1) == doctest::Approx(peak).epsilon(1e-12));
        CHECK(peak == doctest::Approx(0.6577).epsilon(1e-4));
        CHECK(lognormal_pdf(mode * 0.99, 0, 0, 1) < peak);
        CHECK(lognormal_pdf(mode * 1.01, 0, 0, 1) < peak);
    }
    SUBCASE("unit area") {
        const double area = oracle::simpson([](double t) { return lognormal_pdf(t, 0.1, -1, 0.3); }, 0.1, 20.1, 400000);
        CHECK(area == doctest::Approx(1.0).epsilon(1e-4));
    }
    SUBCASE("matches the closed form") {
        for (double t : {0.05, 0.2, 0.37, 0.8, 1.5}) {
            CHECK(lognormal_pdf(t, 0.02, -1.3, 0.25) == doctest::Approx(oracle::lognormal(t, 0.02, -1.3, 0.25)).epsilon(1e-12));
        }
    }
    SUBCASE("cdf is the integral of the density") {
        for (double t : {0.1, 0.3, 0.5, 1.0}) {
            const double num = oracle::simpson([](double u) { return lognormal_pdf(u, 0.0, -1.2, 0.3); }, 0.0, t, 200000);
            CHECK(lognormal_cdf(t, 0.0, -1.2, 0.3) == doctest::Approx(num).epsilon(1e-7));
        }
    }
}

TEST_CASE("stroke angle") {
    const auto s = stroke(100, 0.1, -1.2, 0.3, 0.2, 1.4);
    CHECK(stroke_angle(s, 0.0) == 0.2);
    CHECK(stroke_angle(s, 0.1) == 0.2);
    CHECK(stroke_angle(s, 0.1 + std::exp(-1.2)) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(std::abs(stroke_angle(s, 0.1 + std::exp(-1.2 + 8 * 0.3)) - 1.4) < 1e-9);
    const auto flat = stroke(100, 0.0, -1.0, 0.3, 0.7, 0.7);
    for (double t : {0.0, 0.2, 0.5, 3.0}) CHECK(stroke_angle(flat, t) == 0.7);

    SUBCASE("monotone between the end angles") {
        for (const auto& st : {s, stroke(50, 0.0, -1.5, 0.2, 1.0, -2.0)}) {
            double prev = stroke_angle(st, 0.0);
            for (double t = 0.0; t < 3.0; t += 0.001) {
                const double a = stroke_angle(st, t);
                if (st.theta_e > st.theta_s) {
                    CHECK(a >= prev);
                    CHECK(a <= st.theta_e);
                } else {
                    CHECK(a <= prev);
                    CHECK(a >= st.theta_e);
                }
                prev = a;
            }
        }
    }
}

TEST_CASE("velocity synthesis") {
    SUBCASE("empty model") {
        SigmaLognormalModel m;
        m.duration = 1.0;
        for (const auto& v : synthesize_velocity(m, grid_for(1.0))) CHECK(v == Vec2{});
    }
    SUBCASE("horizontal stroke integrates to D") {
        const auto m = single(stroke(250, 0.0, -1.2, 0.3, 0, 0), 3.0);
        const auto g = grid_for(3.0, 1000.0);
        const auto v = synthesize_velocity(m, g);
        std::vector<double> mag(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) {
            CHECK(v[i].y == 0.0);
            mag[i] = norm(v[i]);
        }
        CHECK(trapezoid(mag, g.dt) == doctest::Approx(250).epsilon(1e-3));
    }
    SUBCASE("superposition of disjoint strokes") {
        const auto a = stroke(100, 0.0, -2.0, 0.2, 0.3, 1.2);
        const auto b = stroke(80, 0.6, -2.0, 0.2, -1.0, -0.2);
        SigmaLognormalModel both = single(a, 1.2);
        both.strokes.push_back(b);
        const auto g = grid_for(1.2);
        const auto va = synthesize_velocity(single(a, 1.2), g);
        const auto vb = synthesize_velocity(single(b, 1.2), g);
        const auto vab = synthesize_velocity(both, g);
        for (std::size_t i = 0; i < g.size; ++i) {
            CHECK(vab[i].x == doctest::Approx(va[i].x + vb[i].x).epsilon(1e-12));
            CHECK(vab[i].y == doctest::Approx(va[i].y + vb[i].y).epsilon(1e-12));
        }
    }
    SUBCASE("direction follows the stroke angle, magnitude is D times the density") {
        const auto s = stroke(120, 0.05, -1.4, 0.25, -0.5, 2.0);
        const auto g = grid_for(1.0);
        const auto v = synthesize_velocity(single(s, 1.0), g);
        for (std::size_t i = 0; i < g.size; ++i) {
            const double t = g.time(i);
            const double mag = 120 * oracle::lognormal(t, 0.05, -1.4, 0.25);
            if (t - 0.05 > std::exp(-1.4 + 5 * 0.25)) continue;  // truncated support
            CHECK(v[i].x == doctest::Approx(mag * std::cos(stroke_angle(s, t))).epsilon(1e-9));
            CHECK(v[i].y == doctest::Approx(mag * std::sin(stroke_angle(s, t))).epsilon(1e-9));
        }
    }
}

TEST_CASE("every stroke's speed integrates to its arc length") {
    std::mt19937 rng(21);
    const auto m = random_model(rng, 6);
    for (const auto& s : m.strokes) {
        const double area = oracle::simpson([&](double t) { return s.D * lognormal_pdf(t, s.t0, s.mu, s.sigma); }, s.t0,
                                            s.support_end(), 200000);
        CHECK(area == doctest::Approx(s.D).epsilon(1e-3));
    }
}

TEST_CASE("trajectory synthesis endpoints") {
    SUBCASE("quarter circle") {
        const auto m = single(stroke(kPi / 2, 0.0, -1.5, 0.2, 0, kPi / 2), 1.5);
        const auto r = synthesize_trajectory(m, grid_for(1.5));
        CHECK(std::abs(r.trajectory.points.back().x - 1.0) < 1e-3);
        CHECK(std::abs(r.trajectory.points.back().y - 1.0) < 1e-3);
    }
    SUBCASE("straight diagonal") {
        const auto m = single(stroke(std::sqrt(2.0), 0.0, -1.5, 0.2, kPi / 4, kPi / 4), 1.5);
        const auto r = synthesize_trajectory(m, grid_for(1.5));
        CHECK(std::abs(r.trajectory.points.back().x - 1.0) < 1e-3);
        CHECK(std::abs(r.trajectory.points.back().y - 1.0) < 1e-3);
    }
    SUBCASE("origin offset") {
        auto m = single(stroke(10, 0.0, -1.5, 0.2, 0, 0), 1.5);
        m.origin = {3, 4};
        const auto r = synthesize_trajectory(m, grid_for(1.5));
        CHECK(r.trajectory.points.front() == Vec2{3, 4});
        CHECK(r.trajectory.points.back().x == doctest::Approx(13).epsilon(1e-6));
    }
    SUBCASE("nearly straight stroke is continuous with the straight limit") {
        const auto a = synthesize_trajectory(single(stroke(100, 0, -1.5, 0.2, 0.3, 0.3), 1.0), grid_for(1.0));
        const auto b = synthesize_trajectory(single(stroke(100, 0, -1.5, 0.2, 0.3, 0.3 + 2e-6), 1.0), grid_for(1.0));
        for (std::size_t i = 0; i < a.trajectory.size(); ++i) CHECK(distance(a.trajectory.points[i], b.trajectory.points[i]) < 1e-3);
    }
}

TEST_CASE("a single arc stroke follows the numerically integrated tangent") {
    const auto s = stroke(200, 0.0, -1.3, 0.3, 0.4, -2.2);
    const auto g = grid_for(2.0);
    const auto r = synthesize_trajectory(single(s, 2.0), g);
    for (std::size_t i = 0; i < g.size; i += 17) {
        const double covered = s.D * lognormal_cdf(g.time(i), s.t0, s.mu, s.sigma);
        const Vec2 expect = oracle::arc_point({0, 0}, s.theta_s, s.theta_e, s.D, covered);
        CHECK(distance(r.trajectory.points[i], expect) < 1e-3);
    }
}

TEST_CASE("trajectory and integrated velocity agree on random models") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 5; ++trial) {
        const auto m = random_model(rng, 3 + trial);
        const auto g = grid_for(m.duration, 2000.0);
        const auto v = synthesize_velocity(m, g);
        const auto r = synthesize_trajectory(m, g);
        double total = 0.0;
        for (const auto& s : m.strokes) total += s.D;
        Vec2 p = m.origin;
        double worst = 0.0;
        for (std::size_t i = 1; i < g.size; ++i) {
            p = p + 0.5 * g.dt * (v[i - 1] + v[i]);
            worst = std::max(worst, distance(p, r.trajectory.points[i]));
        }
        CHECK(worst < 1e-3 * total);
    }
}

TEST_CASE("reconstructed speed is the magnitude of the trajectory derivative") {
    std::mt19937 rng(17);
    const auto m = random_model(rng, 5);
    const auto g = grid_for(m.duration, 200.0);
    const auto r = synthesize_trajectory(m, g);
    const auto v = synthesize_velocity(m, g);
    REQUIRE(r.speed.size() == g.size);
    for (std::size_t i = 0; i < g.size; ++i) CHECK(r.speed.values[i] == doctest::Approx(norm(v[i])).epsilon(1e-9));
    // salient points are speed minima of the reconstruction and include both ends
    const auto& sp = r.reconstructed_salient_points;
    REQUIRE(sp.size() >= 2);
    CHECK(sp.times.front() == g.t0);
    CHECK(sp.times.back() == doctest::Approx(g.end_time()));
}

TEST_CASE("target points") {
    CHECK(distance(target_point(stroke(kPi / 2, 0, -1, 0.3, 0, kPi / 2), {0, 0}), {1, 1}) < 1e-12);
    CHECK(distance(target_point(stroke(kPi, 0, -1, 0.3, kPi / 2, 3 * kPi / 2), {1, 0}), {-1, 0}) < 1e-12);
    CHECK(distance(target_point(stroke(2, 0, -1, 0.3, 0, 0), {5, 6}), {7, 6}) < 1e-12);
    // full turn returns to the start
    CHECK(distance(target_point(stroke(10, 0, -1, 0.3, 0.2, 0.2 + kTwoPi), {3, 3}), {3, 3}) < 1e-9);
    // clockwise quarter
    CHECK(distance(target_point(stroke(kPi / 2, 0, -1, 0.3, 0, -kPi / 2), {0, 0}), {1, -1}) < 1e-12);
}

TEST_CASE("chained target points reproduce the trajectory end for time-separated strokes") {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> D(50, 300), ang(-3, 3), sw(-2, 2);
    SigmaLognormalModel m;
    m.origin = {-20, 35};
    double t0 = 0.0;
    for (int j = 0; j < 5; ++j) {
        const double ts = ang(rng);
        m.strokes.push_back(stroke(D(rng), t0, -2.0, 0.15, ts, ts + sw(rng)));
        t0 = m.strokes.back().support_end();
    }
    m.duration = t0;
    Vec2 tp = m.origin;
    for (const auto& s : m.strokes) tp = target_point(s, tp);
    const auto r = synthesize_trajectory(m, grid_for(m.duration, 1000.0));
    CHECK(distance(tp, r.trajectory.points.back()) < 1e-3);
}

TEST_CASE("SNR is grid independent") {
    std::mt19937 rng(12);
    const auto ref = random_model(rng, 5);
    auto other = ref;
    for (auto& s : other.strokes) {
        s.D *= 1.03;
        s.theta_e += 0.05;
    }
    auto snr_at = [&](double rate) {
        const auto g = grid_for(ref.duration, rate);
        return snr_t(synthesize_trajectory(ref, g).trajectory, synthesize_trajectory(other, g).trajectory);
    };
    CHECK(std::abs(snr_at(200) - snr_at(400)) < 0.1);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(stroke(0, 0, -1, 0.3, 0, 0).validate(), InputError);
    CHECK_THROWS_AS(stroke(1, 0, -1, 0.0, 0, 0).validate(), InputError);
    CHECK_THROWS_AS(stroke(1, 0, -1, 0.3, std::nan(""), 0).validate(), InputError);
    CHECK_NOTHROW(stroke(1, 0, -1, 0.3, 0, 0).validate());

    SigmaLognormalModel m;
    m.strokes = {stroke(1, 0.5, -1, 0.3, 0, 0), stroke(1, 0.1, -1, 0.3, 0, 0)};
    m.duration = 5;
    CHECK_THROWS_AS(m.validate(), InputError);
    std::swap(m.strokes[0], m.strokes[1]);
    CHECK_NOTHROW(m.validate());
    CHECK_FALSE(m.truncated_at_duration());
    m.duration = 0.6;
    CHECK(m.truncated_at_duration());
}
