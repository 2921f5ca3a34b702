#include "idelog/lognormal_model.hpp"
#include "idelog/segmentation.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace idelog;

namespace {

SpeedProfile profile(const std::vector<double>& v, double dt = 0.005) { return {0.0, dt, v}; }

// Sum of lognormal bumps on a 200 Hz grid.
SpeedProfile bumps(const std::vector<std::array<double, 4>>& p, double T) {
    std::vector<double> v(static_cast<std::size_t>(std::llround(T * 200)) + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = i * 0.005;
        for (auto [D, t0, mu, s] : p) v[i] += D * oracle::lognormal(t, t0, mu, s);
    }
    return profile(v);
}

// Overlap of two unit lognormals, by quadrature.
double overlap(double t0a, double mua, double sa, double t0b, double mub, double sb) {
    return oracle::simpson(
        [&](double t) { return std::min(oracle::lognormal(t, t0a, mua, sa), oracle::lognormal(t, t0b, mub, sb)); }, 0.0,
        10.0, 200000);
}

}  // namespace

TEST_CASE("endpoints are always minima") {
    const auto m = find_velocity_minima(profile({0, 1, 2, 3, 2, 1, 0}));
    CHECK(m.indices == std::vector<std::size_t>{0, 6});
    CHECK(m.times.front() == 0.0);
    CHECK(m.times.back() == doctest::Approx(0.03));
    CHECK(m.stroke_count() == 1);
}

TEST_CASE("identically zero profile gives a single degenerate lobe") {
    const auto m = find_velocity_minima(profile(std::vector<double>(50, 0.0)));
    CHECK(m.indices == std::vector<std::size_t>{0, 49});
    const auto lobes = extract_lobes(profile(std::vector<double>(50, 0.0)), m);
    REQUIRE(lobes.size() == 1);
    CHECK(lobes[0].values.size() == 50);
}

TEST_CASE("plateau minima take the left edge") {
    const auto m = find_velocity_minima(profile({0, 3, 5, 2, 2, 2, 4, 6, 1}));
    CHECK(m.indices == std::vector<std::size_t>{0, 3, 8});
}

TEST_CASE("single lognormal bump has no interior minimum") {
    const auto v = bumps({{300, 0.0, -1.5, 0.25}}, 1.5);
    CHECK(find_velocity_minima(v).stroke_count() == 1);
}

TEST_CASE("two separated bumps have one interior minimum between them") {
    const auto v = bumps({{300, 0.0, -1.5, 0.2}, {250, 0.6, -1.5, 0.2}}, 1.5);
    const auto m = find_velocity_minima(v);
    REQUIRE(m.stroke_count() == 2);
    // brute force minimum between the two modes
    const std::size_t a = static_cast<std::size_t>((std::exp(-1.5 - 0.04)) / 0.005);
    const std::size_t b = static_cast<std::size_t>((0.6 + std::exp(-1.5 - 0.04)) / 0.005);
    const auto it = std::min_element(v.values.begin() + a, v.values.begin() + b);
    CHECK(m.indices[1] == static_cast<std::size_t>(it - v.values.begin()));

    const auto lobes = extract_lobes(v, m);
    REQUIRE(lobes.size() == 2);
    CHECK(*std::max_element(lobes[0].values.begin(), lobes[0].values.end()) ==
          *std::max_element(v.values.begin(), v.values.begin() + static_cast<long>(m.indices[1])));
    CHECK(*std::max_element(lobes[1].values.begin(), lobes[1].values.end()) ==
          *std::max_element(v.values.begin() + static_cast<long>(m.indices[1]), v.values.end()));
}

TEST_CASE("prominence filter suppresses ripple") {
    auto v = bumps({{300, 0.0, -1.0, 0.3}}, 2.0);
    const double peak = *std::max_element(v.values.begin(), v.values.end());
    for (std::size_t i = 0; i < v.size(); ++i) v.values[i] += 0.01 * peak * std::sin(2 * kPi * 25 * i * 0.005);
    for (auto& x : v.values) x = std::max(x, 0.0);
    CHECK(find_velocity_minima(v).stroke_count() > 1);
    SegmentationConfig cfg;
    cfg.filter_enabled = true;
    cfg.min_prominence = 0.02;
    CHECK(find_velocity_minima(v, cfg).stroke_count() == 1);
}

TEST_CASE("close minima merge keeping the deeper one") {
    // minima at 3 (value 2) and 5 (value 1), 10 ms apart, spacing limit 20 ms
    const auto v = profile({0, 5, 8, 2, 6, 1, 7, 9, 4, 0});
    SegmentationConfig cfg;
    cfg.filter_enabled = true;
    cfg.min_prominence = 0.0;
    const auto m = find_velocity_minima(v, cfg);
    CHECK(m.indices == std::vector<std::size_t>{0, 5, 9});
}

TEST_CASE("filtered interior minima are true local minima and filtering is monotone") {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<double> vals(300);
        double x = 50;
        for (auto& s : vals) {
            x = std::max(0.0, x + 20 * (u(rng) - 0.5));
            s = x;
        }
        const auto v = profile(vals);
        std::size_t last = std::numeric_limits<std::size_t>::max();
        for (double prom : {0.0, 0.01, 0.03, 0.1, 0.3}) {
            SegmentationConfig cfg;
            cfg.filter_enabled = true;
            cfg.min_prominence = prom;
            const auto m = find_velocity_minima(v, cfg);
            CHECK(m.stroke_count() <= last);
            last = m.stroke_count();
            CHECK(m.times.size() == m.indices.size());
            for (std::size_t k = 1; k + 1 < m.indices.size(); ++k) {
                const std::size_t i = m.indices[k];
                CHECK(vals[i] <= vals[i - 1]);
                CHECK(vals[i] <= vals[i + 1]);
                CHECK(m.times[k] > m.times[k - 1]);
            }
        }
    }
}

TEST_CASE("lobes partition the profile") {
    const auto v = bumps({{300, 0.0, -1.5, 0.2}, {250, 0.4, -1.6, 0.25}, {200, 0.8, -1.4, 0.2}}, 2.0);
    const auto m = find_velocity_minima(v);
    const auto lobes = extract_lobes(v, m);
    REQUIRE(lobes.size() == m.stroke_count());
    double sum = 0.0;
    for (std::size_t j = 0; j < lobes.size(); ++j) {
        const auto& l = lobes[j];
        CHECK(l.stroke_index == j + 1);
        CHECK(l.t_start == doctest::Approx(m.times[j]));
        CHECK(l.t_end == doctest::Approx(m.times[j + 1]));
        CHECK(l.begin == m.indices[j]);
        CHECK(l.end() == m.indices[j + 1]);
        CHECK(l.shares_start == (j > 0));
        for (std::size_t k = l.shares_start ? 1 : 0; k < l.values.size(); ++k) sum += l.values[k];
        CHECK(std::all_of(l.values.begin(), l.values.end(), [](double s) { return s >= 0; }));
    }
    CHECK(sum == doctest::Approx(std::accumulate(v.values.begin(), v.values.end(), 0.0)).epsilon(1e-12));

    const auto one = extract_lobes(v, VelocityMinima{{0.0, v.time(v.size() - 1)}, {0, v.size() - 1}});
    REQUIRE(one.size() == 1);
    CHECK(one[0].values == v.values);
}

TEST_CASE("well-separated strokes are counted exactly") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> mu(-1.8, -1.4), sg(0.15, 0.25), D(100, 500), ang(-3, 3);
    int checked = 0;
    for (int trial = 0; trial < 40; ++trial) {
        const int K = 2 + trial % 6;
        SigmaLognormalModel m;
        double t0 = 0.0;
        for (int j = 0; j < K; ++j) {
            const double a = ang(rng);
            m.strokes.push_back({D(rng), t0, mu(rng), sg(rng), a, a + 0.3});
            t0 += 0.32;
        }
        bool separated = true;
        for (int j = 1; j < K; ++j) {
            const auto& p = m.strokes[j - 1];
            const auto& q = m.strokes[j];
            separated = separated && overlap(p.t0, p.mu, p.sigma, q.t0, q.mu, q.sigma) < 0.1;
        }
        if (!separated) continue;
        ++checked;
        // End while the last lognormal is still smooth: at the hard support cut of an earlier
        // stroke the vector sum of two near-zero tails can dip and recover.
        const auto& last = m.strokes.back();
        m.duration = last.t0 + std::exp(last.mu + 3 * last.sigma);
        const auto r = synthesize_trajectory(m, {0.0, 0.005, static_cast<std::size_t>(m.duration / 0.005) + 1});
        CHECK(find_velocity_minima(r.speed).stroke_count() == static_cast<std::size_t>(K));
    }
    CHECK(checked > 20);
}

TEST_CASE("salient point location") {
    Trajectory tr{0.0, 0.01, {}, {}};
    for (int i = 0; i < 11; ++i) tr.points.push_back({i * 1.0, i * 2.0});
    SUBCASE("exact and rounded times") {
        const VelocityMinima m{{0.0, 0.03, 0.056, 0.1}, {0, 3, 6, 10}};
        const auto sp = locate_salient_points(m, tr);
        REQUIRE(sp.size() == 4);
        CHECK(sp.points[1] == Vec2{3, 6});
        CHECK(sp.points[2] == Vec2{6, 12});  // 0.056 s rounds to sample 6
        CHECK(sp.points.front() == tr.points.front());
        CHECK(sp.points.back() == tr.points.back());
        CHECK(sp.indices == std::vector<std::size_t>{0, 3, 6, 10});
        CHECK(sp.path_cells.empty());
        CHECK(sp.stroke_count() == 3);
    }
    SUBCASE("mapped onto the path") {
        const auto path = eight_connected(tr);
        const VelocityMinima m{{0.0, 0.05, 0.1}, {0, 5, 10}};
        const auto sp = locate_salient_points(m, tr, &path);
        REQUIRE(sp.path_cells.size() == 3);
        CHECK(path.cells[sp.path_cells[1]] == GridCell{5, 10});
    }
}

TEST_CASE("salient points of a 3-stroke model lie near the true stroke junctions") {
    SigmaLognormalModel m;
    m.strokes = {{200, 0.0, -1.8, 0.2, 0.0, 0.0}, {200, 0.35, -1.8, 0.2, kPi / 2, kPi / 2}, {200, 0.7, -1.8, 0.2, kPi, kPi}};
    m.duration = m.strokes.back().support_end();
    const auto r = synthesize_trajectory(m, {0.0, 0.005, static_cast<std::size_t>(m.duration / 0.005) + 1});
    const auto minima = find_velocity_minima(r.speed);
    REQUIRE(minima.stroke_count() == 3);
    const auto path = eight_connected(r.trajectory);
    const auto sp = locate_salient_points(minima, r.trajectory, &path);
    // junctions of the polyline (0,0) -> (200,0) -> (200,200) -> (0,200)
    const Vec2 junction[] = {{200, 0}, {200, 200}};
    for (int k = 0; k < 2; ++k) {
        const GridCell c = path.cells[sp.path_cells[k + 1]];
        CHECK(std::max(std::abs(c.x - std::lround(junction[k].x)), std::abs(c.y - std::lround(junction[k].y))) <= 2);
    }
}
