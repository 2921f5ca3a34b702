#include "idelog/metrics.hpp"
#include "idelog/optimizer.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace idelog;

namespace {

struct Scene {
    SigmaLognormalModel truth;
    Trajectory observed;
    SpeedProfile speed;
    DiscretePath path;
    SalientPointSet salient;
};

// Two or three strokes of known geometry, sampled at 200 Hz.
Scene make_scene(std::vector<LognormalStroke> strokes) {
    Scene s;
    s.truth.origin = {20, 30};
    s.truth.strokes = std::move(strokes);
    double end = 0.0;
    for (const auto& st : s.truth.strokes) end = std::max(end, st.t0 + std::exp(st.mu + 3 * st.sigma));
    s.truth.duration = end;
    const auto r = synthesize_trajectory(s.truth, {0.0, 0.005, static_cast<std::size_t>(end / 0.005) + 1});
    s.observed = r.trajectory;
    s.speed = r.speed;
    s.path = eight_connected(s.observed);
    s.salient = locate_salient_points(find_velocity_minima(s.speed), s.observed, &s.path);
    return s;
}

Scene two_strokes() {
    return make_scene({{300, 0.0, -1.6, 0.2, 0.0, 0.4}, {250, 0.35, -1.6, 0.2, 2.0, 2.3}});
}

// Initial model: true timing, plan geometry.
SigmaLognormalModel timed_model(const Scene& s, const ActionPlan& plan) {
    auto m = s.truth;
    apply_plan(plan, m);
    return m;
}

double interior_error(const Scene& s, const SigmaLognormalModel& m, std::size_t j) {
    const auto r = synthesize_trajectory(m, s.observed.grid());
    const auto pairs = match_salient_points(s.salient, r.reconstructed_salient_points, SalientMatching::nearest_time);
    const Vec2 spr = pairs[j] ? *pairs[j] : r.trajectory.points[s.salient.indices[j]];
    return norm(salient_error(s.salient.points[j], spr));
}

}  // namespace

TEST_CASE("salient error") {
    CHECK(salient_error({3, 4}, {1, 1}) == Vec2{2, 3});
    CHECK(salient_error({1, 1}, {3, 4}) == Vec2{-2, -3});
    CHECK(salient_error({5, 5}, {5, 5}) == Vec2{});
}

TEST_CASE("config validation") {
    RefineConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.eta = 1.5;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.eta = -0.1;
    CHECK_THROWS_AS(cfg.validate(), InputError);
    cfg.eta = 0.5;
    cfg.passes = 0;
    CHECK_THROWS_AS(cfg.validate(), InputError);
}

TEST_CASE("salient matching") {
    SalientPointSet obs;
    obs.times = {0.0, 0.3, 0.6, 1.0};
    obs.points = {{0, 0}, {1, 0}, {2, 0}, {3, 0}};
    obs.indices = {0, 60, 120, 200};
    SalientPointSet rec;
    rec.times = {0.0, 0.1, 0.31, 1.0};
    rec.points = {{0, 0}, {9, 9}, {1.1, 0}, {3, 0}};
    SUBCASE("by order") {
        const auto p = match_salient_points(obs, rec, SalientMatching::by_order);
        REQUIRE(p.size() == 4);
        CHECK_FALSE(p[0]);
        CHECK(*p[1] == Vec2{9, 9});
        CHECK(*p[2] == Vec2{1.1, 0});
        CHECK_FALSE(p[3]);
    }
    SUBCASE("nearest in time, within half the shorter neighbouring lobe") {
        const auto p = match_salient_points(obs, rec, SalientMatching::nearest_time);
        CHECK(*p[1] == Vec2{1.1, 0});
        CHECK_FALSE(p[2]);  // 0.31 is 0.29 away from 0.6, window is 0.15
    }
}

TEST_CASE("a reconstruction that already matches is a fixed point") {
    auto s = make_scene({{300, 0.0, -1.6, 0.2, 0.0, 0.4}, {250, 0.35, -1.6, 0.2, 2.0, 2.3}, {200, 0.7, -1.6, 0.2, -1.0, -1.3}});
    ActionPlan plan;
    plan.target_points.push_back(s.truth.origin);
    for (const auto& st : s.truth.strokes) {
        plan.target_points.push_back(target_point(st, plan.target_points.back()));
        plan.angles.push_back({st.theta_s, st.theta_e});
        plan.amplitudes.push_back(st.D);
        plan.midpoints.push_back({1e6, 1e6});  // unused unless a point moves
    }
    // observed salient points are the model's own
    const auto own = synthesize_trajectory(s.truth, s.observed.grid());
    auto sp = own.reconstructed_salient_points;
    RefineConfig cfg;
    cfg.passes = 5;
    cfg.stop_delta_db = -1e9;
    const auto res = refine(s.truth, plan, sp, s.observed, s.speed, cfg);
    for (std::size_t j = 0; j < plan.target_points.size(); ++j) CHECK(res.plan.target_points[j] == plan.target_points[j]);
    for (std::size_t j = 0; j < plan.angles.size(); ++j) {
        CHECK(res.plan.angles[j].theta_s == plan.angles[j].theta_s);
        CHECK(res.plan.amplitudes[j] == plan.amplitudes[j]);
    }
    CHECK(res.trace.initial.snr_t == kSnrCapDb);
}

TEST_CASE("eta zero is the identity") {
    const auto s = two_strokes();
    const auto plan = build_action_plan(s.salient, s.path);
    RefineConfig cfg;
    cfg.eta = 0.0;
    cfg.passes = 3;
    const auto res = refine(timed_model(s, plan), plan, s.salient, s.observed, s.speed, cfg);
    for (std::size_t j = 0; j < plan.target_points.size(); ++j) CHECK(res.plan.target_points[j] == plan.target_points[j]);
    for (std::size_t j = 0; j < plan.angles.size(); ++j) {
        CHECK(res.plan.angles[j].theta_s == plan.angles[j].theta_s);
        CHECK(res.plan.angles[j].theta_e == plan.angles[j].theta_e);
        CHECK(res.plan.amplitudes[j] == plan.amplitudes[j]);
    }
}

TEST_CASE("endpoints and timing are untouched, trace is complete") {
    auto s = make_scene({{300, 0.0, -1.6, 0.2, 0.0, 0.4}, {250, 0.3, -1.5, 0.25, 2.0, 2.6}, {320, 0.62, -1.6, 0.2, -1.0, -1.5},
                         {180, 0.95, -1.7, 0.2, 1.0, 0.6}});
    const auto plan = build_action_plan(s.salient, s.path);
    const auto model = timed_model(s, plan);
    RefineConfig cfg;
    cfg.passes = 4;
    cfg.stop_delta_db = -1e9;
    const auto res = refine(model, plan, s.salient, s.observed, s.speed, cfg);
    CHECK(res.plan.target_points.front() == plan.target_points.front());
    CHECK(res.plan.target_points.back() == plan.target_points.back());
    REQUIRE(res.model.strokes.size() == model.strokes.size());
    for (std::size_t j = 0; j < model.strokes.size(); ++j) {
        CHECK(res.model.strokes[j].t0 == model.strokes[j].t0);
        CHECK(res.model.strokes[j].mu == model.strokes[j].mu);
        CHECK(res.model.strokes[j].sigma == model.strokes[j].sigma);
    }
    CHECK(res.trace.passes.size() == 4);
    // best pass is the best SNR_t seen, including the starting plan
    double best = res.trace.initial.snr_t;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < res.trace.passes.size(); ++k) {
        if (res.trace.passes[k].snr_t > best) {
            best = res.trace.passes[k].snr_t;
            arg = k + 1;
        }
    }
    CHECK(res.trace.best_pass == arg);
    const auto rec = synthesize_trajectory(res.model, s.observed.grid());
    CHECK(snr_t(s.observed, rec.trajectory) == doctest::Approx(best).epsilon(1e-12));
    CHECK(best > res.trace.initial.snr_t);
}

TEST_CASE("early stop ends the sweep when a pass gains too little") {
    const auto s = two_strokes();
    const auto plan = build_action_plan(s.salient, s.path);
    RefineConfig cfg;
    cfg.passes = 20;
    cfg.stop_delta_db = 1e9;
    const auto res = refine(timed_model(s, plan), plan, s.salient, s.observed, s.speed, cfg);
    CHECK(res.trace.passes.size() == 1);
}

TEST_CASE("one pass shrinks a known displacement of the interior target by half") {
    const auto s = two_strokes();
    REQUIRE(s.salient.stroke_count() == 2);
    // converge first, then knock the interior target point off by a known offset
    RefineConfig settle;
    settle.passes = 10;
    settle.stop_delta_db = -1e9;
    const auto plan0 = build_action_plan(s.salient, s.path);
    auto settled = refine(timed_model(s, plan0), plan0, s.salient, s.observed, s.speed, settle);
    for (const Vec2 offset : {Vec2{25, 0}, Vec2{0, -25}, Vec2{-18, 18}}) {
        auto plan = settled.plan;
        plan.target_points[1] += offset;
        update_stroke_geometry(plan, 1);
        update_stroke_geometry(plan, 2);
        const auto model = timed_model(s, plan);
        const double before = interior_error(s, model, 1);
        RefineConfig cfg;
        cfg.passes = 1;
        const auto res = refine(model, plan, s.salient, s.observed, s.speed, cfg);
        const double after = interior_error(s, res.model, 1);
        CHECK(before > 10.0);
        CHECK(after <= 0.5 * before);
    }
}

TEST_CASE("refine rejects inconsistent inputs") {
    const auto s = two_strokes();
    auto plan = build_action_plan(s.salient, s.path);
    auto model = timed_model(s, plan);
    model.strokes.pop_back();
    CHECK_THROWS_AS(refine(model, plan, s.salient, s.observed, s.speed, RefineConfig{}), InputError);
}
