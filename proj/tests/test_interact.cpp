#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "heightlab/interact.hpp"

using namespace hl;

namespace {

InteractionFn zero_interaction() {
    InteractionFn f;
    f.f = [](double) { return 0.0; };
    f.fprime = [](double) { return 0.0; };
    f.theta = 0.0;
    return f;
}

double ks_stat(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                 static_cast<double>(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("zero drift reproduces the plain first-passage pipeline") {
    InteractConfig cfg;
    cfg.f = zero_interaction();
    cfg.a = kInf;
    cfg.beta = 1.0;
    cfg.x_target = 0.5;
    cfg.dt = 1e-3;
    cfg.cap = 100.0;
    Mechanism m(0.0, 1.0, LevyMeasure::zero());
    std::vector<double> s_int, s_ref;
    for (int i = 0; i < 800; ++i) {
        auto r = simulate_interacting_height(cfg, seed_split(401, 0, i));
        if (r.passage.reached) s_int.push_back(r.passage.time);
        auto p = simulate_levy(m, PathBudget::first_passage(0.5, 100.0), 1e-3,
                               0.01, seed_split(402, 0, i));
        auto t = first_passage_time(p, 0.5);
        if (t) s_ref.push_back(*t);
    }
    REQUIRE(s_int.size() > 700);
    REQUIRE(s_ref.size() > 700);
    CHECK(ks_stat(s_int, s_ref) < 0.07);
}

TEST_CASE("constant linear drift matches the drifted levy simulator") {
    // f(z) = -alpha z has f' = -alpha everywhere: the interacting path is a
    // plain drifted Levy path, so matched seeds give near-identical laws
    InteractConfig cfg;
    cfg.f = linear_interaction(0.4);
    cfg.a = kInf;
    cfg.x_target = 0.7;
    cfg.dt = 1e-3;
    cfg.cap = 200.0;
    Mechanism m(0.4, 1.0, LevyMeasure::zero());
    std::vector<double> s_int, s_ref;
    for (int i = 0; i < 600; ++i) {
        auto r = simulate_interacting_height(cfg, seed_split(403, 0, i));
        if (r.passage.reached) s_int.push_back(r.passage.time);
        auto p = simulate_levy(m, PathBudget::first_passage(0.7, 200.0), 1e-3,
                               0.01, seed_split(404, 0, i));
        auto t = first_passage_time(p, 0.7);
        if (t) s_ref.push_back(*t);
    }
    REQUIRE(s_int.size() > 550);
    CHECK(ks_stat(s_int, s_ref) < 0.08);
}

TEST_CASE("reflection drift caps the height") {
    InteractConfig cfg;
    cfg.f = zero_interaction();
    cfg.a = 0.5;
    cfg.x_target = 2.0;
    cfg.dt = 1e-3;
    cfg.cap = 400.0;
    int deep = 0;
    for (int i = 0; i < 20; ++i) {
        auto r = simulate_interacting_height(cfg, seed_split(405, 0, i));
        double theta = cfg.f.theta;
        for (double hv : r.height.values) {
            CHECK(hv < theta + cfg.a + 6.0);  // crude excursion bound
            if (hv > cfg.a + 1.0) ++deep;
        }
        // drift at depth: c_r <= -1 whenever H_r > theta + a + 1 (checked
        // via the public pieces rather than the internal loop)
        for (double hv : r.height.values)
            if (hv > theta + cfg.a + 1.0)
                CHECK(cfg.f.fprime(0.0) + reflection_drift(hv, cfg.a) <= -1.0);
    }
    CHECK(deep > 0);
}

TEST_CASE("girsanov weight trivial cases") {
    InteractConfig cfg;
    cfg.f = zero_interaction();
    cfg.a = kInf;
    cfg.x_target = 0.5;
    cfg.dt = 1e-3;
    cfg.cap = 100.0;
    auto r = simulate_interacting_height(cfg, 77);
    REQUIRE(r.passage.reached);
    SUBCASE("no drift, a = inf: weight is exactly 1") {
        auto w = girsanov_weight(r.path, r.height, zero_interaction(), kInf,
                                 0.5, 0.02);
        CHECK(w.logweight == 0.0);
        CHECK(w.weight() == 1.0);
        CHECK(w.frozen);
        CHECK(w.s_index == r.passage.index);
    }
    SUBCASE("a above max H also gives weight 1") {
        double hmax = *std::max_element(r.height.values.begin(),
                                        r.height.values.end());
        auto w = girsanov_weight(r.path, r.height, zero_interaction(),
                                 hmax + 1.0, 0.5, 0.02);
        CHECK(w.weight() == 1.0);
    }
    SUBCASE("log decomposition is additive in the components") {
        auto f = linear_interaction(0.3);
        auto w = girsanov_weight(r.path, r.height, f, 1.0, 0.5, 0.02);
        CHECK(w.logweight == doctest::Approx(w.term_db / std::sqrt(2.0) -
                                             w.term_qv / 4.0));
        CHECK(w.weight() > 0.0);
    }
}

TEST_CASE("mean girsanov weight is 1 over driftless paths") {
    Mechanism m(0.0, 1.0, LevyMeasure::zero());
    auto f = linear_interaction(0.5);
    double s = 0.0, s2 = 0.0;
    int n = 2000;
    for (int i = 0; i < n; ++i) {
        auto p = simulate_levy(m, PathBudget::first_passage(0.5, 50.0), 1e-3,
                               0.01, seed_split(411, 0, i));
        auto h = height_from_path(p, m.beta);
        auto w = girsanov_weight(p, h, f, 1.0, 0.5, 0.02);
        double v = w.weight();
        s += v;
        s2 += v * v;
    }
    double mean = s / n;
    double se = std::sqrt((s2 / n - mean * mean) / (n - 1.0));
    CHECK(std::abs(mean - 1.0) < 3.0 * se);
}

TEST_CASE("sn_guard boundary behaviour") {
    InteractConfig cfg;
    cfg.f = zero_interaction();
    cfg.x_target = 1.0;
    cfg.dt = 1e-3;
    cfg.cap = 100.0;
    auto r = simulate_interacting_height(cfg, 99);
    double cap_time = (r.height.values.size() - 1) * r.height.dt;
    CHECK(sn_guard(r.height, 0.02, 0.0) == 0.0);
    CHECK(sn_guard(r.height, 0.02, kInf) == cap_time);
    double g1 = sn_guard(r.height, 0.02, 0.5);
    double g2 = sn_guard(r.height, 0.02, 1.5);
    CHECK(g1 <= g2);
}

TEST_CASE("snapshots freeze the field at intermediate passage levels") {
    InteractConfig cfg;
    cfg.f = zero_interaction();
    cfg.x_target = 1.0;
    cfg.x_marks = {0.25, 0.5, 1.0};
    cfg.dt = 1e-3;
    cfg.cap = 400.0;
    auto r = simulate_interacting_height(cfg, seed_split(421, 0, 3));
    REQUIRE(r.snapshots.size() == 3);
    if (r.passage.reached) {
        for (const auto& s : r.snapshots) CHECK(s.reached);
        CHECK(r.snapshots[0].time <= r.snapshots[1].time);
        CHECK(r.snapshots[1].time <= r.snapshots[2].time);
        // field mass grows with the stop time
        auto mass = [](const std::vector<double>& f) {
            double t = 0.0;
            for (double e : f) t += e;
            return t;
        };
        CHECK(mass(r.snapshots[0].field) <= mass(r.snapshots[1].field) + 1e-9);
        CHECK(mass(r.snapshots[2].field) ==
              doctest::Approx(mass(r.field)).epsilon(1e-12));
    }
}

TEST_CASE("config validation") {
    InteractConfig cfg;
    cfg.f = zero_interaction();
    cfg.x_target = -1.0;
    CHECK_THROWS(simulate_interacting_height(cfg, 1));
    cfg.x_target = 1.0;
    cfg.a = 0.0;
    CHECK_THROWS(simulate_interacting_height(cfg, 1));
    cfg.a = 1.0;
    cfg.x_marks = {0.5, 0.2};
    CHECK_THROWS(simulate_interacting_height(cfg, 1));
}
