#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "heightlab/verify.hpp"

using namespace hl;

TEST_CASE("ks statistic basics") {
    std::vector<double> zeros(50, 0.0), ones(50, 1.0);
    CHECK(ks_two_sample(zeros, zeros, 0, 1).statistic == 0.0);
    CHECK(ks_two_sample(zeros, ones, 0, 1).statistic == 1.0);
    CHECK_THROWS(ks_two_sample({}, ones, 0, 1));

    Rng rng(8181);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> a(1000), b(1000);
    for (int rep = 0; rep < 5; ++rep) {
        for (auto& v : a) v = g(rng);
        for (auto& v : b) v = g(rng);
        auto r = ks_two_sample(a, b, 500, 99 + rep);
        CHECK(r.p_value > 0.001);
        // relabeling leaves the statistic unchanged
        auto r2 = ks_two_sample(b, a, 500, 99 + rep);
        CHECK(r2.statistic == r.statistic);
        CHECK(std::abs(r2.p_value - r.p_value) < 0.15);
    }
}

TEST_CASE("parallel_for is deterministic across worker counts") {
    std::vector<double> out1(64), out4(64);
    auto body = [](std::vector<double>& out) {
        return [&out](std::int64_t i) {
            Rng rng(seed_split(9, 0, static_cast<std::uint32_t>(i)));
            std::normal_distribution<double> g;
            out[i] = g(rng);
        };
    };
    parallel_for(64, body(out1), 1);
    parallel_for(64, body(out4), 4);
    CHECK(out1 == out4);
}

TEST_CASE("linear ray-knight pipeline at desk scale") {
    Mechanism m(0.0, 1.0, LevyMeasure::zero());
    Tolerances tol;
    tol.ks_max = 0.12;  // KS noise floor at N=400 is ~0.1
    auto rep = ray_knight_linear(m, 1.0, {0.25, 0.5}, 400, 5e-4, 0.01, 0.02,
                                 515, 200.0, 1e-3, tol);
    CHECK(rep.a.reached_fraction >= 0.9);
    REQUIRE(rep.coords.size() == 2);
    for (const auto& c : rep.coords) {
        INFO(c.name, " z=", c.zscore, " ks=", c.ks);
        CHECK(c.pass);
    }
    CHECK(rep.pass);
    auto js = comparison_report_json(rep);
    CHECK(js.find("ray_knight_linear") != std::string::npos);
    CHECK(js.find("reached_fraction") != std::string::npos);
    CHECK(comparison_report_text(rep).find("PASS") != std::string::npos);
}

TEST_CASE("interacting ray-knight pipeline at desk scale") {
    InteractConfig cfg;
    cfg.f = localize(logistic_interaction(1.0, 2.0), 10.0);
    cfg.a = 1.0;
    cfg.beta = 1.0;
    cfg.pi = LevyMeasure::atoms({{1.0, 0.3}});
    cfg.dt = 1e-3;
    cfg.eps_sim = 0.01;
    cfg.delta_t = 0.02;
    cfg.cap = 400.0;
    Tolerances tol;
    tol.bias = 0.07;
    tol.ks_max = 0.16;  // KS noise floor at N=300
    auto rep = ray_knight_interacting(cfg, {0.5, 1.0}, {0.25, 0.5}, 300, 616,
                                      1e-3, tol);
    REQUIRE(rep.coords.size() == 6);  // 2 x-levels * 2 t + 2 increments
    for (const auto& c : rep.coords) {
        INFO(c.name, " z=", c.zscore, " ks=", c.ks);
        CHECK(c.pass);
    }
    CHECK(rep.pass);
    CHECK_THROWS(ray_knight_interacting(cfg, {0.5, 1.0}, {2.0}, 10, 1, 1e-3));
}

TEST_CASE("bound suite") {
    SUBCASE("continuous case with a closed-form cell") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        auto rep = bound_suite(m, {0.5, 1.0}, {0.25, 0.5}, {0.0, 0.3, 0.6},
                               2000, 1e-3, 0.01, 717);
        CHECK(rep.pass);
        bool found = false;
        for (const auto& c : rep.checks) {
            if (c.kind == "passage" && c.s == 1.0 && c.param == 0.5) {
                CHECK(c.bound == doctest::Approx(0.790988).epsilon(1e-4));
                found = true;
            }
            if (c.kind == "clamp_one" && c.param == 0.0)
                CHECK(c.empirical == 0.0);
        }
        CHECK(found);
    }
    SUBCASE("jump case exercises the clamp-mass envelope") {
        Mechanism m(0.0, 1.0, LevyMeasure::atoms({{0.4, 0.8}, {0.9, 0.5}}));
        auto rep = bound_suite(m, {0.5, 1.0}, {0.5}, {0.2, 0.5, 1.0}, 1500,
                               1e-3, 0.01, 719);
        bool saw_mass = false;
        for (const auto& c : rep.checks)
            if (c.kind == "clamp_mass") {
                saw_mass = true;
                CHECK(c.pass);
            }
        CHECK(saw_mass);
        CHECK(rep.pass);
    }
}

TEST_CASE("truncation convergence") {
    SUBCASE("pi = 0 gives identically zero differences") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        auto rep = truncation_convergence(m, {0.5, 0.25, 0.1}, 1.0, 50, 1e-3,
                                          0.05, 0.5, 818);
        CHECK(rep.pass);
        for (const auto& st : rep.steps) {
            CHECK(st.mean_sup_diff == 0.0);
            CHECK(st.envelope == 0.0);
        }
    }
    SUBCASE("stable tail: estimates decrease and obey the envelope") {
        Mechanism m(0.0, 1.0, LevyMeasure::truncated_stable(1.5, 0.5));
        auto rep = truncation_convergence(m, {0.5, 0.25, 0.1}, 1.0, 300, 1e-3,
                                          0.0125, 0.5, 819);
        REQUIRE(rep.steps.size() == 3);
        CHECK(rep.pass);
        CHECK(rep.steps[0].mean_sup_diff > rep.steps[2].mean_sup_diff);
        for (const auto& st : rep.steps)
            CHECK(st.mean_sup_diff <= st.envelope + 3.0 * st.stderr_);
    }
    SUBCASE("schedule validation") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        CHECK_THROWS(truncation_convergence(m, {0.1, 0.5}, 1.0, 10, 1e-3,
                                            0.05, 0.5, 1));
        CHECK_THROWS(truncation_convergence(m, {0.5, 0.1}, 1.0, 10, 1e-3,
                                            0.2, 0.5, 1));
    }
}
