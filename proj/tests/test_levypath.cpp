#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "heightlab/levypath.hpp"

using namespace hl;

TEST_CASE("reconstruction is bit-exact") {
    Mechanism m(0.3, 1.2, LevyMeasure::atoms({{1.0, 0.5}, {0.2, 2.0}}));
    auto p = simulate_levy(m, PathBudget::horizon(2.0), 1e-3, 0.05, 7);
    auto r = reconstruct_values(p);
    REQUIRE(r.size() == p.values.size());
    for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == p.values[i]);
    CHECK(p.values[0] == 0.0);
    for (const auto& j : p.jumps) CHECK(j.z > p.eps_sim);
}

TEST_CASE("jump rate overflow rejected") {
    Mechanism m(0.0, 1.0, LevyMeasure::truncated_stable(1.5, 1.0));
    // pi(1e-4, inf) = (2/3) * 1e6, dt=0.1 -> rate way above 10
    CHECK_THROWS(simulate_levy(m, PathBudget::horizon(1.0), 0.1, 1e-4, 1));
}

TEST_CASE("moment oracles") {
    SUBCASE("driftless Brownian mean") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        double acc = 0.0;
        int n = 10000;
        for (int i = 0; i < n; ++i)
            acc += simulate_levy(m, PathBudget::horizon(1.0), 1e-2, 0.01,
                                 seed_split(11, 0, i))
                       .values.back();
        CHECK(std::abs(acc / n) < 3.0 * std::sqrt(2.0 / n));
    }
    SUBCASE("compensated jumps leave E X_1 = -alpha") {
        Mechanism m(0.5, 1.0, LevyMeasure::atoms({{1.0, 0.5}}));
        double acc = 0.0, acc2 = 0.0;
        int n = 10000;
        for (int i = 0; i < n; ++i) {
            double v = simulate_levy(m, PathBudget::horizon(1.0), 1e-2, 0.01,
                                     seed_split(12, 0, i))
                           .values.back();
            acc += v;
            acc2 += v * v;
        }
        double mean = acc / n;
        double sd = std::sqrt(acc2 / n - mean * mean);
        CHECK(std::abs(mean + 0.5) < 3.0 * sd / std::sqrt(double(n)));
        // Var X_1 = 2 beta + int z^2 pi = 2.5
        CHECK(sd * sd == doctest::Approx(2.5).epsilon(0.1));
    }
}

TEST_CASE("laplace_check") {
    SUBCASE("lambda zero is exact") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        auto r = laplace_check(m, 1.0, 0.0, 50, 1e-2, 0.01, 3);
        CHECK(r.empirical == 1.0);
        CHECK(r.target == 1.0);
    }
    SUBCASE("closed-form targets") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        auto r = laplace_check(m, 1.0, 1.0, 4000, 1e-3, 0.01, 4);
        CHECK(r.target == doctest::Approx(std::exp(1.0)).epsilon(1e-12));
        CHECK(std::abs(r.empirical - r.target) < 3.0 * r.stderror + 0.05);

        Mechanism m2(0.2, 1.0, LevyMeasure::atoms({{1.0, 0.5}}));
        auto r2 = laplace_check(m2, 1.0, 1.0, 4000, 1e-3, 0.01, 5);
        double target = std::exp(1.2 + 0.5 * std::exp(-1.0));
        CHECK(r2.target == doctest::Approx(target).epsilon(1e-12));
        CHECK(std::abs(r2.empirical - r2.target) < 3.0 * r2.stderror + 0.05);
    }
}

TEST_CASE("first passage") {
    SUBCASE("deterministic decreasing synthetic path") {
        LevyPath p;
        p.dt = 0.01;
        for (int i = 0; i <= 200; ++i) p.values.push_back(-0.01 * i);
        auto t = first_passage_time(p, 1.0);
        REQUIRE(t.has_value());
        CHECK(*t == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("upward jump near the barrier is not a passage") {
        LevyPath p;
        p.dt = 0.5;
        p.values = {0.0, -0.9, 0.5, -0.95, -0.2};
        p.jumps = {{2, 1.4}, {4, 0.75}};
        CHECK(!first_passage_time(p, 1.0).has_value());
        CHECK(first_passage_time(p, 0.9).has_value());
    }
    SUBCASE("not reached under fixed horizon") {
        LevyPath p;
        p.dt = 0.1;
        p.values = {0.0, 0.2, 0.4};
        CHECK(!first_passage_time(p, 1.0).has_value());
    }
    SUBCASE("subordinator Laplace transform") {
        Mechanism m(0.0, 1.0, LevyMeasure::zero());
        int n = 3000;
        double acc = 0.0, acc2 = 0.0;
        for (int i = 0; i < n; ++i) {
            auto p = simulate_levy(m, PathBudget::first_passage(1.0, 40.0),
                                   2e-3, 0.01, seed_split(21, 0, i));
            auto t = first_passage_time(p, 1.0);
            double w = t ? std::exp(-*t) : 0.0;
            acc += w;
            acc2 += w * w;
        }
        double mean = acc / n;
        double se = std::sqrt((acc2 / n - mean * mean) / n);
        // E e^{-S_x} = e^{-x Phi(1)}, Phi(1) = 1 for beta = 1
        CHECK(std::abs(mean - std::exp(-1.0)) < 3.0 * se + 0.03);
    }
}

TEST_CASE("inject_construct") {
    SUBCASE("zero mass gives a plain first-passage path") {
        Mechanism m(0.2, 1.0, LevyMeasure::zero());
        auto p = inject_construct(m, 1.0, 1e-3, 99);
        CHECK(p.jumps.empty());
        CHECK(p.values.front() == 0.0);
        CHECK(p.values.back() <= -1.0);
        for (std::size_t i = 0; i + 1 < p.values.size(); ++i)
            CHECK(p.values[i] > -1.0);
        auto r = reconstruct_values(p);
        for (std::size_t i = 0; i < r.size(); ++i) CHECK(r[i] == p.values[i]);
    }
    SUBCASE("reconstruction stays exact with injections") {
        Mechanism m(0.0, 1.0, LevyMeasure::atoms({{0.7, 0.8}}));
        auto p = inject_construct(m, 0.8, 1e-3, 123);
        auto r = reconstruct_values(p);
        REQUIRE(r.size() == p.values.size());
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK(r[i] == doctest::Approx(p.values[i]).epsilon(1e-14));
        CHECK(p.values.back() <= -0.8);
    }
    SUBCASE("infinite-mass measures rejected") {
        Mechanism m(0.0, 1.0, LevyMeasure::truncated_stable(1.5, 1.0));
        CHECK_THROWS(inject_construct(m, 1.0, 1e-3, 1));
    }
    SUBCASE("mean passage time matches the direct simulator") {
        Mechanism m(0.1, 1.0, LevyMeasure::atoms({{1.0, 0.5}}));
        int n = 800;
        double a = 0.0, a2 = 0.0, b = 0.0, b2 = 0.0;
        int nb = 0;
        for (int i = 0; i < n; ++i) {
            auto pi_ = inject_construct(m, 1.0, 2e-3, seed_split(31, 0, i));
            double ti = first_passage_time(pi_, 1.0).value();
            a += ti;
            a2 += ti * ti;
            auto pd = simulate_levy(m, PathBudget::first_passage(1.0, 400.0),
                                    2e-3, 0.01, seed_split(32, 0, i));
            if (auto td = first_passage_time(pd, 1.0)) {
                b += *td;
                b2 += *td * *td;
                ++nb;
            }
        }
        double ma = a / n, mb = b / nb;
        double sea = std::sqrt((a2 / n - ma * ma) / n);
        double seb = std::sqrt((b2 / nb - mb * mb) / nb);
        CHECK(std::abs(ma - mb) < 3.0 * std::sqrt(sea * sea + seb * seb) + 0.1);
    }
}
