#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "heightlab/height.hpp"

using namespace hl;

namespace {

// X rises 0 -> 1 on [0,1] with slope +1, jumps +0.5 at s=1, then falls with
// slope -1 until s=4.
LevyPath stick_path() {
    LevyPath p;
    p.dt = 0.01;
    p.beta = 1.0;
    int i_jump = 100;
    for (int i = 0; i <= 400; ++i) {
        double s = i * p.dt;
        if (i < i_jump)
            p.values.push_back(s);
        else
            p.values.push_back(1.5 - (s - 1.0));
    }
    p.jumps = {{i_jump, 0.5}};
    return p;
}

}  // namespace

TEST_CASE("synthetic stick path") {
    auto p = stick_path();
    auto h = height_from_path(p, 1.0);
    // horizontal stick: H = 1 on (1, 1.5)
    for (int i = 101; i < 150; ++i)
        CHECK(h.values[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.values[200] == doctest::Approx(0.5).epsilon(1e-12));  // s = 2
    CHECK(h.values[300] == doctest::Approx(0.0).epsilon(1e-12));  // s = 3
    // continuity across the jump
    CHECK(h.values[100] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(h.values[99] == doctest::Approx(0.99).epsilon(1e-12));

    auto hb = height_brute_force(p, 1.0);
    for (std::size_t i = 0; i < h.values.size(); ++i)
        CHECK(h.values[i] == doctest::Approx(hb.values[i]).epsilon(1e-12));

    CHECK(clamp_sum(p, 120, 0.0, kInf) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(clamp_sum(p, 120, 0.6, kInf) == 0.0);
    LevyPath nojumps = p;
    nojumps.jumps.clear();
    CHECK(clamp_sum(nojumps, 120, 0.0, kInf) == 0.0);
}

TEST_CASE("stack matches brute force on random paths") {
    Mechanism m(0.2, 1.0, LevyMeasure::atoms({{0.5, 1.0}, {1.2, 0.4}}));
    for (int k = 0; k < 20; ++k) {
        auto p = simulate_levy(m, PathBudget::horizon(2.0), 1e-3, 0.01,
                               seed_split(5, 0, k));
        auto h1 = height_from_path(p, m.beta);
        auto h2 = height_brute_force(p, m.beta);
        double worst = 0.0;
        for (std::size_t i = 0; i < h1.values.size(); ++i)
            worst = std::max(worst, std::abs(h1.values[i] - h2.values[i]));
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("pi = 0 reflected identity is exact") {
    Mechanism m(0.0, 2.0, LevyMeasure::zero());
    auto p = simulate_levy(m, PathBudget::horizon(1.0), 1e-3, 0.01, 77);
    auto h = height_from_path(p, m.beta);
    double runmin = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        runmin = std::min(runmin, p.values[i]);
        CHECK(m.beta * h.values[i] == p.values[i] - runmin);
    }
}

TEST_CASE("nondecreasing jump-free path gives beta H = X") {
    LevyPath p;
    p.dt = 0.1;
    for (int i = 0; i <= 50; ++i) p.values.push_back(0.04 * i);
    auto h = height_from_path(p, 2.0);
    for (int i = 0; i <= 50; ++i)
        CHECK(2.0 * h.values[i] == doctest::Approx(p.values[i]).epsilon(1e-14));
}

TEST_CASE("height path invariants") {
    Mechanism m(0.1, 1.0, LevyMeasure::atoms({{0.8, 0.6}}));
    auto p = simulate_levy(m, PathBudget::horizon(3.0), 1e-3, 0.01, 901);
    auto h = height_from_path(p, m.beta);
    CHECK(h.values[0] == 0.0);
    double runmin = 0.0;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        runmin = std::min(runmin, p.values[i]);
        CHECK(h.values[i] >= 0.0);
        CHECK(m.beta * h.values[i] <= p.values[i] - runmin + 1e-12);
    }
}

TEST_CASE("jump compensation keeps H continuous") {
    // at a jump index the height increment comes only from the continuous
    // move: the new clamp equals z exactly
    Mechanism m(0.0, 1.0, LevyMeasure::atoms({{1.5, 2.0}}));
    auto p = simulate_levy(m, PathBudget::horizon(2.0), 1e-3, 0.01, 311);
    auto h = height_from_path(p, m.beta);
    REQUIRE(!p.jumps.empty());
    double cont_scale = 4.0 * std::sqrt(2.0 * m.beta * p.dt) +
                        2.0 * (m.alpha + p.compensator) * p.dt;
    for (const auto& jp : p.jumps) {
        std::size_t i = jp.index;
        if (i == 0 || i >= h.values.size()) continue;
        CHECK(std::abs(h.values[i] - h.values[i - 1]) < cont_scale + 0.05);
    }
}

TEST_CASE("exploration stack invariants along a path") {
    Mechanism m(0.0, 1.0, LevyMeasure::atoms({{0.6, 1.5}}));
    auto p = simulate_levy(m, PathBudget::horizon(2.0), 1e-3, 0.01, 41);
    ExplorationStack stack;
    std::size_t j = 0;
    std::vector<double> zbuf;
    for (std::size_t i = 0; i < p.values.size(); ++i) {
        zbuf.clear();
        while (j < p.jumps.size() &&
               p.jumps[j].index == static_cast<std::int64_t>(i)) {
            zbuf.push_back(p.jumps[j].z);
            ++j;
        }
        stack.advance(p.values[i], zbuf.begin(), zbuf.end());
        if (i % 100 == 0) {
            const auto& es = stack.entries();
            double direct = 0.0;
            for (std::size_t k = 0; k < es.size(); ++k) {
                if (k > 0) CHECK(es[k - 1].min <= es[k].min + 1e-14);
                direct += es[k].clamp;
            }
            CHECK(stack.clamp_total() == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("brute force rejects over-long paths") {
    LevyPath p;
    p.dt = 1e-3;
    p.values.assign(100001, 0.0);
    CHECK_THROWS(height_brute_force(p, 1.0));
}
