#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "bwshare/scenario.hpp"

using namespace bwshare;

// regression constants from a brute-force field summation done independently
static const double kSuRate[6] = {4.4508524937360896, 4.4508524937360896, 1.6980674641863094,
                                  1.6980674641863096, 0.89081775234624117, 0.89081775234624117};
static const double kMuRate[10] = {1.3345021303368894, 2.7760021357369107, 4.7032268474944514,
                                   7.1696381547529207, 10.003497194542826, 10.003497194542827,
                                   7.1696381547529224, 4.7032268474944523, 2.7760021357369116,
                                   1.3345021303368882};

TEST_CASE("sirAt: equidistant equal-power interferer gives SIR 1")
{
    BsLayout layout{{{0, 0}, {10, 0}}, {1.0, 1.0}, 0};
    PropagationModel prop{4.0, 0.5, nullptr};
    CHECK(sirAt({5, 0}, layout, prop) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("sirAt: single interferer power-law ratio")
{
    BsLayout layout{{{0, 0}, {100, 0}}, {1.0, 1.0}, 0};
    PropagationModel prop{4.0, 0.5, nullptr};
    // (75/25)^4 = 81
    CHECK(sirAt({25, 0}, layout, prop) == doctest::Approx(81.0).epsilon(1e-13));
}

TEST_CASE("sirAt: full grid at (-45,10) matches the brute-force oracle")
{
    const Scenario sc = gridScenario();
    CHECK(sirAt({-45, 10}, sc.layout, sc.prop) ==
          doctest::Approx(1.5218843728636355).epsilon(1e-13));
}

TEST_CASE("sirAt: strictly decreasing in serving distance")
{
    const Scenario sc = gridScenario();
    double prev = sirAt({1, 0}, sc.layout, sc.prop);
    for (double x = 5; x <= 45; x += 5) {
        const double cur = sirAt({x, 0}, sc.layout, sc.prop);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("sirAt: scale invariance in txPowers")
{
    Scenario sc = gridScenario();
    const double ref = sirAt({-45, 10}, sc.layout, sc.prop);
    for (double c : {0.5, 2.0, 10.0}) {
        Scenario scaled = sc;
        for (double& p : scaled.layout.txPowers)
            p *= c;
        CHECK(sirAt({-45, 10}, scaled.layout, scaled.prop) == ref);
    }
}

TEST_CASE("sirAt: no interferers is a degenerate layout")
{
    BsLayout layout{{{0, 0}}, {1.0}, 0};
    PropagationModel prop{4.0, 0.5, nullptr};
    CHECK_THROWS_WITH_AS(sirAt({5, 5}, layout, prop), "degenerate layout: zero total interference", std::runtime_error);
}

TEST_CASE("ratePerUnitBw basics")
{
    CHECK(ratePerUnitBw(1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(ratePerUnitBw(3.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(ratePerUnitBw(0.0) == 0.0);
    CHECK_THROWS_AS(ratePerUnitBw(-0.5), std::invalid_argument);
    CHECK_THROWS_AS(ratePerUnitBw(std::nan("")), std::invalid_argument);
    // monotone
    CHECK(ratePerUnitBw(2.0) < ratePerUnitBw(3.0));
}

TEST_CASE("buildRateTable: default scenario regression constants")
{
    const Scenario sc = gridScenario();
    const RateTable table = buildRateTable(sc);
    REQUIRE(table.muRate.size() == 1);
    REQUIRE(table.muRate[0].size() == 10);
    REQUIRE(table.suRate.size() == 6);
    for (int k = 0; k < 10; ++k)
        CHECK(table.muRate[0][k] == doctest::Approx(kMuRate[k]).epsilon(1e-13));
    for (int j = 0; j < 6; ++j)
        CHECK(table.suRate[j] == doctest::Approx(kSuRate[j]).epsilon(1e-13));
}

TEST_CASE("buildRateTable: zero roads")
{
    Scenario sc = gridScenario();
    sc.roads.clear();
    sc.arrivalProb.clear();
    const RateTable table = buildRateTable(sc);
    CHECK(table.muRate.empty());
    CHECK(table.suRate.size() == 6);
}

TEST_CASE("buildRateTable: txPower scaling leaves the table identical")
{
    Scenario sc = gridScenario();
    const RateTable ref = buildRateTable(sc);
    for (double& p : sc.layout.txPowers)
        p *= 7.0;
    const RateTable scaled = buildRateTable(sc);
    CHECK(scaled.muRate == ref.muRate);
    CHECK(scaled.suRate == ref.suRate);
}

TEST_CASE("fading: single-state chain is the identity")
{
    const FadingProcess proc = FadingProcess::identity();
    proc.validate();
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        auto [next, gain] = fadingStep(proc, 0, rng);
        CHECK(next == 0);
        CHECK(gain == 1.0);
    }
}

TEST_CASE("fading: two-state chain stationary mean 1 and long-run empirical mean")
{
    const FadingProcess proc = FadingProcess::twoState();
    proc.validate();
    const auto pi = proc.stationary();
    CHECK(pi[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(proc.stationaryMeanGain() == doctest::Approx(1.0).epsilon(1e-12));

    std::mt19937_64 rng(42);
    std::size_t state = fadingStationaryDraw(proc, pi, rng);
    const int n = 1000000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        auto [next, gain] = fadingStep(proc, state, rng);
        state = next;
        sum += gain;
    }
    // gain variance 0.25; allow 3 standard errors of the correlated chain (~x3)
    CHECK(std::fabs(sum / n - 1.0) < 3.0 * 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("fading: deterministic cycle has period 2 and fails validation")
{
    FadingProcess cyc{{0.5, 1.5}, {{0.0, 1.0}, {1.0, 0.0}}};
    CHECK(cyc.period() == 2);
    CHECK_THROWS_AS(cyc.validate(), std::invalid_argument);
}

TEST_CASE("fading: bad chains rejected")
{
    FadingProcess rows{{1.0, 1.0}, {{0.5, 0.4}, {0.5, 0.5}}};
    CHECK_THROWS_AS(rows.validate(), std::invalid_argument);
    FadingProcess mean{{0.2, 0.4}, {{0.9, 0.1}, {0.1, 0.9}}};
    CHECK_THROWS_AS(mean.validate(), std::invalid_argument);
}
