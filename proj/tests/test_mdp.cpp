#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "bwshare/mdp.hpp"

using namespace bwshare;

namespace {

StateSpace makeSpace(double theta)
{
    static Scenario sc = gridScenario();
    sc.arrivalProb = {theta};
    return StateSpace(sc, buildRateTable(sc));
}

const double kRs = 2.346579236756213; // mean static-user rate, frozen

} // namespace

TEST_CASE("state enumeration sizes")
{
    const Scenario sc = gridScenario();
    const RateTable table = buildRateTable(sc);
    CHECK(StateSpace(sc, table).size() == 1024);

    Scenario none = sc;
    none.roads.clear();
    none.arrivalProb.clear();
    CHECK(StateSpace(none, buildRateTable(none)).size() == 1);

    Scenario two = sc;
    two.roads = {Road{{-10.0, 10.0}, {1.0, 0.0}, 2}, Road{{-15.0, -10.0}, {1.0, 0.0}, 3}};
    two.arrivalProb = {0.1, 0.2};
    two.validate();
    CHECK(StateSpace(two, buildRateTable(two)).size() == 32);

    CHECK_THROWS_WITH_AS(StateSpace(sc, table, 512), "state space too large", std::runtime_error);
}

TEST_CASE("nextState shift semantics")
{
    const Scenario sc = gridScenario();
    const StateSpace space(sc, buildRateTable(sc));
    const int l = 10;

    std::vector<int> occ(l, 0);
    occ[2] = 1; // residual time 3
    std::size_t idx = space.index(occ);
    std::vector<int> shifted = space.occupancy(space.nextState(idx, {0}));
    CHECK(shifted[1] == 1); // residual time 2
    CHECK(std::accumulate(shifted.begin(), shifted.end(), 0) == 1);

    occ.assign(l, 0);
    occ[0] = 1; // residual time 1: leaves
    CHECK(space.nextState(space.index(occ), {0}) == space.index(std::vector<int>(l, 0)));

    // arrival enters with full residual time
    std::vector<int> entered = space.occupancy(space.nextState(space.index(std::vector<int>(l, 0)), {1}));
    CHECK(entered[l - 1] == 1);

    CHECK_THROWS_AS(space.nextState(0, {2}), std::invalid_argument);
}

TEST_CASE("stationary distribution")
{
    const StateSpace zero = makeSpace(0.0);
    CHECK(zero.stationaryProb(zero.index(std::vector<int>(10, 0))) == 1.0);

    const StateSpace one = makeSpace(1.0);
    CHECK(one.stationaryProb(one.index(std::vector<int>(10, 1))) == 1.0);

    const StateSpace space = makeSpace(0.1);
    double sum = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s)
        sum += space.stationaryProb(s);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    // product form for one Bernoulli road: theta^k (1-theta)^(10-k)
    std::vector<int> occ(10, 0);
    occ[3] = occ[7] = 1;
    CHECK(space.stationaryProb(space.index(occ)) ==
          doctest::Approx(0.01 * std::pow(0.9, 8)).epsilon(1e-12));
}

TEST_CASE("classRates")
{
    const Scenario sc = gridScenario();
    const RateTable table = buildRateTable(sc);
    const StateSpace space(sc, table);

    auto [rm0, rs0] = classRates(space, space.index(std::vector<int>(10, 0)));
    CHECK(rm0 == 0.0);
    CHECK(rs0 == doctest::Approx(kRs).epsilon(1e-13));

    // residual time 10 = entry segment
    std::vector<int> occ(10, 0);
    occ[9] = 1;
    CHECK(space.mobileRate(space.index(occ)) == doctest::Approx(table.muRate[0][0]).epsilon(1e-14));

    // two users at segments 1 and 4 (residual 10 and 7)
    occ.assign(10, 0);
    occ[9] = occ[6] = 1;
    CHECK(space.mobileRate(space.index(occ)) ==
          doctest::Approx(0.5 * (table.muRate[0][0] + table.muRate[0][3])).epsilon(1e-14));
}

TEST_CASE("thresholdAction sign and tie convention")
{
    CHECK(thresholdAction(2.0, 1.0, 1.5) == 1);
    CHECK(thresholdAction(1.0, 1.0, 1.5) == 0);
    CHECK(thresholdAction(1.5, 1.0, 1.5, 0) == 0);
    CHECK(thresholdAction(1.5, 1.0, 1.5, 1) == 1);
    // rate-table scale invariance, bit-exact
    for (double c : {0.5, 2.0, 10.0})
        for (double xi : {0.3, 1.0, 2.9})
            CHECK(thresholdAction(c * 2.7, c * 1.1, xi) == thresholdAction(2.7, 1.1, xi));
}

TEST_CASE("evaluatePolicy threshold extremes")
{
    const StateSpace space = makeSpace(0.1);
    // xi=0, ties to mobile: static never served
    CHECK(evaluatePolicy(space, ThresholdPolicy{0.0, 1}).suThroughput == 0.0);
    // xi above every ratio: always static
    const PolicyEvaluation ev = evaluatePolicy(space, ThresholdPolicy{100.0, 0});
    CHECK(ev.muThroughput == 0.0);
    CHECK(ev.suThroughput == doctest::Approx(kRs).epsilon(1e-13));
}

TEST_CASE("evaluatePolicy reproduces the published operating point")
{
    const StateSpace space = makeSpace(0.1);
    const PolicyEvaluation ev = evaluatePolicy(space, ThresholdPolicy{3.1, 0});
    CHECK(ev.muThroughput == doctest::Approx(1.1545).epsilon(0.02));
    CHECK(ev.suThroughput == doctest::Approx(2.0549).epsilon(0.02));
    // frozen exact values
    CHECK(ev.muThroughput == doctest::Approx(1.1565166756860326).epsilon(1e-12));
    CHECK(ev.suThroughput == doctest::Approx(2.0545558430478863).epsilon(1e-12));
}

TEST_CASE("lambdaStar limits and frozen values")
{
    const StateSpace space = makeSpace(0.1);
    double meanMobile = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s)
        meanMobile += space.stationaryProb(s) * space.mobileRate(s);
    CHECK(lambdaStar(space, 0.0) == doctest::Approx(meanMobile).epsilon(1e-14));
    CHECK(lambdaStar(space, 0.0) == doctest::Approx(3.3851612803011135).epsilon(1e-12));
    CHECK(lambdaStar(space, 100.0) == doctest::Approx(100.0 * kRs).epsilon(1e-13));

    const StateSpace sparse = makeSpace(0.01);
    CHECK(lambdaStar(sparse, 3.1) == doctest::Approx(7.3250300156075863).epsilon(1e-12));
}

TEST_CASE("relative value iteration agrees with the greedy gain")
{
    const StateSpace space = makeSpace(0.1);
    for (double xi : {0.0, 3.1}) {
        const RviResult rvi = relativeValueIteration(space, xi);
        CHECK(std::fabs(rvi.gain - lambdaStar(space, xi)) < 1e-9);
    }
    CHECK_THROWS_AS(relativeValueIteration(space, 1.0, 1e-12, 2), std::runtime_error);
}

TEST_CASE("lambdaStar is convex piecewise-linear in xi")
{
    const StateSpace space = makeSpace(0.1);
    const double xiMax = 2.0 * breakpoints(space).back();
    std::vector<double> vals;
    const int n = 400;
    for (int i = 0; i <= n; ++i)
        vals.push_back(lambdaStar(space, xiMax * i / n));
    for (int i = 1; i + 1 <= n; ++i)
        CHECK(vals[i + 1] - 2 * vals[i] + vals[i - 1] >= -1e-9);
}

TEST_CASE("breakpoints and the staircase")
{
    const StateSpace space = makeSpace(0.1);
    const std::vector<double> bps = breakpoints(space);
    REQUIRE(!bps.empty());
    CHECK(std::is_sorted(bps.begin(), bps.end()));

    // staircase constant strictly between grouped breakpoints
    const std::vector<double> groups = groupedBreakpoints(space);
    for (std::size_t k = 0; k + 1 < groups.size(); k += 17) {
        const double a = groups[k], b = groups[k + 1];
        const double mid1 = a + 0.25 * (b - a), mid2 = a + 0.75 * (b - a);
        CHECK(evaluatePolicy(space, ThresholdPolicy{mid1, 0}).suThroughput ==
              evaluatePolicy(space, ThresholdPolicy{mid2, 0}).suThroughput);
    }

    // monotonicity along a xi grid
    double prevSu = -1.0, prevMu = 1e300;
    for (int i = 0; i <= 100; ++i) {
        const double xi = 2.0 * bps.back() * i / 100;
        const PolicyEvaluation ev = evaluatePolicy(space, ThresholdPolicy{xi, 0});
        CHECK(ev.suThroughput >= prevSu);
        CHECK(ev.muThroughput <= prevMu);
        prevSu = ev.suThroughput;
        prevMu = ev.muThroughput;
    }
}

TEST_CASE("solveConstrained meets feasible targets exactly")
{
    const StateSpace space = makeSpace(0.1);
    CHECK_THROWS_WITH_AS(solveConstrained(space, kRs + 0.5), "constraint infeasible",
                         std::runtime_error);

    const double lo = staticLevelAbove(space, 0.0);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(lo + 1e-6, space.staticRate() - 1e-6);
    for (int i = 0; i < 5; ++i) {
        const double r0 = unif(rng);
        const ConstrainedSolution sol = solveConstrained(space, r0);
        CHECK(std::fabs(sol.achievedStatic - r0) < 1e-9);
        CHECK(sol.p >= 0.0);
        CHECK(sol.p <= 1.0);
    }
}

TEST_CASE("fairAllocation formula and properties")
{
    // symmetric point: xi * rs^alpha = rm^alpha
    CHECK(fairAllocation(4.0, 1.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-14));
    // xi=1, alpha=0.5, rm = 4 rs -> 4/5
    CHECK(fairAllocation(4.0, 1.0, 1.0, 0.5) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(fairAllocation(0.0, 1.0, 1.0, 0.5) == 0.0);
    CHECK_THROWS_AS(fairAllocation(1.0, 1.0, 0.0, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(fairAllocation(1.0, 1.0, 1.0, 1.0), std::invalid_argument);

    // scale invariance, bit-exact
    for (double c : {0.5, 2.0, 10.0})
        CHECK(fairAllocation(c * 3.7, c * 1.9, 2.9, 0.5) == fairAllocation(3.7, 1.9, 2.9, 0.5));

    // strictly decreasing in xi for positive mobile rate
    double prev = 1.1;
    for (int i = 1; i <= 100; ++i) {
        const double eta = fairAllocation(3.0, 2.0, 0.1 * i, 0.5);
        CHECK(eta < prev);
        prev = eta;
    }
}

TEST_CASE("solveConstrainedFair reproduces the published multiplier")
{
    const StateSpace space = makeSpace(0.1);
    const double xi = solveConstrainedFair(space, 1.4256, 0.5);
    CHECK(xi == doctest::Approx(2.9).epsilon(0.02));
    CHECK(evaluatePolicy(space, FairPolicy{xi, 0.5}).suThroughput ==
          doctest::Approx(1.4256).epsilon(1e-8));
    CHECK_THROWS_WITH_AS(solveConstrainedFair(space, 1e-6, 0.5), "constraint infeasible",
                         std::runtime_error);
}

TEST_CASE("posteriorRates")
{
    Scenario sc = gridScenario();
    sc.roads = {Road{{-10.0, 10.0}, {1.0, 0.0}, 2}};
    sc.arrivalProb = {0.1};
    const StateSpace space(sc, buildRateTable(sc));
    const std::size_t n = space.size();

    std::vector<std::vector<double>> identity(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        identity[i][i] = 1.0;
    auto [mob, stat] = posteriorRates(identity, space);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(mob[i] == space.mobileRate(i));
        CHECK(stat[i] == space.staticRate(i));
    }

    std::vector<std::vector<double>> uniform(1, std::vector<double>(n, 0.0));
    uniform[0][1] = 0.5;
    uniform[0][2] = 0.5;
    auto [mob2, stat2] = posteriorRates(uniform, space);
    CHECK(mob2[0] == doctest::Approx(0.5 * (space.mobileRate(1) + space.mobileRate(2))).epsilon(1e-14));

    std::vector<std::vector<double>> bad(1, std::vector<double>(n, 0.0));
    bad[0][0] = 0.7;
    CHECK_THROWS_AS(posteriorRates(bad, space), std::invalid_argument);
}

TEST_CASE("equal-share baseline matches the published Table-1 columns")
{
    const StateSpace space = makeSpace(0.1);
    const PolicyEvaluation eq = equalShareEvaluation(space, 1.0, 6);
    CHECK(eq.muThroughput == doctest::Approx(0.6659).epsilon(0.02));
    CHECK(eq.suThroughput == doctest::Approx(2.0459).epsilon(0.02));
    CHECK(eq.muThroughput == doctest::Approx(0.66588497063289931).epsilon(1e-12));
}
