#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bwshare/scenario.hpp"

namespace bwshare {

/// Allocate everything to mobiles iff R_mobile(s) > xi * R_static(s).
struct ThresholdPolicy {
    double xi = 0.0;
    int tieAction = 0;
};

/// Threshold with per-slot multiplier perturbation Delta ~ f_p:
/// density p/delta on [-delta,0], (1-p)/delta on (0,delta].
struct RandomizedThresholdPolicy {
    double xi = 0.0;
    double p = 0.0;
    double delta = 1e-3;
};

/// Interior fractional split from the alpha-fair first-order condition.
struct FairPolicy {
    double xi = 1.0;
    double alpha = 0.5;
};

struct PolicyEvaluation {
    double muThroughput = 0.0; // mobile class, bits/slot
    double suThroughput = 0.0; // static class, bits/slot
    double lambda = 0.0;       // muThroughput + xi * suThroughput
};

inline int thresholdAction(double mobileRate, double staticRate, double xi, int tieAction = 0)
{
    const double d = mobileRate - xi * staticRate;
    if (d > 0.0)
        return 1;
    if (d < 0.0)
        return 0;
    return tieAction;
}

/// Fraction of bandwidth to mobiles under the alpha-fair split.
/// Convention: 0 when the state has no mobile rate.
inline double fairAllocation(double mobileRate, double staticRate, double xi, double alpha)
{
    if (!(xi > 0.0))
        throw std::invalid_argument("fairAllocation: xi must be > 0");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("fairAllocation: alpha must lie in (0,1)");
    if (!(mobileRate > 0.0))
        return 0.0;
    // only the rate ratio matters; snap it to float precision so the split is
    // insensitive to last-ulp noise in commonly scaled inputs
    const double q = static_cast<float>(mobileRate / staticRate);
    const double inv = 1.0 / (alpha - 1.0);
    const double t = std::pow(std::pow(q, alpha) / xi, inv);
    return 1.0 / (1.0 + t);
}

/// P(Delta < y) for Delta ~ f_p on [-delta, delta].
inline double deltaCdf(double y, double p, double delta)
{
    if (y <= -delta)
        return 0.0;
    if (y <= 0.0)
        return p * (y + delta) / delta;
    if (y <= delta)
        return p + (1.0 - p) * y / delta;
    return 1.0;
}

/// Occupancy-count state space of the arrival-driven chain, with
/// precomputed per-state class rates and the exact stationary law.
///
/// States are flattened occupancy digit strings (road-major; digit j of a
/// road is the count of users with residual sojourn time j+1), enumerated
/// in lexicographic order with the first digit most significant.
class StateSpace {
public:
    StateSpace(const Scenario& scenario, const RateTable& table, std::size_t cap = std::size_t{1} << 20)
        : slotCounts_(), base_(scenario.maxArrivalsPerSlot + 1)
    {
        if (table.muRate.size() != scenario.roads.size())
            throw std::invalid_argument("state space: rate table does not match scenario roads");
        if (table.suRate.size() != scenario.staticUsers.size())
            throw std::invalid_argument("state space: rate table does not match static users");
        for (const Road& r : scenario.roads)
            slotCounts_.push_back(r.segmentCount);
        totalSlots_ = std::accumulate(slotCounts_.begin(), slotCounts_.end(), 0);
        std::size_t n = 1;
        for (int i = 0; i < totalSlots_; ++i) {
            if (n > cap / static_cast<std::size_t>(base_))
                throw std::runtime_error("state space too large");
            n *= static_cast<std::size_t>(base_);
        }
        size_ = n;

        staticRateValue_ = 0.0;
        for (double r : table.suRate)
            staticRateValue_ += r;
        staticRateValue_ /= static_cast<double>(table.suRate.size());

        // per-road arrival count pmf: Binomial(A_max, theta_i)
        arrivalPmf_.resize(slotCounts_.size());
        const int amax = scenario.maxArrivalsPerSlot;
        for (std::size_t i = 0; i < slotCounts_.size(); ++i) {
            const double th = scenario.arrivalProb[i];
            arrivalPmf_[i].resize(amax + 1);
            for (int a = 0; a <= amax; ++a) {
                double binom = 1.0;
                for (int k = 0; k < a; ++k)
                    binom = binom * (amax - k) / (k + 1);
                arrivalPmf_[i][a] = binom * std::pow(th, a) * std::pow(1.0 - th, amax - a);
            }
        }

        mobileRate_.resize(size_);
        userCount_.resize(size_);
        g_.resize(size_);
        std::vector<int> occ(totalSlots_, 0);
        for (std::size_t idx = 0; idx < size_; ++idx) {
            double sum = 0.0;
            int m = 0;
            double g = 1.0;
            int j = 0;
            for (std::size_t road = 0; road < slotCounts_.size(); ++road) {
                const int l = slotCounts_[road];
                for (int t = 1; t <= l; ++t, ++j) {
                    const int c = occ[j];
                    m += c;
                    // a user with residual t sits on segment l - t + 1
                    sum += c * table.muRate[road][l - t];
                    g *= arrivalPmf_[road][c];
                }
            }
            mobileRate_[idx] = m > 0 ? sum / m : 0.0;
            userCount_[idx] = m;
            g_[idx] = g;
            // lexicographic increment (last digit fastest)
            for (int d = totalSlots_ - 1; d >= 0; --d) {
                if (++occ[d] < base_)
                    break;
                occ[d] = 0;
            }
        }

        buildArrivalCombos();
    }

    std::size_t size() const { return size_; }
    int totalSlots() const { return totalSlots_; }
    int maxArrivals() const { return base_ - 1; }
    const std::vector<int>& slotCounts() const { return slotCounts_; }

    double mobileRate(std::size_t s) const { return mobileRate_[s]; }
    double staticRate(std::size_t) const { return staticRateValue_; }
    double staticRate() const { return staticRateValue_; }
    int userCount(std::size_t s) const { return userCount_[s]; }
    double stationaryProb(std::size_t s) const { return g_[s]; }
    const std::vector<double>& stationaryDist() const { return g_; }
    const std::vector<std::vector<double>>& arrivalPmf() const { return arrivalPmf_; }

    std::vector<int> occupancy(std::size_t idx) const
    {
        std::vector<int> occ(totalSlots_);
        for (int d = totalSlots_ - 1; d >= 0; --d) {
            occ[d] = static_cast<int>(idx % base_);
            idx /= base_;
        }
        return occ;
    }

    std::size_t index(const std::vector<int>& occ) const
    {
        std::size_t idx = 0;
        for (int d = 0; d < totalSlots_; ++d)
            idx = idx * base_ + static_cast<std::size_t>(occ[d]);
        return idx;
    }

    /// Deterministic shift plus fresh arrivals at the entry slots.
    std::size_t nextState(std::size_t idx, const std::vector<int>& arrivals) const
    {
        std::vector<int> occ = occupancy(idx);
        int j = 0;
        for (std::size_t road = 0; road < slotCounts_.size(); ++road) {
            const int l = slotCounts_[road];
            if (arrivals[road] < 0 || arrivals[road] >= base_)
                throw std::invalid_argument("nextState: arrival count exceeds maxArrivalsPerSlot");
            // digit j+t-1 holds residual time t; users shift t -> t-1
            for (int t = 1; t < l; ++t)
                occ[j + t - 1] = occ[j + t];
            occ[j + l - 1] = arrivals[road];
            j += l;
        }
        return index(occ);
    }

    /// All per-road arrival count combinations with their probabilities.
    const std::vector<std::pair<std::vector<int>, double>>& arrivalCombos() const
    {
        return arrivalCombos_;
    }

private:
    void buildArrivalCombos()
    {
        std::vector<int> cur(slotCounts_.size(), 0);
        while (true) {
            double p = 1.0;
            for (std::size_t i = 0; i < cur.size(); ++i)
                p *= arrivalPmf_[i][cur[i]];
            arrivalCombos_.emplace_back(cur, p);
            int i = static_cast<int>(cur.size()) - 1;
            for (; i >= 0; --i) {
                if (++cur[i] < base_)
                    break;
                cur[i] = 0;
            }
            if (i < 0)
                break;
        }
        if (slotCounts_.empty())
            arrivalCombos_ = {{{}, 1.0}};
    }

    std::vector<int> slotCounts_;
    int base_;
    int totalSlots_ = 0;
    std::size_t size_ = 1;
    double staticRateValue_ = 0.0;
    std::vector<double> mobileRate_;
    std::vector<int> userCount_;
    std::vector<double> g_;
    std::vector<std::vector<double>> arrivalPmf_;
    std::vector<std::pair<std::vector<int>, double>> arrivalCombos_;
};

/// (R_mobile(s), R_static(s)) under equal within-class sharing.
inline std::pair<double, double> classRates(const StateSpace& space, std::size_t s)
{
    return {space.mobileRate(s), space.staticRate(s)};
}

inline PolicyEvaluation evaluatePolicy(const StateSpace& space, const ThresholdPolicy& pol)
{
    PolicyEvaluation ev;
    for (std::size_t s = 0; s < space.size(); ++s) {
        const double g = space.stationaryProb(s);
        const int a = thresholdAction(space.mobileRate(s), space.staticRate(s), pol.xi, pol.tieAction);
        if (a == 1)
            ev.muThroughput += g * space.mobileRate(s);
        else
            ev.suThroughput += g * space.staticRate(s);
    }
    ev.lambda = ev.muThroughput + pol.xi * ev.suThroughput;
    return ev;
}

inline PolicyEvaluation evaluatePolicy(const StateSpace& space, const RandomizedThresholdPolicy& pol)
{
    PolicyEvaluation ev;
    for (std::size_t s = 0; s < space.size(); ++s) {
        const double g = space.stationaryProb(s);
        const double rm = space.mobileRate(s);
        const double rs = space.staticRate(s);
        // action 1 iff Delta < rm/rs - xi; ties (measure zero) go static
        const double pOne = rm > 0.0 ? deltaCdf(rm / rs - pol.xi, pol.p, pol.delta) : 0.0;
        ev.muThroughput += g * pOne * rm;
        ev.suThroughput += g * (1.0 - pOne) * rs;
    }
    ev.lambda = ev.muThroughput + pol.xi * ev.suThroughput;
    return ev;
}

/// Alpha-moment class throughputs under the fair fractional split.
inline PolicyEvaluation evaluatePolicy(const StateSpace& space, const FairPolicy& pol)
{
    PolicyEvaluation ev;
    for (std::size_t s = 0; s < space.size(); ++s) {
        const double g = space.stationaryProb(s);
        const double rm = space.mobileRate(s);
        const double rs = space.staticRate(s);
        const double eta = fairAllocation(rm, rs, pol.xi, pol.alpha);
        if (eta > 0.0)
            ev.muThroughput += g * std::pow(eta, pol.alpha) * std::pow(rm, pol.alpha);
        ev.suThroughput += g * std::pow(1.0 - eta, pol.alpha) * std::pow(rs, pol.alpha);
    }
    ev.lambda = ev.muThroughput + pol.xi * ev.suThroughput;
    return ev;
}

/// Baseline where every user, static or mobile, gets bandwidth 1/(m+K).
inline PolicyEvaluation equalShareEvaluation(const StateSpace& space, double alpha, std::size_t numStaticUsers)
{
    PolicyEvaluation ev;
    for (std::size_t s = 0; s < space.size(); ++s) {
        const double g = space.stationaryProb(s);
        const double m = space.userCount(s);
        const double K = static_cast<double>(numStaticUsers);
        const double etaEq = m / (m + K);
        if (etaEq > 0.0)
            ev.muThroughput += g * std::pow(etaEq, alpha) * std::pow(space.mobileRate(s), alpha);
        ev.suThroughput += g * std::pow(K / (m + K), alpha) * std::pow(space.staticRate(s), alpha);
    }
    ev.lambda = ev.muThroughput + ev.suThroughput;
    return ev;
}

/// Optimal gain: greedy per-state maximization is exact because transitions
/// do not depend on the action.
inline double lambdaStar(const StateSpace& space, double xi)
{
    double lam = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s)
        lam += space.stationaryProb(s) * std::max(space.mobileRate(s), xi * space.staticRate(s));
    return lam;
}

struct RviResult {
    double gain = 0.0;
    std::vector<double> h;
    int iterations = 0;
};

/// Relative value iteration on the average-reward optimality equation;
/// the independent oracle for lambdaStar.
inline RviResult relativeValueIteration(const StateSpace& space, double xi, double tol = 1e-10,
                                        int maxIter = 100000)
{
    const std::size_t n = space.size();
    std::vector<double> h(n, 0.0), th(n, 0.0);
    std::vector<double> reward(n);
    for (std::size_t s = 0; s < n; ++s)
        reward[s] = std::max(space.mobileRate(s), xi * space.staticRate(s));

    // successor indices per (state, arrival combo)
    const auto& combos = space.arrivalCombos();
    std::vector<std::size_t> succ(n * combos.size());
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t c = 0; c < combos.size(); ++c)
            succ[s * combos.size() + c] = space.nextState(s, combos[c].first);

    RviResult out;
    for (int it = 1; it <= maxIter; ++it) {
        for (std::size_t s = 0; s < n; ++s) {
            double e = 0.0;
            for (std::size_t c = 0; c < combos.size(); ++c)
                e += combos[c].second * h[succ[s * combos.size() + c]];
            th[s] = reward[s] + e;
        }
        double lo = th[0] - h[0], hi = th[0] - h[0];
        for (std::size_t s = 1; s < n; ++s) {
            const double d = th[s] - h[s];
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        const double ref = th[0];
        for (std::size_t s = 0; s < n; ++s)
            h[s] = th[s] - ref;
        if (hi - lo <= tol) {
            out.gain = 0.5 * (lo + hi);
            out.h = std::move(h);
            out.iterations = it;
            return out;
        }
    }
    throw std::runtime_error("relativeValueIteration: no convergence within maxIter");
}

/// Sorted distinct ratios R_mobile(s)/R_static(s) over states with positive
/// mobile rate; exactly the multiplier values where the threshold policy flips.
inline std::vector<double> breakpoints(const StateSpace& space)
{
    std::vector<double> out;
    for (std::size_t s = 0; s < space.size(); ++s)
        if (space.mobileRate(s) > 0.0)
            out.push_back(space.mobileRate(s) / space.staticRate(s));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

struct ConstrainedSolution {
    double xi = 0.0;
    double p = 0.0;
    double delta = 0.0;
    double achievedStatic = 0.0;
};

/// Optimal static throughput just below / just above the threshold at xi.
inline double staticLevelBelow(const StateSpace& space, double xi)
{
    return evaluatePolicy(space, ThresholdPolicy{xi, 1}).suThroughput;
}

inline double staticLevelAbove(const StateSpace& space, double xi)
{
    return evaluatePolicy(space, ThresholdPolicy{xi, 0}).suThroughput;
}

/// Breakpoints grouped with a relative tolerance: symmetric states produce
/// rate ratios a few ulps apart that belong to the same staircase step.
inline std::vector<double> groupedBreakpoints(const StateSpace& space, double relTol = 1e-9)
{
    std::vector<double> ratios = breakpoints(space);
    std::vector<double> groups;
    for (double r : ratios) {
        if (!groups.empty() && r - groups.back() <= relTol * r + 1e-12)
            groups.back() = r; // representative: group maximum
        else
            groups.push_back(r);
    }
    return groups;
}

/// Finds the breakpoint xi* whose staircase step straddles R_0 and the mixing
/// probability p* that meets the constraint with equality.
inline ConstrainedSolution solveConstrained(const StateSpace& space, double r0)
{
    const std::vector<double> bps = groupedBreakpoints(space);
    const double rMax = space.staticRate();        // always-static value
    const double rMin = staticLevelAbove(space, 0.0); // xi = 0, ties favor static
    if (r0 > rMax + 1e-12 || r0 < rMin - 1e-12)
        throw std::runtime_error("constraint infeasible");
    if (bps.empty())
        return {0.0, 0.0, 1e-3, rMax};

    // step levels by ratio comparison, exactly matching the f_p closed form:
    // tol absorbs the few-ulp spread inside a breakpoint group
    auto level = [&](double xi, bool tieStatic) {
        double v = 0.0;
        for (std::size_t s = 0; s < space.size(); ++s) {
            const double rm = space.mobileRate(s);
            const double rs = space.staticRate(s);
            const double tol = 1e-9 * xi + 1e-12;
            bool isStatic;
            if (!(rm > 0.0))
                isStatic = true;
            else if (tieStatic)
                isStatic = rm / rs <= xi + tol;
            else
                isStatic = rm / rs < xi - tol;
            if (isStatic)
                v += space.stationaryProb(s) * rs;
        }
        return v;
    };

    for (std::size_t k = 0; k < bps.size(); ++k) {
        const double above = level(bps[k], true);
        if (above + 1e-12 >= r0) {
            const double below = level(bps[k], false);
            double p = 0.0;
            if (above > below)
                p = std::clamp((above - r0) / (above - below), 0.0, 1.0);
            // perturbation width: well inside the adjacent staircase steps yet
            // far wider than the ulp spread within the group
            double gapLo = bps[k], gapHi = std::numeric_limits<double>::infinity();
            if (k > 0)
                gapLo = bps[k] - bps[k - 1];
            if (k + 1 < bps.size())
                gapHi = bps[k + 1] - bps[k];
            double delta = 0.1 * std::min(gapLo, gapHi);
            if (!std::isfinite(delta) || delta <= 0.0)
                delta = 1e-3;
            ConstrainedSolution sol{bps[k], p, delta, 0.0};
            sol.achievedStatic =
                evaluatePolicy(space, RandomizedThresholdPolicy{sol.xi, sol.p, sol.delta}).suThroughput;
            return sol;
        }
    }
    // r0 equals the always-static plateau
    ConstrainedSolution sol{bps.back(), 0.0, 1e-3, 0.0};
    sol.achievedStatic =
        evaluatePolicy(space, RandomizedThresholdPolicy{sol.xi, sol.p, sol.delta}).suThroughput;
    return sol;
}

/// Alpha-moment optimal static throughput as a function of xi; strictly
/// increasing and continuous, so bisection finds the unique multiplier.
inline double solveConstrainedFair(const StateSpace& space, double r0, double alpha,
                                   double tol = 1e-9, int maxIter = 200)
{
    auto su = [&](double xi) { return evaluatePolicy(space, FairPolicy{xi, alpha}).suThroughput; };
    double lo = 1e-12;
    double hi = 1.0;
    if (su(lo) > r0 + tol)
        throw std::runtime_error("constraint infeasible");
    int grow = 0;
    while (su(hi) < r0 && grow++ < 60)
        hi *= 2.0;
    if (su(hi) < r0)
        throw std::runtime_error("constraint infeasible");
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < maxIter; ++it) {
        mid = 0.5 * (lo + hi);
        const double v = su(mid);
        if (std::fabs(v - r0) <= tol)
            return mid;
        (v < r0 ? lo : hi) = mid;
    }
    return mid;
}

/// Expected class rates given a location-error observation kernel
/// p(true state | observed state); rows index observed states.
inline std::pair<std::vector<double>, std::vector<double>>
posteriorRates(const std::vector<std::vector<double>>& kernel, const StateSpace& space)
{
    std::vector<double> mob(kernel.size(), 0.0), stat(kernel.size(), 0.0);
    for (std::size_t o = 0; o < kernel.size(); ++o) {
        if (kernel[o].size() != space.size())
            throw std::invalid_argument("posteriorRates: kernel row size mismatch");
        double sum = 0.0;
        for (double v : kernel[o]) {
            if (v < 0.0)
                throw std::invalid_argument("posteriorRates: negative kernel entry");
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("posteriorRates: kernel row does not sum to 1");
        for (std::size_t s = 0; s < space.size(); ++s) {
            mob[o] += kernel[o][s] * space.mobileRate(s);
            stat[o] += kernel[o][s] * space.staticRate(s);
        }
    }
    return {mob, stat};
}

} // namespace bwshare
