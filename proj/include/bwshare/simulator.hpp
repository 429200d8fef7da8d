#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

#include "bwshare/controller.hpp"
#include "bwshare/mdp.hpp"
#include "bwshare/scenario.hpp"

namespace bwshare {

struct SimConfig {
    std::int64_t horizonSlots = 0;
    std::uint64_t seed = 1;
    double metricsWindow = 0.2;       // trailing fraction of the horizon
    std::int64_t snapshotStride = 0;  // 0 -> no snapshots
    bool recordPerSlot = false;
};

struct SlotRecord {
    std::uint32_t state = 0;
    double eta = 0.0;
    double mobileDownload = 0.0;
    double staticDownload = 0.0;
};

struct Snapshot {
    std::int64_t slot = 0;
    double mobileTput = 0.0; // time-average to date, bits/slot
    double staticTput = 0.0;
    double xi = 0.0;
    double p = 0.0;
};

struct Metrics {
    std::int64_t slots = 0;
    double mobileTotal = 0.0;
    double staticTotal = 0.0;
    double trailingMobile = 0.0; // sums over the trailing window
    double trailingStatic = 0.0;
    std::int64_t trailingSlots = 0;
    std::vector<Snapshot> snapshots;
    std::vector<SlotRecord> perSlot;
    std::vector<std::int64_t> stateVisits;

    double mobileThroughput() const { return slots > 0 ? mobileTotal / slots : 0.0; }
    double staticThroughput() const { return slots > 0 ? staticTotal / slots : 0.0; }
    double trailingMobileThroughput() const
    {
        return trailingSlots > 0 ? trailingMobile / trailingSlots : 0.0;
    }
    double trailingStaticThroughput() const
    {
        return trailingSlots > 0 ? trailingStatic / trailingSlots : 0.0;
    }

    void writeCsv(std::ostream& os) const
    {
        os << "slot,mobile_tput,static_tput,xi,p\n";
        char buf[160];
        for (const Snapshot& s : snapshots) {
            std::snprintf(buf, sizeof(buf), "%lld,%.17g,%.17g,%.17g,%.17g\n",
                          static_cast<long long>(s.slot), s.mobileTput, s.staticTput, s.xi, s.p);
            os << buf;
        }
    }
};

/// Per-road arrival counts: Binomial(A_max, theta_i) draws (Bernoulli when
/// A_max = 1).
template <class RngT>
std::vector<int> drawArrivals(const Scenario& scenario, RngT& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<int> arrivals(scenario.roads.size(), 0);
    for (std::size_t i = 0; i < scenario.roads.size(); ++i)
        for (int a = 0; a < scenario.maxArrivalsPerSlot; ++a)
            if (unit(rng) < scenario.arrivalProb[i])
                ++arrivals[i];
    return arrivals;
}

/// Realized class downloads for one slot given the per-user fading gains.
/// mobileGains is road-major, residual-time ascending, one gain per user.
inline std::pair<double, double> realizeDownloads(const std::vector<int>& occupancy,
                                                  const std::vector<int>& slotCounts, double eta,
                                                  const RateTable& table,
                                                  const std::vector<double>& mobileGains,
                                                  const std::vector<double>& staticGains)
{
    double mobilePerUnitBw = 0.0;
    int m = 0;
    for (int c : occupancy)
        m += c;
    if (m > 0) {
        std::size_t u = 0;
        int j = 0;
        for (std::size_t road = 0; road < slotCounts.size(); ++road) {
            const int l = slotCounts[road];
            for (int t = 1; t <= l; ++t, ++j)
                for (int k = 0; k < occupancy[j]; ++k)
                    mobilePerUnitBw += table.muRate[road][l - t] * mobileGains[u++];
        }
        mobilePerUnitBw /= m;
    }
    double staticPerUnitBw = 0.0;
    for (std::size_t j = 0; j < table.suRate.size(); ++j)
        staticPerUnitBw += table.suRate[j] * staticGains[j];
    staticPerUnitBw /= static_cast<double>(table.suRate.size());
    return {eta * mobilePerUnitBw, (1.0 - eta) * staticPerUnitBw};
}

/// Slotted closed loop: observe state, decide, fade, realize, feed back,
/// update, admit arrivals. Deterministic for a fixed (config, seed).
inline Metrics runEpisode(const Scenario& scenario, const StateSpace& space, Controller& controller,
                          const SimConfig& config)
{
    Rng rng(config.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    const FadingProcess& fading = scenario.fading;
    const std::vector<double> fadingPi = fading.stationary();
    const std::size_t numStatic = scenario.staticUsers.size();
    const auto& slotCounts = space.slotCounts();

    // occupancy digits and, aligned with them, one fading-chain state per user
    std::vector<int> occupancy(space.totalSlots(), 0);
    std::vector<std::vector<std::size_t>> mobileChains(space.totalSlots());
    std::vector<std::size_t> staticChains(numStatic);
    for (std::size_t j = 0; j < numStatic; ++j)
        staticChains[j] = fadingStationaryDraw(fading, fadingPi, rng);

    Metrics metrics;
    metrics.stateVisits.assign(space.size(), 0);
    const std::int64_t trailingStart =
        config.horizonSlots - static_cast<std::int64_t>(config.metricsWindow * config.horizonSlots);

    std::vector<double> mobileGains;
    std::vector<double> staticGains(numStatic);

    const RateTable table = buildRateTable(scenario);

    for (std::int64_t slot = 1; slot <= config.horizonSlots; ++slot) {
        const std::size_t stateIdx = space.index(occupancy);
        ++metrics.stateVisits[stateIdx];

        const double eta = controller.decide(stateIdx, rng);

        // advance fading: static users first, then mobiles road-major
        for (std::size_t j = 0; j < numStatic; ++j) {
            auto [next, gain] = fadingStep(fading, staticChains[j], rng);
            staticChains[j] = next;
            staticGains[j] = gain;
        }
        mobileGains.clear();
        for (auto& slotChains : mobileChains)
            for (std::size_t& cs : slotChains) {
                auto [next, gain] = fadingStep(fading, cs, rng);
                cs = next;
                mobileGains.push_back(gain);
            }

        const auto [mobileDl, staticDl] =
            realizeDownloads(occupancy, slotCounts, eta, table, mobileGains, staticGains);

        SlotFeedback fb;
        fb.state = stateIdx;
        fb.eta = eta;
        if (eta > 0.0) {
            fb.hasMobileSample = true;
            fb.mobilePerUnitBw = mobileDl / eta;
        }
        if (eta < 1.0) {
            fb.hasStaticSample = true;
            fb.staticPerUnitBw = staticDl / (1.0 - eta);
        }
        controller.update(fb);

        metrics.mobileTotal += mobileDl;
        metrics.staticTotal += staticDl;
        if (slot > trailingStart) {
            metrics.trailingMobile += mobileDl;
            metrics.trailingStatic += staticDl;
            ++metrics.trailingSlots;
        }
        if (config.recordPerSlot)
            metrics.perSlot.push_back(
                {static_cast<std::uint32_t>(stateIdx), eta, mobileDl, staticDl});
        if (config.snapshotStride > 0 && slot % config.snapshotStride == 0) {
            const auto [xi, p] = controller.multipliers();
            metrics.snapshots.push_back({slot, metrics.mobileTotal / slot,
                                         metrics.staticTotal / slot, xi, p});
        }

        // state transition: shift residual times, admit fresh arrivals
        const std::vector<int> arrivals = drawArrivals(scenario, rng);
        int j = 0;
        for (std::size_t road = 0; road < slotCounts.size(); ++road) {
            const int l = slotCounts[road];
            for (int t = 1; t < l; ++t) {
                occupancy[j + t - 1] = occupancy[j + t];
                mobileChains[j + t - 1] = std::move(mobileChains[j + t]);
            }
            occupancy[j + l - 1] = arrivals[road];
            mobileChains[j + l - 1].clear();
            for (int k = 0; k < arrivals[road]; ++k)
                mobileChains[j + l - 1].push_back(fadingStationaryDraw(fading, fadingPi, rng));
            j += l;
        }
    }
    metrics.slots = config.horizonSlots;
    return metrics;
}

} // namespace bwshare
