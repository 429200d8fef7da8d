#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "bwshare/radio.hpp"

namespace bwshare {

/// A directed line segment crossed by mobile users at constant speed.
/// Segment k (1-based) spans travel distances [(k-1)*v*sigma, k*v*sigma]
/// from the entry point.
struct Road {
    Point entry;
    Point direction; // unit vector
    int segmentCount = 0;

    friend bool operator==(const Road&, const Road&) = default;
};

struct Scenario {
    BsLayout layout;
    PropagationModel prop;
    Rect cellBounds;
    std::vector<Point> staticUsers;
    std::vector<Road> roads;
    double slotSeconds = 0.0;
    double velocity = 0.0;               // m/s
    std::vector<double> arrivalProb;     // theta_i per road
    int maxArrivalsPerSlot = 1;          // A_max per road
    FadingProcess fading = FadingProcess::identity();

    double segmentLength() const { return velocity * slotSeconds; }

    Point segmentCenter(std::size_t road, int segment) const
    {
        const Road& r = roads.at(road);
        const double d = (static_cast<double>(segment) - 0.5) * segmentLength();
        return {r.entry.x + r.direction.x * d, r.entry.y + r.direction.y * d};
    }

    void validate() const
    {
        layout.validate();
        prop.validate();
        if (!(slotSeconds > 0.0))
            throw std::invalid_argument("slotSeconds: must be > 0");
        if (!(velocity > 0.0))
            throw std::invalid_argument("velocity: must be > 0");
        if (staticUsers.empty())
            throw std::invalid_argument("staticUsers: at least one required");
        for (const Point& p : staticUsers)
            if (!cellBounds.contains(p))
                throw std::invalid_argument("staticUsers: position outside cellBounds");
        if (arrivalProb.size() != roads.size())
            throw std::invalid_argument("arrivalProb: size mismatch with roads");
        for (double th : arrivalProb)
            if (!(th >= 0.0 && th <= 1.0))
                throw std::invalid_argument("arrivalProb: must lie in [0,1]");
        if (maxArrivalsPerSlot < 1)
            throw std::invalid_argument("maxArrivalsPerSlot: must be >= 1");
        for (std::size_t i = 0; i < roads.size(); ++i) {
            const Road& r = roads[i];
            if (r.segmentCount < 1)
                throw std::invalid_argument("roads.segments: must be >= 1");
            const double norm = std::hypot(r.direction.x, r.direction.y);
            if (std::fabs(norm - 1.0) > 1e-9)
                throw std::invalid_argument("roads.direction: must be a unit vector");
            for (int k = 1; k <= r.segmentCount; ++k)
                if (!cellBounds.contains(segmentCenter(i, k)))
                    throw std::invalid_argument("roads: segment center outside cellBounds");
        }
        fading.validate();
    }

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

inline RateTable buildRateTable(const Scenario& scenario)
{
    RateTable table;
    table.muRate.resize(scenario.roads.size());
    for (std::size_t i = 0; i < scenario.roads.size(); ++i) {
        const int segs = scenario.roads[i].segmentCount;
        table.muRate[i].reserve(segs);
        for (int k = 1; k <= segs; ++k)
            table.muRate[i].push_back(
                ratePerUnitBw(sirAt(scenario.segmentCenter(i, k), scenario.layout, scenario.prop)));
    }
    table.suRate.reserve(scenario.staticUsers.size());
    for (const Point& p : scenario.staticUsers)
        table.suRate.push_back(ratePerUnitBw(sirAt(p, scenario.layout, scenario.prop)));
    return table;
}

/// 21x21 station grid with 100 m spacing, serving cell at the origin,
/// six static users and one road along y = 10 with ten 10 m segments.
inline Scenario gridScenario(double arrivalProb = 0.1)
{
    Scenario s;
    for (int i = -10; i <= 10; ++i)
        for (int j = -10; j <= 10; ++j)
            s.layout.positions.push_back({100.0 * i, 100.0 * j});
    s.layout.txPowers.assign(s.layout.positions.size(), 1.0);
    s.layout.servingIndex = 10 * 21 + 10; // station at the origin
    s.prop = {4.0, 0.5, nullptr};
    s.cellBounds = {-50.0, 50.0, -50.0, 50.0};
    s.staticUsers = {{20, 20}, {20, -20}, {-40, 20}, {20, -40}, {-40, -40}, {-40, 40}};
    s.roads = {Road{{-50.0, 10.0}, {1.0, 0.0}, 10}};
    s.slotSeconds = 0.5;
    s.velocity = 20.0;
    s.arrivalProb = {arrivalProb};
    s.maxArrivalsPerSlot = 1;
    s.fading = FadingProcess::identity();
    return s;
}

} // namespace bwshare
