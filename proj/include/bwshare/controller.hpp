#pragma once

#include <cstddef>
#include <random>

namespace bwshare {

using Rng = std::mt19937_64;

/// Per-slot feedback from the base station to a learner. Samples are
/// per-unit-bandwidth class downloads; a class that received zero bandwidth
/// produces no sample that slot.
struct SlotFeedback {
    std::size_t state = 0;
    double eta = 0.0;
    bool hasMobileSample = false;
    double mobilePerUnitBw = 0.0;
    bool hasStaticSample = false;
    double staticPerUnitBw = 0.0;
};

/// A bandwidth-sharing decision maker driven by the simulator. Fixed policies
/// ignore update(); learners adapt from feedback.
class Controller {
public:
    virtual ~Controller() = default;

    /// Fraction of bandwidth for the mobile class this slot.
    virtual double decide(std::size_t state, Rng& rng) = 0;

    virtual void update(const SlotFeedback&) {}

    /// Current (xi, p) iterates for trajectory snapshots.
    virtual std::pair<double, double> multipliers() const { return {0.0, 0.0}; }
};

} // namespace bwshare
