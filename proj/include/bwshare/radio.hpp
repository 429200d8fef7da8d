#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "bwshare/geometry.hpp"

namespace bwshare {

/// Base-station field. Only power ratios matter; txPowers are dimensionless.
struct BsLayout {
    std::vector<Point> positions;
    std::vector<double> txPowers;
    std::size_t servingIndex = 0;

    friend bool operator==(const BsLayout&, const BsLayout&) = default;

    void validate() const
    {
        if (positions.empty())
            throw std::invalid_argument("layout.positions: empty");
        if (txPowers.size() != positions.size())
            throw std::invalid_argument("layout.txPowers: size mismatch with positions");
        for (double p : txPowers)
            if (!(p > 0.0))
                throw std::invalid_argument("layout.txPowers: must be > 0");
        if (servingIndex >= positions.size())
            throw std::invalid_argument("layout.servingIndex: out of range");
        for (std::size_t i = 0; i < positions.size(); ++i)
            for (std::size_t j = i + 1; j < positions.size(); ++j)
                if (positions[i] == positions[j])
                    throw std::invalid_argument("layout.positions: duplicate station position");
    }
};

/// Power-law path loss with a near-field distance clamp. The shadow gain hook
/// is a deterministic per-link multiplier; identity when unset.
struct PropagationModel {
    double pathLossExponent = 4.0;
    double minDistance = 0.5;
    std::function<double(std::size_t bsIndex, const Point& rx)> shadowGain; // nullptr -> 1

    void validate() const
    {
        if (!(pathLossExponent > 2.0))
            throw std::invalid_argument("propagation.pathLossExponent: must be > 2");
        if (!(minDistance > 0.0))
            throw std::invalid_argument("propagation.minDistance: must be > 0");
    }

    friend bool operator==(const PropagationModel& a, const PropagationModel& b)
    {
        return a.pathLossExponent == b.pathLossExponent && a.minDistance == b.minDistance;
    }
};

inline double sirAt(const Point& p, const BsLayout& layout, const PropagationModel& prop)
{
    const double beta = prop.pathLossExponent;
    // powers enter only through their ratio to the serving station, so a
    // common scale factor cancels before any rounding
    const double pServ = layout.txPowers[layout.servingIndex];
    double signal = 0.0;
    double interference = 0.0;
    for (std::size_t k = 0; k < layout.positions.size(); ++k) {
        const double d = std::max(distance(p, layout.positions[k]), prop.minDistance);
        double rx = (layout.txPowers[k] / pServ) * std::pow(d, -beta);
        if (prop.shadowGain)
            rx *= prop.shadowGain(k, p);
        if (k == layout.servingIndex)
            signal = rx;
        else
            interference += rx;
    }
    if (!(interference > 0.0))
        throw std::runtime_error("degenerate layout: zero total interference");
    return signal / interference;
}

/// Shannon-style rate per unit bandwidth, bits per slot.
inline double ratePerUnitBw(double sir)
{
    if (!(sir >= 0.0) || !std::isfinite(sir))
        throw std::invalid_argument("ratePerUnitBw: sir must be finite and >= 0");
    return std::log2(1.0 + sir);
}

/// Finite ergodic Markov fading chain with bounded gains and stationary mean 1.
struct FadingProcess {
    std::vector<double> gains;                    // one per chain state
    std::vector<std::vector<double>> transition;  // row-stochastic

    friend bool operator==(const FadingProcess&, const FadingProcess&) = default;

    static FadingProcess identity()
    {
        return FadingProcess{{1.0}, {{1.0}}};
    }

    /// Two gains {0.5, 1.5}, symmetric switch probability 0.1.
    static FadingProcess twoState()
    {
        return FadingProcess{{0.5, 1.5}, {{0.9, 0.1}, {0.1, 0.9}}};
    }

    std::size_t numStates() const { return gains.size(); }

    /// Stationary law, by solving pi P = pi with normalization.
    std::vector<double> stationary() const
    {
        const std::size_t n = gains.size();
        if (n == 1)
            return {1.0};
        // Solve (P^T - I) pi = 0 with sum(pi) = 1 via Gaussian elimination,
        // replacing the last equation by the normalization row.
        std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = 0; j < n; ++j)
                a[i][j] = transition[j][i] - (i == j ? 1.0 : 0.0);
        }
        for (std::size_t j = 0; j < n; ++j)
            a[n - 1][j] = 1.0;
        a[n - 1][n] = 1.0;
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::fabs(a[r][col]) > std::fabs(a[piv][col]))
                    piv = r;
            std::swap(a[piv], a[col]);
            if (std::fabs(a[col][col]) < 1e-14)
                throw std::runtime_error("fading: stationary distribution is not unique");
            for (std::size_t r = 0; r < n; ++r) {
                if (r == col)
                    continue;
                const double f = a[r][col] / a[col][col];
                for (std::size_t c = col; c <= n; ++c)
                    a[r][c] -= f * a[col][c];
            }
        }
        std::vector<double> pi(n);
        for (std::size_t i = 0; i < n; ++i)
            pi[i] = a[i][n] / a[i][i];
        return pi;
    }

    double stationaryMeanGain() const
    {
        const auto pi = stationary();
        double mean = 0.0;
        for (std::size_t i = 0; i < gains.size(); ++i)
            mean += pi[i] * gains[i];
        return mean;
    }

    void validate() const
    {
        if (gains.empty())
            throw std::invalid_argument("fading.gains: empty");
        for (double g : gains)
            if (!(g > 0.0) || !std::isfinite(g))
                throw std::invalid_argument("fading.gains: must be positive and finite");
        if (transition.size() != gains.size())
            throw std::invalid_argument("fading.transition: row count mismatch");
        for (const auto& row : transition) {
            if (row.size() != gains.size())
                throw std::invalid_argument("fading.transition: column count mismatch");
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0)
                    throw std::invalid_argument("fading.transition: negative entry");
                sum += p;
            }
            if (std::fabs(sum - 1.0) > 1e-12)
                throw std::invalid_argument("fading.transition: row does not sum to 1");
        }
        if (!irreducible())
            throw std::invalid_argument("fading.transition: chain not irreducible");
        if (!aperiodic())
            throw std::invalid_argument("fading.transition: chain not aperiodic");
        if (std::fabs(stationaryMeanGain() - 1.0) > 1e-9)
            throw std::invalid_argument("fading.gains: stationary mean gain must equal 1");
    }

    bool irreducible() const
    {
        const std::size_t n = gains.size();
        auto reach = [&](std::size_t from, bool transpose) {
            std::vector<char> seen(n, 0);
            std::vector<std::size_t> stack{from};
            seen[from] = 1;
            while (!stack.empty()) {
                const std::size_t u = stack.back();
                stack.pop_back();
                for (std::size_t v = 0; v < n; ++v) {
                    const double p = transpose ? transition[v][u] : transition[u][v];
                    if (p > 0.0 && !seen[v]) {
                        seen[v] = 1;
                        stack.push_back(v);
                    }
                }
            }
            return seen;
        };
        const auto fwd = reach(0, false);
        const auto bwd = reach(0, true);
        for (std::size_t i = 0; i < n; ++i)
            if (!fwd[i] || !bwd[i])
                return false;
        return true;
    }

    /// Chain period; requires irreducibility.
    int period() const
    {
        const std::size_t n = gains.size();
        std::vector<int> level(n, -1);
        std::vector<std::size_t> queue{0};
        level[0] = 0;
        int g = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const std::size_t u = queue[qi];
            for (std::size_t v = 0; v < n; ++v) {
                if (transition[u][v] <= 0.0)
                    continue;
                if (level[v] < 0) {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
                }
            }
        }
        return g == 0 ? 1 : g;
    }

    bool aperiodic() const { return period() == 1; }
};

/// One chain transition; returns the next state index and its gain.
template <class Rng>
std::pair<std::size_t, double> fadingStep(const FadingProcess& proc, std::size_t current, Rng& rng)
{
    if (current >= proc.numStates())
        throw std::invalid_argument("fadingStep: state index out of range");
    const auto& row = proc.transition[current];
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    std::size_t next = row.size() - 1;
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (u < row[j]) {
            next = j;
            break;
        }
        u -= row[j];
    }
    return {next, proc.gains[next]};
}

/// Draw a chain state from the stationary law (used when a user appears).
template <class Rng>
std::size_t fadingStationaryDraw(const FadingProcess& proc, const std::vector<double>& pi, Rng& rng)
{
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (std::size_t j = 0; j < pi.size(); ++j) {
        if (u < pi[j])
            return j;
        u -= pi[j];
    }
    return pi.size() - 1;
}

/// Per-unit-bandwidth rates at every road segment center and static user.
struct RateTable {
    std::vector<std::vector<double>> muRate; // [road][segment]
    std::vector<double> suRate;              // [static user]

    friend bool operator==(const RateTable&, const RateTable&) = default;
};

} // namespace bwshare
