#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bwshare/controller.hpp"
#include "bwshare/mdp.hpp"

namespace bwshare {

/// Step sizes a(t) = t^{-n} with n in (1/2, 1], so that sum a(t) diverges
/// while sum a(t)^2 stays finite.
class StepSchedule {
public:
    explicit StepSchedule(double exponent)
        : exponent_(exponent)
    {
        if (!(exponent > 0.5 && exponent <= 1.0))
            throw std::invalid_argument("step schedule exponent must lie in (1/2, 1]");
    }

    double exponent() const { return exponent_; }

    double operator()(std::int64_t t) const
    {
        if (t < 1)
            throw std::invalid_argument("step schedule: t must be >= 1");
        return std::pow(static_cast<double>(t), -exponent_);
    }

private:
    double exponent_;
};

/// Draw Delta ~ f_p: uniform on [-delta, 0] with probability p, uniform on
/// (0, delta] otherwise.
inline double sampleDelta(double p, double delta, Rng& rng)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < p)
        return -delta * unit(rng);
    return delta * (1.0 - unit(rng));
}

// ---------------------------------------------------------------------------
// Fixed-policy controllers

class FixedThresholdController : public Controller {
public:
    FixedThresholdController(const StateSpace& space, ThresholdPolicy policy)
        : space_(space), policy_(policy)
    {
    }

    double decide(std::size_t s, Rng&) override
    {
        return thresholdAction(space_.mobileRate(s), space_.staticRate(s), policy_.xi, policy_.tieAction);
    }

    std::pair<double, double> multipliers() const override { return {policy_.xi, 0.0}; }

private:
    const StateSpace& space_;
    ThresholdPolicy policy_;
};

class FixedRandomizedThresholdController : public Controller {
public:
    FixedRandomizedThresholdController(const StateSpace& space, RandomizedThresholdPolicy policy)
        : space_(space), policy_(policy)
    {
    }

    double decide(std::size_t s, Rng& rng) override
    {
        const double delta = sampleDelta(policy_.p, policy_.delta, rng);
        return thresholdAction(space_.mobileRate(s), space_.staticRate(s), policy_.xi + delta, 0);
    }

    std::pair<double, double> multipliers() const override { return {policy_.xi, policy_.p}; }

private:
    const StateSpace& space_;
    RandomizedThresholdPolicy policy_;
};

class FixedFairController : public Controller {
public:
    FixedFairController(const StateSpace& space, FairPolicy policy)
        : space_(space), policy_(policy)
    {
    }

    double decide(std::size_t s, Rng&) override
    {
        return fairAllocation(space_.mobileRate(s), space_.staticRate(s), policy_.xi, policy_.alpha);
    }

    std::pair<double, double> multipliers() const override { return {policy_.xi, 0.0}; }

private:
    const StateSpace& space_;
    FairPolicy policy_;
};

// ---------------------------------------------------------------------------
// Algorithm 1: single-timescale learning of the unconstrained threshold policy

class Alg1Learner : public Controller {
public:
    Alg1Learner(std::size_t numStates, double xi, double epsilon, StepSchedule a)
        : xi_(xi), epsilon_(epsilon), a_(a),
          estMobile_(numStates, 1.0), estStatic_(numStates, 1.0),
          visits1_(numStates, 0), visits0_(numStates, 0)
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("epsilon must lie in (0,1)");
    }

    double decide(std::size_t s, Rng& rng) override
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng) < epsilon_)
            return unit(rng) < 0.5 ? 1.0 : 0.0; // forced exploration, fair coin
        return thresholdAction(estMobile_[s], estStatic_[s], xi_, 0);
    }

    void update(const SlotFeedback& fb) override
    {
        if (fb.eta == 1.0 && fb.hasMobileSample) {
            ++visits1_[fb.state];
            estMobile_[fb.state] += a_(visits1_[fb.state]) * (fb.mobilePerUnitBw - estMobile_[fb.state]);
        } else if (fb.eta == 0.0 && fb.hasStaticSample) {
            ++visits0_[fb.state];
            estStatic_[fb.state] += a_(visits0_[fb.state]) * (fb.staticPerUnitBw - estStatic_[fb.state]);
        }
    }

    std::pair<double, double> multipliers() const override { return {xi_, 0.0}; }

    double mobileEstimate(std::size_t s) const { return estMobile_[s]; }
    double staticEstimate(std::size_t s) const { return estStatic_[s]; }
    std::int64_t visits1(std::size_t s) const { return visits1_[s]; }
    std::int64_t visits0(std::size_t s) const { return visits0_[s]; }
    double xi() const { return xi_; }
    double epsilon() const { return epsilon_; }

private:
    double xi_;
    double epsilon_;
    StepSchedule a_;
    std::vector<double> estMobile_, estStatic_;
    std::vector<std::int64_t> visits1_, visits0_;
};

// ---------------------------------------------------------------------------
// Algorithm 2: two-timescale constrained learning with f_p randomization

class Alg2Learner : public Controller {
public:
    Alg2Learner(std::size_t numStates, double r0, double epsilon, double delta, double upperXi,
                StepSchedule a, StepSchedule b)
        : r0_(r0), epsilon_(epsilon), delta_(delta), upperXi_(upperXi), a_(a), b_(b),
          xi_(upperXi / 2.0), p_(0.5),
          estMobile_(numStates, 1.0), estStatic_(numStates, 1.0),
          visits1_(numStates, 0), visits0_(numStates, 0)
    {
        if (!(epsilon > 0.0 && epsilon < 1.0))
            throw std::invalid_argument("epsilon must lie in (0,1)");
        if (!(delta > 0.0))
            throw std::invalid_argument("delta must be > 0");
        if (!(b.exponent() > a.exponent()))
            throw std::invalid_argument("timescales require n1 < n2");
    }

    double decide(std::size_t s, Rng& rng) override
    {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        if (unit(rng) < epsilon_)
            return unit(rng) < 0.5 ? 1.0 : 0.0;
        const double d = sampleDelta(p_, delta_, rng);
        return thresholdAction(estMobile_[s], estStatic_[s], xi_ + d, 0);
    }

    void update(const SlotFeedback& fb) override
    {
        ++tau_;
        if (fb.eta == 1.0 && fb.hasMobileSample) {
            ++visits1_[fb.state];
            estMobile_[fb.state] += a_(visits1_[fb.state]) * (fb.mobilePerUnitBw - estMobile_[fb.state]);
        } else if (fb.eta == 0.0 && fb.hasStaticSample) {
            ++visits0_[fb.state];
            estStatic_[fb.state] += a_(visits0_[fb.state]) * (fb.staticPerUnitBw - estStatic_[fb.state]);
        }
        const double staticTerm = (fb.eta == 0.0 && fb.hasStaticSample) ? fb.staticPerUnitBw : 0.0;
        p_ = std::clamp(p_ + a_(tau_) * (staticTerm - r0_), 0.0, 1.0);
        xi_ = std::clamp(xi_ + b_(tau_) * (r0_ - staticTerm), 0.0, upperXi_);
    }

    std::pair<double, double> multipliers() const override { return {xi_, p_}; }

    double xi() const { return xi_; }
    double p() const { return p_; }
    double mobileEstimate(std::size_t s) const { return estMobile_[s]; }
    double staticEstimate(std::size_t s) const { return estStatic_[s]; }

private:
    double r0_, epsilon_, delta_, upperXi_;
    StepSchedule a_, b_;
    double xi_, p_;
    std::int64_t tau_ = 0;
    std::vector<double> estMobile_, estStatic_;
    std::vector<std::int64_t> visits1_, visits0_;
};

// ---------------------------------------------------------------------------
// Algorithm 3: alpha-fair unconstrained learning (no exploration needed,
// the allocation is interior)

class Alg3Learner : public Controller {
public:
    Alg3Learner(std::size_t numStates, double xi, double alpha, StepSchedule a)
        : xi_(xi), alpha_(alpha), a_(a),
          estMobileAlpha_(numStates, 1.0), estStaticAlpha_(numStates, 1.0), visits_(numStates, 0)
    {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("alpha must lie in (0,1)");
        if (!(xi > 0.0))
            throw std::invalid_argument("xi must be > 0");
    }

    double decide(std::size_t s, Rng&) override { return allocation(s, xi_); }

    void update(const SlotFeedback& fb) override { updateEstimates(fb); }

    std::pair<double, double> multipliers() const override { return {xi_, 0.0}; }

    double mobileAlphaEstimate(std::size_t s) const { return estMobileAlpha_[s]; }
    double staticAlphaEstimate(std::size_t s) const { return estStaticAlpha_[s]; }
    std::int64_t visits(std::size_t s) const { return visits_[s]; }
    double alpha() const { return alpha_; }

protected:
    double allocation(std::size_t s, double xi) const
    {
        if (!(estMobileAlpha_[s] > 0.0))
            return 0.0;
        const double inv = 1.0 / (alpha_ - 1.0);
        const double t = std::pow(estMobileAlpha_[s] / (xi * estStaticAlpha_[s]), inv);
        return 1.0 / (1.0 + t);
    }

    void updateEstimates(const SlotFeedback& fb)
    {
        ++visits_[fb.state];
        const double step = a_(visits_[fb.state]);
        if (fb.hasMobileSample)
            estMobileAlpha_[fb.state] +=
                step * (std::pow(fb.mobilePerUnitBw, alpha_) - estMobileAlpha_[fb.state]);
        if (fb.hasStaticSample)
            estStaticAlpha_[fb.state] +=
                step * (std::pow(fb.staticPerUnitBw, alpha_) - estStaticAlpha_[fb.state]);
    }

    double xi_;
    double alpha_;
    StepSchedule a_;
    std::vector<double> estMobileAlpha_, estStaticAlpha_;
    std::vector<std::int64_t> visits_;
};

// ---------------------------------------------------------------------------
// Algorithm 4: alpha-fair constrained learning; the multiplier drifts toward
// the root of the static-class alpha constraint.

class Alg4Learner : public Alg3Learner {
public:
    Alg4Learner(std::size_t numStates, double alpha, double r0, double lowerXi, double upperXi,
                StepSchedule a, bool weightedStaticSample = true)
        : Alg3Learner(numStates, std::clamp(upperXi / 2.0, lowerXi, upperXi), alpha, a),
          r0_(r0), lowerXi_(lowerXi), upperXi_(upperXi), weighted_(weightedStaticSample)
    {
        if (!(lowerXi > 0.0 && upperXi > lowerXi))
            throw std::invalid_argument("require 0 < B < A");
    }

    void update(const SlotFeedback& fb) override
    {
        updateEstimates(fb);
        ++tau_;
        double sample = 0.0;
        if (fb.hasStaticSample)
            sample = weighted_ ? std::pow((1.0 - fb.eta) * fb.staticPerUnitBw, alpha_)
                               : std::pow(fb.staticPerUnitBw, alpha_);
        xi_ = std::clamp(xi_ + a_(tau_) * (r0_ - sample), lowerXi_, upperXi_);
    }

    double xi() const { return xi_; }

private:
    double r0_, lowerXi_, upperXi_;
    bool weighted_;
    std::int64_t tau_ = 0;
};

/// Default multiplier cap: twice the largest per-state rate ratio, so the
/// always-static plateau exceeds any feasible target.
inline double defaultUpperXi(const StateSpace& space)
{
    double maxRatio = 0.0;
    for (std::size_t s = 0; s < space.size(); ++s)
        if (space.mobileRate(s) > 0.0)
            maxRatio = std::max(maxRatio, space.mobileRate(s) / space.staticRate(s));
    return maxRatio > 0.0 ? 2.0 * maxRatio : 1.0;
}

} // namespace bwshare
