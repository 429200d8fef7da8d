#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "bwshare/learning.hpp"
#include "bwshare/mdp.hpp"
#include "bwshare/scenario_io.hpp"
#include "bwshare/simulator.hpp"

namespace bwshare {

struct ExperimentSpec {
    std::string command;
    std::string scenarioPath;
    std::string outDir = ".";
    double xi = std::numeric_limits<double>::quiet_NaN();
    double alpha = std::numeric_limits<double>::quiet_NaN();
    double r0 = std::numeric_limits<double>::quiet_NaN();
    double epsilon = 0.05;
    double delta = 1e-3;
    double n1 = 0.6;
    double n2 = 0.9;
    double lowerXi = 1e-3;     // B, learn4 projection floor
    double upperXi = 0.0;      // A; 0 -> derived from the rate table
    std::int64_t slots = 100000;
    std::uint64_t seed = 1;
    int reps = 1;
    std::int64_t snapshotStride = 1000;
};

namespace detail {

inline std::uint64_t deriveSeed(std::uint64_t seed, int rep)
{
    // splitmix64 over (seed, rep) so replications get decorrelated streams
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(rep + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline std::ofstream openOut(const std::filesystem::path& p)
{
    std::ofstream out(p);
    if (!out)
        throw std::runtime_error("cannot open output file: " + p.string());
    return out;
}

inline void writeRow(std::ostream& os, std::initializer_list<double> vals)
{
    char buf[64];
    bool first = true;
    for (double v : vals) {
        if (!first)
            os << ',';
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
        first = false;
    }
    os << '\n';
}

struct LearnerRun {
    Metrics metrics;
    std::shared_ptr<Controller> controller;
};

template <class MakeLearner>
std::vector<LearnerRun> runReplications(const Scenario& scenario, const StateSpace& space,
                                        const ExperimentSpec& spec, MakeLearner make)
{
    std::vector<std::future<LearnerRun>> futures;
    for (int rep = 0; rep < spec.reps; ++rep) {
        futures.push_back(std::async(std::launch::async, [&, rep] {
            LearnerRun run;
            run.controller = make();
            SimConfig cfg;
            cfg.horizonSlots = spec.slots;
            cfg.seed = deriveSeed(spec.seed, rep);
            cfg.snapshotStride = spec.snapshotStride;
            run.metrics = runEpisode(scenario, space, *run.controller, cfg);
            return run;
        }));
    }
    std::vector<LearnerRun> runs;
    for (auto& f : futures)
        runs.push_back(f.get());
    return runs;
}

inline std::filesystem::path repPath(const std::filesystem::path& dir, const std::string& stem,
                                     int rep, int reps)
{
    if (reps == 1)
        return dir / (stem + ".csv");
    return dir / (stem + "_rep" + std::to_string(rep) + ".csv");
}

} // namespace detail

/// Exact Table-1 style report: equal-share and optimal-policy class metrics
/// for the six (alpha, theta, xi) rows.
inline void commandTable1(const Scenario& base, const std::filesystem::path& outDir)
{
    struct Row {
        double alpha, theta, xi;
    };
    const Row rows[] = {{1.0, 0.1, 3.1},  {1.0, 0.01, 3.1}, {0.8, 0.1, 2.85},
                        {0.8, 0.01, 2.9}, {0.5, 0.1, 2.9},  {0.5, 0.01, 3.0}};
    auto out = detail::openOut(outDir / "table1.csv");
    out << "alpha,theta,xi,eq_mobile,eq_static,opt_mobile,opt_static\n";
    for (const Row& row : rows) {
        Scenario sc = base;
        sc.arrivalProb.assign(sc.roads.size(), row.theta);
        const RateTable table = buildRateTable(sc);
        const StateSpace space(sc, table);
        const PolicyEvaluation eq = equalShareEvaluation(space, row.alpha, sc.staticUsers.size());
        PolicyEvaluation opt;
        if (row.alpha == 1.0)
            opt = evaluatePolicy(space, ThresholdPolicy{row.xi, 0});
        else
            opt = evaluatePolicy(space, FairPolicy{row.xi, row.alpha});
        detail::writeRow(out, {row.alpha, row.theta, row.xi, eq.muThroughput, eq.suThroughput,
                               opt.muThroughput, opt.suThroughput});
    }
}

inline void commandEval(const StateSpace& space, const ExperimentSpec& spec,
                        const std::filesystem::path& outDir)
{
    if (std::isnan(spec.xi))
        throw std::invalid_argument("eval: --xi required");
    PolicyEvaluation ev;
    if (std::isnan(spec.alpha))
        // at xi = 0 the static class is worthless; break the R_m = 0 tie toward
        // the mobile class so the report shows zero static throughput
        ev = evaluatePolicy(space, ThresholdPolicy{spec.xi, spec.xi == 0.0 ? 1 : 0});
    else
        ev = evaluatePolicy(space, FairPolicy{spec.xi, spec.alpha});
    auto out = detail::openOut(outDir / "eval.csv");
    out << "xi,mobile_tput,static_tput,lambda\n";
    detail::writeRow(out, {spec.xi, ev.muThroughput, ev.suThroughput, ev.lambda});
}

inline void commandSolveConstrained(const StateSpace& space, const ExperimentSpec& spec,
                                    const std::filesystem::path& outDir)
{
    if (std::isnan(spec.r0))
        throw std::invalid_argument("solve-constrained: --r0 required");
    auto out = detail::openOut(outDir / "solve.csv");
    if (std::isnan(spec.alpha)) {
        const ConstrainedSolution sol = solveConstrained(space, spec.r0);
        out << "xi,p,delta,achieved_static\n";
        detail::writeRow(out, {sol.xi, sol.p, sol.delta, sol.achievedStatic});
    } else {
        const double xi = solveConstrainedFair(space, spec.r0, spec.alpha);
        const PolicyEvaluation ev = evaluatePolicy(space, FairPolicy{xi, spec.alpha});
        out << "xi,achieved_static\n";
        detail::writeRow(out, {xi, ev.suThroughput});
    }
}

inline void commandLearn(const Scenario& scenario, const StateSpace& space,
                         const ExperimentSpec& spec, const std::filesystem::path& outDir)
{
    const double upperXi = spec.upperXi > 0.0 ? spec.upperXi : defaultUpperXi(space);
    const StepSchedule a(spec.n1), b(spec.n2);
    const std::size_t n = space.size();

    auto make = [&]() -> std::shared_ptr<Controller> {
        if (spec.command == "learn1") {
            if (std::isnan(spec.xi))
                throw std::invalid_argument("learn1: --xi required");
            return std::make_shared<Alg1Learner>(n, spec.xi, spec.epsilon, a);
        }
        if (spec.command == "learn2") {
            if (std::isnan(spec.r0))
                throw std::invalid_argument("learn2: --r0 required");
            return std::make_shared<Alg2Learner>(n, spec.r0, spec.epsilon, spec.delta, upperXi, a, b);
        }
        if (spec.command == "learn3") {
            if (std::isnan(spec.xi) || std::isnan(spec.alpha))
                throw std::invalid_argument("learn3: --xi and --alpha required");
            return std::make_shared<Alg3Learner>(n, spec.xi, spec.alpha, a);
        }
        if (std::isnan(spec.r0) || std::isnan(spec.alpha))
            throw std::invalid_argument("learn4: --r0 and --alpha required");
        return std::make_shared<Alg4Learner>(n, spec.alpha, spec.r0, spec.lowerXi, upperXi, a);
    };

    const auto runs = detail::runReplications(scenario, space, spec, make);
    for (int rep = 0; rep < spec.reps; ++rep) {
        auto mOut = detail::openOut(detail::repPath(outDir, spec.command + "_metrics", rep, spec.reps));
        runs[rep].metrics.writeCsv(mOut);

        auto eOut = detail::openOut(detail::repPath(outDir, spec.command + "_estimates", rep, spec.reps));
        const Controller& c = *runs[rep].controller;
        if (const auto* l1 = dynamic_cast<const Alg1Learner*>(&c)) {
            eOut << "state,est_mobile,est_static,visits1,visits0\n";
            for (std::size_t s = 0; s < n; ++s)
                detail::writeRow(eOut, {static_cast<double>(s), l1->mobileEstimate(s),
                                        l1->staticEstimate(s), static_cast<double>(l1->visits1(s)),
                                        static_cast<double>(l1->visits0(s))});
        } else if (const auto* l2 = dynamic_cast<const Alg2Learner*>(&c)) {
            eOut << "state,est_mobile,est_static\n";
            for (std::size_t s = 0; s < n; ++s)
                detail::writeRow(eOut, {static_cast<double>(s), l2->mobileEstimate(s),
                                        l2->staticEstimate(s)});
        } else if (const auto* l3 = dynamic_cast<const Alg3Learner*>(&c)) {
            eOut << "state,est_mobile_alpha,est_static_alpha,visits\n";
            for (std::size_t s = 0; s < n; ++s)
                detail::writeRow(eOut, {static_cast<double>(s), l3->mobileAlphaEstimate(s),
                                        l3->staticAlphaEstimate(s),
                                        static_cast<double>(l3->visits(s))});
        }
    }
}

/// Dispatch. Exit codes: 0 ok, 2 validation error, 3 infeasible constraint,
/// 4 numerical non-convergence.
inline int runCommand(const ExperimentSpec& spec)
{
    try {
        if (spec.scenarioPath.empty())
            throw std::invalid_argument("--scenario required");
        const Scenario scenario = loadScenario(spec.scenarioPath);
        const std::filesystem::path outDir(spec.outDir);
        std::filesystem::create_directories(outDir);

        if (spec.command == "table1") {
            commandTable1(scenario, outDir);
            return 0;
        }

        const RateTable table = buildRateTable(scenario);
        const StateSpace space(scenario, table);
        if (spec.command == "eval")
            commandEval(space, spec, outDir);
        else if (spec.command == "solve-constrained")
            commandSolveConstrained(space, spec, outDir);
        else if (spec.command == "learn1" || spec.command == "learn2" || spec.command == "learn3" ||
                 spec.command == "learn4")
            commandLearn(scenario, space, spec, outDir);
        else
            throw std::invalid_argument("unknown command: " + spec.command);
        return 0;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::runtime_error& e) {
        const std::string what = e.what();
        std::cerr << "error: " << what << '\n';
        if (what.find("infeasible") != std::string::npos)
            return 3;
        return 4;
    }
}

} // namespace bwshare
