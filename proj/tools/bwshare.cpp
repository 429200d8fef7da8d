#include <CLI11.hpp>

#include "bwshare/commands.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"single-cell bandwidth sharing: exact solvers, learning runs, reports"};
    app.require_subcommand(1);

    bwshare::ExperimentSpec spec;

    auto addCommon = [&](CLI::App* cmd) {
        cmd->add_option("--scenario", spec.scenarioPath, "scenario JSON file")->required();
        cmd->add_option("--out", spec.outDir, "output directory (default: .)");
    };
    auto addLearn = [&](CLI::App* cmd) {
        addCommon(cmd);
        cmd->add_option("--epsilon", spec.epsilon, "exploration probability (default 0.05)");
        cmd->add_option("--delta", spec.delta, "multiplier perturbation width (default 1e-3)");
        cmd->add_option("--n1", spec.n1, "fast step exponent, in (1/2,1] (default 0.6)");
        cmd->add_option("--n2", spec.n2, "slow step exponent, in (1/2,1] (default 0.9)");
        cmd->add_option("--lower-xi", spec.lowerXi, "multiplier floor B (default 1e-3)");
        cmd->add_option("--upper-xi", spec.upperXi, "multiplier cap A (default: from rate table)");
        cmd->add_option("--slots", spec.slots, "horizon in slots (default 100000)");
        cmd->add_option("--seed", spec.seed, "RNG seed (default 1)");
        cmd->add_option("--reps", spec.reps, "replication count (default 1)");
        cmd->add_option("--snapshot-stride", spec.snapshotStride,
                        "slots between metric snapshots (default 1000)");
    };

    addCommon(app.add_subcommand("table1", "exact equal-share vs optimal report, six rows"));

    auto* evalCmd = app.add_subcommand("eval", "exact policy evaluation");
    addCommon(evalCmd);
    evalCmd->add_option("--xi", spec.xi, "threshold multiplier")->required();
    evalCmd->add_option("--alpha", spec.alpha, "fairness exponent; omit for the 0/1 threshold policy");

    auto* solveCmd = app.add_subcommand("solve-constrained", "meet a static-class target exactly");
    addCommon(solveCmd);
    solveCmd->add_option("--r0", spec.r0, "static-class throughput target")->required();
    solveCmd->add_option("--alpha", spec.alpha, "fairness exponent; omit for threshold randomization");

    auto* l1 = app.add_subcommand("learn1", "threshold policy learning, fixed multiplier");
    addLearn(l1);
    l1->add_option("--xi", spec.xi, "threshold multiplier")->required();

    auto* l2 = app.add_subcommand("learn2", "two-timescale constrained threshold learning");
    addLearn(l2);
    l2->add_option("--r0", spec.r0, "static-class throughput target")->required();

    auto* l3 = app.add_subcommand("learn3", "fair-split learning, fixed multiplier");
    addLearn(l3);
    l3->add_option("--xi", spec.xi, "fairness multiplier")->required();
    l3->add_option("--alpha", spec.alpha, "fairness exponent")->required();

    auto* l4 = app.add_subcommand("learn4", "fair-split constrained learning");
    addLearn(l4);
    l4->add_option("--r0", spec.r0, "static-class alpha-moment target")->required();
    l4->add_option("--alpha", spec.alpha, "fairness exponent")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    spec.command = app.get_subcommands().front()->get_name();
    return bwshare::runCommand(spec);
}
