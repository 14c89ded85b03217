#pragma once
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include <sbcpn/config.hpp>
#include <sbcpn/invariants.hpp>

namespace sbcpn {

struct BuiltProblem
{
    CompositeProblem problem;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::string> warnings;
};

BuiltProblem build_problem(const ExperimentConfig& cfg);
SamplingStrategy build_strategy(const ExperimentConfig& cfg, const CompositeProblem& problem);

/// Concurrent trial cap from SBCPN_MAX_THREADS, else the hardware concurrency (at least 1).
unsigned trial_thread_cap();

/// Runs one solve per seed, at most trial_thread_cap() at a time; results keep the seed order.
std::vector<SolveTrace> run_trials(const CompositeProblem& problem, const ExperimentConfig& cfg,
                                   const std::vector<std::uint64_t>& seeds, bool record_iterates);

struct ExperimentResult
{
    std::vector<SolveTrace> trials;
    std::optional<SolveTrace> reference;
    std::vector<std::string> files;
    std::vector<std::string> warnings;
    bool all_converged = false;
};

/*
 * Writes into cfg.output_dir: trial_<t>.csv per trial, average.csv,
 * reference_distance.csv (when cfg.reference is set) and metadata.txt.
 */
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CheckResult
{
    std::vector<std::vector<InvariantReport>> per_trial;
    std::vector<SolveStatus> statuses;
    bool ok = false;
};

/// Runs the trials without writing files and checks every applicable invariant.
CheckResult check_experiment(const ExperimentConfig& cfg);

} // namespace sbcpn
