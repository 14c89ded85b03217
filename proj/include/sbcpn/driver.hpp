#pragma once
#include <functional>
#include <optional>
#include <string>
#include <vector>
#include <sbcpn/problem.hpp>
#include <sbcpn/sampling.hpp>
#include <sbcpn/subproblem.hpp>

namespace sbcpn {

enum class Algorithm { line_search, unit_step, vm_baseline };
enum class HessianModel { oracle, zero };
enum class SolveStatus { converged, max_iter, inner_failure, line_search_failure };

std::string_view algorithm_name(Algorithm a);
Algorithm parse_algorithm(std::string_view name);
std::string_view status_name(SolveStatus s);

struct SolverConfig
{
    double mu = 1e-4;
    double tau = 1e-5;
    double theta = 0.6;
    Index max_outer = 5000;
    double stop_tol = 1e-4;
    Algorithm algorithm = Algorithm::line_search;
    std::uint64_t seed = 0;

    double vm_gamma = 1e-4;
    Index vm_inner_iters = 10;

    Index max_inner = 500;
    Index max_line_search = 60;
    InnerSolver inner_solver = InnerSolver::automatic;
    HessianModel hessian = HessianModel::oracle;
    /// Overrides every eta policy when set.
    std::optional<double> fixed_eta;

    bool record_iterates = false;
    /// When false every time_s is 0, which makes traces byte-reproducible.
    bool record_wall_clock = true;
    std::optional<Vector> x0;

    /// Throws ContractViolation unless 0 < tau < mu < 1 and 0 < theta < 1.
    void validate() const;
};

/*
 * One record per iterate x^k. The step fields describe the transition to
 * x^{k+1} and are zero on the final record.
 */
struct IterationRecord
{
    Index iter = 0;
    double time_s = 0.0;
    double phi = 0.0;
    double resid_norm = 0.0;
    double step_size = 0.0;
    Index ls_trials = 0;
    Index block_size = 0;
    Index inner_iters = 0;
    double cert_norm = 0.0;
    double step_norm = 0.0;   // ||d_k||

    double block_resid_norm = 0.0;   // ||G_{S_k}(y^k)||
    double eta = 0.0;
    double eta_bar = 0.0;            // 0 when L_g is unknown
    double curvature_floor = 0.0;
};

struct SolveTrace
{
    std::vector<IterationRecord> records;
    SolveStatus status = SolveStatus::max_iter;
    std::string message;
    Vector x_final;
    double phi_final = 0.0;
    /// x^k and S_k per record, only filled when record_iterates is set.
    std::vector<Vector> iterates;
    std::vector<std::vector<Index>> blocks;
};

struct LineSearchResult
{
    double alpha = 0.0;
    Index trials = 0;
    double phi_new = 0.0;
    bool ok = false;
};

/*
 * alpha = theta^j with the smallest j >= 0 such that
 *   phi(x + alpha d) <= phi_x - (tau/2) alpha ||d||^2.
 * `trials` counts the rejected candidates (j). Requires d != 0.
 */
LineSearchResult backtracking_line_search(const std::function<double(const Vector&)>& phi_eval, const Vector& x,
                                          const Vector& d, double phi_x, double tau, double theta,
                                          Index max_trials);

SolveTrace run_alg1(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy);
SolveTrace run_alg2(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy);
SolveTrace run_vm(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy);

/// Dispatches on config.algorithm.
SolveTrace solve(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy);

/*
 * Everything the outer loop needs about the restricted model at (x, S):
 * the prepared operator and the eta chosen by the oracle's rule.
 */
struct BlockModel
{
    PreparedOperator prepared;
    double eta = 0.0;
    double eta_bar = 0.0;
};

BlockModel build_line_search_model(const CompositeProblem& problem, const SolverConfig& config, const Vector& x,
                                   const BlockIndexSet& block);

} // namespace sbcpn
