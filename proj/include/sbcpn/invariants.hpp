#pragma once
#include <string>
#include <vector>
#include <sbcpn/driver.hpp>

namespace sbcpn {

/// Outcome of checking one property over every applicable record of a trace.
struct InvariantReport
{
    std::string name;
    Index checked = 0;
    Index violations = 0;
    std::string first_violation;

    bool ok() const { return violations == 0; }
    void fail(Index iter, const std::string& detail);
};

/// phi(x^{k+1}) <= phi(x^k) - (tau/2) alpha_k ||d_k||^2, up to rel_tol * |phi(x^k)|.
InvariantReport check_sufficient_decrease(const SolveTrace& trace, double tau, double rel_tol = 1e-10);
/// Non-increasing objective values.
InvariantReport check_monotone(const SolveTrace& trace, double rel_tol = 1e-10);
/// ||cert|| <= (mu/2) ||y_hat - y|| on every record that solved a subproblem.
InvariantReport check_certificates(const SolveTrace& trace, double mu);
/// alpha_k >= min{1, theta (mu - tau) / L} on every line-search step.
InvariantReport check_step_floor(const SolveTrace& trace, double mu, double tau, double theta, double lipschitz);

/// c1 = 1 + L + zeta + eta_bar + mu/2 with eta_bar = mu + 2L + zeta.
double residual_bound_constant(double lipschitz, double zeta, double mu);
/// ||G_{S_k}(y^k)|| <= c1 ||d_k||.
InvariantReport check_residual_bound(const SolveTrace& trace, double c1);

/*
 * min_{k<K} ||G(x^k)||^2 <= (1/c) 2 c1^2 (phi(x^0) - phi_lb) / (tau min{1, theta (mu - tau)/L} K)
 * for every K >= 1 covered by the trace.
 */
InvariantReport check_rate_envelope(const SolveTrace& trace, double c, double c1, double mu, double tau,
                                    double theta, double lipschitz, double phi_lb = 0.0);

/// phi(x^k) - phi(x^{k+1}) >= (mu/2) ||x^{k+1} - x^k||^2, up to rel_tol * |phi(x^k)|.
InvariantReport check_unit_step_decrease(const SolveTrace& trace, double mu, double rel_tol = 1e-10);

/// Stored phi equals a recomputation at the stored iterates (needs record_iterates).
InvariantReport check_phi_consistency(const CompositeProblem& problem, const SolveTrace& trace,
                                      double rel_tol = 1e-12);

/// Every property that applies to the algorithm, sampling rule and oracle metadata.
std::vector<InvariantReport> check_trace(const CompositeProblem& problem, const SolverConfig& config,
                                         const SamplingStrategy& strategy, const SolveTrace& trace);

} // namespace sbcpn
