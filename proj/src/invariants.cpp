#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <sbcpn/invariants.hpp>

namespace sbcpn {

void InvariantReport::fail(Index iter, const std::string& detail)
{
    if (violations == 0) first_violation = "iteration " + std::to_string(iter) + ": " + detail;
    ++violations;
}

namespace {

std::string describe(double lhs, const char* op, double rhs)
{
    std::ostringstream s;
    s.precision(17);
    s << lhs << ' ' << op << ' ' << rhs;
    return s.str();
}

double step_floor(double mu, double tau, double theta, double lipschitz)
{
    return std::min(1.0, theta * (mu - tau) / lipschitz);
}

} // namespace

InvariantReport check_sufficient_decrease(const SolveTrace& trace, double tau, double rel_tol)
{
    InvariantReport rep{"sufficient decrease", 0, 0, {}};
    const auto& r = trace.records;
    for (size_t k = 0; k + 1 < r.size(); ++k) {
        ++rep.checked;
        const double bound = r[k].phi - 0.5 * tau * r[k].step_size * r[k].step_norm * r[k].step_norm;
        if (r[k + 1].phi > bound + rel_tol * std::abs(r[k].phi))
            rep.fail(r[k].iter, describe(r[k + 1].phi, ">", bound));
    }
    return rep;
}

InvariantReport check_monotone(const SolveTrace& trace, double rel_tol)
{
    InvariantReport rep{"monotone objective", 0, 0, {}};
    const auto& r = trace.records;
    for (size_t k = 0; k + 1 < r.size(); ++k) {
        ++rep.checked;
        if (r[k + 1].phi > r[k].phi + rel_tol * std::abs(r[k].phi))
            rep.fail(r[k].iter, describe(r[k + 1].phi, ">", r[k].phi));
    }
    return rep;
}

InvariantReport check_certificates(const SolveTrace& trace, double mu)
{
    InvariantReport rep{"inexactness certificate", 0, 0, {}};
    const auto& r = trace.records;
    for (size_t k = 0; k + 1 < r.size(); ++k) {
        if (r[k].block_resid_norm == 0.0) continue;  // block skipped, no subproblem
        ++rep.checked;
        if (!(r[k].cert_norm <= 0.5 * mu * r[k].step_norm))
            rep.fail(r[k].iter, describe(r[k].cert_norm, ">", 0.5 * mu * r[k].step_norm));
    }
    return rep;
}

InvariantReport check_step_floor(const SolveTrace& trace, double mu, double tau, double theta, double lipschitz)
{
    InvariantReport rep{"step size floor", 0, 0, {}};
    const double floor = step_floor(mu, tau, theta, lipschitz);
    const auto& r = trace.records;
    for (size_t k = 0; k + 1 < r.size(); ++k) {
        if (r[k].step_norm == 0.0) continue;
        ++rep.checked;
        if (!(r[k].step_size >= floor)) rep.fail(r[k].iter, describe(r[k].step_size, "<", floor));
    }
    return rep;
}

double residual_bound_constant(double lipschitz, double zeta, double mu)
{
    const double eta_bar = mu + 2.0 * lipschitz + zeta;
    return 1.0 + lipschitz + zeta + eta_bar + 0.5 * mu;
}

InvariantReport check_residual_bound(const SolveTrace& trace, double c1)
{
    InvariantReport rep{"block residual bound", 0, 0, {}};
    const auto& r = trace.records;
    for (size_t k = 0; k + 1 < r.size(); ++k) {
        ++rep.checked;
        if (!(r[k].block_resid_norm <= c1 * r[k].step_norm))
            rep.fail(r[k].iter, describe(r[k].block_resid_norm, ">", c1 * r[k].step_norm));
    }
    return rep;
}

InvariantReport check_rate_envelope(const SolveTrace& trace, double c, double c1, double mu, double tau,
                                    double theta, double lipschitz, double phi_lb)
{
    InvariantReport rep{"rate envelope", 0, 0, {}};
    const auto& r = trace.records;
    if (r.empty()) return rep;
    const double numer = 2.0 * c1 * c1 * (r.front().phi - phi_lb) / c;
    const double denom_base = tau * step_floor(mu, tau, theta, lipschitz);
    double best = std::numeric_limits<double>::infinity();
    for (size_t K = 1; K < r.size(); ++K) {
        best = std::min(best, r[K - 1].resid_norm * r[K - 1].resid_norm);
        ++rep.checked;
        const double bound = numer / (denom_base * static_cast<double>(K));
        if (!(best <= bound)) rep.fail(static_cast<Index>(K), describe(best, ">", bound));
    }
    return rep;
}

InvariantReport check_unit_step_decrease(const SolveTrace& trace, double mu, double rel_tol)
{
    InvariantReport rep{"unit step decrease", 0, 0, {}};
    const auto& r = trace.records;
    for (size_t k = 0; k + 1 < r.size(); ++k) {
        ++rep.checked;
        const double need = 0.5 * mu * r[k].step_norm * r[k].step_norm;
        const double got = r[k].phi - r[k + 1].phi;
        if (got < need - rel_tol * std::abs(r[k].phi)) rep.fail(r[k].iter, describe(got, "<", need));
    }
    return rep;
}

InvariantReport check_phi_consistency(const CompositeProblem& problem, const SolveTrace& trace, double rel_tol)
{
    InvariantReport rep{"cached objective", 0, 0, {}};
    const size_t count = std::min(trace.records.size(), trace.iterates.size());
    for (size_t k = 0; k < count; ++k) {
        ++rep.checked;
        const double fresh = composite_value(problem, trace.iterates[k]);
        const double stored = trace.records[k].phi;
        if (std::abs(fresh - stored) > rel_tol * std::max(1.0, std::abs(fresh)))
            rep.fail(trace.records[k].iter, describe(stored, "!=", fresh));
    }
    return rep;
}

std::vector<InvariantReport> check_trace(const CompositeProblem& problem, const SolverConfig& config,
                                         const SamplingStrategy& strategy, const SolveTrace& trace)
{
    std::vector<InvariantReport> out;
    const SmoothOracle& oracle = problem.smooth();
    const auto L = oracle.lipschitz_bound();
    const double zeta = config.hessian == HessianModel::zero ? L.value_or(0.0) : oracle.hessian_error_bound().value_or(0.0);
    out.push_back(check_monotone(trace));
    if (!trace.iterates.empty()) out.push_back(check_phi_consistency(problem, trace));

    switch (config.algorithm) {
    case Algorithm::line_search:
        out.push_back(check_sufficient_decrease(trace, config.tau));
        out.push_back(check_certificates(trace, config.mu));
        if (L) {
            const double c1 = residual_bound_constant(*L, zeta, config.mu);
            out.push_back(check_step_floor(trace, config.mu, config.tau, config.theta, *L));
            out.push_back(check_residual_bound(trace, c1));
            if (strategy.kind() == SamplingKind::top_k || strategy.kind() == SamplingKind::full) {
                const auto c = strategy_constants(strategy, problem.dimension()).c;
                if (c)
                    out.push_back(check_rate_envelope(trace, *c, c1, config.mu, config.tau, config.theta, *L));
            }
        }
        break;
    case Algorithm::unit_step:
        out.push_back(check_certificates(trace, config.mu));
        out.push_back(check_unit_step_decrease(trace, config.mu));
        break;
    case Algorithm::vm_baseline: break;
    }
    return out;
}

} // namespace sbcpn
