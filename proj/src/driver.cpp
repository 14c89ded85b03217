#include <chrono>
#include <cmath>
#include <sstream>
#include <sbcpn/driver.hpp>
#include <sbcpn/residual.hpp>

namespace sbcpn {

std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::line_search: return "line_search";
    case Algorithm::unit_step: return "unit_step";
    case Algorithm::vm_baseline: return "vm";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name)
{
    if (name == "line_search") return Algorithm::line_search;
    if (name == "unit_step") return Algorithm::unit_step;
    if (name == "vm") return Algorithm::vm_baseline;
    throw ParseError("unknown algorithm '" + std::string(name) + "' (expected line_search, unit_step or vm)");
}

std::string_view status_name(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::inner_failure: return "inner_failure";
    case SolveStatus::line_search_failure: return "line_search_failure";
    }
    return "?";
}

void SolverConfig::validate() const
{
    require(tau > 0.0 && tau < mu && mu < 1.0, "SolverConfig: need 0 < tau < mu < 1");
    require(theta > 0.0 && theta < 1.0, "SolverConfig: need 0 < theta < 1");
    require(max_outer >= 0, "SolverConfig: max_outer must be nonnegative");
    require(stop_tol >= 0.0, "SolverConfig: stop_tol must be nonnegative");
    require(max_inner >= 1 && max_line_search >= 1, "SolverConfig: iteration caps must be positive");
    require(vm_gamma > 0.0 && vm_gamma < 1.0, "SolverConfig: vm_gamma must lie in (0, 1)");
    require(vm_inner_iters >= 1, "SolverConfig: vm_inner_iters must be positive");
    require(!fixed_eta || *fixed_eta >= 0.0, "SolverConfig: fixed_eta must be nonnegative");
}

LineSearchResult backtracking_line_search(const std::function<double(const Vector&)>& phi_eval, const Vector& x,
                                          const Vector& d, double phi_x, double tau, double theta,
                                          Index max_trials)
{
    const double dd = d.squaredNorm();
    require(dd > 0.0, "backtracking_line_search: direction must be nonzero");
    LineSearchResult out;
    for (Index j = 0; j < max_trials; ++j) {
        const double alpha = std::pow(theta, static_cast<double>(j));
        const double trial = phi_eval(x + alpha * d);
        if (trial <= phi_x - 0.5 * tau * alpha * dd) {
            out.alpha = alpha;
            out.trials = j;
            out.phi_new = trial;
            out.ok = true;
            return out;
        }
    }
    out.trials = max_trials;
    return out;
}

namespace {

double zeta_of(const SmoothOracle& oracle, const SolverConfig& config)
{
    if (config.hessian == HessianModel::zero) return oracle.lipschitz_bound().value_or(0.0);
    return oracle.hessian_error_bound().value_or(0.0);
}

PreparedOperator prepare_block(const CompositeProblem& problem, const SolverConfig& config, const Vector& x,
                               const BlockIndexSet& block)
{
    std::unique_ptr<RestrictedOperator> op;
    if (config.hessian == HessianModel::zero)
        op = std::make_unique<ZeroOperator>(block.size());
    else
        op = problem.smooth().restricted_hessian(x, block);
    require(op && op->size() == block.size(), "oracle returned a restricted operator of the wrong size");
    return prepare_operator(std::move(op));
}

double full_curvature_floor(const CompositeProblem& problem, const SolverConfig& config, const Vector& x)
{
    if (config.hessian == HessianModel::zero) return 0.0;
    const Index n = problem.dimension();
    auto op = problem.smooth().restricted_hessian(x, BlockIndexSet::full(n));
    if (auto f = op->curvature_floor()) return *f;
    if (n <= kMaxDenseBlock) return prepare_operator(std::move(op)).curvature_floor;
    return -problem.smooth().lipschitz_bound().value();
}

struct StepContext
{
    const Vector& x;
    double phi;
    double f;
    const Vector& grad;
    const BlockIndexSet& block;
};

struct StepOutcome
{
    enum class Kind { moved, skipped, inner_failure, line_search_failure } kind = Kind::skipped;
    Vector x_next;
    double phi_next = 0.0;
    std::string message;
};

StepOutcome inner_failure(const InexactSolution& sol, Index k)
{
    StepOutcome out;
    out.kind = StepOutcome::Kind::inner_failure;
    std::ostringstream msg;
    msg << "inner solver failed at iteration " << k << " after " << sol.inner_iterations
        << " iterations (certificate " << sol.certificate_norm << ", step " << sol.step_norm << ")";
    out.message = msg.str();
    return out;
}

template <class Step>
SolveTrace outer_loop(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy& strategy,
                      Step&& step)
{
    config.validate();
    const Index n = problem.dimension();
    require(strategy.dimension() == n, "solver: sampling strategy dimension does not match the problem");
    Vector x0 = config.x0 ? *config.x0 : Vector::Zero(n);
    require(x0.size() == n, "solver: x0 has the wrong dimension");
    IterateState state(problem, std::move(x0), config.seed);

    const auto start = std::chrono::steady_clock::now();
    auto elapsed = [&] {
        if (!config.record_wall_clock) return 0.0;
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    };

    SolveTrace trace;
    Vector grad;
    for (;;) {
        const double f = problem.smooth().value_and_gradient(state.x, grad);
        const ResidualReport G = residual(problem, state.x, grad);
        IterationRecord rec;
        rec.iter = state.k;
        rec.phi = state.phi;
        rec.resid_norm = G.norm;
        rec.time_s = elapsed();
        if (config.record_iterates) trace.iterates.push_back(state.x);

        if (G.norm <= config.stop_tol || state.k >= config.max_outer) {
            trace.status = G.norm <= config.stop_tol ? SolveStatus::converged : SolveStatus::max_iter;
            trace.records.push_back(rec);
            break;
        }

        const BlockIndexSet block = strategy.sample(state.rng, &G.per_coordinate_abs);
        rec.block_size = block.size();
        rec.block_resid_norm = block.gather(G.g_full).norm();
        if (config.record_iterates) trace.blocks.push_back(block.indices());

        StepOutcome out;
        if (rec.block_resid_norm > 0.0) out = step(StepContext{state.x, state.phi, f, grad, block}, rec);
        trace.records.push_back(rec);

        if (out.kind == StepOutcome::Kind::inner_failure || out.kind == StepOutcome::Kind::line_search_failure) {
            trace.status = out.kind == StepOutcome::Kind::inner_failure ? SolveStatus::inner_failure
                                                                        : SolveStatus::line_search_failure;
            trace.message = out.message;
            break;
        }
        if (out.kind == StepOutcome::Kind::moved) {
            state.x = std::move(out.x_next);
            state.phi = out.phi_next;
        }
        ++state.k;
    }
    trace.x_final = state.x;
    trace.phi_final = state.phi;
    if (trace.message.empty())
        trace.message = std::string(status_name(trace.status)) + " after " + std::to_string(state.k) + " iterations";
    return trace;
}

} // namespace

BlockModel build_line_search_model(const CompositeProblem& problem, const SolverConfig& config, const Vector& x,
                                   const BlockIndexSet& block)
{
    const SmoothOracle& oracle = problem.smooth();
    BlockModel bm;
    bm.prepared = prepare_block(problem, config, x, block);
    const auto L = oracle.lipschitz_bound();
    std::optional<double> eta_bar;
    if (L) {
        eta_bar = eta_bar_linesearch(config.mu, *L, zeta_of(oracle, config));
        bm.eta_bar = *eta_bar;
    }
    const double floor = bm.prepared.curvature_floor;
    if (config.fixed_eta) {
        bm.eta = *config.fixed_eta;
        return bm;
    }
    switch (oracle.eta_rule()) {
    case EtaRule::shifted_floor: bm.eta = eta_linesearch_policy(floor, config.mu, eta_bar); break;
    case EtaRule::geman_mcclure: bm.eta = eta_geman_mcclure_policy(floor, config.mu); break;
    case EtaRule::biweight: bm.eta = eta_biweight_policy(floor, config.mu); break;
    }
    return bm;
}

SolveTrace run_alg1(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy)
{
    auto phi_eval = [&](const Vector& z) { return composite_value(problem, z); };
    return outer_loop(problem, config, strategy, [&](const StepContext& ctx, IterationRecord& rec) {
        const BlockModel bm = build_line_search_model(problem, config, ctx.x, ctx.block);
        rec.eta = bm.eta;
        rec.eta_bar = bm.eta_bar;
        rec.curvature_floor = bm.prepared.curvature_floor;
        const RestrictedQuadraticModel model(ctx.block.gather(ctx.grad), bm.prepared.op, bm.eta,
                                             ctx.block.gather(ctx.x),
                                             problem.regularizer().restrict_to(ctx.block), ctx.f);
        const InexactSolution sol = solve_inner(model, config.mu, config.max_inner, config.inner_solver);
        rec.inner_iters = sol.inner_iterations;
        rec.cert_norm = sol.certificate_norm;
        rec.step_norm = sol.step_norm;
        if (!sol.success) return inner_failure(sol, rec.iter);

        StepOutcome out;
        const Vector d = ctx.block.embed(sol.y_hat - model.base);
        if (d.squaredNorm() == 0.0) return out;
        const LineSearchResult ls = backtracking_line_search(phi_eval, ctx.x, d, ctx.phi, config.tau, config.theta,
                                                             config.max_line_search);
        rec.ls_trials = ls.trials;
        if (!ls.ok) {
            out.kind = StepOutcome::Kind::line_search_failure;
            out.message = "line search exhausted " + std::to_string(ls.trials) + " trials at iteration " +
                          std::to_string(rec.iter);
            return out;
        }
        rec.step_size = ls.alpha;
        out.kind = StepOutcome::Kind::moved;
        out.x_next = ctx.x + ls.alpha * d;
        out.phi_next = ls.phi_new;
        return out;
    });
}

SolveTrace run_alg2(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy)
{
    const SmoothOracle& oracle = problem.smooth();
    require(oracle.lipschitz_bound().has_value(), "run_alg2: the unit-step method needs a known Lipschitz constant");
    return outer_loop(problem, config, strategy, [&](const StepContext& ctx, IterationRecord& rec) {
        PreparedOperator prepared = prepare_block(problem, config, ctx.x, ctx.block);
        const UnitStepParameters params =
            eta_unit_policy(oracle.lipschitz_bound(), zeta_of(oracle, config), config.mu,
                            prepared.curvature_floor, full_curvature_floor(problem, config, ctx.x));
        const double eta = config.fixed_eta ? *config.fixed_eta : params.eta;
        rec.eta = eta;
        rec.eta_bar = params.eta_bar;
        rec.curvature_floor = prepared.curvature_floor;
        const RestrictedQuadraticModel model(ctx.block.gather(ctx.grad), prepared.op, eta, ctx.block.gather(ctx.x),
                                             problem.regularizer().restrict_to(ctx.block), ctx.f);
        const InexactSolution sol = solve_inner(model, config.mu, config.max_inner, config.inner_solver);
        rec.inner_iters = sol.inner_iterations;
        rec.cert_norm = sol.certificate_norm;
        rec.step_norm = sol.step_norm;
        if (!sol.success) return inner_failure(sol, rec.iter);

        StepOutcome out;
        if (sol.step_norm == 0.0) return out;
        out.kind = StepOutcome::Kind::moved;
        out.x_next = ctx.x;
        ctx.block.scatter(sol.y_hat, out.x_next);
        out.phi_next = composite_value(problem, out.x_next);
        rec.step_size = 1.0;
        return out;
    });
}

SolveTrace run_vm(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy)
{
    return outer_loop(problem, config, strategy, [&](const StepContext& ctx, IterationRecord& rec) {
        const BlockModel bm = build_line_search_model(problem, config, ctx.x, ctx.block);
        rec.eta = bm.eta;
        rec.eta_bar = bm.eta_bar;
        rec.curvature_floor = bm.prepared.curvature_floor;
        const RestrictedQuadraticModel model(ctx.block.gather(ctx.grad), bm.prepared.op, bm.eta,
                                             ctx.block.gather(ctx.x),
                                             problem.regularizer().restrict_to(ctx.block), ctx.f);
        const InexactSolution sol = sparsa_inner(model, config.vm_inner_iters);
        rec.inner_iters = sol.inner_iterations;
        rec.cert_norm = sol.certificate_norm;
        rec.step_norm = sol.step_norm;

        StepOutcome out;
        const Vector d_block = sol.y_hat - model.base;
        const double decrease = model.grad_slice.dot(d_block) + reg_value(model.reg_slice, sol.y_hat) -
                                reg_value(model.reg_slice, model.base);
        if (d_block.squaredNorm() == 0.0 || !(decrease < 0.0)) return out;

        const Vector d = ctx.block.embed(d_block);
        for (Index j = 0; j < config.max_line_search; ++j) {
            const double alpha = std::pow(config.theta, static_cast<double>(j));
            Vector trial = ctx.x + alpha * d;
            const double phi_trial = composite_value(problem, trial);
            if (phi_trial <= ctx.phi + alpha * config.vm_gamma * decrease) {
                rec.step_size = alpha;
                rec.ls_trials = j;
                out.kind = StepOutcome::Kind::moved;
                out.x_next = std::move(trial);
                out.phi_next = phi_trial;
                return out;
            }
        }
        rec.ls_trials = config.max_line_search;
        out.kind = StepOutcome::Kind::line_search_failure;
        out.message = "VM line search exhausted at iteration " + std::to_string(rec.iter);
        return out;
    });
}

SolveTrace solve(const CompositeProblem& problem, const SolverConfig& config, SamplingStrategy strategy)
{
    switch (config.algorithm) {
    case Algorithm::line_search: return run_alg1(problem, config, std::move(strategy));
    case Algorithm::unit_step: return run_alg2(problem, config, std::move(strategy));
    case Algorithm::vm_baseline: return run_vm(problem, config, std::move(strategy));
    }
    return run_alg1(problem, config, std::move(strategy));
}

} // namespace sbcpn
