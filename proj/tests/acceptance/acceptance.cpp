// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>
#include <sbcpn/driver.hpp>
#include <sbcpn/experiments.hpp>
#include <sbcpn/invariants.hpp>
#include <sbcpn/residual.hpp>
#include "test_util.hpp"

using namespace sbcpn;

namespace {

struct Outcome
{
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const Outcome& o)
{
    std::printf("%s [%2d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
}

void run_criterion(int id, const std::string& name, const std::function<Outcome()>& body)
{
    try {
        report(id, name, body());
    } catch (const std::exception& e) {
        report(id, name, Outcome{false, std::string("exception: ") + e.what()});
    }
}

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// Accumulates invariant reports over several runs.
struct Tally
{
    Index checked = 0;
    Index violations = 0;
    std::string first;

    void add(const std::string& run, const InvariantReport& r)
    {
        checked += r.checked;
        violations += r.violations;
        if (first.empty() && r.violations) first = run + ", " + r.first_violation;
    }
    Outcome outcome(const std::string& what) const
    {
        std::string d = std::to_string(checked) + " " + what + " checked, " + std::to_string(violations) + " violations";
        if (!first.empty()) d += " (first: " + first + ")";
        return Outcome{violations == 0 && checked > 0, d};
    }
};

struct Run
{
    std::string label;
    const CompositeProblem* problem;
    SolverConfig config;
    SolveTrace trace;
};

constexpr Index kDeskN = 512;
constexpr std::uint64_t kDeskSeed = 0;

SolverConfig desk_config()
{
    SolverConfig c;
    c.mu = 1e-4;
    c.tau = 1e-5;
    c.theta = 0.6;
    c.stop_tol = 1e-4;
    c.max_outer = 5000;
    c.record_wall_clock = false;
    return c;
}

SamplingStrategy desk_strategy(SamplingKind kind)
{
    return SamplingStrategy(kind, kind == SamplingKind::full ? kDeskN : kDeskN / 4, kDeskN);
}

} // namespace

int main()
{
    const auto t_setup = std::chrono::steady_clock::now();
    const StudentsTInstance desk = gen_students_t(kDeskN, kDeskSeed);
    const CompositeProblem st = students_t_problem(desk);
    const double L_st = 2.0 / desk.nu;

    const ClassificationInstance gm_inst = gen_classification(256, 128, 0.001, LabelCoding::zero_one, 0);
    const CompositeProblem gm = geman_mcclure_problem(gm_inst);
    std::printf("setup: Student's t n=%lld m=%lld, Geman-McClure n=256 m=128 (%.2fs)\n",
                static_cast<long long>(desk.n()), static_cast<long long>(desk.m()),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t_setup).count());

    // line-search runs shared by several criteria
    const std::vector<std::pair<std::string, SamplingKind>> strategies = {
        {"full", SamplingKind::full},
        {"uniform", SamplingKind::uniform},
        {"cyc-contig", SamplingKind::cyclic_contiguous},
        {"cyc-perm", SamplingKind::cyclic_permuted},
        {"topk", SamplingKind::top_k},
    };
    std::vector<Run> alg1_runs;
    double alg1_seconds = 0.0;
    for (const auto& [label, kind] : strategies) {
        Run r{"students_t/" + label, &st, desk_config(), {}};
        const auto t0 = std::chrono::steady_clock::now();
        r.trace = run_alg1(st, r.config, desk_strategy(kind));
        alg1_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("run %-22s %-9s %5zu iterations, |G| = %.3g\n", r.label.c_str(),
                    std::string(status_name(r.trace.status)).c_str(), r.trace.records.size() - 1,
                    r.trace.records.back().resid_norm);
        alg1_runs.push_back(std::move(r));
    }

    SolverConfig gm_cfg;
    gm_cfg.mu = 1e-5;
    gm_cfg.tau = 5e-6;
    gm_cfg.stop_tol = 1e-8;
    gm_cfg.max_outer = 10000;
    gm_cfg.record_wall_clock = false;
    std::vector<Run> gm_runs;
    for (const auto& [label, kind] :
         std::vector<std::pair<std::string, SamplingKind>>{{"full", SamplingKind::full}, {"topk", SamplingKind::top_k}}) {
        Run r{"geman_mcclure/" + label, &gm, gm_cfg, {}};
        r.trace = run_alg1(gm, gm_cfg, SamplingStrategy(kind, kind == SamplingKind::full ? 256 : 64, 256));
        std::printf("run %-22s %-9s %5zu iterations, |G| = %.3g\n", r.label.c_str(),
                    std::string(status_name(r.trace.status)).c_str(), r.trace.records.size() - 1,
                    r.trace.records.back().resid_norm);
        gm_runs.push_back(std::move(r));
    }

    Run alg2{"students_t/unit-step topk", &st, desk_config(), {}};
    alg2.config.algorithm = Algorithm::unit_step;
    alg2.trace = run_alg2(st, alg2.config, desk_strategy(SamplingKind::top_k));
    std::printf("run %-22s %-9s %5zu iterations, |G| = %.3g\n", alg2.label.c_str(),
                std::string(status_name(alg2.trace.status)).c_str(), alg2.trace.records.size() - 1,
                alg2.trace.records.back().resid_norm);

    run_criterion(1, "descent invariant, five strategies", [&] {
        Tally t;
        for (const auto& r : alg1_runs) t.add(r.label, check_sufficient_decrease(r.trace, r.config.tau, 1e-10));
        Outcome o = t.outcome("steps");
        o.detail += ", solve time " + fmt(alg1_seconds) + "s";
        if (alg1_seconds >= 60.0) o.pass = false;
        for (const auto& r : alg1_runs)
            if (r.trace.status == SolveStatus::inner_failure || r.trace.status == SolveStatus::line_search_failure) {
                o.pass = false;
                o.detail += ", " + r.label + " ended with " + std::string(status_name(r.trace.status));
            }
        return o;
    });

    run_criterion(2, "certificate invariant, all runs", [&] {
        Tally t;
        for (const auto& r : alg1_runs) t.add(r.label, check_certificates(r.trace, r.config.mu));
        for (const auto& r : gm_runs) t.add(r.label, check_certificates(r.trace, r.config.mu));
        t.add(alg2.label, check_certificates(alg2.trace, alg2.config.mu));
        return t.outcome("inner solutions");
    });

    run_criterion(3, "step size floor with L = 2/nu", [&] {
        Tally t;
        for (const auto& r : alg1_runs)
            t.add(r.label, check_step_floor(r.trace, r.config.mu, r.config.tau, r.config.theta, L_st));
        Outcome o = t.outcome("steps");
        o.detail += ", floor " + fmt(std::min(1.0, 0.6 * (1e-4 - 1e-5) / L_st));
        return o;
    });

    run_criterion(4, "block residual bound", [&] {
        Tally t;
        for (const auto& r : alg1_runs)
            t.add(r.label, check_residual_bound(r.trace, residual_bound_constant(L_st, 0.0, r.config.mu)));
        for (const auto& r : gm_runs) {
            const double L = *gm.smooth().lipschitz_bound();
            t.add(r.label, check_residual_bound(r.trace, residual_bound_constant(L, 0.0, r.config.mu)));
        }
        return t.outcome("iterations");
    });

    run_criterion(5, "rate envelope under top-k", [&] {
        const Run& r = alg1_runs.back();
        const double c = static_cast<double>(kDeskN / 4) / kDeskN;
        const double c1 = residual_bound_constant(L_st, 0.0, r.config.mu);
        Tally t;
        t.add(r.label, check_rate_envelope(r.trace, c, c1, r.config.mu, r.config.tau, r.config.theta, L_st, 0.0));
        return t.outcome("prefixes K");
    });

    run_criterion(6, "unit-step decrease", [&] {
        Tally t;
        t.add(alg2.label, check_unit_step_decrease(alg2.trace, alg2.config.mu, 1e-10));
        Outcome o = t.outcome("steps");
        o.detail += ", status " + std::string(status_name(alg2.trace.status));
        if (alg2.trace.status == SolveStatus::inner_failure) o.pass = false;
        return o;
    });

    run_criterion(7, "convergence at the stopping tolerances", [&] {
        Outcome o;
        std::vector<std::string> parts;
        for (const auto& r : alg1_runs) {
            if (r.label != "students_t/full" && r.label != "students_t/topk" && r.label != "students_t/cyc-perm")
                continue;
            const bool ok = r.trace.status == SolveStatus::converged && r.trace.records.back().resid_norm <= 1e-4 &&
                            r.trace.records.size() - 1 <= 5000;
            o.pass = o.pass && ok;
            parts.push_back(r.label + " " + std::to_string(r.trace.records.size() - 1) + " it");
        }
        for (const auto& r : gm_runs) {
            Vector g;
            r.problem->smooth().value_and_gradient(r.trace.x_final, g);
            const bool ok = r.trace.status == SolveStatus::converged && g.norm() <= 1e-8 &&
                            r.trace.records.size() - 1 <= 10000;
            o.pass = o.pass && ok;
            parts.push_back(r.label + " " + std::to_string(r.trace.records.size() - 1) + " it, |grad| " +
                            fmt(g.norm()));
        }
        for (size_t i = 0; i < parts.size(); ++i) o.detail += (i ? "; " : "") + parts[i];
        return o;
    });

    run_criterion(8, "full sampling equals a direct inexact proximal Newton loop", [&] {
        SolverConfig c = desk_config();
        c.record_iterates = true;
        const SolveTrace tr = run_alg1(st, c, desk_strategy(SamplingKind::full));

        // reference loop written against the building blocks only
        std::vector<Vector> xs;
        Vector x = Vector::Zero(kDeskN);
        double phi = composite_value(st, x);
        const BlockIndexSet all = BlockIndexSet::full(kDeskN);
        auto phi_eval = [&](const Vector& z) { return composite_value(st, z); };
        for (Index k = 0; k <= c.max_outer; ++k) {
            xs.push_back(x);
            Vector grad;
            const double f = st.smooth().value_and_gradient(x, grad);
            if (residual(st, x, grad).norm <= c.stop_tol) break;
            const BlockModel bm = build_line_search_model(st, c, x, all);
            const RestrictedQuadraticModel model(grad, bm.prepared.op, bm.eta, x, st.regularizer(), f);
            const InexactSolution sol = solve_inner(model, c.mu, c.max_inner, c.inner_solver);
            if (!sol.success) throw std::runtime_error("reference loop: inner failure");
            const Vector d = sol.y_hat - x;
            const auto ls = backtracking_line_search(phi_eval, x, d, phi, c.tau, c.theta, c.max_line_search);
            if (!ls.ok) throw std::runtime_error("reference loop: line search failure");
            x = x + ls.alpha * d;
            phi = ls.phi_new;
        }
        double worst = 0.0;
        const bool same_length = xs.size() == tr.iterates.size();
        for (size_t k = 0; k < std::min(xs.size(), tr.iterates.size()); ++k)
            worst = std::max(worst, (xs[k] - tr.iterates[k]).norm() / std::max(1.0, xs[k].norm()));
        return Outcome{same_length && worst <= 1e-12, std::to_string(xs.size()) + " vs " +
                                                           std::to_string(tr.iterates.size()) +
                                                           " iterates, max relative gap " + fmt(worst)};
    });

    run_criterion(9, "prox against brute-force minimizer", [&] {
        std::mt19937_64 rng(9);
        double worst = 0.0;
        Index cases = 0;
        for (int variant = 0; variant < 3; ++variant)
            for (int trial = 0; trial < 100; ++trial) {
                const double lambda = tk::uniform(rng, 0.01, 3.0);
                const double t = tk::uniform(rng, 0.01, 3.0);
                ++cases;
                if (variant == 2) {
                    const Index w = tk::uniform_index(rng, 1, 6);
                    const Vector u = tk::random_vector(rng, w, 2.0);
                    const auto reg = SeparableRegularizer::group_l2({w}, lambda);
                    const double nu = u.norm();
                    const double r = tk::ternary_min(
                        [&](double s) { return t * lambda * s + 0.5 * (s - nu) * (s - nu); }, 0.0, nu + 1.0, 1e-9);
                    const Vector want = nu == 0.0 ? Vector(Vector::Zero(w)) : Vector((r / nu) * u);
                    worst = std::max(worst, (prox_piece(reg, 0, u, t) - want).cwiseAbs().maxCoeff());
                    continue;
                }
                const double u = tk::uniform(rng, -5.0, 5.0);
                const auto reg = variant == 0 ? SeparableRegularizer::zero(1) : SeparableRegularizer::l1(1, lambda);
                const double scale = variant == 0 ? 0.0 : lambda;
                const double want = tk::ternary_min(
                    [&](double z) { return t * scale * std::abs(z) + 0.5 * (z - u) * (z - u); }, -20.0, 20.0, 1e-9);
                Vector uu(1);
                uu[0] = u;
                worst = std::max(worst, std::abs(prox_piece(reg, 0, uu, t)[0] - want));
            }
        return Outcome{worst <= 1e-6, std::to_string(cases) + " cases, max error " + fmt(worst)};
    });

    run_criterion(10, "restricted residual identity", [&] {
        std::mt19937_64 rng(10);
        const ClassificationInstance bw_inst = gen_classification(40, 30, 0.01, LabelCoding::plus_minus_one, 1);
        const BiweightGroupProblem bw = biweight_group_instance(bw_inst);
        const ClassificationInstance small_gm = gen_classification(40, 30, 0.001, LabelCoding::zero_one, 2);
        const CompositeProblem gz = geman_mcclure_problem(small_gm);
        const std::vector<std::pair<std::string, const CompositeProblem*>> problems = {
            {"zero", &gz}, {"l1", &st}, {"group", &bw.problem}};
        double worst = 0.0;
        Index cases = 0;
        for (const auto& [name, p] : problems) {
            const Index n = p->dimension();
            const auto& reg = p->regularizer();
            for (int trial = 0; trial < 50; ++trial) {
                const Vector x = tk::random_vector(rng, n, 0.5);
                Vector grad;
                p->smooth().value_and_gradient(x, grad);
                std::vector<Index> idx;
                if (reg.kind() == RegularizerKind::group_l2) {
                    for (Index q = 0; q < reg.piece_count(); ++q)
                        if (tk::uniform(rng, 0, 1) < 0.4) {
                            const auto [b, e] = reg.piece_range(q);
                            for (Index i = b; i < e; ++i) idx.push_back(i);
                        }
                    if (idx.empty()) idx = {0, 1, 2, 3, 4};
                } else {
                    idx = tk::random_subset(rng, n);
                }
                const BlockIndexSet S(idx, n);
                const Vector full = residual(*p, x, grad).g_full;
                worst = std::max(worst, (residual_restricted(*p, x, grad, S) - S.gather(full)).cwiseAbs().maxCoeff());
                ++cases;
            }
        }
        return Outcome{worst <= 1e-12, std::to_string(cases) + " cases, max gap " + fmt(worst)};
    });

    run_criterion(11, "gradient and Hessian finite-difference checks", [&] {
        std::mt19937_64 rng(11);
        const StudentsTOracle st_small(gen_students_t(128, 1));
        const GemanMcClureOracle gm_o(gen_classification(64, 48, 0.001, LabelCoding::zero_one, 3));
        const BiweightOracle bw_o(gen_classification(64, 48, 0.001, LabelCoding::plus_minus_one, 4));
        const std::vector<std::pair<std::string, const SmoothOracle*>> oracles = {
            {"students_t", &st_small}, {"geman_mcclure", &gm_o}, {"biweight", &bw_o}};
        double worst_grad = 0.0;
        for (const auto& [name, o] : oracles)
            for (int trial = 0; trial < 20; ++trial)
                worst_grad = std::max(worst_grad,
                                      gradient_check(*o, tk::random_vector(rng, o->dimension(), 0.5), 1e-5));

        double worst_hess = 0.0;
        for (Index n : {8, 16, 32}) {
            const GemanMcClureOracle o(gen_classification(n, 2 * n, 0.001, LabelCoding::zero_one, 100 + n));
            const Vector x = tk::random_vector(rng, n);
            const double h = 1e-4;
            const Matrix Q = materialize(*o.restricted_hessian(x, BlockIndexSet::full(n)));
            for (Index i = 0; i < n; ++i)
                for (Index j = 0; j < n; ++j) {
                    Vector ei = Vector::Zero(n), ej = Vector::Zero(n);
                    ei[i] = h;
                    ej[j] = h;
                    const double fd = (o.value(x + ei + ej) - o.value(x + ei - ej) - o.value(x - ei + ej) +
                                       o.value(x - ei - ej)) /
                                      (4 * h * h);
                    worst_hess = std::max(worst_hess, std::abs(fd - Q(i, j)));
                }
        }
        return Outcome{worst_grad <= 1e-5 && worst_hess <= 1e-4,
                       "max gradient error " + fmt(worst_grad) + " over 60 points, max Hessian error " +
                           fmt(worst_hess) + " for n in {8,16,32}"};
    });

    run_criterion(12, "top-k inequality", [&] {
        std::mt19937_64 rng(12);
        Index bad = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            const Index n = tk::uniform_index(rng, 1, 200);
            const Index kk = tk::uniform_index(rng, 1, n);
            SamplingStrategy top(SamplingKind::top_k, kk, n);
            const Vector r = tk::random_vector(rng, n);
            const Vector a = r.cwiseAbs();
            const BlockIndexSet S = top.sample(rng, &a);
            if (!(S.gather(r).squaredNorm() * static_cast<double>(n) >= static_cast<double>(kk) * r.squaredNorm()))
                ++bad;
        }
        return Outcome{bad == 0, "1000 vectors, " + std::to_string(bad) + " violations"};
    });

    run_criterion(13, "zero-Hessian reduction to proximal gradient", [&] {
        SolverConfig c = desk_config();
        c.hessian = HessianModel::zero;
        c.fixed_eta = L_st;
        c.max_outer = 20;
        c.stop_tol = 0.0;
        c.seed = 13;
        c.record_iterates = true;
        const SolveTrace tr = run_alg1(st, c, desk_strategy(SamplingKind::uniform));
        double worst = 0.0;
        Index unit = 0, steps = 0;
        for (size_t k = 0; k + 1 < tr.records.size(); ++k) {
            const Vector& x = tr.iterates[k];
            const BlockIndexSet S(tr.blocks[k], kDeskN);
            const Vector g = st.smooth().gradient(x);
            Vector want = x;
            S.scatter(prox_full(st.regularizer().restrict_to(S), S.gather(x) - S.gather(g) / L_st, 1.0 / L_st), want);
            worst = std::max(worst, (tr.iterates[k + 1] - want).norm());
            ++steps;
            unit += tr.records[k].step_size == 1.0;
        }
        return Outcome{steps == 20 && unit == steps && worst <= 1e-10,
                       std::to_string(steps) + " iterations, " + std::to_string(unit) +
                           " with alpha = 1, max gap " + fmt(worst)};
    });

    run_criterion(14, "superlinear tail under top-k (observational)", [&] {
        SolverConfig ref_cfg = desk_config();
        ref_cfg.stop_tol = 1e-10;
        ref_cfg.max_outer = 10000;
        const SolveTrace ref = run_alg1(st, ref_cfg, desk_strategy(SamplingKind::full));
        if (ref.status != SolveStatus::converged) return Outcome{false, "reference run did not converge"};

        SolverConfig c = desk_config();
        c.stop_tol = 1e-8;
        c.record_iterates = true;
        const SolveTrace tr = run_alg1(st, c, desk_strategy(SamplingKind::top_k));
        const auto& xs = tr.iterates;
        if (tr.status != SolveStatus::converged || xs.size() < 6)
            return Outcome{false, "top-k run ended with " + std::to_string(xs.size()) + " iterates"};
        std::vector<double> ratio;
        for (size_t k = 0; k + 1 < xs.size(); ++k)
            ratio.push_back((xs[k + 1] - ref.x_final).norm() / (xs[k] - ref.x_final).norm());
        const size_t first = ratio.size() - 5;
        bool small = true;
        Index decreasing = 0, compared = 0;
        std::string list;
        for (size_t i = first; i < ratio.size(); ++i) {
            small = small && ratio[i] < 0.5;
            if (i > 0) {
                ++compared;
                decreasing += ratio[i] < ratio[i - 1];
            }
            list += (i > first ? ", " : "") + fmt(ratio[i]);
        }
        return Outcome{small && decreasing >= 4,
                       "last ratios " + list + "; decreasing in " + std::to_string(decreasing) + " of " +
                           std::to_string(compared) + " steps"};
    });

    std::printf("%d of 14 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
