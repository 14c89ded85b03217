#include <memory>
#include <gtest/gtest.h>
#include <sbcpn/driver.hpp>
#include <sbcpn/experiments.hpp>
#include <sbcpn/invariants.hpp>
#include <sbcpn/residual.hpp>
#include "test_util.hpp"

using namespace sbcpn;

namespace {

CompositeProblem random_quadratic(std::uint64_t seed, Index n, SeparableRegularizer reg, double lo = 0.5)
{
    std::mt19937_64 rng(seed);
    const Matrix H = tk::random_spd(rng, n, lo, 3.0);
    return CompositeProblem(std::make_shared<QuadraticOracle>(H, tk::random_vector(rng, n)), std::move(reg));
}

SolverConfig quiet(SolverConfig c = {})
{
    c.record_wall_clock = false;
    return c;
}

} // namespace

TEST(LineSearch, AcceptsUnitStep)
{
    auto phi = [](const Vector& z) { return 0.5 * z.squaredNorm(); };
    const Vector x = Vector::Constant(1, 1.0);
    const Vector d = Vector::Constant(1, -2.0 / 3.0);
    const auto r = backtracking_line_search(phi, x, d, 0.5, 0.25, 0.5, 60);
    ASSERT_TRUE(r.ok);
    EXPECT_EQ(r.alpha, 1.0);
    EXPECT_EQ(r.trials, 0);
    EXPECT_NEAR(r.phi_new, 1.0 / 18.0, 1e-15);
    EXPECT_LE(r.phi_new, 0.5 - 0.125 * 4.0 / 9.0);
}

TEST(LineSearch, OneBacktrack)
{
    // phi(z) = z^3 - 2z from x = 0 with d = 2: phi(2) = 4 fails, phi(1) = -1 passes
    auto phi = [](const Vector& z) { return z[0] * z[0] * z[0] - 2.0 * z[0]; };
    const Vector x = Vector::Zero(1);
    const Vector d = Vector::Constant(1, 2.0);
    const double tau = 0.01, theta = 0.5;
    EXPECT_GT(phi(x + d), 0.0 - 0.5 * tau * 4.0);
    EXPECT_LE(phi(x + theta * d), 0.0 - 0.5 * tau * theta * 4.0);
    const auto r = backtracking_line_search(phi, x, d, 0.0, tau, theta, 60);
    ASSERT_TRUE(r.ok);
    EXPECT_EQ(r.alpha, theta);
    EXPECT_EQ(r.trials, 1);
}

TEST(LineSearch, RejectsZeroDirectionAndReportsExhaustion)
{
    auto phi = [](const Vector& z) { return z.squaredNorm(); };
    EXPECT_THROW(backtracking_line_search(phi, Vector::Ones(2), Vector::Zero(2), 2.0, 0.1, 0.5, 60),
                 ContractViolation);
    // ascent direction can never be accepted
    const auto r = backtracking_line_search(phi, Vector::Ones(2), Vector::Ones(2), 2.0, 0.1, 0.5, 5);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.trials, 5);
}

TEST(SolverConfig, Validation)
{
    SolverConfig c;
    EXPECT_NO_THROW(c.validate());
    c.tau = c.mu;
    EXPECT_THROW(c.validate(), ContractViolation);
    c = SolverConfig{};
    c.theta = 1.0;
    EXPECT_THROW(c.validate(), ContractViolation);
    c = SolverConfig{};
    c.mu = 1.0;
    EXPECT_THROW(c.validate(), ContractViolation);
    EXPECT_EQ(parse_algorithm("vm"), Algorithm::vm_baseline);
    EXPECT_EQ(parse_algorithm(algorithm_name(Algorithm::unit_step)), Algorithm::unit_step);
    EXPECT_THROW(parse_algorithm("newton"), ParseError);
}

TEST(Alg1, QuadraticFullSamplingConvergesQuickly)
{
    const auto p = random_quadratic(1, 8, SeparableRegularizer::zero(8));
    SolverConfig c = quiet();
    c.stop_tol = 1e-10;
    const auto tr = run_alg1(p, c, SamplingStrategy(SamplingKind::full, 8, 8));
    EXPECT_EQ(tr.status, SolveStatus::converged);
    EXPECT_LE(tr.records.size(), 4u);
    EXPECT_LE(tr.records.back().resid_norm, 1e-10);
    for (const auto& rep : check_trace(p, c, SamplingStrategy(SamplingKind::full, 8, 8), tr))
        EXPECT_TRUE(rep.ok()) << rep.name << ": " << rep.first_violation;
}

TEST(Alg1, TraceRecordsAndFinalState)
{
    const auto p = random_quadratic(2, 10, SeparableRegularizer::l1(10, 0.2));
    SolverConfig c = quiet();
    c.record_iterates = true;
    c.stop_tol = 1e-8;
    const SamplingStrategy st(SamplingKind::cyclic_permuted, 3, 10);
    const auto tr = run_alg1(p, c, st);
    ASSERT_EQ(tr.status, SolveStatus::converged);
    ASSERT_EQ(tr.iterates.size(), tr.records.size());
    EXPECT_EQ(tr.blocks.size() + 1, tr.records.size());
    for (size_t k = 0; k < tr.records.size(); ++k) EXPECT_EQ(tr.records[k].iter, static_cast<Index>(k));
    const auto& last = tr.records.back();
    EXPECT_EQ(last.step_size, 0.0);
    EXPECT_EQ(last.step_norm, 0.0);
    EXPECT_EQ(last.block_size, 0);
    EXPECT_EQ(tr.x_final, tr.iterates.back());
    EXPECT_EQ(tr.phi_final, last.phi);
    for (const auto& rep : check_trace(p, c, st, tr)) EXPECT_TRUE(rep.ok()) << rep.name << ": " << rep.first_violation;
}

TEST(Alg1, RemarkTwoReduction)
{
    // Q = 0 and eta = L: the step is the blockwise prox-gradient update with alpha = 1
    std::mt19937_64 rng(3);
    const Index n = 12;
    const Matrix H = tk::random_spd(rng, n, 0.2, 2.0);
    auto oracle = std::make_shared<QuadraticOracle>(H, tk::random_vector(rng, n));
    const double L = *oracle->lipschitz_bound();
    const double lambda = 0.3;
    const CompositeProblem p(oracle, SeparableRegularizer::l1(n, lambda));
    SolverConfig c = quiet();
    c.hessian = HessianModel::zero;
    c.fixed_eta = L;
    c.max_outer = 20;
    c.stop_tol = 0.0;
    c.record_iterates = true;
    const auto tr = run_alg1(p, c, SamplingStrategy(SamplingKind::cyclic_permuted, 4, n));
    ASSERT_EQ(tr.records.size(), 21u);
    for (size_t k = 0; k + 1 < tr.records.size(); ++k) {
        const Vector& x = tr.iterates[k];
        const BlockIndexSet S(tr.blocks[k], n);
        const Vector g = oracle->gradient(x);
        Vector expect = x;
        S.scatter(prox_full(SeparableRegularizer::l1(S.size(), lambda), S.gather(x) - S.gather(g) / L, 1.0 / L),
                  expect);
        EXPECT_LE((tr.iterates[k + 1] - expect).norm(), 1e-10);
        if (tr.records[k].step_norm > 0) { EXPECT_EQ(tr.records[k].step_size, 1.0); }
    }
}

TEST(Alg1, InnerFailureStopsWithPartialTrace)
{
    const auto p = random_quadratic(4, 30, SeparableRegularizer::l1(30, 0.01), 1e-3);
    SolverConfig c = quiet();
    c.inner_solver = InnerSolver::prox_gradient;
    c.max_inner = 1;
    c.mu = 1e-6;
    c.tau = 1e-7;
    const auto tr = run_alg1(p, c, SamplingStrategy(SamplingKind::full, 30, 30));
    EXPECT_EQ(tr.status, SolveStatus::inner_failure);
    EXPECT_FALSE(tr.message.empty());
    EXPECT_GE(tr.records.size(), 1u);
}

TEST(Alg1, MaxIterStatus)
{
    const auto p = random_quadratic(5, 10, SeparableRegularizer::zero(10));
    SolverConfig c = quiet();
    c.max_outer = 2;
    c.stop_tol = 0.0;
    const auto tr = run_alg1(p, c, SamplingStrategy(SamplingKind::uniform, 2, 10));
    EXPECT_EQ(tr.status, SolveStatus::max_iter);
    EXPECT_EQ(tr.records.size(), 3u);
}

TEST(Alg1, Determinism)
{
    const auto p = random_quadratic(6, 16, SeparableRegularizer::l1(16, 0.1));
    SolverConfig c = quiet();
    c.seed = 77;
    c.record_iterates = true;
    for (auto kind : {SamplingKind::uniform, SamplingKind::cyclic_contiguous, SamplingKind::top_k}) {
        const auto a = run_alg1(p, c, SamplingStrategy(kind, 4, 16));
        const auto b = run_alg1(p, c, SamplingStrategy(kind, 4, 16));
        ASSERT_EQ(a.iterates.size(), b.iterates.size());
        for (size_t k = 0; k < a.iterates.size(); ++k) EXPECT_EQ(a.iterates[k], b.iterates[k]);
        EXPECT_EQ(a.blocks, b.blocks);
    }
}

TEST(Alg2, QuadraticFullSamplingDecrease)
{
    const auto p = random_quadratic(7, 8, SeparableRegularizer::zero(8));
    SolverConfig c = quiet();
    c.stop_tol = 1e-8;
    const SamplingStrategy st(SamplingKind::full, 8, 8);
    const auto tr = run_alg2(p, c, st);
    EXPECT_EQ(tr.status, SolveStatus::converged);
    for (const auto& rep : check_trace(p, c, st, tr)) EXPECT_TRUE(rep.ok()) << rep.name << ": " << rep.first_violation;
    for (size_t k = 0; k + 1 < tr.records.size(); ++k) EXPECT_EQ(tr.records[k].step_size, 1.0);
}

TEST(Alg2, StationaryStartStopsAtZero)
{
    std::mt19937_64 rng(8);
    const Vector a = tk::random_vector(rng, 5);
    const CompositeProblem p(std::make_shared<QuadraticOracle>(a), SeparableRegularizer::zero(5));
    SolverConfig c = quiet();
    c.x0 = a;
    const auto tr = run_alg2(p, c, SamplingStrategy(SamplingKind::full, 5, 5));
    EXPECT_EQ(tr.status, SolveStatus::converged);
    ASSERT_EQ(tr.records.size(), 1u);
    EXPECT_EQ(tr.records[0].iter, 0);
}

TEST(Alg2, StudentsTTopK)
{
    const auto inst = gen_students_t(64, 0);
    const auto p = students_t_problem(inst);
    SolverConfig c = quiet();
    const SamplingStrategy st(SamplingKind::top_k, 16, 64);
    const auto tr = run_alg2(p, c, st);
    EXPECT_EQ(tr.status, SolveStatus::converged);
    EXPECT_LE(tr.records.back().resid_norm, c.stop_tol);
    for (const auto& rep : check_trace(p, c, st, tr)) EXPECT_TRUE(rep.ok()) << rep.name << ": " << rep.first_violation;
}

TEST(VmBaseline, QuadraticMatchesAlg1Limit)
{
    const auto p = random_quadratic(9, 10, SeparableRegularizer::zero(10));
    SolverConfig c = quiet();
    c.stop_tol = 1e-9;
    const auto ref = run_alg1(p, c, SamplingStrategy(SamplingKind::full, 10, 10));
    c.algorithm = Algorithm::vm_baseline;
    const auto vm = solve(p, c, SamplingStrategy(SamplingKind::cyclic_permuted, 5, 10));
    EXPECT_EQ(vm.status, SolveStatus::converged);
    EXPECT_LE((vm.x_final - ref.x_final).norm(), 1e-4);
    EXPECT_TRUE(check_monotone(vm).ok());
}

TEST(VmBaseline, BiweightGroupDecreases)
{
    auto bg = biweight_group_instance(gen_classification(40, 30, 0.001, LabelCoding::plus_minus_one, 1));
    SolverConfig c = quiet();
    c.mu = 1e-3;
    c.algorithm = Algorithm::vm_baseline;
    c.max_outer = 300;
    const SamplingStrategy st(SamplingKind::cyclic_contiguous, 1, bg.regularizer.piece_starts());
    const auto tr = solve(bg.problem, c, st);
    EXPECT_NE(tr.status, SolveStatus::line_search_failure);
    EXPECT_TRUE(check_monotone(tr).ok());
    EXPECT_LT(tr.records.back().resid_norm, tr.records.front().resid_norm);
}

TEST(BuildModel, EtaRulesFollowOracle)
{
    // Geman-McClure with one sample at margin 2
    ClassificationInstance inst;
    inst.Z.resize(1, 1);
    inst.Z.insert(0, 0) = 1.0;
    inst.labels = Vector::Constant(1, 2.0);
    inst.lambda = 0.001;
    const auto p = geman_mcclure_problem(inst);
    SolverConfig c;
    c.mu = 1e-5;
    c.tau = 5e-6;
    const auto bm = build_line_search_model(p, c, Vector::Zero(1), BlockIndexSet::full(1));
    EXPECT_NEAR(bm.prepared.curvature_floor, 0.002 - 0.25, 1e-12);
    EXPECT_NEAR(bm.eta, 0.250480, 1e-9);
    EXPECT_NEAR(bm.eta_bar, 1e-5 + 2 * 1.002, 1e-15);
    c.fixed_eta = 3.0;
    EXPECT_EQ(build_line_search_model(p, c, Vector::Zero(1), BlockIndexSet::full(1)).eta, 3.0);
}
