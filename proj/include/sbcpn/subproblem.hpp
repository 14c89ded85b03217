#pragma once
#include <memory>
#include <optional>
#include <sbcpn/problem.hpp>

namespace sbcpn {

/*
 * Restricted strongly convex model on a block S:
 *
 *   q(y) = f_base + <grad_slice, y - base> + 0.5 <Q (y - base), y - base>
 *          + 0.5 eta ||y - base||^2 + g_S(y)
 *
 * with base = x_S at the current iterate.
 */
struct RestrictedQuadraticModel
{
    Vector grad_slice;
    std::shared_ptr<const RestrictedOperator> q_op;
    double eta = 0.0;
    Vector base;
    SeparableRegularizer reg_slice;
    double f_base = 0.0;

    RestrictedQuadraticModel(Vector grad, std::shared_ptr<const RestrictedOperator> op, double eta_value,
                             Vector base_point, SeparableRegularizer reg, double f_value);

    Index size() const { return base.size(); }
    /// out = (Q + eta I) v
    void apply_shifted(const Vector& v, Vector& out) const;
    /// grad_slice + (Q + eta I)(y - base)
    Vector smooth_gradient(const Vector& y) const;
};

double model_value(const RestrictedQuadraticModel& model, const Vector& y);

/*
 * Approximate minimizer of the model together with a subgradient
 * certificate: `certificate` lies in the subdifferential of q at y_hat.
 * On success ||certificate|| <= (mu/2) ||y_hat - base||.
 */
struct InexactSolution
{
    Vector y_hat;
    Vector certificate;
    double certificate_norm = 0.0;
    Index inner_iterations = 0;
    double step_norm = 0.0;
    bool success = false;
};

/// Proximal gradient with step 1/(||Q||_est + eta) and the prox-gradient certificate.
InexactSolution prox_grad_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner);

/// Conjugate gradient on (Q + eta I) d = -grad_slice; requires a zero regularizer slice.
InexactSolution cg_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner);

/*
 * Semismooth Newton on the natural residual F(y) = y - prox_{t g}(y - t grad s(y)),
 * safeguarded by proximal gradient steps. Newton systems are solved
 * matrix-free with CG on the active pieces. Certificates are minimum-norm
 * subgradients of q.
 */
InexactSolution ssn_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner);

/*
 * Fixed number of spectral (Barzilai-Borwein) proximal gradient steps with a
 * monotone acceptance test, returning the best point seen. Used by the
 * variable metric baseline; never fails, and the certificate is the
 * minimum-norm subgradient at the returned point.
 */
InexactSolution sparsa_inner(const RestrictedQuadraticModel& model, Index iterations);

enum class InnerSolver { automatic, prox_gradient, conjugate_gradient, semismooth_newton };

/// automatic: CG when the regularizer slice is zero, semismooth Newton otherwise.
InexactSolution solve_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner,
                            InnerSolver solver = InnerSolver::automatic);

/// Power-iteration estimate of ||op|| (no safety factor applied).
double estimate_operator_norm(const RestrictedOperator& op, int iterations = 20);

/*
 * A restricted operator prepared for the inner solvers: materialized
 * densely when the block is small enough, with a curvature floor and a
 * norm bound attached.
 */
struct PreparedOperator
{
    std::shared_ptr<const RestrictedOperator> op;
    double curvature_floor = 0.0;
    double norm_bound = 0.0;
};

PreparedOperator prepare_operator(std::unique_ptr<RestrictedOperator> op);

/// eta = 1.01 (mu + max(0, -floor)); throws if it exceeds eta_bar.
double eta_linesearch_policy(double curvature_floor, double mu, std::optional<double> eta_bar = std::nullopt);
/// eta = 1.01 max(-floor, mu)
double eta_geman_mcclure_policy(double curvature_floor, double mu);
/// eta = 0.01 mu when floor + 0.01 mu >= mu, else 1.01 mu
double eta_biweight_policy(double curvature_floor, double mu);

/// mu + 2 L_g + zeta
double eta_bar_linesearch(double mu, double lipschitz, double zeta);

struct UnitStepParameters
{
    double theta_reg = 0.0;  // the curvature margin required of Q_S + eta I
    double eta = 0.0;
    double eta_bar = 0.0;
};

/*
 * Parameters for the unit-step method. theta_reg is the smallest admissible
 * margin; eta is the smallest value with
 *   Q_S + (eta - theta_reg) I >= 0  and  Q + (eta - L_g - mu) I >= 0
 * given lower bounds on lambda_min(Q_S) and lambda_min(Q).
 * Throws when L_g is unknown or eta would exceed eta_bar.
 */
UnitStepParameters eta_unit_policy(std::optional<double> lipschitz, double zeta, double mu,
                                   double block_curvature_floor, double full_curvature_floor);

/// Margin only: 1.1 mu max{(1 + 2 zeta + 3 L_g + mu)/2, (1 + 2 zeta + 2 L_g)/(2 - mu)}.
double unit_step_margin(double lipschitz, double zeta, double mu);

} // namespace sbcpn
