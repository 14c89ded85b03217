#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <Eigen/Eigenvalues>
#include <sbcpn/subproblem.hpp>

namespace sbcpn {

namespace {

constexpr double kNormSafety = 1.05;

double lipschitz_of_smooth_part(const RestrictedQuadraticModel& model)
{
    const auto bound = model.q_op->norm_bound();
    const double q_norm = bound ? *bound : kNormSafety * estimate_operator_norm(*model.q_op);
    return q_norm + model.eta;
}

bool certified(double cert_norm, double step_norm, double mu)
{
    return cert_norm <= 0.5 * mu * step_norm;
}

InexactSolution finish(const RestrictedQuadraticModel& model, Vector y, Vector cert, Index iterations, bool ok)
{
    InexactSolution sol;
    sol.step_norm = (y - model.base).norm();
    sol.certificate_norm = cert.norm();
    sol.y_hat = std::move(y);
    sol.certificate = std::move(cert);
    sol.inner_iterations = iterations;
    sol.success = ok;
    return sol;
}

} // namespace

RestrictedQuadraticModel::RestrictedQuadraticModel(Vector grad, std::shared_ptr<const RestrictedOperator> op,
                                                   double eta_value, Vector base_point, SeparableRegularizer reg,
                                                   double f_value)
    : grad_slice(std::move(grad)), q_op(std::move(op)), eta(eta_value), base(std::move(base_point)),
      reg_slice(std::move(reg)), f_base(f_value)
{
    require(q_op != nullptr, "RestrictedQuadraticModel: null operator");
    require(grad_slice.size() == base.size() && q_op->size() == base.size() && reg_slice.dimension() == base.size(),
            "RestrictedQuadraticModel: inconsistent block sizes");
    require(eta >= 0.0, "RestrictedQuadraticModel: eta must be nonnegative");
}

void RestrictedQuadraticModel::apply_shifted(const Vector& v, Vector& out) const
{
    q_op->apply(v, out);
    out += eta * v;
}

Vector RestrictedQuadraticModel::smooth_gradient(const Vector& y) const
{
    Vector hv(size());
    apply_shifted(y - base, hv);
    return grad_slice + hv;
}

double model_value(const RestrictedQuadraticModel& model, const Vector& y)
{
    require(y.size() == model.size(), "model_value: dimension mismatch");
    const Vector d = y - model.base;
    Vector hd(model.size());
    model.apply_shifted(d, hd);
    return model.f_base + model.grad_slice.dot(d) + 0.5 * d.dot(hd) + reg_value(model.reg_slice, y);
}

double estimate_operator_norm(const RestrictedOperator& op, int iterations)
{
    const Index s = op.size();
    if (s == 0) return 0.0;
    // fixed, non-symmetric start so that runs are reproducible
    Vector v(s);
    for (Index i = 0; i < s; ++i) v[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i + 1));
    v.normalize();
    Vector w(s);
    double est = 0.0;
    for (int it = 0; it < iterations; ++it) {
        op.apply(v, w);
        const double nrm = w.norm();
        if (nrm == 0.0) return est;
        est = nrm;
        v = w / nrm;
    }
    return est;
}

PreparedOperator prepare_operator(std::unique_ptr<RestrictedOperator> op)
{
    require(op != nullptr, "prepare_operator: null operator");
    const auto analytic_floor = op->curvature_floor();
    const auto analytic_norm = op->norm_bound();
    PreparedOperator out;
    if (op->size() <= kMaxDenseBlock) {
        Matrix dense = op->to_dense();
        Eigen::SelfAdjointEigenSolver<Matrix> eig(dense, Eigen::EigenvaluesOnly);
        const double lo = eig.eigenvalues().minCoeff();
        const double hi = eig.eigenvalues().maxCoeff();
        const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
        // both are valid lower bounds; keep the tighter one
        double floor = lo - 1e-10 * scale;
        if (analytic_floor) floor = std::max(floor, *analytic_floor);
        double norm = std::max(std::abs(lo), std::abs(hi)) + 1e-10 * scale;
        if (analytic_norm) norm = std::min(norm, *analytic_norm);
        out.curvature_floor = floor;
        out.norm_bound = norm;
        out.op = std::make_shared<DenseOperator>(std::move(dense), floor, norm);
        return out;
    }
    out.norm_bound = analytic_norm ? *analytic_norm : kNormSafety * estimate_operator_norm(*op);
    if (analytic_floor) {
        out.curvature_floor = *analytic_floor;
    } else {
        // lambda_min(Q) = sigma - lambda_max(sigma I - Q); the power estimate
        // undershoots lambda_max, so back off by 10% of sigma
        struct Shifted final : RestrictedOperator
        {
            const RestrictedOperator& q;
            double sigma;
            Shifted(const RestrictedOperator& q_, double s_) : q(q_), sigma(s_) {}
            Index size() const override { return q.size(); }
            void apply(const Vector& v, Vector& o) const override
            {
                q.apply(v, o);
                o = sigma * v - o;
            }
        } shifted(*op, out.norm_bound);
        out.curvature_floor = out.norm_bound - estimate_operator_norm(shifted) - 0.1 * out.norm_bound;
    }
    out.op = std::shared_ptr<const RestrictedOperator>(std::move(op));
    return out;
}

InexactSolution prox_grad_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner)
{
    require(mu > 0.0, "prox_grad_inner: mu must be positive");
    require(max_inner >= 1, "prox_grad_inner: max_inner must be at least 1");
    const double t = 1.0 / lipschitz_of_smooth_part(model);
    Vector y = model.base;
    Vector grad_y = model.smooth_gradient(y);
    Vector cert;
    for (Index it = 1; it <= max_inner; ++it) {
        Vector y_plus = prox_full(model.reg_slice, y - t * grad_y, t);
        Vector grad_plus = model.smooth_gradient(y_plus);
        cert = (y - y_plus) / t + grad_plus - grad_y;
        const double step = (y_plus - model.base).norm();
        if (certified(cert.norm(), step, mu)) return finish(model, std::move(y_plus), std::move(cert), it, true);
        y = std::move(y_plus);
        grad_y = std::move(grad_plus);
    }
    return finish(model, std::move(y), std::move(cert), max_inner, false);
}

InexactSolution cg_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner)
{
    require(model.reg_slice.kind() == RegularizerKind::zero, "cg_inner: requires a zero regularizer slice");
    require(mu > 0.0, "cg_inner: mu must be positive");
    require(max_inner >= 1, "cg_inner: max_inner must be at least 1");
    const Index s = model.size();
    Vector d = Vector::Zero(s);
    Vector r = model.grad_slice;  // r = grad + H d
    if (r.squaredNorm() == 0.0) return finish(model, model.base, r, 0, true);

    Vector p = -r;
    Vector hp(s);
    double rr = r.squaredNorm();
    for (Index it = 1; it <= max_inner; ++it) {
        model.apply_shifted(p, hp);
        const double curv = p.dot(hp);
        if (!(curv > 0.0)) {
            Vector true_r(s);
            model.apply_shifted(d, true_r);
            true_r += model.grad_slice;
            return finish(model, model.base + d, std::move(true_r), it, false);
        }
        const double alpha = rr / curv;
        d += alpha * p;
        r += alpha * hp;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= 0.5 * mu * d.norm()) {
            // confirm with the true residual; recurrences drift
            Vector true_r(s);
            model.apply_shifted(d, true_r);
            true_r += model.grad_slice;
            Vector y = model.base + d;
            if (certified(true_r.norm(), (y - model.base).norm(), mu))
                return finish(model, std::move(y), std::move(true_r), it, true);
            r = true_r;
            rr = r.squaredNorm();
            p = -r;
            continue;
        }
        p = -r + (rr_new / rr) * p;
        rr = rr_new;
    }
    Vector true_r(s);
    model.apply_shifted(d, true_r);
    true_r += model.grad_slice;
    return finish(model, model.base + d, std::move(true_r), max_inner, false);
}

namespace {

/*
 * Solve the Newton system J delta = -F with J = I - P (I - t H).
 *
 * Inactive pieces (P = 0) give delta_I = -F_I. On active pieces
 *   ((P^{-1} - I)/t + H)_AA delta_A = -(P^{-1} F)_A / t - (H delta_I)_A,
 * which is symmetric positive definite and solved by CG.
 */
Vector newton_direction(const RestrictedQuadraticModel& model, const ProxJacobian& jac, const Vector& F, double t)
{
    const Index s = model.size();
    const auto& active = jac.active();
    Vector delta = Vector::Zero(s);
    Vector delta_inactive = Vector::Zero(s);
    for (Index i = 0; i < s; ++i)
        if (!active[i]) delta_inactive[i] = -F[i];
    delta = delta_inactive;
    if (jac.active_count() == 0) return delta;

    auto mask = [&](Vector& v) {
        for (Index i = 0; i < s; ++i)
            if (!active[i]) v[i] = 0.0;
    };
    Vector tmp(s), tmp2(s);
    auto apply_system = [&](const Vector& v, Vector& out) {
        model.apply_shifted(v, out);
        jac.apply_inverse_minus_identity(v, tmp2);
        out += tmp2 / t;
        mask(out);
    };

    Vector rhs(s);
    jac.apply_inverse(F, rhs);
    rhs /= -t;
    if (delta_inactive.squaredNorm() > 0.0) {
        model.apply_shifted(delta_inactive, tmp);
        rhs -= tmp;
    }
    mask(rhs);

    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) return delta;
    const double tol = std::min(1e-2, std::sqrt(F.norm())) * rhs_norm;
    const Index max_cg = std::min<Index>(2 * jac.active_count() + 20, 1000);

    Vector z = Vector::Zero(s);
    Vector r = rhs;
    Vector p = r;
    Vector ap(s);
    double rr = r.squaredNorm();
    for (Index it = 0; it < max_cg && std::sqrt(rr) > tol; ++it) {
        apply_system(p, ap);
        const double curv = p.dot(ap);
        if (!(curv > 0.0)) break;
        const double alpha = rr / curv;
        z += alpha * p;
        r -= alpha * ap;
        const double rr_new = r.squaredNorm();
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    for (Index i = 0; i < s; ++i)
        if (active[i]) delta[i] = z[i];
    return delta;
}

} // namespace

InexactSolution ssn_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner)
{
    require(mu > 0.0, "ssn_inner: mu must be positive");
    require(max_inner >= 1, "ssn_inner: max_inner must be at least 1");
    const double t = 1.0 / lipschitz_of_smooth_part(model);
    const auto& reg = model.reg_slice;

    auto natural_residual = [&](const Vector& y, const Vector& gy, Vector& prox_point) {
        prox_point = prox_full(reg, y - t * gy, t);
        return Vector(y - prox_point);
    };

    Vector y = model.base;
    Vector gy = model.smooth_gradient(y);
    Vector cert = min_norm_subgradient(reg, y, gy);
    if (cert.squaredNorm() == 0.0) return finish(model, std::move(y), std::move(cert), 0, true);

    Vector p;
    Vector F = natural_residual(y, gy, p);
    double best_residual = F.norm();

    for (Index it = 1; it <= max_inner; ++it) {
        // proximal gradient candidate
        Vector gp = model.smooth_gradient(p);
        Vector cert_p = min_norm_subgradient(reg, p, gp);
        if (certified(cert_p.norm(), (p - model.base).norm(), mu))
            return finish(model, std::move(p), std::move(cert_p), it, true);

        // semismooth Newton candidate
        const ProxJacobian jac(reg, y - t * gy, t);
        Vector z = y + newton_direction(model, jac, F, t);
        Vector gz = model.smooth_gradient(z);
        Vector cert_z = min_norm_subgradient(reg, z, gz);
        if (certified(cert_z.norm(), (z - model.base).norm(), mu))
            return finish(model, std::move(z), std::move(cert_z), it, true);

        Vector pz;
        Vector Fz = natural_residual(z, gz, pz);
        const double fz_norm = Fz.norm();
        bool take_newton = fz_norm <= 0.9 * best_residual;
        if (!take_newton) take_newton = model_value(model, z) < model_value(model, p);

        if (take_newton) {
            y = std::move(z);
            gy = std::move(gz);
            F = std::move(Fz);
            p = std::move(pz);
            cert = std::move(cert_z);
        } else {
            y = std::move(p);
            gy = std::move(gp);
            cert = std::move(cert_p);
            F = natural_residual(y, gy, p);
        }
        best_residual = std::min(best_residual, F.norm());
    }
    return finish(model, std::move(y), std::move(cert), max_inner, false);
}

InexactSolution sparsa_inner(const RestrictedQuadraticModel& model, Index iterations)
{
    require(iterations >= 1, "sparsa_inner: need at least one iteration");
    const double a_max = lipschitz_of_smooth_part(model);
    const double a_min = 1e-12 * std::max(1.0, a_max);
    const auto& reg = model.reg_slice;

    Vector y = model.base;
    Vector gy = model.smooth_gradient(y);
    double qy = model_value(model, y);
    double alpha = a_max;
    {
        Vector hg(model.size());
        model.apply_shifted(gy, hg);
        const double gg = gy.squaredNorm();
        if (gg > 0.0) alpha = std::clamp(gy.dot(hg) / gg, a_min, a_max);
    }

    Index it = 0;
    for (; it < iterations; ++it) {
        Vector y_plus;
        double q_plus = 0.0;
        for (;;) {
            y_plus = prox_full(reg, y - gy / alpha, 1.0 / alpha);
            q_plus = model_value(model, y_plus);
            const double s2 = (y_plus - y).squaredNorm();
            if (q_plus <= qy - 1e-5 * 0.5 * alpha * s2 || alpha >= a_max) break;
            alpha = std::min(2.0 * alpha, a_max);
        }
        const Vector s = y_plus - y;
        if (s.squaredNorm() == 0.0 || !(q_plus <= qy)) break;
        Vector g_plus = model.smooth_gradient(y_plus);
        const double ss = s.squaredNorm();
        alpha = std::clamp(s.dot(g_plus - gy) / ss, a_min, a_max);
        y = std::move(y_plus);
        gy = std::move(g_plus);
        qy = q_plus;
    }
    Vector cert = min_norm_subgradient(reg, y, gy);
    return finish(model, std::move(y), std::move(cert), it, true);
}

InexactSolution solve_inner(const RestrictedQuadraticModel& model, double mu, Index max_inner, InnerSolver solver)
{
    switch (solver) {
    case InnerSolver::prox_gradient: return prox_grad_inner(model, mu, max_inner);
    case InnerSolver::conjugate_gradient: return cg_inner(model, mu, max_inner);
    case InnerSolver::semismooth_newton: return ssn_inner(model, mu, max_inner);
    case InnerSolver::automatic: break;
    }
    if (model.reg_slice.kind() == RegularizerKind::zero) return cg_inner(model, mu, max_inner);
    return ssn_inner(model, mu, max_inner);
}

double eta_bar_linesearch(double mu, double lipschitz, double zeta)
{
    return mu + 2.0 * lipschitz + zeta;
}

double eta_linesearch_policy(double curvature_floor, double mu, std::optional<double> eta_bar)
{
    require(mu > 0.0, "eta_linesearch_policy: mu must be positive");
    const double eta = 1.01 * (mu + std::max(0.0, -curvature_floor));
    if (eta_bar && eta > *eta_bar) {
        std::ostringstream msg;
        msg << "eta_linesearch_policy: eta = " << eta << " exceeds eta_bar = " << *eta_bar
            << " (curvature floor " << curvature_floor << ")";
        throw ContractViolation(msg.str());
    }
    return eta;
}

double eta_geman_mcclure_policy(double curvature_floor, double mu)
{
    require(mu > 0.0, "eta_geman_mcclure_policy: mu must be positive");
    return 1.01 * std::max(-curvature_floor, mu);
}

double eta_biweight_policy(double curvature_floor, double mu)
{
    require(mu > 0.0, "eta_biweight_policy: mu must be positive");
    return curvature_floor + 0.01 * mu >= mu ? 0.01 * mu : 1.01 * mu;
}

double unit_step_margin(double lipschitz, double zeta, double mu)
{
    const double a = 0.5 * (1.0 + 2.0 * zeta + 3.0 * lipschitz + mu);
    const double b = (1.0 + 2.0 * zeta + 2.0 * lipschitz) / (2.0 - mu);
    return 1.1 * mu * std::max(a, b);
}

UnitStepParameters eta_unit_policy(std::optional<double> lipschitz, double zeta, double mu,
                                   double block_curvature_floor, double full_curvature_floor)
{
    require(lipschitz.has_value(), "eta_unit_policy: the unit-step method needs a known Lipschitz constant");
    require(mu > 0.0 && mu <= 1.0, "eta_unit_policy: mu must lie in (0, 1]");
    require(zeta >= 0.0 && *lipschitz >= 0.0, "eta_unit_policy: constants must be nonnegative");
    const double L = *lipschitz;
    UnitStepParameters out;
    out.theta_reg = unit_step_margin(L, zeta, mu);
    out.eta_bar = std::max(mu + 2.0 * L + zeta, out.theta_reg + L + zeta);
    const double needed = std::max(out.theta_reg - block_curvature_floor, L + mu - full_curvature_floor);
    out.eta = std::max(needed, 0.01 * mu);
    if (out.eta > out.eta_bar) {
        std::ostringstream msg;
        msg << "eta_unit_policy: required eta = " << out.eta << " exceeds eta_bar = " << out.eta_bar;
        throw ContractViolation(msg.str());
    }
    return out;
}

} // namespace sbcpn
