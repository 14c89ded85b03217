#include <algorithm>
#include <cmath>
#include <limits>
#include <Eigen/Eigenvalues>
#include <sbcpn/problem.hpp>

namespace sbcpn {

DenseOperator::DenseOperator(Matrix matrix, std::optional<double> floor, std::optional<double> norm)
    : matrix_(std::move(matrix)), floor_(floor), norm_(norm)
{
    require(matrix_.rows() == matrix_.cols(), "DenseOperator: matrix must be square");
}

Matrix materialize(const RestrictedOperator& op)
{
    const Index s = op.size();
    require(s <= kMaxDenseBlock, "materialize: block larger than the dense limit");
    Matrix out(s, s);
    Vector e = Vector::Zero(s);
    Vector col(s);
    for (Index j = 0; j < s; ++j) {
        e[j] = 1.0;
        op.apply(e, col);
        out.col(j) = col;
        e[j] = 0.0;
    }
    // symmetrize away round-off from the matrix-free product
    return 0.5 * (out + out.transpose());
}

Matrix RestrictedOperator::to_dense() const
{
    return materialize(*this);
}

QuadraticOracle::QuadraticOracle(Matrix hessian, Vector center)
    : hessian_(std::move(hessian)), center_(std::move(center))
{
    require(hessian_.rows() == center_.size() && hessian_.cols() == center_.size(),
            "QuadraticOracle: dimension mismatch");
    require((hessian_ - hessian_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + hessian_.cwiseAbs().maxCoeff()),
            "QuadraticOracle: Hessian must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(hessian_, Eigen::EigenvaluesOnly);
    lipschitz_ = eig.eigenvalues().cwiseAbs().maxCoeff();
    min_eigenvalue_ = eig.eigenvalues().minCoeff();
}

QuadraticOracle::QuadraticOracle(Vector center)
    : QuadraticOracle(Matrix::Identity(center.size(), center.size()), center)
{}

double QuadraticOracle::value(const Vector& x) const
{
    require(x.size() == dimension(), "QuadraticOracle::value: dimension mismatch");
    const Vector r = x - center_;
    return 0.5 * r.dot(hessian_ * r);
}

Vector QuadraticOracle::gradient(const Vector& x) const
{
    require(x.size() == dimension(), "QuadraticOracle::gradient: dimension mismatch");
    return hessian_ * (x - center_);
}

std::unique_ptr<RestrictedOperator>
QuadraticOracle::restricted_hessian(const Vector&, const BlockIndexSet& block) const
{
    const Index s = block.size();
    Matrix sub(s, s);
    for (Index i = 0; i < s; ++i)
        for (Index j = 0; j < s; ++j) sub(i, j) = hessian_(block[i], block[j]);
    // eigenvalue interlacing: lambda_min(H_S) >= lambda_min(H)
    return std::make_unique<DenseOperator>(std::move(sub), min_eigenvalue_, lipschitz_);
}

CompositeProblem::CompositeProblem(std::shared_ptr<const SmoothOracle> smooth, SeparableRegularizer regularizer)
    : smooth_(std::move(smooth)), regularizer_(std::move(regularizer))
{
    require(smooth_ != nullptr, "CompositeProblem: null smooth oracle");
    require(smooth_->dimension() == regularizer_.dimension(),
            "CompositeProblem: oracle and regularizer dimensions differ");
    const Vector zero = Vector::Zero(dimension());
    require(std::isfinite(composite_value(*this, zero)), "CompositeProblem: phi(0) is not finite");
}

double composite_value(const CompositeProblem& problem, const Vector& x)
{
    require(x.size() == problem.dimension(), "composite_value: dimension mismatch");
    return problem.smooth().value(x) + reg_value(problem.regularizer(), x);
}

double gradient_check(const SmoothOracle& oracle, const Vector& x, double h)
{
    require(h > 0.0, "gradient_check: h must be positive");
    require(x.size() == oracle.dimension(), "gradient_check: dimension mismatch");
    const Vector grad = oracle.gradient(x);
    Vector probe = x;
    double worst = 0.0;
    for (Index i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = oracle.value(probe);
        probe[i] = x[i] - h;
        const double fm = oracle.value(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm) || !std::isfinite(grad[i]))
            return std::numeric_limits<double>::infinity();
        const double fd = (fp - fm) / (2.0 * h);
        worst = std::max(worst, std::abs(fd - grad[i]) / (1.0 + std::abs(grad[i])));
    }
    return worst;
}

IterateState::IterateState(const CompositeProblem& problem, Vector x0, std::uint64_t seed)
    : x(std::move(x0)), phi(composite_value(problem, x)), k(0), rng(seed)
{
    require(std::isfinite(phi), "IterateState: starting point outside dom g");
}

} // namespace sbcpn
