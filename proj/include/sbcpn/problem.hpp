#pragma once
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <sbcpn/block.hpp>
#include <sbcpn/regularizer.hpp>
#include <sbcpn/types.hpp>

namespace sbcpn {

/*
 * Symmetric |S| x |S| operator approximating the Hessian of f restricted
 * to a block S, applied matrix-free.
 */
class RestrictedOperator
{
public:
    virtual ~RestrictedOperator() = default;

    virtual Index size() const = 0;
    virtual void apply(const Vector& v, Vector& out) const = 0;

    /// Analytic lower bound on the smallest eigenvalue, when one is known.
    virtual std::optional<double> curvature_floor() const { return std::nullopt; }
    /// Analytic upper bound on the spectral norm, when one is known.
    virtual std::optional<double> norm_bound() const { return std::nullopt; }
    /// Dense |S| x |S| matrix; only valid for size() <= kMaxDenseBlock.
    virtual Matrix to_dense() const;

    Vector operator()(const Vector& v) const
    {
        Vector out(size());
        apply(v, out);
        return out;
    }
};

class DenseOperator final : public RestrictedOperator
{
public:
    explicit DenseOperator(Matrix matrix,
                           std::optional<double> floor = std::nullopt,
                           std::optional<double> norm = std::nullopt);

    Index size() const override { return matrix_.rows(); }
    void apply(const Vector& v, Vector& out) const override { out.noalias() = matrix_ * v; }
    std::optional<double> curvature_floor() const override { return floor_; }
    std::optional<double> norm_bound() const override { return norm_; }
    const Matrix& matrix() const { return matrix_; }

private:
    Matrix matrix_;
    std::optional<double> floor_;
    std::optional<double> norm_;
};

class ZeroOperator final : public RestrictedOperator
{
public:
    explicit ZeroOperator(Index size) : size_(size) {}
    Index size() const override { return size_; }
    void apply(const Vector& v, Vector& out) const override { out.setZero(v.size()); }
    std::optional<double> curvature_floor() const override { return 0.0; }
    std::optional<double> norm_bound() const override { return 0.0; }

private:
    Index size_;
};

/// Dense copy of the operator, built column by column. Requires size() <= kMaxDenseBlock.
Matrix materialize(const RestrictedOperator& op);

/// How an oracle wants the proximal regularization eta_k chosen for line-search runs.
enum class EtaRule
{
    shifted_floor,   // 1.01 (mu + max(0, -floor))
    geman_mcclure,   // 1.01 max(-floor, mu)
    biweight,        // 0.01 mu if floor + 0.01 mu >= mu, else 1.01 mu
};

/*
 * Smooth part f of the composite objective.
 *
 * Implementations must be safe for concurrent const use: solver runs on
 * different threads share one oracle.
 */
class SmoothOracle
{
public:
    virtual ~SmoothOracle() = default;

    virtual Index dimension() const = 0;
    virtual double value(const Vector& x) const = 0;
    virtual Vector gradient(const Vector& x) const = 0;
    virtual double value_and_gradient(const Vector& x, Vector& grad) const
    {
        grad = gradient(x);
        return value(x);
    }

    /// Hessian approximation Q at x restricted to the block.
    virtual std::unique_ptr<RestrictedOperator>
    restricted_hessian(const Vector& x, const BlockIndexSet& block) const = 0;

    /// Global Lipschitz constant L_g of the gradient, if known.
    virtual std::optional<double> lipschitz_bound() const { return std::nullopt; }
    /// zeta with ||Hess f(x) - Q(x)|| <= zeta; 0 for exact Hessians.
    virtual std::optional<double> hessian_error_bound() const { return 0.0; }
    virtual EtaRule eta_rule() const { return EtaRule::shifted_floor; }
};

/// f(x) = 0.5 (x - a)^T H (x - a) with H symmetric.
class QuadraticOracle final : public SmoothOracle
{
public:
    QuadraticOracle(Matrix hessian, Vector center);
    /// f(x) = 0.5 ||x - a||^2
    explicit QuadraticOracle(Vector center);

    Index dimension() const override { return center_.size(); }
    double value(const Vector& x) const override;
    Vector gradient(const Vector& x) const override;
    std::unique_ptr<RestrictedOperator>
    restricted_hessian(const Vector& x, const BlockIndexSet& block) const override;
    std::optional<double> lipschitz_bound() const override { return lipschitz_; }

private:
    Matrix hessian_;
    Vector center_;
    double lipschitz_;
    double min_eigenvalue_;
};

/// phi = f + g over R^n.
class CompositeProblem
{
public:
    CompositeProblem(std::shared_ptr<const SmoothOracle> smooth, SeparableRegularizer regularizer);

    Index dimension() const { return regularizer_.dimension(); }
    const SmoothOracle& smooth() const { return *smooth_; }
    std::shared_ptr<const SmoothOracle> smooth_ptr() const { return smooth_; }
    const SeparableRegularizer& regularizer() const { return regularizer_; }

private:
    std::shared_ptr<const SmoothOracle> smooth_;
    SeparableRegularizer regularizer_;
};

double composite_value(const CompositeProblem& problem, const Vector& x);

/*
 * Largest central-difference discrepancy
 *   max_i |(f(x + h e_i) - f(x - h e_i)) / 2h - grad_i| / (1 + |grad_i|).
 * Non-finite function values yield +infinity.
 */
double gradient_check(const SmoothOracle& oracle, const Vector& x, double h);

struct IterateState
{
    Vector x;
    double phi = 0.0;
    Index k = 0;
    std::mt19937_64 rng;

    IterateState(const CompositeProblem& problem, Vector x0, std::uint64_t seed);
};

} // namespace sbcpn
