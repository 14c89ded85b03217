#pragma once
#include <utility>
#include <vector>
#include <sbcpn/block.hpp>
#include <sbcpn/types.hpp>

namespace sbcpn {

enum class RegularizerKind { zero, l1, group_l2 };

/*
 * Separable convex regularizer g(x) = sum_p psi_p(x_{B_p}).
 *
 * Pieces are single coordinates for zero and l1, and contiguous
 * coordinate groups for group_l2 (psi_p(z) = lambda * ||z||).
 */
class SeparableRegularizer
{
public:
    static SeparableRegularizer zero(Index n);
    static SeparableRegularizer l1(Index n, double lambda);
    static SeparableRegularizer group_l2(const std::vector<Index>& group_sizes, double lambda);
    /// Consecutive groups of `width` coordinates; the last one may be shorter.
    static SeparableRegularizer group_l2_uniform(Index n, Index width, double lambda);

    RegularizerKind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    Index dimension() const { return n_; }

    Index piece_count() const;
    /// Half-open coordinate range [first, second) covered by piece p.
    std::pair<Index, Index> piece_range(Index p) const;
    Index piece_of(Index coordinate) const;
    /// Start offsets of all pieces plus a trailing n.
    std::vector<Index> piece_starts() const;

    double piece_value(Index p, const Eigen::Ref<const Vector>& z) const;

    /// True when the block is a union of whole pieces.
    bool respects_pieces(const BlockIndexSet& block) const;
    /// The regularizer acting on x_S, in local coordinates of the block.
    SeparableRegularizer restrict_to(const BlockIndexSet& block) const;

private:
    SeparableRegularizer(RegularizerKind kind, Index n, double lambda, std::vector<Index> starts);

    RegularizerKind kind_;
    Index n_;
    double lambda_;
    std::vector<Index> starts_;   // group offsets, only used by group_l2
};

/// argmin_z { t * psi_p(z) + 0.5 ||z - u||^2 }
Vector prox_piece(const SeparableRegularizer& reg, Index piece, const Eigen::Ref<const Vector>& u, double t);
/// prox_{t g}(u), evaluated piece by piece.
Vector prox_full(const SeparableRegularizer& reg, const Vector& u, double t);
double reg_value(const SeparableRegularizer& reg, const Vector& x);

/// v + xi with xi in dg(x) chosen to minimize the norm (distance of -v to dg(x)).
Vector min_norm_subgradient(const SeparableRegularizer& reg, const Vector& x, const Vector& v);

/*
 * Structure of the generalized Jacobian P of u -> prox_{t g}(u).
 *
 * Pieces whose prox vanishes have P = 0 ("inactive"). On the remaining
 * pieces P is invertible and (P^{-1} - I) is symmetric positive
 * semidefinite; it is zero for l1 and the zero regularizer and
 * c/(1-c) (I - w w^T) for a group with c = t*lambda/||u||, w = u/||u||.
 */
class ProxJacobian
{
public:
    ProxJacobian(const SeparableRegularizer& reg, const Vector& u, double t);

    const std::vector<char>& active() const { return active_; }
    Index active_count() const { return active_count_; }
    /// out = (P^{-1} - I) v on active coordinates, 0 elsewhere.
    void apply_inverse_minus_identity(const Vector& v, Vector& out) const;
    /// out = P^{-1} v on active coordinates, 0 elsewhere.
    void apply_inverse(const Vector& v, Vector& out) const;

private:
    struct ActiveGroup
    {
        Index begin;
        Index end;
        double ratio;      // c / (1 - c)
        Vector direction;  // unit vector u_B / ||u_B||
    };

    std::vector<char> active_;
    Index active_count_ = 0;
    std::vector<ActiveGroup> groups_;
};

} // namespace sbcpn
