#include <algorithm>
#include <cmath>
#include <sbcpn/regularizer.hpp>

namespace sbcpn {

namespace {

double soft_threshold(double u, double kappa)
{
    const double mag = std::abs(u) - kappa;
    return mag > 0.0 ? std::copysign(mag, u) : 0.0;
}

} // namespace

SeparableRegularizer::SeparableRegularizer(RegularizerKind kind, Index n, double lambda, std::vector<Index> starts)
    : kind_(kind), n_(n), lambda_(lambda), starts_(std::move(starts))
{
    require(n_ >= 1, "SeparableRegularizer: dimension must be positive");
}

SeparableRegularizer SeparableRegularizer::zero(Index n)
{
    return SeparableRegularizer(RegularizerKind::zero, n, 0.0, {});
}

SeparableRegularizer SeparableRegularizer::l1(Index n, double lambda)
{
    require(lambda > 0.0, "l1 regularizer: lambda must be positive");
    return SeparableRegularizer(RegularizerKind::l1, n, lambda, {});
}

SeparableRegularizer SeparableRegularizer::group_l2(const std::vector<Index>& group_sizes, double lambda)
{
    require(lambda > 0.0, "group_l2 regularizer: lambda must be positive");
    require(!group_sizes.empty(), "group_l2 regularizer: no groups");
    std::vector<Index> starts{0};
    for (Index w : group_sizes) {
        require(w >= 1, "group_l2 regularizer: empty group");
        starts.push_back(starts.back() + w);
    }
    const Index n = starts.back();
    return SeparableRegularizer(RegularizerKind::group_l2, n, lambda, std::move(starts));
}

SeparableRegularizer SeparableRegularizer::group_l2_uniform(Index n, Index width, double lambda)
{
    require(n >= 1 && width >= 1, "group_l2_uniform: invalid sizes");
    std::vector<Index> sizes;
    for (Index start = 0; start < n; start += width) sizes.push_back(std::min(width, n - start));
    return group_l2(sizes, lambda);
}

Index SeparableRegularizer::piece_count() const
{
    return kind_ == RegularizerKind::group_l2 ? static_cast<Index>(starts_.size()) - 1 : n_;
}

std::pair<Index, Index> SeparableRegularizer::piece_range(Index p) const
{
    require(p >= 0 && p < piece_count(), "piece_range: piece index out of range");
    if (kind_ == RegularizerKind::group_l2) return {starts_[p], starts_[p + 1]};
    return {p, p + 1};
}

Index SeparableRegularizer::piece_of(Index coordinate) const
{
    require(coordinate >= 0 && coordinate < n_, "piece_of: coordinate out of range");
    if (kind_ != RegularizerKind::group_l2) return coordinate;
    auto it = std::upper_bound(starts_.begin(), starts_.end(), coordinate);
    return static_cast<Index>(it - starts_.begin()) - 1;
}

std::vector<Index> SeparableRegularizer::piece_starts() const
{
    if (kind_ == RegularizerKind::group_l2) return starts_;
    std::vector<Index> s(static_cast<size_t>(n_ + 1));
    for (Index i = 0; i <= n_; ++i) s[i] = i;
    return s;
}

double SeparableRegularizer::piece_value(Index p, const Eigen::Ref<const Vector>& z) const
{
    const auto [b, e] = piece_range(p);
    require(z.size() == e - b, "piece_value: width mismatch");
    switch (kind_) {
    case RegularizerKind::zero: return 0.0;
    case RegularizerKind::l1: return lambda_ * std::abs(z[0]);
    case RegularizerKind::group_l2: return lambda_ * z.norm();
    }
    return 0.0;
}

bool SeparableRegularizer::respects_pieces(const BlockIndexSet& block) const
{
    if (block.ambient_dimension() != n_) return false;
    if (kind_ != RegularizerKind::group_l2) return true;
    const auto& idx = block.indices();
    size_t i = 0;
    while (i < idx.size()) {
        const Index p = piece_of(idx[i]);
        const auto [b, e] = piece_range(p);
        if (idx[i] != b) return false;
        for (Index c = b; c < e; ++c, ++i) {
            if (i >= idx.size() || idx[i] != c) return false;
        }
    }
    return true;
}

SeparableRegularizer SeparableRegularizer::restrict_to(const BlockIndexSet& block) const
{
    require(block.ambient_dimension() == n_, "restrict_to: block dimension mismatch");
    switch (kind_) {
    case RegularizerKind::zero: return zero(block.size());
    case RegularizerKind::l1: return l1(block.size(), lambda_);
    case RegularizerKind::group_l2: break;
    }
    require(respects_pieces(block), "restrict_to: block splits a group");
    std::vector<Index> sizes;
    for (size_t i = 0; i < block.indices().size();) {
        const auto [b, e] = piece_range(piece_of(block.indices()[i]));
        sizes.push_back(e - b);
        i += static_cast<size_t>(e - b);
    }
    return group_l2(sizes, lambda_);
}

Vector prox_piece(const SeparableRegularizer& reg, Index piece, const Eigen::Ref<const Vector>& u, double t)
{
    require(t > 0.0, "prox_piece: t must be positive");
    const auto [b, e] = reg.piece_range(piece);
    require(u.size() == e - b, "prox_piece: slice width does not match the piece");
    switch (reg.kind()) {
    case RegularizerKind::zero: return u;
    case RegularizerKind::l1: {
        Vector z(1);
        z[0] = soft_threshold(u[0], t * reg.lambda());
        return z;
    }
    case RegularizerKind::group_l2: {
        const double nrm = u.norm();
        const double kappa = t * reg.lambda();
        if (nrm <= kappa) return Vector::Zero(u.size());
        return (1.0 - kappa / nrm) * u;
    }
    }
    return u;
}

Vector prox_full(const SeparableRegularizer& reg, const Vector& u, double t)
{
    require(u.size() == reg.dimension(), "prox_full: dimension mismatch");
    require(t > 0.0, "prox_full: t must be positive");
    switch (reg.kind()) {
    case RegularizerKind::zero: return u;
    case RegularizerKind::l1: {
        const double kappa = t * reg.lambda();
        return u.unaryExpr([kappa](double v) { return soft_threshold(v, kappa); });
    }
    case RegularizerKind::group_l2: break;
    }
    Vector out(u.size());
    for (Index p = 0; p < reg.piece_count(); ++p) {
        const auto [b, e] = reg.piece_range(p);
        out.segment(b, e - b) = prox_piece(reg, p, u.segment(b, e - b), t);
    }
    return out;
}

double reg_value(const SeparableRegularizer& reg, const Vector& x)
{
    require(x.size() == reg.dimension(), "reg_value: dimension mismatch");
    switch (reg.kind()) {
    case RegularizerKind::zero: return 0.0;
    case RegularizerKind::l1: return reg.lambda() * x.lpNorm<1>();
    case RegularizerKind::group_l2: break;
    }
    double total = 0.0;
    for (Index p = 0; p < reg.piece_count(); ++p) {
        const auto [b, e] = reg.piece_range(p);
        total += x.segment(b, e - b).norm();
    }
    return reg.lambda() * total;
}

Vector min_norm_subgradient(const SeparableRegularizer& reg, const Vector& x, const Vector& v)
{
    require(x.size() == reg.dimension() && v.size() == reg.dimension(), "min_norm_subgradient: dimension mismatch");
    const double lam = reg.lambda();
    switch (reg.kind()) {
    case RegularizerKind::zero: return v;
    case RegularizerKind::l1: {
        Vector out(v.size());
        for (Index i = 0; i < v.size(); ++i) {
            out[i] = x[i] != 0.0 ? v[i] + std::copysign(lam, x[i]) : soft_threshold(v[i], lam);
        }
        return out;
    }
    case RegularizerKind::group_l2: break;
    }
    Vector out(v.size());
    for (Index p = 0; p < reg.piece_count(); ++p) {
        const auto [b, e] = reg.piece_range(p);
        const auto xb = x.segment(b, e - b);
        const auto vb = v.segment(b, e - b);
        const double xn = xb.norm();
        if (xn > 0.0) {
            out.segment(b, e - b) = vb + (lam / xn) * xb;
        } else {
            const double vn = vb.norm();
            out.segment(b, e - b) = vn > lam ? Vector((1.0 - lam / vn) * vb) : Vector::Zero(e - b);
        }
    }
    return out;
}

ProxJacobian::ProxJacobian(const SeparableRegularizer& reg, const Vector& u, double t)
    : active_(static_cast<size_t>(u.size()), 0)
{
    require(u.size() == reg.dimension(), "ProxJacobian: dimension mismatch");
    const double kappa = t * reg.lambda();
    switch (reg.kind()) {
    case RegularizerKind::zero:
        std::fill(active_.begin(), active_.end(), 1);
        active_count_ = u.size();
        return;
    case RegularizerKind::l1:
        for (Index i = 0; i < u.size(); ++i) {
            if (std::abs(u[i]) > kappa) {
                active_[i] = 1;
                ++active_count_;
            }
        }
        return;
    case RegularizerKind::group_l2: break;
    }
    for (Index p = 0; p < reg.piece_count(); ++p) {
        const auto [b, e] = reg.piece_range(p);
        const double nrm = u.segment(b, e - b).norm();
        if (nrm <= kappa) continue;
        const double c = kappa / nrm;
        groups_.push_back({b, e, c / (1.0 - c), u.segment(b, e - b) / nrm});
        for (Index i = b; i < e; ++i) active_[i] = 1;
        active_count_ += e - b;
    }
}

void ProxJacobian::apply_inverse_minus_identity(const Vector& v, Vector& out) const
{
    out.setZero(v.size());
    for (const auto& g : groups_) {
        const auto vb = v.segment(g.begin, g.end - g.begin);
        out.segment(g.begin, g.end - g.begin) = g.ratio * (vb - g.direction * g.direction.dot(vb));
    }
}

void ProxJacobian::apply_inverse(const Vector& v, Vector& out) const
{
    apply_inverse_minus_identity(v, out);
    for (Index i = 0; i < v.size(); ++i) {
        if (active_[i]) out[i] += v[i];
    }
}

} // namespace sbcpn
