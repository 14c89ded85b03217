#include <numeric>
#include <sbcpn/block.hpp>

namespace sbcpn {

BlockIndexSet::BlockIndexSet(std::vector<Index> indices, Index n)
    : indices_(std::move(indices)), n_(n)
{
    require(!indices_.empty(), "BlockIndexSet: empty index set");
    for (size_t i = 0; i < indices_.size(); ++i) {
        require(indices_[i] >= 0 && indices_[i] < n_, "BlockIndexSet: index out of range");
        require(i == 0 || indices_[i - 1] < indices_[i], "BlockIndexSet: indices must be strictly increasing");
    }
}

BlockIndexSet BlockIndexSet::full(Index n)
{
    return range(0, n, n);
}

BlockIndexSet BlockIndexSet::range(Index begin, Index end, Index n)
{
    require(begin < end, "BlockIndexSet::range: empty range");
    std::vector<Index> idx(static_cast<size_t>(end - begin));
    std::iota(idx.begin(), idx.end(), begin);
    return BlockIndexSet(std::move(idx), n);
}

Vector BlockIndexSet::gather(const Vector& x) const
{
    require(x.size() == n_, "BlockIndexSet::gather: dimension mismatch");
    Vector y(size());
    for (Index i = 0; i < size(); ++i) y[i] = x[(*this)[i]];
    return y;
}

void BlockIndexSet::scatter(const Vector& y, Vector& x) const
{
    require(y.size() == size() && x.size() == n_, "BlockIndexSet::scatter: dimension mismatch");
    for (Index i = 0; i < size(); ++i) x[(*this)[i]] = y[i];
}

Vector BlockIndexSet::embed(const Vector& y) const
{
    Vector x = Vector::Zero(n_);
    scatter(y, x);
    return x;
}

} // namespace sbcpn
