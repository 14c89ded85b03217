#pragma once
#include <vector>
#include <sbcpn/types.hpp>

namespace sbcpn {

/// Sorted, duplicate-free, nonempty subset of {0, ..., n-1}.
class BlockIndexSet
{
public:
    BlockIndexSet(std::vector<Index> indices, Index n);

    static BlockIndexSet full(Index n);
    static BlockIndexSet range(Index begin, Index end, Index n);

    Index size() const { return static_cast<Index>(indices_.size()); }
    Index ambient_dimension() const { return n_; }
    bool is_full() const { return size() == n_; }
    const std::vector<Index>& indices() const { return indices_; }
    Index operator[](Index i) const { return indices_[static_cast<size_t>(i)]; }
    auto begin() const { return indices_.begin(); }
    auto end() const { return indices_.end(); }

    /// x_S
    Vector gather(const Vector& x) const;
    /// x_S <- y
    void scatter(const Vector& y, Vector& x) const;
    /// zero-extension of y to R^n
    Vector embed(const Vector& y) const;

    friend bool operator==(const BlockIndexSet& a, const BlockIndexSet& b)
    {
        return a.n_ == b.n_ && a.indices_ == b.indices_;
    }

private:
    std::vector<Index> indices_;
    Index n_;
};

} // namespace sbcpn
