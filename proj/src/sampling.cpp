#include <algorithm>
#include <numeric>
#include <string>
#include <sbcpn/sampling.hpp>

namespace sbcpn {

SamplingStrategy::SamplingStrategy(SamplingKind kind, Index size, Index n)
    : kind_(kind), size_(size), grouped_(false)
{
    require(n >= 1, "SamplingStrategy: dimension must be positive");
    starts_.resize(static_cast<size_t>(n + 1));
    std::iota(starts_.begin(), starts_.end(), Index{0});
    if (kind_ == SamplingKind::full) size_ = n;
    require(size_ >= 1 && size_ <= n, "SamplingStrategy: block size must lie in [1, n]");
}

SamplingStrategy::SamplingStrategy(SamplingKind kind, Index size, std::vector<Index> group_starts)
    : kind_(kind), size_(size), grouped_(true), starts_(std::move(group_starts))
{
    require(starts_.size() >= 2 && starts_.front() == 0, "SamplingStrategy: invalid group table");
    for (size_t i = 1; i < starts_.size(); ++i)
        require(starts_[i] > starts_[i - 1], "SamplingStrategy: group offsets must increase");
    if (kind_ == SamplingKind::full) size_ = unit_count();
    require(size_ >= 1 && size_ <= unit_count(), "SamplingStrategy: block size must lie in [1, #groups]");
}

SamplingKind SamplingStrategy::parse_kind(std::string_view name)
{
    if (name == "full") return SamplingKind::full;
    if (name == "uniform") return SamplingKind::uniform;
    if (name == "cyc-contig") return SamplingKind::cyclic_contiguous;
    if (name == "cyc-perm") return SamplingKind::cyclic_permuted;
    if (name == "topk") return SamplingKind::top_k;
    throw ContractViolation("unknown sampling strategy '" + std::string(name) + "'");
}

std::string_view SamplingStrategy::kind_name(SamplingKind kind)
{
    switch (kind) {
    case SamplingKind::full: return "full";
    case SamplingKind::uniform: return "uniform";
    case SamplingKind::cyclic_contiguous: return "cyc-contig";
    case SamplingKind::cyclic_permuted: return "cyc-perm";
    case SamplingKind::top_k: return "topk";
    }
    return "?";
}

BlockIndexSet SamplingStrategy::expand(std::vector<Index> units) const
{
    std::sort(units.begin(), units.end());
    std::vector<Index> coords;
    for (Index u : units)
        for (Index c = starts_[u]; c < starts_[u + 1]; ++c) coords.push_back(c);
    return BlockIndexSet(std::move(coords), dimension());
}

void SamplingStrategy::start_cycle(std::mt19937_64& rng)
{
    const Index units = unit_count();
    cycle_.resize(static_cast<size_t>(units));
    std::iota(cycle_.begin(), cycle_.end(), Index{0});
    if (kind_ == SamplingKind::cyclic_permuted) {
        std::shuffle(cycle_.begin(), cycle_.end(), rng);
    } else {
        // contiguous windows of size_ units, visited in a fresh random order each cycle
        const Index windows = (units + size_ - 1) / size_;
        std::vector<Index> order(static_cast<size_t>(windows));
        std::iota(order.begin(), order.end(), Index{0});
        std::shuffle(order.begin(), order.end(), rng);
        cycle_.clear();
        for (Index w : order)
            for (Index u = w * size_; u < std::min(units, (w + 1) * size_); ++u) cycle_.push_back(u);
    }
    cursor_ = 0;
}

BlockIndexSet SamplingStrategy::sample(std::mt19937_64& rng, const Vector* residual_abs)
{
    const Index units = unit_count();
    switch (kind_) {
    case SamplingKind::full:
        return BlockIndexSet::full(dimension());

    case SamplingKind::uniform: {
        // partial Fisher-Yates
        std::vector<Index> pool(static_cast<size_t>(units));
        std::iota(pool.begin(), pool.end(), Index{0});
        for (Index i = 0; i < size_; ++i) {
            std::uniform_int_distribution<Index> pick(i, units - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        pool.resize(static_cast<size_t>(size_));
        return expand(std::move(pool));
    }

    case SamplingKind::cyclic_contiguous:
    case SamplingKind::cyclic_permuted: {
        if (cycle_.empty() || cursor_ >= cycle_.size()) start_cycle(rng);
        std::vector<Index> chosen;
        if (kind_ == SamplingKind::cyclic_contiguous) {
            // one window per call, windows may be shorter at the end
            const Index window = cycle_[cursor_] / size_;
            while (cursor_ < cycle_.size() && cycle_[cursor_] / size_ == window) chosen.push_back(cycle_[cursor_++]);
        } else {
            const size_t end = std::min(cycle_.size(), cursor_ + static_cast<size_t>(size_));
            chosen.assign(cycle_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                          cycle_.begin() + static_cast<std::ptrdiff_t>(end));
            cursor_ = end;
        }
        return expand(std::move(chosen));
    }

    case SamplingKind::top_k: {
        require(residual_abs != nullptr, "top-k sampling requires the residual magnitudes");
        require(residual_abs->size() == dimension(), "top-k sampling: residual dimension mismatch");
        std::vector<double> score(static_cast<size_t>(units));
        for (Index u = 0; u < units; ++u)
            score[u] = residual_abs->segment(starts_[u], starts_[u + 1] - starts_[u]).squaredNorm();
        std::vector<Index> order(static_cast<size_t>(units));
        std::iota(order.begin(), order.end(), Index{0});
        // ties broken by lowest index
        std::partial_sort(order.begin(), order.begin() + size_, order.end(), [&](Index a, Index b) {
            return score[a] > score[b] || (score[a] == score[b] && a < b);
        });
        order.resize(static_cast<size_t>(size_));
        return expand(std::move(order));
    }
    }
    throw ContractViolation("SamplingStrategy: unhandled kind");
}

StrategyConstants strategy_constants(const SamplingStrategy& strategy, Index n)
{
    require(n == strategy.dimension(), "strategy_constants: dimension mismatch");
    const double units = static_cast<double>(strategy.unit_count());
    const double s = static_cast<double>(strategy.size());
    switch (strategy.kind()) {
    case SamplingKind::full: return {1.0, 1.0};
    case SamplingKind::uniform: return {s / units, std::nullopt};
    case SamplingKind::top_k: return {std::nullopt, s / units};
    default: return {};
    }
}

} // namespace sbcpn
