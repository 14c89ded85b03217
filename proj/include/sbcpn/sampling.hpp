#pragma once
#include <optional>
#include <random>
#include <string_view>
#include <vector>
#include <sbcpn/block.hpp>

namespace sbcpn {

enum class SamplingKind { full, uniform, cyclic_contiguous, cyclic_permuted, top_k };

/*
 * Block selection rule. Units are coordinates, or contiguous groups when
 * constructed from group offsets; in the latter case every strategy picks
 * group indices and expands them to coordinates.
 *
 * Cyclic strategies keep a cursor into the current cycle order, so one
 * instance must not be shared between solver runs.
 */
class SamplingStrategy
{
public:
    SamplingStrategy(SamplingKind kind, Index size, Index n);
    SamplingStrategy(SamplingKind kind, Index size, std::vector<Index> group_starts);

    /// "full" | "uniform" | "cyc-contig" | "cyc-perm" | "topk"
    static SamplingKind parse_kind(std::string_view name);
    static std::string_view kind_name(SamplingKind kind);

    SamplingKind kind() const { return kind_; }
    Index size() const { return size_; }
    Index unit_count() const { return static_cast<Index>(starts_.size()) - 1; }
    Index dimension() const { return starts_.back(); }
    bool grouped() const { return grouped_; }

    /// residual_abs (|G(x)| per coordinate) is required by top_k.
    BlockIndexSet sample(std::mt19937_64& rng, const Vector* residual_abs = nullptr);

private:
    BlockIndexSet expand(std::vector<Index> units) const;
    void start_cycle(std::mt19937_64& rng);

    SamplingKind kind_;
    Index size_;
    bool grouped_;
    std::vector<Index> starts_;
    std::vector<Index> cycle_;   // unit order of the current cycle
    size_t cursor_ = 0;
};

/// p_min for uniform sampling and c for top-k, in units of the strategy.
struct StrategyConstants
{
    std::optional<double> p_min;
    std::optional<double> c;
};

StrategyConstants strategy_constants(const SamplingStrategy& strategy, Index n);

} // namespace sbcpn
