#pragma once
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>
#include <sbcpn/experiments.hpp>

namespace sbcpn {

struct LibsvmData
{
    SparseRowMatrix Z;   // n x m, unit-norm columns
    Vector labels;       // raw labels, one per kept sample
    std::vector<std::string> warnings;
};

/*
 * Parses "label idx:val idx:val ..." lines with 1-based indices into the
 * columns of an n x m matrix. Columns are scaled to unit norm; samples
 * without any nonzero feature are dropped with a warning. Blank lines and
 * '#' comments are ignored.
 */
LibsvmData parse_libsvm(std::istream& in, Index n);
LibsvmData load_libsvm(const std::string& path, Index n);

/// zero_one: label > 0 -> 1, else 0. plus_minus_one: label > 0 -> 1, else -1.
Vector map_labels(const Vector& raw, LabelCoding coding);

/// Shuffle the samples with `seed` and keep the first m_select (all when 0 or larger than m).
ClassificationInstance select_samples(const LibsvmData& data, Index m_select, std::uint64_t seed, double lambda,
                                      LabelCoding coding);

} // namespace sbcpn
