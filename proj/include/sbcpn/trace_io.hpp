#pragma once
#include <iosfwd>
#include <string>
#include <vector>
#include <sbcpn/driver.hpp>

namespace sbcpn {

inline constexpr const char* kTraceHeader =
    "iter,time_s,phi,resid_norm,step_size,ls_trials,block_size,inner_iters,cert_norm,step_norm";

/// %.17g
std::string format_double(double v);

void write_csv(const SolveTrace& trace, std::ostream& out);
/// Throws std::runtime_error naming the path on I/O failure.
void emit_csv(const SolveTrace& trace, const std::string& path);

struct CsvTable
{
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const;
};

/// Numeric CSV reader; empty cells read as NaN.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

struct AverageRow
{
    Index iter = 0;
    double time_s = 0.0;
    double phi = 0.0;
    double resid_norm = 0.0;
};

/// Per-iteration means over the traces, truncated to the shortest one.
std::vector<AverageRow> average_traces(const std::vector<const SolveTrace*>& traces);
void write_average_csv(const std::vector<AverageRow>& rows, std::ostream& out);

/*
 * One row per iteration index up to the longest trace: iter followed by
 * ||x^k - x_ref|| for each trace, blank once that trace has ended.
 */
void write_distance_csv(const std::vector<std::vector<double>>& distances, std::ostream& out);

std::vector<double> reference_distances(const SolveTrace& trace, const Vector& x_ref);

} // namespace sbcpn
