#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <sbcpn/trace_io.hpp>

namespace sbcpn {

std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv(const SolveTrace& trace, std::ostream& out)
{
    out << kTraceHeader << '\n';
    for (const auto& r : trace.records) {
        out << r.iter << ',' << format_double(r.time_s) << ',' << format_double(r.phi) << ','
            << format_double(r.resid_norm) << ',' << format_double(r.step_size) << ',' << r.ls_trials << ','
            << r.block_size << ',' << r.inner_iters << ',' << format_double(r.cert_norm) << ','
            << format_double(r.step_norm) << '\n';
    }
}

void emit_csv(const SolveTrace& trace, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(trace, out);
    out.flush();
    if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<double> CsvTable::column(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("CSV has no column '" + name + "'");
    const auto c = static_cast<size_t>(it - header.begin());
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row.at(c));
    return out;
}

CsvTable read_csv(std::istream& in)
{
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("CSV: missing header");
    {
        std::istringstream s(line);
        std::string cell;
        while (std::getline(s, cell, ',')) t.header.push_back(cell);
    }
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<double> row;
        size_t pos = 0;
        for (;;) {
            const size_t comma = line.find(',', pos);
            const std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (cell.empty()) {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
            } else {
                size_t used = 0;
                try {
                    row.push_back(std::stod(cell, &used));
                } catch (const std::exception&) {
                    used = 0;
                }
                if (used != cell.size())
                    throw ParseError("CSV line " + std::to_string(lineno) + ": bad number '" + cell + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (row.size() != t.header.size())
            throw ParseError("CSV line " + std::to_string(lineno) + ": wrong number of cells");
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_csv(in);
}

std::vector<AverageRow> average_traces(const std::vector<const SolveTrace*>& traces)
{
    std::vector<AverageRow> out;
    if (traces.empty()) return out;
    size_t len = std::numeric_limits<size_t>::max();
    for (const auto* t : traces) len = std::min(len, t->records.size());
    const double count = static_cast<double>(traces.size());
    for (size_t k = 0; k < len; ++k) {
        AverageRow row;
        row.iter = static_cast<Index>(k);
        for (const auto* t : traces) {
            row.time_s += t->records[k].time_s;
            row.phi += t->records[k].phi;
            row.resid_norm += t->records[k].resid_norm;
        }
        row.time_s /= count;
        row.phi /= count;
        row.resid_norm /= count;
        out.push_back(row);
    }
    return out;
}

void write_average_csv(const std::vector<AverageRow>& rows, std::ostream& out)
{
    out << "iter,time_s,phi,resid_norm\n";
    for (const auto& r : rows)
        out << r.iter << ',' << format_double(r.time_s) << ',' << format_double(r.phi) << ','
            << format_double(r.resid_norm) << '\n';
}

void write_distance_csv(const std::vector<std::vector<double>>& distances, std::ostream& out)
{
    size_t len = 0;
    for (const auto& d : distances) len = std::max(len, d.size());
    out << "iter";
    for (size_t t = 0; t < distances.size(); ++t) out << ",trial_" << t;
    out << '\n';
    for (size_t k = 0; k < len; ++k) {
        out << k;
        for (const auto& d : distances) {
            out << ',';
            if (k < d.size()) out << format_double(d[k]);
        }
        out << '\n';
    }
}

std::vector<double> reference_distances(const SolveTrace& trace, const Vector& x_ref)
{
    std::vector<double> out;
    out.reserve(trace.iterates.size());
    for (const auto& x : trace.iterates) out.push_back((x - x_ref).norm());
    return out;
}

} // namespace sbcpn
