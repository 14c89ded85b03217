#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <sbcpn/libsvm.hpp>

namespace sbcpn {

namespace {

struct Sample
{
    double label;
    std::vector<std::pair<Index, double>> entries;
};

double parse_number(const std::string& tok, int lineno, const char* what)
{
    const char* begin = tok.c_str();
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ParseError("line " + std::to_string(lineno) + ": malformed " + what + " '" + tok + "'");
    return v;
}

} // namespace

LibsvmData parse_libsvm(std::istream& in, Index n)
{
    require(n >= 1, "parse_libsvm: n must be positive");
    std::vector<Sample> samples;
    LibsvmData out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        std::istringstream tokens(line);
        std::string tok;
        if (!(tokens >> tok)) continue;
        Sample s{parse_number(tok, lineno, "label"), {}};
        std::set<Index> seen;
        while (tokens >> tok) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
                throw ParseError("line " + std::to_string(lineno) + ": expected idx:val, got '" + tok + "'");
            const std::string idx_tok = tok.substr(0, colon);
            char* end = nullptr;
            const long long idx = std::strtoll(idx_tok.c_str(), &end, 10);
            if (*end != '\0')
                throw ParseError("line " + std::to_string(lineno) + ": malformed index '" + idx_tok + "'");
            if (idx < 1 || idx > n)
                throw ParseError("line " + std::to_string(lineno) + ": index " + idx_tok + " outside [1, " +
                                 std::to_string(n) + "]");
            if (!seen.insert(static_cast<Index>(idx)).second)
                throw ParseError("line " + std::to_string(lineno) + ": duplicate index " + idx_tok);
            const double val = parse_number(tok.substr(colon + 1), lineno, "value");
            if (val != 0.0) s.entries.emplace_back(static_cast<Index>(idx - 1), val);
        }
        double norm2 = 0.0;
        for (const auto& e : s.entries) norm2 += e.second * e.second;
        if (norm2 == 0.0) {
            out.warnings.push_back("line " + std::to_string(lineno) + ": sample has no nonzero features, dropped");
            continue;
        }
        const double inv = 1.0 / std::sqrt(norm2);
        for (auto& e : s.entries) e.second *= inv;
        samples.push_back(std::move(s));
    }

    const auto m = static_cast<Index>(samples.size());
    std::vector<Eigen::Triplet<double, Index>> trip;
    out.labels.resize(m);
    for (Index j = 0; j < m; ++j) {
        out.labels[j] = samples[static_cast<size_t>(j)].label;
        for (const auto& [i, v] : samples[static_cast<size_t>(j)].entries) trip.emplace_back(i, j, v);
    }
    out.Z.resize(n, m);
    out.Z.setFromTriplets(trip.begin(), trip.end());
    out.Z.makeCompressed();
    return out;
}

LibsvmData load_libsvm(const std::string& path, Index n)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open data file '" + path + "'");
    try {
        return parse_libsvm(in, n);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

Vector map_labels(const Vector& raw, LabelCoding coding)
{
    const double negative = coding == LabelCoding::zero_one ? 0.0 : -1.0;
    return raw.unaryExpr([negative](double v) { return v > 0.0 ? 1.0 : negative; });
}

ClassificationInstance select_samples(const LibsvmData& data, Index m_select, std::uint64_t seed, double lambda,
                                      LabelCoding coding)
{
    const Index m = data.Z.cols();
    require(m >= 1, "select_samples: no samples");
    std::vector<Index> order(static_cast<size_t>(m));
    std::iota(order.begin(), order.end(), Index{0});
    Index keep = m;
    if (m_select > 0 && m_select < m) {
        std::mt19937_64 rng(seed);
        std::shuffle(order.begin(), order.end(), rng);
        keep = m_select;
        order.resize(static_cast<size_t>(keep));
    }
    // column-major copy so samples can be walked column by column
    Eigen::SparseMatrix<double, Eigen::ColMajor, Index> cols = data.Z;
    std::vector<Eigen::Triplet<double, Index>> trip;
    ClassificationInstance inst;
    inst.labels.resize(keep);
    const Vector mapped = map_labels(data.labels, coding);
    for (Index j = 0; j < keep; ++j) {
        const Index src = order[static_cast<size_t>(j)];
        inst.labels[j] = mapped[src];
        for (decltype(cols)::InnerIterator it(cols, src); it; ++it) trip.emplace_back(it.row(), j, it.value());
    }
    inst.Z.resize(data.Z.rows(), keep);
    inst.Z.setFromTriplets(trip.begin(), trip.end());
    inst.Z.makeCompressed();
    inst.lambda = lambda;
    return inst;
}

} // namespace sbcpn
