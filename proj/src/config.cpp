#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <sstream>
#include <sbcpn/config.hpp>

namespace sbcpn {

std::string_view family_name(ProblemFamily f)
{
    switch (f) {
    case ProblemFamily::students_t: return "students_t";
    case ProblemFamily::geman_mcclure: return "geman_mcclure";
    case ProblemFamily::biweight_group: return "biweight_group";
    }
    return "?";
}

void apply_family_defaults(ProblemFamily family, SolverConfig& solver)
{
    solver.theta = 0.6;
    switch (family) {
    case ProblemFamily::students_t:
        solver.mu = 1e-4;
        solver.tau = 1e-5;
        solver.stop_tol = 1e-4;
        break;
    case ProblemFamily::geman_mcclure:
        solver.mu = 1e-5;
        solver.tau = 5e-6;
        solver.stop_tol = 1e-8;
        break;
    case ProblemFamily::biweight_group:
        solver.mu = 1e-3;
        solver.tau = 1e-5;
        solver.stop_tol = 1e-6;
        break;
    }
}

namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct Entry
{
    std::string value;
    int line;
};

class Reader
{
public:
    Reader(std::map<std::string, Entry> entries, std::string source)
        : entries_(std::move(entries)), source_(std::move(source))
    {}

    template <class F>
    void with(const std::string& key, F&& apply)
    {
        auto it = entries_.find(key);
        if (it == entries_.end()) return;
        try {
            apply(it->second.value);
        } catch (const std::exception& e) {
            throw ParseError(where(it->second.line) + key + ": " + e.what());
        }
        entries_.erase(it);
    }

    void finish() const
    {
        if (entries_.empty()) return;
        const auto& [key, entry] = *entries_.begin();
        throw ParseError(where(entry.line) + "unknown key '" + key + "'");
    }

private:
    std::string where(int line) const { return source_ + ":" + std::to_string(line) + ": "; }

    std::map<std::string, Entry> entries_;
    std::string source_;
};

double to_double(const std::string& v)
{
    double out = 0.0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ParseError("expected a number, got '" + v + "'");
    return out;
}

long long to_integer(const std::string& v)
{
    long long out = 0;
    const char* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw ParseError("expected an integer, got '" + v + "'");
    return out;
}

bool to_bool(const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ParseError("expected true or false, got '" + v + "'");
}

ProblemFamily to_family(const std::string& v)
{
    if (v == "students_t") return ProblemFamily::students_t;
    if (v == "geman_mcclure") return ProblemFamily::geman_mcclure;
    if (v == "biweight_group") return ProblemFamily::biweight_group;
    throw ParseError("unknown problem '" + v + "' (expected students_t, geman_mcclure or biweight_group)");
}

InnerSolver to_inner(const std::string& v)
{
    if (v == "auto") return InnerSolver::automatic;
    if (v == "prox_grad") return InnerSolver::prox_gradient;
    if (v == "cg") return InnerSolver::conjugate_gradient;
    if (v == "ssn") return InnerSolver::semismooth_newton;
    throw ParseError("unknown inner solver '" + v + "' (expected auto, prox_grad, cg or ssn)");
}

} // namespace

ExperimentConfig parse_config(std::istream& in, const std::string& source)
{
    std::map<std::string, Entry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ParseError(source + ":" + std::to_string(lineno) + ": empty key or value");
        if (entries.count(key))
            throw ParseError(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        entries[key] = Entry{value, lineno};
    }

    ExperimentConfig cfg;
    for (const auto& [k, e] : entries) cfg.raw[k] = e.value;
    Reader r(std::move(entries), source);

    r.with("problem", [&](const std::string& v) { cfg.problem = to_family(v); });
    apply_family_defaults(cfg.problem, cfg.solver);
    SolverConfig& s = cfg.solver;

    auto index = [](Index& dst, long long lo) {
        return [&dst, lo](const std::string& v) {
            const long long x = to_integer(v);
            if (x < lo) throw ParseError("must be at least " + std::to_string(lo));
            dst = static_cast<Index>(x);
        };
    };
    auto seed = [](std::uint64_t& dst) {
        return [&dst](const std::string& v) {
            const long long x = to_integer(v);
            if (x < 0) throw ParseError("seeds must be nonnegative");
            dst = static_cast<std::uint64_t>(x);
        };
    };
    auto real = [](double& dst) { return [&dst](const std::string& v) { dst = to_double(v); }; };
    auto flag = [](bool& dst) { return [&dst](const std::string& v) { dst = to_bool(v); }; };
    auto text = [](std::string& dst) { return [&dst](const std::string& v) { dst = v; }; };

    r.with("n", index(cfg.n, 1));
    r.with("instance", text(cfg.instance_path));
    r.with("measurement", [&](const std::string& v) {
        if (v == "dct") cfg.measurement = MeasurementKind::dct;
        else if (v == "gaussian") cfg.measurement = MeasurementKind::gaussian;
        else throw ParseError("expected dct or gaussian");
    });
    r.with("instance_seed", seed(cfg.instance_seed));
    r.with("data", text(cfg.data_path));
    r.with("m", index(cfg.m, 1));
    r.with("m_select", index(cfg.m_select, 0));
    r.with("lambda", real(cfg.lambda));

    r.with("algorithm", [&](const std::string& v) { s.algorithm = parse_algorithm(v); });
    r.with("mu", real(s.mu));
    r.with("tau", real(s.tau));
    r.with("theta", real(s.theta));
    r.with("max_outer", index(s.max_outer, 0));
    r.with("stop_tol", real(s.stop_tol));
    r.with("vm_gamma", real(s.vm_gamma));
    r.with("vm_inner_iters", index(s.vm_inner_iters, 1));
    r.with("max_inner", index(s.max_inner, 1));
    r.with("max_line_search", index(s.max_line_search, 1));
    r.with("inner_solver", [&](const std::string& v) { s.inner_solver = to_inner(v); });
    r.with("hessian", [&](const std::string& v) {
        if (v == "oracle") s.hessian = HessianModel::oracle;
        else if (v == "zero") s.hessian = HessianModel::zero;
        else throw ParseError("expected oracle or zero");
    });
    r.with("eta", [&](const std::string& v) { s.fixed_eta = to_double(v); });
    r.with("record_wall_clock", flag(s.record_wall_clock));

    r.with("strategy", [&](const std::string& v) {
        SamplingStrategy::parse_kind(v);  // validates the name
        cfg.strategy = v;
    });
    r.with("block_size", index(cfg.block_size, 0));
    r.with("trials", index(cfg.trials, 1));
    r.with("seed_base", seed(cfg.seed_base));
    r.with("output_dir", text(cfg.output_dir));
    r.with("reference", flag(cfg.reference));
    r.with("reference_tol", real(cfg.reference_tol));
    r.with("reference_max_outer", index(cfg.reference_max_outer, 1));
    r.finish();

    try {
        s.validate();
    } catch (const ContractViolation& e) {
        throw ParseError(source + ": " + e.what());
    }
    if (cfg.problem == ProblemFamily::students_t && cfg.instance_path.empty() && cfg.n < 40)
        throw ParseError(source + ": students_t needs n >= 40");
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path + "'");
    return parse_config(in, path);
}

} // namespace sbcpn
