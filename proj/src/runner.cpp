#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>
#include <sbcpn/libsvm.hpp>
#include <sbcpn/runner.hpp>
#include <sbcpn/trace_io.hpp>

namespace sbcpn {

namespace {

ClassificationInstance classification_data(const ExperimentConfig& cfg, LabelCoding coding,
                                           std::vector<std::pair<std::string, std::string>>& meta,
                                           std::vector<std::string>& warnings)
{
    if (cfg.data_path.empty()) {
        meta.emplace_back("data", "synthetic gaussian, seed " + std::to_string(cfg.instance_seed));
        return gen_classification(cfg.n, cfg.m, cfg.lambda, coding, cfg.instance_seed);
    }
    LibsvmData data = load_libsvm(cfg.data_path, cfg.n);
    for (auto& w : data.warnings) warnings.push_back(cfg.data_path + ": " + w);
    meta.emplace_back("data", cfg.data_path);
    meta.emplace_back("samples_read", std::to_string(data.Z.cols()));
    meta.emplace_back("m_select_rule", "shuffle with seed " + std::to_string(cfg.instance_seed) + ", keep first " +
                                           std::to_string(cfg.m_select == 0 ? data.Z.cols() : cfg.m_select));
    return select_samples(data, cfg.m_select, cfg.instance_seed, cfg.lambda, coding);
}

void describe_classification(const ClassificationInstance& inst,
                             std::vector<std::pair<std::string, std::string>>& meta)
{
    meta.emplace_back("n", std::to_string(inst.n()));
    meta.emplace_back("m", std::to_string(inst.m()));
    meta.emplace_back("lambda", format_double(inst.lambda));
}

} // namespace

BuiltProblem build_problem(const ExperimentConfig& cfg)
{
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> warnings;
    meta.emplace_back("problem", std::string(family_name(cfg.problem)));
    auto make = [&]() -> CompositeProblem {
        switch (cfg.problem) {
        case ProblemFamily::students_t: break;
        case ProblemFamily::geman_mcclure: {
            ClassificationInstance inst = classification_data(cfg, LabelCoding::zero_one, meta, warnings);
            describe_classification(inst, meta);
            return geman_mcclure_problem(inst);
        }
        case ProblemFamily::biweight_group: {
            ClassificationInstance inst = classification_data(cfg, LabelCoding::plus_minus_one, meta, warnings);
            describe_classification(inst, meta);
            meta.emplace_back("groups", "contiguous, width 5");
            return biweight_group_instance(std::move(inst)).problem;
        }
        }
        StudentsTInstance inst;
        if (!cfg.instance_path.empty()) {
            std::ifstream in(cfg.instance_path);
            if (!in) throw ParseError("cannot open instance file '" + cfg.instance_path + "'");
            inst = read_instance(in);
            meta.emplace_back("instance", cfg.instance_path);
        } else {
            inst = gen_students_t(cfg.n, cfg.instance_seed, cfg.measurement);
            meta.emplace_back("instance", "generated, seed " + std::to_string(cfg.instance_seed));
        }
        meta.emplace_back("measurement", inst.kind == MeasurementKind::dct ? "dct" : "gaussian");
        meta.emplace_back("n", std::to_string(inst.n()));
        meta.emplace_back("m", std::to_string(inst.m()));
        meta.emplace_back("nu", format_double(inst.nu));
        meta.emplace_back("lambda", format_double(inst.lambda));
        return students_t_problem(inst);
    };
    CompositeProblem problem = make();
    return BuiltProblem{std::move(problem), std::move(meta), std::move(warnings)};
}

SamplingStrategy build_strategy(const ExperimentConfig& cfg, const CompositeProblem& problem)
{
    const SamplingKind kind = SamplingStrategy::parse_kind(cfg.strategy);
    const auto& reg = problem.regularizer();
    const bool grouped = reg.kind() == RegularizerKind::group_l2;
    const Index units = reg.piece_count();
    Index size = cfg.block_size;
    if (size == 0) size = grouped ? 1 : std::max<Index>(1, units / 4);
    if (kind == SamplingKind::full) size = units;
    require(size <= units, "block_size " + std::to_string(size) + " exceeds the " + std::to_string(units) +
                               " sampling units");
    if (grouped) return SamplingStrategy(kind, size, reg.piece_starts());
    return SamplingStrategy(kind, size, problem.dimension());
}

unsigned trial_thread_cap()
{
    if (const char* env = std::getenv("SBCPN_MAX_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<SolveTrace> run_trials(const CompositeProblem& problem, const ExperimentConfig& cfg,
                                   const std::vector<std::uint64_t>& seeds, bool record_iterates)
{
    std::vector<SolveTrace> out(seeds.size());
    std::vector<std::exception_ptr> errors(seeds.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t t = next++; t < seeds.size(); t = next++) {
            try {
                SolverConfig sc = cfg.solver;
                sc.seed = seeds[t];
                sc.record_iterates = record_iterates;
                out[t] = solve(problem, sc, build_strategy(cfg, problem));
            } catch (...) {
                errors[t] = std::current_exception();
            }
        }
    };
    const size_t threads = std::min<size_t>(trial_thread_cap(), seeds.size());
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg)
{
    BuiltProblem built = build_problem(cfg);
    const CompositeProblem& problem = built.problem;
    ExperimentResult res;
    res.warnings = built.warnings;

    std::vector<std::uint64_t> seeds;
    for (Index t = 0; t < cfg.trials; ++t) seeds.push_back(cfg.seed_base + static_cast<std::uint64_t>(t));
    res.trials = run_trials(problem, cfg, seeds, cfg.reference);

    if (cfg.reference) {
        SolverConfig rc = cfg.solver;
        rc.algorithm = Algorithm::line_search;
        rc.stop_tol = cfg.reference_tol;
        rc.max_outer = cfg.reference_max_outer;
        rc.seed = cfg.seed_base;
        rc.record_wall_clock = false;
        ExperimentConfig full = cfg;
        full.strategy = "full";
        res.reference = run_alg1(problem, rc, build_strategy(full, problem));
        if (res.reference->status != SolveStatus::converged)
            res.warnings.push_back("reference run did not reach " + format_double(cfg.reference_tol) + ": " +
                                   res.reference->message);
    }

    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    auto path_of = [&](const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); };
    auto open = [&](const std::string& name) {
        std::ofstream f(path_of(name), std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + path_of(name) + "' for writing");
        res.files.push_back(path_of(name));
        return f;
    };

    std::vector<const SolveTrace*> averaged;
    res.all_converged = true;
    for (size_t t = 0; t < res.trials.size(); ++t) {
        const SolveTrace& tr = res.trials[t];
        const std::string name = "trial_" + std::to_string(t) + ".csv";
        emit_csv(tr, path_of(name));
        res.files.push_back(path_of(name));
        if (tr.status != SolveStatus::converged) res.all_converged = false;
        if (tr.status == SolveStatus::inner_failure || tr.status == SolveStatus::line_search_failure)
            res.warnings.push_back("trial " + std::to_string(t) + " excluded from averages: " + tr.message);
        else
            averaged.push_back(&tr);
    }
    {
        auto f = open("average.csv");
        write_average_csv(average_traces(averaged), f);
    }
    if (res.reference) {
        std::vector<std::vector<double>> dist;
        for (const auto& tr : res.trials) dist.push_back(reference_distances(tr, res.reference->x_final));
        auto f = open("reference_distance.csv");
        write_distance_csv(dist, f);
    }
    {
        auto f = open("metadata.txt");
        for (const auto& [k, v] : built.metadata) f << k << " = " << v << '\n';
        const SolverConfig& s = cfg.solver;
        f << "algorithm = " << algorithm_name(s.algorithm) << '\n';
        f << "mu = " << format_double(s.mu) << '\n';
        f << "tau = " << format_double(s.tau) << '\n';
        f << "theta = " << format_double(s.theta) << '\n';
        f << "stop_tol = " << format_double(s.stop_tol) << '\n';
        f << "max_outer = " << s.max_outer << '\n';
        const SamplingStrategy st = build_strategy(cfg, problem);
        f << "strategy = " << cfg.strategy << '\n';
        f << "block_size = " << st.size() << (st.grouped() ? " groups" : " coordinates") << '\n';
        f << "trials = " << cfg.trials << '\n';
        f << "seed_base = " << cfg.seed_base << '\n';
        for (size_t t = 0; t < res.trials.size(); ++t)
            f << "trial_" << t << " = " << status_name(res.trials[t].status) << ", "
              << res.trials[t].records.size() - 1 << " iterations\n";
        if (res.reference)
            f << "reference = full sampling, " << status_name(res.reference->status) << ", "
              << res.reference->records.size() - 1 << " iterations\n";
    }
    return res;
}

CheckResult check_experiment(const ExperimentConfig& cfg)
{
    BuiltProblem built = build_problem(cfg);
    std::vector<std::uint64_t> seeds;
    for (Index t = 0; t < cfg.trials; ++t) seeds.push_back(cfg.seed_base + static_cast<std::uint64_t>(t));
    const std::vector<SolveTrace> traces = run_trials(built.problem, cfg, seeds, true);
    CheckResult res;
    res.ok = true;
    for (const auto& tr : traces) {
        auto reports = check_trace(built.problem, cfg.solver, build_strategy(cfg, built.problem), tr);
        for (const auto& r : reports)
            if (!r.ok()) res.ok = false;
        if (tr.status == SolveStatus::inner_failure || tr.status == SolveStatus::line_search_failure) res.ok = false;
        res.per_trial.push_back(std::move(reports));
        res.statuses.push_back(tr.status);
    }
    return res;
}

} // namespace sbcpn
