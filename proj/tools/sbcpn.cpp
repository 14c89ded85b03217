// Command line front end: run experiments, generate instances, check invariants.

#include <fstream>
#include <iostream>
#include <CLI11.hpp>
#include <sbcpn/runner.hpp>

namespace {

int cmd_run(const std::string& path)
{
    const sbcpn::ExperimentConfig cfg = sbcpn::load_config(path);
    const sbcpn::ExperimentResult res = sbcpn::run_experiment(cfg);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    for (size_t t = 0; t < res.trials.size(); ++t)
        std::cout << "trial " << t << ": " << res.trials[t].message << '\n';
    for (const auto& f : res.files) std::cout << "wrote " << f << '\n';
    return res.all_converged ? 0 : 1;
}

int cmd_gen(sbcpn::Index n, std::uint64_t seed, const std::string& out, const std::string& measurement)
{
    const auto kind = measurement == "gaussian" ? sbcpn::MeasurementKind::gaussian : sbcpn::MeasurementKind::dct;
    const sbcpn::StudentsTInstance inst = sbcpn::gen_students_t(n, seed, kind);
    std::ofstream f(out);
    if (!f) {
        std::cerr << "error: cannot open '" << out << "' for writing\n";
        return 2;
    }
    sbcpn::write_instance(f, inst);
    std::cout << "wrote " << out << " (n = " << inst.n() << ", m = " << inst.m() << ", lambda = " << inst.lambda
              << ")\n";
    return 0;
}

int cmd_check(const std::string& path)
{
    const sbcpn::ExperimentConfig cfg = sbcpn::load_config(path);
    const sbcpn::CheckResult res = sbcpn::check_experiment(cfg);
    for (size_t t = 0; t < res.per_trial.size(); ++t) {
        std::cout << "trial " << t << " (" << sbcpn::status_name(res.statuses[t]) << ")\n";
        for (const auto& r : res.per_trial[t]) {
            std::cout << "  " << (r.ok() ? "PASS " : "FAIL ") << r.name << ": " << r.checked << " checked, "
                      << r.violations << " violations";
            if (!r.ok()) std::cout << " (first at " << r.first_violation << ")";
            std::cout << '\n';
        }
    }
    return res.ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stochastic block-coordinate proximal Newton solver"};
    app.require_subcommand(1);

    std::string run_path;
    auto* run = app.add_subcommand("run", "run the trials of an experiment config and write CSV traces");
    run->add_option("config", run_path, "experiment config file")->required();

    sbcpn::Index gen_n = 0;
    std::uint64_t gen_seed = 0;
    std::string gen_out, gen_measurement = "dct";
    auto* gen = app.add_subcommand("gen-students-t", "write a Student's t regression instance");
    gen->add_option("--n", gen_n, "signal length (at least 40)")->required();
    gen->add_option("--seed", gen_seed, "generator seed")->required();
    gen->add_option("--out", gen_out, "output path")->required();
    gen->add_option("--measurement", gen_measurement, "dct or gaussian")
        ->check(CLI::IsMember({"dct", "gaussian"}));

    std::string check_path;
    auto* check = app.add_subcommand("check", "run the trials and report invariant checks only");
    check->add_option("config", check_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return cmd_run(run_path);
        if (*gen) return cmd_gen(gen_n, gen_seed, gen_out, gen_measurement);
        if (*check) return cmd_check(check_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
