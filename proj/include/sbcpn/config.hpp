#pragma once
#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <sbcpn/driver.hpp>
#include <sbcpn/experiments.hpp>

namespace sbcpn {

enum class ProblemFamily { students_t, geman_mcclure, biweight_group };

std::string_view family_name(ProblemFamily f);

/*
 * One experiment: a problem family, solver settings, a sampling rule and a
 * number of seeded trials. Trial t uses seed seed_base + t.
 */
struct ExperimentConfig
{
    ProblemFamily problem = ProblemFamily::students_t;

    // students_t: either an instance file or a generated instance
    Index n = 512;
    std::string instance_path;
    MeasurementKind measurement = MeasurementKind::dct;
    std::uint64_t instance_seed = 0;

    // classification families: libsvm file, or synthetic data when empty
    std::string data_path;
    Index m = 128;          // synthetic sample count
    Index m_select = 0;     // 0 keeps every sample
    double lambda = 0.001;

    SolverConfig solver;
    std::string strategy = "topk";
    Index block_size = 0;   // in sampling units; 0 picks the family default

    Index trials = 1;
    std::uint64_t seed_base = 0;
    std::string output_dir = "sbcpn_out";

    bool reference = true;
    double reference_tol = 1e-10;
    Index reference_max_outer = 10000;

    /// Raw key/value pairs as read, for the metadata file.
    std::map<std::string, std::string> raw;
};

/*
 * Flat "key = value" document; '#' starts a comment. Unknown keys and
 * malformed values raise ParseError naming the line. Solver defaults
 * depend on the problem family and apply unless overridden.
 */
ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

/// mu and tau defaults for a family: students_t 1e-4/1e-5, geman_mcclure 1e-5/5e-6, biweight_group 1e-3/1e-5.
void apply_family_defaults(ProblemFamily family, SolverConfig& solver);

} // namespace sbcpn
