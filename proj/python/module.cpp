#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <sbcpn/residual.hpp>
#include <sbcpn/runner.hpp>
#include <sbcpn/trace_io.hpp>

namespace py = pybind11;
using namespace sbcpn;

namespace {

SeparableRegularizer make_regularizer(const std::string& kind, Index n, double lambda, Index group_width)
{
    if (kind == "zero") return SeparableRegularizer::zero(n);
    if (kind == "l1") return SeparableRegularizer::l1(n, lambda);
    if (kind == "group_l2") return SeparableRegularizer::group_l2_uniform(n, group_width, lambda);
    throw py::value_error("unknown regularizer '" + kind + "' (expected zero, l1 or group_l2)");
}

py::dict trace_to_dict(const SolveTrace& t)
{
    py::dict out;
    out["status"] = std::string(status_name(t.status));
    out["message"] = t.message;
    out["x"] = t.x_final;
    out["phi"] = t.phi_final;
    py::dict cols;
    std::vector<double> phi, resid, step, time, step_norm, cert;
    std::vector<Index> iter, trials, block, inner;
    for (const auto& r : t.records) {
        iter.push_back(r.iter);
        time.push_back(r.time_s);
        phi.push_back(r.phi);
        resid.push_back(r.resid_norm);
        step.push_back(r.step_size);
        trials.push_back(r.ls_trials);
        block.push_back(r.block_size);
        inner.push_back(r.inner_iters);
        cert.push_back(r.cert_norm);
        step_norm.push_back(r.step_norm);
    }
    cols["iter"] = iter;
    cols["time_s"] = time;
    cols["phi"] = phi;
    cols["resid_norm"] = resid;
    cols["step_size"] = step;
    cols["ls_trials"] = trials;
    cols["block_size"] = block;
    cols["inner_iters"] = inner;
    cols["cert_norm"] = cert;
    cols["step_norm"] = step_norm;
    out["records"] = cols;
    return out;
}

ExperimentConfig config_from_text(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in, "<python>");
}

} // namespace

PYBIND11_MODULE(_sbcpn, m)
{
    m.doc() = "Stochastic block-coordinate proximal Newton solver";

    py::register_exception<ContractViolation>(m, "ContractViolation", PyExc_ValueError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

    m.def("dct2", &dct2, py::arg("x"), "Orthonormal DCT-II.");
    m.def("idct2", &idct2, py::arg("y"), "Inverse of dct2.");

    m.def(
        "prox",
        [](const Vector& u, double t, const std::string& kind, double lambda, Index group_width) {
            return prox_full(make_regularizer(kind, u.size(), lambda, group_width), u, t);
        },
        py::arg("u"), py::arg("t") = 1.0, py::arg("kind") = "l1", py::arg("lam") = 1.0, py::arg("group_width") = 5,
        "prox_{t g}(u) for g in {zero, l1, group_l2}.");

    m.def(
        "gen_students_t",
        [](Index n, std::uint64_t seed, const std::string& measurement) {
            if (measurement != "dct" && measurement != "gaussian")
                throw py::value_error("measurement must be dct or gaussian");
            const auto inst =
                gen_students_t(n, seed, measurement == "dct" ? MeasurementKind::dct : MeasurementKind::gaussian);
            py::dict out;
            out["A"] = inst.A;
            out["b"] = inst.b;
            out["x_true"] = inst.x_true;
            out["nu"] = inst.nu;
            out["lam"] = inst.lambda;
            return out;
        },
        py::arg("n"), py::arg("seed") = 0, py::arg("measurement") = "dct");

    m.def(
        "students_t_residual",
        [](const Matrix& A, const Vector& b, double nu, double lambda, const Vector& x) {
            const CompositeProblem p(std::make_shared<StudentsTOracle>(A, b, nu),
                                     SeparableRegularizer::l1(A.cols(), lambda));
            Vector grad;
            p.smooth().value_and_gradient(x, grad);
            return residual(p, x, grad).g_full;
        },
        py::arg("A"), py::arg("b"), py::arg("nu"), py::arg("lam"), py::arg("x"),
        "KKT residual x - prox(x - grad f(x)) of the l1-regularized Student's t problem.");

    m.def(
        "solve",
        [](const std::string& config_text, std::uint64_t seed) {
            const ExperimentConfig cfg = config_from_text(config_text);
            const BuiltProblem built = build_problem(cfg);
            SolverConfig sc = cfg.solver;
            sc.seed = seed;
            SolveTrace tr;
            {
                py::gil_scoped_release release;
                tr = solve(built.problem, sc, build_strategy(cfg, built.problem));
            }
            return trace_to_dict(tr);
        },
        py::arg("config"), py::arg("seed") = 0,
        "Run one trial of a config given as 'key = value' text and return its trace.");

    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            const ExperimentConfig cfg = config_from_text(config_text);
            ExperimentResult res;
            {
                py::gil_scoped_release release;
                res = run_experiment(cfg);
            }
            py::dict out;
            out["files"] = res.files;
            out["warnings"] = res.warnings;
            out["all_converged"] = res.all_converged;
            return out;
        },
        py::arg("config"), "Run every trial of a config and write the CSV files into its output_dir.");

    m.attr("TRACE_HEADER") = kTraceHeader;
}
