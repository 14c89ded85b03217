#include <sbcpn/residual.hpp>

namespace sbcpn {

ResidualReport residual(const CompositeProblem& problem, const Vector& x, const Vector& grad)
{
    require(x.size() == problem.dimension() && grad.size() == problem.dimension(),
            "residual: dimension mismatch");
    ResidualReport report;
    report.g_full = x - prox_full(problem.regularizer(), x - grad, 1.0);
    report.norm = report.g_full.norm();
    report.per_coordinate_abs = report.g_full.cwiseAbs();
    return report;
}

Vector residual_restricted(const CompositeProblem& problem, const Vector& x, const Vector& grad,
                           const BlockIndexSet& block)
{
    require(x.size() == problem.dimension() && grad.size() == problem.dimension(),
            "residual_restricted: dimension mismatch");
    require(problem.regularizer().respects_pieces(block), "residual_restricted: block splits a regularizer group");
    const SeparableRegularizer local = problem.regularizer().restrict_to(block);
    const Vector y = block.gather(x);
    return y - prox_full(local, y - block.gather(grad), 1.0);
}

} // namespace sbcpn
