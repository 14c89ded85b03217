#pragma once
#include <sbcpn/problem.hpp>

namespace sbcpn {

/// KKT residual G(x) = x - prox_g(x - grad f(x)); zero exactly at stationary points.
struct ResidualReport
{
    Vector g_full;
    double norm = 0.0;
    Vector per_coordinate_abs;
};

/// `grad` must be grad f(x); it is passed in so the caller evaluates it once.
ResidualReport residual(const CompositeProblem& problem, const Vector& x, const Vector& grad);

/*
 * G_S(y) = y - prox_{g_S}(y - grad_S) with y = x_S. Equals G(x)_S when S is
 * a union of whole regularizer pieces; group-splitting blocks are rejected.
 */
Vector residual_restricted(const CompositeProblem& problem, const Vector& x, const Vector& grad,
                           const BlockIndexSet& block);

} // namespace sbcpn
