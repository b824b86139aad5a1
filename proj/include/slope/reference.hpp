#pragma once

#include "slope/solver.hpp"

namespace slope {

/// Exhaustive reference solutions for small instances. These enumerate
/// candidate solution patterns and compare full objective values, so they
/// share no code with the production prox or solver. Exponential in p;
/// guarded to p <= 16 (prox) and p <= 6 (solver).
namespace reference {

/// argmin_b 1/2 ||y - b||^2 + J_lambda(b) by enumerating every consecutive
/// block partition of the leading ranks.
Vector prox_sorted_l1(const Vector& y, const WeightVector& lambda);

/// Full SLOPE program by enumerating sign/rank/block patterns and solving
/// the per-pattern stationarity system.
Vector fit_slope(const Design& X, const Vector& y, const WeightVector& lambda);

}  // namespace reference
}  // namespace slope
