#pragma once

#include <functional>
#include <string>
#include <vector>

namespace awblstm {

/// Central finite differences of a scalar function with respect to a flat
/// parameter vector. The function is re-evaluated from scratch for every
/// probe, so the result is independent of the tape.
std::vector<double> finite_difference(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double step);

/// |a - b| / max(|a|, |b|, floor). The floor keeps finite-difference noise on
/// near-zero gradients from registering as spurious relative error; exact
/// agreement (including 0 vs 0) reports 0.
double rel_error(double a, double b, double floor = 1e-5);

/// Largest rel_error over two equal-length gradient vectors.
double max_rel_error(const std::vector<double>& a, const std::vector<double>& b,
                     double floor = 1e-5);

}  // namespace awblstm
