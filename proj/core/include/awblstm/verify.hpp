#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "awblstm/corpus.hpp"
#include "awblstm/model.hpp"

namespace awblstm {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// A toy model small enough to finite-difference every parameter in seconds:
/// vocabulary of 20 words, embedding dims 4/2/2, h1 = h2 = 3, parts of at
/// most 4 tokens.
ModelConfig toy_config(std::uint64_t seed = 7);
std::vector<PairInstance> toy_instances();

struct GradCheckSummary {
    double max_rel_err = 0.0;
    std::string worst_param;
    std::size_t params_checked = 0;
};

/// Central finite differences (step 1e-5) of the summed toy-instance loss
/// against the tape gradient, over every element of every parameter tensor.
GradCheckSummary model_gradient_check(std::uint64_t seed = 7);

/// Verification suites behind `verify --suite ...`. Each returns one entry
/// per check; a failed entry carries the violated invariant in `detail`.
std::vector<CheckResult> run_gradcheck_suite();
std::vector<CheckResult> run_oracle_suite();
std::vector<CheckResult> run_properties_suite();

}  // namespace awblstm
