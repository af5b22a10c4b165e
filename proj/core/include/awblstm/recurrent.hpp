#pragma once

#include <cstdint>
#include <vector>

#include "awblstm/tensor.hpp"

namespace awblstm {

class Rng;

/// Gate parameters of one LSTM cell. Each weight matrix acts on the
/// concatenation [h_{t-1}, x_t], so its shape is [h, h + d].
struct LSTMCellParams {
    Tensor w_f, w_i, w_g, w_o;
    Tensor b_f, b_i, b_g, b_o;

    static LSTMCellParams init(std::size_t hidden, std::size_t input_dim, Rng& rng);

    std::size_t hidden() const { return w_f.rows(); }
    std::size_t input_dim() const { return w_f.cols() - w_f.rows(); }
};

struct LSTMState {
    Tensor h;
    Tensor c;

    static LSTMState zero(std::size_t hidden) {
        return LSTMState{Tensor({hidden}), Tensor({hidden})};
    }
};

/// One recurrence step: forget/input/candidate gates on [h_{t-1}, x_t], cell
/// update C_t = f*C_{t-1} + i*g, and the standard output gate
/// h_t = o * tanh(C_t). With `output_gate == false` the cell follows the
/// reduced form h_t = tanh(C_t) instead.
LSTMState lstm_step(Tape& tape, const LSTMCellParams& params, const LSTMState& state,
                    const Tensor& x, bool output_gate = true);

/// Bidirectional unroll over xs [T, d] -> [T, 2h]. Row t is the concatenation
/// of the forward pass at t and the backward pass (which consumes the rows in
/// reverse order) re-aligned to t.
Tensor blstm_forward(Tape& tape, const LSTMCellParams& fwd, const LSTMCellParams& bwd,
                     const Tensor& xs, bool output_gate = true);

/// Parameters of the two-level hierarchy: one BLSTM per part below, one
/// sentence-wide BLSTM above. With `share_lower` the before/between/after
/// parts all run the `before` parameter set.
struct HierarchyParams {
    LSTMCellParams before_fwd, before_bwd;
    LSTMCellParams between_fwd, between_bwd;
    LSTMCellParams after_fwd, after_bwd;
    LSTMCellParams upper_fwd, upper_bwd;
    bool share_lower = false;

    static HierarchyParams init(std::size_t h1, std::size_t h2, std::size_t input_dim,
                                bool share_lower, Rng& rng);
};

struct HierarchyOutput {
    Tensor h1_before;   // [T_b, 2*h1]
    Tensor h1_between;  // [T_m, 2*h1]
    Tensor h1_after;    // [T_a, 2*h1]
    Tensor h2;          // [T_b + T_m + T_a, 2*h2]
};

/// Lower BLSTMs per part, outputs concatenated along time in (before,
/// between, after) order and fed to the upper BLSTM.
HierarchyOutput hierarchical_forward(Tape& tape, const HierarchyParams& params,
                                     const Tensor& x_before, const Tensor& x_between,
                                     const Tensor& x_after, bool output_gate = true);

}  // namespace awblstm
