#include "awblstm/recurrent.hpp"

#include <cmath>

#include "awblstm/errors.hpp"
#include "awblstm/rng.hpp"

namespace awblstm {

LSTMCellParams LSTMCellParams::init(std::size_t hidden, std::size_t input_dim, Rng& rng) {
    LSTMCellParams p;
    const std::size_t cols = hidden + input_dim;
    const double scale = std::sqrt(2.0 / static_cast<double>(hidden + cols));
    for (Tensor* w : {&p.w_f, &p.w_i, &p.w_g, &p.w_o}) {
        *w = Tensor({hidden, cols});
        for (std::size_t i = 0; i < w->size(); ++i) w->data()[i] = scale * rng.normal();
    }
    for (Tensor* b : {&p.b_f, &p.b_i, &p.b_g, &p.b_o}) {
        *b = Tensor({hidden});
    }
    return p;
}

LSTMState lstm_step(Tape& tape, const LSTMCellParams& params, const LSTMState& state,
                    const Tensor& x, bool output_gate) {
    if (x.rank() != 1 || x.size() != params.input_dim()) {
        throw ShapeError("lstm_step: input " + x.shape_str() + " does not match cell [" +
                         std::to_string(params.hidden()) + "," +
                         std::to_string(params.hidden() + params.input_dim()) + "]");
    }
    if (state.h.size() != params.hidden() || state.c.size() != params.hidden()) {
        throw ShapeError("lstm_step: state size does not match cell hidden size");
    }
    Tensor z = tape.concat(state.h, x);
    Tensor f = tape.sigmoid(tape.add(tape.matvec(params.w_f, z), params.b_f));
    Tensor i = tape.sigmoid(tape.add(tape.matvec(params.w_i, z), params.b_i));
    Tensor g = tape.tanh(tape.add(tape.matvec(params.w_g, z), params.b_g));
    Tensor c = tape.add(tape.mul(f, state.c), tape.mul(i, g));

    LSTMState next;
    next.c = c;
    if (output_gate) {
        Tensor o = tape.sigmoid(tape.add(tape.matvec(params.w_o, z), params.b_o));
        next.h = tape.mul(o, tape.tanh(c));
    } else {
        next.h = tape.tanh(c);
    }
    return next;
}

namespace {

/// Unidirectional unroll visiting the rows of xs in `reverse` or natural
/// order; outputs land at the time index of the row they consumed.
std::vector<Tensor> unroll(Tape& tape, const LSTMCellParams& params, const Tensor& xs,
                           bool reverse, bool output_gate) {
    const std::size_t steps = xs.rows();
    std::vector<Tensor> hs(steps);
    LSTMState state = LSTMState::zero(params.hidden());
    for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t t = reverse ? steps - 1 - k : k;
        state = lstm_step(tape, params, state, tape.row_of(xs, t), output_gate);
        hs[t] = state.h;
    }
    return hs;
}

}  // namespace

Tensor blstm_forward(Tape& tape, const LSTMCellParams& fwd, const LSTMCellParams& bwd,
                     const Tensor& xs, bool output_gate) {
    if (xs.rank() != 2 || xs.rows() == 0) {
        throw ShapeError("blstm_forward: expected non-empty [T, d] input, got " +
                         xs.shape_str());
    }
    std::vector<Tensor> hf = unroll(tape, fwd, xs, false, output_gate);
    std::vector<Tensor> hb = unroll(tape, bwd, xs, true, output_gate);
    std::vector<Tensor> rows;
    rows.reserve(xs.rows());
    for (std::size_t t = 0; t < xs.rows(); ++t) {
        rows.push_back(tape.concat(hf[t], hb[t]));
    }
    return tape.stack_rows(rows);
}

HierarchyParams HierarchyParams::init(std::size_t h1, std::size_t h2,
                                      std::size_t input_dim, bool share_lower, Rng& rng) {
    HierarchyParams p;
    p.share_lower = share_lower;
    p.before_fwd = LSTMCellParams::init(h1, input_dim, rng);
    p.before_bwd = LSTMCellParams::init(h1, input_dim, rng);
    if (!share_lower) {
        p.between_fwd = LSTMCellParams::init(h1, input_dim, rng);
        p.between_bwd = LSTMCellParams::init(h1, input_dim, rng);
        p.after_fwd = LSTMCellParams::init(h1, input_dim, rng);
        p.after_bwd = LSTMCellParams::init(h1, input_dim, rng);
    }
    p.upper_fwd = LSTMCellParams::init(h2, 2 * h1, rng);
    p.upper_bwd = LSTMCellParams::init(h2, 2 * h1, rng);
    return p;
}

HierarchyOutput hierarchical_forward(Tape& tape, const HierarchyParams& params,
                                     const Tensor& x_before, const Tensor& x_between,
                                     const Tensor& x_after, bool output_gate) {
    const LSTMCellParams& mid_f = params.share_lower ? params.before_fwd : params.between_fwd;
    const LSTMCellParams& mid_b = params.share_lower ? params.before_bwd : params.between_bwd;
    const LSTMCellParams& aft_f = params.share_lower ? params.before_fwd : params.after_fwd;
    const LSTMCellParams& aft_b = params.share_lower ? params.before_bwd : params.after_bwd;

    HierarchyOutput out;
    out.h1_before =
        blstm_forward(tape, params.before_fwd, params.before_bwd, x_before, output_gate);
    out.h1_between = blstm_forward(tape, mid_f, mid_b, x_between, output_gate);
    out.h1_after = blstm_forward(tape, aft_f, aft_b, x_after, output_gate);
    Tensor h1 = tape.concat_rows({out.h1_before, out.h1_between, out.h1_after});
    out.h2 = blstm_forward(tape, params.upper_fwd, params.upper_bwd, h1, output_gate);
    return out;
}

}  // namespace awblstm
