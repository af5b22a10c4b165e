#include "awblstm/attention.hpp"

#include <cmath>

#include "awblstm/errors.hpp"
#include "awblstm/rng.hpp"

namespace awblstm {

EntityAttentionResult entity_attention(Tape& tape, const Tensor& word_vecs,
                                       const Tensor& full_vecs, const Tensor& e1_repr,
                                       const Tensor& e2_repr,
                                       const std::vector<bool>& keep_mask) {
    if (word_vecs.rank() != 2 || full_vecs.rank() != 2 ||
        word_vecs.rows() != full_vecs.rows()) {
        throw ShapeError("entity_attention: word vectors " + word_vecs.shape_str() +
                         " vs full vectors " + full_vecs.shape_str());
    }
    if (keep_mask.size() != word_vecs.rows()) {
        throw ShapeError("entity_attention: mask length does not match sequence length");
    }

    Tensor logits1 = tape.matvec(word_vecs, e1_repr);
    Tensor logits2 = tape.matvec(word_vecs, e2_repr);
    Tensor alpha1 = tape.softmax(logits1, &keep_mask);
    Tensor alpha2 = tape.softmax(logits2, &keep_mask);
    Tensor alpha_avg = tape.scale(tape.add(alpha1, alpha2), 0.5);

    EntityAttentionResult out;
    out.scaled = tape.row_scale(full_vecs, alpha_avg);
    out.weights.alpha1 = alpha1.values();
    out.weights.alpha2 = alpha2.values();
    out.weights.alpha_avg = alpha_avg.values();
    return out;
}

TopAttentionParams TopAttentionParams::init(std::size_t attention_dim,
                                            std::size_t input_dim, Rng& rng) {
    TopAttentionParams p;
    p.w = Tensor({attention_dim, input_dim});
    p.b = Tensor({attention_dim});
    p.u = Tensor({attention_dim});
    const double scale = std::sqrt(2.0 / static_cast<double>(attention_dim + input_dim));
    for (std::size_t i = 0; i < p.w.size(); ++i) p.w.data()[i] = scale * rng.normal();
    const double uscale = std::sqrt(1.0 / static_cast<double>(attention_dim));
    for (std::size_t i = 0; i < p.u.size(); ++i) p.u.data()[i] = uscale * rng.normal();
    return p;
}

TopAttentionResult top_attention(Tape& tape, const Tensor& h2,
                                 const TopAttentionParams& params,
                                 const std::vector<bool>& keep_mask) {
    if (h2.rank() != 2 || h2.rows() == 0) {
        throw ShapeError("top_attention: expected non-empty [T, 2h] input, got " +
                         h2.shape_str());
    }
    if (keep_mask.size() != h2.rows()) {
        throw ShapeError("top_attention: mask length does not match step count");
    }

    std::vector<Tensor> scores;
    scores.reserve(h2.rows());
    for (std::size_t j = 0; j < h2.rows(); ++j) {
        Tensor step = tape.tanh(tape.add(tape.matvec(params.w, tape.row_of(h2, j)),
                                         params.b));
        scores.push_back(tape.inner(params.u, step));
    }
    TopAttentionResult out;
    out.beta = tape.softmax(tape.stack_scalars(scores), &keep_mask);
    out.pooled = tape.vecmat(out.beta, h2);
    return out;
}

}  // namespace awblstm
