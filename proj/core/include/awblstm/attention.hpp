#pragma once

#include <cstdint>
#include <vector>

#include "awblstm/tensor.hpp"

namespace awblstm {

class Rng;

/// Per-position weights from the entity attention pass, for inspection and
/// diagnostics. alpha_avg == (alpha1 + alpha2) / 2 elementwise; each vector
/// sums to 1 over non-PAD positions and is exactly 0 at PAD.
struct EntityAttentionWeights {
    std::vector<double> alpha1;
    std::vector<double> alpha2;
    std::vector<double> alpha_avg;
};

struct EntityAttentionResult {
    Tensor scaled;  // [T, D]: position j is alpha_avg[j] * full_vecs[j]
    EntityAttentionWeights weights;
};

/// Entity-level attention: relatedness of every word to each target entity is
/// the inner product of the entity representation with the word embedding
/// (word component only); each entity's scores are softmax-normalized over
/// the non-PAD positions, the two weight vectors are averaged, and the full
/// concatenated vectors are scaled per position.
EntityAttentionResult entity_attention(Tape& tape, const Tensor& word_vecs,
                                       const Tensor& full_vecs, const Tensor& e1_repr,
                                       const Tensor& e2_repr,
                                       const std::vector<bool>& keep_mask);

/// Learned parameters of the top attention: a shared per-step scoring MLP of
/// width `a` over the upper BLSTM outputs.
struct TopAttentionParams {
    Tensor w;  // [a, 2*h2]
    Tensor b;  // [a]
    Tensor u;  // [a]

    static TopAttentionParams init(std::size_t attention_dim, std::size_t input_dim,
                                   Rng& rng);
};

struct TopAttentionResult {
    Tensor pooled;  // [2*h2], a convex combination of the rows of h2
    Tensor beta;    // [T] normalized step weights
};

/// Top attention over the upper BLSTM output sequence: per step,
/// tanh(W h2_j + b) scored against u, softmax over non-PAD steps, and a
/// weighted sum of the rows.
TopAttentionResult top_attention(Tape& tape, const Tensor& h2,
                                 const TopAttentionParams& params,
                                 const std::vector<bool>& keep_mask);

}  // namespace awblstm
