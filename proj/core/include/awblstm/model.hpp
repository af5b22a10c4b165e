#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "awblstm/attention.hpp"
#include "awblstm/embeddings.hpp"
#include "awblstm/recurrent.hpp"
#include "awblstm/tensor.hpp"
#include "awblstm/vocab.hpp"

namespace awblstm {

struct ModelConfig {
    std::size_t we_dim = 100;
    std::size_t pos_dim = 10;
    std::size_t dist_dim = 10;
    std::size_t h1 = 100;
    std::size_t h2 = 100;
    std::size_t attention_dim = 0;  // 0 means 2*h2
    std::size_t max_part_len = 60;
    std::size_t dist_clip = 60;
    double learning_rate = 1e-3;
    std::size_t batch_size = 64;
    std::size_t epochs = 101;
    double validation_split = 0.1;
    std::uint64_t seed = 42;
    std::string precision = "double";
    std::string optimizer = "adam";
    double grad_clip = 5.0;  // 0 disables
    std::size_t min_word_freq = 1;
    std::string attention_scope = "sentence";  // "sentence" or "part"
    double neg_downsample = 0.0;  // 0 off; else max Other instances per positive
    double early_stop_f1 = 0.0;   // stop once val macro5 F1 reaches this; 0 off
    bool freeze_embeddings = false;
    bool share_lower_weights = false;
    bool no_output_gate = false;

    std::size_t attention_width() const { return attention_dim ? attention_dim : 2 * h2; }
    EmbeddingConfig embedding() const {
        return EmbeddingConfig{we_dim, pos_dim, dist_dim, dist_clip, max_part_len};
    }

    /// Throws ConfigError on out-of-domain values.
    void validate() const;

    std::string to_json() const;
    static ModelConfig from_json(const std::string& text);
};

/// Every learnable tensor of the model.
struct ModelParams {
    EmbeddingTables tables;
    HierarchyParams hierarchy;
    TopAttentionParams top;
    Tensor w_dense;  // [kNumClasses, 2*h2]
    Tensor b_dense;  // [kNumClasses]

    /// Seeded initialization; embedding tables draw from the "init.*"
    /// sub-streams, recurrent and dense weights from "init.net".
    static ModelParams init(const ModelConfig& cfg, const Vocabulary& vocab);
};

/// Stable (name, tensor) listing in a fixed order; shared lower parameter
/// sets appear once. The order defines optimizer-state and checkpoint layout.
std::vector<std::pair<std::string, Tensor*>> named_params(ModelParams& p);
std::vector<std::pair<std::string, const Tensor*>> named_params(const ModelParams& p);

/// Copy of the params whose tensors are watched leaves of `tape` (data
/// buffers shared with the input).
ModelParams watch_params(Tape& tape, const ModelParams& p);

struct ForwardResult {
    Tensor probs;   // [kNumClasses]
    Tensor pooled;  // [2*h2] attention-pooled sentence vector
    EntityAttentionWeights entity_weights;
    std::vector<double> beta;
};

/// The embedded input matrix [T, we+pos+2*dist] over the concatenated
/// (before, between, after) sequence; per-position layout is word, POS,
/// dist_e1, dist_e2.
Tensor embed_instance(Tape& tape, const ModelParams& params,
                      const PartitionedEncoding& enc);

/// Full pipeline on one encoded instance: embedding lookup, entity attention,
/// part-wise lower BLSTMs, upper BLSTM, top attention, dense softmax.
ForwardResult model_forward(Tape& tape, const ModelParams& params,
                            const PartitionedEncoding& enc, const ModelConfig& cfg);

/// Index of the most probable class; ties break toward the lowest index.
Label predict_label(const Tensor& probs);

/// Negative log-likelihood of the gold label, as a tracked scalar.
Tensor model_nll(Tape& tape, const Tensor& probs, Label gold);

}  // namespace awblstm
