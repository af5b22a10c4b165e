#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "awblstm/corpus.hpp"
#include "awblstm/tensor.hpp"
#include "awblstm/vocab.hpp"

namespace awblstm {

struct EmbeddingConfig {
    std::size_t we_dim = 100;
    std::size_t pos_dim = 10;
    std::size_t dist_dim = 10;
    std::size_t dist_clip = 60;
    std::size_t max_part_len = 60;

    /// Distance buckets: PAD plus one bucket per clipped value in [-clip, clip].
    std::size_t dist_buckets() const { return 2 * dist_clip + 2; }
    /// Per-token concatenated width: word + POS + two distance embeddings.
    std::size_t token_dim() const { return we_dim + pos_dim + 2 * dist_dim; }
};

/// Bucket index for a clipped signed distance; bucket 0 is reserved for PAD.
int dist_bucket(int dist, std::size_t clip);

/// The three look-up tables. PAD rows (index 0) are all-zero and stay zero:
/// they are excluded from gradient updates.
struct EmbeddingTables {
    Tensor word;  // [V_w, we_dim]
    Tensor pos;   // [V_p, pos_dim]
    Tensor dist;  // [2*clip+2, dist_dim]

    /// Normal(0, 0.1) initialization from the "init.*" seed sub-streams,
    /// PAD rows zeroed.
    static EmbeddingTables init(const Vocabulary& vocab, const EmbeddingConfig& cfg,
                                std::uint64_t seed);
};

/// Index sequences for one part; all vectors share one length.
struct PartEncoding {
    std::vector<int> word_ids;
    std::vector<int> pos_ids;
    std::vector<int> d1_ids;
    std::vector<int> d2_ids;
    std::vector<bool> pad;  // true at PAD positions

    std::size_t length() const { return word_ids.size(); }
};

/// Model-ready form of an instance: per-part index sequences plus the word
/// indices of each entity's tokens and their (detached) mean embeddings.
struct PartitionedEncoding {
    PartEncoding before;
    PartEncoding between;
    PartEncoding after;
    std::vector<int> e1_word_ids;
    std::vector<int> e2_word_ids;
    Tensor e1_repr;  // [we_dim]
    Tensor e2_repr;  // [we_dim]
    Label label = Label::Other;
    std::string sentence_id;

    std::size_t total_length() const {
        return before.length() + between.length() + after.length();
    }
    /// PAD mask over the concatenated (before, between, after) sequence;
    /// true marks positions to keep.
    std::vector<bool> keep_mask() const;
};

/// Pure function: distances clipped and bucketed, parts truncated to
/// max_part_len (the between part keeps its ends so both entities survive),
/// entity representations averaged from the word table.
PartitionedEncoding encode(const PartitionedInstance& instance, const Vocabulary& vocab,
                           const EmbeddingTables& tables, const EmbeddingConfig& cfg);

// --------------------------------------------------------------------------
// Pretrained vectors: text format "V d" header, then "token v1 .. vd" lines.

struct PretrainedLoadStats {
    std::size_t file_words = 0;
    std::size_t matched = 0;
    std::size_t vocab_words = 0;

    double coverage() const {
        return vocab_words == 0 ? 0.0
                                : static_cast<double>(matched) /
                                      static_cast<double>(vocab_words);
    }
};

/// Overwrite the word-table rows of vocabulary words found in the file.
/// Dimension mismatch with the table raises ConfigError; malformed lines
/// raise ParseError with the line number.
PretrainedLoadStats load_pretrained_word_vectors(const std::string& path,
                                                 const Vocabulary& vocab, Tensor& word_table);

/// Write the word table in the same text format (PAD/UNK rows included).
void save_word_vectors(const std::string& path, const Vocabulary& vocab,
                       const Tensor& word_table);

}  // namespace awblstm
