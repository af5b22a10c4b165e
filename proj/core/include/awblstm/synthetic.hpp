#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "awblstm/corpus.hpp"

namespace awblstm {

/// Deterministic synthetic corpus: each instance embeds one class-specific
/// trigger phrase in the between part among filler tokens. The five trigger
/// lexicons are disjoint (each phrase carries content words that appear in no
/// other class and never as filler), so a phrase-lookup oracle is exact while
/// a majority baseline stays near zero.
struct SynthConfig {
    std::size_t train_size = 2000;
    std::size_t test_size = 500;
    bool balanced = true;
};

struct SynthCorpus {
    std::vector<PairInstance> train;
    std::vector<PairInstance> test;
};

/// Same seed, same corpus, bitwise. Train and test sentences are disjoint.
/// A zero size raises ValidationError.
SynthCorpus generate_synthetic_corpus(const SynthConfig& config, std::uint64_t seed);

/// The trigger phrases per class, tokenized, for oracle use.
const std::vector<std::vector<std::vector<std::string>>>& trigger_lexicons();

/// Classify by scanning for a known trigger phrase; empty when none matches.
std::optional<Label> trigger_lookup_oracle(const PairInstance& instance);

/// Most frequent label of a set (ties to the lowest class index).
Label majority_label(const std::vector<PairInstance>& instances);

}  // namespace awblstm
