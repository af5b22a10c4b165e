#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "awblstm/labels.hpp"

namespace awblstm {

class PosSource;

/// Reserved padding surface. The tokenizer can never produce it because '<'
/// and '>' always split off as punctuation.
inline const std::string kPadToken = "<PAD>";
inline const std::string kUnkToken = "<UNK>";

/// One annotated drug mention. Character offsets are inclusive on both ends,
/// matching the corpus convention, and `surface == text[char_start..char_end]`.
struct EntityMention {
    std::string id;
    std::size_t char_start = 0;
    std::size_t char_end = 0;  // inclusive
    std::string surface;
};

/// A pair annotation as found in the corpus.
struct PairAnnotation {
    std::string id;
    std::string e1_id;
    std::string e2_id;
    Label label = Label::Other;
};

struct Sentence {
    std::string id;
    std::string text;
    std::vector<EntityMention> entities;
    std::vector<PairAnnotation> pairs;
};

/// One token with its part-of-speech tag and signed distances to the nearest
/// token of each target entity span (0 inside the span, positive to the right).
struct Token {
    std::string surface;
    std::string pos_tag;
    int dist_e1 = 0;
    int dist_e2 = 0;

    static Token pad() { return Token{kPadToken, kPadToken, 0, 0}; }
    bool is_pad() const { return surface == kPadToken; }
};

/// Inclusive token-index range.
struct TokenSpan {
    std::size_t first = 0;
    std::size_t last = 0;

    bool contains(std::size_t i) const { return i >= first && i <= last; }
    bool overlaps(const TokenSpan& o) const { return first <= o.last && o.first <= last; }
    bool operator==(const TokenSpan&) const = default;
};

/// One classification example: a tokenized sentence, two entity spans
/// (e1 strictly precedes e2), and a 5-way label.
struct PairInstance {
    std::string sentence_id;
    std::vector<Token> tokens;
    TokenSpan e1_span;
    TokenSpan e2_span;
    Label label = Label::Other;
};

/// The three contiguous segments induced by the entity pair. Empty segments
/// are replaced by a single PAD token so downstream layers always see length
/// >= 1; `between` runs from the first token of e1 through the last of e2.
struct PartitionedInstance {
    std::vector<Token> before;
    std::vector<Token> between;
    std::vector<Token> after;
    // Token counts of e1 (head of between) and e2 (tail of between).
    std::size_t e1_len = 0;
    std::size_t e2_len = 0;
    Label label = Label::Other;
    std::string sentence_id;
};

// --------------------------------------------------------------------------
// Parsing

/// Parse one annotated XML file, or every *.xml file (sorted by name) when
/// `path` is a directory. Malformed XML raises ParseError with the file and
/// byte position; an unknown interaction type raises ValidationError.
std::vector<Sentence> parse_corpus(const std::string& path);

/// Character spans of the raw tokens of `text`; splitting is whitespace plus
/// punctuation, with forced breaks at the given character positions so
/// entity boundaries always coincide with token boundaries.
struct RawToken {
    std::string surface;
    std::size_t char_start = 0;
    std::size_t char_end = 0;  // exclusive
};
std::vector<RawToken> tokenize_text(const std::string& text,
                                    const std::vector<std::size_t>& forced_breaks = {});

/// Tokenize a sentence for one annotated pair: aligns both entities to token
/// spans, attaches POS tags, and fills per-token distance pairs. Raises
/// AlignmentError when an entity cannot be aligned or the two spans overlap.
PairInstance tokenize_and_distance(const Sentence& sentence, const PairAnnotation& pair,
                                   PosSource& pos_source);

/// Signed token distance to the nearest token of `span` (0 inside).
int token_distance(std::size_t index, const TokenSpan& span);

/// Split an instance into before/between/after parts.
PartitionedInstance partition(const PairInstance& instance);

/// Instance extraction over a whole corpus, skipping (and counting) pairs
/// whose entity spans overlap.
struct CorpusSummary {
    std::size_t sentences = 0;
    std::size_t instances = 0;
    std::size_t skipped_pairs = 0;
    std::map<std::string, std::size_t> label_counts;
};
std::vector<PairInstance> build_instances(const std::vector<Sentence>& sentences,
                                          PosSource& pos_source,
                                          CorpusSummary* summary = nullptr);

}  // namespace awblstm
