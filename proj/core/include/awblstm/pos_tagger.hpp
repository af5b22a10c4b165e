#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace awblstm {

/// Rule-based part-of-speech guess for one token (Penn-style tags). Roughly
/// twenty deterministic rules: closed-class word lists, digit shapes, and
/// suffix heuristics, defaulting to NN.
std::string heuristic_pos_tag(const std::string& token);

/// Supplies POS tags per sentence: from a TSV sidecar when one covers the
/// sentence, otherwise from the built-in heuristic tagger.
///
/// Sidecar format: UTF-8 TSV with columns sentence_id, token_index, tag.
/// Token indices refer to this pipeline's own tokenization.
class PosSource {
public:
    /// Heuristic tagger only.
    PosSource() = default;

    /// Load a sidecar file. Malformed lines raise ParseError with the line
    /// number (as the byte position of the line start).
    static PosSource from_sidecar(const std::string& tsv_path);

    /// Tags for the tokens of one sentence, aligned by index. Falls back to
    /// the heuristic tagger (with one warning per sentence) when the sidecar
    /// has no entry for the sentence.
    std::vector<std::string> tags_for(const std::string& sentence_id,
                                      const std::vector<std::string>& surfaces);

    bool has_sidecar() const { return has_sidecar_; }
    /// Distinct sentences that fell back to the heuristic tagger.
    std::size_t fallback_sentences() const { return missed_.size(); }

private:
    bool has_sidecar_ = false;
    std::map<std::string, std::map<std::size_t, std::string>> sidecar_;
    std::set<std::string> missed_;
    bool warned_ = false;
};

}  // namespace awblstm
