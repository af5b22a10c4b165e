#pragma once

#include <map>
#include <string>
#include <vector>

#include "awblstm/corpus.hpp"

namespace awblstm {

/// Word and POS-tag index tables with reserved PAD=0 and UNK=1 rows.
/// Word order is (frequency desc, lexicographic asc), so construction from
/// the same instances is deterministic, and a serialization round-trip
/// preserves every index.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;

    Vocabulary() = default;

    static Vocabulary build(const std::vector<PairInstance>& instances,
                            std::size_t min_freq = 1);

    int word_index(const std::string& w) const;
    int pos_index(const std::string& p) const;

    std::size_t word_count() const { return words_.size(); }
    std::size_t pos_count() const { return pos_tags_.size(); }
    std::size_t min_freq() const { return min_freq_; }

    /// Tokens in index order, including the PAD/UNK sentinels.
    const std::vector<std::string>& words() const { return words_; }
    const std::vector<std::string>& pos_tags() const { return pos_tags_; }

    std::string to_json() const;
    static Vocabulary from_json(const std::string& text);
    void save(const std::string& path) const;
    static Vocabulary load(const std::string& path);

    bool operator==(const Vocabulary& o) const {
        return words_ == o.words_ && pos_tags_ == o.pos_tags_ && min_freq_ == o.min_freq_;
    }

private:
    void rebuild_maps();

    std::vector<std::string> words_{kPadToken, kUnkToken};
    std::vector<std::string> pos_tags_{kPadToken, kUnkToken};
    std::map<std::string, int> word_to_index_;
    std::map<std::string, int> pos_to_index_;
    std::size_t min_freq_ = 1;
};

}  // namespace awblstm
