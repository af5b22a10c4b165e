#include "awblstm/vocab.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "awblstm/errors.hpp"

namespace awblstm {

using nlohmann::json;

Vocabulary Vocabulary::build(const std::vector<PairInstance>& instances,
                             std::size_t min_freq) {
    std::map<std::string, std::size_t> word_freq;
    std::map<std::string, std::size_t> pos_freq;
    for (const PairInstance& inst : instances) {
        for (const Token& t : inst.tokens) {
            if (t.surface == kPadToken || t.surface == kUnkToken) continue;
            word_freq[t.surface]++;
            pos_freq[t.pos_tag]++;
        }
    }

    Vocabulary v;
    v.min_freq_ = min_freq;

    std::vector<std::pair<std::string, std::size_t>> by_freq(word_freq.begin(),
                                                             word_freq.end());
    std::sort(by_freq.begin(), by_freq.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    for (const auto& [w, f] : by_freq) {
        if (f >= min_freq) v.words_.push_back(w);
    }
    for (const auto& [p, f] : pos_freq) {
        v.pos_tags_.push_back(p);  // std::map iteration is already sorted
    }
    v.rebuild_maps();
    return v;
}

void Vocabulary::rebuild_maps() {
    word_to_index_.clear();
    pos_to_index_.clear();
    for (std::size_t i = 0; i < words_.size(); ++i) {
        word_to_index_[words_[i]] = static_cast<int>(i);
    }
    for (std::size_t i = 0; i < pos_tags_.size(); ++i) {
        pos_to_index_[pos_tags_[i]] = static_cast<int>(i);
    }
}

int Vocabulary::word_index(const std::string& w) const {
    auto it = word_to_index_.find(w);
    return it == word_to_index_.end() ? kUnk : it->second;
}

int Vocabulary::pos_index(const std::string& p) const {
    auto it = pos_to_index_.find(p);
    return it == pos_to_index_.end() ? kUnk : it->second;
}

std::string Vocabulary::to_json() const {
    json j;
    j["words"] = words_;
    j["pos_tags"] = pos_tags_;
    j["min_freq"] = min_freq_;
    return j.dump();
}

Vocabulary Vocabulary::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("<vocabulary>", e.byte, std::string("bad vocabulary JSON: ") +
                                                     e.what());
    }
    Vocabulary v;
    try {
        v.words_ = j.at("words").get<std::vector<std::string>>();
        v.pos_tags_ = j.at("pos_tags").get<std::vector<std::string>>();
        v.min_freq_ = j.at("min_freq").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad vocabulary JSON: ") + e.what());
    }
    if (v.words_.size() < 2 || v.words_[0] != kPadToken || v.words_[1] != kUnkToken ||
        v.pos_tags_.size() < 2 || v.pos_tags_[0] != kPadToken || v.pos_tags_[1] != kUnkToken) {
        throw ValidationError("vocabulary JSON is missing the PAD/UNK sentinels");
    }
    v.rebuild_maps();
    return v;
}

void Vocabulary::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << to_json() << '\n';
}

Vocabulary Vocabulary::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open vocabulary file");
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

}  // namespace awblstm
