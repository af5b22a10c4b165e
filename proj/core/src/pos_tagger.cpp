#include "awblstm/pos_tagger.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <set>

#include "awblstm/corpus.hpp"
#include "awblstm/errors.hpp"

namespace awblstm {

namespace {

bool ends_with(const std::string& s, const char* suffix) {
    std::string_view v(suffix);
    return s.size() >= v.size() && s.compare(s.size() - v.size(), v.size(), v) == 0;
}

bool in(const std::set<std::string>& set, const std::string& s) { return set.count(s) > 0; }

std::string lowered(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return out;
}

}  // namespace

std::string heuristic_pos_tag(const std::string& token) {
    static const std::set<std::string> determiners{"the", "a", "an", "this", "that", "these",
                                                   "those"};
    static const std::set<std::string> prepositions{
        "of", "in", "on", "at", "by", "with", "for", "to", "from",
        "into", "during", "after", "before", "between", "through", "within"};
    static const std::set<std::string> conjunctions{"and", "or", "but", "nor"};
    static const std::set<std::string> modals{"may",  "can",   "could", "should", "would",
                                              "must", "might", "will",  "shall"};
    static const std::set<std::string> pronouns{"it", "they", "he", "she", "we", "you", "i"};
    // Verbs of interaction-speak whose -s form would otherwise look plural.
    static const std::set<std::string> third_person_verbs{
        "interferes", "inhibits",    "increases", "decreases", "reduces",  "enhances",
        "potentiates", "causes",     "induces",   "alters",    "affects",  "prolongs",
        "blocks",      "antagonizes", "impairs",  "raises",    "lowers",   "diminishes",
        "appears",     "interacts",  "produces",  "elevates"};

    if (token.empty()) return "NN";
    if (token == kPadToken) return kPadToken;

    const char first = token[0];
    if (!std::isalnum(static_cast<unsigned char>(first)) && token.size() == 1) {
        return token;  // punctuation tags itself
    }
    bool numeric = true;
    for (char c : token) {
        if (!std::isdigit(static_cast<unsigned char>(c)) && c != '.' && c != '-') {
            numeric = false;
            break;
        }
    }
    if (numeric && std::isdigit(static_cast<unsigned char>(first))) return "CD";

    const std::string low = lowered(token);
    if (in(determiners, low)) return "DT";
    if (in(prepositions, low)) return "IN";
    if (in(conjunctions, low)) return "CC";
    if (in(modals, low)) return "MD";
    if (in(pronouns, low)) return "PRP";
    if (low == "not" || low == "n't") return "RB";
    if (low == "is" || low == "has" || low == "does") return "VBZ";
    if (low == "are" || low == "have" || low == "do") return "VBP";
    if (low == "was" || low == "were" || low == "had" || low == "did") return "VBD";
    if (low == "be") return "VB";
    if (low == "been") return "VBN";
    if (in(third_person_verbs, low)) return "VBZ";
    if (ends_with(low, "ing")) return "VBG";
    if (ends_with(low, "ed")) return "VBN";
    if (ends_with(low, "ly")) return "RB";
    if (ends_with(low, "tion") || ends_with(low, "sion") || ends_with(low, "ment") ||
        ends_with(low, "ness") || ends_with(low, "ity") || ends_with(low, "ance") ||
        ends_with(low, "ence")) {
        return "NN";
    }
    if (ends_with(low, "ous") || ends_with(low, "ful") || ends_with(low, "ive") ||
        ends_with(low, "ary") || ends_with(low, "ic") || ends_with(low, "al") ||
        ends_with(low, "able") || ends_with(low, "ible")) {
        return "JJ";
    }
    if (ends_with(low, "est") && low.size() > 4) return "JJS";
    if (ends_with(low, "ize") || ends_with(low, "ise") || ends_with(low, "ate")) return "VB";
    if (std::isupper(static_cast<unsigned char>(first))) return "NNP";
    if (ends_with(low, "s") && low.size() > 3) return "NNS";
    return "NN";
}

PosSource PosSource::from_sidecar(const std::string& tsv_path) {
    std::ifstream in(tsv_path);
    if (!in) throw ParseError(tsv_path, 0, "cannot open sidecar file");
    PosSource src;
    src.has_sidecar_ = true;
    std::string line;
    std::size_t line_no = 0;
    std::size_t byte_pos = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t line_start = byte_pos;
        byte_pos += line.size() + 1;
        if (line.empty() || line[0] == '#') continue;
        const std::size_t t1 = line.find('\t');
        const std::size_t t2 = t1 == std::string::npos ? std::string::npos
                                                       : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw ParseError(tsv_path, line_start,
                             "line " + std::to_string(line_no) +
                                 ": expected sentence_id<TAB>token_index<TAB>tag");
        }
        const std::string sid = line.substr(0, t1);
        const std::string idx_str = line.substr(t1 + 1, t2 - t1 - 1);
        std::string tag = line.substr(t2 + 1);
        if (!tag.empty() && tag.back() == '\r') tag.pop_back();
        std::size_t idx = 0;
        try {
            idx = std::stoul(idx_str);
        } catch (const std::exception&) {
            throw ParseError(tsv_path, line_start,
                             "line " + std::to_string(line_no) + ": bad token index '" +
                                 idx_str + "'");
        }
        src.sidecar_[sid][idx] = tag;
    }
    return src;
}

std::vector<std::string> PosSource::tags_for(const std::string& sentence_id,
                                             const std::vector<std::string>& surfaces) {
    std::vector<std::string> tags;
    tags.reserve(surfaces.size());
    const std::map<std::size_t, std::string>* entry = nullptr;
    if (has_sidecar_) {
        auto it = sidecar_.find(sentence_id);
        if (it != sidecar_.end()) {
            entry = &it->second;
        } else {
            missed_.insert(sentence_id);
            if (!warned_) {
                std::cerr << "warning: POS sidecar has no entry for sentence " << sentence_id
                          << "; using fallback tagger (further misses not reported)\n";
                warned_ = true;
            }
        }
    }
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        if (entry) {
            auto it = entry->find(i);
            if (it != entry->end()) {
                tags.push_back(it->second);
                continue;
            }
        }
        tags.push_back(heuristic_pos_tag(surfaces[i]));
    }
    return tags;
}

}  // namespace awblstm
