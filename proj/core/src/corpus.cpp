#include "awblstm/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "awblstm/errors.hpp"
#include "awblstm/pos_tagger.hpp"

namespace awblstm {

namespace {

// ---------------------------------------------------------------------------
// Labels

const std::string& as_string(Label l) { return label_name(l); }

// ---------------------------------------------------------------------------
// Minimal XML reader for the corpus subset: elements, attributes, comments,
// character references. All annotation data lives in attributes, so element
// text content is skipped. Errors carry the byte position in the source file.

struct XmlNode {
    std::string name;
    std::vector<std::pair<std::string, std::string>> attrs;
    std::vector<XmlNode> children;
    std::size_t byte_pos = 0;

    const std::string* attr(const std::string& key) const {
        for (const auto& [k, v] : attrs) {
            if (k == key) return &v;
        }
        return nullptr;
    }
};

class XmlReader {
public:
    XmlReader(std::string file, std::string src)
        : file_(std::move(file)), src_(std::move(src)) {}

    XmlNode parse() {
        skip_misc();
        if (eof() || src_[pos_] != '<') fail("expected root element");
        XmlNode root = parse_element();
        skip_misc();
        if (!eof()) fail("trailing content after root element");
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(file_, pos_, "malformed XML: " + msg);
    }

    bool eof() const { return pos_ >= src_.size(); }
    char peek() const { return src_[pos_]; }
    bool starts_with(const char* s) const { return src_.compare(pos_, strlen_(s), s) == 0; }
    static std::size_t strlen_(const char* s) { return std::char_traits<char>::length(s); }

    void skip_ws() {
        while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
    }

    void skip_misc() {
        for (;;) {
            skip_ws();
            if (starts_with("<?")) {
                std::size_t end = src_.find("?>", pos_);
                if (end == std::string::npos) fail("unterminated processing instruction");
                pos_ = end + 2;
            } else if (starts_with("<!--")) {
                std::size_t end = src_.find("-->", pos_);
                if (end == std::string::npos) fail("unterminated comment");
                pos_ = end + 3;
            } else if (starts_with("<!")) {
                std::size_t end = src_.find('>', pos_);
                if (end == std::string::npos) fail("unterminated declaration");
                pos_ = end + 1;
            } else {
                return;
            }
        }
    }

    static bool is_name_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
               c == '.' || c == ':';
    }

    std::string parse_name() {
        std::size_t start = pos_;
        while (!eof() && is_name_char(peek())) ++pos_;
        if (pos_ == start) fail("expected name");
        return src_.substr(start, pos_ - start);
    }

    std::string decode_entities(const std::string& raw) {
        std::string out;
        out.reserve(raw.size());
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] != '&') {
                out.push_back(raw[i]);
                continue;
            }
            std::size_t semi = raw.find(';', i);
            if (semi == std::string::npos) fail("unterminated character reference");
            std::string ent = raw.substr(i + 1, semi - i - 1);
            if (ent == "amp") {
                out.push_back('&');
            } else if (ent == "lt") {
                out.push_back('<');
            } else if (ent == "gt") {
                out.push_back('>');
            } else if (ent == "quot") {
                out.push_back('"');
            } else if (ent == "apos") {
                out.push_back('\'');
            } else if (!ent.empty() && ent[0] == '#') {
                int code = 0;
                try {
                    code = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                               ? std::stoi(ent.substr(2), nullptr, 16)
                               : std::stoi(ent.substr(1));
                } catch (const std::exception&) {
                    fail("invalid character reference &" + ent + ";");
                }
                if (code <= 0 || code > 0x10FFFF) fail("character reference out of range");
                // UTF-8 encode.
                if (code < 0x80) {
                    out.push_back(static_cast<char>(code));
                } else if (code < 0x800) {
                    out.push_back(static_cast<char>(0xC0 | (code >> 6)));
                    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
                } else if (code < 0x10000) {
                    out.push_back(static_cast<char>(0xE0 | (code >> 12)));
                    out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
                } else {
                    out.push_back(static_cast<char>(0xF0 | (code >> 18)));
                    out.push_back(static_cast<char>(0x80 | ((code >> 12) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | ((code >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (code & 0x3F)));
                }
            } else {
                fail("unknown entity &" + ent + ";");
            }
            i = semi;
        }
        return out;
    }

    XmlNode parse_element() {
        XmlNode node;
        node.byte_pos = pos_;
        ++pos_;  // '<'
        node.name = parse_name();
        for (;;) {
            skip_ws();
            if (eof()) fail("unexpected end of file in tag <" + node.name + ">");
            if (peek() == '/') {
                ++pos_;
                if (eof() || peek() != '>') fail("expected '>' after '/'");
                ++pos_;
                return node;  // self-closing
            }
            if (peek() == '>') {
                ++pos_;
                break;
            }
            std::string key = parse_name();
            skip_ws();
            if (eof() || peek() != '=') fail("expected '=' after attribute " + key);
            ++pos_;
            skip_ws();
            if (eof() || (peek() != '"' && peek() != '\'')) {
                fail("expected quoted value for attribute " + key);
            }
            char quote = peek();
            ++pos_;
            std::size_t start = pos_;
            while (!eof() && peek() != quote) ++pos_;
            if (eof()) fail("unterminated attribute value for " + key);
            node.attrs.emplace_back(key, decode_entities(src_.substr(start, pos_ - start)));
            ++pos_;
        }
        // Content: child elements and ignored text, until the matching close tag.
        for (;;) {
            std::size_t lt = src_.find('<', pos_);
            if (lt == std::string::npos) {
                fail("missing close tag </" + node.name + ">");
            }
            pos_ = lt;
            if (starts_with("<!--")) {
                std::size_t end = src_.find("-->", pos_);
                if (end == std::string::npos) fail("unterminated comment");
                pos_ = end + 3;
                continue;
            }
            if (starts_with("</")) {
                pos_ += 2;
                std::string close = parse_name();
                if (close != node.name) {
                    fail("mismatched close tag </" + close + ">, expected </" + node.name +
                         ">");
                }
                skip_ws();
                if (eof() || peek() != '>') fail("expected '>' in close tag");
                ++pos_;
                return node;
            }
            node.children.push_back(parse_element());
        }
    }

    std::string file_;
    std::string src_;
    std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Corpus interpretation

std::pair<std::size_t, std::size_t> parse_char_offset(const std::string& raw,
                                                      const std::string& entity_id) {
    // "start-end" with inclusive end; discontinuous mentions ("a-b;c-d") keep
    // their first span.
    std::string first = raw.substr(0, raw.find(';'));
    std::size_t dash = first.find('-');
    if (dash == std::string::npos) {
        throw ValidationError("entity " + entity_id + ": bad charOffset '" + raw + "'");
    }
    try {
        std::size_t start = std::stoul(first.substr(0, dash));
        std::size_t end = std::stoul(first.substr(dash + 1));
        if (end < start) {
            throw ValidationError("entity " + entity_id + ": bad charOffset '" + raw + "'");
        }
        return {start, end};
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception&) {
        throw ValidationError("entity " + entity_id + ": bad charOffset '" + raw + "'");
    }
}

void collect_sentences(const XmlNode& node, const std::string& file,
                       std::vector<Sentence>& out) {
    if (node.name == "sentence") {
        const std::string* id = node.attr("id");
        const std::string* text = node.attr("text");
        if (!id || !text) {
            throw ValidationError(file + ": sentence element missing id or text attribute");
        }
        Sentence s;
        s.id = *id;
        s.text = *text;
        for (const XmlNode& child : node.children) {
            if (child.name == "entity") {
                const std::string* eid = child.attr("id");
                const std::string* off = child.attr("charOffset");
                if (!eid || !off) {
                    throw ValidationError("sentence " + s.id +
                                          ": entity missing id or charOffset");
                }
                auto [start, end] = parse_char_offset(*off, *eid);
                if (end >= s.text.size()) {
                    throw ValidationError("entity " + *eid + ": charOffset " + *off +
                                          " outside sentence text");
                }
                EntityMention m;
                m.id = *eid;
                m.char_start = start;
                m.char_end = end;
                m.surface = s.text.substr(start, end - start + 1);
                if (const std::string* surf = child.attr("text");
                    surf && off->find(';') == std::string::npos && *surf != m.surface) {
                    throw ValidationError("entity " + *eid + ": text attribute '" + *surf +
                                          "' does not match sentence slice '" + m.surface +
                                          "'");
                }
                s.entities.push_back(std::move(m));
            } else if (child.name == "pair") {
                const std::string* pid = child.attr("id");
                const std::string* e1 = child.attr("e1");
                const std::string* e2 = child.attr("e2");
                const std::string* ddi = child.attr("ddi");
                if (!pid || !e1 || !e2 || !ddi) {
                    throw ValidationError("sentence " + s.id +
                                          ": pair missing id/e1/e2/ddi attribute");
                }
                std::string ddi_lower = *ddi;
                std::transform(ddi_lower.begin(), ddi_lower.end(), ddi_lower.begin(),
                               [](unsigned char c) { return std::tolower(c); });
                PairAnnotation p;
                p.id = *pid;
                p.e1_id = *e1;
                p.e2_id = *e2;
                if (ddi_lower == "false") {
                    p.label = Label::Other;
                } else if (ddi_lower == "true") {
                    const std::string* type = child.attr("type");
                    if (!type) {
                        throw ValidationError("pair " + p.id + ": ddi=true without a type");
                    }
                    p.label = label_from_corpus_type(*type);
                } else {
                    throw ValidationError("pair " + p.id + ": bad ddi value '" + *ddi + "'");
                }
                s.pairs.push_back(std::move(p));
            }
        }
        out.push_back(std::move(s));
        return;
    }
    for (const XmlNode& child : node.children) collect_sentences(child, file, out);
}

std::vector<Sentence> parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path, 0, "cannot open file");
    std::ostringstream buf;
    buf << in.rdbuf();
    XmlReader reader(path, buf.str());
    XmlNode root = reader.parse();
    std::vector<Sentence> out;
    collect_sentences(root, path, out);
    return out;
}

bool is_always_split_punct(char c) {
    switch (c) {
        case '(': case ')': case '[': case ']': case '{': case '}':
        case ',': case ';': case ':': case '!': case '?':
        case '"': case '\'': case '<': case '>': case '=':
        case '+': case '*': case '%': case '&': case '#':
        case '|': case '/': case '\\': case '^': case '~':
            return true;
        default:
            return false;
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Label helpers (declared in labels.hpp)

const std::string& label_name(Label l) {
    static const std::array<std::string, kNumClasses> names{"Advice", "Effect", "Mechanism",
                                                            "Int", "Other"};
    return names[static_cast<std::size_t>(l)];
}

Label label_from_name(const std::string& name) {
    for (std::size_t i = 0; i < kNumClasses; ++i) {
        if (name == kLabelNames[i]) return static_cast<Label>(i);
    }
    throw ValidationError("unknown label '" + name + "'");
}

Label label_from_corpus_type(const std::string& type) {
    std::string t = type;
    std::transform(t.begin(), t.end(), t.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (t == "advise" || t == "advice") return Label::Advice;
    if (t == "effect") return Label::Effect;
    if (t == "mechanism") return Label::Mechanism;
    if (t == "int") return Label::Int;
    throw ValidationError("unknown interaction type '" + type + "'");
}

// ---------------------------------------------------------------------------
// Parsing entry points

std::vector<Sentence> parse_corpus(const std::string& path) {
    namespace fs = std::filesystem;
    if (fs::is_directory(path)) {
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".xml") {
                files.push_back(entry.path().string());
            }
        }
        std::sort(files.begin(), files.end());
        std::vector<Sentence> out;
        for (const std::string& f : files) {
            std::vector<Sentence> part = parse_file(f);
            out.insert(out.end(), std::make_move_iterator(part.begin()),
                       std::make_move_iterator(part.end()));
        }
        return out;
    }
    if (!fs::exists(path)) throw ParseError(path, 0, "no such file or directory");
    return parse_file(path);
}

std::vector<RawToken> tokenize_text(const std::string& text,
                                    const std::vector<std::size_t>& forced_breaks) {
    std::vector<RawToken> spans;
    const std::size_t n = text.size();
    auto is_digit_at = [&](std::size_t i) {
        return i < n && std::isdigit(static_cast<unsigned char>(text[i]));
    };
    std::size_t i = 0;
    while (i < n) {
        const char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        // '.' stays inside a token only between digits (e.g. "2.5").
        const bool numeric_dot = c == '.' && i > 0 && is_digit_at(i - 1) && is_digit_at(i + 1);
        if (is_always_split_punct(c) || (c == '.' && !numeric_dot)) {
            spans.push_back({std::string(1, c), i, i + 1});
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n) {
            const char d = text[j];
            if (std::isspace(static_cast<unsigned char>(d)) || is_always_split_punct(d)) break;
            if (d == '.' && !(j > i && is_digit_at(j - 1) && is_digit_at(j + 1))) break;
            ++j;
        }
        spans.push_back({text.substr(i, j - i), i, j});
        i = j;
    }

    if (!forced_breaks.empty()) {
        std::vector<std::size_t> breaks = forced_breaks;
        std::sort(breaks.begin(), breaks.end());
        std::vector<RawToken> split;
        split.reserve(spans.size());
        for (const RawToken& t : spans) {
            std::size_t start = t.char_start;
            for (std::size_t b : breaks) {
                if (b > start && b < t.char_end) {
                    split.push_back(
                        {text.substr(start, b - start), start, b});
                    start = b;
                }
            }
            split.push_back({text.substr(start, t.char_end - start), start, t.char_end});
        }
        return split;
    }
    return spans;
}

int token_distance(std::size_t index, const TokenSpan& span) {
    if (span.contains(index)) return 0;
    if (index < span.first) return static_cast<int>(index) - static_cast<int>(span.first);
    return static_cast<int>(index) - static_cast<int>(span.last);
}

namespace {

TokenSpan align_entity(const std::vector<RawToken>& tokens, const EntityMention& e,
                       const std::string& sentence_id) {
    const std::size_t cs = e.char_start;
    const std::size_t ce_excl = e.char_end + 1;
    std::optional<std::size_t> first, last;
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const RawToken& tok = tokens[t];
        const bool overlaps = tok.char_start < ce_excl && tok.char_end > cs;
        if (!overlaps) continue;
        const bool inside = tok.char_start >= cs && tok.char_end <= ce_excl;
        if (!inside) {
            throw AlignmentError("sentence " + sentence_id + ": entity " + e.id +
                                 " offset splits token '" + tok.surface + "'");
        }
        if (!first) first = t;
        last = t;
    }
    if (!first) {
        throw AlignmentError("sentence " + sentence_id + ": entity " + e.id +
                             " covers no token");
    }
    return TokenSpan{*first, *last};
}

}  // namespace

PairInstance tokenize_and_distance(const Sentence& sentence, const PairAnnotation& pair,
                                   PosSource& pos_source) {
    auto find_entity = [&](const std::string& id) -> const EntityMention& {
        for (const EntityMention& e : sentence.entities) {
            if (e.id == id) return e;
        }
        throw ValidationError("sentence " + sentence.id + ": pair " + pair.id +
                              " references unknown entity '" + id + "'");
    };
    const EntityMention* e1 = &find_entity(pair.e1_id);
    const EntityMention* e2 = &find_entity(pair.e2_id);
    if (e2->char_start < e1->char_start) std::swap(e1, e2);

    std::vector<std::size_t> breaks{e1->char_start, e1->char_end + 1, e2->char_start,
                                    e2->char_end + 1};
    std::vector<RawToken> raw = tokenize_text(sentence.text, breaks);

    TokenSpan s1 = align_entity(raw, *e1, sentence.id);
    TokenSpan s2 = align_entity(raw, *e2, sentence.id);
    if (s1.overlaps(s2)) {
        throw AlignmentError("sentence " + sentence.id + ": pair " + pair.id +
                             " has overlapping entity spans");
    }
    if (s2.first < s1.first) std::swap(s1, s2);

    std::vector<std::string> surfaces;
    surfaces.reserve(raw.size());
    for (const RawToken& t : raw) surfaces.push_back(t.surface);
    std::vector<std::string> tags = pos_source.tags_for(sentence.id, surfaces);

    PairInstance inst;
    inst.sentence_id = sentence.id;
    inst.e1_span = s1;
    inst.e2_span = s2;
    inst.label = pair.label;
    inst.tokens.reserve(raw.size());
    for (std::size_t t = 0; t < raw.size(); ++t) {
        inst.tokens.push_back(Token{surfaces[t], tags[t], token_distance(t, s1),
                                    token_distance(t, s2)});
    }
    return inst;
}

PartitionedInstance partition(const PairInstance& instance) {
    PartitionedInstance out;
    out.label = instance.label;
    out.sentence_id = instance.sentence_id;
    out.e1_len = instance.e1_span.last - instance.e1_span.first + 1;
    out.e2_len = instance.e2_span.last - instance.e2_span.first + 1;
    const auto& toks = instance.tokens;
    out.before.assign(toks.begin(), toks.begin() + static_cast<long>(instance.e1_span.first));
    out.between.assign(toks.begin() + static_cast<long>(instance.e1_span.first),
                       toks.begin() + static_cast<long>(instance.e2_span.last) + 1);
    out.after.assign(toks.begin() + static_cast<long>(instance.e2_span.last) + 1, toks.end());
    if (out.before.empty()) out.before.push_back(Token::pad());
    if (out.between.empty()) out.between.push_back(Token::pad());
    if (out.after.empty()) out.after.push_back(Token::pad());
    return out;
}

std::vector<PairInstance> build_instances(const std::vector<Sentence>& sentences,
                                          PosSource& pos_source, CorpusSummary* summary) {
    std::vector<PairInstance> out;
    CorpusSummary local;
    for (const Sentence& s : sentences) {
        local.sentences++;
        for (const PairAnnotation& p : s.pairs) {
            try {
                out.push_back(tokenize_and_distance(s, p, pos_source));
                local.instances++;
                local.label_counts[as_string(out.back().label)]++;
            } catch (const AlignmentError& e) {
                std::cerr << "warning: skipping pair " << p.id << ": " << e.what() << "\n";
                local.skipped_pairs++;
            }
        }
    }
    if (summary) *summary = local;
    return out;
}

}  // namespace awblstm
