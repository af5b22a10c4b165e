#include "awblstm/embeddings.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "awblstm/errors.hpp"
#include "awblstm/rng.hpp"

namespace awblstm {

namespace {

void fill_normal(Tensor& t, Rng& rng, double scale) {
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = scale * rng.normal();
}

void zero_row(Tensor& t, std::size_t row) {
    for (std::size_t j = 0; j < t.cols(); ++j) t(row, j) = 0.0;
}

std::vector<Token> truncate_part(const std::vector<Token>& part, std::size_t max_len) {
    if (part.size() <= max_len) return part;
    // Keep both ends so entity tokens at the boundaries of the between part
    // survive truncation.
    const std::size_t head = (max_len + 1) / 2;
    const std::size_t tail = max_len - head;
    std::vector<Token> out(part.begin(), part.begin() + static_cast<long>(head));
    out.insert(out.end(), part.end() - static_cast<long>(tail), part.end());
    return out;
}

std::vector<Token> truncate_keep_last(const std::vector<Token>& part, std::size_t max_len) {
    if (part.size() <= max_len) return part;
    return {part.end() - static_cast<long>(max_len), part.end()};
}

std::vector<Token> truncate_keep_first(const std::vector<Token>& part, std::size_t max_len) {
    if (part.size() <= max_len) return part;
    return {part.begin(), part.begin() + static_cast<long>(max_len)};
}

PartEncoding encode_part(const std::vector<Token>& tokens, const Vocabulary& vocab,
                         const EmbeddingConfig& cfg) {
    PartEncoding enc;
    enc.word_ids.reserve(tokens.size());
    for (const Token& t : tokens) {
        if (t.is_pad()) {
            enc.word_ids.push_back(Vocabulary::kPad);
            enc.pos_ids.push_back(Vocabulary::kPad);
            enc.d1_ids.push_back(0);
            enc.d2_ids.push_back(0);
            enc.pad.push_back(true);
        } else {
            enc.word_ids.push_back(vocab.word_index(t.surface));
            enc.pos_ids.push_back(vocab.pos_index(t.pos_tag));
            enc.d1_ids.push_back(dist_bucket(t.dist_e1, cfg.dist_clip));
            enc.d2_ids.push_back(dist_bucket(t.dist_e2, cfg.dist_clip));
            enc.pad.push_back(false);
        }
    }
    return enc;
}

Tensor mean_of_rows(const Tensor& table, const std::vector<int>& ids) {
    Tensor out({table.cols()});
    if (ids.empty()) return out;
    for (int id : ids) {
        for (std::size_t j = 0; j < table.cols(); ++j) {
            out(j) += table(static_cast<std::size_t>(id), j);
        }
    }
    for (std::size_t j = 0; j < table.cols(); ++j) out(j) /= static_cast<double>(ids.size());
    return out;
}

}  // namespace

int dist_bucket(int dist, std::size_t clip) {
    const int c = static_cast<int>(clip);
    const int clipped = std::clamp(dist, -c, c);
    return clipped + c + 1;
}

EmbeddingTables EmbeddingTables::init(const Vocabulary& vocab, const EmbeddingConfig& cfg,
                                      std::uint64_t seed) {
    EmbeddingTables t;
    t.word = Tensor({vocab.word_count(), cfg.we_dim});
    t.pos = Tensor({vocab.pos_count(), cfg.pos_dim});
    t.dist = Tensor({cfg.dist_buckets(), cfg.dist_dim});

    Rng word_rng = Rng::substream(seed, "init.word");
    Rng pos_rng = Rng::substream(seed, "init.pos");
    Rng dist_rng = Rng::substream(seed, "init.dist");
    fill_normal(t.word, word_rng, 0.1);
    fill_normal(t.pos, pos_rng, 0.1);
    fill_normal(t.dist, dist_rng, 0.1);
    zero_row(t.word, Vocabulary::kPad);
    zero_row(t.pos, Vocabulary::kPad);
    zero_row(t.dist, 0);
    return t;
}

std::vector<bool> PartitionedEncoding::keep_mask() const {
    std::vector<bool> mask;
    mask.reserve(total_length());
    for (const PartEncoding* p : {&before, &between, &after}) {
        for (bool is_pad : p->pad) mask.push_back(!is_pad);
    }
    return mask;
}

PartitionedEncoding encode(const PartitionedInstance& instance, const Vocabulary& vocab,
                           const EmbeddingTables& tables, const EmbeddingConfig& cfg) {
    PartitionedEncoding enc;
    enc.label = instance.label;
    enc.sentence_id = instance.sentence_id;
    enc.before = encode_part(truncate_keep_last(instance.before, cfg.max_part_len), vocab, cfg);
    enc.between = encode_part(truncate_part(instance.between, cfg.max_part_len), vocab, cfg);
    enc.after = encode_part(truncate_keep_first(instance.after, cfg.max_part_len), vocab, cfg);

    // Entity tokens sit at the head and tail of the untruncated between part.
    for (std::size_t i = 0; i < instance.e1_len && i < instance.between.size(); ++i) {
        enc.e1_word_ids.push_back(vocab.word_index(instance.between[i].surface));
    }
    for (std::size_t i = 0; i < instance.e2_len && i < instance.between.size(); ++i) {
        const std::size_t at = instance.between.size() - instance.e2_len + i;
        enc.e2_word_ids.push_back(vocab.word_index(instance.between[at].surface));
    }
    enc.e1_repr = mean_of_rows(tables.word, enc.e1_word_ids);
    enc.e2_repr = mean_of_rows(tables.word, enc.e2_word_ids);
    return enc;
}

PretrainedLoadStats load_pretrained_word_vectors(const std::string& path,
                                                 const Vocabulary& vocab,
                                                 Tensor& word_table) {
    std::ifstream in(path);
    if (!in) throw ParseError(path, 0, "cannot open vector file");

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path, 0, "empty vector file");
    ++line_no;
    std::istringstream header(line);
    std::size_t count = 0, dim = 0;
    if (!(header >> count >> dim)) {
        throw ParseError(path, line_no, "expected header 'V d'");
    }
    if (dim != word_table.cols()) {
        throw ConfigError("pretrained vector dimension " + std::to_string(dim) +
                          " does not match configured word dimension " +
                          std::to_string(word_table.cols()));
    }

    PretrainedLoadStats stats;
    stats.vocab_words = vocab.word_count();
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string token;
        if (!(row >> token)) {
            throw ParseError(path, line_no, "line " + std::to_string(line_no) +
                                                ": missing token");
        }
        std::vector<double> values(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            if (!(row >> values[j])) {
                throw ParseError(path, line_no,
                                 "line " + std::to_string(line_no) + ": expected " +
                                     std::to_string(dim) + " values for token '" + token +
                                     "'");
            }
        }
        stats.file_words++;
        const int idx = vocab.word_index(token);
        if (idx > Vocabulary::kUnk || (idx == Vocabulary::kUnk && token == kUnkToken)) {
            for (std::size_t j = 0; j < dim; ++j) {
                word_table(static_cast<std::size_t>(idx), j) = values[j];
            }
            stats.matched++;
        }
    }
    return stats;
}

void save_word_vectors(const std::string& path, const Vocabulary& vocab,
                       const Tensor& word_table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << vocab.word_count() << ' ' << word_table.cols() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < vocab.word_count(); ++i) {
        out << vocab.words()[i];
        for (std::size_t j = 0; j < word_table.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", word_table(i, j));
            out << ' ' << buf;
        }
        out << '\n';
    }
}

}  // namespace awblstm
