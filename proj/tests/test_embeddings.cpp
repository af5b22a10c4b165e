#include "awblstm/embeddings.hpp"

#include <doctest.h>

#include <cstring>
#include <fstream>

#include "awblstm/errors.hpp"
#include "awblstm/model.hpp"
#include "awblstm/verify.hpp"

using namespace awblstm;

namespace {

std::string temp_path(const std::string& name) {
    return std::string(BINARY_DIR) + "/" + name;
}

struct Setup {
    std::vector<PairInstance> instances = toy_instances();
    Vocabulary vocab = Vocabulary::build(instances);
    EmbeddingConfig cfg;
    EmbeddingTables tables;

    Setup() {
        cfg = EmbeddingConfig{4, 2, 2, 4, 4};
        tables = EmbeddingTables::init(vocab, cfg, 7);
    }
};

}  // namespace

TEST_CASE("vocabulary: reserved sentinels, determinism, JSON round-trip") {
    Setup s;
    CHECK(s.vocab.words()[0] == kPadToken);
    CHECK(s.vocab.words()[1] == kUnkToken);
    CHECK(s.vocab.word_index(kPadToken) == Vocabulary::kPad);
    CHECK(s.vocab.word_index("never-seen-token") == Vocabulary::kUnk);
    CHECK(s.vocab.word_count() == 20);

    Vocabulary again = Vocabulary::build(s.instances);
    CHECK(again == s.vocab);

    Vocabulary loaded = Vocabulary::from_json(s.vocab.to_json());
    CHECK(loaded == s.vocab);
    for (const std::string& w : s.vocab.words()) {
        CHECK(loaded.word_index(w) == s.vocab.word_index(w));
    }
}

TEST_CASE("frequency cutoff sends rare words to UNK") {
    Setup s;
    // Every toy word occurs at most a few times; a huge cutoff empties the
    // table down to the sentinels.
    Vocabulary cut = Vocabulary::build(s.instances, 1000);
    CHECK(cut.word_count() == 2);
    CHECK(cut.word_index("drugA") == Vocabulary::kUnk);
}

TEST_CASE("default dimensions give 130-wide token vectors") {
    EmbeddingConfig defaults;
    CHECK(defaults.token_dim() == 130);
    CHECK(defaults.dist_buckets() == 122);
}

TEST_CASE("distance bucketing clips at the boundary") {
    CHECK(dist_bucket(75, 60) == dist_bucket(60, 60));
    CHECK(dist_bucket(-75, 60) == dist_bucket(-60, 60));
    CHECK(dist_bucket(0, 60) == 61);
    CHECK(dist_bucket(-60, 60) == 1);  // bucket 0 is PAD
    CHECK(dist_bucket(60, 60) == 121);
}

TEST_CASE("PAD table rows are zero; PAD positions encode to index 0") {
    Setup s;
    for (std::size_t j = 0; j < s.tables.word.cols(); ++j) {
        CHECK(s.tables.word(Vocabulary::kPad, j) == 0.0);
    }
    for (std::size_t j = 0; j < s.tables.dist.cols(); ++j) {
        CHECK(s.tables.dist(0, j) == 0.0);
    }

    // toy.s2 starts with its entity, so partition inserts a PAD before part.
    PartitionedEncoding enc =
        encode(partition(s.instances[2]), s.vocab, s.tables, s.cfg);
    REQUIRE(enc.before.length() == 1);
    CHECK(enc.before.pad[0]);
    CHECK(enc.before.word_ids[0] == Vocabulary::kPad);
    CHECK(enc.before.pos_ids[0] == Vocabulary::kPad);
    CHECK(enc.before.d1_ids[0] == 0);
    CHECK(enc.keep_mask()[0] == false);
}

TEST_CASE("encode is pure and truncation keeps both entities") {
    Setup s;
    PartitionedInstance parts = partition(s.instances[1]);
    PartitionedEncoding a = encode(parts, s.vocab, s.tables, s.cfg);
    PartitionedEncoding b = encode(parts, s.vocab, s.tables, s.cfg);
    CHECK(a.between.word_ids == b.between.word_ids);
    CHECK(std::memcmp(a.e2_repr.data(), b.e2_repr.data(),
                      a.e2_repr.size() * sizeof(double)) == 0);

    // A long between part is truncated to max_part_len with head and tail
    // preserved.
    EmbeddingConfig tiny = s.cfg;
    tiny.max_part_len = 3;
    PartitionedEncoding t = encode(parts, s.vocab, s.tables, tiny);
    CHECK(t.between.length() == 3);
    CHECK(t.between.word_ids.front() ==
          s.vocab.word_index(parts.between.front().surface));
    CHECK(t.between.word_ids.back() == s.vocab.word_index(parts.between.back().surface));
}

TEST_CASE("single-token entity representation equals that embedding row") {
    Setup s;
    PartitionedEncoding enc =
        encode(partition(s.instances[0]), s.vocab, s.tables, s.cfg);
    REQUIRE(enc.e1_word_ids.size() == 1);
    const int row = enc.e1_word_ids[0];
    CHECK(row == s.vocab.word_index("drugA"));
    for (std::size_t j = 0; j < s.cfg.we_dim; ++j) {
        CHECK(enc.e1_repr(j) == s.tables.word(static_cast<std::size_t>(row), j));
    }
}

TEST_CASE("multi-token entity representation is the mean of its rows") {
    Setup s;
    PairInstance inst = s.instances[0];
    inst.e1_span = TokenSpan{2, 3};  // two-token entity
    PartitionedEncoding enc = encode(partition(inst), s.vocab, s.tables, s.cfg);
    REQUIRE(enc.e1_word_ids.size() == 2);
    for (std::size_t j = 0; j < s.cfg.we_dim; ++j) {
        const double mean =
            (s.tables.word(static_cast<std::size_t>(enc.e1_word_ids[0]), j) +
             s.tables.word(static_cast<std::size_t>(enc.e1_word_ids[1]), j)) /
            2.0;
        CHECK(enc.e1_repr(j) == doctest::Approx(mean).epsilon(1e-15));
    }
}

TEST_CASE("concatenation order is word, POS, dist_e1, dist_e2 (slicing check)") {
    Setup s;
    // Constant-valued tables make each segment identifiable.
    ModelConfig mcfg = toy_config(7);
    ModelParams params = ModelParams::init(mcfg, s.vocab);
    for (std::size_t i = 2; i < params.tables.word.rows(); ++i) {
        for (std::size_t j = 0; j < params.tables.word.cols(); ++j) {
            params.tables.word(i, j) = 1.0;
        }
    }
    for (std::size_t i = 2; i < params.tables.pos.rows(); ++i) {
        for (std::size_t j = 0; j < params.tables.pos.cols(); ++j) {
            params.tables.pos(i, j) = 2.0;
        }
    }
    for (std::size_t i = 1; i < params.tables.dist.rows(); ++i) {
        for (std::size_t j = 0; j < params.tables.dist.cols(); ++j) {
            params.tables.dist(i, j) = 3.0;
        }
    }
    PartitionedEncoding enc =
        encode(partition(s.instances[0]), s.vocab, params.tables, mcfg.embedding());
    Tape tape;
    Tensor embedded = embed_instance(tape, params, enc);
    REQUIRE(embedded.cols() == 4 + 2 + 2 + 2);
    // Row 1 ("dose", a frequent enough word to be in-vocabulary, non-PAD).
    const std::size_t r = 1;
    for (std::size_t j = 0; j < 4; ++j) CHECK(embedded(r, j) == 1.0);
    for (std::size_t j = 4; j < 6; ++j) CHECK(embedded(r, j) == 2.0);
    for (std::size_t j = 6; j < 10; ++j) CHECK(embedded(r, j) == 3.0);
}

TEST_CASE("pretrained vectors: single-row load, no-op load, format errors") {
    Setup s;
    const std::string path = temp_path("vectors.txt");
    {
        std::ofstream out(path);
        out << "1 4\n";
        out << "the 0.125 -0.5 0.75 1.0\n";
    }
    Tensor table = s.tables.word;
    const std::vector<double> before = table.values();
    PretrainedLoadStats stats = load_pretrained_word_vectors(path, s.vocab, table);
    CHECK(stats.file_words == 1);
    CHECK(stats.matched == 1);
    CHECK(stats.coverage() == doctest::Approx(1.0 / 20.0).epsilon(1e-12));
    const int row = s.vocab.word_index("the");
    CHECK(table(static_cast<std::size_t>(row), 0) == 0.125);
    CHECK(table(static_cast<std::size_t>(row), 3) == 1.0);

    // No vocabulary overlap: the table is untouched.
    {
        std::ofstream out(path);
        out << "2 4\n";
        out << "zzz 1 2 3 4\n";
        out << "qqq 5 6 7 8\n";
    }
    Tensor untouched = Tensor(s.tables.word.shape(), before);
    PretrainedLoadStats none = load_pretrained_word_vectors(path, s.vocab, untouched);
    CHECK(none.matched == 0);
    CHECK(untouched.values() == before);

    // Dimension mismatch and malformed lines.
    {
        std::ofstream out(path);
        out << "1 7\n";
    }
    CHECK_THROWS_AS(load_pretrained_word_vectors(path, s.vocab, table), ConfigError);
    {
        std::ofstream out(path);
        out << "1 4\n";
        out << "the 0.1 0.2\n";
    }
    try {
        load_pretrained_word_vectors(path, s.vocab, table);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("save/reload of the word table is bitwise exact") {
    Setup s;
    const std::string path = temp_path("table_roundtrip.txt");
    save_word_vectors(path, s.vocab, s.tables.word);
    Tensor reloaded(s.tables.word.shape());
    PretrainedLoadStats stats = load_pretrained_word_vectors(path, s.vocab, reloaded);
    CHECK(stats.matched == s.vocab.word_count() - 1);  // everything except PAD
    // PAD row stays zero in both tables, so the whole buffer compares bitwise.
    CHECK(std::memcmp(s.tables.word.data(), reloaded.data(),
                      s.tables.word.size() * sizeof(double)) == 0);
}

TEST_CASE("PAD gradient exclusion: gathered PAD rows accumulate but are masked out") {
    Setup s;
    PartitionedEncoding enc =
        encode(partition(s.instances[2]), s.vocab, s.tables, s.cfg);
    Tape tape;
    Tensor table = tape.watch(s.tables.word);
    Tensor gathered = tape.gather_rows(table, enc.before.word_ids);
    tape.backward(tape.sum(gathered));
    // The raw tape gradient lands on row 0; the optimizer zeroes it, which is
    // what keeps PAD rows frozen (asserted end-to-end in the training tests).
    const std::vector<double>& g = tape.grad(table);
    double pad_row = 0.0;
    for (std::size_t j = 0; j < s.tables.word.cols(); ++j) pad_row += g[j];
    CHECK(pad_row != 0.0);
}
