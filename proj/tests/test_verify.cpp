#include "awblstm/verify.hpp"

#include <doctest.h>

using namespace awblstm;

namespace {

void expect_all_pass(const std::vector<CheckResult>& results) {
    CHECK(!results.empty());
    for (const CheckResult& r : results) {
        INFO(r.name, ": ", r.detail);
        CHECK(r.pass);
    }
}

}  // namespace

TEST_CASE("gradcheck suite passes") { expect_all_pass(run_gradcheck_suite()); }

TEST_CASE("oracle suite passes") { expect_all_pass(run_oracle_suite()); }

TEST_CASE("properties suite passes") { expect_all_pass(run_properties_suite()); }

TEST_CASE("toy fixtures have the documented scale") {
    ModelConfig cfg = toy_config();
    CHECK(cfg.we_dim == 4);
    CHECK(cfg.pos_dim == 2);
    CHECK(cfg.dist_dim == 2);
    CHECK(cfg.h1 == 3);
    CHECK(cfg.h2 == 3);
    Vocabulary vocab = Vocabulary::build(toy_instances());
    CHECK(vocab.word_count() == 20);
    for (const PairInstance& inst : toy_instances()) {
        PartitionedInstance parts = partition(inst);
        CHECK(parts.before.size() <= 4);
        CHECK(parts.between.size() <= 4);
        CHECK(parts.after.size() <= 4);
    }
}
