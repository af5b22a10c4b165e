#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "awblstm/checkpoint.hpp"

using namespace awblstm;

namespace {

const std::string kCli = AWBLSTM_CLI;
const std::string kTmp = std::string(BINARY_DIR);
const std::string kFixture = std::string(FIXTURE_DIR) + "/mini_corpus.xml";

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Small, fast training configuration shared by the CLI tests.
const std::string kTinyTrainFlags =
    " --we-dim 8 --pos-dim 2 --dist-dim 2 --h1 6 --h2 6 --dist-clip 10"
    " --max-part-len 30 --epochs 2 --batch-size 16 --seed 7";

}  // namespace

TEST_CASE("usage errors exit with code 2") {
    CHECK(run("preprocess") == 2);               // missing required flags
    CHECK(run("") == 2);                         // missing subcommand
    CHECK(run("eval --model x") == 2);           // missing --data
    CHECK(run("verify --suite bogus") == 2);     // bad suite value
    CHECK(run("--help") == 0);
}

TEST_CASE("missing corpus path is a runtime failure, not a crash") {
    CHECK(run("preprocess --corpus /nonexistent.xml --out " + kTmp + "/x.jsonl") == 1);
}

TEST_CASE("preprocess is byte-deterministic across reruns") {
    const std::string out1 = kTmp + "/cli_pre1.jsonl";
    const std::string out2 = kTmp + "/cli_pre2.jsonl";
    const std::string vocab1 = kTmp + "/cli_vocab1.json";
    const std::string vocab2 = kTmp + "/cli_vocab2.json";
    REQUIRE(run("preprocess --corpus " + kFixture + " --out " + out1 + " --vocab-out " +
                vocab1) == 0);
    REQUIRE(run("preprocess --corpus " + kFixture + " --out " + out2 + " --vocab-out " +
                vocab2) == 0);
    CHECK(slurp(out1) == slurp(out2));
    CHECK(slurp(vocab1) == slurp(vocab2));
}

TEST_CASE("synth/train/eval/predict pipeline holds together") {
    const std::string train_path = kTmp + "/cli_train.jsonl";
    const std::string test_path = kTmp + "/cli_test.jsonl";
    const std::string model_path = kTmp + "/cli_model.awbl";
    const std::string log_path = kTmp + "/cli_log.csv";

    REQUIRE(run("synth --out-train " + train_path + " --out-test " + test_path +
                " --train-size 120 --test-size 30 --seed 7") == 0);
    REQUIRE(run("train --data " + train_path + " --out-model " + model_path + " --log " +
                log_path + kTinyTrainFlags + " --quiet") == 0);

    // Log: header plus one row per epoch.
    std::istringstream log(slurp(log_path));
    std::string line;
    std::size_t rows = 0;
    REQUIRE(std::getline(log, line));
    CHECK(line ==
          "epoch,train_loss,val_loss,val_macro_f1_4class,val_macro_f1_5class,wall_seconds");
    while (std::getline(log, line)) ++rows;
    CHECK(rows == 2);

    const std::string report_path = kTmp + "/cli_report.json";
    REQUIRE(run("eval --model " + model_path + " --data " + test_path +
                " --format json --out " + report_path) == 0);
    auto report = nlohmann::json::parse(slurp(report_path));
    CHECK(report.contains("macro4"));
    CHECK(report.contains("macro5"));

    const std::string pred_path = kTmp + "/cli_pred.jsonl";
    const std::string att_path = kTmp + "/cli_att.jsonl";
    REQUIRE(run("predict --model " + model_path + " --input " + test_path + " --out " +
                pred_path + " --dump-attention " + att_path) == 0);
    std::istringstream preds(slurp(pred_path));
    std::size_t count = 0;
    while (std::getline(preds, line)) {
        auto j = nlohmann::json::parse(line);
        CHECK(j.contains("label"));
        CHECK(j.at("probs").size() == 5);
        ++count;
    }
    CHECK(count == 30);

    std::istringstream atts(slurp(att_path));
    count = 0;
    while (std::getline(atts, line)) {
        auto j = nlohmann::json::parse(line);
        double alpha_sum = 0.0, beta_sum = 0.0;
        for (double v : j.at("alpha")) alpha_sum += v;
        for (double v : j.at("beta")) beta_sum += v;
        CHECK(alpha_sum == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(beta_sum == doctest::Approx(1.0).epsilon(1e-9));
        ++count;
    }
    CHECK(count == 30);

    // eval twice -> identical reports.
    const std::string report2 = kTmp + "/cli_report2.json";
    REQUIRE(run("eval --model " + model_path + " --data " + test_path +
                " --format json --out " + report2) == 0);
    CHECK(slurp(report_path) == slurp(report2));
}

TEST_CASE("memorization run scores macro5 F1 = 1.0 on its own training data") {
    const std::string train_path = kTmp + "/cli_mem.jsonl";
    const std::string test_path = kTmp + "/cli_mem_test.jsonl";
    const std::string model_path = kTmp + "/cli_mem.awbl";
    const std::string report_path = kTmp + "/cli_mem_report.json";
    REQUIRE(run("synth --out-train " + train_path + " --out-test " + test_path +
                " --train-size 100 --test-size 10 --seed 11") == 0);
    REQUIRE(run("train --data " + train_path + " --out-model " + model_path +
                " --we-dim 16 --pos-dim 4 --dist-dim 4 --h1 12 --h2 12 --dist-clip 10"
                " --max-part-len 30 --epochs 100 --batch-size 16 --seed 11"
                " --validation-split 0 --lr 3e-3 --quiet") == 0);
    REQUIRE(run("eval --model " + model_path + " --data " + train_path +
                " --format json --out " + report_path) == 0);
    auto report = nlohmann::json::parse(slurp(report_path));
    CHECK(report["macro5"]["f1"].get<double>() == 1.0);

    // predict labels agree with the labels eval scored (same data, same model).
    const std::string pred_path = kTmp + "/cli_mem_pred.jsonl";
    REQUIRE(run("predict --model " + model_path + " --input " + train_path + " --out " +
                pred_path) == 0);
    std::istringstream gold_in(slurp(train_path));
    std::istringstream pred_in(slurp(pred_path));
    std::string gold_line, pred_line;
    while (std::getline(gold_in, gold_line) && std::getline(pred_in, pred_line)) {
        auto gold = nlohmann::json::parse(gold_line);
        auto pred = nlohmann::json::parse(pred_line);
        CHECK(gold.at("label") == pred.at("label"));
    }
}

TEST_CASE("two seeded runs produce identical logs apart from wall time") {
    const std::string train_path = kTmp + "/cli_det.jsonl";
    const std::string test_path = kTmp + "/cli_det_test.jsonl";
    REQUIRE(run("synth --out-train " + train_path + " --out-test " + test_path +
                " --train-size 80 --test-size 20 --seed 7") == 0);

    auto train_once = [&](const std::string& tag) {
        const std::string model = kTmp + "/cli_det_" + tag + ".awbl";
        const std::string log = kTmp + "/cli_det_" + tag + ".csv";
        REQUIRE(run("train --data " + train_path + " --out-model " + model + " --log " +
                    log + kTinyTrainFlags + " --quiet") == 0);
        return log;
    };
    const std::string log_a = train_once("a");
    const std::string log_b = train_once("b");

    auto strip_wall = [](const std::string& text) {
        std::istringstream in(text);
        std::ostringstream out;
        std::string line;
        while (std::getline(in, line)) {
            out << line.substr(0, line.rfind(',')) << '\n';
        }
        return out.str();
    };
    CHECK(strip_wall(slurp(log_a)) == strip_wall(slurp(log_b)));
}

TEST_CASE("--freeze-embeddings keeps the tables bitwise identical") {
    const std::string train_path = kTmp + "/cli_frz.jsonl";
    const std::string test_path = kTmp + "/cli_frz_test.jsonl";
    const std::string model_path = kTmp + "/cli_frz.awbl";
    REQUIRE(run("synth --out-train " + train_path + " --out-test " + test_path +
                " --train-size 60 --test-size 10 --seed 3") == 0);
    REQUIRE(run("train --data " + train_path + " --out-model " + model_path +
                kTinyTrainFlags + " --freeze-embeddings --quiet") == 0);

    // Rebuild the untrained parameters from the stored config and compare.
    LoadedModel trained = load_checkpoint(model_path);
    ModelParams fresh = ModelParams::init(trained.config, trained.vocab);
    CHECK(trained.params.tables.word.values() == fresh.tables.word.values());
    CHECK(trained.params.tables.pos.values() == fresh.tables.pos.values());
    CHECK(trained.params.tables.dist.values() == fresh.tables.dist.values());
    CHECK(trained.params.w_dense.values() != fresh.w_dense.values());
}

TEST_CASE("config file values apply, CLI flags win") {
    const std::string cfg_path = kTmp + "/cli_cfg.txt";
    {
        std::ofstream cfg(cfg_path);
        cfg << "# tiny configuration\n"
            << "we_dim = 8\npos_dim = 2\ndist_dim = 2\nh1 = 5\nh2 = 5\n"
            << "dist_clip = 10\nmax_part_len = 30\nepochs = 1\nbatch_size = 16\n"
            << "seed = 7\n";
    }
    const std::string train_path = kTmp + "/cli_cfgdata.jsonl";
    const std::string test_path = kTmp + "/cli_cfgtest.jsonl";
    const std::string model_path = kTmp + "/cli_cfg.awbl";
    REQUIRE(run("synth --out-train " + train_path + " --out-test " + test_path +
                " --train-size 40 --test-size 10 --seed 7") == 0);
    REQUIRE(run("train --data " + train_path + " --config " + cfg_path + " --out-model " +
                model_path + " --h1 6 --quiet") == 0);
    LoadedModel model = load_checkpoint(model_path);
    CHECK(model.config.h1 == 6);   // CLI override
    CHECK(model.config.h2 == 5);   // file value
    CHECK(model.config.we_dim == 8);

    // A bad config key is a runtime failure with exit 1.
    {
        std::ofstream cfg(cfg_path, std::ios::app);
        cfg << "bogus_key = 1\n";
    }
    CHECK(run("train --data " + train_path + " --config " + cfg_path + " --out-model " +
              model_path + " --quiet") == 1);
}
