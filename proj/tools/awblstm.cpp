#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "awblstm/checkpoint.hpp"
#include "awblstm/corpus.hpp"
#include "awblstm/embeddings.hpp"
#include "awblstm/errors.hpp"
#include "awblstm/evaluation.hpp"
#include "awblstm/instance_io.hpp"
#include "awblstm/model.hpp"
#include "awblstm/pos_tagger.hpp"
#include "awblstm/synthetic.hpp"
#include "awblstm/training.hpp"
#include "awblstm/verify.hpp"

namespace {

using namespace awblstm;

// ---------------------------------------------------------------------------
// Config file: one `key = value` per line, '#' comments. CLI flags override
// file values, file values override defaults.

void apply_config_line(ModelConfig& cfg, const std::string& key, const std::string& value,
                       const std::string& where) {
    auto as_size = [&]() { return static_cast<std::size_t>(std::stoull(value)); };
    auto as_double = [&]() { return std::stod(value); };
    auto as_bool = [&]() {
        if (value == "true" || value == "1") return true;
        if (value == "false" || value == "0") return false;
        throw ConfigError(where + ": bad boolean '" + value + "' for " + key);
    };
    try {
        if (key == "we_dim") cfg.we_dim = as_size();
        else if (key == "pos_dim") cfg.pos_dim = as_size();
        else if (key == "dist_dim") cfg.dist_dim = as_size();
        else if (key == "h1") cfg.h1 = as_size();
        else if (key == "h2") cfg.h2 = as_size();
        else if (key == "attention_dim") cfg.attention_dim = as_size();
        else if (key == "max_part_len") cfg.max_part_len = as_size();
        else if (key == "dist_clip") cfg.dist_clip = as_size();
        else if (key == "learning_rate") cfg.learning_rate = as_double();
        else if (key == "batch_size") cfg.batch_size = as_size();
        else if (key == "epochs") cfg.epochs = as_size();
        else if (key == "validation_split") cfg.validation_split = as_double();
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "precision") cfg.precision = value;
        else if (key == "optimizer") cfg.optimizer = value;
        else if (key == "grad_clip") cfg.grad_clip = as_double();
        else if (key == "min_word_freq") cfg.min_word_freq = as_size();
        else if (key == "attention_scope") cfg.attention_scope = value;
        else if (key == "neg_downsample") cfg.neg_downsample = as_double();
        else if (key == "early_stop_f1") cfg.early_stop_f1 = as_double();
        else if (key == "freeze_embeddings") cfg.freeze_embeddings = as_bool();
        else if (key == "share_lower_weights") cfg.share_lower_weights = as_bool();
        else if (key == "no_output_gate") cfg.no_output_gate = as_bool();
        else throw ConfigError(where + ": unknown config key '" + key + "'");
    } catch (const std::invalid_argument&) {
        throw ConfigError(where + ": bad value '" + value + "' for " + key);
    } catch (const std::out_of_range&) {
        throw ConfigError(where + ": value '" + value + "' out of range for " + key);
    }
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    std::size_t e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

void load_config_file(ModelConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path + ":" + std::to_string(line_no);
        std::string stripped = line.substr(0, line.find('#'));
        stripped = trim(stripped);
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(where + ": expected 'key = value'");
        }
        std::string key = trim(stripped.substr(0, eq));
        std::string value = trim(stripped.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') {
            value = value.substr(1, value.size() - 2);
        }
        apply_config_line(cfg, key, value, where);
    }
}

// CLI override slots; only values the user actually passed are applied.
struct ConfigFlags {
    std::optional<std::size_t> we_dim, pos_dim, dist_dim, h1, h2, attention_dim,
        max_part_len, dist_clip, batch_size, epochs, min_word_freq;
    std::optional<double> learning_rate, validation_split, grad_clip, neg_downsample,
        early_stop_f1;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> optimizer_name, attention_scope;
    bool freeze_embeddings = false;
    bool share_lower_weights = false;
    bool no_output_gate = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--we-dim", we_dim, "Word embedding dimension");
        cmd->add_option("--pos-dim", pos_dim, "POS embedding dimension");
        cmd->add_option("--dist-dim", dist_dim, "Distance embedding dimension");
        cmd->add_option("--h1", h1, "Lower BLSTM hidden size per direction");
        cmd->add_option("--h2", h2, "Upper BLSTM hidden size per direction");
        cmd->add_option("--attention-dim", attention_dim,
                        "Top attention width (0 = 2*h2)");
        cmd->add_option("--max-part-len", max_part_len, "Per-part token cap");
        cmd->add_option("--dist-clip", dist_clip, "Distance clipping bound");
        cmd->add_option("--batch-size", batch_size, "Mini-batch size");
        cmd->add_option("--epochs", epochs, "Training epochs");
        cmd->add_option("--min-freq", min_word_freq, "Vocabulary frequency cutoff");
        cmd->add_option("--lr", learning_rate, "Learning rate");
        cmd->add_option("--validation-split", validation_split,
                        "Held-out fraction of the training data");
        cmd->add_option("--grad-clip", grad_clip, "Global gradient-norm clip (0 = off)");
        cmd->add_option("--neg-downsample", neg_downsample,
                        "Max Other instances per positive (0 = off)");
        cmd->add_option("--early-stop-f1", early_stop_f1,
                        "Stop when validation macro5 F1 reaches this (0 = off)");
        cmd->add_option("--seed", seed, "Master random seed");
        cmd->add_option("--optimizer", optimizer_name, "adam or sgd");
        cmd->add_option("--attention-scope", attention_scope,
                        "Entity attention normalization: sentence or part");
        cmd->add_flag("--freeze-embeddings", freeze_embeddings,
                      "Keep embedding tables fixed during training");
        cmd->add_flag("--share-lower-weights", share_lower_weights,
                      "One weight set for all three lower BLSTMs");
        cmd->add_flag("--no-output-gate", no_output_gate,
                      "Reduced cell: h = tanh(C), no output gate");
    }

    void apply(ModelConfig& cfg) const {
        if (we_dim) cfg.we_dim = *we_dim;
        if (pos_dim) cfg.pos_dim = *pos_dim;
        if (dist_dim) cfg.dist_dim = *dist_dim;
        if (h1) cfg.h1 = *h1;
        if (h2) cfg.h2 = *h2;
        if (attention_dim) cfg.attention_dim = *attention_dim;
        if (max_part_len) cfg.max_part_len = *max_part_len;
        if (dist_clip) cfg.dist_clip = *dist_clip;
        if (batch_size) cfg.batch_size = *batch_size;
        if (epochs) cfg.epochs = *epochs;
        if (min_word_freq) cfg.min_word_freq = *min_word_freq;
        if (learning_rate) cfg.learning_rate = *learning_rate;
        if (validation_split) cfg.validation_split = *validation_split;
        if (grad_clip) cfg.grad_clip = *grad_clip;
        if (neg_downsample) cfg.neg_downsample = *neg_downsample;
        if (early_stop_f1) cfg.early_stop_f1 = *early_stop_f1;
        if (seed) cfg.seed = *seed;
        if (optimizer_name) cfg.optimizer = *optimizer_name;
        if (attention_scope) cfg.attention_scope = *attention_scope;
        if (freeze_embeddings) cfg.freeze_embeddings = true;
        if (share_lower_weights) cfg.share_lower_weights = true;
        if (no_output_gate) cfg.no_output_gate = true;
    }
};

// ---------------------------------------------------------------------------
// Shared helpers

struct InstanceOutputs {
    std::vector<Label> predictions;
    std::vector<std::vector<double>> probs;
    std::vector<EntityAttentionWeights> alphas;
    std::vector<std::vector<double>> betas;
    std::vector<std::string> sentence_ids;
};

InstanceOutputs run_model(const LoadedModel& model, const std::vector<PairInstance>& data,
                          bool want_attention) {
    InstanceOutputs out;
    for (const PairInstance& inst : data) {
        Tape tape;
        PartitionedEncoding enc = encode(partition(inst), model.vocab, model.params.tables,
                                         model.config.embedding());
        ForwardResult fwd = model_forward(tape, model.params, enc, model.config);
        out.predictions.push_back(predict_label(fwd.probs));
        out.probs.push_back(fwd.probs.values());
        out.sentence_ids.push_back(inst.sentence_id);
        if (want_attention) {
            out.alphas.push_back(fwd.entity_weights);
            out.betas.push_back(fwd.beta);
        }
    }
    return out;
}

void dump_attention(const InstanceOutputs& outputs, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < outputs.sentence_ids.size(); ++i) {
        nlohmann::json j;
        j["sentence_id"] = outputs.sentence_ids[i];
        j["alpha"] = outputs.alphas[i].alpha_avg;
        j["beta"] = outputs.betas[i];
        out << j.dump() << '\n';
    }
}

void print_label_histogram(std::ostream& os, const std::vector<PairInstance>& instances) {
    std::map<std::string, std::size_t> counts;
    for (const PairInstance& inst : instances) counts[label_name(inst.label)]++;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        os << "  " << kLabelNames[c] << ": " << counts[kLabelNames[c]] << "\n";
    }
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_preprocess(const std::string& corpus_path, const std::string& sidecar,
                   const std::string& out_path, const std::string& vocab_out,
                   std::size_t min_freq) {
    std::vector<Sentence> sentences = parse_corpus(corpus_path);
    PosSource pos = sidecar.empty() ? PosSource() : PosSource::from_sidecar(sidecar);
    CorpusSummary summary;
    std::vector<PairInstance> instances = build_instances(sentences, pos, &summary);
    write_instances(instances, out_path);
    if (!vocab_out.empty()) {
        Vocabulary::build(instances, min_freq).save(vocab_out);
    }
    std::cout << "sentences: " << summary.sentences << "\n"
              << "instances: " << summary.instances << "\n"
              << "skipped pairs: " << summary.skipped_pairs << "\n";
    if (pos.has_sidecar()) {
        std::cout << "sidecar fallbacks: " << pos.fallback_sentences() << " sentences\n";
    }
    print_label_histogram(std::cout, instances);
    return 0;
}

int cmd_synth(const std::string& out_train, const std::string& out_test,
              std::size_t train_size, std::size_t test_size, std::uint64_t seed,
              bool unbalanced) {
    SynthConfig cfg;
    cfg.train_size = train_size;
    cfg.test_size = test_size;
    cfg.balanced = !unbalanced;
    SynthCorpus corpus = generate_synthetic_corpus(cfg, seed);
    write_instances(corpus.train, out_train);
    write_instances(corpus.test, out_test);
    std::cout << "train instances: " << corpus.train.size() << "\n"
              << "test instances: " << corpus.test.size() << "\n";
    print_label_histogram(std::cout, corpus.train);
    return 0;
}

int cmd_train(const std::string& data_path, const std::string& config_path,
              const std::string& vectors_path, const std::string& model_out,
              const std::string& log_path, const ConfigFlags& flags, bool quiet) {
    ModelConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    flags.apply(cfg);
    cfg.validate();

    std::vector<PairInstance> data = read_instances(data_path);
    Vocabulary vocab = Vocabulary::build(data, cfg.min_word_freq);
    ModelParams params = ModelParams::init(cfg, vocab);
    if (!vectors_path.empty()) {
        PretrainedLoadStats stats =
            load_pretrained_word_vectors(vectors_path, vocab, params.tables.word);
        char line[128];
        std::snprintf(line, sizeof(line),
                      "pretrained vectors: %zu of %zu vocabulary words covered (%.1f%%)\n",
                      stats.matched, stats.vocab_words, 100.0 * stats.coverage());
        std::cout << line;
    }

    TrainOptions options;
    options.threads = env_thread_cap();
    options.progress = quiet ? nullptr : &std::cout;
    TrainResult result = train_model(params, vocab, data, cfg, options);
    if (!log_path.empty()) write_training_log(result.log, log_path);
    save_checkpoint(model_out, cfg, vocab, params);

    const EpochLog& last = result.log.back();
    char line[160];
    std::snprintf(line, sizeof(line),
                  "done: %zu epochs%s  train_loss %.6f  val_macro_f1_5class %.4f\n",
                  result.epochs_run, result.early_stopped ? " (early stop)" : "",
                  last.train_loss, last.val_macro_f1_5class);
    std::cout << line;
    return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& format_name, const std::string& attention_path,
             const std::string& out_path) {
    LoadedModel model = load_checkpoint(model_path);
    std::vector<PairInstance> data = read_instances(data_path);
    if (data.empty()) throw ValidationError("no instances in '" + data_path + "'");

    InstanceOutputs outputs = run_model(model, data, !attention_path.empty());
    if (!attention_path.empty()) dump_attention(outputs, attention_path);

    std::vector<Label> gold;
    gold.reserve(data.size());
    for (const PairInstance& inst : data) gold.push_back(inst.label);
    EvalReport report = score(gold, outputs.predictions);

    ReportFormat format = ReportFormat::Table;
    if (format_name == "json") format = ReportFormat::Json;
    if (format_name == "csv") format = ReportFormat::Csv;
    const std::string rendered = render_report(report, format);
    if (out_path.empty()) {
        std::cout << rendered;
    } else {
        std::ofstream out(out_path, std::ios::binary);
        if (!out) throw ValidationError("cannot open '" + out_path + "' for writing");
        out << rendered;
    }
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input_path,
                const std::string& out_path, const std::string& attention_path) {
    LoadedModel model = load_checkpoint(model_path);
    std::vector<PairInstance> data = read_instances(input_path);
    InstanceOutputs outputs = run_model(model, data, !attention_path.empty());
    if (!attention_path.empty()) dump_attention(outputs, attention_path);

    std::ostream* os = &std::cout;
    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path, std::ios::binary);
        if (!file) throw ValidationError("cannot open '" + out_path + "' for writing");
        os = &file;
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        nlohmann::json j;
        j["sentence_id"] = outputs.sentence_ids[i];
        j["label"] = label_name(outputs.predictions[i]);
        j["probs"] = outputs.probs[i];
        *os << j.dump() << '\n';
    }
    return 0;
}

int cmd_verify(const std::string& suite) {
    std::vector<CheckResult> results;
    if (suite == "gradcheck") {
        results = run_gradcheck_suite();
    } else if (suite == "oracle") {
        results = run_oracle_suite();
    } else if (suite == "properties") {
        results = run_properties_suite();
    } else {
        throw ConfigError("unknown suite '" + suite +
                          "' (expected gradcheck, oracle, or properties)");
    }
    std::size_t failures = 0;
    for (const CheckResult& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name;
        if (!r.pass) std::cout << "  [" << r.detail << "]";
        std::cout << "\n";
        failures += !r.pass;
    }
    std::cout << (failures == 0 ? "all checks passed" : "checks failed") << " ("
              << results.size() - failures << "/" << results.size() << ")\n";
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Attention-wrapped hierarchical BLSTM relation classifier for "
                 "drug-drug interaction extraction"};
    app.require_subcommand(1);

    // preprocess
    std::string corpus_path, sidecar, inst_out, vocab_out;
    std::size_t min_freq = 1;
    CLI::App* preprocess =
        app.add_subcommand("preprocess", "Parse annotated XML into instance JSONL");
    preprocess->add_option("--corpus", corpus_path, "XML file or directory")->required();
    preprocess->add_option("--pos-sidecar", sidecar, "POS TSV sidecar");
    preprocess->add_option("--out", inst_out, "Output instance JSONL")->required();
    preprocess->add_option("--vocab-out", vocab_out, "Output vocabulary JSON");
    preprocess->add_option("--min-freq", min_freq, "Vocabulary frequency cutoff");

    // synth
    std::string synth_train, synth_test;
    std::size_t train_size = 2000, test_size = 500;
    std::uint64_t synth_seed = 7;
    bool unbalanced = false;
    CLI::App* synth =
        app.add_subcommand("synth", "Generate the deterministic synthetic corpus");
    synth->add_option("--out-train", synth_train, "Train JSONL path")->required();
    synth->add_option("--out-test", synth_test, "Test JSONL path")->required();
    synth->add_option("--train-size", train_size, "Train instances");
    synth->add_option("--test-size", test_size, "Test instances");
    synth->add_option("--seed", synth_seed, "Generator seed");
    synth->add_flag("--unbalanced", unbalanced, "Sample labels uniformly at random");

    // train
    std::string train_data, config_path, vectors_path, model_out, log_path;
    bool quiet = false;
    ConfigFlags flags;
    CLI::App* train = app.add_subcommand("train", "Train a model on instance JSONL");
    train->add_option("--data", train_data, "Instance JSONL")->required();
    train->add_option("--config", config_path, "key = value config file");
    train->add_option("--pretrained-vectors", vectors_path, "Word vector text file");
    train->add_option("--out-model", model_out, "Checkpoint path")->required();
    train->add_option("--log", log_path, "Training log CSV");
    train->add_flag("--quiet", quiet, "Suppress per-epoch progress");
    flags.add_to(train);

    // eval
    std::string eval_model, eval_data, eval_format = "table", eval_attention, eval_out;
    CLI::App* eval = app.add_subcommand("eval", "Score a checkpoint against labeled data");
    eval->add_option("--model", eval_model, "Checkpoint path")->required();
    eval->add_option("--data", eval_data, "Instance JSONL")->required();
    eval->add_option("--format", eval_format, "table, json, or csv")
        ->check(CLI::IsMember({"table", "json", "csv"}));
    eval->add_option("--dump-attention", eval_attention,
                     "Write per-instance attention weights JSONL");
    eval->add_option("--out", eval_out, "Write the report here instead of stdout");

    // predict
    std::string pred_model, pred_input, pred_out, pred_attention;
    CLI::App* predict = app.add_subcommand("predict", "Label instances with a checkpoint");
    predict->add_option("--model", pred_model, "Checkpoint path")->required();
    predict->add_option("--input", pred_input, "Instance JSONL")->required();
    predict->add_option("--out", pred_out, "Write predictions here instead of stdout");
    predict->add_option("--dump-attention", pred_attention,
                        "Write per-instance attention weights JSONL");

    // verify
    std::string suite;
    CLI::App* verify = app.add_subcommand("verify", "Run a verification suite");
    verify->add_option("--suite", suite, "gradcheck, oracle, or properties")
        ->required()
        ->check(CLI::IsMember({"gradcheck", "oracle", "properties"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*preprocess) {
            return cmd_preprocess(corpus_path, sidecar, inst_out, vocab_out, min_freq);
        }
        if (*synth) {
            return cmd_synth(synth_train, synth_test, train_size, test_size, synth_seed,
                             unbalanced);
        }
        if (*train) {
            return cmd_train(train_data, config_path, vectors_path, model_out, log_path,
                             flags, quiet);
        }
        if (*eval) {
            return cmd_eval(eval_model, eval_data, eval_format, eval_attention, eval_out);
        }
        if (*predict) {
            return cmd_predict(pred_model, pred_input, pred_out, pred_attention);
        }
        if (*verify) {
            return cmd_verify(suite);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
