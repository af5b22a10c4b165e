#include "awblstm/model.hpp"

#include <cmath>

#include <json.hpp>

#include "awblstm/errors.hpp"
#include "awblstm/rng.hpp"

namespace awblstm {

using nlohmann::json;

void ModelConfig::validate() const {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError(what);
    };
    require(we_dim > 0 && pos_dim > 0 && dist_dim > 0, "embedding dimensions must be > 0");
    require(h1 > 0 && h2 > 0, "hidden sizes must be > 0");
    require(max_part_len > 0, "max_part_len must be > 0");
    require(dist_clip > 0, "dist_clip must be > 0");
    require(batch_size > 0, "batch_size must be > 0");
    require(validation_split >= 0.0 && validation_split < 1.0,
            "validation_split must be in [0, 1)");
    require(learning_rate > 0.0, "learning_rate must be > 0");
    require(grad_clip >= 0.0, "grad_clip must be >= 0");
    require(neg_downsample >= 0.0, "neg_downsample must be >= 0");
    require(precision == "double",
            "precision mode '" + precision + "' is not supported; use \"double\"");
    require(optimizer == "adam" || optimizer == "sgd",
            "optimizer must be \"adam\" or \"sgd\", got \"" + optimizer + "\"");
    require(attention_scope == "sentence" || attention_scope == "part",
            "attention_scope must be \"sentence\" or \"part\"");
}

std::string ModelConfig::to_json() const {
    json j;
    j["we_dim"] = we_dim;
    j["pos_dim"] = pos_dim;
    j["dist_dim"] = dist_dim;
    j["h1"] = h1;
    j["h2"] = h2;
    j["attention_dim"] = attention_dim;
    j["max_part_len"] = max_part_len;
    j["dist_clip"] = dist_clip;
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["epochs"] = epochs;
    j["validation_split"] = validation_split;
    j["seed"] = seed;
    j["precision"] = precision;
    j["optimizer"] = optimizer;
    j["grad_clip"] = grad_clip;
    j["min_word_freq"] = min_word_freq;
    j["attention_scope"] = attention_scope;
    j["neg_downsample"] = neg_downsample;
    j["early_stop_f1"] = early_stop_f1;
    j["freeze_embeddings"] = freeze_embeddings;
    j["share_lower_weights"] = share_lower_weights;
    j["no_output_gate"] = no_output_gate;
    return j.dump();
}

ModelConfig ModelConfig::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    ModelConfig c;
    try {
        j.at("we_dim").get_to(c.we_dim);
        j.at("pos_dim").get_to(c.pos_dim);
        j.at("dist_dim").get_to(c.dist_dim);
        j.at("h1").get_to(c.h1);
        j.at("h2").get_to(c.h2);
        j.at("attention_dim").get_to(c.attention_dim);
        j.at("max_part_len").get_to(c.max_part_len);
        j.at("dist_clip").get_to(c.dist_clip);
        j.at("learning_rate").get_to(c.learning_rate);
        j.at("batch_size").get_to(c.batch_size);
        j.at("epochs").get_to(c.epochs);
        j.at("validation_split").get_to(c.validation_split);
        j.at("seed").get_to(c.seed);
        j.at("precision").get_to(c.precision);
        j.at("optimizer").get_to(c.optimizer);
        j.at("grad_clip").get_to(c.grad_clip);
        j.at("min_word_freq").get_to(c.min_word_freq);
        j.at("attention_scope").get_to(c.attention_scope);
        j.at("neg_downsample").get_to(c.neg_downsample);
        j.at("early_stop_f1").get_to(c.early_stop_f1);
        j.at("freeze_embeddings").get_to(c.freeze_embeddings);
        j.at("share_lower_weights").get_to(c.share_lower_weights);
        j.at("no_output_gate").get_to(c.no_output_gate);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config JSON: ") + e.what());
    }
    c.validate();
    return c;
}

ModelParams ModelParams::init(const ModelConfig& cfg, const Vocabulary& vocab) {
    cfg.validate();
    ModelParams p;
    p.tables = EmbeddingTables::init(vocab, cfg.embedding(), cfg.seed);
    Rng net = Rng::substream(cfg.seed, "init.net");
    p.hierarchy = HierarchyParams::init(cfg.h1, cfg.h2, cfg.embedding().token_dim(),
                                        cfg.share_lower_weights, net);
    p.top = TopAttentionParams::init(cfg.attention_width(), 2 * cfg.h2, net);
    p.w_dense = Tensor({kNumClasses, 2 * cfg.h2});
    const double scale = std::sqrt(2.0 / static_cast<double>(kNumClasses + 2 * cfg.h2));
    for (std::size_t i = 0; i < p.w_dense.size(); ++i) {
        p.w_dense.data()[i] = scale * net.normal();
    }
    p.b_dense = Tensor({kNumClasses});
    return p;
}

namespace {

template <typename Params, typename TensorPtr>
std::vector<std::pair<std::string, TensorPtr>> list_params(Params& p) {
    std::vector<std::pair<std::string, TensorPtr>> out;
    auto add = [&out](const std::string& name, TensorPtr t) {
        if (t->defined()) out.emplace_back(name, t);
    };
    add("embed.word", &p.tables.word);
    add("embed.pos", &p.tables.pos);
    add("embed.dist", &p.tables.dist);

    auto add_cell = [&](const std::string& prefix, auto& cell) {
        add(prefix + ".w_f", &cell.w_f);
        add(prefix + ".w_i", &cell.w_i);
        add(prefix + ".w_g", &cell.w_g);
        add(prefix + ".w_o", &cell.w_o);
        add(prefix + ".b_f", &cell.b_f);
        add(prefix + ".b_i", &cell.b_i);
        add(prefix + ".b_g", &cell.b_g);
        add(prefix + ".b_o", &cell.b_o);
    };
    add_cell("lower.before.fwd", p.hierarchy.before_fwd);
    add_cell("lower.before.bwd", p.hierarchy.before_bwd);
    add_cell("lower.between.fwd", p.hierarchy.between_fwd);
    add_cell("lower.between.bwd", p.hierarchy.between_bwd);
    add_cell("lower.after.fwd", p.hierarchy.after_fwd);
    add_cell("lower.after.bwd", p.hierarchy.after_bwd);
    add_cell("upper.fwd", p.hierarchy.upper_fwd);
    add_cell("upper.bwd", p.hierarchy.upper_bwd);
    add("top.w", &p.top.w);
    add("top.b", &p.top.b);
    add("top.u", &p.top.u);
    add("dense.w", &p.w_dense);
    add("dense.b", &p.b_dense);
    return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> named_params(ModelParams& p) {
    return list_params<ModelParams, Tensor*>(p);
}

std::vector<std::pair<std::string, const Tensor*>> named_params(const ModelParams& p) {
    return list_params<const ModelParams, const Tensor*>(p);
}

ModelParams watch_params(Tape& tape, const ModelParams& p) {
    ModelParams bound = p;
    for (auto& [name, tensor] : named_params(bound)) {
        (void)name;
        *tensor = tape.watch(*tensor);
    }
    return bound;
}

namespace {

struct EmbeddedParts {
    Tensor word_full;  // [T, we]  word component per position, whole sentence
    Tensor full;       // [T, token_dim]
    std::size_t len_before = 0, len_between = 0, len_after = 0;
};

EmbeddedParts embed_all(Tape& tape, const ModelParams& params,
                        const PartitionedEncoding& enc) {
    std::vector<Tensor> word_parts, full_parts;
    for (const PartEncoding* part : {&enc.before, &enc.between, &enc.after}) {
        Tensor words = tape.gather_rows(params.tables.word, part->word_ids);
        Tensor pos = tape.gather_rows(params.tables.pos, part->pos_ids);
        Tensor d1 = tape.gather_rows(params.tables.dist, part->d1_ids);
        Tensor d2 = tape.gather_rows(params.tables.dist, part->d2_ids);
        word_parts.push_back(words);
        full_parts.push_back(tape.concat_cols({words, pos, d1, d2}));
    }
    EmbeddedParts out;
    out.word_full = tape.concat_rows(word_parts);
    out.full = tape.concat_rows(full_parts);
    out.len_before = enc.before.length();
    out.len_between = enc.between.length();
    out.len_after = enc.after.length();
    return out;
}

Tensor entity_repr(Tape& tape, const ModelParams& params, const std::vector<int>& ids,
                   std::size_t we_dim) {
    if (ids.empty()) return Tensor({we_dim});
    return tape.mean_rows(tape.gather_rows(params.tables.word, ids));
}

}  // namespace

Tensor embed_instance(Tape& tape, const ModelParams& params,
                      const PartitionedEncoding& enc) {
    return embed_all(tape, params, enc).full;
}

ForwardResult model_forward(Tape& tape, const ModelParams& params,
                            const PartitionedEncoding& enc, const ModelConfig& cfg) {
    EmbeddedParts embedded = embed_all(tape, params, enc);
    Tensor e1 = entity_repr(tape, params, enc.e1_word_ids, cfg.we_dim);
    Tensor e2 = entity_repr(tape, params, enc.e2_word_ids, cfg.we_dim);
    const std::vector<bool> keep = enc.keep_mask();

    ForwardResult out;
    Tensor scaled;
    if (cfg.attention_scope == "part") {
        // Ablation mode: normalize each part's weights separately. A part
        // that is only PAD keeps its (all-zero) rows unchanged.
        std::vector<Tensor> scaled_parts;
        std::size_t off = 0;
        for (std::size_t len :
             {embedded.len_before, embedded.len_between, embedded.len_after}) {
            std::vector<bool> part_keep(keep.begin() + off, keep.begin() + off + len);
            Tensor word_part = tape.slice_rows(embedded.word_full, off, off + len);
            Tensor full_part = tape.slice_rows(embedded.full, off, off + len);
            bool any = false;
            for (bool k : part_keep) any = any || k;
            if (any) {
                EntityAttentionResult ea =
                    entity_attention(tape, word_part, full_part, e1, e2, part_keep);
                scaled_parts.push_back(ea.scaled);
                out.entity_weights.alpha1.insert(out.entity_weights.alpha1.end(),
                                                 ea.weights.alpha1.begin(),
                                                 ea.weights.alpha1.end());
                out.entity_weights.alpha2.insert(out.entity_weights.alpha2.end(),
                                                 ea.weights.alpha2.begin(),
                                                 ea.weights.alpha2.end());
                out.entity_weights.alpha_avg.insert(out.entity_weights.alpha_avg.end(),
                                                    ea.weights.alpha_avg.begin(),
                                                    ea.weights.alpha_avg.end());
            } else {
                scaled_parts.push_back(full_part);
                out.entity_weights.alpha1.insert(out.entity_weights.alpha1.end(), len, 0.0);
                out.entity_weights.alpha2.insert(out.entity_weights.alpha2.end(), len, 0.0);
                out.entity_weights.alpha_avg.insert(out.entity_weights.alpha_avg.end(), len,
                                                    0.0);
            }
            off += len;
        }
        scaled = tape.concat_rows(scaled_parts);
    } else {
        EntityAttentionResult ea =
            entity_attention(tape, embedded.word_full, embedded.full, e1, e2, keep);
        scaled = ea.scaled;
        out.entity_weights = std::move(ea.weights);
    }

    Tensor x_before = tape.slice_rows(scaled, 0, embedded.len_before);
    Tensor x_between = tape.slice_rows(scaled, embedded.len_before,
                                       embedded.len_before + embedded.len_between);
    Tensor x_after = tape.slice_rows(scaled, embedded.len_before + embedded.len_between,
                                     scaled.rows());

    HierarchyOutput hier = hierarchical_forward(tape, params.hierarchy, x_before, x_between,
                                                x_after, !cfg.no_output_gate);
    TopAttentionResult top = top_attention(tape, hier.h2, params.top, keep);
    out.pooled = top.pooled;
    out.beta = top.beta.values();

    Tensor logits = tape.add(tape.matvec(params.w_dense, top.pooled), params.b_dense);
    out.probs = tape.softmax(logits);
    return out;
}

Label predict_label(const Tensor& probs) {
    if (probs.rank() != 1 || probs.size() != kNumClasses) {
        throw ContractError("predict: expected a probability vector of length " +
                            std::to_string(kNumClasses));
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < kNumClasses; ++i) {
        if (probs(i) > probs(best)) best = i;
    }
    return static_cast<Label>(best);
}

Tensor model_nll(Tape& tape, const Tensor& probs, Label gold) {
    return tape.scale(tape.log(tape.pick(probs, static_cast<std::size_t>(gold))), -1.0);
}

}  // namespace awblstm
