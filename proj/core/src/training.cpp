#include "awblstm/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <thread>

#include "awblstm/errors.hpp"
#include "awblstm/rng.hpp"

namespace awblstm {

namespace {

using GradVec = std::vector<std::vector<double>>;

struct Workset {
    std::vector<PartitionedEncoding> encodings;
    std::vector<Label> labels;
};

Workset encode_all(const std::vector<PairInstance>& data, const Vocabulary& vocab,
                   const EmbeddingTables& tables, const EmbeddingConfig& ecfg) {
    Workset w;
    w.encodings.reserve(data.size());
    w.labels.reserve(data.size());
    for (const PairInstance& inst : data) {
        w.encodings.push_back(encode(partition(inst), vocab, tables, ecfg));
        w.labels.push_back(inst.label);
    }
    return w;
}

/// One instance's contribution: loss value plus gradients accumulated into
/// `acc` (scaled later by the batch mean).
double instance_pass(const ModelParams& params, const PartitionedEncoding& enc,
                     const ModelConfig& cfg, GradVec& acc) {
    Tape tape;
    ModelParams bound = watch_params(tape, params);
    ForwardResult fwd = model_forward(tape, bound, enc, cfg);
    Tensor loss = model_nll(tape, fwd.probs, enc.label);
    tape.backward(loss);
    auto named = named_params(bound);
    for (std::size_t k = 0; k < named.size(); ++k) {
        const std::vector<double>& g = tape.grad(*named[k].second);
        std::vector<double>& a = acc[k];
        for (std::size_t i = 0; i < g.size(); ++i) a[i] += g[i];
    }
    return loss.item();
}

GradVec zero_grads(const std::vector<std::pair<std::string, Tensor*>>& named) {
    GradVec g(named.size());
    for (std::size_t k = 0; k < named.size(); ++k) {
        g[k].assign(named[k].second->size(), 0.0);
    }
    return g;
}

class Optimizer {
public:
    Optimizer(const ModelConfig& cfg, std::size_t n_params)
        : cfg_(cfg), m_(n_params), v_(n_params) {}

    void step(std::vector<std::pair<std::string, Tensor*>>& named, GradVec& grads) {
        // PAD rows never move.
        zero_pad_rows(named, grads);
        if (cfg_.grad_clip > 0.0) clip_global_norm(grads, cfg_.grad_clip);
        ++t_;
        for (std::size_t k = 0; k < named.size(); ++k) {
            if (cfg_.freeze_embeddings && named[k].first.rfind("embed.", 0) == 0) continue;
            Tensor& p = *named[k].second;
            std::vector<double>& g = grads[k];
            if (cfg_.optimizer == "sgd") {
                for (std::size_t i = 0; i < g.size(); ++i) {
                    p.data()[i] -= cfg_.learning_rate * g[i];
                }
                continue;
            }
            auto& m = m_[k];
            auto& v = v_[k];
            if (m.empty()) {
                m.assign(g.size(), 0.0);
                v.assign(g.size(), 0.0);
            }
            const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
            const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
            const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
            for (std::size_t i = 0; i < g.size(); ++i) {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                const double mh = m[i] / c1;
                const double vh = v[i] / c2;
                p.data()[i] -= cfg_.learning_rate * mh / (std::sqrt(vh) + eps);
            }
        }
    }

private:
    static void zero_pad_rows(const std::vector<std::pair<std::string, Tensor*>>& named,
                              GradVec& grads) {
        for (std::size_t k = 0; k < named.size(); ++k) {
            const std::string& name = named[k].first;
            if (name == "embed.word" || name == "embed.pos" || name == "embed.dist") {
                const std::size_t cols = named[k].second->cols();
                for (std::size_t j = 0; j < cols; ++j) grads[k][j] = 0.0;
            }
        }
    }

    static void clip_global_norm(GradVec& grads, double max_norm) {
        double sq = 0.0;
        for (const auto& g : grads) {
            for (double x : g) sq += x * x;
        }
        const double norm = std::sqrt(sq);
        if (norm <= max_norm || norm == 0.0) return;
        const double s = max_norm / norm;
        for (auto& g : grads) {
            for (double& x : g) x *= s;
        }
    }

    ModelConfig cfg_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

double evaluate_loss(const ModelParams& params, const Workset& set,
                     const std::vector<std::size_t>& idx, const ModelConfig& cfg) {
    double total = 0.0;
    for (std::size_t i : idx) {
        Tape tape;
        ForwardResult fwd = model_forward(tape, params, set.encodings[i], cfg);
        total += model_nll(tape, fwd.probs, set.labels[i]).item();
    }
    return idx.empty() ? 0.0 : total / static_cast<double>(idx.size());
}

std::vector<Label> predict_indices(const ModelParams& params, const Workset& set,
                                   const std::vector<std::size_t>& idx,
                                   const ModelConfig& cfg, std::size_t threads) {
    std::vector<Label> out(idx.size(), Label::Other);
    auto run_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t k = lo; k < hi; ++k) {
            Tape tape;
            ForwardResult fwd = model_forward(tape, params, set.encodings[idx[k]], cfg);
            out[k] = predict_label(fwd.probs);
        }
    };
    if (threads <= 1 || idx.size() < 2 * threads) {
        run_range(0, idx.size());
        return out;
    }
    std::vector<std::thread> pool;
    const std::size_t chunk = (idx.size() + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t lo = t * chunk;
        const std::size_t hi = std::min(idx.size(), lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back(run_range, lo, hi);
    }
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace

std::size_t env_thread_cap() {
    const char* env = std::getenv("AWBLSTM_THREADS");
    if (!env) return 1;
    const long v = std::strtol(env, nullptr, 10);
    return v < 1 ? 1 : static_cast<std::size_t>(v);
}

TrainResult train_model(ModelParams& params, const Vocabulary& vocab,
                        const std::vector<PairInstance>& data, const ModelConfig& cfg,
                        const TrainOptions& options) {
    cfg.validate();
    if (data.empty()) throw ContractError("train: empty training set");

    Workset set = encode_all(data, vocab, params.tables, cfg.embedding());

    // Validation split off a seeded shuffle, then optional down-sampling of
    // the Other class in the remaining training portion.
    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng split_rng = Rng::substream(cfg.seed, "split");
    split_rng.shuffle(order);
    const std::size_t n_val =
        static_cast<std::size_t>(cfg.validation_split * static_cast<double>(data.size()));
    std::vector<std::size_t> val_idx(order.begin(), order.begin() + n_val);
    std::vector<std::size_t> train_idx(order.begin() + n_val, order.end());
    if (train_idx.empty()) throw ContractError("train: validation split leaves no data");

    if (cfg.neg_downsample > 0.0) {
        std::size_t positives = 0;
        for (std::size_t i : train_idx) {
            if (set.labels[i] != Label::Other) positives++;
        }
        const std::size_t cap =
            static_cast<std::size_t>(cfg.neg_downsample * static_cast<double>(positives));
        std::vector<std::size_t> kept, negatives;
        for (std::size_t i : train_idx) {
            (set.labels[i] == Label::Other ? negatives : kept).push_back(i);
        }
        Rng down_rng = Rng::substream(cfg.seed, "downsample");
        down_rng.shuffle(negatives);
        if (negatives.size() > cap) negatives.resize(cap);
        kept.insert(kept.end(), negatives.begin(), negatives.end());
        train_idx = std::move(kept);
    }

    auto named = named_params(params);
    Optimizer optimizer(cfg, named.size());
    Rng shuffle_rng = Rng::substream(cfg.seed, "shuffle");
    const std::size_t threads = std::max<std::size_t>(1, options.threads);

    TrainResult result;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        shuffle_rng.shuffle(train_idx);

        double epoch_loss = 0.0;
        std::size_t seen = 0;
        const std::size_t n_batches =
            (train_idx.size() + cfg.batch_size - 1) / cfg.batch_size;
        for (std::size_t b = 0; b < n_batches; ++b) {
            const std::size_t lo = b * cfg.batch_size;
            const std::size_t hi = std::min(train_idx.size(), lo + cfg.batch_size);
            GradVec acc = zero_grads(named);
            double batch_loss = 0.0;

            if (threads <= 1 || hi - lo < 2 * threads) {
                for (std::size_t k = lo; k < hi; ++k) {
                    batch_loss +=
                        instance_pass(params, set.encodings[train_idx[k]], cfg, acc);
                }
            } else {
                // Contiguous chunks per thread; thread-local accumulators are
                // reduced in thread order so the sum order is fixed.
                const std::size_t count = hi - lo;
                const std::size_t chunk = (count + threads - 1) / threads;
                std::vector<GradVec> locals;
                std::vector<double> local_loss(threads, 0.0);
                locals.reserve(threads);
                for (std::size_t t = 0; t < threads; ++t) locals.push_back(zero_grads(named));
                std::vector<std::thread> pool;
                for (std::size_t t = 0; t < threads; ++t) {
                    const std::size_t clo = lo + t * chunk;
                    const std::size_t chi = std::min(hi, clo + chunk);
                    if (clo >= chi) break;
                    pool.emplace_back([&, t, clo, chi]() {
                        for (std::size_t k = clo; k < chi; ++k) {
                            local_loss[t] += instance_pass(
                                params, set.encodings[train_idx[k]], cfg, locals[t]);
                        }
                    });
                }
                for (auto& th : pool) th.join();
                for (std::size_t t = 0; t < locals.size(); ++t) {
                    batch_loss += local_loss[t];
                    for (std::size_t k = 0; k < acc.size(); ++k) {
                        for (std::size_t i = 0; i < acc[k].size(); ++i) {
                            acc[k][i] += locals[t][k][i];
                        }
                    }
                }
            }

            if (!std::isfinite(batch_loss)) {
                throw DivergenceError("non-finite loss in epoch " + std::to_string(epoch) +
                                      ", batch " + std::to_string(b));
            }
            const double inv = 1.0 / static_cast<double>(hi - lo);
            for (auto& g : acc) {
                for (double& x : g) x *= inv;
            }
            optimizer.step(named, acc);
            epoch_loss += batch_loss;
            seen += hi - lo;
        }

        EpochLog entry;
        entry.epoch = epoch;
        entry.train_loss = seen == 0 ? 0.0 : epoch_loss / static_cast<double>(seen);
        if (!val_idx.empty()) {
            entry.val_loss = evaluate_loss(params, set, val_idx, cfg);
            std::vector<Label> gold;
            gold.reserve(val_idx.size());
            for (std::size_t i : val_idx) gold.push_back(set.labels[i]);
            std::vector<Label> pred = predict_indices(params, set, val_idx, cfg, threads);
            EvalReport report = score(gold, pred);
            entry.val_macro_f1_4class = report.macro4.f1;
            entry.val_macro_f1_5class = report.macro5.f1;
        } else {
            entry.val_loss = std::nan("");
            entry.val_macro_f1_4class = std::nan("");
            entry.val_macro_f1_5class = std::nan("");
        }
        entry.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        result.log.push_back(entry);
        result.epochs_run = epoch + 1;

        if (options.progress) {
            char line[160];
            std::snprintf(line, sizeof(line),
                          "epoch %3zu  train_loss %.6f  val_loss %.6f  val_macro5_f1 %.4f"
                          "  (%.1fs)\n",
                          epoch, entry.train_loss, entry.val_loss,
                          entry.val_macro_f1_5class, entry.wall_seconds);
            *options.progress << line << std::flush;
        }
        if (cfg.early_stop_f1 > 0.0 && !val_idx.empty() &&
            entry.val_macro_f1_5class >= cfg.early_stop_f1) {
            result.early_stopped = true;
            break;
        }
    }
    return result;
}

void write_training_log(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot open '" + path + "' for writing");
    out << "epoch,train_loss,val_loss,val_macro_f1_4class,val_macro_f1_5class,"
           "wall_seconds\n";
    char buf[224];
    for (const EpochLog& e : log) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%.3f\n", e.epoch,
                      e.train_loss, e.val_loss, e.val_macro_f1_4class,
                      e.val_macro_f1_5class, e.wall_seconds);
        out << buf;
    }
}

std::vector<Label> predict_all(const ModelParams& params, const Vocabulary& vocab,
                               const std::vector<PairInstance>& data,
                               const ModelConfig& cfg, std::size_t threads) {
    Workset set = encode_all(data, vocab, params.tables, cfg.embedding());
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return predict_indices(params, set, idx, cfg, std::max<std::size_t>(1, threads));
}

double mean_nll(const ModelParams& params, const Vocabulary& vocab,
                const std::vector<PairInstance>& data, const ModelConfig& cfg) {
    Workset set = encode_all(data, vocab, params.tables, cfg.embedding());
    std::vector<std::size_t> idx(data.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    return evaluate_loss(params, set, idx, cfg);
}

}  // namespace awblstm
