#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "awblstm/corpus.hpp"
#include "awblstm/evaluation.hpp"
#include "awblstm/model.hpp"

namespace awblstm {

struct EpochLog {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_macro_f1_4class = 0.0;
    double val_macro_f1_5class = 0.0;
    double wall_seconds = 0.0;
};

struct TrainOptions {
    /// Instances processed concurrently inside a batch; gradient reduction
    /// stays ordered, so a fixed thread count keeps runs bit-reproducible.
    std::size_t threads = 1;
    /// Per-epoch progress lines, or nullptr for silence.
    std::ostream* progress = nullptr;
};

struct TrainResult {
    std::vector<EpochLog> log;
    std::size_t epochs_run = 0;
    bool early_stopped = false;
};

/// Mini-batch training of the negative log-likelihood with the configured
/// optimizer. Shuffling, the train/validation split, and optional negative
/// down-sampling all draw from named sub-streams of cfg.seed. Raises
/// DivergenceError naming the first batch whose loss is not finite.
TrainResult train_model(ModelParams& params, const Vocabulary& vocab,
                        const std::vector<PairInstance>& data, const ModelConfig& cfg,
                        const TrainOptions& options = {});

/// CSV with header epoch,train_loss,val_loss,val_macro_f1_4class,
/// val_macro_f1_5class,wall_seconds and one row per epoch. Loss and metric
/// columns are written with full precision so identical runs produce
/// identical bytes.
void write_training_log(const std::vector<EpochLog>& log, const std::string& path);

/// Forward passes over a set; returns per-instance predictions in order.
std::vector<Label> predict_all(const ModelParams& params, const Vocabulary& vocab,
                               const std::vector<PairInstance>& data,
                               const ModelConfig& cfg, std::size_t threads = 1);

/// Mean negative log-likelihood over a set.
double mean_nll(const ModelParams& params, const Vocabulary& vocab,
                const std::vector<PairInstance>& data, const ModelConfig& cfg);

/// Parallelism cap from the AWBLSTM_THREADS environment variable (>= 1).
std::size_t env_thread_cap();

}  // namespace awblstm
