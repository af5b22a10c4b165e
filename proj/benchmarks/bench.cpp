#include <benchmark/benchmark.h>

#include "awblstm/model.hpp"
#include "awblstm/recurrent.hpp"
#include "awblstm/rng.hpp"
#include "awblstm/synthetic.hpp"
#include "awblstm/training.hpp"

namespace {

using namespace awblstm;

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-1.0, 1.0);
    return t;
}

void BM_Matvec(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    Tensor m = random_tensor({n, n}, rng);
    Tensor v = random_tensor({n}, rng);
    for (auto _ : state) {
        Tape tape;
        Tensor out = tape.matvec(m, v);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n * n));
}
BENCHMARK(BM_Matvec)->Arg(64)->Arg(128)->Arg(256);

void BM_LstmStep(benchmark::State& state) {
    const std::size_t h = static_cast<std::size_t>(state.range(0));
    Rng rng(2);
    LSTMCellParams cell = LSTMCellParams::init(h, h, rng);
    LSTMState s = LSTMState::zero(h);
    Tensor x = random_tensor({h}, rng);
    for (auto _ : state) {
        Tape tape;
        LSTMState next = lstm_step(tape, cell, s, x);
        benchmark::DoNotOptimize(next.h.data());
    }
}
BENCHMARK(BM_LstmStep)->Arg(50)->Arg(100)->Arg(200);

void BM_BlstmForward(benchmark::State& state) {
    const std::size_t steps = static_cast<std::size_t>(state.range(0));
    Rng rng(3);
    LSTMCellParams fwd = LSTMCellParams::init(100, 130, rng);
    LSTMCellParams bwd = LSTMCellParams::init(100, 130, rng);
    Tensor xs = random_tensor({steps, 130}, rng);
    for (auto _ : state) {
        Tape tape;
        Tensor h = blstm_forward(tape, fwd, bwd, xs);
        benchmark::DoNotOptimize(h.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(steps));
}
BENCHMARK(BM_BlstmForward)->Arg(8)->Arg(16)->Arg(32);

struct ModelFixture {
    ModelConfig cfg;
    Vocabulary vocab;
    ModelParams params;
    PartitionedEncoding enc;

    ModelFixture() {
        SynthConfig scfg;
        scfg.train_size = 50;
        scfg.test_size = 1;
        SynthCorpus corpus = generate_synthetic_corpus(scfg, 1);
        vocab = Vocabulary::build(corpus.train);
        params = ModelParams::init(cfg, vocab);
        enc = encode(partition(corpus.train[0]), vocab, params.tables, cfg.embedding());
    }
};

void BM_ModelForward(benchmark::State& state) {
    static const ModelFixture fx;
    for (auto _ : state) {
        Tape tape;
        ForwardResult fwd = model_forward(tape, fx.params, fx.enc, fx.cfg);
        benchmark::DoNotOptimize(fwd.probs.data());
    }
}
BENCHMARK(BM_ModelForward);

void BM_ModelForwardBackward(benchmark::State& state) {
    static const ModelFixture fx;
    for (auto _ : state) {
        Tape tape;
        ModelParams bound = watch_params(tape, fx.params);
        ForwardResult fwd = model_forward(tape, bound, fx.enc, fx.cfg);
        Tensor loss = model_nll(tape, fwd.probs, fx.enc.label);
        tape.backward(loss);
        benchmark::DoNotOptimize(tape.grad(bound.w_dense).data());
    }
}
BENCHMARK(BM_ModelForwardBackward);

}  // namespace

BENCHMARK_MAIN();
