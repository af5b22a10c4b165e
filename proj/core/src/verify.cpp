#include "awblstm/verify.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "awblstm/attention.hpp"
#include "awblstm/evaluation.hpp"
#include "awblstm/gradcheck.hpp"
#include "awblstm/pos_tagger.hpp"
#include "awblstm/recurrent.hpp"
#include "awblstm/rng.hpp"
#include "awblstm/synthetic.hpp"

namespace awblstm {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0,
                     double hi = 1.0) {
    Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

PairInstance make_instance(const std::vector<std::string>& surfaces, std::size_t e1,
                           std::size_t e2, Label label, const std::string& id) {
    PairInstance inst;
    inst.sentence_id = id;
    inst.e1_span = TokenSpan{e1, e1};
    inst.e2_span = TokenSpan{e2, e2};
    inst.label = label;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        inst.tokens.push_back(Token{surfaces[i], heuristic_pos_tag(surfaces[i]),
                                    token_distance(i, inst.e1_span),
                                    token_distance(i, inst.e2_span)});
    }
    return inst;
}

}  // namespace

ModelConfig toy_config(std::uint64_t seed) {
    ModelConfig cfg;
    cfg.we_dim = 4;
    cfg.pos_dim = 2;
    cfg.dist_dim = 2;
    cfg.h1 = 3;
    cfg.h2 = 3;
    cfg.attention_dim = 0;
    cfg.max_part_len = 4;
    cfg.dist_clip = 4;
    cfg.seed = seed;
    return cfg;
}

std::vector<PairInstance> toy_instances() {
    return {
        make_instance({"the", "dose", "drugA", "boosts", "uptake", "drugB", "during",
                       "trial"},
                      2, 5, Label::Effect, "toy.s0"),
        make_instance({"daily", "study", "drugB", "slows", "the", "drugA", "with", "beta",
                       "level", "of"},
                      2, 5, Label::Mechanism, "toy.s1"),
        make_instance({"drugA", "alpha", "gamma", "drugB", "delta"}, 0, 3, Label::Other,
                      "toy.s2"),
    };
}

GradCheckSummary model_gradient_check(std::uint64_t seed) {
    const ModelConfig cfg = toy_config(seed);
    const std::vector<PairInstance> instances = toy_instances();
    const Vocabulary vocab = Vocabulary::build(instances);
    ModelParams params = ModelParams::init(cfg, vocab);

    std::vector<PartitionedEncoding> encodings;
    for (const PairInstance& inst : instances) {
        encodings.push_back(encode(partition(inst), vocab, params.tables, cfg.embedding()));
    }

    auto total_loss = [&](const ModelParams& p) {
        Tape tape;
        double total = 0.0;
        for (const PartitionedEncoding& enc : encodings) {
            ForwardResult fwd = model_forward(tape, p, enc, cfg);
            total += model_nll(tape, fwd.probs, enc.label).item();
        }
        return total;
    };

    // One taped pass for the analytic gradients.
    Tape tape;
    ModelParams bound = watch_params(tape, params);
    std::vector<Tensor> losses;
    for (const PartitionedEncoding& enc : encodings) {
        ForwardResult fwd = model_forward(tape, bound, enc, cfg);
        losses.push_back(model_nll(tape, fwd.probs, enc.label));
    }
    Tensor loss = losses[0];
    for (std::size_t i = 1; i < losses.size(); ++i) loss = tape.add(loss, losses[i]);
    tape.backward(loss);

    GradCheckSummary summary;
    auto bound_named = named_params(bound);
    auto orig_named = named_params(params);
    for (std::size_t k = 0; k < orig_named.size(); ++k) {
        const std::vector<double>& analytic = tape.grad(*bound_named[k].second);
        auto f = [&](const std::vector<double>& flat) {
            ModelParams probe = params;
            auto probe_named = named_params(probe);
            *probe_named[k].second = Tensor(orig_named[k].second->shape(), flat);
            return total_loss(probe);
        };
        std::vector<double> fd =
            finite_difference(f, orig_named[k].second->values(), 1e-5);
        const double err = max_rel_error(analytic, fd, 1e-5);
        if (err > summary.max_rel_err) {
            summary.max_rel_err = err;
            summary.worst_param = orig_named[k].first;
        }
        summary.params_checked += analytic.size();
    }
    return summary;
}

// ---------------------------------------------------------------------------
// Suites

namespace {

void check(std::vector<CheckResult>& out, const std::string& name, bool pass,
           const std::string& detail = "") {
    out.push_back(CheckResult{name, pass, pass ? "" : detail});
}

using OpFn = std::function<Tensor(Tape&, const std::vector<Tensor>&)>;

double op_grad_err(const OpFn& op, std::vector<Tensor> inputs, Rng& rng) {
    Tape probe;
    Tensor probe_out = op(probe, inputs);
    Tensor w = random_tensor(probe_out.shape(), rng);

    double worst = 0.0;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        Tape tape;
        std::vector<Tensor> tracked = inputs;
        tracked[k] = tape.watch(inputs[k]);
        tape.backward(tape.sum(tape.mul(op(tape, tracked), w)));
        const std::vector<double>& ad = tape.grad(tracked[k]);

        auto f = [&](const std::vector<double>& flat) {
            Tape t;
            std::vector<Tensor> ins = inputs;
            ins[k] = Tensor(inputs[k].shape(), flat);
            Tensor out = op(t, ins);
            double acc = 0.0;
            for (std::size_t i = 0; i < out.size(); ++i) acc += out.data()[i] * w.data()[i];
            return acc;
        };
        worst = std::max(worst,
                         max_rel_error(ad, finite_difference(f, inputs[k].values(), 1e-5),
                                       1e-6));
    }
    return worst;
}

}  // namespace

std::vector<CheckResult> run_gradcheck_suite() {
    std::vector<CheckResult> out;
    Rng rng(20240);

    struct Case {
        const char* name;
        OpFn op;
        std::vector<Tensor> inputs;
    };
    std::vector<bool> mask{true, false, true, true};
    std::vector<Case> cases;
    cases.push_back({"matmul",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.matmul(in[0], in[1]);
                     },
                     {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}});
    cases.push_back({"matvec",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.matvec(in[0], in[1]);
                     },
                     {random_tensor({4, 5}, rng), random_tensor({5}, rng)}});
    cases.push_back({"vecmat",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.vecmat(in[0], in[1]);
                     },
                     {random_tensor({4}, rng), random_tensor({4, 3}, rng)}});
    cases.push_back({"sigmoid",
                     [](Tape& t, const std::vector<Tensor>& in) { return t.sigmoid(in[0]); },
                     {random_tensor({6}, rng, -4.0, 4.0)}});
    cases.push_back({"tanh",
                     [](Tape& t, const std::vector<Tensor>& in) { return t.tanh(in[0]); },
                     {random_tensor({6}, rng, -4.0, 4.0)}});
    cases.push_back({"mul",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.mul(in[0], in[1]);
                     },
                     {random_tensor({5}, rng), random_tensor({5}, rng)}});
    cases.push_back({"add_bias",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.add(in[0], in[1]);
                     },
                     {random_tensor({3, 4}, rng), random_tensor({4}, rng)}});
    cases.push_back({"softmax_masked",
                     [mask](Tape& t, const std::vector<Tensor>& in) {
                         return t.softmax(in[0], &mask);
                     },
                     {random_tensor({4}, rng, -3.0, 3.0)}});
    cases.push_back({"row_scale",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.row_scale(in[0], in[1]);
                     },
                     {random_tensor({3, 4}, rng), random_tensor({3}, rng)}});
    cases.push_back({"gather_rows",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.gather_rows(in[0], {2, 0, 1, 2});
                     },
                     {random_tensor({3, 3}, rng)}});
    cases.push_back({"mean_rows",
                     [](Tape& t, const std::vector<Tensor>& in) {
                         return t.mean_rows(in[0]);
                     },
                     {random_tensor({4, 3}, rng)}});
    for (Case& c : cases) {
        const double err = op_grad_err(c.op, c.inputs, rng);
        check(out, std::string("gradcheck.primitive.") + c.name, err < 1e-6,
              "max relative error " + std::to_string(err) + " >= 1e-6");
    }

    const GradCheckSummary full = model_gradient_check(7);
    std::ostringstream detail;
    detail << "max relative error " << full.max_rel_err << " at " << full.worst_param
           << " (threshold 1e-4, " << full.params_checked << " parameters)";
    check(out, "gradcheck.full_model_toy", full.max_rel_err < 1e-4, detail.str());
    return out;
}

std::vector<CheckResult> run_oracle_suite() {
    std::vector<CheckResult> out;
    Rng rng(5150);

    // Scalar LSTM cell against plain arithmetic.
    {
        bool ok = true;
        double worst = 0.0;
        for (int iter = 0; iter < 100 && ok; ++iter) {
            double wf_h = rng.uniform(-2, 2), wf_x = rng.uniform(-2, 2),
                   bf = rng.uniform(-2, 2);
            double wi_h = rng.uniform(-2, 2), wi_x = rng.uniform(-2, 2),
                   bi = rng.uniform(-2, 2);
            double wg_h = rng.uniform(-2, 2), wg_x = rng.uniform(-2, 2),
                   bg = rng.uniform(-2, 2);
            double wo_h = rng.uniform(-2, 2), wo_x = rng.uniform(-2, 2),
                   bo = rng.uniform(-2, 2);
            double h0 = rng.uniform(-1, 1), c0 = rng.uniform(-2, 2), x = rng.uniform(-2, 2);

            auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
            const double f = sig(wf_h * h0 + wf_x * x + bf);
            const double i = sig(wi_h * h0 + wi_x * x + bi);
            const double g = std::tanh(wg_h * h0 + wg_x * x + bg);
            const double c = f * c0 + i * g;
            const double o = sig(wo_h * h0 + wo_x * x + bo);
            const double h = o * std::tanh(c);

            LSTMCellParams p;
            p.w_f = Tensor({1, 2}, {wf_h, wf_x});
            p.w_i = Tensor({1, 2}, {wi_h, wi_x});
            p.w_g = Tensor({1, 2}, {wg_h, wg_x});
            p.w_o = Tensor({1, 2}, {wo_h, wo_x});
            p.b_f = Tensor({1}, {bf});
            p.b_i = Tensor({1}, {bi});
            p.b_g = Tensor({1}, {bg});
            p.b_o = Tensor({1}, {bo});
            Tape tape;
            LSTMState next = lstm_step(tape, p, {Tensor({1}, {h0}), Tensor({1}, {c0})},
                                       Tensor({1}, {x}));
            worst = std::max({worst, std::abs(next.h(0) - h), std::abs(next.c(0) - c)});
            ok = worst < 1e-12;
        }
        check(out, "oracle.scalar_lstm", ok,
              "deviation " + std::to_string(worst) + " >= 1e-12");
    }

    // Bidirectional reversal duality, bitwise.
    {
        LSTMCellParams fwd = LSTMCellParams::init(3, 2, rng);
        LSTMCellParams bwd = LSTMCellParams::init(3, 2, rng);
        Tensor xs = random_tensor({5, 2}, rng);
        Tape tape;
        Tensor h = blstm_forward(tape, fwd, bwd, xs);
        bool ok = true;
        LSTMState state = LSTMState::zero(3);
        std::vector<std::vector<double>> expect(5);
        for (std::size_t k = 0; k < 5; ++k) {
            const std::size_t t = 4 - k;
            state = lstm_step(tape, bwd, state, tape.row_of(xs, t));
            expect[t] = state.h.values();
        }
        for (std::size_t t = 0; t < 5; ++t) {
            for (std::size_t j = 0; j < 3; ++j) ok = ok && h(t, 3 + j) == expect[t][j];
        }
        check(out, "oracle.blstm_reversal_bitwise", ok,
              "backward direction differs from reversed forward unroll");
    }

    // Metrics against a hand-counted confusion matrix.
    {
        using enum Label;
        std::vector<Label> gold{Advice, Advice, Effect, Effect, Effect, Mechanism, Int,
                                Other, Other, Other, Advice, Effect, Mechanism, Mechanism,
                                Int, Other, Other, Advice, Effect, Other};
        std::vector<Label> pred{Advice, Effect, Effect, Effect, Other, Mechanism, Other,
                                Other, Other, Advice, Advice, Effect, Mechanism, Int,
                                Int, Other, Other, Advice, Mechanism, Other};
        EvalReport r = score(gold, pred);
        // Hand counts: Advice tp=3 fp=1 fn=1; Effect tp=3 fp=1 fn=2;
        // Mechanism tp=2 fp=1 fn=1; Int tp=1 fp=1 fn=1; Other tp=5 fp=2 fn=1.
        auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
        bool ok = near(r.per_class[0].precision, 3.0 / 4.0) &&
                  near(r.per_class[0].recall, 3.0 / 4.0) &&
                  near(r.per_class[1].precision, 3.0 / 4.0) &&
                  near(r.per_class[1].recall, 3.0 / 5.0) &&
                  near(r.per_class[2].precision, 2.0 / 3.0) &&
                  near(r.per_class[2].recall, 2.0 / 3.0) &&
                  near(r.per_class[3].precision, 1.0 / 2.0) &&
                  near(r.per_class[3].recall, 1.0 / 2.0) &&
                  near(r.per_class[4].precision, 5.0 / 7.0) &&
                  near(r.per_class[4].recall, 5.0 / 6.0);
        check(out, "oracle.metrics_hand_count", ok,
              "per-class precision/recall disagree with manual tp/fp/fn counts");
    }

    // Top attention against an explicit weighted-sum loop.
    {
        Tensor h2 = random_tensor({5, 3}, rng);
        TopAttentionParams params = TopAttentionParams::init(4, 3, rng);
        std::vector<bool> keep(5, true);
        Tape tape;
        TopAttentionResult res = top_attention(tape, h2, params, keep);
        bool ok = true;
        for (std::size_t kcol = 0; kcol < 3; ++kcol) {
            double acc = 0.0, lo = 1e300, hi = -1e300;
            for (std::size_t t = 0; t < 5; ++t) {
                acc += res.beta(t) * h2(t, kcol);
                lo = std::min(lo, h2(t, kcol));
                hi = std::max(hi, h2(t, kcol));
            }
            ok = ok && std::abs(res.pooled(kcol) - acc) < 1e-12 &&
                 res.pooled(kcol) >= lo - 1e-12 && res.pooled(kcol) <= hi + 1e-12;
        }
        check(out, "oracle.top_attention_weighted_sum", ok,
              "pooled vector deviates from the explicit weighted sum or leaves the hull");
    }

    // Entity attention two-position closed form.
    {
        const double ln3 = std::log(3.0);
        Tensor word_vecs({2, 2}, {1, 0, 0, 1});
        Tensor full({2, 2}, {1, 2, 3, 4});
        std::vector<bool> keep{true, true};
        Tape tape;
        EntityAttentionResult res =
            entity_attention(tape, word_vecs, full, Tensor({2}, {ln3, 0}),
                             Tensor({2}, {0, ln3}), keep);
        bool ok = std::abs(res.weights.alpha1[0] - 0.75) < 1e-12 &&
                  std::abs(res.weights.alpha2[1] - 0.75) < 1e-12 &&
                  std::abs(res.weights.alpha_avg[0] - 0.5) < 1e-12;
        check(out, "oracle.entity_attention_closed_form", ok,
              "softmax of {ln 3, 0} did not give 0.75/0.25");
    }

    // Masked softmax against the two-element closed form.
    {
        Tape tape;
        std::vector<bool> mask{true, false, true};
        Tensor y = tape.softmax(Tensor::row({1, 2, 3}), &mask);
        const double e1 = std::exp(-2.0), e3 = 1.0;
        bool ok = std::abs(y(0) - e1 / (e1 + e3)) < 1e-15 && y(1) == 0.0 &&
                  std::abs(y(2) - e3 / (e1 + e3)) < 1e-15;
        check(out, "oracle.masked_softmax_closed_form", ok,
              "masked softmax disagrees with direct two-element computation");
    }
    return out;
}

std::vector<CheckResult> run_properties_suite() {
    std::vector<CheckResult> out;
    Rng rng(6021);

    // Softmax produces probability vectors on 1000 random inputs.
    {
        bool ok = true;
        for (int iter = 0; iter < 1000 && ok; ++iter) {
            const std::size_t n = 1 + rng.uniform_index(10);
            Tape tape;
            Tensor y = tape.softmax(random_tensor({n}, rng, -50.0, 50.0));
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                ok = ok && y(i) >= 0.0;
                sum += y(i);
            }
            ok = ok && std::abs(sum - 1.0) <= 1e-9;
        }
        check(out, "property.softmax_probability_vector", ok,
              "softmax output is not a probability vector");
    }

    // Shift invariance, bitwise on exactly-representable shifts.
    {
        bool ok = true;
        for (int iter = 0; iter < 1000 && ok; ++iter) {
            const std::size_t n = 2 + rng.uniform_index(6);
            std::vector<double> base(n), shifted(n);
            const double c = static_cast<double>(rng.uniform_index(2001)) - 1000.0;
            for (std::size_t i = 0; i < n; ++i) {
                base[i] = static_cast<double>(rng.uniform_index(201)) - 100.0;
                shifted[i] = base[i] + c;
            }
            Tape tape;
            Tensor y0 = tape.softmax(Tensor::row(base));
            Tensor y1 = tape.softmax(Tensor::row(shifted));
            ok = ok && std::memcmp(y0.data(), y1.data(), n * sizeof(double)) == 0;
        }
        check(out, "property.softmax_shift_invariance_bitwise", ok,
              "stabilized softmax changed under a constant shift");
    }

    // Attention weights are normalized with PAD exactly zero, 1000 cases.
    {
        bool ok = true;
        for (int iter = 0; iter < 1000 && ok; ++iter) {
            const std::size_t n = 2 + rng.uniform_index(8);
            std::vector<bool> keep(n, false);
            std::size_t kept = 0;
            for (std::size_t j = 0; j < n; ++j) {
                keep[j] = rng.uniform() < 0.75;
                kept += keep[j];
            }
            if (kept == 0) keep[rng.uniform_index(n)] = true;
            Tape tape;
            EntityAttentionResult ea = entity_attention(
                tape, random_tensor({n, 3}, rng), random_tensor({n, 4}, rng),
                random_tensor({3}, rng), random_tensor({3}, rng), keep);
            TopAttentionParams tp = TopAttentionParams::init(3, 4, rng);
            Tensor h2 = random_tensor({n, 4}, rng);
            TopAttentionResult ta = top_attention(tape, h2, tp, keep);
            double s1 = 0.0, s2 = 0.0, sb = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                s1 += ea.weights.alpha1[j];
                s2 += ea.weights.alpha2[j];
                sb += ta.beta(j);
                ok = ok && ea.weights.alpha1[j] >= 0.0 && ta.beta(j) >= 0.0;
                if (!keep[j]) {
                    ok = ok && ea.weights.alpha1[j] == 0.0 && ea.weights.alpha2[j] == 0.0 &&
                         ta.beta(j) == 0.0;
                }
            }
            ok = ok && std::abs(s1 - 1.0) <= 1e-9 && std::abs(s2 - 1.0) <= 1e-9 &&
                 std::abs(sb - 1.0) <= 1e-9;
            // Convex combination of the kept rows: componentwise hull bound.
            for (std::size_t col = 0; ok && col < 4; ++col) {
                double lo = 1e300, hi = -1e300;
                for (std::size_t j = 0; j < n; ++j) {
                    if (!keep[j]) continue;
                    lo = std::min(lo, h2(j, col));
                    hi = std::max(hi, h2(j, col));
                }
                ok = ta.pooled(col) >= lo - 1e-12 && ta.pooled(col) <= hi + 1e-12;
            }
        }
        check(out, "property.attention_normalization", ok,
              "attention weights are not normalized probability vectors with PAD = 0");
    }

    // Partition reconstruction and distance consistency on 500 instances.
    {
        SynthConfig cfg;
        cfg.train_size = 500;
        cfg.test_size = 1;
        SynthCorpus corpus = generate_synthetic_corpus(cfg, 11);
        bool ok = true;
        for (const PairInstance& inst : corpus.train) {
            PartitionedInstance parts = partition(inst);
            std::vector<std::string> reassembled;
            for (const auto* part : {&parts.before, &parts.between, &parts.after}) {
                for (const Token& t : *part) {
                    if (!t.is_pad()) reassembled.push_back(t.surface);
                }
            }
            ok = ok && reassembled.size() == inst.tokens.size();
            for (std::size_t i = 0; ok && i < inst.tokens.size(); ++i) {
                ok = inst.tokens[i].surface == reassembled[i];
            }
            for (std::size_t i = 0; ok && i < inst.tokens.size(); ++i) {
                ok = (inst.tokens[i].dist_e1 == 0) == inst.e1_span.contains(i) &&
                     (inst.tokens[i].dist_e2 == 0) == inst.e2_span.contains(i);
            }
        }
        check(out, "property.partition_reconstruction", ok,
              "parts do not concatenate back to the original token sequence");
    }

    // encode is pure: identical inputs give bitwise-identical outputs.
    {
        const ModelConfig cfg = toy_config(3);
        const std::vector<PairInstance> instances = toy_instances();
        const Vocabulary vocab = Vocabulary::build(instances);
        const ModelParams params = ModelParams::init(cfg, vocab);
        PartitionedEncoding a =
            encode(partition(instances[0]), vocab, params.tables, cfg.embedding());
        PartitionedEncoding b =
            encode(partition(instances[0]), vocab, params.tables, cfg.embedding());
        bool ok = a.before.word_ids == b.before.word_ids &&
                  a.between.word_ids == b.between.word_ids &&
                  a.after.d2_ids == b.after.d2_ids &&
                  std::memcmp(a.e1_repr.data(), b.e1_repr.data(),
                              a.e1_repr.size() * sizeof(double)) == 0;
        check(out, "property.encode_purity", ok, "encode is not deterministic");
    }
    return out;
}

}  // namespace awblstm
