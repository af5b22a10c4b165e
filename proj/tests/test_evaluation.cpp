#include "awblstm/evaluation.hpp"

#include <doctest.h>

#include <cmath>

#include <json.hpp>

#include "awblstm/errors.hpp"
#include "awblstm/rng.hpp"

using namespace awblstm;

TEST_CASE("perfect predictions score 1.0 everywhere") {
    std::vector<Label> gold{Label::Advice, Label::Effect, Label::Mechanism, Label::Int,
                            Label::Other};
    EvalReport r = score(gold, gold);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        CHECK(r.per_class[c].precision == 1.0);
        CHECK(r.per_class[c].recall == 1.0);
        CHECK(r.per_class[c].f1 == 1.0);
    }
    CHECK(r.macro4.f1 == 1.0);
    CHECK(r.macro5.f1 == 1.0);
    CHECK(r.confusion.accuracy() == 1.0);
}

TEST_CASE("published per-class table reconciles with the overall row under 5-class averaging") {
    // Per-class F1 (0.774, 0.78, 0.819, 0.584, 0.968) -> macro5 F1 0.785;
    // per-class recall (0.819, 0.745, 0.873, 0.469, 0.967) -> macro5 recall
    // 0.7746, matching the overall "0.77, 0.785" row within rounding.
    std::vector<ClassMetrics> table{
        {0.734, 0.819, 0.774},  // Effect
        {0.818, 0.745, 0.78},   // Mechanism
        {0.772, 0.873, 0.819},  // Advice
        {0.776, 0.469, 0.584},  // Int
        {0.968, 0.967, 0.968},  // Other
    };
    ClassMetrics macro5 = macro_average(table);
    CHECK(std::abs(macro5.f1 - 0.785) <= 0.0005);
    CHECK(std::abs(macro5.recall - 0.7746) <= 0.001);
}

TEST_CASE("hand-built 20-instance confusion matrix matches manual counting") {
    using enum Label;
    std::vector<Label> gold{Advice, Advice, Effect, Effect,   Effect,    Mechanism, Int,
                            Other,  Other,  Other,  Advice,   Effect,    Mechanism, Mechanism,
                            Int,    Other,  Other,  Advice,   Effect,    Other};
    std::vector<Label> pred{Advice, Effect, Effect, Effect,   Other,     Mechanism, Other,
                            Other,  Other,  Advice, Advice,   Effect,    Mechanism, Int,
                            Int,    Other,  Other,  Advice,   Mechanism, Other};
    EvalReport r = score(gold, pred);
    // Manual counts: Advice tp=3 fp=1 fn=1; Effect tp=3 fp=1 fn=2;
    // Mechanism tp=2 fp=1 fn=1; Int tp=1 fp=1 fn=1; Other tp=5 fp=2 fn=1.
    CHECK(r.per_class[0].precision == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.per_class[0].recall == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.per_class[1].precision == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.per_class[1].recall == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(r.per_class[2].precision == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.per_class[2].recall == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(r.per_class[3].precision == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.per_class[3].recall == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.per_class[4].precision == doctest::Approx(5.0 / 7.0).epsilon(1e-12));
    CHECK(r.per_class[4].recall == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
    CHECK(r.confusion.total() == 20);
    CHECK(r.confusion.trace() == 14);
}

TEST_CASE("zero-denominator classes score zero instead of NaN") {
    std::vector<Label> gold{Label::Advice, Label::Advice};
    std::vector<Label> pred{Label::Effect, Label::Effect};
    EvalReport r = score(gold, pred);
    CHECK(r.per_class[0].precision == 0.0);  // Advice never predicted
    CHECK(r.per_class[0].recall == 0.0);
    CHECK(r.per_class[1].precision == 0.0);  // Effect never gold
    CHECK(r.per_class[2].precision == 0.0);  // Mechanism absent entirely
    CHECK(std::isfinite(r.macro4.f1));
    CHECK(std::isfinite(r.macro5.f1));
}

TEST_CASE("micro consistency: trace/total equals accuracy") {
    Rng rng(17);
    std::vector<Label> gold, pred;
    for (int i = 0; i < 500; ++i) {
        gold.push_back(static_cast<Label>(rng.uniform_index(kNumClasses)));
        pred.push_back(static_cast<Label>(rng.uniform_index(kNumClasses)));
    }
    EvalReport r = score(gold, pred);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) agree += gold[i] == pred[i];
    CHECK(r.confusion.trace() == agree);
    CHECK(r.confusion.accuracy() ==
          doctest::Approx(static_cast<double>(agree) / 500.0).epsilon(1e-15));
}

TEST_CASE("permutation invariance of the report") {
    Rng rng(18);
    std::vector<Label> gold, pred;
    for (int i = 0; i < 100; ++i) {
        gold.push_back(static_cast<Label>(rng.uniform_index(kNumClasses)));
        pred.push_back(static_cast<Label>(rng.uniform_index(kNumClasses)));
    }
    EvalReport a = score(gold, pred);
    std::vector<std::size_t> idx(gold.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<Label> gold2, pred2;
    for (std::size_t i : idx) {
        gold2.push_back(gold[i]);
        pred2.push_back(pred[i]);
    }
    EvalReport b = score(gold2, pred2);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        CHECK(a.per_class[c].f1 == b.per_class[c].f1);
    }
    CHECK(a.macro5.f1 == b.macro5.f1);
}

TEST_CASE("macro5 degenerates to macro4 when Other matches the macro4 metrics") {
    std::vector<ClassMetrics> four{{0.5, 0.6, f1_score(0.5, 0.6)},
                                   {0.7, 0.8, f1_score(0.7, 0.8)},
                                   {0.9, 0.4, f1_score(0.9, 0.4)},
                                   {0.6, 0.6, f1_score(0.6, 0.6)}};
    ClassMetrics macro4 = macro_average(four);
    std::vector<ClassMetrics> five = four;
    five.push_back(macro4);
    ClassMetrics macro5 = macro_average(five);
    CHECK(macro5.precision == doctest::Approx(macro4.precision).epsilon(1e-15));
    CHECK(macro5.recall == doctest::Approx(macro4.recall).epsilon(1e-15));
    CHECK(macro5.f1 == doctest::Approx(macro4.f1).epsilon(1e-15));
}

TEST_CASE("errors: length mismatch and empty input") {
    std::vector<Label> one{Label::Advice};
    std::vector<Label> two{Label::Advice, Label::Effect};
    CHECK_THROWS_AS(score(one, two), ContractError);
    CHECK_THROWS_AS(score({}, {}), ContractError);
}

TEST_CASE("report rendering: JSON round-trips, table and CSV have fixed layout") {
    std::vector<Label> gold{Label::Advice, Label::Effect, Label::Other, Label::Other};
    std::vector<Label> pred{Label::Advice, Label::Other, Label::Other, Label::Int};
    EvalReport r = score(gold, pred);

    const std::string json_text = render_report(r, ReportFormat::Json);
    auto parsed = nlohmann::json::parse(json_text);
    CHECK(parsed["per_class"]["Advice"]["precision"].get<double>() ==
          r.per_class[0].precision);
    CHECK(parsed["macro5"]["f1"].get<double>() == r.macro5.f1);
    CHECK(parsed["total"].get<std::size_t>() == 4);

    const std::string table = render_report(r, ReportFormat::Table);
    std::size_t pos = 0;
    for (const char* name : {"Advice", "Effect", "Mechanism", "Int", "Other", "macro4",
                             "macro5"}) {
        std::size_t at = table.find(name, pos);
        CHECK(at != std::string::npos);
        pos = at;
    }

    const std::string csv = render_report(r, ReportFormat::Csv);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    CHECK(rows == 7);

    CHECK(render_report(r, ReportFormat::Csv) == csv);  // deterministic bytes
}
