#include "awblstm/evaluation.hpp"

#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "awblstm/errors.hpp"

namespace awblstm {

using nlohmann::json;

double f1_score(double precision, double recall) {
    const double denom = precision + recall;
    return denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
}

ClassMetrics macro_average(const std::vector<ClassMetrics>& per_class) {
    ClassMetrics avg;
    if (per_class.empty()) return avg;
    for (const ClassMetrics& m : per_class) {
        avg.precision += m.precision;
        avg.recall += m.recall;
        avg.f1 += m.f1;
    }
    const double n = static_cast<double>(per_class.size());
    avg.precision /= n;
    avg.recall /= n;
    avg.f1 /= n;
    return avg;
}

EvalReport report_from_confusion(const ConfusionMatrix& matrix) {
    EvalReport report;
    report.confusion = matrix;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        const Label cls = static_cast<Label>(c);
        std::size_t tp = matrix.at(cls, cls);
        std::size_t fp = 0, fn = 0;
        for (std::size_t o = 0; o < kNumClasses; ++o) {
            if (o == c) continue;
            fp += matrix.at(static_cast<Label>(o), cls);
            fn += matrix.at(cls, static_cast<Label>(o));
        }
        ClassMetrics m;
        m.precision = (tp + fp == 0) ? 0.0
                                     : static_cast<double>(tp) / static_cast<double>(tp + fp);
        m.recall = (tp + fn == 0) ? 0.0
                                  : static_cast<double>(tp) / static_cast<double>(tp + fn);
        m.f1 = f1_score(m.precision, m.recall);
        report.per_class[c] = m;
    }
    std::vector<ClassMetrics> positive(report.per_class.begin(),
                                       report.per_class.begin() + 4);
    std::vector<ClassMetrics> all(report.per_class.begin(), report.per_class.end());
    report.macro4 = macro_average(positive);
    report.macro5 = macro_average(all);
    return report;
}

EvalReport score(const std::vector<Label>& gold, const std::vector<Label>& predicted) {
    if (gold.size() != predicted.size()) {
        throw ContractError("score: " + std::to_string(gold.size()) + " gold labels vs " +
                            std::to_string(predicted.size()) + " predictions");
    }
    if (gold.empty()) {
        throw ContractError("score: empty input");
    }
    ConfusionMatrix matrix;
    for (std::size_t i = 0; i < gold.size(); ++i) matrix.add(gold[i], predicted[i]);
    return report_from_confusion(matrix);
}

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

std::string render_report(const EvalReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Json: {
            json per;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const ClassMetrics& m = report.per_class[c];
                per[kLabelNames[c]] = {{"precision", m.precision},
                                       {"recall", m.recall},
                                       {"f1", m.f1}};
            }
            json j;
            j["per_class"] = per;
            j["macro4"] = {{"precision", report.macro4.precision},
                           {"recall", report.macro4.recall},
                           {"f1", report.macro4.f1}};
            j["macro5"] = {{"precision", report.macro5.precision},
                           {"recall", report.macro5.recall},
                           {"f1", report.macro5.f1}};
            j["accuracy"] = report.confusion.accuracy();
            j["total"] = report.confusion.total();
            return j.dump() + "\n";
        }
        case ReportFormat::Csv: {
            std::ostringstream os;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const ClassMetrics& m = report.per_class[c];
                os << kLabelNames[c] << ',' << fmt(m.precision) << ',' << fmt(m.recall)
                   << ',' << fmt(m.f1) << '\n';
            }
            os << "macro4," << fmt(report.macro4.precision) << ',' << fmt(report.macro4.recall)
               << ',' << fmt(report.macro4.f1) << '\n';
            os << "macro5," << fmt(report.macro5.precision) << ',' << fmt(report.macro5.recall)
               << ',' << fmt(report.macro5.f1) << '\n';
            return os.str();
        }
        case ReportFormat::Table: {
            std::ostringstream os;
            char line[96];
            std::snprintf(line, sizeof(line), "%-10s %10s %10s %10s\n", "class",
                          "precision", "recall", "f1");
            os << line;
            for (std::size_t c = 0; c < kNumClasses; ++c) {
                const ClassMetrics& m = report.per_class[c];
                std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f\n",
                              kLabelNames[c], m.precision, m.recall, m.f1);
                os << line;
            }
            std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f\n", "macro4",
                          report.macro4.precision, report.macro4.recall, report.macro4.f1);
            os << line;
            std::snprintf(line, sizeof(line), "%-10s %10.4f %10.4f %10.4f\n", "macro5",
                          report.macro5.precision, report.macro5.recall, report.macro5.f1);
            os << line;
            return os.str();
        }
    }
    throw ContractError("render_report: unknown format");
}

}  // namespace awblstm
