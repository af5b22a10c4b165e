#pragma once

#include <array>
#include <string>
#include <vector>

#include "awblstm/labels.hpp"

namespace awblstm {

/// 5x5 counts; rows are gold labels, columns predictions.
class ConfusionMatrix {
public:
    void add(Label gold, Label predicted) {
        counts_[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)]++;
        total_++;
    }

    std::size_t at(Label gold, Label predicted) const {
        return counts_[static_cast<std::size_t>(gold)][static_cast<std::size_t>(predicted)];
    }
    std::size_t total() const { return total_; }
    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < kNumClasses; ++i) t += counts_[i][i];
        return t;
    }
    double accuracy() const {
        return total_ == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(total_);
    }

private:
    std::array<std::array<std::size_t, kNumClasses>, kNumClasses> counts_{};
    std::size_t total_ = 0;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f1_score(double precision, double recall);

/// Per-class metrics plus unweighted means over the four positive classes
/// (macro4) and over all five (macro5). Macro F1 is the mean of the per-class
/// F1 values, not the harmonic mean of the macro precision/recall.
struct EvalReport {
    std::array<ClassMetrics, kNumClasses> per_class;
    ClassMetrics macro4;
    ClassMetrics macro5;
    ConfusionMatrix confusion;
};

/// Unweighted mean of per-class metrics.
ClassMetrics macro_average(const std::vector<ClassMetrics>& per_class);

EvalReport report_from_confusion(const ConfusionMatrix& matrix);

/// Score equal-length gold/prediction sequences. A class never predicted and
/// never gold gets precision = recall = 0 (no NaN propagates into the means).
EvalReport score(const std::vector<Label>& gold, const std::vector<Label>& predicted);

enum class ReportFormat { Table, Json, Csv };

/// Deterministic rendering. Table and CSV list the five class rows in label
/// order followed by the macro4 and macro5 rows; CSV carries no header.
std::string render_report(const EvalReport& report, ReportFormat format);

}  // namespace awblstm
