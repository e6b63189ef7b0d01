#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "edos/labels.hpp"

namespace edos {

// K x K counts, cm[actual][predicted], class order fixed by the label set.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t k, std::vector<std::string> labels = {});

    std::size_t classes() const { return k_; }
    std::int64_t at(std::size_t actual, std::size_t predicted) const;
    std::int64_t& cell(std::size_t actual, std::size_t predicted);
    std::int64_t row_sum(std::size_t actual) const;
    std::int64_t col_sum(std::size_t predicted) const;
    std::int64_t total() const;
    const std::vector<std::string>& labels() const { return labels_; }

    void add(int gold, int predicted, std::int64_t count = 1);

private:
    std::size_t k_;
    std::vector<std::int64_t> counts_;
    std::vector<std::string> labels_;
};

ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& predictions,
                          const TaskLabelSet& label_set);
ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& predictions,
                          std::size_t k);

// Unweighted mean of per-class F1. Degenerate 0/0 ratios are scored 0;
// zero-support classes count unless include_zero_support is cleared.
double macro_f1(const ConfusionMatrix& cm, bool include_zero_support = true);

struct ClassScore {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::int64_t support = 0;
};
std::vector<ClassScore> per_class_report(const ConfusionMatrix& cm);

// Row-normalized off-diagonal rates, sorted by rate descending. Rows with
// zero support are listed in omitted_rows instead.
struct ErrorRate {
    std::size_t actual = 0;
    std::size_t predicted = 0;
    std::int64_t count = 0;
    double rate = 0.0;
};
struct ErrorReport {
    std::vector<ErrorRate> rates;
    std::vector<std::size_t> omitted_rows;
};
ErrorReport error_report(const ConfusionMatrix& cm);

struct EvalReport {
    ConfusionMatrix cm;
    double macro_f1 = 0.0;
    std::vector<ClassScore> per_class;
    ErrorReport errors;
};
EvalReport evaluate(const std::vector<int>& golds, const std::vector<int>& predictions,
                    const TaskLabelSet& label_set);
EvalReport evaluate_matrix(const ConfusionMatrix& cm);

std::string format_report_text(const EvalReport& report);
std::string format_report_csv(const EvalReport& report);

// Square nonnegative integer CSV, no header.
ConfusionMatrix load_matrix_csv(const std::string& path);
void save_matrix_csv(const std::string& path, const ConfusionMatrix& cm);

} // namespace edos
