#include "edos/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace edos {

ConfusionMatrix::ConfusionMatrix(std::size_t k, std::vector<std::string> labels)
    : k_(k), counts_(k * k, 0), labels_(std::move(labels)) {
    if (k_ < 1) throw std::invalid_argument("ConfusionMatrix: need at least one class");
    if (labels_.empty()) {
        labels_.reserve(k_);
        for (std::size_t i = 0; i < k_; ++i) labels_.push_back("c" + std::to_string(i));
    }
    if (labels_.size() != k_)
        throw std::invalid_argument("ConfusionMatrix: label count does not match class count");
}

std::int64_t ConfusionMatrix::at(std::size_t actual, std::size_t predicted) const {
    if (actual >= k_ || predicted >= k_) throw std::out_of_range("ConfusionMatrix::at");
    return counts_[actual * k_ + predicted];
}

std::int64_t& ConfusionMatrix::cell(std::size_t actual, std::size_t predicted) {
    if (actual >= k_ || predicted >= k_) throw std::out_of_range("ConfusionMatrix::cell");
    return counts_[actual * k_ + predicted];
}

std::int64_t ConfusionMatrix::row_sum(std::size_t actual) const {
    std::int64_t sum = 0;
    for (std::size_t p = 0; p < k_; ++p) sum += at(actual, p);
    return sum;
}

std::int64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
    std::int64_t sum = 0;
    for (std::size_t a = 0; a < k_; ++a) sum += at(a, predicted);
    return sum;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t sum = 0;
    for (std::int64_t c : counts_) sum += c;
    return sum;
}

void ConfusionMatrix::add(int gold, int predicted, std::int64_t count) {
    if (gold < 0 || predicted < 0 || static_cast<std::size_t>(gold) >= k_ ||
        static_cast<std::size_t>(predicted) >= k_)
        throw std::out_of_range("ConfusionMatrix::add: label index out of range");
    if (count < 0) throw std::invalid_argument("ConfusionMatrix::add: negative count");
    counts_[static_cast<std::size_t>(gold) * k_ + static_cast<std::size_t>(predicted)] += count;
}

ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& predictions,
                          const TaskLabelSet& label_set) {
    ConfusionMatrix cm(label_set.size(), label_set.labels());
    if (golds.size() != predictions.size())
        throw std::invalid_argument("confusion: golds and predictions differ in length");
    for (std::size_t i = 0; i < golds.size(); ++i) cm.add(golds[i], predictions[i]);
    return cm;
}

ConfusionMatrix confusion(const std::vector<int>& golds, const std::vector<int>& predictions,
                          std::size_t k) {
    ConfusionMatrix cm(k);
    if (golds.size() != predictions.size())
        throw std::invalid_argument("confusion: golds and predictions differ in length");
    for (std::size_t i = 0; i < golds.size(); ++i) cm.add(golds[i], predictions[i]);
    return cm;
}

std::vector<ClassScore> per_class_report(const ConfusionMatrix& cm) {
    const std::size_t k = cm.classes();
    std::vector<ClassScore> scores(k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::int64_t tp = cm.at(c, c);
        const std::int64_t col = cm.col_sum(c);
        const std::int64_t row = cm.row_sum(c);
        ClassScore& s = scores[c];
        s.label = cm.labels()[c];
        s.support = row;
        s.precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
        s.recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
        s.f1 = (s.precision + s.recall) > 0.0
                   ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
                   : 0.0;
    }
    return scores;
}

double macro_f1(const ConfusionMatrix& cm, bool include_zero_support) {
    if (cm.classes() < 2) throw std::invalid_argument("macro_f1: need at least two classes");
    const auto scores = per_class_report(cm);
    double sum = 0.0;
    std::size_t counted = 0;
    for (const auto& s : scores) {
        if (!include_zero_support && s.support == 0) continue;
        sum += s.f1;
        ++counted;
    }
    return counted > 0 ? sum / static_cast<double>(counted) : 0.0;
}

ErrorReport error_report(const ConfusionMatrix& cm) {
    ErrorReport report;
    for (std::size_t g = 0; g < cm.classes(); ++g) {
        const std::int64_t row = cm.row_sum(g);
        if (row == 0) {
            report.omitted_rows.push_back(g);
            continue;
        }
        for (std::size_t p = 0; p < cm.classes(); ++p) {
            if (p == g) continue;
            report.rates.push_back(
                {g, p, cm.at(g, p), static_cast<double>(cm.at(g, p)) / static_cast<double>(row)});
        }
    }
    std::stable_sort(report.rates.begin(), report.rates.end(),
                     [](const ErrorRate& a, const ErrorRate& b) { return a.rate > b.rate; });
    return report;
}

EvalReport evaluate_matrix(const ConfusionMatrix& cm) {
    return {cm, macro_f1(cm), per_class_report(cm), error_report(cm)};
}

EvalReport evaluate(const std::vector<int>& golds, const std::vector<int>& predictions,
                    const TaskLabelSet& label_set) {
    return evaluate_matrix(confusion(golds, predictions, label_set));
}

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

} // namespace

std::string format_report_text(const EvalReport& report) {
    std::ostringstream os;
    const auto& cm = report.cm;
    os << "macro F1: " << fixed(report.macro_f1, 4) << "\n\n";
    os << "confusion matrix (rows = actual, cols = predicted):\n";
    for (std::size_t g = 0; g < cm.classes(); ++g) {
        for (std::size_t p = 0; p < cm.classes(); ++p) os << (p ? "\t" : "") << cm.at(g, p);
        os << "\t| " << cm.labels()[g] << "\n";
    }
    os << "\nper-class scores:\n";
    for (const auto& s : report.per_class)
        os << "  " << s.label << ": P=" << fixed(s.precision, 4) << " R=" << fixed(s.recall, 4)
           << " F1=" << fixed(s.f1, 4) << " support=" << s.support << "\n";
    os << "\nmisclassification rates (row-normalized, descending):\n";
    for (const auto& e : report.errors.rates) {
        if (e.count == 0) continue;
        os << "  " << cm.labels()[e.actual] << " -> " << cm.labels()[e.predicted] << ": "
           << fixed(e.rate, 4) << " (" << e.count << "/" << cm.row_sum(e.actual) << ")\n";
    }
    for (std::size_t g : report.errors.omitted_rows)
        os << "  note: class '" << cm.labels()[g] << "' has no examples; row omitted\n";
    return os.str();
}

std::string format_report_csv(const EvalReport& report) {
    std::ostringstream os;
    os << "metric,class,predicted,value,support\n";
    os << "macro_f1,,," << fixed(report.macro_f1, 6) << ",\n";
    for (const auto& s : report.per_class) {
        os << "precision," << s.label << ",," << fixed(s.precision, 6) << "," << s.support << "\n";
        os << "recall," << s.label << ",," << fixed(s.recall, 6) << "," << s.support << "\n";
        os << "f1," << s.label << ",," << fixed(s.f1, 6) << "," << s.support << "\n";
    }
    for (const auto& e : report.errors.rates)
        os << "error_rate," << report.cm.labels()[e.actual] << "," << report.cm.labels()[e.predicted]
           << "," << fixed(e.rate, 6) << "," << e.count << "\n";
    return os.str();
}

ConfusionMatrix load_matrix_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    std::vector<std::vector<std::int64_t>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::int64_t> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            std::size_t pos = 0;
            long long v = 0;
            try {
                v = std::stoll(cell, &pos);
            } catch (const std::exception&) {
                throw std::runtime_error(path + ": non-integer cell '" + cell + "'");
            }
            while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
            if (pos != cell.size())
                throw std::runtime_error(path + ": non-integer cell '" + cell + "'");
            if (v < 0) throw std::runtime_error(path + ": negative count " + cell);
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
    const std::size_t k = rows.size();
    for (const auto& row : rows)
        if (row.size() != k)
            throw std::runtime_error(path + ": matrix is not square (" + std::to_string(k) +
                                     " rows, row with " + std::to_string(row.size()) + " columns)");
    ConfusionMatrix cm(k);
    for (std::size_t g = 0; g < k; ++g)
        for (std::size_t p = 0; p < k; ++p) cm.cell(g, p) = rows[g][p];
    return cm;
}

void save_matrix_csv(const std::string& path, const ConfusionMatrix& cm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    for (std::size_t g = 0; g < cm.classes(); ++g) {
        for (std::size_t p = 0; p < cm.classes(); ++p) out << (p ? "," : "") << cm.at(g, p);
        out << '\n';
    }
}

} // namespace edos
