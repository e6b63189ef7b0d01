#include "edos/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "edos/rng.hpp"

namespace edos {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// RFC 4180: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::vector<std::string>> parse_csv(const std::string& content, const std::string& path) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"' && field.empty() && !field_started) {
            quoted = true;
            field_started = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && i + 1 < content.size() && content[i + 1] == '\n') ++i;
            row.push_back(std::move(field));
            field.clear();
            field_started = false;
            rows.push_back(std::move(row));
            row.clear();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (quoted) throw std::runtime_error(path + ": unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

bool is_none(const std::string& value) {
    const std::string v = lower(trim(value));
    return v.empty() || v == "none";
}

} // namespace

LabeledExample LabeledExample::make(std::string id, std::string text, int label_sexist,
                                    std::optional<int> label_category,
                                    std::optional<int> label_vector) {
    if (text.empty()) throw std::invalid_argument("example " + id + ": empty text");
    if (label_sexist != kNotSexist && label_sexist != kSexist)
        throw std::invalid_argument("example " + id + ": bad sexist label");
    if (label_sexist == kNotSexist && (label_category || label_vector))
        throw std::invalid_argument("example " + id +
                                    ": non-sexist example must not carry category/vector labels");
    if (label_sexist == kSexist && (!label_category || !label_vector))
        throw std::invalid_argument("example " + id +
                                    ": sexist example must carry category and vector labels");
    if (label_category &&
        (*label_category < 0 ||
         static_cast<std::size_t>(*label_category) >= TaskLabelSet::for_task(Task::B).size()))
        throw std::invalid_argument("example " + id + ": category index out of range");
    if (label_vector &&
        (*label_vector < 0 ||
         static_cast<std::size_t>(*label_vector) >= TaskLabelSet::for_task(Task::C).size()))
        throw std::invalid_argument("example " + id + ": vector index out of range");
    LabeledExample ex;
    ex.id = std::move(id);
    ex.text = std::move(text);
    ex.label_sexist = label_sexist;
    ex.label_category = label_category;
    ex.label_vector = label_vector;
    return ex;
}

std::vector<LabeledExample> load_dataset(const std::string& path, LoadOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto rows = parse_csv(buf.str(), path);
    if (rows.empty()) throw std::runtime_error(path + ": empty file, header required");

    const auto& header = rows[0];
    auto find_col = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (lower(trim(header[i])) == name) return static_cast<int>(i);
        return -1;
    };
    int col_id = find_col("id");
    if (col_id < 0 && options.rewire_id) col_id = find_col("rewire_id");
    const int col_text = find_col("text");
    const int col_sexist = find_col("label_sexist");
    const int col_category = find_col("label_category");
    const int col_vector = find_col("label_vector");
    if (col_id < 0 || col_text < 0 || col_sexist < 0 || col_category < 0 || col_vector < 0)
        throw std::runtime_error(path + ": header must name columns id" +
                                 std::string(options.rewire_id ? "/rewire_id" : "") +
                                 ",text,label_sexist,label_category,label_vector");

    const auto& set_a = TaskLabelSet::for_task(Task::A);
    const auto& set_b = TaskLabelSet::for_task(Task::B);
    const auto& set_c = TaskLabelSet::for_task(Task::C);

    std::vector<LabeledExample> out;
    out.reserve(rows.size() - 1);
    const std::size_t want = header.size();
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue; // trailing blank line
        if (row.size() != want)
            throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " has " +
                                     std::to_string(row.size()) + " fields, expected " +
                                     std::to_string(want));
        const std::string id = trim(row[col_id]);
        const int sexist = set_a.index(row[col_sexist]);
        if (sexist < 0)
            throw std::runtime_error(path + ": row " + id + ": unknown label_sexist '" +
                                     row[col_sexist] + "'");

        std::optional<int> category;
        if (!is_none(row[col_category])) {
            const int idx = set_b.index(row[col_category]);
            if (idx < 0)
                throw std::runtime_error(path + ": row " + id + ": unknown label_category '" +
                                         row[col_category] + "'");
            category = idx;
        }
        std::optional<int> vector_label;
        if (!is_none(row[col_vector])) {
            const int idx = set_c.index(row[col_vector]);
            if (idx < 0)
                throw std::runtime_error(path + ": row " + id + ": unknown label_vector '" +
                                         row[col_vector] + "'");
            vector_label = idx;
        }
        try {
            out.push_back(LabeledExample::make(id, row[col_text], sexist, category, vector_label));
        } catch (const std::invalid_argument& e) {
            throw std::runtime_error(path + ": " + e.what());
        }
    }
    return out;
}

void save_dataset(const std::string& path, const std::vector<LabeledExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path);
    const auto& set_a = TaskLabelSet::for_task(Task::A);
    const auto& set_b = TaskLabelSet::for_task(Task::B);
    const auto& set_c = TaskLabelSet::for_task(Task::C);
    out << "id,text,label_sexist,label_category,label_vector\n";
    for (const auto& ex : examples) {
        out << csv_escape(ex.id) << ',' << csv_escape(ex.text) << ','
            << csv_escape(set_a.label(ex.label_sexist)) << ','
            << csv_escape(ex.label_category ? set_b.label(*ex.label_category) : "none") << ','
            << csv_escape(ex.label_vector ? set_c.label(*ex.label_vector) : "none") << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<TextRow> load_texts(const std::string& path, LoadOptions options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto rows = parse_csv(buf.str(), path);
    if (rows.empty()) throw std::runtime_error(path + ": empty file, header required");
    const auto& header = rows[0];
    int col_id = -1, col_text = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string h = lower(trim(header[i]));
        if (h == "id" || (options.rewire_id && h == "rewire_id")) col_id = static_cast<int>(i);
        if (h == "text") col_text = static_cast<int>(i);
    }
    if (col_id < 0 || col_text < 0)
        throw std::runtime_error(path + ": header must name columns id,text");
    std::vector<TextRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != header.size())
            throw std::runtime_error(path + ": row " + std::to_string(r + 1) + " field count mismatch");
        out.push_back({trim(row[col_id]), row[col_text]});
    }
    return out;
}

std::vector<std::string> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

void save_corpus(const std::string& path, const std::vector<std::string>& lines) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write corpus file: " + path);
    for (const auto& line : lines) out << line << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

DatasetSplit split_dataset(const std::vector<LabeledExample>& examples,
                           std::array<double, 3> ratios, std::uint64_t seed) {
    double sum = 0.0;
    for (double r : ratios) {
        if (r <= 0.0) throw std::invalid_argument("split_dataset: ratios must be positive");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("split_dataset: ratios must sum to 1");

    std::vector<std::size_t> order(examples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng(seed).split("dataset-split");
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[rng.uniform_int(i)]);

    const std::size_t n = examples.size();
    const std::size_t n_dev = static_cast<std::size_t>(std::floor(n * ratios[1]));
    const std::size_t n_test = static_cast<std::size_t>(std::floor(n * ratios[2]));
    const std::size_t n_train = n - n_dev - n_test; // floor(n*r0) + remainder

    DatasetSplit split;
    split.train.reserve(n_train);
    split.dev.reserve(n_dev);
    split.test.reserve(n_test);
    for (std::size_t i = 0; i < n; ++i) {
        const LabeledExample& ex = examples[order[i]];
        if (i < n_train) split.train.push_back(ex);
        else if (i < n_train + n_dev) split.dev.push_back(ex);
        else split.test.push_back(ex);
    }
    return split;
}

} // namespace edos
