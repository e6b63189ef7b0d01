#include "edos/labels.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace edos {

namespace {

std::string normalize_label(std::string_view raw) {
    // trim
    std::size_t b = 0, e = raw.size();
    while (b < e && std::isspace(static_cast<unsigned char>(raw[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(raw[e - 1]))) --e;
    std::string s(raw.substr(b, e - b));
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    // strip a leading "2." / "2.1" style enumeration prefix
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && s[i] == '.') {
        std::size_t j = i + 1;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        if (j < s.size() && (s[j] == ' ' || s[j] == '.')) {
            if (s[j] == '.') ++j;
            s.erase(0, j);
        } else if (j < s.size()) {
            s.erase(0, j); // "2.derogation"
        } else if (j == s.size() && j > i + 1) {
            s.clear(); // pure number is no label
        }
    }
    // drop commas and underscores, collapse whitespace
    std::string out;
    out.reserve(s.size());
    bool space = true;
    for (char c : s) {
        if (c == ',') continue;
        if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
            if (!space && !out.empty()) out.push_back(' ');
            space = true;
        } else {
            out.push_back(c);
            space = false;
        }
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

} // namespace

std::string_view task_name(Task t) {
    switch (t) {
        case Task::A: return "A";
        case Task::B: return "B";
        case Task::C: return "C";
    }
    throw std::logic_error("task_name: bad task");
}

Task task_from_name(std::string_view name) {
    if (name.size() == 1) {
        switch (std::tolower(static_cast<unsigned char>(name[0]))) {
            case 'a': return Task::A;
            case 'b': return Task::B;
            case 'c': return Task::C;
        }
    }
    throw std::invalid_argument("unknown task name: " + std::string(name));
}

TaskLabelSet::TaskLabelSet(Task task, std::vector<std::string> labels,
                           std::vector<std::pair<std::string, int>> aliases)
    : task_(task), labels_(std::move(labels)) {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        lookup_.emplace_back(normalize_label(labels_[i]), static_cast<int>(i));
    for (auto& [alias, index] : aliases) lookup_.emplace_back(normalize_label(alias), index);
}

const std::string& TaskLabelSet::label(std::size_t index) const {
    if (index >= labels_.size()) throw std::out_of_range("TaskLabelSet::label: index out of range");
    return labels_[index];
}

int TaskLabelSet::index(std::string_view label) const {
    const std::string key = normalize_label(label);
    for (const auto& [k, i] : lookup_)
        if (k == key) return i;
    return -1;
}

const TaskLabelSet& TaskLabelSet::for_task(Task t) {
    static const TaskLabelSet a(Task::A, {"not sexist", "sexist"}, {});
    static const TaskLabelSet b(Task::B,
                                {
                                    "threats, plans to harm and incitement",
                                    "derogation",
                                    "animosity",
                                    "prejudiced discussions",
                                },
                                {
                                    {"threats plan to harm, and incitement", 0},
                                    {"threats", 0},
                                    {"prejudiced", 3},
                                });
    static const TaskLabelSet c(Task::C,
                                {
                                    "threats of harm",
                                    "incitement and encouragement of harm",
                                    "descriptive attacks",
                                    "aggressive and emotive attacks",
                                    "dehumanising attacks & overt sexual objectification",
                                    "casual use of gendered slurs, profanities, and insults",
                                    "immutable gender differences and gender stereotypes",
                                    "backhanded gendered compliments",
                                    "condescending explanations or unwelcome advice",
                                    "supporting mistreatment of individual women",
                                    "supporting systemic discrimination against women as a group",
                                },
                                {});
    switch (t) {
        case Task::A: return a;
        case Task::B: return b;
        case Task::C: return c;
    }
    throw std::logic_error("TaskLabelSet::for_task: bad task");
}

std::string_view task_select_name(TaskSelect t) {
    switch (t) {
        case TaskSelect::A: return "A";
        case TaskSelect::B: return "B";
        case TaskSelect::C: return "C";
        case TaskSelect::B_joint: return "B_joint";
    }
    throw std::logic_error("task_select_name: bad task");
}

TaskSelect task_select_from_name(std::string_view name) {
    std::string lowered(name);
    for (char& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (lowered == "a") return TaskSelect::A;
    if (lowered == "b") return TaskSelect::B;
    if (lowered == "c") return TaskSelect::C;
    if (lowered == "b_joint" || lowered == "bjoint") return TaskSelect::B_joint;
    throw std::invalid_argument("unknown task selection: " + std::string(name));
}

std::size_t num_classes_for(TaskSelect t) {
    switch (t) {
        case TaskSelect::A: return TaskLabelSet::for_task(Task::A).size();
        case TaskSelect::B: return TaskLabelSet::for_task(Task::B).size();
        case TaskSelect::C: return TaskLabelSet::for_task(Task::C).size();
        case TaskSelect::B_joint: return TaskLabelSet::for_task(Task::B).size() + 1;
    }
    throw std::logic_error("num_classes_for: bad task");
}

int category_of_vector(int vector_index) {
    if (vector_index < 0 || vector_index >= 11)
        throw std::out_of_range("category_of_vector: vector index out of range");
    if (vector_index <= 1) return 0;  // threats
    if (vector_index <= 4) return 1;  // derogation
    if (vector_index <= 8) return 2;  // animosity
    return 3;                         // prejudiced discussions
}

} // namespace edos
