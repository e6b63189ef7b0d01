#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace edos {

enum class Task { A, B, C };

std::string_view task_name(Task t);
Task task_from_name(std::string_view name); // "A"/"B"/"C", case-insensitive

// Fixed label inventory of one task. Index order is the class-distribution
// table row order and never changes; confusion matrices, label indices and
// checkpoint metadata all depend on it.
class TaskLabelSet {
public:
    static const TaskLabelSet& for_task(Task t);

    Task task() const { return task_; }
    const std::vector<std::string>& labels() const { return labels_; }
    std::size_t size() const { return labels_.size(); }
    const std::string& label(std::size_t index) const;

    // Case-insensitive after trimming; tolerates the official dataset's
    // "2. derogation" / "2.1 descriptive attacks" enumeration prefixes.
    // Returns -1 for unknown labels.
    int index(std::string_view label) const;

private:
    TaskLabelSet(Task task, std::vector<std::string> labels,
                 std::vector<std::pair<std::string, int>> aliases);
    Task task_;
    std::vector<std::string> labels_;
    std::vector<std::pair<std::string, int>> lookup_; // normalized -> index
};

// Task B category that owns a Task C vector class.
int category_of_vector(int vector_index);

inline constexpr int kNotSexist = 0;
inline constexpr int kSexist = 1;

// Training-time task selection. B_joint trains the 5-class joint variant of
// task B: the four categories plus a trailing "not sexist" class.
enum class TaskSelect { A, B, C, B_joint };

std::string_view task_select_name(TaskSelect t);
TaskSelect task_select_from_name(std::string_view name);
std::size_t num_classes_for(TaskSelect t);
inline constexpr int kJointNotSexistClass = 4;

} // namespace edos
