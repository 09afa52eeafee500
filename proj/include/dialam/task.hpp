#pragma once

#include "dialam/error.hpp"
#include "dialam/labels.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dialam {

/// Classification tasks. s_four is the single-pass four-label S-node model
/// (None/RA/CA/MA) used by the four_label pipeline mode.
enum class TaskName { SStep1, SStep2, Ya, SFour };

constexpr std::string_view to_string(TaskName t) noexcept
{
    switch (t) {
    case TaskName::SStep1: return "s_step1";
    case TaskName::SStep2: return "s_step2";
    case TaskName::Ya: return "ya";
    case TaskName::SFour: return "s_four";
    }
    return "";
}

constexpr std::optional<TaskName> parse_task_name(std::string_view s) noexcept
{
    for (auto t : {TaskName::SStep1, TaskName::SStep2, TaskName::Ya, TaskName::SFour})
        if (to_string(t) == s)
            return t;
    return std::nullopt;
}

/// A task and its ordered label vocabulary. The order is part of the model
/// file and wire formats:
///   s_step1: false, true
///   s_step2: RA, CA, MA
///   ya:      None followed by the ten YA surface forms in YaLabel order
///   s_four:  None, RA, CA, MA
struct TaskSpec
{
    TaskName name;
    std::vector<std::string> labels;

    std::size_t size() const noexcept { return labels.size(); }

    std::optional<std::size_t> index_of(std::string_view label) const noexcept
    {
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == label)
                return i;
        return std::nullopt;
    }

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

inline TaskSpec task_spec(TaskName name)
{
    switch (name) {
    case TaskName::SStep1: return {name, {"false", "true"}};
    case TaskName::SStep2: return {name, {"RA", "CA", "MA"}};
    case TaskName::Ya: return {name, {kYaSurface.begin(), kYaSurface.end()}};
    case TaskName::SFour: return {name, {"None", "RA", "CA", "MA"}};
    }
    throw Error(ErrorCode::BadConfig, std::string(to_string(name)), "no such task");
}

} // namespace dialam
