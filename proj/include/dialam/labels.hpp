#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

namespace dialam {

enum class NodeKind : std::uint8_t { I, L, TA, YA, RA, CA, MA };

inline constexpr std::array<std::string_view, 7> kNodeKindNames = {"I", "L", "TA", "YA", "RA", "CA", "MA"};

constexpr std::string_view to_string(NodeKind k) noexcept { return kNodeKindNames[static_cast<std::size_t>(k)]; }

/// Case-sensitive; the corpus "type" field is authoritative.
constexpr std::optional<NodeKind> parse_node_kind(std::string_view s) noexcept
{
    for (std::size_t i = 0; i < kNodeKindNames.size(); ++i)
        if (kNodeKindNames[i] == s)
            return static_cast<NodeKind>(i);
    return std::nullopt;
}

constexpr bool is_s_kind(NodeKind k) noexcept { return k == NodeKind::RA || k == NodeKind::CA || k == NodeKind::MA; }

/// Argumentative relation kinds in their classifier label order.
enum class SKind : std::uint8_t { RA, CA, MA };

inline constexpr std::array<SKind, 3> kSKinds = {SKind::RA, SKind::CA, SKind::MA};

constexpr NodeKind to_node_kind(SKind k) noexcept
{
    switch (k) {
    case SKind::RA: return NodeKind::RA;
    case SKind::CA: return NodeKind::CA;
    case SKind::MA: return NodeKind::MA;
    }
    return NodeKind::RA;
}

constexpr std::optional<SKind> to_s_kind(NodeKind k) noexcept
{
    switch (k) {
    case NodeKind::RA: return SKind::RA;
    case NodeKind::CA: return SKind::CA;
    case NodeKind::MA: return SKind::MA;
    default: return std::nullopt;
    }
}

constexpr std::string_view to_string(SKind k) noexcept { return to_string(to_node_kind(k)); }

/// Text given to materialized S-nodes.
constexpr std::string_view default_s_text(SKind k) noexcept
{
    switch (k) {
    case SKind::RA: return "Default Inference";
    case SKind::CA: return "Default Conflict";
    case SKind::MA: return "Default Rephrase";
    }
    return "";
}

/// Illocutionary relation labels. Challenging and Disagreeing are single
/// labels shared by the L-anchored and TA-anchored groups.
enum class YaLabel : std::uint8_t {
    None,
    Asserting,
    Challenging,
    PureQuestioning,
    AssertiveQuestioning,
    RhetoricalQuestioning,
    Arguing,
    Disagreeing,
    DefaultIllocuting,
    Restating,
    Agreeing,
};

inline constexpr std::size_t kYaLabelCount = 11;

/// Canonical surface forms, as they appear in a YA node's text.
inline constexpr std::array<std::string_view, kYaLabelCount> kYaSurface = {
    "None",
    "Asserting",
    "Challenging",
    "Pure Questioning",
    "Assertive Questioning",
    "Rhetorical Questioning",
    "Arguing",
    "Disagreeing",
    "Default Illocuting",
    "Restating",
    "Agreeing",
};

constexpr std::string_view to_string(YaLabel l) noexcept { return kYaSurface[static_cast<std::size_t>(l)]; }

/// Named labels only; "None" is not a YA node text.
constexpr std::optional<YaLabel> parse_ya_label(std::string_view s) noexcept
{
    for (std::size_t i = 1; i < kYaSurface.size(); ++i)
        if (kYaSurface[i] == s)
            return static_cast<YaLabel>(i);
    return std::nullopt;
}

inline constexpr std::array<YaLabel, 5> kLocutionLabels = {YaLabel::Asserting, YaLabel::Challenging,
                                                           YaLabel::PureQuestioning, YaLabel::AssertiveQuestioning,
                                                           YaLabel::RhetoricalQuestioning};
inline constexpr std::array<YaLabel, 4> kTransitionToSLabels = {YaLabel::Arguing, YaLabel::Disagreeing,
                                                                YaLabel::DefaultIllocuting, YaLabel::Restating};
inline constexpr std::array<YaLabel, 3> kTransitionToILabels = {YaLabel::Agreeing, YaLabel::Challenging,
                                                                YaLabel::Disagreeing};

/// Labels a YA node may carry between an anchor of kind `anchor` and a
/// target of kind `target`. Empty for kind pairs no YA node may join.
constexpr std::span<const YaLabel> legal_ya_labels(NodeKind anchor, NodeKind target) noexcept
{
    if (anchor == NodeKind::L && target == NodeKind::I)
        return kLocutionLabels;
    if (anchor == NodeKind::TA && is_s_kind(target))
        return kTransitionToSLabels;
    if (anchor == NodeKind::TA && target == NodeKind::I)
        return kTransitionToILabels;
    return {};
}

constexpr bool is_legal_ya(YaLabel label, NodeKind anchor, NodeKind target) noexcept
{
    for (auto l : legal_ya_labels(anchor, target))
        if (l == label)
            return true;
    return false;
}

} // namespace dialam
