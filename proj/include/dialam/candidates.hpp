#pragma once

#include "dialam/graph.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dialam {

/// An ordered (anchor, target) node-id pair that may carry a YA relation.
struct YaCandidate
{
    std::string anchor;
    std::string target;

    friend bool operator==(const YaCandidate&, const YaCandidate&) = default;
    friend auto operator<=>(const YaCandidate&, const YaCandidate&) = default;
};

/// The YA candidate universe of a nodeset, in this order:
///   every (L, I) pair, L-major in node order;
///   every (TA, S) pair for S in {RA, CA, MA}, TA-major;
///   every (TA, I) pair, TA-major.
/// With `window`, (L, I) and (TA, I) pairs are kept only when the two nodes'
/// positions in node order differ by at most `window`.
inline std::vector<YaCandidate> gen_ya_candidates(const Nodeset& ns, std::optional<std::size_t> window = std::nullopt)
{
    std::vector<std::size_t> locutions, transitions, props, relations;
    for (std::size_t i = 0; i < ns.nodes().size(); ++i) {
        switch (ns.at(i).kind) {
        case NodeKind::L: locutions.push_back(i); break;
        case NodeKind::TA: transitions.push_back(i); break;
        case NodeKind::I: props.push_back(i); break;
        case NodeKind::RA:
        case NodeKind::CA:
        case NodeKind::MA: relations.push_back(i); break;
        default: break;
        }
    }
    auto near = [&](std::size_t a, std::size_t b) {
        if (!window)
            return true;
        return (a > b ? a - b : b - a) <= *window;
    };

    std::vector<YaCandidate> out;
    out.reserve(locutions.size() * props.size() + transitions.size() * (relations.size() + props.size()));
    for (auto l : locutions)
        for (auto p : props)
            if (near(l, p))
                out.push_back({ns.at(l).id, ns.at(p).id});
    for (auto t : transitions)
        for (auto s : relations)
            out.push_back({ns.at(t).id, ns.at(s).id});
    for (auto t : transitions)
        for (auto p : props)
            if (near(t, p))
                out.push_back({ns.at(t).id, ns.at(p).id});
    return out;
}

} // namespace dialam
