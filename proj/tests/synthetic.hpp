#pragma once

// Synthetic corpus whose relations are signalled by lexical markers.
//
// A nodeset is a sequence of units:
//   relation: conclusion I and premise I sharing a topic token, the premise
//             carrying an S-kind marker and the conclusion "therefore";
//             locutions L_c, L_p joined by a TA whose YA to the S-node is
//             named by a marker in L_p;
//   single:   a lone I with its locution, optionally followed by a reply
//             locution whose TA points back at the I, the label named by a
//             marker in the reply.
// Each locution repeats its I's tokens plus a marker for its YA label.

#include "dialam/dialam.hpp"

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace dialam::test {

inline constexpr std::array<const char*, 3> kSMarkers = {"because", "however", "namely"};
inline constexpr std::array<const char*, 5> kLocutionMarkers = {"asserts", "challenges", "wonders", "queries",
                                                                "muses"};
inline constexpr std::array<const char*, 4> kTransitionSMarkers = {"argues", "disputes", "illocutes", "restates"};
inline constexpr std::array<const char*, 3> kTransitionIMarkers = {"agreed", "objection", "nope"};

class SyntheticBuilder
{
public:
    std::string node(NodeKind kind, std::string text)
    {
        auto id = std::to_string(m_next++);
        m_nodes.push_back({id, kind, std::move(text), std::nullopt, Json::object()});
        return id;
    }

    void edge(const std::string& from, const std::string& to)
    {
        m_edges.push_back({std::to_string(m_next++), from, to, Json::object()});
    }

    void link(const std::string& from, const std::string& via, const std::string& to)
    {
        edge(from, via);
        edge(via, to);
    }

    Nodeset build(std::string id) const { return Nodeset(std::move(id), m_nodes, m_edges); }

private:
    std::size_t m_next = 1;
    std::vector<Node> m_nodes;
    std::vector<Edge> m_edges;
};

inline Nodeset synthetic_nodeset(std::uint64_t seed, std::string id)
{
    SplitMix64 rng(seed);
    SyntheticBuilder b;
    std::size_t word = 0;
    auto words = [&](std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i)
            out += (i ? " w" : "w") + std::to_string(rng.below(1000)) + "x" + std::to_string(word++);
        return out;
    };
    const std::string speaker = "speaker" + std::to_string(rng.below(4)) + ":";

    const std::size_t relations = 2 + rng.below(3);
    const std::size_t singles = 1 + rng.below(2);
    std::vector<bool> order(relations, true);
    order.insert(order.end(), singles, false);
    shuffle(order, rng);

    for (const bool relation : order) {
        if (relation) {
            const auto kind = kSKinds[rng.below(kSKinds.size())];
            const auto ya_l_c = rng.below(kLocutionLabels.size());
            const auto ya_l_p = rng.below(kLocutionLabels.size());
            const auto ya_ta = rng.below(kTransitionToSLabels.size());
            const std::string topic = "topic" + std::to_string(word++);
            const std::string conclusion = topic + " therefore " + words(4);
            const std::string premise =
                topic + " " + kSMarkers[static_cast<std::size_t>(kind)] + " " + words(4);

            const auto ic = b.node(NodeKind::I, conclusion);
            const auto ip = b.node(NodeKind::I, premise);
            const auto lc = b.node(NodeKind::L, speaker + " " + conclusion + " " + kLocutionMarkers[ya_l_c]);
            const auto lp = b.node(NodeKind::L, speaker + " " + premise + " " + kLocutionMarkers[ya_l_p] + " "
                                                    + kTransitionSMarkers[ya_ta]);
            const auto s = b.node(to_node_kind(kind), std::string(default_s_text(kind)));
            b.link(ip, s, ic);
            const auto ta = b.node(NodeKind::TA, "Default Transition");
            b.link(lc, ta, lp);
            b.link(lc, b.node(NodeKind::YA, std::string(to_string(kLocutionLabels[ya_l_c]))), ic);
            b.link(lp, b.node(NodeKind::YA, std::string(to_string(kLocutionLabels[ya_l_p]))), ip);
            b.link(ta, b.node(NodeKind::YA, std::string(to_string(kTransitionToSLabels[ya_ta]))), s);
        } else {
            const auto ya_l = rng.below(kLocutionLabels.size());
            const std::string text = words(5);
            const auto i = b.node(NodeKind::I, text);
            const auto l = b.node(NodeKind::L, speaker + " " + text + " " + kLocutionMarkers[ya_l]);
            b.link(l, b.node(NodeKind::YA, std::string(to_string(kLocutionLabels[ya_l]))), i);
            if (rng.below(2) == 0) {
                const auto ya_ta = rng.below(kTransitionToILabels.size());
                const auto r = b.node(NodeKind::L, speaker + " reply " + kTransitionIMarkers[ya_ta]);
                const auto ta = b.node(NodeKind::TA, "Default Transition");
                b.link(l, ta, r);
                b.link(ta, b.node(NodeKind::YA, std::string(to_string(kTransitionToILabels[ya_ta]))), i);
            }
        }
    }
    return b.build(std::move(id));
}

/// Write `n` synthetic nodesets as <dir>/syn<k>.json.
inline std::vector<std::string> write_synthetic_corpus(const std::filesystem::path& dir, std::size_t n,
                                                       std::uint64_t seed)
{
    std::filesystem::create_directories(dir);
    std::vector<std::string> ids;
    SplitMix64 seeds(seed);
    for (std::size_t k = 0; k < n; ++k) {
        char name[32];
        std::snprintf(name, sizeof name, "syn%04zu", k);
        ids.emplace_back(name);
        const auto ns = synthetic_nodeset(seeds.next(), name);
        detail::write_file_atomic(dir / (ids.back() + ".json"), serialize_nodeset(ns));
    }
    return ids;
}

} // namespace dialam::test
