#pragma once

// Shared test fixtures: a terse nodeset builder, a generator of random valid
// nodesets, and in-process classifier stubs.

#include "dialam/dialam.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace dialam::test {

class Builder
{
public:
    Builder& node(std::string id, NodeKind kind, std::string text)
    {
        m_nodes.push_back({std::move(id), kind, std::move(text), std::nullopt, Json::object()});
        return *this;
    }

    Builder& edge(std::string from, std::string to)
    {
        m_edges.push_back({"e" + std::to_string(m_edges.size() + 1), std::move(from), std::move(to), Json::object()});
        return *this;
    }

    /// from -> via -> to
    Builder& link(const std::string& from, const std::string& via, const std::string& to)
    {
        return edge(from, via).edge(via, to);
    }

    Nodeset build(std::string id = "nodeset1") const { return Nodeset(std::move(id), m_nodes, m_edges); }

private:
    std::vector<Node> m_nodes;
    std::vector<Edge> m_edges;
};

/// L1 -> YA1("Asserting") -> I1
inline Nodeset asserting_fixture()
{
    return Builder()
        .node("L1", NodeKind::L, "we should act")
        .node("I1", NodeKind::I, "we should act")
        .node("YA1", NodeKind::YA, "Asserting")
        .link("L1", "YA1", "I1")
        .build();
}

template <typename T, std::size_t N>
const T& pick(const std::array<T, N>& xs, std::mt19937_64& rng)
{
    return xs[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)];
}

struct RandomShape
{
    std::size_t max_i = 8;
    std::size_t max_l = 6;
    std::size_t max_s = 5;
    bool multi_premise = true;
};

/// A random nodeset satisfying V1-V5: locutions chained by transitions,
/// L -> YA -> I anchorings, S-nodes between distinct I-nodes, and
/// TA -> YA -> S / TA -> YA -> I anchorings with legal labels.
inline Nodeset random_valid_nodeset(std::mt19937_64& rng, const RandomShape& shape = {}, std::string id = "nodeset1")
{
    auto uni = [&](std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(rng); };
    auto coin = [&](double p) { return std::bernoulli_distribution(p)(rng); };
    Builder b;
    std::size_t counter = 0;
    auto fresh = [&](const char* prefix) { return prefix + std::to_string(++counter); };

    const std::size_t n_l = uni(0, shape.max_l);
    const std::size_t n_i = uni(0, shape.max_i);
    std::vector<std::string> ls, is, tas, ss;
    for (std::size_t i = 0; i < n_i; ++i) {
        is.push_back(fresh("I"));
        b.node(is.back(), NodeKind::I, "prop " + std::to_string(counter) + " w" + std::to_string(uni(0, 9)));
    }
    for (std::size_t i = 0; i < n_l; ++i) {
        ls.push_back(fresh("L"));
        b.node(ls.back(), NodeKind::L, "speaker: says " + std::to_string(counter));
    }
    for (std::size_t i = 0; i + 1 < n_l; ++i) {
        if (!coin(0.8))
            continue;
        tas.push_back(fresh("TA"));
        b.node(tas.back(), NodeKind::TA, "Default Transition");
        b.link(ls[i], tas.back(), ls[i + 1]);
    }
    if (!is.empty()) {
        for (const auto& l : ls) {
            if (!coin(0.85))
                continue;
            const auto ya = fresh("YA");
            b.node(ya, NodeKind::YA, std::string(to_string(pick(kLocutionLabels, rng))));
            b.link(l, ya, is[uni(0, is.size() - 1)]);
        }
    }
    if (is.size() >= 2) {
        const std::size_t n_s = uni(0, shape.max_s);
        for (std::size_t s = 0; s < n_s; ++s) {
            const auto kind = pick(kSKinds, rng);
            const auto sid = fresh(std::string(to_string(kind)).c_str());
            b.node(sid, to_node_kind(kind), std::string(default_s_text(kind)));
            const auto concl = uni(0, is.size() - 1);
            std::size_t prem = uni(0, is.size() - 2);
            if (prem >= concl)
                ++prem;
            b.edge(is[prem], sid);
            if (shape.multi_premise && is.size() >= 3 && coin(0.25)) {
                std::size_t second = uni(0, is.size() - 1);
                if (second != concl && second != prem)
                    b.edge(is[second], sid);
            }
            b.edge(sid, is[concl]);
            ss.push_back(sid);
        }
    }
    for (const auto& ta : tas) {
        if (!ss.empty() && coin(0.5)) {
            const auto ya = fresh("YA");
            b.node(ya, NodeKind::YA, std::string(to_string(pick(kTransitionToSLabels, rng))));
            b.link(ta, ya, ss[uni(0, ss.size() - 1)]);
        }
        if (!is.empty() && coin(0.3)) {
            const auto ya = fresh("YA");
            b.node(ya, NodeKind::YA, std::string(to_string(pick(kTransitionToILabels, rng))));
            b.link(ta, ya, is[uni(0, is.size() - 1)]);
        }
    }
    return b.build(std::move(id));
}

/// Classifier stub computing each distribution from the instance alone.
class FnClassifier final : public Classifier
{
public:
    using Fn = std::function<std::vector<double>(const PairInstance&)>;

    FnClassifier(TaskName task, Fn fn) : m_task(task_spec(task)), m_fn(std::move(fn)) {}

    const TaskSpec& task() const noexcept override { return m_task; }

    std::vector<LabelDistribution> classify(std::span<const PairInstance> instances) const override
    {
        std::vector<LabelDistribution> out;
        for (const auto& inst : instances) {
            auto s = m_fn(inst);
            double sum = 0;
            for (double v : s)
                sum += v;
            for (auto& v : s)
                v /= sum;
            out.push_back({std::move(s)});
        }
        return out;
    }

private:
    TaskSpec m_task;
    Fn m_fn;
};

/// Scores derived from a hash of the instance: deterministic noise.
inline std::vector<double> hashed_scores(const PairInstance& inst, std::size_t k, std::uint64_t salt)
{
    SplitMix64 rng(fnv1a(inst.head_text + "\x1f" + inst.head_context + "\x1f" + inst.tail_text + "\x1f"
                         + inst.tail_context)
                   ^ salt);
    std::vector<double> s(k);
    for (auto& v : s)
        v = 0.05 + rng.uniform();
    return s;
}

inline std::filesystem::path temp_dir(const std::string& name)
{
    auto dir = std::filesystem::temp_directory_path() / ("dialam_test_" + name + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& p) { return detail::read_file(p); }

} // namespace dialam::test
