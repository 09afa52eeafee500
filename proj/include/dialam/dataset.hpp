#pragma once

// Supervised examples for the three classifiers, with negative sampling,
// plus corpus splitting and per-relation statistics.

#include "dialam/candidates.hpp"
#include "dialam/error.hpp"
#include "dialam/graph.hpp"
#include "dialam/rng.hpp"
#include "dialam/task.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace dialam {

/// Universal classifier input. Stage-1 instances have empty contexts.
struct PairInstance
{
    std::string head_text;
    std::string head_context;
    std::string tail_text;
    std::string tail_context;

    friend bool operator==(const PairInstance&, const PairInstance&) = default;
};

template <typename Label>
struct Example
{
    PairInstance instance;
    Label label;
    std::string head_id;
    std::string tail_id;

    friend bool operator==(const Example&, const Example&) = default;
};

using Stage1Example = Example<bool>;
using Stage2Example = Example<SKind>;
using YaExample = Example<YaLabel>;
/// Four-label direct model example; nullopt is the None label.
using FourLabelExample = Example<std::optional<SKind>>;

/// Non-negative rational sampling ratio, e.g. 1 or 3/2. Parsed exactly from
/// decimal strings so that floor(ratio * n) has no rounding surprises.
class Ratio
{
public:
    constexpr Ratio() = default;
    constexpr Ratio(std::uint64_t num, std::uint64_t den = 1) : m_num(num), m_den(den == 0 ? 1 : den) {}

    static std::optional<Ratio> parse(std::string_view s)
    {
        const auto dot = s.find('.');
        const auto whole = s.substr(0, dot);
        const auto frac = dot == std::string_view::npos ? std::string_view{} : s.substr(dot + 1);
        if ((whole.empty() && frac.empty()) || frac.size() > 9)
            return std::nullopt;
        std::uint64_t w = 0, f = 0, den = 1;
        if (!whole.empty()) {
            auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
            if (ec != std::errc{} || p != whole.data() + whole.size())
                return std::nullopt;
        }
        if (!frac.empty()) {
            auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), f);
            if (ec != std::errc{} || p != frac.data() + frac.size())
                return std::nullopt;
            for (std::size_t i = 0; i < frac.size(); ++i)
                den *= 10;
        }
        if (w > (UINT64_MAX / den) - 1)
            return std::nullopt;
        return Ratio(w * den + f, den);
    }

    constexpr std::uint64_t num() const noexcept { return m_num; }
    constexpr std::uint64_t den() const noexcept { return m_den; }

    /// floor(ratio * n)
    constexpr std::size_t of(std::size_t n) const noexcept
    {
        return static_cast<std::size_t>((static_cast<unsigned __int128>(m_num) * n) / m_den);
    }

    std::string str() const
    {
        std::string out = std::to_string(m_num / m_den);
        if (m_num % m_den) {
            std::string frac = std::to_string(m_num % m_den);
            std::uint64_t d = m_den;
            std::size_t digits = 0;
            while (d > 1) {
                d /= 10;
                ++digits;
            }
            frac.insert(0, digits - frac.size(), '0');
            while (!frac.empty() && frac.back() == '0')
                frac.pop_back();
            out += "." + frac;
        }
        return out;
    }

private:
    std::uint64_t m_num = 1;
    std::uint64_t m_den = 1;
};

inline constexpr Ratio kDefaultNegRatio{1, 1};

template <typename E>
struct BuildResult
{
    std::vector<E> examples;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::size_t negatives_requested = 0;
    bool shortfall = false; // sampling pool smaller than requested
    std::vector<std::string> skipped; // gold YA ids with unknown or illegal labels

    friend bool operator==(const BuildResult&, const BuildResult&) = default;
};

/// Every ordered pair of distinct I-nodes, head-major in node order.
inline std::vector<std::pair<std::string, std::string>> gen_i_pairs(const Nodeset& ns)
{
    std::vector<const Node*> props;
    for (const auto& n : ns.nodes())
        if (n.kind == NodeKind::I)
            props.push_back(&n);
    std::vector<std::pair<std::string, std::string>> out;
    out.reserve(props.size() * (props.size() ? props.size() - 1 : 0));
    for (const auto* h : props)
        for (const auto* t : props)
            if (h != t)
                out.emplace_back(h->id, t->id);
    return out;
}

/// A directed premise -> conclusion pair induced by an S-node.
struct SPair
{
    std::string head;
    std::string tail;
    SKind kind;
    std::string s_id;
};

/// Count rule for S-node relations: each S-node contributes every
/// (premise, conclusion) pair, or exactly one record when `per_node` is set.
enum class SCounting { PremiseConclusionPairs, PerNode };

namespace detail {

inline std::vector<SPair> s_pairs_of(std::span<const SNodeStructure> structures)
{
    std::vector<SPair> out;
    for (const auto& s : structures)
        for (const auto& p : s.premises)
            for (const auto& c : s.conclusions)
                if (p != c)
                    out.push_back({p, c, s.kind, s.id});
    return out;
}

inline PairInstance plain_pair(const Nodeset& ns, const std::string& head, const std::string& tail)
{
    return {ns.node(head)->text, "", ns.node(tail)->text, ""};
}

} // namespace detail

/// Directed (premise, conclusion) pairs of every S-node, in node then edge
/// order. Throws InvalidStructure when an S-node lacks premise or conclusion.
inline std::vector<SPair> s_pairs(const Nodeset& ns)
{
    const auto structures = s_node_structures(ns);
    return detail::s_pairs_of(structures);
}

namespace detail {

template <typename E, typename Positive, typename Negative>
BuildResult<E> sample_negatives(BuildResult<E> result, std::vector<Positive> pool, Ratio ratio, std::uint64_t seed,
                                Negative make_negative)
{
    result.negatives_requested = ratio.of(result.positives);
    SplitMix64 rng(seed);
    const auto picked = sample_indices(pool.size(), result.negatives_requested, rng);
    result.shortfall = pool.size() < result.negatives_requested;
    result.negatives = picked.size();
    for (auto i : picked)
        result.examples.push_back(make_negative(pool[i]));
    return result;
}

} // namespace detail

/// Stage-1 step-1 examples: every S-induced directed pair labelled true,
/// followed by floor(ratio * positives) unconnected ordered I-pairs labelled
/// false, sampled without replacement from gen_i_pairs order and emitted in
/// that order.
inline BuildResult<Stage1Example> build_stage1(const Nodeset& ns, Ratio neg_ratio = kDefaultNegRatio,
                                               std::uint64_t seed = 0)
{
    const auto positives = s_pairs(ns);
    BuildResult<Stage1Example> result;
    std::set<std::pair<std::string, std::string>> connected;
    for (const auto& p : positives) {
        connected.emplace(p.head, p.tail);
        result.examples.push_back({detail::plain_pair(ns, p.head, p.tail), true, p.head, p.tail});
    }
    result.positives = result.examples.size();

    std::vector<std::pair<std::string, std::string>> pool;
    for (auto& pair : gen_i_pairs(ns))
        if (!connected.contains(pair))
            pool.push_back(std::move(pair));
    return detail::sample_negatives(std::move(result), std::move(pool), neg_ratio, seed, [&](const auto& pair) {
        return Stage1Example{detail::plain_pair(ns, pair.first, pair.second), false, pair.first, pair.second};
    });
}

/// Stage-1 step-2 examples: one per S-induced directed pair, labelled by kind.
inline std::vector<Stage2Example> build_stage2(const Nodeset& ns)
{
    std::vector<Stage2Example> out;
    for (const auto& p : s_pairs(ns))
        out.push_back({detail::plain_pair(ns, p.head, p.tail), p.kind, p.head, p.tail});
    return out;
}

/// Four-label direct examples: the stage-2 positives plus stage-1 style
/// negatives labelled None.
inline BuildResult<FourLabelExample> build_four_label(const Nodeset& ns, Ratio neg_ratio = kDefaultNegRatio,
                                                      std::uint64_t seed = 0)
{
    const auto positives = s_pairs(ns);
    BuildResult<FourLabelExample> result;
    std::set<std::pair<std::string, std::string>> connected;
    for (const auto& p : positives) {
        connected.emplace(p.head, p.tail);
        result.examples.push_back({detail::plain_pair(ns, p.head, p.tail), p.kind, p.head, p.tail});
    }
    result.positives = result.examples.size();
    std::vector<std::pair<std::string, std::string>> pool;
    for (auto& pair : gen_i_pairs(ns))
        if (!connected.contains(pair))
            pool.push_back(std::move(pair));
    return detail::sample_negatives(std::move(result), std::move(pool), neg_ratio, seed, [&](const auto& pair) {
        return FourLabelExample{detail::plain_pair(ns, pair.first, pair.second), std::nullopt, pair.first,
                                pair.second};
    });
}

namespace detail {

inline std::string join_context(const TaContext& c)
{
    if (c.before.empty())
        return c.after;
    if (c.after.empty())
        return c.before;
    return c.before + std::string(kContextSeparator) + c.after;
}

} // namespace detail

/// Classifier input for an (anchor, target) candidate.
///   head: the anchor's text; for a TA anchor the context is the surrounding
///         locutions, "before || after".
///   tail: the target's text; for an S-node target the context is its
///         premise and conclusion texts joined with " || ".
/// Missing neighbours contribute nothing to a context rather than failing,
/// since candidates are also built on predicted graphs.
inline PairInstance contextualize(const Nodeset& ns, std::string_view anchor_id, std::string_view target_id)
{
    const auto a = ns.find(anchor_id);
    const auto t = ns.find(target_id);
    if (a == Nodeset::npos)
        throw Error(ErrorCode::KindMismatch, std::string(anchor_id), "anchor is not a node");
    if (t == Nodeset::npos)
        throw Error(ErrorCode::KindMismatch, std::string(target_id), "target is not a node");
    const auto& anchor = ns.at(a);
    const auto& target = ns.at(t);
    if (anchor.kind != NodeKind::L && anchor.kind != NodeKind::TA)
        throw Error(ErrorCode::KindMismatch, anchor.id, "anchor must be an L or TA node");
    if (target.kind != NodeKind::I && !is_s_kind(target.kind))
        throw Error(ErrorCode::KindMismatch, target.id, "target must be an I, RA, CA or MA node");

    PairInstance inst{anchor.text, "", target.text, ""};
    if (anchor.kind == NodeKind::TA)
        inst.head_context = detail::join_context(detail::ta_context_at(ns, a));
    if (is_s_kind(target.kind)) {
        const auto texts = detail::s_context_at(ns, t);
        inst.tail_context = join_texts(texts);
    }
    return inst;
}

/// Stage-2 YA examples: one per gold anchoring (context built by
/// contextualize), then floor(ratio * positives) None examples sampled from
/// gen_ya_candidates(ns) minus the gold (anchor, target) pairs. Gold YA nodes
/// whose text is not a YA label, or whose label is illegal for the endpoint
/// kinds, are skipped and listed in `skipped`.
inline BuildResult<YaExample> build_ya(const Nodeset& ns, Ratio neg_ratio = kDefaultNegRatio, std::uint64_t seed = 0)
{
    (void)s_node_structures(ns); // V1 precondition
    BuildResult<YaExample> result;
    std::set<YaCandidate> gold;
    for (const auto& a : ya_anchorings(ns)) {
        gold.insert({a.anchor_id, a.target_id});
        const auto label = parse_ya_label(a.label);
        if (!label || !is_legal_ya(*label, a.anchor_kind, a.target_kind)) {
            result.skipped.push_back(a.ya_id);
            continue;
        }
        result.examples.push_back({contextualize(ns, a.anchor_id, a.target_id), *label, a.anchor_id, a.target_id});
    }
    result.positives = result.examples.size();

    std::vector<YaCandidate> pool;
    for (auto& c : gen_ya_candidates(ns))
        if (!gold.contains(c))
            pool.push_back(std::move(c));
    return detail::sample_negatives(std::move(result), std::move(pool), neg_ratio, seed, [&](const YaCandidate& c) {
        return YaExample{contextualize(ns, c.anchor, c.target), YaLabel::None, c.anchor, c.target};
    });
}

// ---------------------------------------------------------------------------
// Task-neutral records, as written to example files

struct ExampleRecord
{
    PairInstance instance;
    std::string label;
    std::string nodeset_id;
    std::string head_id;
    std::string tail_id;

    friend bool operator==(const ExampleRecord&, const ExampleRecord&) = default;
};

inline std::string label_name(bool l) { return l ? "true" : "false"; }
inline std::string label_name(SKind k) { return std::string(to_string(k)); }
inline std::string label_name(YaLabel l) { return std::string(to_string(l)); }
inline std::string label_name(const std::optional<SKind>& k) { return k ? label_name(*k) : "None"; }

template <typename Label>
std::vector<ExampleRecord> to_records(std::span<const Example<Label>> examples, const std::string& nodeset_id)
{
    std::vector<ExampleRecord> out;
    out.reserve(examples.size());
    for (const auto& e : examples)
        out.push_back({e.instance, label_name(e.label), nodeset_id, e.head_id, e.tail_id});
    return out;
}

/// One JSON object per line: head, head_context, tail, tail_context, label,
/// nodeset_id, head_id, tail_id.
inline std::string record_to_jsonl(const ExampleRecord& r)
{
    nlohmann::ordered_json j;
    j["head"] = r.instance.head_text;
    j["head_context"] = r.instance.head_context;
    j["tail"] = r.instance.tail_text;
    j["tail_context"] = r.instance.tail_context;
    j["label"] = r.label;
    j["nodeset_id"] = r.nodeset_id;
    j["head_id"] = r.head_id;
    j["tail_id"] = r.tail_id;
    return j.dump() + "\n";
}

inline ExampleRecord record_from_json(std::string_view line)
{
    Json j;
    try {
        j = Json::parse(line);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::MalformedDocument, "", e.what());
    }
    auto str = [&](const char* key, bool required) -> std::string {
        auto it = j.find(key);
        if (it == j.end() || it->is_null()) {
            if (required)
                throw Error(ErrorCode::MalformedDocument, key, "example record lacks field");
            return {};
        }
        if (!it->is_string())
            throw Error(ErrorCode::MalformedDocument, key, "example field is not a string");
        return it->get<std::string>();
    };
    return {{str("head", true), str("head_context", false), str("tail", true), str("tail_context", false)},
            str("label", true),
            str("nodeset_id", false),
            str("head_id", false),
            str("tail_id", false)};
}

inline std::vector<ExampleRecord> parse_jsonl(std::string_view text)
{
    std::vector<ExampleRecord> out;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        ++line_no;
        auto line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;
        try {
            out.push_back(record_from_json(line));
        } catch (const Error& e) {
            throw Error(e.code(), "line " + std::to_string(line_no), e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Splitting and statistics

struct RandomEval
{
    double fraction;
    std::uint64_t seed;
};

using EvalSpec = std::variant<std::vector<std::string>, RandomEval>;

struct Split
{
    std::vector<std::string> train;
    std::vector<std::string> eval;

    friend bool operator==(const Split&, const Split&) = default;
};

/// Partition `ids` into train and eval. An explicit list is taken as the eval
/// set verbatim (in its own order); a fraction draws round(fraction * n) ids
/// without replacement. Train keeps the input order, as does a sampled eval
/// set.
inline Split split_corpus(std::span<const std::string> ids, const EvalSpec& eval_spec)
{
    std::set<std::string_view> all;
    for (const auto& id : ids)
        if (!all.insert(id).second)
            throw Error(ErrorCode::DuplicateId, id, "nodeset id listed twice");

    Split out;
    std::set<std::string_view> chosen;
    if (const auto* list = std::get_if<std::vector<std::string>>(&eval_spec)) {
        for (const auto& id : *list) {
            if (!all.contains(id))
                throw Error(ErrorCode::UnknownEvalId, id, "eval id is not in the corpus");
            if (!chosen.insert(id).second)
                throw Error(ErrorCode::DuplicateId, id, "eval id listed twice");
        }
        out.eval = *list;
    } else {
        const auto& r = std::get<RandomEval>(eval_spec);
        if (!(r.fraction > 0.0 && r.fraction < 1.0))
            throw Error(ErrorCode::BadFraction, std::to_string(r.fraction), "eval fraction must lie in (0, 1)");
        const auto k = static_cast<std::size_t>(std::llround(r.fraction * static_cast<double>(ids.size())));
        SplitMix64 rng(r.seed);
        for (auto i : sample_indices(ids.size(), k, rng)) {
            chosen.insert(ids[i]);
            out.eval.push_back(ids[i]);
        }
    }
    for (const auto& id : ids)
        if (!chosen.contains(id))
            out.train.push_back(id);
    return out;
}

struct CorpusStats
{
    std::size_t ra = 0;
    std::size_t ca = 0;
    std::size_t ma = 0;
    std::size_t ya = 0;
    std::size_t nodesets = 0;

    CorpusStats& operator+=(const CorpusStats& o)
    {
        ra += o.ra;
        ca += o.ca;
        ma += o.ma;
        ya += o.ya;
        nodesets += o.nodesets;
        return *this;
    }

    friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// Relation counts of one nodeset. Malformed S and YA nodes count what they
/// can: an S-node without premises contributes no pairs, a YA node without a
/// unique anchor and target is not an anchoring.
inline CorpusStats nodeset_stats(const Nodeset& ns, SCounting counting = SCounting::PremiseConclusionPairs)
{
    CorpusStats st;
    st.nodesets = 1;
    const auto structures = s_node_structures_lenient(ns);
    auto bump = [&](SKind k, std::size_t n) {
        switch (k) {
        case SKind::RA: st.ra += n; break;
        case SKind::CA: st.ca += n; break;
        case SKind::MA: st.ma += n; break;
        }
    };
    if (counting == SCounting::PerNode) {
        for (const auto& s : structures)
            bump(s.kind, 1);
    } else {
        for (const auto& p : detail::s_pairs_of(structures))
            bump(p.kind, 1);
    }
    st.ya = ya_anchorings_lenient(ns).size();
    return st;
}

template <typename Range>
CorpusStats corpus_stats(const Range& nodesets, SCounting counting = SCounting::PremiseConclusionPairs)
{
    CorpusStats total;
    for (const Nodeset& ns : nodesets)
        total += nodeset_stats(ns, counting);
    return total;
}

} // namespace dialam
