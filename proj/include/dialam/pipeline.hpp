#pragma once

// Two-stage inference: S-node prediction over ordered I-pairs, then YA
// prediction over contextualised candidates of the graph that includes the
// predicted S-nodes, then materialisation of an output nodeset.

#include "dialam/candidates.hpp"
#include "dialam/classifier.hpp"
#include "dialam/dataset.hpp"
#include "dialam/error.hpp"
#include "dialam/graph.hpp"
#include "dialam/remote.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dialam {

enum class Stage1Mode { TwoStep, FourLabel };

/// Where Stage 2 gets its S-nodes from: Stage 1 predictions (the real
/// pipeline) or the input's gold S-nodes (diagnosis of Stage 2 alone).
enum class SSource { Predicted, Gold };

struct PipelineConfig
{
    Stage1Mode mode = Stage1Mode::TwoStep;
    std::shared_ptr<const Classifier> step1;      // s_step1
    std::shared_ptr<const Classifier> step2;      // s_step2
    std::shared_ptr<const Classifier> four_label; // s_four
    std::shared_ptr<const Classifier> ya;         // ya
    double existence_threshold = 0.5;
    std::optional<std::size_t> window;
    SSource s_source = SSource::Predicted;
};

struct SPrediction
{
    std::string head;
    SKind kind;
    std::string tail;
    double existence = 0.0;
    double type = 0.0;

    friend bool operator==(const SPrediction&, const SPrediction&) = default;
};

struct YaPrediction
{
    std::string anchor;
    NodeKind anchor_kind;
    std::string target;
    NodeKind target_kind;
    YaLabel label;
    double score = 0.0;

    friend bool operator==(const YaPrediction&, const YaPrediction&) = default;
};

namespace detail {

inline void require(const std::shared_ptr<const Classifier>& c, TaskName task, const char* role)
{
    if (!c)
        throw Error(ErrorCode::BadConfig, role, "no backend configured");
    if (c->task().name != task)
        throw Error(ErrorCode::BadConfig, role,
                    "backend serves " + std::string(to_string(c->task().name)) + ", expected "
                        + std::string(to_string(task)));
}

/// Classify, turning any backend failure into BackendFailure named after the
/// stage and checking the shape of what came back.
inline std::vector<LabelDistribution> run_backend(const Classifier& c, std::span<const PairInstance> batch,
                                                  const char* stage)
{
    if (batch.empty())
        return {};
    std::vector<LabelDistribution> out;
    try {
        out = c.classify(batch);
    } catch (const std::exception& e) {
        throw Error(ErrorCode::BackendFailure, stage, e.what());
    }
    if (out.size() != batch.size())
        throw Error(ErrorCode::BackendFailure, stage, "backend returned the wrong number of predictions");
    for (const auto& d : out)
        if (d.scores.size() != c.task().size())
            throw Error(ErrorCode::BackendFailure, stage, "backend returned a row of the wrong width");
    return out;
}

} // namespace detail

/// Stage 1. two_step: every ordered I-pair is scored by the existence model;
/// pairs whose P(true) reaches the threshold get the argmax kind of the type
/// model. four_label: one pass, pairs whose argmax is not None are kept.
/// Predictions follow pair enumeration order.
inline std::vector<SPrediction> predict_s_nodes(const Nodeset& ns, const PipelineConfig& cfg)
{
    const auto pairs = gen_i_pairs(ns);
    if (pairs.empty())
        return {};
    std::vector<PairInstance> instances;
    instances.reserve(pairs.size());
    for (const auto& [h, t] : pairs)
        instances.push_back(detail::plain_pair(ns, h, t));

    std::vector<SPrediction> out;
    if (cfg.mode == Stage1Mode::FourLabel) {
        detail::require(cfg.four_label, TaskName::SFour, "four_label");
        const auto dists = detail::run_backend(*cfg.four_label, instances, "stage1.four_label");
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            const auto best = dists[i].argmax();
            if (best == 0)
                continue;
            out.push_back({pairs[i].first, kSKinds[best - 1], pairs[i].second, 1.0 - dists[i].scores[0],
                           dists[i].scores[best]});
        }
        return out;
    }

    detail::require(cfg.step1, TaskName::SStep1, "step1");
    detail::require(cfg.step2, TaskName::SStep2, "step2");
    const auto exist = detail::run_backend(*cfg.step1, instances, "stage1.step1");
    std::vector<std::size_t> passed;
    std::vector<PairInstance> second;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (exist[i].scores[1] >= cfg.existence_threshold) {
            passed.push_back(i);
            second.push_back(instances[i]);
        }
    }
    const auto types = detail::run_backend(*cfg.step2, second, "stage1.step2");
    for (std::size_t j = 0; j < passed.size(); ++j) {
        const auto i = passed[j];
        const auto best = types[j].argmax();
        out.push_back({pairs[i].first, kSKinds[best], pairs[i].second, exist[i].scores[1], types[j].scores[best]});
    }
    return out;
}

struct YaOutcome
{
    std::vector<YaPrediction> predictions;
    std::size_t coerced = 0; // argmax illegal for the kind pair, replaced
    std::size_t dropped = 0; // no legal label for the kind pair
};

/// Stage 2. Each candidate is contextualised and classified; a non-None
/// argmax becomes a prediction. When that label is illegal for the
/// candidate's (anchor, target) kinds, the legal label with the highest score
/// is used instead; with no legal label the candidate is dropped.
inline YaOutcome predict_ya_detailed(const Nodeset& ns, std::span<const YaCandidate> candidates,
                                     const PipelineConfig& cfg)
{
    YaOutcome out;
    if (candidates.empty())
        return out;
    detail::require(cfg.ya, TaskName::Ya, "ya");
    std::vector<PairInstance> instances;
    instances.reserve(candidates.size());
    for (const auto& c : candidates)
        instances.push_back(contextualize(ns, c.anchor, c.target));
    const auto dists = detail::run_backend(*cfg.ya, instances, "stage2.ya");

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        const auto best = dists[i].argmax();
        if (best == 0)
            continue;
        const auto& anchor = *ns.node(candidates[i].anchor);
        const auto& target = *ns.node(candidates[i].target);
        auto label = static_cast<YaLabel>(best);
        double score = dists[i].scores[best];
        if (!is_legal_ya(label, anchor.kind, target.kind)) {
            const auto legal = legal_ya_labels(anchor.kind, target.kind);
            if (legal.empty()) {
                ++out.dropped;
                continue;
            }
            label = legal[0];
            for (auto l : legal)
                if (dists[i].scores[static_cast<std::size_t>(l)] > dists[i].scores[static_cast<std::size_t>(label)])
                    label = l;
            score = dists[i].scores[static_cast<std::size_t>(label)];
            ++out.coerced;
        }
        out.predictions.push_back({anchor.id, anchor.kind, target.id, target.kind, label, score});
    }
    return out;
}

inline std::vector<YaPrediction> predict_ya(const Nodeset& ns, std::span<const YaCandidate> candidates,
                                            const PipelineConfig& cfg)
{
    return predict_ya_detailed(ns, candidates, cfg).predictions;
}

namespace detail {

/// Hands out ids unused by the source nodeset: one past the largest numeric
/// id, counting up.
class IdAllocator
{
public:
    explicit IdAllocator(const Nodeset& ns)
    {
        unsigned long long top = 0;
        auto note = [&](const std::string& id) {
            m_used.insert(id);
            unsigned long long v = 0;
            auto [p, ec] = std::from_chars(id.data(), id.data() + id.size(), v);
            if (ec == std::errc{} && p == id.data() + id.size())
                top = std::max(top, v);
        };
        for (const auto& n : ns.nodes())
            note(n.id);
        for (const auto& e : ns.edges())
            note(e.id);
        m_next = top + 1;
    }

    std::string next()
    {
        for (;;) {
            auto id = std::to_string(m_next++);
            if (m_used.insert(id).second)
                return id;
        }
    }

private:
    std::set<std::string> m_used;
    unsigned long long m_next = 1;
};

inline bool keeps_edge(NodeKind from, NodeKind to, bool keep_s)
{
    if ((from == NodeKind::L && to == NodeKind::TA) || (from == NodeKind::TA && to == NodeKind::L))
        return true;
    if (keep_s)
        return (from == NodeKind::I && is_s_kind(to)) || (is_s_kind(from) && to == NodeKind::I);
    return false;
}

inline Nodeset materialize_impl(const Nodeset& ns, std::span<const SPrediction> s_preds,
                                std::span<const YaPrediction> ya_preds, bool keep_gold_s)
{
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::map<std::string, NodeKind, std::less<>> kinds;
    for (const auto& n : ns.nodes()) {
        const bool keep = n.kind == NodeKind::L || n.kind == NodeKind::I || n.kind == NodeKind::TA
            || (keep_gold_s && is_s_kind(n.kind));
        if (keep) {
            nodes.push_back(n);
            kinds.emplace(n.id, n.kind);
        }
    }
    for (std::size_t e = 0; e < ns.edges().size(); ++e)
        if (keeps_edge(ns.at(ns.source_of(e)).kind, ns.at(ns.target_of(e)).kind, keep_gold_s))
            edges.push_back(ns.edges()[e]);

    IdAllocator ids(ns);
    auto kind_of = [&](const std::string& id) -> std::optional<NodeKind> {
        auto it = kinds.find(id);
        return it == kinds.end() ? std::nullopt : std::optional(it->second);
    };

    for (const auto& p : s_preds) {
        if (kind_of(p.head) != NodeKind::I)
            throw Error(ErrorCode::UnknownReference, p.head, "S prediction head is not an I-node");
        if (kind_of(p.tail) != NodeKind::I)
            throw Error(ErrorCode::UnknownReference, p.tail, "S prediction tail is not an I-node");
        if (p.head == p.tail)
            throw Error(ErrorCode::UnknownReference, p.head, "S prediction joins a node to itself");
        Node s{ids.next(), to_node_kind(p.kind), std::string(default_s_text(p.kind)), std::nullopt, Json::object()};
        edges.push_back({ids.next(), p.head, s.id, Json::object()});
        edges.push_back({ids.next(), s.id, p.tail, Json::object()});
        kinds.emplace(s.id, s.kind);
        nodes.push_back(std::move(s));
    }
    for (const auto& p : ya_preds) {
        const auto ak = kind_of(p.anchor);
        const auto tk = kind_of(p.target);
        if (!ak || (*ak != NodeKind::L && *ak != NodeKind::TA))
            throw Error(ErrorCode::UnknownReference, p.anchor, "YA prediction anchor is not an L or TA node");
        if (!tk || (*tk != NodeKind::I && !is_s_kind(*tk)))
            throw Error(ErrorCode::UnknownReference, p.target, "YA prediction target is not an I or S node");
        if (p.label == YaLabel::None || !is_legal_ya(p.label, *ak, *tk))
            throw Error(ErrorCode::KindMismatch, p.anchor,
                        std::string(to_string(p.label)) + " cannot join " + std::string(to_string(*ak)) + " to "
                            + std::string(to_string(*tk)));
        Node ya{ids.next(), NodeKind::YA, std::string(to_string(p.label)), std::nullopt, Json::object()};
        edges.push_back({ids.next(), p.anchor, ya.id, Json::object()});
        edges.push_back({ids.next(), ya.id, p.target, Json::object()});
        nodes.push_back(std::move(ya));
    }
    return Nodeset(ns.id(), std::move(nodes), std::move(edges), ns.locutions(), ns.extra());
}

} // namespace detail

/// Output nodeset: the input's L, I and TA nodes with its L-TA edges, one new
/// S-node per S prediction (head -> S -> tail) and one new YA node per YA
/// prediction (anchor -> YA -> target). New ids continue after the largest
/// numeric id of the input. YA predictions may target the S-nodes created by
/// this call; materialising the same S predictions over the same input
/// always yields the same S ids.
inline Nodeset materialize(const Nodeset& ns, std::span<const SPrediction> s_preds,
                           std::span<const YaPrediction> ya_preds)
{
    return detail::materialize_impl(ns, s_preds, ya_preds, false);
}

struct PipelineRun
{
    Nodeset output;
    std::vector<SPrediction> s_predictions;
    YaOutcome ya;
};

inline PipelineRun run_pipeline_traced(const Nodeset& ns, const PipelineConfig& cfg)
{
    PipelineRun run;
    const bool gold = cfg.s_source == SSource::Gold;
    if (!gold)
        run.s_predictions = predict_s_nodes(ns, cfg);
    const auto with_s = detail::materialize_impl(ns, run.s_predictions, {}, gold);
    const auto candidates = gen_ya_candidates(with_s, cfg.window);
    run.ya = predict_ya_detailed(with_s, candidates, cfg);
    run.output = detail::materialize_impl(ns, run.s_predictions, run.ya.predictions, gold);
    return run;
}

inline Nodeset run_pipeline(const Nodeset& ns, const PipelineConfig& cfg)
{
    return run_pipeline_traced(ns, cfg).output;
}

// ---------------------------------------------------------------------------
// Configuration files
//
// Line-oriented "key = value"; blank lines and lines starting with '#' are
// ignored. Keys:
//
//   mode        two_step | four_label            (default two_step)
//   step1       backend for s_step1              (two_step)
//   step2       backend for s_step2              (two_step)
//   four_label  backend for s_four               (four_label)
//   ya          backend for ya                   (required)
//   threshold   existence threshold in (0, 1)    (default 0.5)
//   window      max node-order distance for (L,I) and (TA,I) candidates
//   s_source    predicted | gold                 (default predicted)
//
// A backend is "builtin:<model path>" (relative paths resolve against the
// config file's directory) or "remote:<http url>". "remote:" with no URL
// takes the DIALAM_ENDPOINT environment variable.

inline constexpr const char* kEndpointEnv = "DIALAM_ENDPOINT";

struct BackendRef
{
    enum class Kind { Builtin, Remote } kind;
    std::string location;

    friend bool operator==(const BackendRef&, const BackendRef&) = default;
};

struct PipelineSpec
{
    Stage1Mode mode = Stage1Mode::TwoStep;
    std::optional<BackendRef> step1, step2, four_label, ya;
    double existence_threshold = 0.5;
    std::optional<std::size_t> window;
    SSource s_source = SSource::Predicted;
};

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline BackendRef parse_backend_ref(const std::string& value, const std::filesystem::path& base, const char* key)
{
    if (value.rfind("builtin:", 0) == 0) {
        std::filesystem::path p = value.substr(8);
        if (p.empty())
            throw Error(ErrorCode::BadConfig, key, "builtin backend needs a model path");
        if (p.is_relative())
            p = base / p;
        return {BackendRef::Kind::Builtin, p.string()};
    }
    if (value.rfind("remote:", 0) == 0) {
        std::string url = value.substr(7);
        if (url.empty()) {
            const char* env = std::getenv(kEndpointEnv);
            if (!env || !*env)
                throw Error(ErrorCode::BadConfig, key, std::string("no URL and ") + kEndpointEnv + " is unset");
            url = env;
        }
        (void)Endpoint::parse(url);
        return {BackendRef::Kind::Remote, url};
    }
    throw Error(ErrorCode::BadConfig, key, "backend must be builtin:<path> or remote:<url>");
}

} // namespace detail

inline PipelineSpec parse_pipeline_spec(std::string_view text, const std::filesystem::path& base = ".")
{
    PipelineSpec spec;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::set<std::string> seen;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = detail::trim(line);
        if (body.empty() || body[0] == '#')
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw Error(ErrorCode::BadConfig, "line " + std::to_string(line_no), "expected key = value");
        const auto key = detail::trim(std::string_view(body).substr(0, eq));
        const auto value = detail::trim(std::string_view(body).substr(eq + 1));
        if (!seen.insert(key).second)
            throw Error(ErrorCode::BadConfig, key, "key given twice");
        if (key == "mode") {
            if (value == "two_step")
                spec.mode = Stage1Mode::TwoStep;
            else if (value == "four_label")
                spec.mode = Stage1Mode::FourLabel;
            else
                throw Error(ErrorCode::BadConfig, key, "mode must be two_step or four_label");
        } else if (key == "step1") {
            spec.step1 = detail::parse_backend_ref(value, base, "step1");
        } else if (key == "step2") {
            spec.step2 = detail::parse_backend_ref(value, base, "step2");
        } else if (key == "four_label") {
            spec.four_label = detail::parse_backend_ref(value, base, "four_label");
        } else if (key == "ya") {
            spec.ya = detail::parse_backend_ref(value, base, "ya");
        } else if (key == "threshold") {
            char* end = nullptr;
            const double t = std::strtod(value.c_str(), &end);
            if (value.empty() || *end != '\0' || !(t > 0.0 && t < 1.0))
                throw Error(ErrorCode::BadConfig, key, "threshold must be a number in (0, 1)");
            spec.existence_threshold = t;
        } else if (key == "window") {
            std::size_t w = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), w);
            if (value.empty() || ec != std::errc{} || p != value.data() + value.size())
                throw Error(ErrorCode::BadConfig, key, "window must be a non-negative integer");
            spec.window = w;
        } else if (key == "s_source") {
            if (value == "predicted")
                spec.s_source = SSource::Predicted;
            else if (value == "gold")
                spec.s_source = SSource::Gold;
            else
                throw Error(ErrorCode::BadConfig, key, "s_source must be predicted or gold");
        } else {
            throw Error(ErrorCode::BadConfig, key, "unknown key");
        }
    }
    if (!spec.ya)
        throw Error(ErrorCode::BadConfig, "ya", "no YA backend configured");
    if (spec.s_source == SSource::Predicted) {
        if (spec.mode == Stage1Mode::TwoStep && (!spec.step1 || !spec.step2))
            throw Error(ErrorCode::BadConfig, "mode", "two_step needs step1 and step2 backends");
        if (spec.mode == Stage1Mode::FourLabel && !spec.four_label)
            throw Error(ErrorCode::BadConfig, "mode", "four_label needs a four_label backend");
    }
    return spec;
}

inline PipelineSpec load_pipeline_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::IoFailure, path.string(), "cannot open pipeline config");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_pipeline_spec(ss.str(), path.parent_path().empty() ? "." : path.parent_path());
}

inline std::shared_ptr<const Classifier> open_backend(const BackendRef& ref, TaskName task)
{
    if (ref.kind == BackendRef::Kind::Remote)
        return std::make_shared<RemoteClassifier>(Endpoint::parse(ref.location), task);
    auto c = LinearClassifier::load(ref.location);
    if (c->task().name != task)
        throw Error(ErrorCode::BadConfig, ref.location,
                    "model is for " + std::string(to_string(c->task().name)) + ", expected "
                        + std::string(to_string(task)));
    return c;
}

inline PipelineConfig instantiate(const PipelineSpec& spec)
{
    PipelineConfig cfg;
    cfg.mode = spec.mode;
    cfg.existence_threshold = spec.existence_threshold;
    cfg.window = spec.window;
    cfg.s_source = spec.s_source;
    if (spec.step1)
        cfg.step1 = open_backend(*spec.step1, TaskName::SStep1);
    if (spec.step2)
        cfg.step2 = open_backend(*spec.step2, TaskName::SStep2);
    if (spec.four_label)
        cfg.four_label = open_backend(*spec.four_label, TaskName::SFour);
    cfg.ya = open_backend(*spec.ya, TaskName::Ya);
    return cfg;
}

} // namespace dialam
