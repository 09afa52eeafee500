#pragma once

// ARI and ILO evaluation. Both tasks reduce a (gold, predicted) nodeset pair
// to parallel label sequences over a fixed pair universe, accumulate those
// into confusion matrices across the corpus, and report per-class and
// averaged precision / recall / F1:
//
//   General  averages over every class, None included;
//   Focused  averages over every class except None.
//
// Averaging is macro (unweighted mean of per-class values) unless micro is
// requested. Empty denominators give 0.

#include "dialam/candidates.hpp"
#include "dialam/error.hpp"
#include "dialam/graph.hpp"
#include "dialam/linear_model.hpp"
#include "dialam/pipeline.hpp"
#include "dialam/task.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace dialam {

class ConfusionMatrix
{
public:
    ConfusionMatrix() = default;
    explicit ConfusionMatrix(std::vector<std::string> labels)
        : m_labels(std::move(labels))
        , m_counts(m_labels.size() * m_labels.size(), 0)
    {}

    std::size_t size() const noexcept { return m_labels.size(); }
    const std::vector<std::string>& labels() const noexcept { return m_labels; }

    /// rows gold, columns predicted
    std::size_t at(std::size_t gold, std::size_t pred) const { return m_counts[gold * size() + pred]; }
    std::size_t& at(std::size_t gold, std::size_t pred) { return m_counts[gold * size() + pred]; }

    void add(std::size_t gold, std::size_t pred, std::size_t n = 1) { at(gold, pred) += n; }

    std::size_t row_sum(std::size_t k) const
    {
        std::size_t s = 0;
        for (std::size_t j = 0; j < size(); ++j)
            s += at(k, j);
        return s;
    }

    std::size_t col_sum(std::size_t k) const
    {
        std::size_t s = 0;
        for (std::size_t i = 0; i < size(); ++i)
            s += at(i, k);
        return s;
    }

    std::size_t total() const
    {
        std::size_t s = 0;
        for (auto c : m_counts)
            s += c;
        return s;
    }

    ConfusionMatrix& operator+=(const ConfusionMatrix& o)
    {
        if (o.m_labels != m_labels)
            throw Error(ErrorCode::NodeMismatch, "", "cannot merge confusion matrices over different labels");
        for (std::size_t i = 0; i < m_counts.size(); ++i)
            m_counts[i] += o.m_counts[i];
        return *this;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    std::vector<std::string> m_labels;
    std::vector<std::size_t> m_counts;
};

struct Prf
{
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    friend bool operator==(const Prf&, const Prf&) = default;
};

struct ClassMetrics
{
    std::string label;
    Prf prf;
    std::size_t support = 0;   // gold count
    std::size_t predicted = 0; // predicted count
};

enum class Averaging { Macro, Micro };

constexpr double harmonic(double p, double r) noexcept { return (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

inline std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm)
{
    std::vector<ClassMetrics> out;
    for (std::size_t k = 0; k < cm.size(); ++k) {
        const auto tp = static_cast<double>(cm.at(k, k));
        const auto row = cm.row_sum(k);
        const auto col = cm.col_sum(k);
        const double p = col ? tp / static_cast<double>(col) : 0.0;
        const double r = row ? tp / static_cast<double>(row) : 0.0;
        out.push_back({cm.labels()[k], {p, r, harmonic(p, r)}, row, col});
    }
    return out;
}

/// Averaged precision / recall / F1 over the classes of `cm`, skipping
/// `exclude` when given.
inline Prf macro_prf(const ConfusionMatrix& cm, std::optional<std::size_t> exclude = std::nullopt,
                     Averaging mode = Averaging::Macro)
{
    Prf out;
    if (mode == Averaging::Micro) {
        std::size_t tp = 0, rows = 0, cols = 0;
        for (std::size_t k = 0; k < cm.size(); ++k) {
            if (exclude && *exclude == k)
                continue;
            tp += cm.at(k, k);
            rows += cm.row_sum(k);
            cols += cm.col_sum(k);
        }
        out.precision = cols ? static_cast<double>(tp) / static_cast<double>(cols) : 0.0;
        out.recall = rows ? static_cast<double>(tp) / static_cast<double>(rows) : 0.0;
        out.f1 = harmonic(out.precision, out.recall);
        return out;
    }
    std::size_t n = 0;
    for (const auto& c : per_class_metrics(cm)) {
        if (exclude && *exclude == n++)
            continue;
        out.precision += c.prf.precision;
        out.recall += c.prf.recall;
        out.f1 += c.prf.f1;
    }
    const std::size_t included = cm.size() - (exclude && *exclude < cm.size() ? 1 : 0);
    if (included) {
        out.precision /= static_cast<double>(included);
        out.recall /= static_cast<double>(included);
        out.f1 /= static_cast<double>(included);
    }
    return out;
}

struct MetricsReport
{
    std::string task; // "ARI" | "ILO"
    Prf general;
    Prf focused;
    std::vector<ClassMetrics> per_class;
    ConfusionMatrix confusion;
    std::vector<std::string> warnings;
};

/// Report of a confusion matrix whose class 0 is None.
inline MetricsReport make_report(std::string task, ConfusionMatrix cm, std::vector<std::string> warnings = {},
                                 Averaging mode = Averaging::Macro)
{
    MetricsReport r;
    r.task = std::move(task);
    r.general = macro_prf(cm, std::nullopt, mode);
    r.focused = macro_prf(cm, std::size_t{0}, mode);
    r.per_class = per_class_metrics(cm);
    r.confusion = std::move(cm);
    r.warnings = std::move(warnings);
    return r;
}

/// Parallel gold / predicted label indices over a pair universe.
struct PairLabels
{
    std::vector<std::size_t> gold;
    std::vector<std::size_t> pred;
    std::vector<std::string> warnings;

    ConfusionMatrix confusion(std::vector<std::string> labels) const
    {
        ConfusionMatrix cm(std::move(labels));
        for (std::size_t i = 0; i < gold.size(); ++i)
            cm.add(gold[i], pred[i]);
        return cm;
    }
};

inline const std::vector<std::string>& ari_labels()
{
    static const std::vector<std::string> labels = task_spec(TaskName::SFour).labels;
    return labels;
}

inline const std::vector<std::string>& ilo_labels()
{
    static const std::vector<std::string> labels = task_spec(TaskName::Ya).labels;
    return labels;
}

namespace detail {

inline void require_same_nodes(const Nodeset& gold, const Nodeset& pred, std::initializer_list<NodeKind> kinds)
{
    auto collect = [&](const Nodeset& ns) {
        std::set<std::pair<std::string, NodeKind>> s;
        for (const auto& n : ns.nodes())
            if (std::find(kinds.begin(), kinds.end(), n.kind) != kinds.end())
                s.emplace(n.id, n.kind);
        return s;
    };
    const auto g = collect(gold);
    const auto p = collect(pred);
    if (g == p)
        return;
    for (const auto& x : p)
        if (!g.contains(x))
            throw Error(ErrorCode::NodeMismatch, x.first, "predicted nodeset " + pred.id() + " has a node gold lacks");
    for (const auto& x : g)
        if (!p.contains(x))
            throw Error(ErrorCode::NodeMismatch, x.first, "predicted nodeset " + pred.id() + " lacks a gold node");
}

/// Directed I-pair -> S label index (1 RA, 2 CA, 3 MA). Several S-nodes on
/// one pair resolve to the lexicographically smallest kind name.
inline std::map<std::pair<std::string, std::string>, std::size_t> s_pair_labels(const Nodeset& ns,
                                                                                std::vector<std::string>& warnings,
                                                                                const char* side)
{
    std::map<std::pair<std::string, std::string>, std::size_t> out;
    for (const auto& p : s_pairs_of(s_node_structures_lenient(ns))) {
        const std::size_t label = static_cast<std::size_t>(p.kind) + 1;
        auto [it, inserted] = out.emplace(std::pair{p.head, p.tail}, label);
        if (!inserted) {
            warnings.push_back(std::string(side) + " " + ns.id() + ": several S-nodes join " + p.head + " -> " + p.tail);
            if (to_string(p.kind) < to_string(kSKinds[it->second - 1]))
                it->second = label;
        }
    }
    return out;
}

} // namespace detail

/// ARI labels: one entry per ordered pair of distinct I-nodes (gold node
/// order); each side's label is the kind of an S-node running head -> tail,
/// or None.
inline PairLabels ari_pair_labels(const Nodeset& gold, const Nodeset& pred)
{
    detail::require_same_nodes(gold, pred, {NodeKind::I});
    PairLabels out;
    const auto g = detail::s_pair_labels(gold, out.warnings, "gold");
    const auto p = detail::s_pair_labels(pred, out.warnings, "pred");
    for (const auto& pair : gen_i_pairs(gold)) {
        auto gi = g.find(pair);
        auto pi = p.find(pair);
        out.gold.push_back(gi == g.end() ? 0 : gi->second);
        out.pred.push_back(pi == p.end() ? 0 : pi->second);
    }
    return out;
}

/// Predicted S-node id -> gold S-node id. A predicted S-node matches a gold
/// S-node of the same kind whose premises and conclusions include its own;
/// matching is one-to-one, greedy in predicted node order, taking the first
/// free gold S-node in node order.
using SAlignment = std::map<std::string, std::string>;

inline SAlignment align_s_nodes(const Nodeset& gold, const Nodeset& pred)
{
    auto gs = s_node_structures_lenient(gold);
    std::vector<bool> used(gs.size(), false);
    auto covers = [](const std::vector<std::string>& big, const std::vector<std::string>& small) {
        for (const auto& x : small)
            if (std::find(big.begin(), big.end(), x) == big.end())
                return false;
        return true;
    };
    SAlignment out;
    for (const auto& p : s_node_structures_lenient(pred)) {
        if (p.premises.empty() || p.conclusions.empty())
            continue;
        for (std::size_t i = 0; i < gs.size(); ++i) {
            if (used[i] || gs[i].kind != p.kind)
                continue;
            if (covers(gs[i].premises, p.premises) && covers(gs[i].conclusions, p.conclusions)) {
                used[i] = true;
                out.emplace(p.id, gs[i].id);
                break;
            }
        }
    }
    return out;
}

/// ILO labels over the union of both sides' YA anchorings and both sides'
/// YA candidate universes. Targets are resolved into gold terms: I-nodes are
/// shared, predicted S-nodes map through `alignment`, and unaligned
/// predicted S-nodes stay distinct from every gold node.
inline PairLabels ilo_pair_labels(const Nodeset& gold, const Nodeset& pred, const SAlignment& alignment)
{
    detail::require_same_nodes(gold, pred, {NodeKind::I, NodeKind::L, NodeKind::TA});
    using Key = std::tuple<std::string, std::string, bool>; // anchor, target, predicted-only target
    PairLabels out;
    std::map<Key, std::size_t> slot;
    auto touch = [&](const Key& k) {
        auto [it, inserted] = slot.emplace(k, out.gold.size());
        if (inserted) {
            out.gold.push_back(0);
            out.pred.push_back(0);
        }
        return it->second;
    };
    auto resolve_pred = [&](const std::string& target) -> Key {
        const auto* n = pred.node(target);
        if (n && is_s_kind(n->kind)) {
            auto it = alignment.find(target);
            if (it == alignment.end())
                return {"", target, true};
            return {"", it->second, false};
        }
        return {"", target, false};
    };
    auto with_anchor = [](Key k, const std::string& anchor) {
        std::get<0>(k) = anchor;
        return k;
    };

    for (const auto& c : gen_ya_candidates(gold))
        touch({c.anchor, c.target, false});
    for (const auto& c : gen_ya_candidates(pred))
        touch(with_anchor(resolve_pred(c.target), c.anchor));

    for (const auto& a : ya_anchorings_lenient(gold))
        touch({a.anchor_id, a.target_id, false});
    for (const auto& a : ya_anchorings_lenient(pred))
        touch(with_anchor(resolve_pred(a.target_id), a.anchor_id));

    std::vector<std::size_t> gold_labels(out.gold.size(), 0), pred_labels(out.gold.size(), 0);
    auto record = [&](const Nodeset& ns, bool is_pred, std::vector<std::size_t>& labels) {
        const char* side = is_pred ? "pred " : "gold ";
        std::set<std::size_t> filled;
        for (const auto& a : ya_anchorings_lenient(ns)) {
            const auto label = parse_ya_label(a.label);
            if (!label) {
                out.warnings.push_back(side + ns.id() + ": YA " + a.ya_id + " has unknown label \"" + a.label + "\"");
                continue;
            }
            const Key k = is_pred ? with_anchor(resolve_pred(a.target_id), a.anchor_id)
                                  : Key{a.anchor_id, a.target_id, false};
            const auto i = slot.at(k);
            if (!filled.insert(i).second) {
                out.warnings.push_back(side + ns.id() + ": several YA nodes join " + a.anchor_id + " -> " + a.target_id);
                continue;
            }
            labels[i] = static_cast<std::size_t>(*label);
        }
    };
    record(gold, false, gold_labels);
    record(pred, true, pred_labels);
    out.gold = std::move(gold_labels);
    out.pred = std::move(pred_labels);
    return out;
}

inline PairLabels ilo_pair_labels(const Nodeset& gold, const Nodeset& pred)
{
    return ilo_pair_labels(gold, pred, align_s_nodes(gold, pred));
}

struct NodesetScore
{
    std::string id;
    ConfusionMatrix ari;
    ConfusionMatrix ilo;
    std::vector<std::string> warnings;
};

struct CorpusReport
{
    MetricsReport ari;
    MetricsReport ilo;
    std::vector<NodesetScore> nodesets;
};

inline NodesetScore score_nodeset(const Nodeset& gold, const Nodeset& pred)
{
    NodesetScore s;
    s.id = gold.id();
    auto ari = ari_pair_labels(gold, pred);
    auto ilo = ilo_pair_labels(gold, pred);
    s.ari = ari.confusion(ari_labels());
    s.ilo = ilo.confusion(ilo_labels());
    s.warnings = std::move(ari.warnings);
    s.warnings.insert(s.warnings.end(), ilo.warnings.begin(), ilo.warnings.end());
    return s;
}

/// Score (gold, pred) pairs; a missing prediction is scored as the gold
/// nodeset stripped of S and YA nodes, with a warning.
inline CorpusReport score_pairs(const std::vector<std::pair<Nodeset, std::optional<Nodeset>>>& pairs,
                                Averaging mode = Averaging::Macro, std::vector<std::string> warnings = {})
{
    ConfusionMatrix ari(ari_labels()), ilo(ilo_labels());
    CorpusReport report;
    for (const auto& [gold, pred] : pairs) {
        NodesetScore s;
        if (pred) {
            s = score_nodeset(gold, *pred);
        } else {
            s = score_nodeset(gold, materialize(gold, {}, {}));
            s.warnings.insert(s.warnings.begin(), std::string(to_string(ErrorCode::MissingPrediction)) + ": "
                                                      + gold.id() + " scored as predicting nothing");
        }
        ari += s.ari;
        ilo += s.ilo;
        warnings.insert(warnings.end(), s.warnings.begin(), s.warnings.end());
        report.nodesets.push_back(std::move(s));
    }
    report.ari = make_report("ARI", std::move(ari), warnings, mode);
    report.ilo = make_report("ILO", std::move(ilo), std::move(warnings), mode);
    return report;
}

/// Nodeset files of a directory (*.json), sorted by file name.
inline std::vector<std::filesystem::path> nodeset_files(const std::filesystem::path& dir)
{
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec))
        throw Error(ErrorCode::IoFailure, dir.string(), "not a directory");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

inline Nodeset load_nodeset(const std::filesystem::path& path)
{
    const auto text = detail::read_file(path);
    try {
        return parse_nodeset(text, path.stem().string());
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseFailure, path.string(), e.what());
    }
}

inline CorpusReport score_corpus(const std::filesystem::path& gold_dir, const std::filesystem::path& pred_dir,
                                 Averaging mode = Averaging::Macro)
{
    std::vector<std::pair<Nodeset, std::optional<Nodeset>>> pairs;
    std::vector<std::string> warnings;
    std::set<std::string> gold_names;
    for (const auto& g : nodeset_files(gold_dir)) {
        gold_names.insert(g.filename().string());
        const auto p = pred_dir / g.filename();
        std::optional<Nodeset> pred;
        if (std::filesystem::exists(p))
            pred = load_nodeset(p);
        pairs.emplace_back(load_nodeset(g), std::move(pred));
    }
    for (const auto& p : nodeset_files(pred_dir))
        if (!gold_names.contains(p.filename().string()))
            warnings.push_back("prediction " + p.filename().string() + " has no gold nodeset; ignored");
    return score_pairs(pairs, mode, std::move(warnings));
}

// ---------------------------------------------------------------------------
// Output

inline nlohmann::ordered_json report_json(const MetricsReport& r)
{
    auto prf = [](const Prf& p) {
        nlohmann::ordered_json j;
        j["precision"] = p.precision;
        j["recall"] = p.recall;
        j["f1"] = p.f1;
        return j;
    };
    nlohmann::ordered_json j;
    j["task"] = r.task;
    j["general"] = prf(r.general);
    j["focused"] = prf(r.focused);
    auto classes = nlohmann::ordered_json::array();
    nlohmann::ordered_json support = nlohmann::ordered_json::object();
    for (const auto& c : r.per_class) {
        nlohmann::ordered_json o{{"label", c.label}, {"precision", c.prf.precision}, {"recall", c.prf.recall},
                                   {"f1", c.prf.f1}, {"support", c.support}, {"predicted", c.predicted}};
        classes.push_back(std::move(o));
        support[c.label] = c.support;
    }
    j["per_class"] = std::move(classes);
    j["support"] = std::move(support);
    auto rows = nlohmann::ordered_json::array();
    for (std::size_t g = 0; g < r.confusion.size(); ++g) {
        auto row = nlohmann::ordered_json::array();
        for (std::size_t p = 0; p < r.confusion.size(); ++p)
            row.push_back(r.confusion.at(g, p));
        rows.push_back(std::move(row));
    }
    j["confusion"] = std::move(rows);
    j["warnings"] = r.warnings;
    return j;
}

inline std::string corpus_report_json(const CorpusReport& r)
{
    nlohmann::ordered_json j;
    j["reports"] = nlohmann::ordered_json::array({report_json(r.ari), report_json(r.ilo)});
    auto per = nlohmann::ordered_json::array();
    for (const auto& n : r.nodesets) {
        nlohmann::ordered_json o;
        o["nodeset_id"] = n.id;
        const auto ari = make_report("ARI", n.ari);
        const auto ilo = make_report("ILO", n.ilo);
        o["ari"] = {{"general_f1", ari.general.f1}, {"focused_f1", ari.focused.f1}};
        o["ilo"] = {{"general_f1", ilo.general.f1}, {"focused_f1", ilo.focused.f1}};
        per.push_back(std::move(o));
    }
    j["nodesets"] = std::move(per);
    return j.dump(2) + "\n";
}

/// Plain-text table: one row per task, General then Focused P/R/F1.
inline std::string report_table(std::span<const MetricsReport> reports)
{
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-6s| %-29s| %-29s\n", "Type", "General Metrics", "Focused Metrics");
    out += buf;
    std::snprintf(buf, sizeof buf, "%-6s| %-9s %-9s %-9s| %-9s %-9s %-9s\n", "", "precision", "recall", "f1",
                  "precision", "recall", "f1");
    out += buf;
    for (const auto& r : reports) {
        std::snprintf(buf, sizeof buf, "%-6s| %-9.3f %-9.3f %-9.3f| %-9.3f %-9.3f %-9.3f\n", r.task.c_str(),
                      r.general.precision, r.general.recall, r.general.f1, r.focused.precision, r.focused.recall,
                      r.focused.f1);
        out += buf;
    }
    return out;
}

} // namespace dialam
