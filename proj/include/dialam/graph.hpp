#pragma once

// AIF/IAT nodesets: parsing, canonical serialization, structural validation
// and the read-only queries the dataset, pipeline and scorer modules share.

#include "dialam/error.hpp"
#include "dialam/labels.hpp"

#include "json.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace dialam {

using Json = nlohmann::json;

struct Node
{
    std::string id;
    NodeKind kind = NodeKind::I;
    std::string text;
    std::optional<std::string> timestamp;
    Json extra = Json::object(); // unrecognised fields, kept for round-trip

    friend bool operator==(const Node&, const Node&) = default;
};

struct Edge
{
    std::string id;
    std::string from;
    std::string to;
    Json extra = Json::object();

    friend bool operator==(const Edge&, const Edge&) = default;
};

/// An immutable nodeset. Construction checks id uniqueness and edge
/// endpoints; structural legality is left to validate().
class Nodeset
{
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    Nodeset() = default;

    Nodeset(std::string id, std::vector<Node> nodes, std::vector<Edge> edges,
            std::optional<Json> locutions = std::nullopt, Json extra = Json::object())
        : m_id(std::move(id))
        , m_nodes(std::move(nodes))
        , m_edges(std::move(edges))
        , m_locutions(std::move(locutions))
        , m_extra(std::move(extra))
    {
        index();
    }

    const std::string& id() const noexcept { return m_id; }
    std::span<const Node> nodes() const noexcept { return m_nodes; }
    std::span<const Edge> edges() const noexcept { return m_edges; }
    const std::optional<Json>& locutions() const noexcept { return m_locutions; }
    const Json& extra() const noexcept { return m_extra; }

    std::size_t find(std::string_view node_id) const
    {
        auto it = m_lookup.find(std::string(node_id));
        return it == m_lookup.end() ? npos : it->second;
    }

    const Node* node(std::string_view node_id) const
    {
        const auto i = find(node_id);
        return i == npos ? nullptr : &m_nodes[i];
    }

    const Node& at(std::size_t i) const { return m_nodes[i]; }

    /// Edge positions entering / leaving node position `i`, in edge order.
    std::span<const std::size_t> incoming(std::size_t i) const noexcept { return m_in[i]; }
    std::span<const std::size_t> outgoing(std::size_t i) const noexcept { return m_out[i]; }

    std::size_t source_of(std::size_t edge) const noexcept { return m_edge_ends[edge].first; }
    std::size_t target_of(std::size_t edge) const noexcept { return m_edge_ends[edge].second; }

    std::size_t count(NodeKind k) const noexcept
    {
        std::size_t n = 0;
        for (const auto& node : m_nodes)
            n += node.kind == k;
        return n;
    }

    /// Structural equality over nodes, edges, locutions and extra fields.
    /// The id is file naming, not content.
    friend bool operator==(const Nodeset& a, const Nodeset& b)
    {
        return a.m_nodes == b.m_nodes && a.m_edges == b.m_edges && a.m_locutions == b.m_locutions
            && a.m_extra == b.m_extra;
    }

private:
    void index()
    {
        m_lookup.reserve(m_nodes.size());
        for (std::size_t i = 0; i < m_nodes.size(); ++i) {
            if (!m_lookup.emplace(m_nodes[i].id, i).second)
                throw Error(ErrorCode::DuplicateNodeId, m_nodes[i].id, "node id appears more than once");
        }
        m_in.assign(m_nodes.size(), {});
        m_out.assign(m_nodes.size(), {});
        m_edge_ends.reserve(m_edges.size());
        for (std::size_t e = 0; e < m_edges.size(); ++e) {
            const auto& edge = m_edges[e];
            const auto from = find(edge.from);
            if (from == npos)
                throw Error(ErrorCode::DanglingEdgeEndpoint, edge.from, "edge " + edge.id + " source is not a node");
            const auto to = find(edge.to);
            if (to == npos)
                throw Error(ErrorCode::DanglingEdgeEndpoint, edge.to, "edge " + edge.id + " target is not a node");
            if (from == to)
                throw Error(ErrorCode::MalformedDocument, edge.id, "edge is a self-loop");
            m_out[from].push_back(e);
            m_in[to].push_back(e);
            m_edge_ends.emplace_back(from, to);
        }
    }

    std::string m_id;
    std::vector<Node> m_nodes;
    std::vector<Edge> m_edges;
    std::optional<Json> m_locutions;
    Json m_extra = Json::object();

    std::unordered_map<std::string, std::size_t> m_lookup;
    std::vector<std::vector<std::size_t>> m_in;
    std::vector<std::vector<std::size_t>> m_out;
    std::vector<std::pair<std::size_t, std::size_t>> m_edge_ends;
};

namespace detail {

inline std::string id_field(const Json& obj, const char* key, std::string_view owner)
{
    auto it = obj.find(key);
    if (it == obj.end())
        throw Error(ErrorCode::MalformedDocument, std::string(owner), std::string("missing field \"") + key + "\"");
    if (it->is_string())
        return it->get<std::string>();
    // Some AIF exports write numeric ids.
    if (it->is_number_integer())
        return std::to_string(it->get<long long>());
    throw Error(ErrorCode::MalformedDocument, std::string(owner), std::string("field \"") + key + "\" is not an id");
}

inline Json without(const Json& obj, std::initializer_list<const char*> keys)
{
    Json rest = Json::object();
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (auto k : keys)
            known = known || it.key() == k;
        if (!known)
            rest[it.key()] = it.value();
    }
    return rest;
}

} // namespace detail

/// Parse a nodeset document. `id` is normally the file stem ("nodeset18321").
inline Nodeset parse_nodeset(std::string_view text, std::string id = {})
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw Error(ErrorCode::MalformedDocument, id, e.what());
    }
    if (!doc.is_object())
        throw Error(ErrorCode::MalformedDocument, id, "top level is not an object");

    auto array_field = [&](const char* key) -> const Json* {
        auto it = doc.find(key);
        if (it == doc.end() || it->is_null())
            return nullptr;
        if (!it->is_array())
            throw Error(ErrorCode::MalformedDocument, id, std::string("\"") + key + "\" is not an array");
        return &*it;
    };

    std::vector<Node> nodes;
    if (const Json* arr = array_field("nodes")) {
        nodes.reserve(arr->size());
        for (const auto& obj : *arr) {
            if (!obj.is_object())
                throw Error(ErrorCode::MalformedDocument, id, "node entry is not an object");
            Node n;
            n.id = detail::id_field(obj, "nodeID", id);
            auto type = obj.find("type");
            if (type == obj.end() || !type->is_string())
                throw Error(ErrorCode::MalformedDocument, n.id, "node has no string \"type\"");
            auto kind = parse_node_kind(type->get<std::string>());
            if (!kind)
                throw Error(ErrorCode::UnknownNodeKind, n.id, "type \"" + type->get<std::string>() + "\"");
            n.kind = *kind;
            auto txt = obj.find("text");
            if (txt != obj.end() && !txt->is_null()) {
                if (!txt->is_string())
                    throw Error(ErrorCode::MalformedDocument, n.id, "\"text\" is not a string");
                n.text = txt->get<std::string>();
            }
            if ((n.kind == NodeKind::I || n.kind == NodeKind::L) && n.text.empty())
                throw Error(ErrorCode::MalformedDocument, n.id, "I and L nodes need text");
            auto ts = obj.find("timestamp");
            if (ts != obj.end() && ts->is_string()) {
                n.timestamp = ts->get<std::string>();
                n.extra = detail::without(obj, {"nodeID", "type", "text", "timestamp"});
            } else {
                n.extra = detail::without(obj, {"nodeID", "type", "text"});
            }
            nodes.push_back(std::move(n));
        }
    }

    std::vector<Edge> edges;
    if (const Json* arr = array_field("edges")) {
        edges.reserve(arr->size());
        for (const auto& obj : *arr) {
            if (!obj.is_object())
                throw Error(ErrorCode::MalformedDocument, id, "edge entry is not an object");
            Edge e;
            e.id = detail::id_field(obj, "edgeID", id);
            e.from = detail::id_field(obj, "fromID", e.id);
            e.to = detail::id_field(obj, "toID", e.id);
            e.extra = detail::without(obj, {"edgeID", "fromID", "toID"});
            edges.push_back(std::move(e));
        }
    }

    std::optional<Json> locutions;
    if (auto it = doc.find("locutions"); it != doc.end())
        locutions = *it;

    return Nodeset(std::move(id), std::move(nodes), std::move(edges), std::move(locutions),
                   detail::without(doc, {"nodes", "edges", "locutions"}));
}

/// Canonical document: "nodes", "edges", "locutions" (when present), then any
/// other top-level fields in key order; inside records the known fields come
/// first in a fixed order. Two-space indent, trailing newline.
inline std::string serialize_nodeset(const Nodeset& ns)
{
    using Ordered = nlohmann::ordered_json;
    auto append_extra = [](Ordered& out, const Json& extra) {
        for (auto it = extra.begin(); it != extra.end(); ++it)
            out[it.key()] = Ordered::parse(it.value().dump());
    };

    Ordered doc = Ordered::object();
    Ordered nodes = Ordered::array();
    for (const auto& n : ns.nodes()) {
        Ordered o = Ordered::object();
        o["nodeID"] = n.id;
        o["text"] = n.text;
        o["type"] = to_string(n.kind);
        if (n.timestamp)
            o["timestamp"] = *n.timestamp;
        append_extra(o, n.extra);
        nodes.push_back(std::move(o));
    }
    Ordered edges = Ordered::array();
    for (const auto& e : ns.edges()) {
        Ordered o = Ordered::object();
        o["edgeID"] = e.id;
        o["fromID"] = e.from;
        o["toID"] = e.to;
        append_extra(o, e.extra);
        edges.push_back(std::move(o));
    }
    doc["nodes"] = std::move(nodes);
    doc["edges"] = std::move(edges);
    if (ns.locutions())
        doc["locutions"] = Ordered::parse(ns.locutions()->dump());
    append_extra(doc, ns.extra());
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Validation

enum class ViolationCode : std::uint8_t {
    SNodeUnanchored = 1,     // V1
    TaUnanchored = 2,        // V2
    YaArity = 3,             // V3
    YaIllegalLabel = 4,      // V4
    SameKindEdge = 5,        // V5
};

constexpr std::string_view to_string(ViolationCode c) noexcept
{
    switch (c) {
    case ViolationCode::SNodeUnanchored: return "V1";
    case ViolationCode::TaUnanchored: return "V2";
    case ViolationCode::YaArity: return "V3";
    case ViolationCode::YaIllegalLabel: return "V4";
    case ViolationCode::SameKindEdge: return "V5";
    }
    return "V?";
}

struct Violation
{
    ViolationCode code;
    std::string id; // node or edge
    std::string message;

    friend bool operator==(const Violation&, const Violation&) = default;
};

namespace detail {

inline bool has_neighbour(const Nodeset& ns, std::span<const std::size_t> edges, bool source_side, NodeKind kind)
{
    for (auto e : edges) {
        const auto other = source_side ? ns.source_of(e) : ns.target_of(e);
        if (ns.at(other).kind == kind)
            return true;
    }
    return false;
}

/// Anchor and target node positions of a YA node when it has exactly one
/// edge in each direction with admissible endpoint kinds.
inline std::optional<std::pair<std::size_t, std::size_t>> ya_ends(const Nodeset& ns, std::size_t ya)
{
    const auto in = ns.incoming(ya);
    const auto out = ns.outgoing(ya);
    if (in.size() != 1 || out.size() != 1)
        return std::nullopt;
    const auto anchor = ns.source_of(in[0]);
    const auto target = ns.target_of(out[0]);
    const auto ak = ns.at(anchor).kind;
    const auto tk = ns.at(target).kind;
    if (ak != NodeKind::L && ak != NodeKind::TA)
        return std::nullopt;
    if (tk != NodeKind::I && !is_s_kind(tk))
        return std::nullopt;
    return std::pair{anchor, target};
}

inline bool s_node_ok(const Nodeset& ns, std::size_t s)
{
    return has_neighbour(ns, ns.incoming(s), true, NodeKind::I) && has_neighbour(ns, ns.outgoing(s), false, NodeKind::I);
}

inline bool ta_node_ok(const Nodeset& ns, std::size_t ta)
{
    return has_neighbour(ns, ns.incoming(ta), true, NodeKind::L) && has_neighbour(ns, ns.outgoing(ta), false, NodeKind::L);
}

} // namespace detail

/// All structural violations, nodes first (in node order, rules V1-V4 per
/// node) then edges (V5). An empty result means the nodeset is valid.
inline std::vector<Violation> validate(const Nodeset& ns)
{
    std::vector<Violation> out;
    for (std::size_t i = 0; i < ns.nodes().size(); ++i) {
        const auto& n = ns.at(i);
        if (is_s_kind(n.kind)) {
            if (!detail::s_node_ok(ns, i))
                out.push_back({ViolationCode::SNodeUnanchored, n.id,
                               std::string(to_string(n.kind)) + " node needs an incoming and an outgoing I-node edge"});
        } else if (n.kind == NodeKind::TA) {
            if (!detail::ta_node_ok(ns, i))
                out.push_back({ViolationCode::TaUnanchored, n.id,
                               "TA node needs an incoming and an outgoing L-node edge"});
        } else if (n.kind == NodeKind::YA) {
            const auto ends = detail::ya_ends(ns, i);
            if (!ends) {
                out.push_back({ViolationCode::YaArity, n.id,
                               "YA node needs exactly one L/TA source and one I/RA/CA/MA target"});
                continue;
            }
            const auto ak = ns.at(ends->first).kind;
            const auto tk = ns.at(ends->second).kind;
            const auto label = parse_ya_label(n.text);
            if (!label || !is_legal_ya(*label, ak, tk))
                out.push_back({ViolationCode::YaIllegalLabel, n.id,
                               "\"" + n.text + "\" is not a legal label from " + std::string(to_string(ak)) + " to "
                                   + std::string(to_string(tk))});
        }
    }
    for (std::size_t e = 0; e < ns.edges().size(); ++e) {
        const auto fk = ns.at(ns.source_of(e)).kind;
        const auto tk = ns.at(ns.target_of(e)).kind;
        if (fk == tk && (fk == NodeKind::I || fk == NodeKind::L))
            out.push_back({ViolationCode::SameKindEdge, ns.edges()[e].id,
                           "edge joins two " + std::string(to_string(fk)) + " nodes"});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Structural queries

struct SNodeStructure
{
    std::string id;
    SKind kind;
    std::vector<std::string> premises;
    std::vector<std::string> conclusions;

    friend bool operator==(const SNodeStructure&, const SNodeStructure&) = default;
};

struct YaAnchoring
{
    std::string ya_id;
    std::string label; // the YA node's text
    std::string anchor_id;
    NodeKind anchor_kind;
    std::string target_id;
    NodeKind target_kind;

    friend bool operator==(const YaAnchoring&, const YaAnchoring&) = default;
};

namespace detail {

inline SNodeStructure s_structure_at(const Nodeset& ns, std::size_t i)
{
    const auto& n = ns.at(i);
    SNodeStructure s{n.id, *to_s_kind(n.kind), {}, {}};
    for (auto e : ns.incoming(i))
        if (const auto& src = ns.at(ns.source_of(e)); src.kind == NodeKind::I)
            s.premises.push_back(src.id);
    for (auto e : ns.outgoing(i))
        if (const auto& dst = ns.at(ns.target_of(e)); dst.kind == NodeKind::I)
            s.conclusions.push_back(dst.id);
    return s;
}

} // namespace detail

/// One record per RA/CA/MA node, in node order. Throws InvalidStructure on
/// the first S-node lacking an I premise or I conclusion.
inline std::vector<SNodeStructure> s_node_structures(const Nodeset& ns)
{
    std::vector<SNodeStructure> out;
    for (std::size_t i = 0; i < ns.nodes().size(); ++i) {
        if (!is_s_kind(ns.at(i).kind))
            continue;
        if (!detail::s_node_ok(ns, i))
            throw Error(ErrorCode::InvalidStructure, ns.at(i).id, "S-node lacks an I premise or I conclusion");
        out.push_back(detail::s_structure_at(ns, i));
    }
    return out;
}

/// Like s_node_structures but never throws: malformed S-nodes come back with
/// whatever premises and conclusions they do have.
inline std::vector<SNodeStructure> s_node_structures_lenient(const Nodeset& ns)
{
    std::vector<SNodeStructure> out;
    for (std::size_t i = 0; i < ns.nodes().size(); ++i)
        if (is_s_kind(ns.at(i).kind))
            out.push_back(detail::s_structure_at(ns, i));
    return out;
}

namespace detail {

inline YaAnchoring anchoring_at(const Nodeset& ns, std::size_t ya, std::pair<std::size_t, std::size_t> ends)
{
    const auto& a = ns.at(ends.first);
    const auto& t = ns.at(ends.second);
    return {ns.at(ya).id, ns.at(ya).text, a.id, a.kind, t.id, t.kind};
}

} // namespace detail

/// One record per YA node, in node order. Throws InvalidStructure on the first
/// YA node without a unique L/TA anchor and I/S target.
inline std::vector<YaAnchoring> ya_anchorings(const Nodeset& ns)
{
    std::vector<YaAnchoring> out;
    for (std::size_t i = 0; i < ns.nodes().size(); ++i) {
        if (ns.at(i).kind != NodeKind::YA)
            continue;
        const auto ends = detail::ya_ends(ns, i);
        if (!ends)
            throw Error(ErrorCode::InvalidStructure, ns.at(i).id, "YA node without a unique anchor and target");
        out.push_back(detail::anchoring_at(ns, i, *ends));
    }
    return out;
}

/// YA anchorings of the well-formed YA nodes; the rest are skipped.
inline std::vector<YaAnchoring> ya_anchorings_lenient(const Nodeset& ns)
{
    std::vector<YaAnchoring> out;
    for (std::size_t i = 0; i < ns.nodes().size(); ++i)
        if (ns.at(i).kind == NodeKind::YA)
            if (const auto ends = detail::ya_ends(ns, i))
                out.push_back(detail::anchoring_at(ns, i, *ends));
    return out;
}

/// Separator between concatenated context texts.
inline constexpr std::string_view kContextSeparator = " || ";

inline std::string join_texts(std::span<const std::string> parts)
{
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i)
            out += kContextSeparator;
        out += parts[i];
    }
    return out;
}

struct TaContext
{
    std::string before;
    std::string after;

    friend bool operator==(const TaContext&, const TaContext&) = default;
};

namespace detail {

inline TaContext ta_context_at(const Nodeset& ns, std::size_t i)
{
    std::vector<std::string> before, after;
    for (auto e : ns.incoming(i))
        if (const auto& src = ns.at(ns.source_of(e)); src.kind == NodeKind::L)
            before.push_back(src.text);
    for (auto e : ns.outgoing(i))
        if (const auto& dst = ns.at(ns.target_of(e)); dst.kind == NodeKind::L)
            after.push_back(dst.text);
    return {join_texts(before), join_texts(after)};
}

inline std::vector<std::string> s_context_at(const Nodeset& ns, std::size_t i)
{
    const auto s = s_structure_at(ns, i);
    std::vector<std::string> texts;
    texts.reserve(s.premises.size() + s.conclusions.size());
    for (const auto& id : s.premises)
        texts.push_back(ns.node(id)->text);
    for (const auto& id : s.conclusions)
        texts.push_back(ns.node(id)->text);
    return texts;
}

} // namespace detail

/// Texts of the locutions before and after a transition.
inline TaContext ta_context(const Nodeset& ns, std::string_view ta_id)
{
    const auto i = ns.find(ta_id);
    if (i == Nodeset::npos || ns.at(i).kind != NodeKind::TA)
        throw Error(ErrorCode::NotATaNode, std::string(ta_id), "");
    if (!detail::ta_node_ok(ns, i))
        throw Error(ErrorCode::InvalidStructure, std::string(ta_id), "TA node lacks an L on one side");
    return detail::ta_context_at(ns, i);
}

/// Premise texts then conclusion texts of an S-node, in edge order.
inline std::vector<std::string> s_context(const Nodeset& ns, std::string_view s_id)
{
    const auto i = ns.find(s_id);
    if (i == Nodeset::npos || !is_s_kind(ns.at(i).kind))
        throw Error(ErrorCode::NotAnSNode, std::string(s_id), "");
    if (!detail::s_node_ok(ns, i))
        throw Error(ErrorCode::InvalidStructure, std::string(s_id), "S-node lacks an I premise or I conclusion");
    return detail::s_context_at(ns, i);
}

} // namespace dialam
