#pragma once

// Hashed bag-of-features representation of a PairInstance.

#include "dialam/dataset.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dialam {

/// 64-bit FNV-1a.
///   fnv1a("")  == 0xcbf29ce484222325
///   fnv1a("a") == 0xaf63dc4c8601ec8c
class Fnv1a
{
public:
    static constexpr std::uint64_t kOffset = 0xcbf29ce484222325ULL;
    static constexpr std::uint64_t kPrime = 0x100000001b3ULL;

    constexpr Fnv1a& byte(std::uint8_t b) noexcept
    {
        m_state = (m_state ^ b) * kPrime;
        return *this;
    }

    constexpr Fnv1a& bytes(std::string_view s) noexcept
    {
        for (char c : s)
            byte(static_cast<std::uint8_t>(c));
        return *this;
    }

    constexpr Fnv1a& u64(std::uint64_t v) noexcept
    {
        for (int i = 0; i < 8; ++i)
            byte(static_cast<std::uint8_t>(v >> (8 * i)));
        return *this;
    }

    constexpr std::uint64_t value() const noexcept { return m_state; }

private:
    std::uint64_t m_state = kOffset;
};

constexpr std::uint64_t fnv1a(std::string_view s) noexcept { return Fnv1a{}.bytes(s).value(); }

enum class Namespace : std::uint8_t {
    Head = 1,
    Tail = 2,
    HeadContext = 3,
    TailContext = 4,
    Overlap = 5,
    Length = 6,
};

/// Hash of a feature: FNV-1a over the hash seed (8 bytes, little endian),
/// the namespace id (1 byte) and the feature string.
constexpr std::uint64_t feature_hash(std::uint64_t seed, Namespace ns, std::string_view feature) noexcept
{
    return Fnv1a{}.u64(seed).byte(static_cast<std::uint8_t>(ns)).bytes(feature).value();
}

struct FeatureConfig
{
    std::uint32_t log2_dim = 18;
    std::uint64_t hash_seed = 0;

    std::size_t dim() const noexcept { return std::size_t{1} << log2_dim; }

    friend bool operator==(const FeatureConfig&, const FeatureConfig&) = default;
};

/// Sparse feature vector; indices strictly increasing and below dim.
struct SparseVector
{
    std::vector<std::uint32_t> indices;
    std::vector<double> values;
    std::size_t dim = 0;

    std::size_t size() const noexcept { return indices.size(); }

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

namespace detail {

inline char32_t fold_case(char32_t c) noexcept
{
    if (c < 0x80)
        return (c >= 'A' && c <= 'Z') ? c + 32 : c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7)
        return c + 32;
    if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177))
        return (c % 2 == 0) ? c + 1 : c;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E))
        return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x178)
        return 0xFF;
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2)
        return c + 32;
    if (c >= 0x410 && c <= 0x42F)
        return c + 32;
    if (c >= 0x400 && c <= 0x40F)
        return c + 80;
    return c;
}

inline bool is_word_char(char32_t c) noexcept
{
    if (c < 0x80)
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
    if (c <= 0xBF || c == 0xD7 || c == 0xF7)
        return false;
    if ((c >= 0x2000 && c <= 0x2BFF) || (c >= 0x3000 && c <= 0x303F) || (c >= 0xFE10 && c <= 0xFE6F)
        || (c >= 0xFF00 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) || (c >= 0x1F000 && c <= 0x1FAFF))
        return false;
    return true;
}

inline void append_utf8(std::string& out, char32_t c)
{
    if (c < 0x80) {
        out += static_cast<char>(c);
    } else if (c < 0x800) {
        out += static_cast<char>(0xC0 | (c >> 6));
        out += static_cast<char>(0x80 | (c & 0x3F));
    } else if (c < 0x10000) {
        out += static_cast<char>(0xE0 | (c >> 12));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (c >> 18));
        out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (c & 0x3F));
    }
}

/// Decode one code point at `i`, advancing it. Invalid sequences decode to
/// U+FFFD after consuming one byte.
inline char32_t next_code_point(std::string_view s, std::size_t& i) noexcept
{
    const auto b0 = static_cast<unsigned char>(s[i]);
    auto cont = [&](std::size_t k) -> int {
        if (i + k >= s.size())
            return -1;
        const auto b = static_cast<unsigned char>(s[i + k]);
        return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
    };
    if (b0 < 0x80) {
        ++i;
        return b0;
    }
    int len = (b0 & 0xE0) == 0xC0 ? 2 : (b0 & 0xF0) == 0xE0 ? 3 : (b0 & 0xF8) == 0xF0 ? 4 : 0;
    char32_t cp = len == 2 ? (b0 & 0x1F) : len == 3 ? (b0 & 0x0F) : (b0 & 0x07);
    for (int k = 1; k < len; ++k) {
        const int c = cont(static_cast<std::size_t>(k));
        if (c < 0) {
            len = 0;
            break;
        }
        cp = (cp << 6) | static_cast<char32_t>(c);
    }
    if (len == 0) {
        ++i;
        return 0xFFFD;
    }
    i += static_cast<std::size_t>(len);
    return cp;
}

} // namespace detail

/// Lower-cased tokens: maximal runs of word characters. Case folding covers
/// ASCII, Latin-1, Latin Extended-A, basic Greek and Cyrillic; word characters
/// are ASCII letters and digits plus every non-ASCII code point outside the
/// Latin-1 punctuation block and the common punctuation and symbol blocks.
inline std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> out;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t c = detail::next_code_point(text, i);
        if (c != 0xFFFD && detail::is_word_char(c)) {
            detail::append_utf8(current, detail::fold_case(c));
        } else if (!current.empty()) {
            out.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        out.push_back(std::move(current));
    return out;
}

/// floor(log2(1 + n))
constexpr std::size_t length_bucket(std::size_t n) noexcept { return std::bit_width(n + 1) - 1; }

/// Feature vector of an instance:
///   unigram counts of head, tail, head context and tail context, each in its
///     own namespace;
///   one "overlap" feature valued with the number of distinct tokens shared by
///     the head side (head text and context) and the tail side;
///   a length bucket indicator per non-empty field ("head:3", ...).
/// Colliding features add up.
inline SparseVector featurize(const PairInstance& inst, const FeatureConfig& cfg)
{
    const auto mask = static_cast<std::uint64_t>(cfg.dim() - 1);
    std::vector<std::pair<std::uint32_t, double>> raw;

    auto add = [&](Namespace ns, std::string_view feature, double value) {
        raw.emplace_back(static_cast<std::uint32_t>(feature_hash(cfg.hash_seed, ns, feature) & mask), value);
    };
    auto field = [&](Namespace ns, std::string_view name, const std::string& text, std::set<std::string>& side) {
        if (text.empty())
            return;
        const auto tokens = tokenize(text);
        for (const auto& t : tokens) {
            add(ns, t, 1.0);
            side.insert(t);
        }
        add(Namespace::Length, std::string(name) + ":" + std::to_string(length_bucket(tokens.size())), 1.0);
    };

    std::set<std::string> head_side, tail_side;
    field(Namespace::Head, "head", inst.head_text, head_side);
    field(Namespace::Tail, "tail", inst.tail_text, tail_side);
    field(Namespace::HeadContext, "head_context", inst.head_context, head_side);
    field(Namespace::TailContext, "tail_context", inst.tail_context, tail_side);

    std::size_t shared = 0;
    for (const auto& t : head_side)
        shared += tail_side.contains(t);
    if (shared)
        add(Namespace::Overlap, "overlap", static_cast<double>(shared));

    std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    SparseVector v;
    v.dim = cfg.dim();
    for (const auto& [idx, val] : raw) {
        if (!v.indices.empty() && v.indices.back() == idx) {
            v.values.back() += val;
        } else {
            v.indices.push_back(idx);
            v.values.push_back(val);
        }
    }
    return v;
}

/// Overlap feature value of an instance (the count that featurize stores).
inline std::size_t token_overlap(const PairInstance& inst)
{
    std::set<std::string> head_side, tail_side;
    for (auto* text : {&inst.head_text, &inst.head_context})
        for (auto& t : tokenize(*text))
            head_side.insert(std::move(t));
    for (auto* text : {&inst.tail_text, &inst.tail_context})
        for (auto& t : tokenize(*text))
            tail_side.insert(std::move(t));
    std::size_t shared = 0;
    for (const auto& t : head_side)
        shared += tail_side.contains(t);
    return shared;
}

} // namespace dialam
