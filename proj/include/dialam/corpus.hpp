#pragma once

// Corpus-level helpers: loading nodeset directories, split files and the
// bundled evaluation-set preset.

#include "dialam/dataset.hpp"
#include "dialam/error.hpp"
#include "dialam/graph.hpp"
#include "dialam/linear_model.hpp"
#include "dialam/scorer.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <exception>
#include <filesystem>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace dialam {

/// The 78 evaluation nodesets of the DialAM-2024 development split, available
/// on the command line as `--eval-list dialam78`.
inline constexpr std::array<std::string_view, 78> kDialam78 = {
    "nodeset18321", "nodeset21402", "nodeset21463", "nodeset23939",
    "nodeset18455", "nodeset19912", "nodeset23828", "nodeset21575",
    "nodeset17918", "nodeset23771", "nodeset21041", "nodeset18846",
    "nodeset18850", "nodeset23887", "nodeset18775", "nodeset21044",
    "nodeset18877", "nodeset23794", "nodeset23512", "nodeset25524",
    "nodeset21390", "nodeset23605", "nodeset23769", "nodeset23526",
    "nodeset17938", "nodeset19911", "nodeset20342", "nodeset21438",
    "nodeset18311", "nodeset19159", "nodeset19742", "nodeset23547",
    "nodeset18764", "nodeset21384", "nodeset21294", "nodeset19153",
    "nodeset20755", "nodeset23869", "nodeset17923", "nodeset20303",
    "nodeset23894", "nodeset23715", "nodeset23484", "nodeset20332",
    "nodeset23505", "nodeset21577", "nodeset21595", "nodeset19341",
    "nodeset21023", "nodeset23746", "nodeset20871", "nodeset25400",
    "nodeset18271", "nodeset20343", "nodeset21473", "nodeset21571",
    "nodeset25691", "nodeset21452", "nodeset18848", "nodeset23721",
    "nodeset18794", "nodeset25522", "nodeset25499", "nodeset21393",
    "nodeset17940", "nodeset23876", "nodeset23927", "nodeset23498",
    "nodeset23900", "nodeset19095", "nodeset20981", "nodeset21603",
    "nodeset21451", "nodeset18266", "nodeset25754", "nodeset19091",
    "nodeset23859", "nodeset23834",
};

inline std::vector<std::string> eval_preset(std::string_view name)
{
    if (name == "dialam78")
        return {kDialam78.begin(), kDialam78.end()};
    throw Error(ErrorCode::BadConfig, std::string(name), "no such eval-list preset");
}

/// Run `fn(i)` for i in [0, n) on up to `jobs` threads. The first exception
/// (lowest index) is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn)
{
    jobs = std::max<std::size_t>(1, std::min(jobs, n));
    if (jobs == 1) {
        for (std::size_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : workers)
        t.join();
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
}

/// Parse every *.json file of `dir`, in file-name order.
inline std::vector<Nodeset> load_corpus(const std::filesystem::path& dir, std::size_t jobs = 1)
{
    const auto files = nodeset_files(dir);
    std::vector<Nodeset> out(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) { out[i] = load_nodeset(files[i]); });
    return out;
}

/// Split files are JSON: {"train": [ids...], "eval": [ids...]}.
inline std::string split_to_json(const Split& s)
{
    nlohmann::ordered_json j;
    j["train"] = s.train;
    j["eval"] = s.eval;
    return j.dump(2) + "\n";
}

inline Split split_from_json(std::string_view text)
{
    auto j = nlohmann::json::parse(text, nullptr, false);
    if (!j.is_object() || !j.contains("train") || !j.contains("eval") || !j["train"].is_array()
        || !j["eval"].is_array())
        throw Error(ErrorCode::MalformedDocument, "", "split file needs \"train\" and \"eval\" arrays");
    Split s;
    try {
        s.train = j["train"].get<std::vector<std::string>>();
        s.eval = j["eval"].get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedDocument, "", e.what());
    }
    return s;
}

/// Eval-list files hold one nodeset id per line; quotes, commas and blank
/// lines are ignored, so the list can be pasted from a Python literal.
inline std::vector<std::string> parse_id_list(std::string_view text)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n' || c == ',' || c == ' ' || c == '\t' || c == '\r' || c == '\'' || c == '"' || c == '[' || c == ']') {
            if (!cur.empty())
                out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty())
        out.push_back(std::move(cur));
    return out;
}

} // namespace dialam
