// dialam: command-line driver for corpus preparation, training, inference
// and scoring.
//
// Exit status: 0 success, 1 domain error, 2 usage error.

#include "dialam/dialam.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace dialam;

namespace {

struct UsageError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

std::size_t g_jobs = 1;

// ---------------------------------------------------------------------------
// Corpus selection

std::vector<std::string> corpus_ids(const fs::path& dir)
{
    std::vector<std::string> ids;
    for (const auto& f : nodeset_files(dir))
        ids.push_back(f.stem().string());
    return ids;
}

std::vector<Nodeset> load_ids(const fs::path& dir, const std::vector<std::string>& ids)
{
    std::vector<Nodeset> out(ids.size());
    parallel_for(ids.size(), g_jobs, [&](std::size_t i) {
        const auto path = dir / (ids[i] + ".json");
        if (!fs::exists(path))
            throw Error(ErrorCode::IoFailure, path.string(), "nodeset file not found");
        out[i] = load_nodeset(path);
    });
    return out;
}

std::vector<std::string> read_eval_list(const std::string& arg)
{
    if (!fs::exists(arg) && arg.find('/') == std::string::npos && arg.find('.') == std::string::npos)
        return eval_preset(arg);
    return parse_id_list(detail::read_file(arg));
}

Split read_split(const fs::path& path)
{
    try {
        return split_from_json(detail::read_file(path));
    } catch (const Error& e) {
        throw Error(e.code(), path.string(), e.what());
    }
}

/// Ids of the requested part of a split, or every nodeset of `dir`.
std::vector<std::string> select_ids(const fs::path& dir, const std::string& split_file, const std::string& part)
{
    if (split_file.empty())
        return corpus_ids(dir);
    const auto s = read_split(split_file);
    if (part == "train")
        return s.train;
    if (part == "eval")
        return s.eval;
    return corpus_ids(dir);
}

void write_output(const fs::path& path, std::string_view data)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    detail::write_file_atomic(path, data);
}

std::uint64_t nodeset_seed(std::uint64_t seed, const std::string& id)
{
    return Fnv1a{}.u64(seed).bytes(id).value();
}

// ---------------------------------------------------------------------------
// Commands

int cmd_validate(const fs::path& dir)
{
    const auto files = nodeset_files(dir);
    std::vector<std::string> reports(files.size());
    std::vector<char> bad(files.size(), 0);
    parallel_for(files.size(), g_jobs, [&](std::size_t i) {
        try {
            const auto ns = load_nodeset(files[i]);
            for (const auto& v : validate(ns)) {
                reports[i] += ns.id() + ": " + std::string(to_string(v.code)) + " " + v.id + ": " + v.message + "\n";
                bad[i] = 1;
            }
        } catch (const Error& e) {
            reports[i] = files[i].string() + ": " + e.what() + "\n";
            bad[i] = 1;
        }
    });
    std::size_t n_bad = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::cout << reports[i];
        n_bad += static_cast<std::size_t>(bad[i]);
    }
    std::cout << files.size() << " nodesets, " << n_bad << " with problems\n";
    return n_bad == 0 ? 0 : 1;
}

int cmd_split(const fs::path& input, const std::string& eval_list, std::optional<double> eval_frac,
              std::optional<std::uint64_t> seed, const fs::path& out)
{
    EvalSpec spec;
    if (!eval_list.empty())
        spec = read_eval_list(eval_list);
    else if (eval_frac && seed)
        spec = RandomEval{*eval_frac, *seed};
    else
        throw UsageError("split needs --eval-list, or --eval-frac with --seed");
    const auto ids = corpus_ids(input);
    const auto s = split_corpus(ids, spec);
    write_output(out, split_to_json(s));
    std::cerr << "train " << s.train.size() << ", eval " << s.eval.size() << "\n";
    return 0;
}

void print_stats_row(const char* name, const CorpusStats& st)
{
    std::printf("%-6s %9zu %7zu %7zu %7zu %7zu\n", name, st.nodesets, st.ra, st.ca, st.ma, st.ya);
}

int cmd_stats(const fs::path& input, const std::string& split_file, const std::string& eval_list,
              const std::string& counting_name)
{
    const auto counting = counting_name == "nodes" ? SCounting::PerNode : SCounting::PremiseConclusionPairs;
    std::optional<Split> split;
    if (!split_file.empty())
        split = read_split(split_file);
    else if (!eval_list.empty())
        split = split_corpus(corpus_ids(input), read_eval_list(eval_list));

    std::printf("%-6s %9s %7s %7s %7s %7s\n", "part", "nodesets", "RA", "CA", "MA", "YA");
    if (!split) {
        print_stats_row("all", corpus_stats(load_corpus(input, g_jobs), counting));
        return 0;
    }
    print_stats_row("train", corpus_stats(load_ids(input, split->train), counting));
    print_stats_row("eval", corpus_stats(load_ids(input, split->eval), counting));
    return 0;
}

template <typename E>
void append_records(std::vector<ExampleRecord>& out, const std::vector<E>& examples, const std::string& id)
{
    auto recs = to_records(std::span<const E>(examples), id);
    out.insert(out.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
}

int cmd_build(const std::string& stage, const fs::path& input, const std::string& split_file, const std::string& part,
              const std::string& ratio_text, std::uint64_t seed, const fs::path& out)
{
    const auto ratio = Ratio::parse(ratio_text);
    if (!ratio)
        throw UsageError("--neg-ratio must be a non-negative decimal, got '" + ratio_text + "'");
    const auto ids = select_ids(input, split_file, part);
    const auto corpus = load_ids(input, ids);

    struct Part
    {
        std::vector<ExampleRecord> records;
        std::size_t positives = 0, negatives = 0, shortfall = 0;
        std::vector<std::string> skipped;
    };
    std::vector<Part> parts(corpus.size());
    parallel_for(corpus.size(), g_jobs, [&](std::size_t i) {
        const auto& ns = corpus[i];
        const auto s = nodeset_seed(seed, ns.id());
        auto& p = parts[i];
        auto take = [&](const auto& r) {
            append_records(p.records, r.examples, ns.id());
            p.positives = r.positives;
            p.negatives = r.negatives;
            p.shortfall = r.shortfall ? 1 : 0;
            for (const auto& ya : r.skipped)
                p.skipped.push_back(ns.id() + "/" + ya);
        };
        try {
            if (stage == "s1")
                take(build_stage1(ns, *ratio, s));
            else if (stage == "s4")
                take(build_four_label(ns, *ratio, s));
            else if (stage == "ya")
                take(build_ya(ns, *ratio, s));
            else {
                const auto ex = build_stage2(ns);
                append_records(p.records, ex, ns.id());
                p.positives = ex.size();
            }
        } catch (const Error& e) {
            throw Error(e.code(), ns.id(), e.what());
        }
    });

    std::string text;
    Part total;
    for (const auto& p : parts) {
        for (const auto& r : p.records)
            text += record_to_jsonl(r);
        total.positives += p.positives;
        total.negatives += p.negatives;
        total.shortfall += p.shortfall;
        total.skipped.insert(total.skipped.end(), p.skipped.begin(), p.skipped.end());
    }
    write_output(out, text);
    std::cerr << stage << ": " << corpus.size() << " nodesets, " << total.positives << " positives, "
              << total.negatives << " negatives";
    if (total.shortfall)
        std::cerr << ", " << total.shortfall << " nodesets short of negatives";
    if (!total.skipped.empty())
        std::cerr << ", " << total.skipped.size() << " YA nodes with unusable labels skipped";
    std::cerr << "\n";
    for (const auto& id : total.skipped)
        std::cerr << "skipped " << id << "\n";
    return 0;
}

TaskName stage_task(const std::string& stage)
{
    if (stage == "s1")
        return TaskName::SStep1;
    if (stage == "s2")
        return TaskName::SStep2;
    if (stage == "s4")
        return TaskName::SFour;
    return TaskName::Ya;
}

int cmd_train(const std::string& stage, const fs::path& data, const fs::path& out, const TrainingParams& hyper,
              std::uint64_t dim, std::uint64_t hash_seed)
{
    if (dim < 2 || (dim & (dim - 1)) != 0 || dim > (std::uint64_t{1} << 30))
        throw UsageError("--dim must be a power of two between 2 and 2^30");
    FeatureConfig features;
    features.log2_dim = static_cast<std::uint32_t>(std::countr_zero(dim));
    features.hash_seed = hash_seed;

    std::vector<ExampleRecord> records;
    try {
        records = parse_jsonl(detail::read_file(data));
    } catch (const Error& e) {
        throw Error(e.code(), data.string(), e.what());
    }
    const auto task = task_spec(stage_task(stage));
    LinearModel model;
    try {
        model = train(records, task, hyper, features);
    } catch (const Error& e) {
        throw Error(e.code(), data.string(), e.what());
    }
    write_output(out, encode_model(model));
    for (std::size_t e = 0; e < model.epoch_loss.size(); ++e)
        std::fprintf(stderr, "epoch %zu loss %.6f\n", e + 1, model.epoch_loss[e]);
    return 0;
}

int cmd_predict(const fs::path& config, const fs::path& input, const std::string& split_file, const std::string& part,
                const fs::path& out)
{
    const auto cfg = instantiate(load_pipeline_spec(config));
    const auto ids = select_ids(input, split_file, part);
    fs::create_directories(out);
    std::vector<std::size_t> coerced(ids.size()), dropped(ids.size());
    parallel_for(ids.size(), g_jobs, [&](std::size_t i) {
        const auto ns = load_ids(input, {ids[i]}).front();
        PipelineRun run;
        try {
            run = run_pipeline_traced(ns, cfg);
        } catch (const Error& e) {
            throw Error(e.code(), ns.id(), e.what());
        }
        coerced[i] = run.ya.coerced;
        dropped[i] = run.ya.dropped;
        detail::write_file_atomic(out / (ids[i] + ".json"), serialize_nodeset(run.output));
    });
    std::size_t c = 0, d = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        c += coerced[i];
        d += dropped[i];
    }
    std::cerr << ids.size() << " nodesets written to " << out.string() << "; YA labels coerced " << c << ", dropped "
              << d << "\n";
    return 0;
}

int cmd_score(const fs::path& gold, const fs::path& pred, const std::string& split_file, const std::string& part,
              const std::string& averaging, const fs::path& report)
{
    const auto mode = averaging == "micro" ? Averaging::Micro : Averaging::Macro;
    CorpusReport r;
    if (split_file.empty()) {
        r = score_corpus(gold, pred, mode);
    } else {
        const auto ids = select_ids(gold, split_file, part);
        auto golds = load_ids(gold, ids);
        std::vector<std::pair<Nodeset, std::optional<Nodeset>>> pairs;
        for (auto& g : golds) {
            const auto p = pred / (g.id() + ".json");
            std::optional<Nodeset> pn;
            if (fs::exists(p))
                pn = load_nodeset(p);
            pairs.emplace_back(std::move(g), std::move(pn));
        }
        r = score_pairs(pairs, mode);
    }
    if (!report.empty())
        write_output(report, corpus_report_json(r));
    const MetricsReport reports[] = {r.ari, r.ilo};
    std::cout << report_table(reports);
    for (const auto& w : r.ilo.warnings)
        std::cerr << "warning: " << w << "\n";
    return 0;
}

int cmd_backend_check(std::string endpoint_url, const std::vector<std::string>& tasks)
{
    if (endpoint_url.empty()) {
        const char* env = std::getenv(kEndpointEnv);
        if (!env || !*env)
            throw UsageError(std::string("no --endpoint given and ") + kEndpointEnv + " is unset");
        endpoint_url = env;
    }
    const auto endpoint = Endpoint::parse(endpoint_url);
    health_check(endpoint);
    std::cout << "health ok\n";

    std::vector<TaskName> names;
    for (const auto& t : tasks) {
        const auto n = parse_task_name(t);
        if (!n)
            throw UsageError("unknown task '" + t + "'");
        names.push_back(*n);
    }
    if (names.empty())
        names = {TaskName::SStep1, TaskName::SStep2, TaskName::SFour, TaskName::Ya};

    const PairInstance probes[] = {
        {"We should act now.", "", "It is raining.", ""},
        {"Speaker: we should act now.", "Speaker: why? || Speaker: because", "we should act now", ""},
    };
    int failures = 0;
    for (auto t : names) {
        try {
            const auto rows = RemoteClassifier(endpoint, t, std::chrono::seconds(60)).classify(probes);
            std::cout << to_string(t) << " ok (" << rows.size() << " rows)\n";
        } catch (const Error& e) {
            std::cout << to_string(t) << " FAILED: " << e.what() << "\n";
            ++failures;
        }
    }
    return failures == 0 ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dialogical argument mining toolkit"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--jobs", g_jobs, "Worker threads for per-nodeset work")->check(CLI::Range(1, 1024));

    const auto stage_check = CLI::IsMember({"s1", "s2", "ya", "s4"});
    const auto part_check = CLI::IsMember({"train", "eval", "all"});
    int status = 0;

    // validate
    std::string v_dir;
    auto* validate_cmd = app.add_subcommand("validate", "Check every nodeset of a directory");
    validate_cmd->add_option("dir", v_dir, "Nodeset directory")->required();

    // split
    std::string sp_input, sp_list, sp_out;
    std::optional<double> sp_frac;
    std::optional<std::uint64_t> sp_seed;
    auto* split_cmd = app.add_subcommand("split", "Partition a corpus into train and eval ids");
    split_cmd->add_option("--input", sp_input, "Nodeset directory")->required();
    auto* sp_list_opt = split_cmd->add_option("--eval-list", sp_list, "Eval id file, or the preset name dialam78");
    auto* sp_frac_opt = split_cmd->add_option("--eval-frac", sp_frac, "Random eval fraction in (0, 1)");
    split_cmd->add_option("--seed", sp_seed, "Seed for --eval-frac");
    split_cmd->add_option("--out", sp_out, "Split file to write")->required();
    sp_list_opt->excludes(sp_frac_opt);

    // stats
    std::string st_input, st_split, st_list, st_counting = "pairs";
    auto* stats_cmd = app.add_subcommand("stats", "Count RA, CA, MA and YA relations");
    stats_cmd->add_option("--input", st_input, "Nodeset directory")->required();
    auto* st_split_opt = stats_cmd->add_option("--split", st_split, "Split file; prints train and eval rows");
    stats_cmd->add_option("--eval-list", st_list, "Eval id file or preset, instead of --split")
        ->excludes(st_split_opt);
    stats_cmd->add_option("--counting", st_counting, "S relations counted as premise-conclusion pairs or nodes")
        ->check(CLI::IsMember({"pairs", "nodes"}));

    // build
    std::string b_stage, b_input, b_split, b_part = "train", b_ratio = "1", b_out;
    std::uint64_t b_seed = 0;
    auto* build_cmd = app.add_subcommand("build", "Write training examples as JSON lines");
    build_cmd->add_option("--stage", b_stage, "s1, s2, ya or s4 (four-label)")->required()->check(stage_check);
    build_cmd->add_option("--input", b_input, "Nodeset directory")->required();
    build_cmd->add_option("--split", b_split, "Split file restricting the nodesets");
    build_cmd->add_option("--part", b_part, "Part of --split to use")->check(part_check);
    build_cmd->add_option("--neg-ratio", b_ratio, "Negatives per positive");
    build_cmd->add_option("--seed", b_seed, "Negative sampling seed");
    build_cmd->add_option("--out", b_out, "Output file")->required();

    // train
    std::string t_stage, t_data, t_out;
    TrainingParams t_hyper;
    std::uint64_t t_dim = std::uint64_t{1} << 18, t_hash_seed = 0;
    auto* train_cmd = app.add_subcommand("train", "Train a linear classifier");
    train_cmd->add_option("--stage", t_stage, "s1, s2, ya or s4 (four-label)")->required()->check(stage_check);
    train_cmd->add_option("--data", t_data, "Examples written by build")->required();
    train_cmd->add_option("--out", t_out, "Model file to write")->required();
    train_cmd->add_option("--epochs", t_hyper.epochs)->check(CLI::Range(1u, 100000u));
    train_cmd->add_option("--lr", t_hyper.lr)->check(CLI::PositiveNumber);
    train_cmd->add_option("--l2", t_hyper.l2)->check(CLI::NonNegativeNumber);
    train_cmd->add_option("--seed", t_hyper.seed, "Shuffling seed");
    train_cmd->add_option("--dim", t_dim, "Hashed feature dimension, a power of two");
    train_cmd->add_option("--hash-seed", t_hash_seed, "Feature hashing seed");

    // predict
    std::string p_config, p_input, p_split, p_part = "eval", p_out;
    auto* predict_cmd = app.add_subcommand("predict", "Run the pipeline over a directory");
    predict_cmd->add_option("--config", p_config, "Pipeline config file")->required();
    predict_cmd->add_option("--input", p_input, "Nodeset directory")->required();
    predict_cmd->add_option("--split", p_split, "Split file restricting the nodesets");
    predict_cmd->add_option("--part", p_part, "Part of --split to use")->check(part_check);
    predict_cmd->add_option("--out", p_out, "Output directory")->required();

    // score
    std::string s_gold, s_pred, s_split, s_part = "eval", s_avg = "macro", s_report;
    auto* score_cmd = app.add_subcommand("score", "Score predictions against gold nodesets");
    score_cmd->add_option("--gold", s_gold, "Gold nodeset directory")->required();
    score_cmd->add_option("--pred", s_pred, "Predicted nodeset directory")->required();
    score_cmd->add_option("--split", s_split, "Split file restricting the gold nodesets");
    score_cmd->add_option("--part", s_part, "Part of --split to score")->check(part_check);
    score_cmd->add_option("--averaging", s_avg)->check(CLI::IsMember({"macro", "micro"}));
    score_cmd->add_option("--report", s_report, "JSON report to write");

    // backend-check
    std::string bc_endpoint;
    std::vector<std::string> bc_tasks;
    auto* check_cmd = app.add_subcommand("backend-check", "Probe an inference service");
    check_cmd->add_option("--endpoint", bc_endpoint, std::string("Service URL (default $") + kEndpointEnv + ")");
    check_cmd->add_option("--task", bc_tasks, "Task to probe; repeatable (default all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*validate_cmd)
            status = cmd_validate(v_dir);
        else if (*split_cmd)
            status = cmd_split(sp_input, sp_list, sp_frac, sp_seed, sp_out);
        else if (*stats_cmd)
            status = cmd_stats(st_input, st_split, st_list, st_counting);
        else if (*build_cmd)
            status = cmd_build(b_stage, b_input, b_split, b_part, b_ratio, b_seed, b_out);
        else if (*train_cmd)
            status = cmd_train(t_stage, t_data, t_out, t_hyper, t_dim, t_hash_seed);
        else if (*predict_cmd)
            status = cmd_predict(p_config, p_input, p_split, p_part, p_out);
        else if (*score_cmd)
            status = cmd_score(s_gold, s_pred, s_split, s_part, s_avg, s_report);
        else if (*check_cmd)
            status = cmd_backend_check(bc_endpoint, bc_tasks);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return status;
}
