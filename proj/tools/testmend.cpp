// Command-line entry point: batch test updating (update), outdated-test
// detection (detect), report annotation (annotate) and trace aggregation
// (eval). With --replay-style configs every command is fully offline and
// deterministic. Exit codes: 0 success, 1 partial (some sessions did not
// compile), 2 configuration/usage error.

#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "testmend/config.hpp"
#include "testmend/corpus.hpp"
#include "testmend/coverage_agent.hpp"
#include "testmend/metrics.hpp"
#include "testmend/mutation_agent.hpp"
#include "testmend/serde.hpp"

namespace fs = std::filesystem;
using namespace testmend;

namespace {

struct UpdateOptions {
    std::string config_path;
    std::string manifest_path;
    std::string out_dir = "traces";
    std::string replay_bundle_override;
    std::string transcript_override;
    int jobs = 1;
};

json verdict_to_json(const OutdatedVerdict& verdict) {
    json j;
    j["is_outdated"] = verdict.is_outdated;
    if (verdict.cause) j["cause"] = to_string(*verdict.cause);
    j["round_outcomes"] = verdict.round_outcomes;
    if (verdict.baseline_coverage) j["baseline_coverage"] = *verdict.baseline_coverage;
    if (verdict.baseline_mutation) j["baseline_mutation"] = *verdict.baseline_mutation;
    return j;
}

// Manifest: JSON array whose items are either task-file paths (relative to
// the manifest) or inline task objects.
std::vector<UpdateTask> load_manifest(const fs::path& manifest_path) {
    json j = json::parse(read_file(manifest_path));
    if (!j.is_array()) throw ConfigError(manifest_path.string() + ": manifest must be an array");
    fs::path base = manifest_path.has_parent_path() ? manifest_path.parent_path() : ".";
    std::vector<UpdateTask> tasks;
    for (const auto& item : j) {
        if (item.is_string()) {
            fs::path p = item.get<std::string>();
            if (!p.is_absolute()) p = base / p;
            tasks.push_back(json::parse(read_file(p)).get<UpdateTask>());
        } else {
            tasks.push_back(item.get<UpdateTask>());
        }
    }
    return tasks;
}

Workspace workspace_for(const std::string& repo_id, const fs::path& base) {
    Workspace ws;
    fs::path p(repo_id);
    ws.root = p.is_absolute() ? p : base / p;
    ws.snapshot_id = fs::path(repo_id).filename().string();
    return ws;
}

int cmd_update(const UpdateOptions& options) {
    AppConfig config = load_config(options.config_path);
    if (!options.replay_bundle_override.empty())
        config.replay_bundle = options.replay_bundle_override;
    if (!options.transcript_override.empty())
        config.transcript = options.transcript_override;

    auto tasks = load_manifest(options.manifest_path);
    fs::path out_dir(options.out_dir);
    fs::create_directories(out_dir);
    fs::path manifest_base =
        fs::path(options.manifest_path).has_parent_path()
            ? fs::path(options.manifest_path).parent_path()
            : fs::path(".");

    TemplateCatalog catalog = load_templates(config.templates_dir);
    auto backend = make_chat_backend(config);
    Gateway gateway{catalog, backend};
    KnownSymbolCatalog symbols = make_catalog(config);

    struct TaskOutcome {
        size_t index;
        bool compiled = false;
        std::string error;
    };
    std::vector<TaskOutcome> outcomes(tasks.size());
    std::mutex io_mutex;

    auto run_one = [&](size_t index) {
        const UpdateTask& task = tasks[index];
        outcomes[index].index = index;
        try {
            auto adapter = make_adapter(config);
            Workspace ws = workspace_for(task.repo_post, manifest_base);
            Retriever retriever(ws.root, make_embedder(config), config.retrieval_top_k);
            SessionResult result = run_update_session(task, config.session, gateway, *adapter,
                                                      ws, retriever, symbols);
            json trace = result;
            write_file(out_dir / ("task-" + std::to_string(index) + ".trace.json"),
                       trace.dump(2) + "\n");
            outcomes[index].compiled =
                result.best_outcome.phase_reached != Phase::compile_failed;
        } catch (const SessionAbort& e) {
            json trace = e.partial_result;
            write_file(out_dir / ("task-" + std::to_string(index) + ".trace.json"),
                       trace.dump(2) + "\n");
            outcomes[index].error = e.what();
        } catch (const std::exception& e) {
            outcomes[index].error = e.what();
        }
        std::lock_guard<std::mutex> lock(io_mutex);
        std::cout << "task " << index << ": "
                  << (outcomes[index].error.empty()
                          ? (outcomes[index].compiled ? "ok" : "best did not compile")
                          : outcomes[index].error)
                  << "\n";
    };

    if (options.jobs <= 1) {
        for (size_t i = 0; i < tasks.size(); ++i) run_one(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<size_t> next{0};
        for (int t = 0; t < options.jobs; ++t)
            pool.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < tasks.size(); i = next.fetch_add(1))
                    run_one(i);
            });
        for (auto& th : pool) th.join();
    }

    size_t compiled = 0, failed = 0;
    for (const auto& o : outcomes) {
        if (!o.error.empty()) ++failed;
        else if (o.compiled) ++compiled;
    }
    json summary = {{"tasks", tasks.size()},
                    {"compiled", compiled},
                    {"errors", failed}};
    write_file(out_dir / "summary.json", summary.dump(2) + "\n");
    std::cout << "sessions: " << tasks.size() << ", compiling best: " << compiled
              << ", errors: " << failed << "\n";
    if (failed > 0) return 1;
    return compiled == tasks.size() ? 0 : 1;
}

int cmd_detect(const std::string& config_path, const std::string& pre_dir,
               const std::string& post_dir, const std::string& tests_path,
               const std::string& out_path) {
    AppConfig config = load_config(config_path);
    json tests = json::parse(read_file(tests_path));
    json verdicts = json::array();
    bool all_ok = true;
    for (const auto& entry : tests) {
        MethodRef test_ref = entry.at("test_ref").get<MethodRef>();
        MethodRef focal = entry.at("focal").get<MethodRef>();
        try {
            auto adapter = make_adapter(config);
            Workspace pre{pre_dir, fs::path(pre_dir).filename().string()};
            Workspace post{post_dir, fs::path(post_dir).filename().string()};
            OutdatedVerdict verdict = detect_outdated(pre, post, test_ref, focal, *adapter);
            json v = verdict_to_json(verdict);
            v["test"] = test_ref.method_name;
            verdicts.push_back(std::move(v));
            std::cout << test_ref.method_name << ": "
                      << (verdict.is_outdated ? "outdated (" + to_string(*verdict.cause) + ")"
                                              : "not outdated")
                      << "\n";
        } catch (const std::exception& e) {
            all_ok = false;
            std::cerr << test_ref.method_name << ": error: " << e.what() << "\n";
        }
    }
    if (!out_path.empty()) write_file(out_path, verdicts.dump(2) + "\n");
    return all_ok ? 0 : 1;
}

int cmd_annotate(const std::string& report_path, const std::string& source_path,
                 const std::string& mode, const std::string& fq_class,
                 const std::string& method, const std::string& file, int line_start,
                 int line_end) {
    std::string source = read_file(source_path);
    std::string report = read_file(report_path);
    if (trim(report).empty()) { // nothing to annotate
        std::cout << source;
        return 0;
    }
    MethodRef focal;
    focal.fully_qualified_class = fq_class;
    focal.method_name = method;
    focal.file_path = file;
    focal.line_start = line_start;
    focal.line_end = line_end;
    if (mode == "coverage") {
        std::cout << annotate_coverage(source, parse_coverage_report(report, focal));
    } else {
        std::cout << annotate_mutations(source, parse_mutation_report(report, focal));
    }
    return 0;
}

int cmd_eval(const std::string& trace_dir, const std::string& out_path) {
    std::vector<SessionResult> results;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(trace_dir))
        if (entry.is_regular_file() && entry.path().extension() == ".json" &&
            entry.path().filename() != "summary.json")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files)
        results.push_back(json::parse(read_file(f)).get<SessionResult>());
    MetricsSummary summary = aggregate_metrics(results);
    std::cout << format_metrics(summary);
    if (!out_path.empty()) {
        json j = {{"sessions", summary.sessions}, {"cpr", summary.cpr}, {"tpr", summary.tpr}};
        if (summary.mean_line_cov) j["mean_line_cov"] = *summary.mean_line_cov;
        if (summary.mean_branch_cov) j["mean_branch_cov"] = *summary.mean_branch_cov;
        if (summary.mean_mutation_score) j["mean_mutation_score"] = *summary.mean_mutation_score;
        write_file(out_path, j.dump(2) + "\n");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"testmend: keeps unit tests in step with production changes"};
    app.require_subcommand(1);

    UpdateOptions update_options;
    auto* update = app.add_subcommand("update", "run update sessions over a task manifest");
    update->add_option("--config", update_options.config_path, "config file")->required();
    update->add_option("--manifest", update_options.manifest_path, "task manifest")->required();
    update->add_option("--out", update_options.out_dir, "trace output directory");
    update->add_option("--replay-bundle", update_options.replay_bundle_override,
                       "override adapter replay bundle");
    update->add_option("--transcript", update_options.transcript_override,
                       "override gateway transcript");
    update->add_option("--jobs", update_options.jobs, "parallel sessions");

    std::string detect_config, detect_pre, detect_post, detect_tests, detect_out;
    auto* detect = app.add_subcommand("detect", "three-round outdated-test detection");
    detect->add_option("--config", detect_config, "config file")->required();
    detect->add_option("--pre", detect_pre, "pre-change workspace")->required();
    detect->add_option("--post", detect_post, "post-change workspace")->required();
    detect->add_option("--tests", detect_tests, "test list manifest")->required();
    detect->add_option("--out", detect_out, "verdict output file");

    std::string ann_report, ann_source, ann_mode, ann_class, ann_method, ann_file, ann_out;
    int ann_start = 1, ann_end = 1;
    auto* annotate = app.add_subcommand("annotate", "annotate focal source from a report");
    annotate->add_option("--report", ann_report, "coverage or mutation XML")->required();
    annotate->add_option("--source", ann_source, "focal method source file")->required();
    annotate->add_option("--mode", ann_mode, "coverage | mutation")
        ->required()
        ->check(CLI::IsMember({"coverage", "mutation"}));
    annotate->add_option("--class", ann_class, "fully qualified focal class")->required();
    annotate->add_option("--method", ann_method, "focal method name")->required();
    annotate->add_option("--file", ann_file, "focal file path as reported");
    annotate->add_option("--line-start", ann_start, "focal span start")->required();
    annotate->add_option("--line-end", ann_end, "focal span end")->required();

    std::string eval_dir, eval_out;
    auto* eval = app.add_subcommand("eval", "aggregate metrics over session traces");
    eval->add_option("--traces", eval_dir, "trace directory")->required();
    eval->add_option("--out", eval_out, "metrics output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*update) return cmd_update(update_options);
        if (*detect)
            return cmd_detect(detect_config, detect_pre, detect_post, detect_tests, detect_out);
        if (*annotate)
            return cmd_annotate(ann_report, ann_source, ann_mode, ann_class, ann_method, ann_file,
                                ann_start, ann_end);
        if (*eval) return cmd_eval(eval_dir, eval_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
