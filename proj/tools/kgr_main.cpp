#include <CLI11.hpp>

#include <iostream>

#include "kgr/config.hpp"
#include "kgr/errors.hpp"
#include "kgr/metrics.hpp"
#include "kgr/runner.hpp"
#include "kgr/tasks.hpp"
#include "kgr/util.hpp"

namespace {

struct CommonOverrides {
    std::string config_file;
    std::string cache_dir;
    std::string out_dir;
    std::string labels_file;
    int max_in_flight = 0;
    int trials_relation = 0;
    int trials_cpg = 0;
    long long seed = -1;
    bool replay = false;
};

kgr::RunConfig resolve_config(const CLI::App* cmd, const CommonOverrides& o) {
    kgr::ConfigMap map = kgr::ConfigMap::load(o.config_file);
    auto passed = [&](const char* flag) {
        const CLI::Option* opt = cmd->get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    if (passed("--cache-dir")) map.set("run.cache_dir", o.cache_dir);
    if (passed("--out-dir")) map.set("run.out_dir", o.out_dir);
    if (passed("--labels")) map.set("labels.file", o.labels_file);
    if (passed("--max-in-flight")) map.set("run.max_in_flight", std::to_string(o.max_in_flight));
    if (passed("--trials-relation"))
        map.set("run.trials_relation", std::to_string(o.trials_relation));
    if (passed("--trials-cpg")) map.set("run.trials_cpg", std::to_string(o.trials_cpg));
    if (passed("--seed")) map.set("run.seed", std::to_string(o.seed));
    if (o.replay) map.set("run.replay", "true");
    return kgr::RunConfig::from_map(map);
}

void add_override_flags(CLI::App* cmd, CommonOverrides& o, bool with_run_flags) {
    cmd->add_option("--config", o.config_file, "run configuration file")->required();
    cmd->add_option("--cache-dir", o.cache_dir, "override run.cache_dir");
    cmd->add_option("--out-dir", o.out_dir, "override run.out_dir");
    cmd->add_option("--labels", o.labels_file, "override labels.file");
    if (with_run_flags) {
        cmd->add_option("--max-in-flight", o.max_in_flight, "override run.max_in_flight");
        cmd->add_option("--trials-relation", o.trials_relation, "override run.trials_relation");
        cmd->add_option("--trials-cpg", o.trials_cpg, "override run.trials_cpg");
        cmd->add_option("--seed", o.seed, "override run.seed");
        cmd->add_flag("--replay", o.replay, "answer from the cache only; a miss is an error");
    }
}

void cmd_ingest(const std::string& kg_file, const std::string& ontology_file) {
    kgr::Snapshot snapshot = kgr::load_snapshot(kg_file, ontology_file);
    const kgr::LoadStats& s = snapshot.stats;
    std::cout << "triples: " << s.triple_count << "\n"
              << "entities: " << s.entity_count << "\n"
              << "relations: " << s.relation_count << "\n"
              << "ontology statements: " << s.ontology_statement_count << "\n"
              << "classes: " << s.class_count << "\n"
              << "typed entities: " << s.typed_entity_count << "\n";
}

void cmd_make_tasks(const std::string& kg_file, const std::string& ontology_file,
                    const std::string& kind_name, size_t count, std::uint64_t seed,
                    const std::string& out_file) {
    kgr::Snapshot snapshot = kgr::load_snapshot(kg_file, ontology_file);
    auto kind = kgr::task_kind_from_string(kind_name);
    if (!kind) {
        throw kgr::UsageError("unknown task kind '" + kind_name + "'");
    }
    auto triples = kgr::sample_triples(snapshot.graph, count, seed);
    auto queries = kgr::make_masked_queries(triples, *kind);
    kgr::write_tasks(out_file, queries);
    std::cout << "wrote " << queries.size() << " " << kind_name << " queries to " << out_file
              << "\n";
}

void cmd_run(const CLI::App* cmd, const CommonOverrides& o) {
    kgr::RunConfig config = resolve_config(cmd, o);
    kgr::RunSummary summary = kgr::run_all(config);
    std::cout << "wrote " << summary.records << " records ("
              << summary.failures << " failed generations)\n";
    for (const auto& file : summary.record_files) {
        std::cout << "  " << file.string() << "\n";
    }
    if (config.replay && summary.failures > 0) {
        throw kgr::EndpointError(std::to_string(summary.failures) +
                                 " generations missing from the replay cache");
    }
}

void cmd_baseline(const CLI::App* cmd, const CommonOverrides& o, const std::string& name) {
    kgr::RunConfig config = resolve_config(cmd, o);
    kgr::RunSummary summary = kgr::run_baseline(config, name);
    std::cout << "wrote " << summary.records << " baseline records ("
              << summary.failures << " without a path)\n";
    for (const auto& file : summary.record_files) {
        std::cout << "  " << file.string() << "\n";
    }
}

void cmd_score(const CLI::App* cmd, const CommonOverrides& o) {
    kgr::RunConfig config = resolve_config(cmd, o);
    kgr::MetricReport report = kgr::score_run(config);
    std::string text = report.render_text();
    kgr::util::write_file_atomic(config.out_dir / "metrics.csv", report.render_csv());
    kgr::util::write_file_atomic(config.out_dir / "report.txt", text);
    std::cout << text;
}

void cmd_report(const CLI::App* cmd, const CommonOverrides& o) {
    kgr::RunConfig config = resolve_config(cmd, o);
    std::cout << kgr::score_run(config).render_text();
}

void cmd_label_export(const CLI::App* cmd, const CommonOverrides& o,
                      const std::string& out_file) {
    kgr::RunConfig config = resolve_config(cmd, o);
    kgr::ScoreInputs inputs = kgr::load_score_inputs(config);
    auto todo = kgr::collect_unresolved(inputs.records, kgr::index_queries(inputs.queries),
                                        inputs.snapshot, inputs.labels);
    std::string out;
    for (const auto& [query_id, answer] : todo) {
        out += query_id;
        out += '\t';
        out += answer;
        out += '\n';
    }
    kgr::util::write_file_atomic(out_file, out);
    std::cout << "exported " << todo.size() << " unresolved answers to " << out_file << "\n";
}

void cmd_label_import(const CLI::App* cmd, const CommonOverrides& o, const std::string& in_file) {
    kgr::RunConfig config = resolve_config(cmd, o);
    if (config.labels_file.empty()) {
        throw kgr::DataError("config has no labels.file to import into");
    }
    kgr::LabelStore incoming = kgr::LabelStore::load(in_file);
    kgr::LabelStore merged;
    if (std::filesystem::exists(config.labels_file)) {
        merged = kgr::LabelStore::load(config.labels_file);
    }
    size_t before = merged.size();
    merged.merge(incoming);
    merged.save(config.labels_file);
    std::cout << "imported " << (merged.size() - before) << " new labels into "
              << config.labels_file.string() << " (" << merged.size() << " total)\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"knowledge-graph reasoning benchmark toolkit"};
    app.require_subcommand(1);

    std::string kg_file, ontology_file, kind_name, out_file, in_file;
    std::string baseline_name = "shortest-path";
    size_t count = 0;
    std::uint64_t seed = 42;
    CommonOverrides run_o, score_o, report_o, label_o, baseline_o;

    auto* ingest = app.add_subcommand("ingest", "load and sanity-check a graph snapshot");
    ingest->add_option("--kg", kg_file, "triples file")->required();
    ingest->add_option("--ontology", ontology_file, "ontology file")->required();
    ingest->callback([&] { cmd_ingest(kg_file, ontology_file); });

    auto* make = app.add_subcommand("make-tasks", "sample triples into masked queries");
    make->add_option("--kg", kg_file, "triples file")->required();
    make->add_option("--ontology", ontology_file, "ontology file")->required();
    make->add_option("--kind", kind_name, "tail or relation")
        ->required()
        ->check(CLI::IsMember({"tail", "relation"}));
    make->add_option("--count", count, "number of queries")->required();
    make->add_option("--seed", seed, "sampling seed");
    make->add_option("--out", out_file, "output task file")->required();
    make->callback(
        [&] { cmd_make_tasks(kg_file, ontology_file, kind_name, count, seed, out_file); });

    auto* run = app.add_subcommand("run", "drive every configured model over the tasks");
    add_override_flags(run, run_o, true);
    run->callback([&] { cmd_run(run, run_o); });

    auto* score = app.add_subcommand("score", "score records and write metrics.csv/report.txt");
    add_override_flags(score, score_o, false);
    score->callback([&] { cmd_score(score, score_o); });

    auto* report = app.add_subcommand("report", "print the metric table for existing records");
    add_override_flags(report, report_o, false);
    report->callback([&] { cmd_report(report, report_o); });

    auto* label = app.add_subcommand("label", "manage human fact labels");
    label->require_subcommand(1);
    auto* label_export = label->add_subcommand("export", "write unresolved answers as a TSV");
    add_override_flags(label_export, label_o, false);
    label_export->add_option("--out", out_file, "output TSV")->required();
    label_export->callback([&] { cmd_label_export(label_export, label_o, out_file); });
    auto* label_import = label->add_subcommand("import", "merge labeled TSV into labels.file");
    auto* label_import_cfg = label_import;
    add_override_flags(label_import_cfg, label_o, false);
    label_import->add_option("--in", in_file, "labeled TSV (3 columns)")->required();
    label_import->callback([&] { cmd_label_import(label_import, label_o, in_file); });

    auto* baseline = app.add_subcommand("baseline", "emit graph shortest-path records");
    add_override_flags(baseline, baseline_o, false);
    baseline->add_option("--name", baseline_name, "model name for the records");
    baseline->callback([&] { cmd_baseline(baseline, baseline_o, baseline_name); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const kgr::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const kgr::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const kgr::EndpointError& e) {
        std::cerr << "endpoint error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
