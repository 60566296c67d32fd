#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <nlohmann/json.hpp>

#include "kgr/config.hpp"
#include "kgr/errors.hpp"
#include "kgr/metrics.hpp"
#include "kgr/runner.hpp"
#include "kgr/util.hpp"

using namespace kgr;
using nlohmann::json;

namespace {

const std::string kFixtures = KGR_FIXTURE_DIR;
const std::string kPrompts = KGR_PROMPTS_DIR;
const std::string kCliBin = KGR_CLI_BIN;

std::filesystem::path fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / "kgr_cli_test" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::filesystem::path& dir, const std::string& args) {
    auto out_file = dir / "cli_stdout.txt";
    auto err_file = dir / "cli_stderr.txt";
    std::string cmd =
        kCliBin + " " + args + " >" + out_file.string() + " 2>" + err_file.string();
    int raw = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    result.out = util::read_file(out_file);
    result.err = util::read_file(err_file);
    return result;
}

// Sandbox with a ready-to-run config: fixture snapshot, fixture tasks, echo
// model, small trial counts.
std::filesystem::path make_sandbox(const std::string& name) {
    auto dir = fresh_dir(name);
    std::string config;
    config += "kg.triples = " + kFixtures + "/kg.nt\n";
    config += "kg.ontology = " + kFixtures + "/ontology.nt\n";
    config += "tasks.files = " + kFixtures + "/tasks.jsonl\n";
    config += "prompts.dir = " + kPrompts + "\n";
    config += "run.cache_dir = " + (dir / "cache").string() + "\n";
    config += "run.out_dir = " + (dir / "out").string() + "\n";
    config += "labels.file = " + (dir / "labels.tsv").string() + "\n";
    config += "run.trials_relation = 2\n";
    config += "run.trials_cpg = 1\n";
    config += "model.echo.endpoint = mock:echo\n";
    util::write_file_atomic(dir / "run.conf", config);
    return dir;
}

size_t count_lines(const std::filesystem::path& path) {
    std::string content = util::read_file(path);
    size_t n = 0;
    for (char c : content) {
        if (c == '\n') {
            ++n;
        }
    }
    return n;
}

} // namespace

TEST_CASE("config files are flat dotted keys with later assignments winning") {
    auto dir = fresh_dir("config_parse");
    util::write_file_atomic(dir / "a.conf",
                            "# comment\n"
                            "\n"
                            "  run.seed = 7\n"
                            "run.out_dir = first\n"
                            "run.out_dir = second\n"
                            "flag.on = true\n"
                            "name = value with spaces\n");
    ConfigMap map = ConfigMap::load(dir / "a.conf");
    CHECK(map.get_int_or("run.seed", 0) == 7);
    CHECK(map.get_or("run.out_dir", "") == "second");
    CHECK(map.get_bool_or("flag.on", false));
    CHECK(map.get_or("name", "") == "value with spaces");
    CHECK(map.get("missing") == std::nullopt);
    CHECK(map.get_or("missing", "fallback") == "fallback");
    CHECK(map.get_int_or("missing", 9) == 9);

    // Canonical form is sorted key=value lines; it feeds the config hash.
    std::string canon = map.canonical_string();
    CHECK(canon.find("flag.on=true\n") < canon.find("name=value with spaces\n"));
    CHECK(canon.find("name=") < canon.find("run.out_dir=second"));

    CHECK_THROWS_AS((void)map.get_int_or("name", 0), DataError);
    CHECK_THROWS_AS((void)map.get_bool_or("name", false), DataError);

    util::write_file_atomic(dir / "noeq.conf", "run.seed 7\n");
    CHECK_THROWS_WITH_AS((void)ConfigMap::load(dir / "noeq.conf"), doctest::Contains(":1"),
                         DataError);
    util::write_file_atomic(dir / "badkey.conf", "bad key! = 1\n");
    CHECK_THROWS_AS((void)ConfigMap::load(dir / "badkey.conf"), DataError);
}

TEST_CASE("run configs resolve defaults, models and the config hash") {
    ConfigMap map;
    map.set("kg.triples", "kg.nt");
    map.set("kg.ontology", "ontology.nt");
    map.set("tasks.files", "a.jsonl  b.jsonl");
    map.set("model.gpt-4.endpoint", "https://example.test/v1/chat/completions");
    map.set("model.gpt-4.strategy", "auto-cot");
    map.set("model.gpt-4.wire_model", "gpt-4-0613");
    map.set("model.alpaca.endpoint", "mock:echo");

    RunConfig cfg = RunConfig::from_map(map);
    CHECK(cfg.task_files == std::vector<std::filesystem::path>{"a.jsonl", "b.jsonl"});
    CHECK(cfg.prompts_dir == "prompts");
    CHECK(cfg.trials_relation == 10);
    CHECK(cfg.trials_cpg == 5);
    CHECK(cfg.max_in_flight == 4);
    CHECK(cfg.seed == 42);
    CHECK_FALSE(cfg.replay);
    REQUIRE(cfg.models.size() == 2);
    CHECK(cfg.models[0].name == "alpaca");
    CHECK(cfg.models[0].strategy == Strategy::SingleStep);
    CHECK(cfg.models[0].wire_model == "alpaca");
    CHECK(cfg.models[1].name == "gpt-4");
    CHECK(cfg.models[1].strategy == Strategy::SingleStepAutoCoT);
    CHECK(cfg.models[1].wire_model == "gpt-4-0613");
    CHECK(cfg.config_hash == util::sha256_hex16(map.canonical_string()));

    // The hash tracks what the run generates, not where it lands or how it
    // is scheduled.
    ConfigMap same = map;
    CHECK(RunConfig::from_map(same).config_hash == cfg.config_hash);
    same.set("run.out_dir", "elsewhere");
    same.set("run.cache_dir", "other_cache");
    same.set("run.max_in_flight", "16");
    same.set("run.replay", "true");
    same.set("labels.file", "other.tsv");
    CHECK(RunConfig::from_map(same).config_hash == cfg.config_hash);
    same.set("run.seed", "43");
    CHECK(RunConfig::from_map(same).config_hash != cfg.config_hash);

    SUBCASE("missing pieces are data errors") {
        ConfigMap broken = map;
        broken.set("kg.triples", "");
        CHECK_THROWS_WITH_AS((void)RunConfig::from_map(broken), doctest::Contains("kg.triples"),
                             DataError);
    }
    SUBCASE("a config without models is rejected") {
        ConfigMap empty;
        empty.set("kg.triples", "kg.nt");
        empty.set("kg.ontology", "ontology.nt");
        empty.set("tasks.files", "a.jsonl");
        CHECK_THROWS_WITH_AS((void)RunConfig::from_map(empty), doctest::Contains("no models"),
                             DataError);
    }
    SUBCASE("unknown strategies are rejected") {
        ConfigMap bad = map;
        bad.set("model.gpt-4.strategy", "zero-shot");
        CHECK_THROWS_WITH_AS((void)RunConfig::from_map(bad), doctest::Contains("zero-shot"),
                             DataError);
    }
    SUBCASE("mock:script needs a script file") {
        ConfigMap bad = map;
        bad.set("model.alpaca.endpoint", "mock:script");
        CHECK_THROWS_AS((void)RunConfig::from_map(bad), DataError);
    }
    SUBCASE("trial counts and concurrency must be positive") {
        ConfigMap bad = map;
        bad.set("run.trials_cpg", "0");
        CHECK_THROWS_AS((void)RunConfig::from_map(bad), DataError);
        ConfigMap bad2 = map;
        bad2.set("run.max_in_flight", "0");
        CHECK_THROWS_AS((void)RunConfig::from_map(bad2), DataError);
    }
}

TEST_CASE("ingest prints snapshot statistics and rejects broken input") {
    auto dir = fresh_dir("ingest");
    CliResult ok = run_cli(dir, "ingest --kg " + kFixtures + "/kg.nt --ontology " + kFixtures +
                                    "/ontology.nt");
    CHECK(ok.code == 0);
    CHECK(ok.out.find("triples: 22") != std::string::npos);
    CHECK(ok.out.find("entities: 25") != std::string::npos);
    CHECK(ok.out.find("classes: 9") != std::string::npos);

    util::write_file_atomic(dir / "broken.nt", "dbr:A dbo:starring\n");
    CliResult bad = run_cli(dir, "ingest --kg " + (dir / "broken.nt").string() + " --ontology " +
                                     kFixtures + "/ontology.nt");
    CHECK(bad.code == 2);
    CHECK(bad.err.find("data error") != std::string::npos);
}

TEST_CASE("make-tasks is deterministic per seed") {
    auto dir = fresh_dir("make_tasks");
    std::string base = "make-tasks --kg " + kFixtures + "/kg.nt --ontology " + kFixtures +
                       "/ontology.nt --kind tail --count 4 --seed 9 --out ";
    CliResult first = run_cli(dir, base + (dir / "one.jsonl").string());
    CHECK(first.code == 0);
    CHECK(first.out.find("wrote 4 tail queries") != std::string::npos);
    CliResult second = run_cli(dir, base + (dir / "two.jsonl").string());
    CHECK(second.code == 0);
    CHECK(util::read_file(dir / "one.jsonl") == util::read_file(dir / "two.jsonl"));

    CliResult bad_kind =
        run_cli(dir, "make-tasks --kg a --ontology b --kind bogus --count 1 --out c");
    CHECK(bad_kind.code == 1);

    CliResult oversample = run_cli(dir, "make-tasks --kg " + kFixtures + "/kg.nt --ontology " +
                                            kFixtures +
                                            "/ontology.nt --kind tail --count 4000 --seed 1 "
                                            "--out " +
                                            (dir / "over.jsonl").string());
    CHECK(oversample.code == 2);
}

TEST_CASE("run, score, report and label flow end to end") {
    auto dir = make_sandbox("e2e");
    std::string cfg = " --config " + (dir / "run.conf").string();

    CliResult run = run_cli(dir, "run" + cfg);
    REQUIRE(run.code == 0);
    CHECK(run.out.find("wrote 14 records (0 failed generations)") != std::string::npos);
    auto records_file = dir / "out" / "records" / "echo.jsonl";
    REQUIRE(std::filesystem::exists(records_file));
    CHECK(count_lines(records_file) == 14);

    // Every record carries the config hash and a cache key per request.
    json first = json::parse(util::read_file(records_file).substr(
        0, util::read_file(records_file).find('\n')));
    CHECK(first["model"] == "echo");
    CHECK(first["config_hash"].get<std::string>().size() == 16);
    CHECK(first["cache_keys"].size() == 1);

    CliResult score = run_cli(dir, "score" + cfg);
    REQUIRE(score.code == 0);
    CHECK(std::filesystem::exists(dir / "out" / "metrics.csv"));
    CHECK(std::filesystem::exists(dir / "out" / "report.txt"));
    std::string csv = util::read_file(dir / "out" / "metrics.csv");
    CHECK(csv.rfind("model,task,H-ACC,S-ACC,NGEO,%IF,%IV,trials,unresolved\n", 0) == 0);
    CHECK(csv.find("echo,tail,100.0,100.0,,,,2,0") != std::string::npos);
    CHECK(csv.find("echo,cpg,,,0.00,0.00,0.00,1,") != std::string::npos);

    CliResult report = run_cli(dir, "report" + cfg);
    CHECK(report.code == 0);
    CHECK(report.out.find("H-ACC") != std::string::npos);
    CHECK(report.out == util::read_file(dir / "out" / "report.txt"));

    // Echo answers are all hard-correct, so nothing needs labeling.
    CliResult exported = run_cli(dir, "label export" + cfg + " --out " +
                                          (dir / "todo.tsv").string());
    CHECK(exported.code == 0);
    CHECK(exported.out.find("exported 0 unresolved answers") != std::string::npos);

    util::write_file_atomic(dir / "labeled.tsv", "q-1\tdbr:Some_Answer\tCorrectFact\n");
    CliResult imported = run_cli(dir, "label import" + cfg + " --in " +
                                          (dir / "labeled.tsv").string());
    CHECK(imported.code == 0);
    CHECK(imported.out.find("imported 1 new labels") != std::string::npos);
    CliResult re_imported = run_cli(dir, "label import" + cfg + " --in " +
                                             (dir / "labeled.tsv").string());
    CHECK(re_imported.code == 0);
    CHECK(re_imported.out.find("imported 0 new labels") != std::string::npos);

    util::write_file_atomic(dir / "conflict.tsv", "q-1\tdbr:Some_Answer\tIncorrectFact\n");
    CliResult conflict = run_cli(dir, "label import" + cfg + " --in " +
                                          (dir / "conflict.tsv").string());
    CHECK(conflict.code == 2);

    // A warm cache replays byte for byte; a cold one is an endpoint error.
    std::string before = util::read_file(records_file);
    CliResult replay = run_cli(dir, "run" + cfg + " --replay");
    CHECK(replay.code == 0);
    CHECK(util::read_file(records_file) == before);

    CliResult cold = run_cli(dir, "run" + cfg + " --replay --cache-dir " +
                                      (dir / "empty_cache").string());
    CHECK(cold.code == 3);
    CHECK(cold.err.find("endpoint error") != std::string::npos);
}

TEST_CASE("baseline emits deterministic shortest-path records") {
    auto dir = make_sandbox("baseline");
    std::string cfg = " --config " + (dir / "run.conf").string();

    CliResult baseline = run_cli(dir, "baseline" + cfg + " --name graph");
    REQUIRE(baseline.code == 0);
    CHECK(baseline.out.find("wrote 2 baseline records") != std::string::npos);
    auto file = dir / "out" / "records" / "graph.jsonl";
    REQUIRE(std::filesystem::exists(file));
    CHECK(count_lines(file) == 2);

    // The graph baseline reproduces both fixture ground truths, so it scores
    // a perfect NGEO.
    CliResult score = run_cli(dir, "score" + cfg);
    REQUIRE(score.code == 0);
    std::string csv = util::read_file(dir / "out" / "metrics.csv");
    CHECK(csv.find("graph,cpg,,,0.00,0.00,0.00,1,") != std::string::npos);
}

TEST_CASE("cli exit codes distinguish usage, data and endpoint failures") {
    auto dir = make_sandbox("exit_codes");
    std::string cfg = " --config " + (dir / "run.conf").string();

    CHECK(run_cli(dir, "").code == 1);
    CHECK(run_cli(dir, "frobnicate").code == 1);
    CHECK(run_cli(dir, "run").code == 1);
    CHECK(run_cli(dir, "run" + cfg + " --bogus-flag").code == 1);
    CHECK(run_cli(dir, "label" + cfg).code == 1);

    util::write_file_atomic(dir / "nomodel.conf",
                            "kg.triples = " + kFixtures + "/kg.nt\n" +
                                "kg.ontology = " + kFixtures + "/ontology.nt\n" +
                                "tasks.files = " + kFixtures + "/tasks.jsonl\n");
    CliResult nomodel = run_cli(dir, "run --config " + (dir / "nomodel.conf").string());
    CHECK(nomodel.code == 2);
    CHECK(nomodel.err.find("no models") != std::string::npos);

    CliResult missing = run_cli(dir, "run --config " + (dir / "missing.conf").string());
    CHECK(missing.code == 2);

    // Overrides reach the config: a different out dir receives the records.
    CliResult moved = run_cli(dir, "run" + cfg + " --out-dir " + (dir / "out2").string());
    CHECK(moved.code == 0);
    CHECK(std::filesystem::exists(dir / "out2" / "records" / "echo.jsonl"));
}
