#include "fixtures.hpp"
#include "sigdisc/matrix_io.hpp"
#include "sigdisc/pipeline.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace sigdisc;
namespace fs = std::filesystem;

namespace {

const char* kTinyConfig = R"(seed = 3
[sampling]
density = 0.01
[ica]
k = 3
max_iter = 300
[eval]
lambdas = [0.01]
l1_ratios = [0.5]
folds = 2
n_seeds = 2
[synth]
records = 80
codes = 4
measurements = 4
medications = 3
demographics = 2
sources = 3
min_length_days = 800
max_length_days = 1500
)";

PipelineConfig tiny_config(const fs::path& out)
{
    std::istringstream in(kTinyConfig);
    return parse_config(in, {"paths.output_dir=" + out.string()});
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliResult {
    int code = -1;
    std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& scratch)
{
    const fs::path err = scratch / "stderr.txt";
    const std::string cmd = std::string(SIGDISC_CLI) + " " + args + " >" +
                            (scratch / "stdout.txt").string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

}  // namespace

TEST_CASE("stages run in order and write their artifacts")
{
    fixtures::TempDir dir;
    const auto cfg = tiny_config(dir.path);
    cmd_synth(cfg);
    CHECK(fs::exists(dir.path / "events.jsonl"));
    CHECK(fs::exists(dir.path / "labels.csv"));
    CHECK(fs::exists(dir.path / "ground_truth.json"));

    cmd_sample(cfg);
    CHECK(fs::exists(dir.path / "discovery.sgmx"));
    CHECK(fs::exists(dir.path / "population_medians.json"));
    cmd_fit(cfg);
    CHECK(fs::exists(dir.path / "model.sgmodel"));
    CommandOptions index;
    index.sample_mode = SamplingMode::FixedIndexDay;
    cmd_sample(cfg, index);
    const auto eval = read_matrix(dir.path / "evaluation.sgmx");
    CHECK(eval.cols() == 80);
    cmd_project(cfg);
    const auto expr = read_matrix(dir.path / "evaluation_expressions.sgmx");
    CHECK(expr.rows() == 3);
    CHECK(expr.cols() == 80);

    CommandOptions one;
    one.source = 2;
    cmd_report(cfg, one);
    std::vector<fs::path> reports;
    for (const auto& e : fs::directory_iterator(dir.path / "reports"))
        if (e.path().extension() == ".txt") reports.push_back(e.path().filename());
    REQUIRE(reports.size() == 1);
    CHECK(reports[0] == "signature_002.txt");
    one.source = 3;
    CHECK_THROWS_AS(cmd_report(cfg, one), StageError);

    const auto metrics = cmd_eval(cfg);
    CHECK(metrics.contains("signatures"));
    CHECK(metrics.contains("channels"));
    CHECK(fs::exists(dir.path / "eval" / "metrics.json"));

    for (const char* m : {"synth", "sample", "fit", "project", "report", "eval"}) {
        const auto j = nlohmann::json::parse(slurp(dir.path / "manifests" / (std::string(m) + ".json")));
        CHECK(j.contains("config"));
        CHECK(j.contains("seed"));
    }

    const auto gt = read_ground_truth(dir.path);
    CHECK(gt.signatures.cols() == 3);
}

TEST_CASE("a stage with missing inputs names the path")
{
    fixtures::TempDir dir;
    const auto cfg = tiny_config(dir.path);
    try {
        cmd_fit(cfg);
        FAIL("expected an error");
    } catch (const StageError& e) {
        CHECK(e.stage() == "fit");
        CHECK(e.category() == ErrorCategory::MissingInput);
        CHECK(std::string(e.what()).find("discovery.sgmx") != std::string::npos);
    }
}

TEST_CASE("command-line exit codes and error objects")
{
    fixtures::TempDir dir;
    const fs::path config = dir.path / "tiny.toml";
    std::ofstream(config) << kTinyConfig;
    const std::string base = "--config " + config.string() + " --output-dir " +
                             (dir.path / "out").string();

    auto r = run_cli("fit " + base, dir.path);
    CHECK(r.code == 5);
    const auto j = nlohmann::json::parse(r.err);
    CHECK(j["error_category"] == "missing_input");
    CHECK(j["stage"] == "fit");
    CHECK(j["message"].get<std::string>().find("discovery.sgmx") != std::string::npos);

    r = run_cli("fit --config " + (dir.path / "absent.toml").string(), dir.path);
    CHECK(r.code == 5);

    r = run_cli("fit " + base + " --set ica.k=zero", dir.path);
    CHECK(r.code == 6);
    CHECK(nlohmann::json::parse(r.err)["error_category"] == "config");

    r = run_cli("launch " + base, dir.path);
    CHECK(r.code == 6);

    fs::create_directories(dir.path / "out");
    r = run_cli("synth " + base, dir.path);
    CHECK(r.code == 0);
    std::ofstream(dir.path / "out" / "events.jsonl", std::ios::app) << "{not json\n";
    r = run_cli("sample " + base, dir.path);
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error_category"] == "parse");
}
