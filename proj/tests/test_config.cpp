#include "sigdisc/config.hpp"
#include "sigdisc/error.hpp"
#include "sigdisc/rng.hpp"

#include <doctest.h>

#include <sstream>

using namespace sigdisc;

namespace {

PipelineConfig parse(const std::string& text, const std::vector<std::string>& overrides = {})
{
    std::istringstream in(text);
    return parse_config(in, overrides);
}

}  // namespace

TEST_CASE("defaults")
{
    const auto cfg = parse("");
    CHECK(cfg.ica.k == 6);
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.events_path() == std::filesystem::path("out") / "events.jsonl");
    CHECK(cfg.labels_path() == std::filesystem::path("out") / "labels.csv");
    CHECK(cfg.eval.lambdas.size() == 4);
    CHECK(cfg.report_threshold == 0.01);
    CHECK(cfg.standardize.epsilon == kDefaultCodeEpsilon);
}

TEST_CASE("sections, comments, lists and strings")
{
    const auto cfg = parse(R"(
seed = 42   # root seed
threads = 2
[paths]
output_dir = "runs/a#1"
events = data/events.jsonl
[ica]
k = 4
contrast = "cube"
[eval]
lambdas = [0.5, 1e-3]
l1_ratios = [0.2]
[sampling]
density = 0.25
)");
    CHECK(cfg.seed == 42);
    CHECK(cfg.threads == 2);
    CHECK(cfg.output_dir == "runs/a#1");
    CHECK(cfg.events_path() == "data/events.jsonl");
    CHECK(cfg.dictionary_path() == std::filesystem::path("runs/a#1") / "dictionary.json");
    CHECK(cfg.ica.k == 4);
    CHECK(cfg.ica.contrast == Contrast::Cube);
    CHECK(cfg.eval.lambdas == std::vector<double>{0.5, 1e-3});
    CHECK(cfg.eval.l1_ratios == std::vector<double>{0.2});
    CHECK(cfg.sampling.density == 0.25);
    CHECK(cfg.explicit_keys.count("ica.k") == 1);
}

TEST_CASE("overrides win over the file")
{
    const auto cfg = parse("[ica]\nk = 4\n", {"ica.k=3", "report.threshold = 0.05"});
    CHECK(cfg.ica.k == 3);
    CHECK(cfg.report_threshold == 0.05);
}

TEST_CASE("stage seeds derive from the root seed unless given")
{
    const auto a = parse("seed = 5\n");
    CHECK(a.ica.seed == derive_seed(5, "ica"));
    CHECK(a.sampling.seed == derive_seed(5, "sampling"));
    CHECK(a.synth.seed == derive_seed(5, "synth"));
    CHECK(a.curves.seed == derive_seed(5, "curves"));
    CHECK(parse("seed = 6\n").ica.seed != a.ica.seed);
    const auto b = parse("seed = 5\n[ica]\nseed = 99\n");
    CHECK(b.ica.seed == 99);
    CHECK(b.sampling.seed == a.sampling.seed);
}

TEST_CASE("bad configs are rejected")
{
    CHECK_THROWS_AS(parse("[ica]\nkk = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[nope]\nk = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse("[ica]\nk = three\n"), ConfigError);
    CHECK_THROWS_AS(parse("[ica]\nk = 0\n"), ConfigError);
    CHECK_THROWS_AS(parse("[sampling]\ndensity = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse("[eval]\nl1_ratios = [1.5]\n"), ConfigError);
    CHECK_THROWS_AS(parse("[eval]\nlambdas = [0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse("[eval]\nlambdas = []\n"), ConfigError);
    CHECK_THROWS_AS(parse("", {"ica.k"}), ConfigError);
    CHECK_THROWS_AS(parse("threads = -1\n"), ConfigError);
    try {
        parse("seed = 1\njust words\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    try {
        parse("\n\n[ica]\nbogus = 1\n");
        FAIL("expected a config error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 4") != std::string::npos);
    }
    CHECK_THROWS_AS(load_config("/nonexistent/sigdisc.toml"), MissingInputError);
}

TEST_CASE("config echo")
{
    const auto j = parse("seed = 3\n[ica]\nk = 2\n").to_json();
    CHECK(j["seed"] == 3);
    CHECK(j["ica"]["k"] == 2);
    CHECK(j["paths"]["events"] == (std::filesystem::path("out") / "events.jsonl").string());
}
