#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "deixis/config.hpp"

using namespace deixis;

namespace {

std::string write_temp_config(const std::string& content) {
    const std::string path = "/tmp/deixis_test_config.ini";
    std::ofstream out(path, std::ios::trunc);
    out << content;
    return path;
}

} // namespace

TEST_CASE("config file parsing with sections and comments") {
    const auto path = write_temp_config(
        "# comment\n"
        "seed = 99\n"
        "n_clips = 12\n"
        "[gen]\n"
        "fps = 25\n"
        "min_objects = 4\n"
        "[resolver]\n"
        "dwell_min_s = 0.8\n");
    const auto map = parse_config_file(path);
    CHECK(map.at("seed") == "99");
    CHECK(map.at("gen.fps") == "25");
    CHECK(map.at("resolver.dwell_min_s") == "0.8");

    const auto cfg = PipelineConfig::from_map(map);
    CHECK(cfg.seed == 99);
    CHECK(cfg.n_clips == 12);
    CHECK(cfg.gen.fps == 25.0);
    CHECK(cfg.gen.min_objects == 4);
    CHECK(cfg.resolver.dwell_min_s == 0.8);
}

TEST_CASE("malformed config lines raise ParseError with the line number") {
    const auto path = write_temp_config("seed = 1\nbogus line\n");
    try {
        parse_config_file(path);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
}

TEST_CASE("environment variables override file values") {
    const auto path = write_temp_config("[gen]\nfps = 25\n");
    auto map = parse_config_file(path);
    setenv("DEIXIS_GEN_FPS", "60", 1);
    apply_env_overrides(map);
    unsetenv("DEIXIS_GEN_FPS");
    CHECK(map.at("gen.fps") == "60");
}

TEST_CASE("command-line overrides beat everything") {
    auto map = parse_config_file(write_temp_config("seed = 1\n"));
    apply_override(map, "seed=123");
    CHECK(PipelineConfig::from_map(map).seed == 123);
    CHECK_THROWS_AS(apply_override(map, "not-a-pair"), ConfigInvalid);
}

TEST_CASE("config hash is stable and sensitive") {
    PipelineConfig a;
    PipelineConfig b;
    CHECK(config_hash(a) == config_hash(b));
    b.gen.jitter_deg = 0.0;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("qa per-category counts parse from config keys") {
    ConfigMap map;
    map["qa.reference"] = "5";
    map["qa.temporal"] = "0";
    const auto cfg = PipelineConfig::from_map(map);
    CHECK(cfg.qa.per_clip_counts.at("Reference") == 5);
    CHECK(cfg.qa.per_clip_counts.at("Temporal") == 0);
    CHECK(cfg.qa.per_clip_counts.count("Spatial") == 0);
}

TEST_CASE("tau flows into the scorer gate") {
    ConfigMap map;
    map["tau"] = "0.7";
    const auto cfg = PipelineConfig::from_map(map);
    CHECK(cfg.scorer.tau == 0.7);
}

TEST_CASE("invalid rephraser mode is rejected") {
    ConfigMap map;
    map["rephraser.mode"] = "llm";
    CHECK_THROWS_AS(PipelineConfig::from_map(map), ConfigInvalid);
}
