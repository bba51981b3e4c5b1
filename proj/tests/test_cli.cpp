// End-to-end CLI checks; DEIXIS_BIN points at the built binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "deixis/jsonl.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
    const char* bin = std::getenv("DEIXIS_BIN");
    REQUIRE(bin != nullptr);
    return bin;
}

int run(const std::string& args) {
    const std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("forge twice with the same config produces identical files") {
    const std::string dir_a = "/tmp/deixis_cli_a";
    const std::string dir_b = "/tmp/deixis_cli_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    REQUIRE(run("forge --seed 5 --n-clips 3 --out " + dir_a) == 0);
    REQUIRE(run("forge --seed 5 --n-clips 3 --out " + dir_b) == 0);
    CHECK(slurp(dir_a + "/clips.jsonl") == slurp(dir_b + "/clips.jsonl"));
    CHECK(slurp(dir_a + "/manifest.json") == slurp(dir_b + "/manifest.json"));
}

TEST_CASE("qa pipeline runs end to end and eval scores the oracle at 100") {
    const std::string dir = "/tmp/deixis_cli_e2e";
    fs::remove_all(dir);
    REQUIRE(run("forge --seed 11 --n-clips 4 --out " + dir) == 0);
    REQUIRE(run("qa --clips " + dir + "/clips.jsonl --seed 11 --out " + dir + "/qa") == 0);

    const auto items = deixis::read_jsonl(dir + "/qa/dataset.jsonl");
    CHECK(items.size() >= 4 * 5);

    // predictions straight from the stored answer index score 100 everywhere
    std::vector<nlohmann::json> predictions;
    for (const auto& item : items) {
        const int idx = item.at("answer_index").get<int>();
        predictions.push_back({{"qa_id", item.at("qa_id")},
                               {"raw_output", std::string(1, 'A' + idx)}});
    }
    deixis::write_jsonl(dir + "/predictions.jsonl", predictions);
    REQUIRE(run("eval --dataset " + dir + "/qa/dataset.jsonl --predictions " + dir +
                "/predictions.jsonl --probe blind,choices-only --svg --out " + dir +
                "/eval") == 0);

    const auto csv = slurp(dir + "/eval/score.csv");
    CHECK(csv.find("100.0000") != std::string::npos);
    CHECK(fs::exists(dir + "/eval/probe_blind.csv"));
    CHECK(fs::exists(dir + "/eval/probe_choices_only.csv"));
    CHECK(fs::exists(dir + "/eval/random_baseline.svg"));
}

TEST_CASE("qa refuses clips forged under a different config hash") {
    const std::string dir = "/tmp/deixis_cli_hash";
    fs::remove_all(dir);
    REQUIRE(run("forge --seed 3 --n-clips 2 --out " + dir) == 0);
    CHECK(run("qa --clips " + dir + "/clips.jsonl --set gen.jitter_deg=0 --out " + dir +
              "/qa") == 2);
    CHECK(run("qa --clips " + dir + "/clips.jsonl --set gen.jitter_deg=0 --force --out " +
              dir + "/qa") == 0);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run("qa") == 1);                   // missing required --clips
    CHECK(run("definitely-not-a-command") == 1);
}

TEST_CASE("io errors exit with code 3") {
    CHECK(run("eval --dataset /nonexistent/nope.jsonl") == 3);
}

TEST_CASE("malformed dataset lines report ParseError with their line number") {
    const std::string dir = "/tmp/deixis_cli_parse";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream out(dir + "/bad.jsonl");
    out << R"({"qa_id":"q0","clip_id":"c","category":"Reference","question":"?","options":["a","b"],"answer_index":0,"target_ids":[],"structured_question":"?","provenance":{}})"
        << "\n";
    out << "{broken json\n";
    out.close();
    CHECK(run("eval --dataset " + dir + "/bad.jsonl") == 3);
}

TEST_CASE("adapter check and eval self-check pass") {
    CHECK(run("adapter check --seed 2") == 0);
    CHECK(run("eval --self-check") == 0);
}
