#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "enthymeme/cli.hpp"
#include "enthymeme/errors.hpp"
#include "enthymeme/essay_scoring.hpp"
#include "enthymeme/util.hpp"

using namespace enthymeme;
namespace fs = std::filesystem;

namespace {

std::string file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

// Small essay corpus on disk: argumentative paragraphs with premise/claim
// markers plus one neutral paragraph per essay, titles in metadata.tsv,
// constant ratings so every essay clears the quality threshold.
void write_fixture(const std::string& root) {
    fs::create_directories(fs::path(root) / "essays");
    std::ofstream metadata(fs::path(root) / "essays" / "metadata.tsv");
    std::ofstream ratings(fs::path(root) / "ratings.tsv");
    Rng rng(404);
    for (int i = 0; i < 14; ++i) {
        std::string id = "essay" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        std::vector<std::string> sentences;
        std::size_t count = 5 + rng.next_index(4);
        for (std::size_t s = 0; s < count; ++s) {
            if (s % 3 == 2) {
                sentences.push_back("Therefore city " + std::to_string(i) +
                                    " should change rule " + std::to_string(s) + " soon.");
            } else {
                sentences.push_back("Point " + std::to_string(i) + "x" + std::to_string(s) +
                                    " holds because strong evidence supports it.");
            }
        }
        std::string neutral =
            "The town square looked calm. People walked around slowly. Shops opened early.";
        std::ofstream essay(fs::path(root) / "essays" / (id + ".txt"));
        essay << join(sentences, " ") << "\n\n" << neutral << "\n";
        metadata << id << '\t' << "city rules topic " << i % 3 << '\n';
        for (const char* dimension : {"organization", "clarity", "strength"}) {
            ratings << id << '\t' << dimension << '\t' << "3.8" << '\n';
        }
    }
}

std::string write_config(const std::string& root, const std::string& name,
                         const std::string& mode, const std::string& output,
                         const std::string& models = "", bool with_seed = true) {
    nlohmann::ordered_json j;
    j["paths"]["essays"] = root + "/essays";
    j["paths"]["ratings"] = root + "/ratings.tsv";
    j["paths"]["models"] = models.empty() ? root + "/models" : models;
    j["paths"]["output"] = output;
    j["ranking"]["mode"] = mode;
    if (with_seed) j["sampling"]["seed"] = 21;
    j["providers"]["default"] = "double:7";
    std::string path = root + "/" + name;
    std::ofstream out(path);
    out << j.dump(2);
    return path;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("full command flow over a synthetic corpus") {
    const std::string root = "cli_fixture";
    fs::remove_all(root);
    write_fixture(root);
    std::string config = write_config(root, "config.json", "full", root + "/out");

    SUBCASE("train, score, build, analyze, evaluate") {
        REQUIRE(run_cli({"--config", config, "train-scorers"}) == kExitOk);
        for (const char* dimension : {"organization", "clarity", "strength"}) {
            CHECK(fs::exists(fs::path(root) / "models" / dimension / "model.json"));
        }
        std::string hash_first = scorer_set_content_hash(root + "/models");
        REQUIRE(run_cli({"--config", config, "train-scorers"}) == kExitOk);
        CHECK(scorer_set_content_hash(root + "/models") == hash_first);  // deterministic rerun

        CHECK(run_cli({"--config", config, "score"}) == kExitOk);
        CHECK(fs::exists(fs::path(root) / "out" / "scores.tsv"));

        REQUIRE(run_cli({"--config", config, "create-corpus"}) == kExitOk);
        for (const char* name :
             {"corpus.train", "corpus.validation", "corpus.test", "corpus.stats", "corpus.trace"}) {
            CHECK(fs::exists(fs::path(root) / "out" / name));
        }

        // trace rows monotone non-increasing
        std::istringstream trace(file_bytes(root + "/out/corpus.trace"));
        std::string line;
        std::getline(trace, line);  // header
        long long last[3] = {-1, -1, -1};
        while (std::getline(trace, line)) {
            std::istringstream fields(line);
            std::string stage;
            long long values[3];
            std::getline(fields, stage, '\t');
            fields >> values[0] >> values[1] >> values[2];
            if (last[0] >= 0) {
                CHECK(values[0] <= last[0]);
                CHECK(values[1] <= last[1]);
                CHECK(values[2] <= last[2]);
            }
            for (int k = 0; k < 3; ++k) last[k] = values[k];
        }

        // byte-identical rebuild with the same config and seed
        std::string config_b = write_config(root, "config_b.json", "full", root + "/out_b");
        REQUIRE(run_cli({"--config", config_b, "create-corpus"}) == kExitOk);
        for (const char* name :
             {"corpus.train", "corpus.validation", "corpus.test", "corpus.stats", "corpus.trace"}) {
            CHECK(file_bytes(root + "/out/" + std::string(name)) ==
                  file_bytes(root + "/out_b/" + std::string(name)));
        }

        CHECK(run_cli({"--config", config, "analyze"}) == kExitOk);
        CHECK(run_cli({"--config", config, "analyze", "--compare", root + "/out_b"}) == kExitOk);

        REQUIRE(run_cli({"--config", config, "evaluate", "--task", "detection",
                         "--dump-predictions", root + "/out/predictions.tsv"}) == kExitOk);
        std::string report = file_bytes(root + "/out/report.detection.txt");
        CHECK(report.find("random") != std::string::npos);
        CHECK(report.find("majority") != std::string::npos);
        CHECK(report.find("model") != std::string::npos);
        CHECK(fs::exists(fs::path(root) / "out" / "predictions.tsv"));

        CHECK(run_cli({"--config", config, "evaluate", "--task", "reconstruction"}) == kExitOk);
        CHECK(run_cli({"--config", config, "evaluate", "--task", "reconstruction",
                       "--augmented"}) == kExitOk);
        CHECK(fs::exists(fs::path(root) / "out" / "report.reconstruction.txt"));
    }
}

TEST_CASE("centrality mode ignores the scoring model directory") {
    const std::string root = "cli_centrality";
    fs::remove_all(root);
    write_fixture(root);

    // two configs pointing at different (even nonexistent) model directories
    std::string config_a = write_config(root, "config_a.json", "centrality", root + "/out_a",
                                        root + "/no-models-a");
    std::string config_b = write_config(root, "config_b.json", "centrality", root + "/out_b",
                                        root + "/no-models-b");
    REQUIRE(run_cli({"--config", config_a, "create-corpus"}) == kExitOk);
    REQUIRE(run_cli({"--config", config_b, "create-corpus"}) == kExitOk);
    for (const char* name :
         {"corpus.train", "corpus.validation", "corpus.test", "corpus.stats", "corpus.trace"}) {
        CHECK(file_bytes(root + "/out_a/" + std::string(name)) ==
              file_bytes(root + "/out_b/" + std::string(name)));
    }
}

TEST_CASE("random mode builds the baseline corpus without models") {
    const std::string root = "cli_random";
    fs::remove_all(root);
    write_fixture(root);
    std::string config = write_config(root, "config.json", "random", root + "/out",
                                      root + "/absent-models");
    REQUIRE(run_cli({"--config", config, "create-corpus"}) == kExitOk);
    auto corpus = read_corpus(root + "/out");
    CHECK(!corpus.empty());
    bool has_gap = false;
    for (const auto& instance : corpus) has_gap |= instance.label == Label::gap;
    CHECK(has_gap);
}

TEST_CASE("parallel jobs do not change corpus bytes") {
    const std::string root = "cli_jobs";
    fs::remove_all(root);
    write_fixture(root);
    std::string config_a = write_config(root, "config_a.json", "full", root + "/out_a");
    std::string config_b = write_config(root, "config_b.json", "full", root + "/out_b");
    REQUIRE(run_cli({"--config", config_a, "train-scorers"}) == kExitOk);
    REQUIRE(run_cli({"--config", config_a, "create-corpus"}) == kExitOk);
    REQUIRE(run_cli({"--config", config_b, "--jobs", "3", "create-corpus"}) == kExitOk);
    for (const char* name :
         {"corpus.train", "corpus.validation", "corpus.test", "corpus.stats", "corpus.trace"}) {
        CHECK(file_bytes(root + "/out_a/" + std::string(name)) ==
              file_bytes(root + "/out_b/" + std::string(name)));
    }
}

TEST_CASE("embedding cache directory is honored") {
    const std::string root = "cli_cache";
    fs::remove_all(root);
    write_fixture(root);
    std::string config = write_config(root, "config.json", "centrality", root + "/out");
    setenv("ENTHYMEME_FORGE_CACHE", (root + "/cache").c_str(), 1);
    int rc = run_cli({"--config", config, "create-corpus"});
    REQUIRE(rc == kExitOk);
    // the provider set is torn down at command end, flushing the cache file
    CHECK(fs::exists(fs::path(root) / "cache" / "double_7.embeddings.json"));
    std::string cached_bytes = file_bytes(root + "/out/corpus.train");

    // a second run served from the cache produces identical output
    std::string config_b = write_config(root, "config_b.json", "centrality", root + "/out_b");
    int rc_b = run_cli({"--config", config_b, "create-corpus"});
    unsetenv("ENTHYMEME_FORGE_CACHE");
    REQUIRE(rc_b == kExitOk);
    CHECK(file_bytes(root + "/out_b/corpus.train") == cached_bytes);
    CHECK(!read_corpus(root + "/out").empty());
}

TEST_CASE("ablation reports on request") {
    const std::string root = "cli_ablate";
    fs::remove_all(root);
    write_fixture(root);
    std::string config = write_config(root, "config.json", "full", root + "/out");
    REQUIRE(run_cli({"--config", config, "train-scorers", "--ablate"}) == kExitOk);
    for (const char* dimension : {"organization", "clarity", "strength"}) {
        fs::path report = fs::path(root) / "models" / ("ablation_" + std::string(dimension) +
                                                       ".tsv");
        REQUIRE(fs::exists(report));
        std::string content = file_bytes(report.string());
        // all-features row plus nine leave-one-out rows plus the configured set
        CHECK(std::count(content.begin(), content.end(), '\n') == 1 + 1 + 9 + 1);
    }
}

TEST_CASE("exit codes distinguish config and data errors") {
    const std::string root = "cli_errors";
    fs::remove_all(root);
    write_fixture(root);

    // missing ratings path: exit 3 with a message naming the key
    nlohmann::ordered_json j;
    j["paths"]["essays"] = root + "/essays";
    j["paths"]["models"] = root + "/models";
    j["sampling"]["seed"] = 1;
    j["providers"]["default"] = "double:7";
    std::string no_ratings = root + "/no_ratings.json";
    {
        std::ofstream out(no_ratings);
        out << j.dump(2);
    }
    CHECK(run_cli({"--config", no_ratings, "train-scorers"}) == kExitDataError);

    // invalid config value: exit 2
    j["paths"]["ratings"] = root + "/ratings.tsv";
    j["ranking"]["lambda"] = 1.5;
    std::string bad_lambda = root + "/bad_lambda.json";
    {
        std::ofstream out(bad_lambda);
        out << j.dump(2);
    }
    CHECK(run_cli({"--config", bad_lambda, "train-scorers"}) == kExitConfigError);

    std::string config = write_config(root, "config.json", "full", root + "/out");
    // unknown task and unknown mode: exit 2
    CHECK(run_cli({"--config", config, "evaluate", "--task", "translation"}) ==
          kExitConfigError);
    CHECK(run_cli({"--config", config, "--mode", "sideways", "create-corpus"}) ==
          kExitConfigError);
    // missing seed for a corpus-producing command: exit 2
    std::string no_seed = write_config(root, "no_seed.json", "full", root + "/out", "", false);
    CHECK(run_cli({"--config", no_seed, "create-corpus"}) == kExitConfigError);
    // nonexistent config file: exit 2; nonexistent corpus for evaluate: exit 3
    CHECK(run_cli({"--config", root + "/absent.json", "score"}) == kExitConfigError);
    std::string empty_out = write_config(root, "empty_out.json", "full", root + "/never-built");
    CHECK(run_cli({"--config", empty_out, "evaluate", "--task", "detection"}) ==
          kExitDataError);
}

}  // TEST_SUITE
