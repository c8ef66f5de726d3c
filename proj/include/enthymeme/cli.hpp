#pragma once

#include <string>
#include <vector>

#include "enthymeme/corpus_builder.hpp"
#include "enthymeme/essay_model.hpp"
#include "enthymeme/pipeline.hpp"
#include "enthymeme/ranking.hpp"

namespace enthymeme {

// All paper constants live here as defaults; nothing is hardcoded at call
// sites. Loaded from a single JSON config file.
// Fixed fine-tuning settings handed to task-model adapters. The offline
// doubles have no trainable hyperparameters and ignore them.
struct TaskBackendConfig {
    std::size_t detection_epochs = 24;
    double detection_learning_rate = 1e-5;
    std::size_t batch_size = 16;
    std::size_t reconstruction_epochs = 5;
    double reconstruction_learning_rate = 2e-5;
};

struct RunConfig {
    struct Paths {
        std::string essays;
        std::string ratings;
        std::string models;
        std::string output;
    } paths;
    PipelineConfig thresholds;
    RankingConfig ranking;
    SamplingConfig sampling;
    TaskBackendConfig task_backend;
    std::string provider_selector = "double:0";
    bool seed_set = false;  // corpus-producing commands require an explicit seed
};

RunConfig load_run_config(const std::string& path);

// One plain-text file per essay (paragraphs blank-line separated) plus a
// metadata.tsv sidecar mapping essay id to its title/prompt. Essays are
// returned sorted by id.
std::vector<Essay> load_essay_directory(const std::string& path);

// Exit codes: 0 success, 2 configuration error, 3 data error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitDataError = 3;

// argv-style entry point used by the binary and by integration tests.
int run_cli(const std::vector<std::string>& args);

}  // namespace enthymeme
