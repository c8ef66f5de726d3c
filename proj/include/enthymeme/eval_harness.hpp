#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "enthymeme/corpus_builder.hpp"
#include "enthymeme/providers.hpp"

namespace enthymeme {

struct DetectionExample {
    std::string prefix;  // text before the marker
    std::string suffix;  // text after the marker
    Label label = Label::no_gap;
};

struct ReconstructionExample {
    std::string masked_text;  // plain, or with the topic/type header when augmented
    std::string topic;
    AduType adu_type = AduType::premise;
    std::string target;
    bool augmented = false;
};

// Splits the instance text at its single marker; prefix + marker + suffix
// reconstructs text_with_marker. Zero or multiple markers raise
// MarkerMissingError.
DetectionExample to_detection_example(const CorpusInstance& instance,
                                      const std::string& marker = "[GAP]");

// Gap instances only. Augmented inputs carry "topic: <topic> ; type: <adu
// type> ; " before the masked text; plain and augmented differ only in that
// header.
ReconstructionExample to_reconstruction_example(const CorpusInstance& instance, bool augmented,
                                                const std::string& marker = "[GAP]");

struct ClassificationMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Gap is the positive class; zero-denominator precision/recall/f1 are 0.
ClassificationMetrics classification_metrics(const std::vector<Label>& predictions,
                                             const std::vector<Label>& labels);

// Recall-oriented ROUGE over lowercased, punctuation-stripped word tokens:
// clipped n-gram matches (or the LCS length) over the reference count.
double rouge_n(const std::string& candidate, const std::string& reference, std::size_t n);
double rouge_l(const std::string& candidate, const std::string& reference);

struct DetectionReport {
    ClassificationMetrics model;
    ClassificationMetrics random_baseline;
    ClassificationMetrics majority_baseline;
    ClassificationMetrics validation;  // the trained model on the validation split
    std::size_t test_size = 0;
    // test-split audit trail, in corpus order
    std::vector<std::string> test_ids;
    std::vector<Label> test_predictions;
};

// Trains on the train split, reports on the test split; the random baseline
// flips a seeded fair coin, the majority baseline predicts the most frequent
// training label.
DetectionReport run_detection(const TaskModelBackend& backend,
                              const std::vector<CorpusInstance>& corpus, std::uint64_t seed,
                              const std::string& marker = "[GAP]");

struct OverlapMetrics {
    std::optional<double> rouge1;
    std::optional<double> rouge2;
    std::optional<double> rougeL;
    std::optional<double> similarity;
    std::size_t evaluated_count = 0;  // test generations that produced text
    std::size_t total = 0;            // gap instances in the test split
    // (instance id, generated text) per test example, empty string when skipped
    std::vector<std::pair<std::string, std::string>> generations;
};

// Gap infilling over gap instances only; empty generations are excluded from
// the averages (evaluated_count records how many were kept).
OverlapMetrics run_reconstruction(const TaskModelBackend& backend,
                                  const std::vector<CorpusInstance>& corpus, bool augmented,
                                  const SimilarityScoreProvider& similarity,
                                  const std::string& marker = "[GAP]");

}  // namespace enthymeme
