#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "enthymeme/essay_model.hpp"

namespace enthymeme {

enum class AduType { premise, claim, major_claim, non_argumentative };
enum class Sentiment { negative, neutral, positive };

std::string to_string(AduType type);
AduType adu_type_from_string(const std::string& name);
std::string to_string(Sentiment sentiment);

// -------------------------------------------------------------------------
// Capability interfaces. The pipeline consumes models only through these;
// instances must be safe for concurrent read-only use after construction.
// -------------------------------------------------------------------------

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const = 0;
    // One vector per input string, dimension() entries each, finite values.
    virtual std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const = 0;
};

struct NeighborJudgment {
    bool plausible = false;
    double confidence = 0.0;  // in [0, 1], consistent with `plausible` at threshold 0.5
};

class NeighborPlausibilityProvider {
public:
    virtual ~NeighborPlausibilityProvider() = default;
    virtual NeighborJudgment judge(const std::string& left_context,
                                   const std::string& right_context) const = 0;
};

class AduTypeProvider {
public:
    virtual ~AduTypeProvider() = default;
    virtual AduType classify(const std::string& sentence, const std::string& essay_context) const = 0;
};

class SentimentProvider {
public:
    virtual ~SentimentProvider() = default;
    virtual Sentiment classify(const std::string& paragraph) const = 0;
};

class SyntaxProvider {
public:
    virtual ~SyntaxProvider() = default;
    // One tag per token of the sentence.
    virtual std::vector<std::string> pos_tags(const Sentence& sentence) const = 0;
    virtual std::map<std::string, std::size_t> entity_type_counts(const std::string& essay_text) const = 0;
    virtual std::size_t error_count(const std::string& essay_text) const = 0;
};

class RegressionModel {
public:
    virtual ~RegressionModel() = default;
    virtual std::vector<double> predict(const std::vector<std::vector<double>>& features) const = 0;
    virtual std::string serialize() const = 0;
};

class RegressionBackend {
public:
    virtual ~RegressionBackend() = default;
    virtual std::unique_ptr<RegressionModel> fit(const std::vector<std::vector<double>>& features,
                                                 const std::vector<double>& targets) const = 0;
    virtual std::unique_ptr<RegressionModel> deserialize(const std::string& blob) const = 0;
};

class SimilarityScoreProvider {
public:
    virtual ~SimilarityScoreProvider() = default;
    // Rescaled similarity, may be negative; score(x, x) >= score(x, y).
    virtual double score(const std::string& candidate, const std::string& reference) const = 0;
};

struct ClassifierExample {
    std::string prefix;  // text before the marked position
    std::string suffix;  // text after it
    bool is_gap = false;
};

struct GeneratorExample {
    std::string masked_input;
    std::string target;
};

class FittedClassifier {
public:
    virtual ~FittedClassifier() = default;
    virtual bool predict_gap(const std::string& prefix, const std::string& suffix) const = 0;
};

class FittedGenerator {
public:
    virtual ~FittedGenerator() = default;
    // May return an empty string when the model produces nothing.
    virtual std::string generate(const std::string& masked_input) const = 0;
};

class TaskModelBackend {
public:
    virtual ~TaskModelBackend() = default;
    virtual std::unique_ptr<FittedClassifier> train_classifier(
        const std::vector<ClassifierExample>& examples) const = 0;
    virtual std::unique_ptr<FittedGenerator> train_generator(
        const std::vector<GeneratorExample>& examples) const = 0;
};

// One instance of every capability; the unit the pipeline is wired with.
struct ProviderSet {
    std::shared_ptr<const EmbeddingProvider> embeddings;
    std::shared_ptr<const NeighborPlausibilityProvider> neighbors;
    std::shared_ptr<const AduTypeProvider> adu_types;
    std::shared_ptr<const SentimentProvider> sentiment;
    std::shared_ptr<const SyntaxProvider> syntax;
    std::shared_ptr<const RegressionBackend> regression;
    std::shared_ptr<const SimilarityScoreProvider> similarity;
    std::shared_ptr<const TaskModelBackend> task_models;
};

// Deterministic offline doubles; every member is a pure function of
// (seed, input). Two sets built with the same seed agree on all inputs.
ProviderSet make_test_doubles(std::uint64_t seed, std::size_t embedding_dimension = 16);

// Resolves a configuration selector, e.g. "double:42". Real model adapters
// register here; unknown selectors raise ConfigError.
ProviderSet make_provider_set(const std::string& selector);

// Memoizes embeddings in cache_dir (one file per provider key); used when
// ENTHYMEME_FORGE_CACHE is set. Wrapping does not change any output.
std::shared_ptr<const EmbeddingProvider> with_embedding_cache(
    std::shared_ptr<const EmbeddingProvider> inner, const std::string& cache_dir,
    const std::string& provider_key);

}  // namespace enthymeme
