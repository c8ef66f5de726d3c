#pragma once

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "enthymeme/essay_model.hpp"
#include "enthymeme/providers.hpp"

namespace enthymeme {

enum class QualityDimension { organization, clarity, strength };

std::string to_string(QualityDimension dimension);
QualityDimension dimension_from_string(const std::string& name);

enum class FeatureFamily {
    adu_ngrams,
    sentiment_flow,
    discourse_flow,
    prompt_similarity,
    token_pos_ngrams,
    length_statistics,
    linguistic_errors,
    named_entities,
    metadiscourse,
};

using FeatureConfig = std::set<FeatureFamily>;

std::string to_string(FeatureFamily family);
FeatureFamily feature_family_from_string(const std::string& name);
const std::vector<FeatureFamily>& all_feature_families();

// Best-performing combination per dimension; used when no config is given.
FeatureConfig default_feature_config(QualityDimension dimension);

// Sparse named feature values; names are namespaced by family.
struct FeatureVector {
    std::map<std::string, double> values;

    void set(const std::string& name, double value);
    void add(const std::string& name, double value);
    double get(const std::string& name) const;  // 0 when absent
    void merge(const FeatureVector& other);
};

struct VocabEntry {
    std::size_t index = 0;
    std::size_t document_frequency = 0;
};

// N-gram vocabulary with a strict document-frequency threshold: an entry is
// retained only when its df exceeds threshold * corpus size.
struct Vocabulary {
    std::map<std::string, VocabEntry> entries;
    double df_threshold = 0.0;
    std::size_t min_n = 1;
    std::size_t max_n = 1;
    std::size_t corpus_size = 0;
};

struct QualityScores {
    double organization = 0.0;
    double clarity = 0.0;
    double strength = 0.0;
    double overall = 0.0;
};

// Validates the 1.0..4.0 range and sets overall to the arithmetic mean.
QualityScores make_quality_scores(double organization, double clarity, double strength);

// ---------------------------------------------------------------- extraction

FeatureVector extract_adu_ngrams(const Essay& essay, const AduTypeProvider& adu);
FeatureVector extract_sentiment_flow(const Essay& essay, const SentimentProvider& sentiment);
FeatureVector extract_discourse_function_flow(const Essay& essay);
FeatureVector extract_prompt_similarity_flow(const Essay& essay, const EmbeddingProvider& embeddings);
FeatureVector extract_token_pos_ngrams(const Essay& essay, const SyntaxProvider& syntax,
                                       const Vocabulary* vocab_token, const Vocabulary* vocab_pos);
FeatureVector extract_length_statistics(const Essay& essay);
FeatureVector extract_error_frequency(const Essay& essay, const SyntaxProvider& syntax);
FeatureVector extract_ne_distribution(const Essay& essay, const SyntaxProvider& syntax);
FeatureVector extract_metadiscourse(const Essay& essay,
                                    const std::map<std::string, std::string>& marker_lexicon);

const std::map<std::string, std::string>& default_metadiscourse_lexicon();

// Nearest-index resampling of a flow to a fixed length (round half up).
template <typename T>
std::vector<T> resample_flow(const std::vector<T>& flow, std::size_t target_length) {
    std::vector<T> out;
    if (flow.empty() || target_length == 0) return out;
    out.reserve(target_length);
    for (std::size_t j = 0; j < target_length; ++j) {
        double position = target_length == 1
                              ? 0.0
                              : static_cast<double>(j) * static_cast<double>(flow.size() - 1) /
                                    static_cast<double>(target_length - 1);
        auto index = static_cast<std::size_t>(position + 0.5);
        out.push_back(flow[index]);
    }
    return out;
}

enum class VocabularyKind { token, pos };

Vocabulary build_vocabulary(const std::vector<Essay>& essays, VocabularyKind kind,
                            std::size_t min_n, std::size_t max_n, double df_threshold,
                            const SyntaxProvider& syntax);

// All enabled families merged into one vector; vocabularies are required only
// when token_pos_ngrams is enabled.
FeatureVector extract_features(const Essay& essay, const FeatureConfig& config,
                               const ProviderSet& providers, const Vocabulary* vocab_token,
                               const Vocabulary* vocab_pos);

// ------------------------------------------------------------------ training

class ScoringModel {
public:
    ScoringModel(QualityDimension dimension, FeatureConfig config,
                 std::vector<std::string> columns,
                 std::shared_ptr<const RegressionModel> model,
                 std::optional<Vocabulary> vocab_token, std::optional<Vocabulary> vocab_pos);

    QualityDimension dimension() const { return dimension_; }
    const FeatureConfig& feature_config() const { return config_; }
    const std::vector<std::string>& columns() const { return columns_; }
    const RegressionModel& backend_model() const { return *model_; }
    const std::optional<Vocabulary>& vocab_token() const { return vocab_token_; }
    const std::optional<Vocabulary>& vocab_pos() const { return vocab_pos_; }

    // Prediction clipped to the 1.0..4.0 score scale.
    double predict(const Essay& essay, const ProviderSet& providers) const;

private:
    QualityDimension dimension_;
    FeatureConfig config_;
    std::vector<std::string> columns_;
    std::shared_ptr<const RegressionModel> model_;
    std::optional<Vocabulary> vocab_token_;
    std::optional<Vocabulary> vocab_pos_;
};

struct ScorerSet {
    std::optional<ScoringModel> organization;
    std::optional<ScoringModel> clarity;
    std::optional<ScoringModel> strength;
};

ScoringModel train_scorer(QualityDimension dimension, const std::vector<Essay>& essays,
                          const std::vector<double>& gold_ratings, const FeatureConfig& config,
                          const ProviderSet& providers, double token_df_threshold = 0.01,
                          double pos_df_threshold = 0.05);

QualityScores predict_scores(const ScorerSet& scorers, const Essay& essay,
                             const ProviderSet& providers);

struct AblationRow {
    std::vector<FeatureFamily> removed;  // empty for the all-features row
    FeatureConfig subset;
    double mae = 0.0;
    double mse = 0.0;
};

double mean_absolute_error(const std::vector<double>& predictions,
                           const std::vector<double>& targets);
double mean_squared_error(const std::vector<double>& predictions,
                          const std::vector<double>& targets);

// Cross-validated errors for the all-features set, every leave-one-out set,
// and any extra configured subsets, in that order.
std::vector<AblationRow> ablate_features(QualityDimension dimension,
                                         const std::vector<Essay>& essays,
                                         const std::vector<double>& gold_ratings,
                                         const ProviderSet& providers,
                                         const std::vector<FeatureConfig>& configured_subsets,
                                         std::size_t folds = 5);

// --------------------------------------------------------------- persistence

void save_scoring_model(const ScoringModel& model, const std::string& directory);
ScoringModel load_scoring_model(const std::string& directory, const RegressionBackend& backend);

void save_scorer_set(const ScorerSet& scorers, const std::string& directory);
ScorerSet load_scorer_set(const std::string& directory, const RegressionBackend& backend);

// FNV-1a over the persisted model files; stable across identical runs.
std::string scorer_set_content_hash(const std::string& directory);

// Ratings file: one "essay_id <TAB> dimension <TAB> score" per line.
std::map<QualityDimension, std::map<std::string, double>> load_ratings(const std::string& path);

}  // namespace enthymeme
