#include "enthymeme/essay_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "enthymeme/errors.hpp"
#include "enthymeme/util.hpp"

namespace fs = std::filesystem;

namespace enthymeme {

std::string to_string(QualityDimension dimension) {
    switch (dimension) {
        case QualityDimension::organization: return "organization";
        case QualityDimension::clarity: return "clarity";
        case QualityDimension::strength: return "strength";
    }
    return "organization";
}

QualityDimension dimension_from_string(const std::string& name) {
    if (name == "organization") return QualityDimension::organization;
    if (name == "clarity") return QualityDimension::clarity;
    if (name == "strength") return QualityDimension::strength;
    throw Error("unknown quality dimension: " + name);
}

std::string to_string(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::adu_ngrams: return "adu_ngrams";
        case FeatureFamily::sentiment_flow: return "sentiment_flow";
        case FeatureFamily::discourse_flow: return "discourse_flow";
        case FeatureFamily::prompt_similarity: return "prompt_similarity";
        case FeatureFamily::token_pos_ngrams: return "token_pos_ngrams";
        case FeatureFamily::length_statistics: return "length_statistics";
        case FeatureFamily::linguistic_errors: return "linguistic_errors";
        case FeatureFamily::named_entities: return "named_entities";
        case FeatureFamily::metadiscourse: return "metadiscourse";
    }
    return "length_statistics";
}

FeatureFamily feature_family_from_string(const std::string& name) {
    for (FeatureFamily family : all_feature_families()) {
        if (to_string(family) == name) return family;
    }
    throw Error("unknown feature family: " + name);
}

const std::vector<FeatureFamily>& all_feature_families() {
    static const std::vector<FeatureFamily> families = {
        FeatureFamily::adu_ngrams,        FeatureFamily::sentiment_flow,
        FeatureFamily::discourse_flow,    FeatureFamily::prompt_similarity,
        FeatureFamily::token_pos_ngrams,  FeatureFamily::length_statistics,
        FeatureFamily::linguistic_errors, FeatureFamily::named_entities,
        FeatureFamily::metadiscourse,
    };
    return families;
}

FeatureConfig default_feature_config(QualityDimension dimension) {
    switch (dimension) {
        case QualityDimension::organization:
            return {FeatureFamily::linguistic_errors, FeatureFamily::token_pos_ngrams,
                    FeatureFamily::length_statistics, FeatureFamily::named_entities,
                    FeatureFamily::prompt_similarity};
        case QualityDimension::clarity:
            return {FeatureFamily::linguistic_errors, FeatureFamily::sentiment_flow,
                    FeatureFamily::discourse_flow, FeatureFamily::named_entities,
                    FeatureFamily::prompt_similarity};
        case QualityDimension::strength:
            return {FeatureFamily::adu_ngrams, FeatureFamily::token_pos_ngrams,
                    FeatureFamily::prompt_similarity};
    }
    return {};
}

void FeatureVector::set(const std::string& name, double value) { values[name] = value; }

void FeatureVector::add(const std::string& name, double value) { values[name] += value; }

double FeatureVector::get(const std::string& name) const {
    auto it = values.find(name);
    return it == values.end() ? 0.0 : it->second;
}

void FeatureVector::merge(const FeatureVector& other) {
    for (const auto& [name, value] : other.values) values[name] = value;
}

QualityScores make_quality_scores(double organization, double clarity, double strength) {
    for (double score : {organization, clarity, strength}) {
        if (!(score >= 1.0 && score <= 4.0)) {
            throw RatingOutOfRangeError("score " + std::to_string(score) +
                                        " outside the 1.0..4.0 scale");
        }
    }
    QualityScores scores;
    scores.organization = organization;
    scores.clarity = clarity;
    scores.strength = strength;
    scores.overall = (organization + clarity + strength) / 3.0;
    return scores;
}

namespace {

constexpr std::size_t kFlowLength = 5;

// Symbol-flow n-grams, frequencies normalized per n.
void add_flow_ngrams(FeatureVector& features, const std::vector<std::string>& flow,
                     const std::string& prefix, std::size_t max_n) {
    for (std::size_t n = 1; n <= max_n; ++n) {
        if (flow.size() < n) break;
        std::size_t total = flow.size() - n + 1;
        std::map<std::string, std::size_t> counts;
        for (std::size_t i = 0; i + n <= flow.size(); ++i) {
            std::string key;
            for (std::size_t k = 0; k < n; ++k) {
                if (k > 0) key += '|';
                key += flow[i + k];
            }
            counts[key] += 1;
        }
        for (const auto& [key, count] : counts) {
            features.set(prefix + std::to_string(n) + ':' + key,
                         static_cast<double>(count) / static_cast<double>(total));
        }
    }
}

void add_flow_indicators(FeatureVector& features, const std::vector<std::string>& flow,
                         const std::string& prefix) {
    auto resampled = resample_flow(flow, kFlowLength);
    for (std::size_t j = 0; j < resampled.size(); ++j) {
        features.set(prefix + std::to_string(j) + ':' + resampled[j], 1.0);
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double na = std::sqrt(dot(a, a));
    double nb = std::sqrt(dot(b, b));
    if (na < 1e-12 || nb < 1e-12) {
        throw DegenerateEmbeddingError("zero-norm embedding in cosine similarity");
    }
    return dot(a, b) / (na * nb);
}

std::vector<std::string> sentence_token_texts(const Sentence& sentence) {
    std::vector<std::string> out;
    out.reserve(sentence.tokens.size());
    for (const auto& token : sentence.tokens) out.push_back(lowercase(token.text));
    return out;
}

// Enumerates per-sentence n-grams of `units`, calling fn(n, key) per n-gram.
template <typename Fn>
void for_each_ngram(const std::vector<std::string>& units, std::size_t min_n, std::size_t max_n,
                    Fn&& fn) {
    for (std::size_t n = min_n; n <= max_n; ++n) {
        if (units.size() < n) break;
        for (std::size_t i = 0; i + n <= units.size(); ++i) {
            std::string key = std::to_string(n) + ':';
            for (std::size_t k = 0; k < n; ++k) {
                if (k > 0) key += '|';
                key += units[i + k];
            }
            fn(n, key);
        }
    }
}

std::vector<std::string> paragraph_sentiment_flow(const Essay& essay,
                                                  const SentimentProvider& sentiment) {
    std::vector<std::string> flow;
    flow.reserve(essay.paragraphs.size());
    for (const auto& paragraph : essay.paragraphs) {
        flow.push_back(to_string(sentiment.classify(paragraph_text(essay, paragraph))));
    }
    return flow;
}

std::vector<std::string> discourse_flow(const Essay& essay) {
    std::vector<std::string> flow;
    std::size_t count = essay.paragraphs.size();
    for (std::size_t p = 0; p < count; ++p) {
        if (p == 0) {
            flow.push_back("introduction");
        } else if (p + 1 == count) {
            flow.push_back("conclusion");
        } else {
            flow.push_back("body");
        }
    }
    return flow;
}

}  // namespace

FeatureVector extract_adu_ngrams(const Essay& essay, const AduTypeProvider& adu) {
    FeatureVector features;
    std::map<std::string, std::size_t> counts;
    std::size_t totals[4] = {0, 0, 0, 0};  // per n in 1..3
    for (const auto& paragraph : essay.paragraphs) {
        std::vector<std::string> labels;
        labels.reserve(paragraph.sentences.size());
        for (const auto& sentence : paragraph.sentences) {
            labels.push_back(to_string(adu.classify(sentence.text, essay.raw_text)));
        }
        for_each_ngram(labels, 1, 3, [&](std::size_t n, const std::string& key) {
            counts[key] += 1;
            totals[n] += 1;
        });
    }
    for (const auto& [key, count] : counts) {
        std::size_t n = static_cast<std::size_t>(key[0] - '0');
        features.set("adu" + key, static_cast<double>(count) / static_cast<double>(totals[n]));
    }
    return features;
}

FeatureVector extract_sentiment_flow(const Essay& essay, const SentimentProvider& sentiment) {
    FeatureVector features;
    auto flow = paragraph_sentiment_flow(essay, sentiment);
    add_flow_ngrams(features, flow, "sent", 3);
    add_flow_indicators(features, flow, "sentflow:");
    return features;
}

FeatureVector extract_discourse_function_flow(const Essay& essay) {
    FeatureVector features;
    auto flow = discourse_flow(essay);
    add_flow_ngrams(features, flow, "disc", 3);
    add_flow_indicators(features, flow, "discflow:");
    return features;
}

FeatureVector extract_prompt_similarity_flow(const Essay& essay,
                                             const EmbeddingProvider& embeddings) {
    if (essay.title.empty()) {
        throw DataError("prompt similarity requires a non-empty essay title");
    }
    std::vector<std::string> texts;
    texts.push_back(essay.title);
    for (const auto& loc : all_sentences(essay)) texts.push_back(loc.sentence->text);
    auto vectors = embeddings.embed(texts);
    const auto& title_vector = vectors[0];

    std::vector<double> flow;
    std::size_t cursor = 1;
    for (const auto& paragraph : essay.paragraphs) {
        std::vector<double> mean(embeddings.dimension(), 0.0);
        for (std::size_t s = 0; s < paragraph.sentences.size(); ++s) {
            const auto& v = vectors[cursor++];
            for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += v[k];
        }
        for (auto& e : mean) e /= static_cast<double>(paragraph.sentences.size());
        flow.push_back(cosine(mean, title_vector));
    }

    FeatureVector features;
    features.set("prompt:max", *std::max_element(flow.begin(), flow.end()));
    features.set("prompt:min", *std::min_element(flow.begin(), flow.end()));
    double sum = 0.0;
    for (double v : flow) sum += v;
    features.set("prompt:mean", sum / static_cast<double>(flow.size()));
    auto resampled = resample_flow(flow, kFlowLength);
    for (std::size_t j = 0; j < resampled.size(); ++j) {
        features.set("promptflow:" + std::to_string(j), resampled[j]);
    }
    return features;
}

FeatureVector extract_token_pos_ngrams(const Essay& essay, const SyntaxProvider& syntax,
                                       const Vocabulary* vocab_token, const Vocabulary* vocab_pos) {
    if (vocab_token == nullptr || vocab_pos == nullptr) {
        throw VocabularyMissingError("token/POS n-gram extraction requires built vocabularies");
    }
    FeatureVector features;
    auto accumulate = [&](const Vocabulary& vocab, const std::string& prefix,
                          const std::vector<std::vector<std::string>>& unit_sequences) {
        std::map<std::string, std::size_t> counts;
        std::map<std::size_t, std::size_t> totals;
        for (const auto& units : unit_sequences) {
            for_each_ngram(units, vocab.min_n, vocab.max_n,
                           [&](std::size_t n, const std::string& key) {
                               totals[n] += 1;
                               if (vocab.entries.count(key)) counts[key] += 1;
                           });
        }
        for (const auto& [key, count] : counts) {
            std::size_t n = static_cast<std::size_t>(key[0] - '0');
            features.set(prefix + key,
                         static_cast<double>(count) / static_cast<double>(totals[n]));
        }
    };

    std::vector<std::vector<std::string>> token_sequences;
    std::vector<std::vector<std::string>> pos_sequences;
    for (const auto& loc : all_sentences(essay)) {
        token_sequences.push_back(sentence_token_texts(*loc.sentence));
        pos_sequences.push_back(syntax.pos_tags(*loc.sentence));
    }
    accumulate(*vocab_token, "tok", token_sequences);
    accumulate(*vocab_pos, "pos", pos_sequences);
    return features;
}

FeatureVector extract_length_statistics(const Essay& essay) {
    FeatureVector features;
    features.set("len:num_paragraphs", static_cast<double>(essay.paragraphs.size()));
    features.set("len:num_sentences", static_cast<double>(essay.sentence_count()));
    features.set("len:num_tokens", static_cast<double>(essay.token_count()));
    std::size_t max_s = 0;
    std::size_t min_s = essay.paragraphs.front().sentences.size();
    for (const auto& paragraph : essay.paragraphs) {
        max_s = std::max(max_s, paragraph.sentences.size());
        min_s = std::min(min_s, paragraph.sentences.size());
    }
    features.set("len:max_sentences_per_paragraph", static_cast<double>(max_s));
    features.set("len:min_sentences_per_paragraph", static_cast<double>(min_s));
    features.set("len:mean_sentences_per_paragraph",
                 static_cast<double>(essay.sentence_count()) /
                     static_cast<double>(essay.paragraphs.size()));
    return features;
}

FeatureVector extract_error_frequency(const Essay& essay, const SyntaxProvider& syntax) {
    FeatureVector features;
    double tokens = static_cast<double>(essay.token_count());
    features.set("err:frequency",
                 tokens > 0 ? static_cast<double>(syntax.error_count(essay.raw_text)) / tokens
                            : 0.0);
    return features;
}

FeatureVector extract_ne_distribution(const Essay& essay, const SyntaxProvider& syntax) {
    FeatureVector features;
    auto counts = syntax.entity_type_counts(essay.raw_text);
    std::size_t total = 0;
    for (const auto& [kind, count] : counts) total += count;
    if (total == 0) return features;  // zero vector, no division
    for (const auto& [kind, count] : counts) {
        features.set("ne:" + kind, static_cast<double>(count) / static_cast<double>(total));
    }
    return features;
}

FeatureVector extract_metadiscourse(const Essay& essay,
                                    const std::map<std::string, std::string>& marker_lexicon) {
    FeatureVector features;
    double token_count = static_cast<double>(essay.token_count());
    if (token_count == 0) return features;
    auto words = word_tokens(essay.raw_text);
    std::map<std::string, std::size_t> category_counts;
    for (const auto& [marker, category] : marker_lexicon) {
        auto marker_words = word_tokens(marker);
        if (marker_words.empty()) continue;
        for (std::size_t i = 0; i + marker_words.size() <= words.size(); ++i) {
            bool match = true;
            for (std::size_t k = 0; k < marker_words.size(); ++k) {
                if (words[i + k] != marker_words[k]) {
                    match = false;
                    break;
                }
            }
            if (match) category_counts[category] += 1;
        }
    }
    for (const auto& [category, count] : category_counts) {
        features.set("meta:" + category, static_cast<double>(count) / token_count);
    }
    return features;
}

const std::map<std::string, std::string>& default_metadiscourse_lexicon() {
    static const std::map<std::string, std::string> lexicon = {
        {"however", "transition"},       {"moreover", "transition"},
        {"furthermore", "transition"},   {"in addition", "transition"},
        {"therefore", "transition"},     {"thus", "transition"},
        {"first", "frame"},              {"second", "frame"},
        {"finally", "frame"},            {"in conclusion", "frame"},
        {"to conclude", "frame"},        {"according to", "evidential"},
        {"for example", "code_gloss"},   {"for instance", "code_gloss"},
        {"in other words", "code_gloss"},{"perhaps", "hedge"},
        {"might", "hedge"},              {"possibly", "hedge"},
        {"probably", "hedge"},           {"seems", "hedge"},
        {"clearly", "booster"},          {"obviously", "booster"},
        {"certainly", "booster"},        {"indeed", "booster"},
        {"unfortunately", "attitude"},   {"surprisingly", "attitude"},
        {"importantly", "attitude"},     {"i", "self_mention"},
        {"my", "self_mention"},          {"we", "self_mention"},
        {"our", "self_mention"},         {"you", "engagement"},
        {"your", "engagement"},          {"consider", "engagement"},
    };
    return lexicon;
}

Vocabulary build_vocabulary(const std::vector<Essay>& essays, VocabularyKind kind,
                            std::size_t min_n, std::size_t max_n, double df_threshold,
                            const SyntaxProvider& syntax) {
    std::map<std::string, std::size_t> document_frequency;
    for (const auto& essay : essays) {
        std::set<std::string> seen;
        for (const auto& loc : all_sentences(essay)) {
            std::vector<std::string> units = kind == VocabularyKind::token
                                                 ? sentence_token_texts(*loc.sentence)
                                                 : syntax.pos_tags(*loc.sentence);
            for_each_ngram(units, min_n, max_n,
                           [&](std::size_t, const std::string& key) { seen.insert(key); });
        }
        for (const auto& key : seen) document_frequency[key] += 1;
    }
    Vocabulary vocab;
    vocab.df_threshold = df_threshold;
    vocab.min_n = min_n;
    vocab.max_n = max_n;
    vocab.corpus_size = essays.size();
    double cutoff = df_threshold * static_cast<double>(essays.size());
    std::size_t index = 0;
    for (const auto& [key, df] : document_frequency) {
        if (static_cast<double>(df) > cutoff) {  // strict threshold
            vocab.entries[key] = {index++, df};
        }
    }
    return vocab;
}

FeatureVector extract_features(const Essay& essay, const FeatureConfig& config,
                               const ProviderSet& providers, const Vocabulary* vocab_token,
                               const Vocabulary* vocab_pos) {
    FeatureVector features;
    for (FeatureFamily family : config) {
        switch (family) {
            case FeatureFamily::adu_ngrams:
                features.merge(extract_adu_ngrams(essay, *providers.adu_types));
                break;
            case FeatureFamily::sentiment_flow:
                features.merge(extract_sentiment_flow(essay, *providers.sentiment));
                break;
            case FeatureFamily::discourse_flow:
                features.merge(extract_discourse_function_flow(essay));
                break;
            case FeatureFamily::prompt_similarity:
                features.merge(extract_prompt_similarity_flow(essay, *providers.embeddings));
                break;
            case FeatureFamily::token_pos_ngrams:
                features.merge(
                    extract_token_pos_ngrams(essay, *providers.syntax, vocab_token, vocab_pos));
                break;
            case FeatureFamily::length_statistics:
                features.merge(extract_length_statistics(essay));
                break;
            case FeatureFamily::linguistic_errors:
                features.merge(extract_error_frequency(essay, *providers.syntax));
                break;
            case FeatureFamily::named_entities:
                features.merge(extract_ne_distribution(essay, *providers.syntax));
                break;
            case FeatureFamily::metadiscourse:
                features.merge(extract_metadiscourse(essay, default_metadiscourse_lexicon()));
                break;
        }
    }
    return features;
}

ScoringModel::ScoringModel(QualityDimension dimension, FeatureConfig config,
                           std::vector<std::string> columns,
                           std::shared_ptr<const RegressionModel> model,
                           std::optional<Vocabulary> vocab_token,
                           std::optional<Vocabulary> vocab_pos)
    : dimension_(dimension),
      config_(std::move(config)),
      columns_(std::move(columns)),
      model_(std::move(model)),
      vocab_token_(std::move(vocab_token)),
      vocab_pos_(std::move(vocab_pos)) {}

double ScoringModel::predict(const Essay& essay, const ProviderSet& providers) const {
    FeatureVector features =
        extract_features(essay, config_, providers, vocab_token_ ? &*vocab_token_ : nullptr,
                         vocab_pos_ ? &*vocab_pos_ : nullptr);
    std::vector<double> row;
    row.reserve(columns_.size());
    for (const auto& name : columns_) row.push_back(features.get(name));
    double raw = model_->predict({row})[0];
    return std::clamp(raw, 1.0, 4.0);
}

namespace {

struct AssembledFeatures {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

AssembledFeatures assemble(const std::vector<Essay>& essays, const FeatureConfig& config,
                           const ProviderSet& providers, const Vocabulary* vocab_token,
                           const Vocabulary* vocab_pos) {
    std::vector<FeatureVector> extracted;
    extracted.reserve(essays.size());
    std::set<std::string> names;
    for (const auto& essay : essays) {
        extracted.push_back(extract_features(essay, config, providers, vocab_token, vocab_pos));
        for (const auto& [name, value] : extracted.back().values) names.insert(name);
    }
    AssembledFeatures out;
    out.columns.assign(names.begin(), names.end());
    for (const auto& features : extracted) {
        std::vector<double> row;
        row.reserve(out.columns.size());
        for (const auto& name : out.columns) row.push_back(features.get(name));
        out.rows.push_back(std::move(row));
    }
    return out;
}

ScoringModel fit_model(QualityDimension dimension, const std::vector<Essay>& essays,
                       const std::vector<double>& ratings, const FeatureConfig& config,
                       const ProviderSet& providers, double token_df_threshold,
                       double pos_df_threshold) {
    std::optional<Vocabulary> vocab_token;
    std::optional<Vocabulary> vocab_pos;
    if (config.count(FeatureFamily::token_pos_ngrams)) {
        vocab_token = build_vocabulary(essays, VocabularyKind::token, 1, 3, token_df_threshold,
                                       *providers.syntax);
        vocab_pos = build_vocabulary(essays, VocabularyKind::pos, 1, 5, pos_df_threshold,
                                     *providers.syntax);
    }
    auto assembled = assemble(essays, config, providers, vocab_token ? &*vocab_token : nullptr,
                              vocab_pos ? &*vocab_pos : nullptr);
    std::shared_ptr<const RegressionModel> model =
        providers.regression->fit(assembled.rows, ratings);
    return ScoringModel(dimension, config, std::move(assembled.columns), std::move(model),
                        std::move(vocab_token), std::move(vocab_pos));
}

}  // namespace

ScoringModel train_scorer(QualityDimension dimension, const std::vector<Essay>& essays,
                          const std::vector<double>& gold_ratings, const FeatureConfig& config,
                          const ProviderSet& providers, double token_df_threshold,
                          double pos_df_threshold) {
    if (essays.size() != gold_ratings.size()) {
        throw InsufficientDataError("essay and rating counts differ");
    }
    if (essays.size() < 10) {
        throw InsufficientDataError("need at least 10 rated essays, got " +
                                    std::to_string(essays.size()));
    }
    for (double rating : gold_ratings) {
        if (!(rating >= 1.0 && rating <= 4.0)) {
            throw RatingOutOfRangeError("gold rating " + std::to_string(rating) +
                                        " outside 1.0..4.0");
        }
    }
    return fit_model(dimension, essays, gold_ratings, config, providers, token_df_threshold,
                     pos_df_threshold);
}

QualityScores predict_scores(const ScorerSet& scorers, const Essay& essay,
                             const ProviderSet& providers) {
    if (!scorers.organization || !scorers.clarity || !scorers.strength) {
        throw MissingDimensionModelError("all three dimension models are required");
    }
    return make_quality_scores(scorers.organization->predict(essay, providers),
                               scorers.clarity->predict(essay, providers),
                               scorers.strength->predict(essay, providers));
}

double mean_absolute_error(const std::vector<double>& predictions,
                           const std::vector<double>& targets) {
    if (predictions.size() != targets.size() || predictions.empty()) {
        throw LengthMismatchError("mae requires matching non-empty vectors");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        sum += std::fabs(predictions[i] - targets[i]);
    }
    return sum / static_cast<double>(predictions.size());
}

double mean_squared_error(const std::vector<double>& predictions,
                          const std::vector<double>& targets) {
    if (predictions.size() != targets.size() || predictions.empty()) {
        throw LengthMismatchError("mse requires matching non-empty vectors");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        double d = predictions[i] - targets[i];
        sum += d * d;
    }
    return sum / static_cast<double>(predictions.size());
}

std::vector<AblationRow> ablate_features(QualityDimension dimension,
                                         const std::vector<Essay>& essays,
                                         const std::vector<double>& gold_ratings,
                                         const ProviderSet& providers,
                                         const std::vector<FeatureConfig>& configured_subsets,
                                         std::size_t folds) {
    if (essays.size() != gold_ratings.size() || essays.size() < 10) {
        throw InsufficientDataError("ablation requires at least 10 rated essays");
    }
    FeatureConfig all(all_feature_families().begin(), all_feature_families().end());
    std::vector<AblationRow> rows;
    rows.push_back({{}, all, 0.0, 0.0});
    for (FeatureFamily family : all_feature_families()) {
        FeatureConfig subset = all;
        subset.erase(family);
        rows.push_back({{family}, subset, 0.0, 0.0});
    }
    for (const auto& subset : configured_subsets) {
        std::vector<FeatureFamily> removed;
        for (FeatureFamily family : all_feature_families()) {
            if (!subset.count(family)) removed.push_back(family);
        }
        rows.push_back({removed, subset, 0.0, 0.0});
    }

    for (auto& row : rows) {
        std::vector<double> predictions;
        std::vector<double> targets;
        for (std::size_t fold = 0; fold < folds; ++fold) {
            std::vector<Essay> train_essays;
            std::vector<double> train_ratings;
            std::vector<const Essay*> held_out;
            std::vector<double> held_targets;
            for (std::size_t i = 0; i < essays.size(); ++i) {
                if (i % folds == fold) {
                    held_out.push_back(&essays[i]);
                    held_targets.push_back(gold_ratings[i]);
                } else {
                    train_essays.push_back(essays[i]);
                    train_ratings.push_back(gold_ratings[i]);
                }
            }
            auto model = fit_model(dimension, train_essays, train_ratings, row.subset, providers,
                                   0.01, 0.05);
            for (std::size_t i = 0; i < held_out.size(); ++i) {
                predictions.push_back(model.predict(*held_out[i], providers));
                targets.push_back(held_targets[i]);
            }
        }
        row.mae = mean_absolute_error(predictions, targets);
        row.mse = mean_squared_error(predictions, targets);
    }
    return rows;
}

// --------------------------------------------------------------- persistence

namespace {

void write_vocab_file(const Vocabulary& vocab, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoFailureError("cannot write " + path.string());
    // entries ordered by index for a stable file
    std::vector<std::pair<std::string, VocabEntry>> ordered(vocab.entries.begin(),
                                                            vocab.entries.end());
    std::sort(ordered.begin(), ordered.end(),
              [](const auto& a, const auto& b) { return a.second.index < b.second.index; });
    for (const auto& [key, entry] : ordered) {
        out << key << '\t' << entry.index << '\t' << entry.document_frequency << '\n';
    }
}

Vocabulary read_vocab_file(const fs::path& path, const nlohmann::json& meta) {
    Vocabulary vocab;
    vocab.df_threshold = meta.at("df_threshold").get<double>();
    vocab.min_n = meta.at("min_n").get<std::size_t>();
    vocab.max_n = meta.at("max_n").get<std::size_t>();
    vocab.corpus_size = meta.at("corpus_size").get<std::size_t>();
    std::ifstream in(path);
    if (!in) throw IoFailureError("cannot read " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::size_t tab1 = line.rfind('\t');
        std::size_t tab0 = line.rfind('\t', tab1 - 1);
        if (tab0 == std::string::npos || tab1 == std::string::npos) {
            throw IoFailureError("malformed vocabulary line in " + path.string());
        }
        std::string key = line.substr(0, tab0);
        VocabEntry entry;
        entry.index = std::stoull(line.substr(tab0 + 1, tab1 - tab0 - 1));
        entry.document_frequency = std::stoull(line.substr(tab1 + 1));
        vocab.entries[key] = entry;
    }
    return vocab;
}

nlohmann::ordered_json vocab_meta(const Vocabulary& vocab) {
    nlohmann::ordered_json meta;
    meta["df_threshold"] = vocab.df_threshold;
    meta["min_n"] = vocab.min_n;
    meta["max_n"] = vocab.max_n;
    meta["corpus_size"] = vocab.corpus_size;
    return meta;
}

}  // namespace

void save_scoring_model(const ScoringModel& model, const std::string& directory) {
    fs::create_directories(directory);
    nlohmann::ordered_json j;
    j["dimension"] = to_string(model.dimension());
    std::vector<std::string> families;
    for (FeatureFamily family : model.feature_config()) families.push_back(to_string(family));
    j["feature_config"] = families;
    j["columns"] = model.columns();
    j["backend"] = model.backend_model().serialize();
    if (model.vocab_token()) {
        j["vocab_token"] = vocab_meta(*model.vocab_token());
        write_vocab_file(*model.vocab_token(), fs::path(directory) / "vocab_token.tsv");
    }
    if (model.vocab_pos()) {
        j["vocab_pos"] = vocab_meta(*model.vocab_pos());
        write_vocab_file(*model.vocab_pos(), fs::path(directory) / "vocab_pos.tsv");
    }
    std::ofstream out(fs::path(directory) / "model.json");
    if (!out) throw IoFailureError("cannot write model.json under " + directory);
    out << j.dump(2) << '\n';
}

ScoringModel load_scoring_model(const std::string& directory, const RegressionBackend& backend) {
    std::ifstream in(fs::path(directory) / "model.json");
    if (!in) throw IoFailureError("cannot read model.json under " + directory);
    nlohmann::json j;
    in >> j;
    FeatureConfig config;
    for (const auto& name : j.at("feature_config")) {
        config.insert(feature_family_from_string(name.get<std::string>()));
    }
    std::optional<Vocabulary> vocab_token;
    std::optional<Vocabulary> vocab_pos;
    if (j.contains("vocab_token")) {
        vocab_token = read_vocab_file(fs::path(directory) / "vocab_token.tsv", j["vocab_token"]);
    }
    if (j.contains("vocab_pos")) {
        vocab_pos = read_vocab_file(fs::path(directory) / "vocab_pos.tsv", j["vocab_pos"]);
    }
    std::shared_ptr<const RegressionModel> model =
        backend.deserialize(j.at("backend").get<std::string>());
    return ScoringModel(dimension_from_string(j.at("dimension").get<std::string>()),
                        std::move(config), j.at("columns").get<std::vector<std::string>>(),
                        std::move(model), std::move(vocab_token), std::move(vocab_pos));
}

void save_scorer_set(const ScorerSet& scorers, const std::string& directory) {
    if (!scorers.organization || !scorers.clarity || !scorers.strength) {
        throw MissingDimensionModelError("cannot persist a partial scorer set");
    }
    fs::create_directories(directory);
    save_scoring_model(*scorers.organization, (fs::path(directory) / "organization").string());
    save_scoring_model(*scorers.clarity, (fs::path(directory) / "clarity").string());
    save_scoring_model(*scorers.strength, (fs::path(directory) / "strength").string());
    nlohmann::ordered_json meta;
    meta["content_hash"] = scorer_set_content_hash(directory);
    std::ofstream out(fs::path(directory) / "metadata.json");
    out << meta.dump(2) << '\n';
}

ScorerSet load_scorer_set(const std::string& directory, const RegressionBackend& backend) {
    ScorerSet set;
    set.organization = load_scoring_model((fs::path(directory) / "organization").string(), backend);
    set.clarity = load_scoring_model((fs::path(directory) / "clarity").string(), backend);
    set.strength = load_scoring_model((fs::path(directory) / "strength").string(), backend);
    return set;
}

std::string scorer_set_content_hash(const std::string& directory) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::recursive_directory_iterator(directory)) {
        if (entry.is_regular_file() && entry.path().filename() != "metadata.json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::uint64_t h = 1469598103934665603ULL;
    auto feed = [&h](std::string_view bytes) {
        for (unsigned char c : bytes) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& path : files) {
        feed(fs::relative(path, directory).generic_string());
        feed(std::string_view("\0", 1));
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buffer;
        buffer << in.rdbuf();
        std::string content = buffer.str();
        feed(content);
        feed(std::string_view("\0", 1));
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

std::map<QualityDimension, std::map<std::string, double>> load_ratings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoFailureError("cannot read ratings file " + path);
    std::map<QualityDimension, std::map<std::string, double>> ratings;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string id, dimension, score;
        if (!std::getline(fields, id, '\t') || !std::getline(fields, dimension, '\t') ||
            !std::getline(fields, score, '\t')) {
            throw MalformedRecordError("ratings line needs id<TAB>dimension<TAB>score",
                                       line_number);
        }
        try {
            ratings[dimension_from_string(dimension)][id] = std::stod(score);
        } catch (const Error&) {
            throw MalformedRecordError("unknown dimension '" + dimension + "'", line_number);
        } catch (const std::exception&) {
            throw MalformedRecordError("bad score '" + score + "'", line_number);
        }
    }
    return ratings;
}

}  // namespace enthymeme
