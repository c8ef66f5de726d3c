#include "enthymeme/providers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

#include "enthymeme/errors.hpp"
#include "enthymeme/util.hpp"

namespace enthymeme {

std::string to_string(AduType type) {
    switch (type) {
        case AduType::premise: return "premise";
        case AduType::claim: return "claim";
        case AduType::major_claim: return "major_claim";
        case AduType::non_argumentative: return "non_argumentative";
    }
    return "non_argumentative";
}

AduType adu_type_from_string(const std::string& name) {
    if (name == "premise") return AduType::premise;
    if (name == "claim") return AduType::claim;
    if (name == "major_claim") return AduType::major_claim;
    if (name == "non_argumentative") return AduType::non_argumentative;
    throw Error("unknown ADU type: " + name);
}

std::string to_string(Sentiment sentiment) {
    switch (sentiment) {
        case Sentiment::negative: return "negative";
        case Sentiment::neutral: return "neutral";
        case Sentiment::positive: return "positive";
    }
    return "neutral";
}

namespace {

double unit_interval(std::uint64_t x) { return static_cast<double>(x >> 11) * 0x1.0p-53; }

// ---------------------------------------------------------------- embeddings

class HashEmbeddingDouble final : public EmbeddingProvider {
public:
    HashEmbeddingDouble(std::uint64_t seed, std::size_t dimension)
        : seed_(seed), dimension_(dimension) {}

    std::size_t dimension() const override { return dimension_; }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override {
        std::vector<std::vector<double>> out;
        out.reserve(texts.size());
        for (const auto& text : texts) out.push_back(embed_one(text));
        return out;
    }

private:
    std::vector<double> embed_one(const std::string& text) const {
        std::uint64_t h = hash_bytes(text, hash_combine(seed_, hash_bytes("emb")));
        std::vector<double> v(dimension_);
        double norm_sq = 0.0;
        for (std::size_t j = 0; j < dimension_; ++j) {
            std::uint64_t x = splitmix64(h ^ splitmix64(j + 1));
            v[j] = unit_interval(x) * 2.0 - 1.0;
            norm_sq += v[j] * v[j];
        }
        double norm = std::sqrt(norm_sq);
        if (norm < 1e-12) {
            v.assign(dimension_, 0.0);
            v[0] = 1.0;
            return v;
        }
        for (auto& e : v) e /= norm;
        return v;
    }

    std::uint64_t seed_;
    std::size_t dimension_;
};

// --------------------------------------------------------------- naturalness

class HashParityNeighborDouble final : public NeighborPlausibilityProvider {
public:
    explicit HashParityNeighborDouble(std::uint64_t seed) : seed_(seed) {}

    NeighborJudgment judge(const std::string& left, const std::string& right) const override {
        std::string pair = left + '\x1f' + right;
        std::uint64_t h = hash_bytes(pair, hash_combine(seed_, hash_bytes("nsp")));
        bool plausible = (h & 1ULL) == 0;
        double c = static_cast<double>((h >> 1) % 9999ULL) / 9999.0;
        return {plausible, plausible ? 0.5 + c / 2.0 : c / 2.0};
    }

private:
    std::uint64_t seed_;
};

// ----------------------------------------------------------------- ADU types

// Lexicon rules, checked in precedence order; unmatched sentences are
// non-argumentative. Matching is case-insensitive on the raw sentence text.
class LexiconAduTypeDouble final : public AduTypeProvider {
public:
    AduType classify(const std::string& sentence, const std::string& /*essay_context*/) const override {
        std::string lower = lowercase(sentence);
        static const std::vector<std::string> major_markers = {
            "in my opinion", "i believe", "i think", "from my point of view", "my view"};
        static const std::vector<std::string> claim_markers = {
            "in conclusion", "therefore", "thus", "hence", "consequently", "should", "must"};
        static const std::vector<std::string> premise_markers = {
            "because", "since", "for example", "for instance", "studies", "research",
            "evidence", "data"};
        for (const auto& m : major_markers) {
            if (lower.find(m) != std::string::npos) return AduType::major_claim;
        }
        for (const auto& m : claim_markers) {
            if (lower.find(m) != std::string::npos) return AduType::claim;
        }
        for (const auto& m : premise_markers) {
            if (lower.find(m) != std::string::npos) return AduType::premise;
        }
        return AduType::non_argumentative;
    }
};

// ----------------------------------------------------------------- sentiment

class LexiconSentimentDouble final : public SentimentProvider {
public:
    Sentiment classify(const std::string& paragraph) const override {
        static const std::unordered_set<std::string> positive = {
            "good", "great", "advantage", "advantages", "benefit", "benefits",
            "positive", "best", "healthy", "happy", "improve", "better"};
        static const std::unordered_set<std::string> negative = {
            "bad", "wrong", "disadvantage", "disadvantages", "harm", "harmful",
            "negative", "worst", "unhealthy", "problem", "worse", "danger"};
        int balance = 0;
        for (const auto& token : word_tokens(paragraph)) {
            if (positive.count(token)) ++balance;
            if (negative.count(token)) --balance;
        }
        if (balance > 0) return Sentiment::positive;
        if (balance < 0) return Sentiment::negative;
        return Sentiment::neutral;
    }
};

// -------------------------------------------------------------------- syntax

class RuleSyntaxDouble final : public SyntaxProvider {
public:
    explicit RuleSyntaxDouble(std::uint64_t seed) : seed_(seed) {}

    std::vector<std::string> pos_tags(const Sentence& sentence) const override {
        std::vector<std::string> tags;
        tags.reserve(sentence.tokens.size());
        for (const auto& token : sentence.tokens) tags.push_back(tag_token(token));
        return tags;
    }

    std::map<std::string, std::size_t> entity_type_counts(const std::string& essay_text) const override {
        static const char* kinds[3] = {"PERSON", "LOCATION", "ORGANIZATION"};
        std::map<std::string, std::size_t> counts;
        for (const auto& sentence : segment_sentences(essay_text)) {
            for (const auto& token : sentence.tokens) {
                if (token.index == 0) continue;  // sentence-initial capitals are not entities
                if (!std::isupper(static_cast<unsigned char>(token.text[0]))) continue;
                std::uint64_t h = hash_bytes(token.text, hash_combine(seed_, hash_bytes("ne")));
                counts[kinds[h % 3]] += 1;
            }
        }
        return counts;
    }

    std::size_t error_count(const std::string& essay_text) const override {
        static const std::unordered_set<std::string> misspellings = {
            "teh", "recieve", "alot", "definately", "occured", "seperate", "untill", "wich"};
        auto tokens = word_tokens(essay_text);
        std::size_t count = 0;
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (misspellings.count(tokens[i])) ++count;
            if (i > 0 && tokens[i] == tokens[i - 1]) ++count;  // doubled word
        }
        return count;
    }

private:
    static bool has_suffix(const std::string& s, const char* suffix) {
        std::size_t n = std::char_traits<char>::length(suffix);
        return s.size() > n && s.compare(s.size() - n, n, suffix) == 0;
    }

    std::string tag_token(const Token& token) const {
        const std::string& text = token.text;
        if (!is_word_char(text[0])) return "PUNCT";
        if (std::isdigit(static_cast<unsigned char>(text[0]))) return "NUM";
        std::string lower = lowercase(text);
        static const std::unordered_set<std::string> determiners = {
            "the", "a", "an", "this", "that", "these", "those"};
        static const std::unordered_set<std::string> adpositions = {
            "in", "on", "at", "of", "to", "for", "with", "by", "from", "into", "about"};
        static const std::unordered_set<std::string> pronouns = {
            "i", "you", "he", "she", "it", "we", "they", "me", "him", "her", "us", "them"};
        static const std::unordered_set<std::string> conjunctions = {
            "and", "or", "but", "nor", "so", "yet"};
        static const std::unordered_set<std::string> verbs = {
            "is", "are", "was", "were", "be", "been", "am", "do", "does", "did",
            "have", "has", "had", "can", "could", "will", "would", "should", "must",
            "may", "might"};
        if (determiners.count(lower)) return "DET";
        if (adpositions.count(lower)) return "ADP";
        if (pronouns.count(lower)) return "PRON";
        if (conjunctions.count(lower)) return "CONJ";
        if (verbs.count(lower)) return "VERB";
        if (has_suffix(lower, "ing") || has_suffix(lower, "ed")) return "VERB";
        if (has_suffix(lower, "ly")) return "ADV";
        if (has_suffix(lower, "tion") || has_suffix(lower, "ment") || has_suffix(lower, "ness") ||
            has_suffix(lower, "ity")) {
            return "NOUN";
        }
        if (has_suffix(lower, "ous") || has_suffix(lower, "ful") || has_suffix(lower, "ive") ||
            has_suffix(lower, "able")) {
            return "ADJ";
        }
        if (token.index > 0 && std::isupper(static_cast<unsigned char>(text[0]))) return "PROPN";
        return "NOUN";
    }

    std::uint64_t seed_;
};

// ---------------------------------------------------------------- regression

class RidgeModel final : public RegressionModel {
public:
    RidgeModel(std::vector<double> weights, double lambda)
        : weights_(std::move(weights)), lambda_(lambda) {}

    std::vector<double> predict(const std::vector<std::vector<double>>& features) const override {
        std::vector<double> out;
        out.reserve(features.size());
        for (const auto& row : features) {
            if (row.size() + 1 != weights_.size()) {
                throw DimensionMismatchError("feature row has " + std::to_string(row.size()) +
                                             " columns, model expects " +
                                             std::to_string(weights_.size() - 1));
            }
            double y = weights_.back();  // bias
            for (std::size_t j = 0; j < row.size(); ++j) y += weights_[j] * row[j];
            out.push_back(y);
        }
        return out;
    }

    std::string serialize() const override {
        nlohmann::ordered_json j;
        j["kind"] = "ridge";
        j["lambda"] = lambda_;
        j["weights"] = weights_;
        return j.dump();
    }

private:
    std::vector<double> weights_;
    double lambda_;
};

// Regularized linear least squares via normal equations; the offline stand-in
// for the gradient-boosted regressor slot.
class RidgeRegressionDouble final : public RegressionBackend {
public:
    explicit RidgeRegressionDouble(double lambda = 1e-8) : lambda_(lambda) {}

    std::unique_ptr<RegressionModel> fit(const std::vector<std::vector<double>>& features,
                                         const std::vector<double>& targets) const override {
        if (features.size() != targets.size() || features.empty()) {
            throw DimensionMismatchError("fit requires matching non-empty features/targets");
        }
        std::size_t d = features[0].size() + 1;  // +1 bias column
        std::vector<std::vector<double>> normal(d, std::vector<double>(d, 0.0));
        std::vector<double> rhs(d, 0.0);
        std::vector<double> row(d);
        for (std::size_t r = 0; r < features.size(); ++r) {
            if (features[r].size() + 1 != d) {
                throw DimensionMismatchError("ragged feature matrix");
            }
            std::copy(features[r].begin(), features[r].end(), row.begin());
            row[d - 1] = 1.0;
            for (std::size_t i = 0; i < d; ++i) {
                for (std::size_t j = i; j < d; ++j) normal[i][j] += row[i] * row[j];
                rhs[i] += row[i] * targets[r];
            }
        }
        for (std::size_t i = 0; i < d; ++i) {
            normal[i][i] += lambda_;
            for (std::size_t j = 0; j < i; ++j) normal[i][j] = normal[j][i];
        }
        return std::make_unique<RidgeModel>(solve(normal, rhs), lambda_);
    }

    std::unique_ptr<RegressionModel> deserialize(const std::string& blob) const override {
        nlohmann::json j = nlohmann::json::parse(blob);
        if (j.value("kind", "") != "ridge") throw Error("not a ridge model blob");
        return std::make_unique<RidgeModel>(j.at("weights").get<std::vector<double>>(),
                                            j.at("lambda").get<double>());
    }

private:
    // Gaussian elimination with partial pivoting; systems here are small.
    static std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
        std::size_t n = b.size();
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < n; ++r) {
                if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
            }
            std::swap(a[col], a[pivot]);
            std::swap(b[col], b[pivot]);
            double diag = a[col][col];
            if (std::fabs(diag) < 1e-300) throw Error("singular normal equations");
            for (std::size_t r = col + 1; r < n; ++r) {
                double factor = a[r][col] / diag;
                if (factor == 0.0) continue;
                for (std::size_t c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
                b[r] -= factor * b[col];
            }
        }
        std::vector<double> x(n, 0.0);
        for (std::size_t i = n; i-- > 0;) {
            double sum = b[i];
            for (std::size_t j = i + 1; j < n; ++j) sum -= a[i][j] * x[j];
            x[i] = sum / a[i][i];
        }
        return x;
    }

    double lambda_;
};

// ---------------------------------------------------------------- similarity

// Token-level F1 rescaled around a fixed baseline, standing in for a
// model-based similarity score. Identical strings score 1; values below the
// baseline go negative.
class TokenOverlapSimilarityDouble final : public SimilarityScoreProvider {
public:
    double score(const std::string& candidate, const std::string& reference) const override {
        auto cand = word_tokens(candidate);
        auto ref = word_tokens(reference);
        if (cand.empty() && ref.empty()) return 1.0;
        if (cand.empty() || ref.empty()) return rescale(0.0);
        std::unordered_map<std::string, std::size_t> ref_counts;
        for (const auto& t : ref) ref_counts[t] += 1;
        std::size_t matched = 0;
        for (const auto& t : cand) {
            auto it = ref_counts.find(t);
            if (it != ref_counts.end() && it->second > 0) {
                ++matched;
                --it->second;
            }
        }
        double precision = static_cast<double>(matched) / static_cast<double>(cand.size());
        double recall = static_cast<double>(matched) / static_cast<double>(ref.size());
        double f1 = (precision + recall > 0) ? 2 * precision * recall / (precision + recall) : 0.0;
        return rescale(f1);
    }

private:
    static double rescale(double f1) {
        constexpr double baseline = 0.3;
        return (f1 - baseline) / (1.0 - baseline);
    }
};

// --------------------------------------------------------------- task models

// Naive Bayes over position-tagged word tokens; mirrors the "token type"
// distinction between the sequences before and after the marker.
class NaiveBayesClassifier final : public FittedClassifier {
public:
    explicit NaiveBayesClassifier(const std::vector<ClassifierExample>& examples) {
        for (const auto& example : examples) {
            int cls = example.is_gap ? 1 : 0;
            doc_counts_[cls] += 1;
            for (const auto& token : features(example.prefix, example.suffix)) {
                token_counts_[cls][token] += 1;
                total_tokens_[cls] += 1;
                vocabulary_.insert(token);
            }
        }
    }

    bool predict_gap(const std::string& prefix, const std::string& suffix) const override {
        double total_docs = static_cast<double>(doc_counts_[0] + doc_counts_[1]);
        if (total_docs == 0) return false;
        double v = static_cast<double>(vocabulary_.size()) + 1.0;
        double score[2];
        for (int cls = 0; cls < 2; ++cls) {
            score[cls] = std::log((doc_counts_[cls] + 1.0) / (total_docs + 2.0));
        }
        for (const auto& token : features(prefix, suffix)) {
            for (int cls = 0; cls < 2; ++cls) {
                double count = 0.0;
                auto it = token_counts_[cls].find(token);
                if (it != token_counts_[cls].end()) count = static_cast<double>(it->second);
                score[cls] += std::log((count + 1.0) / (total_tokens_[cls] + v));
            }
        }
        return score[1] > score[0];
    }

private:
    static std::vector<std::string> features(const std::string& prefix, const std::string& suffix) {
        std::vector<std::string> out;
        for (const auto& t : word_tokens(prefix)) out.push_back("L:" + t);
        for (const auto& t : word_tokens(suffix)) out.push_back("R:" + t);
        return out;
    }

    std::unordered_map<std::string, std::size_t> token_counts_[2];
    double doc_counts_[2] = {0.0, 0.0};
    double total_tokens_[2] = {0.0, 0.0};
    std::unordered_set<std::string> vocabulary_;
};

// Retrieval generator: returns the target of the training input with the
// highest token-set Jaccard overlap; empty when trained on nothing.
class RetrievalGenerator final : public FittedGenerator {
public:
    explicit RetrievalGenerator(const std::vector<GeneratorExample>& examples) {
        for (const auto& example : examples) {
            auto tokens = word_tokens(example.masked_input);
            entries_.push_back({{tokens.begin(), tokens.end()}, example.target});
        }
    }

    std::string generate(const std::string& masked_input) const override {
        if (entries_.empty()) return "";
        auto tokens = word_tokens(masked_input);
        std::unordered_set<std::string> query(tokens.begin(), tokens.end());
        double best = -1.0;
        std::size_t best_index = 0;
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            double overlap = jaccard(query, entries_[i].tokens);
            if (overlap > best) {
                best = overlap;
                best_index = i;
            }
        }
        return entries_[best_index].target;
    }

private:
    struct Entry {
        std::unordered_set<std::string> tokens;
        std::string target;
    };

    static double jaccard(const std::unordered_set<std::string>& a,
                          const std::unordered_set<std::string>& b) {
        if (a.empty() && b.empty()) return 1.0;
        std::size_t inter = 0;
        for (const auto& t : a) inter += b.count(t);
        return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
    }

    std::vector<Entry> entries_;
};

class DoubleTaskModelBackend final : public TaskModelBackend {
public:
    std::unique_ptr<FittedClassifier> train_classifier(
        const std::vector<ClassifierExample>& examples) const override {
        return std::make_unique<NaiveBayesClassifier>(examples);
    }

    std::unique_ptr<FittedGenerator> train_generator(
        const std::vector<GeneratorExample>& examples) const override {
        return std::make_unique<RetrievalGenerator>(examples);
    }
};

// ------------------------------------------------------------ embedding cache

class CachedEmbeddingProvider final : public EmbeddingProvider {
public:
    CachedEmbeddingProvider(std::shared_ptr<const EmbeddingProvider> inner, std::string path)
        : inner_(std::move(inner)), path_(std::move(path)) {
        std::ifstream in(path_);
        if (in) {
            try {
                nlohmann::json j;
                in >> j;
                for (auto& [key, value] : j.items()) {
                    cache_[key] = value.get<std::vector<double>>();
                }
            } catch (const std::exception&) {
                cache_.clear();  // stale or corrupt cache: recompute
            }
        }
    }

    ~CachedEmbeddingProvider() override { save(); }

    std::size_t dimension() const override { return inner_->dimension(); }

    std::vector<std::vector<double>> embed(const std::vector<std::string>& texts) const override {
        std::vector<std::vector<double>> out(texts.size());
        std::vector<std::string> missing;
        std::vector<std::size_t> missing_at;
        {
            std::lock_guard<std::mutex> lock(mutex_);
            for (std::size_t i = 0; i < texts.size(); ++i) {
                auto it = cache_.find(texts[i]);
                if (it != cache_.end()) {
                    out[i] = it->second;
                } else {
                    missing.push_back(texts[i]);
                    missing_at.push_back(i);
                }
            }
        }
        if (!missing.empty()) {
            auto computed = inner_->embed(missing);
            std::lock_guard<std::mutex> lock(mutex_);
            for (std::size_t k = 0; k < missing.size(); ++k) {
                out[missing_at[k]] = computed[k];
                cache_[missing[k]] = std::move(computed[k]);
            }
            dirty_ = true;
        }
        return out;
    }

private:
    void save() const {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!dirty_) return;
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [key, value] : cache_) j[key] = value;
        std::ofstream out(path_);
        if (out) out << j;
    }

    std::shared_ptr<const EmbeddingProvider> inner_;
    std::string path_;
    mutable std::mutex mutex_;
    mutable std::unordered_map<std::string, std::vector<double>> cache_;
    mutable bool dirty_ = false;
};

}  // namespace

ProviderSet make_test_doubles(std::uint64_t seed, std::size_t embedding_dimension) {
    ProviderSet set;
    set.embeddings = std::make_shared<HashEmbeddingDouble>(seed, embedding_dimension);
    set.neighbors = std::make_shared<HashParityNeighborDouble>(seed);
    set.adu_types = std::make_shared<LexiconAduTypeDouble>();
    set.sentiment = std::make_shared<LexiconSentimentDouble>();
    set.syntax = std::make_shared<RuleSyntaxDouble>(seed);
    set.regression = std::make_shared<RidgeRegressionDouble>();
    set.similarity = std::make_shared<TokenOverlapSimilarityDouble>();
    set.task_models = std::make_shared<DoubleTaskModelBackend>();
    return set;
}

std::shared_ptr<const EmbeddingProvider> with_embedding_cache(
    std::shared_ptr<const EmbeddingProvider> inner, const std::string& cache_dir,
    const std::string& provider_key) {
    std::filesystem::create_directories(cache_dir);
    std::string name = provider_key;
    std::replace(name.begin(), name.end(), ':', '_');
    std::string path = (std::filesystem::path(cache_dir) / (name + ".embeddings.json")).string();
    return std::make_shared<CachedEmbeddingProvider>(std::move(inner), path);
}

ProviderSet make_provider_set(const std::string& selector) {
    const std::string prefix = "double:";
    if (selector.rfind(prefix, 0) == 0) {
        std::uint64_t seed = 0;
        try {
            seed = std::stoull(selector.substr(prefix.size()));
        } catch (const std::exception&) {
            throw ConfigError("bad provider seed in selector '" + selector + "'");
        }
        ProviderSet set = make_test_doubles(seed);
        if (const char* cache = std::getenv("ENTHYMEME_FORGE_CACHE"); cache && *cache) {
            set.embeddings = with_embedding_cache(set.embeddings, cache, selector);
        }
        return set;
    }
    throw ConfigError("unknown provider selector '" + selector + "'; supported: double:<seed>");
}

}  // namespace enthymeme
