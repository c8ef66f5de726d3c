#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "enthymeme/essay_model.hpp"
#include "enthymeme/essay_scoring.hpp"
#include "enthymeme/pipeline.hpp"
#include "enthymeme/providers.hpp"

namespace enthymeme {

// Dense square row-major matrix; small (one node per essay sentence + title).
struct Matrix {
    std::size_t size = 0;
    std::vector<double> values;

    explicit Matrix(std::size_t n = 0) : size(n), values(n * n, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return values[i * size + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * size + j]; }
};

// Node 0 is the essay title; nodes 1..n are all sentences in document order.
struct SentenceGraph {
    std::vector<std::string> node_texts;
    std::vector<std::vector<double>> embeddings;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> node_index;

    std::size_t node_of(std::size_t paragraph_index, std::size_t sentence_index) const;
};

SentenceGraph build_sentence_graph(const Essay& essay, const EmbeddingProvider& embeddings);

// Pairwise cosine similarities (diagonal included), then a softmax per row.
// Throws DegenerateEmbeddingError on a zero-norm vector.
Matrix build_similarity_matrix(const SentenceGraph& graph);

struct QualityContributions {
    std::vector<double> values;  // per node
    std::vector<bool> computed;  // true = model-computed, false = average-imputed
};

// Overall score of the full essay minus the overall score with the sentence
// deleted (its paragraph dropped entirely when it empties).
double quality_contribution(const Essay& essay, std::size_t paragraph_index,
                            std::size_t sentence_index, const ScorerSet& scorers,
                            const ProviderSet& providers);

// Computed values for the candidate nodes; every other node (the title
// included) carries the mean of the computed values.
QualityContributions impute_contributions(std::size_t node_count,
                                          const std::map<std::size_t, double>& computed);

// Column j of every row carries contribution c_j; each row is min-max scaled
// then softmaxed. A degenerate range (max == min) scales to all zeros,
// giving a uniform row.
Matrix build_quality_matrix(const QualityContributions& contributions);

// M = lambda * A + (1 - lambda) * B; rows re-verified stochastic.
Matrix combine(const Matrix& a, const Matrix& b, double lambda);

struct RankVector {
    std::vector<double> probabilities;
    std::size_t iterations_used = 0;
    double residual = 0.0;
};

// Left power iteration from the uniform vector until the L-infinity step
// change drops below tolerance; the result is L1-normalized.
RankVector power_iteration(const Matrix& m, double tolerance = 1e-10,
                           std::size_t max_iterations = 1000);

// Highest-ranked candidate of one argument; ties go to the smallest sentence
// index; nullopt when the argument has no candidates.
std::optional<CandidateEnthymeme> select_enthymeme(const ArgumentCandidates& argument,
                                                   const RankVector& rank,
                                                   const SentenceGraph& graph);

enum class RankingMode { full, centrality, quality, random };

std::string to_string(RankingMode mode);
RankingMode ranking_mode_from_string(const std::string& name);

struct RankingConfig {
    double lambda = 0.5;
    double tolerance = 1e-10;
    std::size_t max_iterations = 1000;
    RankingMode mode = RankingMode::full;
};

struct EssayRanking {
    SentenceGraph graph;
    Matrix similarity;     // A
    Matrix quality;        // B
    Matrix transition;     // M
    RankVector rank;
    QualityContributions contributions;
    bool ranked = false;   // false when the essay had no candidates
};

struct SelectionResult {
    // Parallel to the input arguments.
    std::vector<std::optional<CandidateEnthymeme>> selected;
    EssayRanking ranking;
};

// Ranks one essay's graph and picks the top candidate per argument. Scorers
// may be null in centrality mode only (quality contributions are not used
// there); mode quality/full requires them.
SelectionResult rank_essay(const Essay& essay,
                           const std::vector<const ArgumentCandidates*>& arguments,
                           const ScorerSet* scorers, const ProviderSet& providers,
                           const RankingConfig& config);

// Structured text dump of nodes, A, B, M and the rank vector.
void dump_ranking(const EssayRanking& ranking, const std::string& path);

}  // namespace enthymeme
