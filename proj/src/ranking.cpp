#include "enthymeme/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "enthymeme/errors.hpp"
#include "enthymeme/util.hpp"

namespace enthymeme {

std::size_t SentenceGraph::node_of(std::size_t paragraph_index, std::size_t sentence_index) const {
    return node_index.at({paragraph_index, sentence_index});
}

SentenceGraph build_sentence_graph(const Essay& essay, const EmbeddingProvider& embeddings) {
    SentenceGraph graph;
    graph.node_texts.push_back(essay.title);
    for (const auto& loc : all_sentences(essay)) {
        graph.node_index[{loc.paragraph_index, loc.sentence_index}] = graph.node_texts.size();
        graph.node_texts.push_back(loc.sentence->text);
    }
    graph.embeddings = embeddings.embed(graph.node_texts);
    return graph;
}

namespace {

void softmax_row(Matrix& m, std::size_t i) {
    double max_value = m.at(i, 0);
    for (std::size_t j = 1; j < m.size; ++j) max_value = std::max(max_value, m.at(i, j));
    double sum = 0.0;
    for (std::size_t j = 0; j < m.size; ++j) {
        double e = std::exp(m.at(i, j) - max_value);
        m.at(i, j) = e;
        sum += e;
    }
    for (std::size_t j = 0; j < m.size; ++j) m.at(i, j) /= sum;
}

void verify_stochastic(const Matrix& m, const char* label) {
    for (std::size_t i = 0; i < m.size; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < m.size; ++j) {
            double v = m.at(i, j);
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw Error(std::string(label) + ": non-positive entry in row " +
                            std::to_string(i));
            }
            sum += v;
        }
        if (std::fabs(sum - 1.0) > 1e-9) {
            throw Error(std::string(label) + ": row " + std::to_string(i) +
                        " sums to " + std::to_string(sum));
        }
    }
}

}  // namespace

Matrix build_similarity_matrix(const SentenceGraph& graph) {
    std::size_t n = graph.embeddings.size();
    std::vector<double> norms(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (double v : graph.embeddings[i]) s += v * v;
        norms[i] = std::sqrt(s);
        if (norms[i] < 1e-12) {
            throw DegenerateEmbeddingError("zero-norm embedding at node " + std::to_string(i));
        }
    }
    Matrix a(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < graph.embeddings[i].size(); ++k) {
                dot += graph.embeddings[i][k] * graph.embeddings[j][k];
            }
            a.at(i, j) = dot / (norms[i] * norms[j]);
        }
    }
    for (std::size_t i = 0; i < n; ++i) softmax_row(a, i);
    verify_stochastic(a, "similarity matrix");
    return a;
}

double quality_contribution(const Essay& essay, std::size_t paragraph_index,
                            std::size_t sentence_index, const ScorerSet& scorers,
                            const ProviderSet& providers) {
    double full = predict_scores(scorers, essay, providers).overall;

    std::vector<std::string> paragraphs;
    for (const auto& paragraph : essay.paragraphs) {
        if (paragraph.index != paragraph_index) {
            paragraphs.push_back(paragraph_text(essay, paragraph));
            continue;
        }
        std::vector<std::string> kept;
        for (const auto& sentence : paragraph.sentences) {
            if (sentence.index != sentence_index) kept.push_back(sentence.text);
        }
        if (!kept.empty()) paragraphs.push_back(join(kept, " "));
        // paragraph dropped entirely when the removal empties it
    }
    Essay reduced = parse_essay(join(paragraphs, "\n\n"), essay.id, essay.title);
    double without = predict_scores(scorers, reduced, providers).overall;
    return full - without;
}

QualityContributions impute_contributions(std::size_t node_count,
                                          const std::map<std::size_t, double>& computed) {
    if (computed.empty()) {
        throw Error("quality contributions require at least one candidate node");
    }
    double mean = 0.0;
    for (const auto& [node, value] : computed) mean += value;
    mean /= static_cast<double>(computed.size());

    QualityContributions contributions;
    contributions.values.assign(node_count, mean);
    contributions.computed.assign(node_count, false);
    for (const auto& [node, value] : computed) {
        contributions.values.at(node) = value;
        contributions.computed.at(node) = true;
    }
    return contributions;
}

Matrix build_quality_matrix(const QualityContributions& contributions) {
    std::size_t n = contributions.values.size();
    double min_value = *std::min_element(contributions.values.begin(), contributions.values.end());
    double max_value = *std::max_element(contributions.values.begin(), contributions.values.end());
    double range = max_value - min_value;

    Matrix b(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            // degenerate range: all zeros, softmax below yields a uniform row
            b.at(i, j) = range > 0.0 ? (contributions.values[j] - min_value) / range : 0.0;
        }
    }
    for (std::size_t i = 0; i < n; ++i) softmax_row(b, i);
    verify_stochastic(b, "quality matrix");
    return b;
}

Matrix combine(const Matrix& a, const Matrix& b, double lambda) {
    if (a.size != b.size) {
        throw DimensionMismatchError("cannot combine " + std::to_string(a.size) + "x" +
                                     std::to_string(a.size) + " with " + std::to_string(b.size) +
                                     "x" + std::to_string(b.size));
    }
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        throw ConfigError("lambda must lie in [0, 1]");
    }
    Matrix m(a.size);
    for (std::size_t k = 0; k < m.values.size(); ++k) {
        m.values[k] = lambda * a.values[k] + (1.0 - lambda) * b.values[k];
    }
    verify_stochastic(m, "transition matrix");
    return m;
}

RankVector power_iteration(const Matrix& m, double tolerance, std::size_t max_iterations) {
    if (m.size == 0) throw Error("power iteration needs a non-empty matrix");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    verify_stochastic(m, "power iteration input");

    std::size_t n = m.size;
    std::vector<double> pi(n, 1.0 / static_cast<double>(n));
    std::vector<double> next(n, 0.0);
    for (std::size_t iteration = 1; iteration <= max_iterations; ++iteration) {
        for (std::size_t j = 0; j < n; ++j) next[j] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double p = pi[i];
            for (std::size_t j = 0; j < n; ++j) next[j] += p * m.at(i, j);
        }
        double residual = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            residual = std::max(residual, std::fabs(next[j] - pi[j]));
        }
        pi.swap(next);
        if (residual < tolerance) {
            double sum = 0.0;
            for (double v : pi) sum += v;
            for (double& v : pi) v /= sum;
            return {std::move(pi), iteration, residual};
        }
    }
    throw NoConvergenceError("power iteration did not converge within " +
                             std::to_string(max_iterations) + " iterations");
}

std::optional<CandidateEnthymeme> select_enthymeme(const ArgumentCandidates& argument,
                                                   const RankVector& rank,
                                                   const SentenceGraph& graph) {
    std::optional<CandidateEnthymeme> best;
    double best_rank = 0.0;
    for (const auto& candidate : argument.candidates) {
        std::size_t node = graph.node_of(candidate.paragraph_index, candidate.sentence_index);
        double value = rank.probabilities.at(node);
        if (!best || value > best_rank) {  // ties keep the earlier sentence
            best = candidate;
            best_rank = value;
        }
    }
    return best;
}

std::string to_string(RankingMode mode) {
    switch (mode) {
        case RankingMode::full: return "full";
        case RankingMode::centrality: return "centrality";
        case RankingMode::quality: return "quality";
        case RankingMode::random: return "random";
    }
    return "full";
}

RankingMode ranking_mode_from_string(const std::string& name) {
    if (name == "full") return RankingMode::full;
    if (name == "centrality") return RankingMode::centrality;
    if (name == "quality") return RankingMode::quality;
    if (name == "random") return RankingMode::random;
    throw ConfigError("unknown ranking mode: " + name);
}

SelectionResult rank_essay(const Essay& essay,
                           const std::vector<const ArgumentCandidates*>& arguments,
                           const ScorerSet* scorers, const ProviderSet& providers,
                           const RankingConfig& config) {
    SelectionResult result;
    result.selected.assign(arguments.size(), std::nullopt);

    std::size_t total_candidates = 0;
    for (const auto* argument : arguments) total_candidates += argument->candidates.size();
    if (total_candidates == 0) return result;

    result.ranking.graph = build_sentence_graph(essay, *providers.embeddings);
    const SentenceGraph& graph = result.ranking.graph;
    std::size_t n = graph.node_texts.size();

    double lambda = config.lambda;
    if (config.mode == RankingMode::centrality) lambda = 1.0;
    if (config.mode == RankingMode::quality) lambda = 0.0;

    result.ranking.similarity = build_similarity_matrix(graph);

    if (lambda < 1.0) {
        if (scorers == nullptr) {
            throw MissingDimensionModelError(
                "quality-contribution ranking requires scoring models");
        }
        std::map<std::size_t, double> computed;
        for (const auto* argument : arguments) {
            for (const auto& candidate : argument->candidates) {
                std::size_t node =
                    graph.node_of(candidate.paragraph_index, candidate.sentence_index);
                if (!computed.count(node)) {
                    computed[node] =
                        quality_contribution(essay, candidate.paragraph_index,
                                             candidate.sentence_index, *scorers, providers);
                }
            }
        }
        result.ranking.contributions = impute_contributions(n, computed);
        result.ranking.quality = build_quality_matrix(result.ranking.contributions);
    } else {
        // centrality-only mode never consults the scoring models; B is unused
        // and set to A so that combine() below is the identity
        result.ranking.quality = result.ranking.similarity;
    }

    result.ranking.transition = combine(result.ranking.similarity, result.ranking.quality, lambda);
    result.ranking.rank =
        power_iteration(result.ranking.transition, config.tolerance, config.max_iterations);
    result.ranking.ranked = true;

    for (std::size_t i = 0; i < arguments.size(); ++i) {
        result.selected[i] = select_enthymeme(*arguments[i], result.ranking.rank, graph);
    }
    return result;
}

void dump_ranking(const EssayRanking& ranking, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoFailureError("cannot write ranking dump " + path);
    out << std::setprecision(12);
    out << "nodes\t" << ranking.graph.node_texts.size() << '\n';
    for (std::size_t i = 0; i < ranking.graph.node_texts.size(); ++i) {
        out << i << '\t' << (i == 0 ? "title" : "sentence") << '\t'
            << ranking.graph.node_texts[i] << '\n';
    }
    auto write_matrix = [&out](const char* name, const Matrix& m) {
        out << name << '\n';
        for (std::size_t i = 0; i < m.size; ++i) {
            for (std::size_t j = 0; j < m.size; ++j) {
                if (j > 0) out << '\t';
                out << m.at(i, j);
            }
            out << '\n';
        }
    };
    write_matrix("A", ranking.similarity);
    write_matrix("B", ranking.quality);
    write_matrix("M", ranking.transition);
    out << "pi\titerations=" << ranking.rank.iterations_used
        << "\tresidual=" << ranking.rank.residual << '\n';
    for (double v : ranking.rank.probabilities) out << v << '\n';
}

}  // namespace enthymeme
