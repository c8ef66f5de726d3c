#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "enthymeme/essay_model.hpp"
#include "enthymeme/essay_scoring.hpp"
#include "enthymeme/providers.hpp"

namespace enthymeme {

struct PipelineConfig {
    double quality_threshold = 3.0;   // keep essays scoring strictly above
    std::size_t min_sentences = 4;    // per candidate argument
    std::size_t max_tokens = 500;     // per candidate argument
    std::size_t min_adu_tokens = 5;   // candidates need strictly more tokens
    unsigned jobs = 1;
};

// A paragraph that survived length filtering; the unit enthymemes are cut from.
struct CandidateArgument {
    std::string essay_id;
    std::size_t paragraph_index = 0;
    std::vector<Sentence> sentences;
    std::string topic;

    std::size_t token_count() const;
    // Normalized argument text: sentence texts joined by single spaces.
    std::string text() const;
};

struct CandidateEnthymeme {
    std::string essay_id;
    std::size_t paragraph_index = 0;
    std::size_t sentence_index = 0;  // within the argument
    AduType adu_type = AduType::premise;
    std::size_t token_count = 0;
};

struct FilterTrace {
    struct Row {
        std::string stage;
        std::size_t essays = 0;
        std::size_t arguments = 0;
        std::size_t candidates = 0;
    };
    std::vector<Row> rows;

    std::string to_tsv() const;
};

struct ArgumentCandidates {
    CandidateArgument argument;
    std::vector<CandidateEnthymeme> candidates;  // empty sets are retained
};

struct PipelineResult {
    std::vector<ArgumentCandidates> arguments;
    FilterTrace trace;
};

// Stage 1: essays with overall score strictly above the threshold.
std::vector<Essay> filter_by_quality(const std::vector<Essay>& essays, const ScorerSet& scorers,
                                     const ProviderSet& providers, const PipelineConfig& config);

// Stage 2: paragraphs with at least min_sentences and at most max_tokens.
std::vector<CandidateArgument> filter_by_length(const std::vector<Essay>& essays,
                                                const PipelineConfig& config);

// Stage 3: sentence indices whose removal keeps the text natural. The left
// context of the first sentence is the preceding essay sentence (or the title
// at essay start); symmetrically for the last sentence.
std::set<std::size_t> filter_by_naturalness(const Essay& essay, const CandidateArgument& argument,
                                            const NeighborPlausibilityProvider& neighbors);

// Stage 4: argumentative sentences with strictly more than min_adu_tokens
// tokens, intersected with naturalness survivors when a set is given.
std::vector<CandidateEnthymeme> filter_by_argumentativeness(
    const Essay& essay, const CandidateArgument& argument, const AduTypeProvider& adu,
    const PipelineConfig& config, const std::set<std::size_t>* naturalness_survivors);

// All four stages in order. Pass no scorers to skip quality filtering (the
// centrality-only and random corpus modes); the trace then repeats the base
// row for that stage. Arguments whose candidate set ends up empty stay in the
// result: they still yield no-deletion negatives downstream.
PipelineResult run_pipeline(const std::vector<Essay>& essays, const ProviderSet& providers,
                            const ScorerSet* scorers, const PipelineConfig& config);

}  // namespace enthymeme
