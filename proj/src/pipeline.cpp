#include "enthymeme/pipeline.hpp"

#include <algorithm>
#include <sstream>

#include "enthymeme/util.hpp"

namespace enthymeme {

std::size_t CandidateArgument::token_count() const {
    std::size_t count = 0;
    for (const auto& sentence : sentences) count += sentence.token_count();
    return count;
}

std::string CandidateArgument::text() const {
    std::vector<std::string> parts;
    parts.reserve(sentences.size());
    for (const auto& sentence : sentences) parts.push_back(sentence.text);
    return join(parts, " ");
}

std::string FilterTrace::to_tsv() const {
    std::ostringstream out;
    out << "stage\tessays\targuments\tcandidates\n";
    for (const auto& row : rows) {
        out << row.stage << '\t' << row.essays << '\t' << row.arguments << '\t' << row.candidates
            << '\n';
    }
    return out.str();
}

namespace {

FilterTrace::Row census(const std::string& stage, const std::vector<Essay>& essays) {
    FilterTrace::Row row;
    row.stage = stage;
    row.essays = essays.size();
    for (const auto& essay : essays) {
        row.arguments += essay.paragraphs.size();
        row.candidates += essay.sentence_count();
    }
    return row;
}

}  // namespace

std::vector<Essay> filter_by_quality(const std::vector<Essay>& essays, const ScorerSet& scorers,
                                     const ProviderSet& providers, const PipelineConfig& config) {
    std::vector<char> keep(essays.size(), 0);
    parallel_for(essays.size(), config.jobs, [&](std::size_t i) {
        QualityScores scores = predict_scores(scorers, essays[i], providers);
        keep[i] = scores.overall > config.quality_threshold ? 1 : 0;
    });
    std::vector<Essay> surviving;
    for (std::size_t i = 0; i < essays.size(); ++i) {
        if (keep[i]) surviving.push_back(essays[i]);
    }
    return surviving;
}

std::vector<CandidateArgument> filter_by_length(const std::vector<Essay>& essays,
                                                const PipelineConfig& config) {
    std::vector<CandidateArgument> arguments;
    for (const auto& essay : essays) {
        for (const auto& paragraph : essay.paragraphs) {
            if (paragraph.sentences.size() < config.min_sentences) continue;
            if (paragraph.token_count() > config.max_tokens) continue;
            CandidateArgument argument;
            argument.essay_id = essay.id;
            argument.paragraph_index = paragraph.index;
            argument.sentences = paragraph.sentences;
            argument.topic = essay.title;
            arguments.push_back(std::move(argument));
        }
    }
    return arguments;
}

std::set<std::size_t> filter_by_naturalness(const Essay& essay, const CandidateArgument& argument,
                                            const NeighborPlausibilityProvider& neighbors) {
    std::set<std::size_t> passing;
    std::size_t p = argument.paragraph_index;
    std::size_t count = argument.sentences.size();
    for (std::size_t i = 0; i < count; ++i) {
        std::string left;
        if (i > 0) {
            left = argument.sentences[i - 1].text;
        } else if (p > 0 && !essay.paragraphs[p - 1].sentences.empty()) {
            left = essay.paragraphs[p - 1].sentences.back().text;
        } else {
            left = essay.title;
        }
        std::string right;
        if (i + 1 < count) {
            right = argument.sentences[i + 1].text;
        } else if (p + 1 < essay.paragraphs.size() &&
                   !essay.paragraphs[p + 1].sentences.empty()) {
            right = essay.paragraphs[p + 1].sentences.front().text;
        } else {
            right = essay.title;
        }
        if (neighbors.judge(left, right).plausible) passing.insert(i);
    }
    return passing;
}

std::vector<CandidateEnthymeme> filter_by_argumentativeness(
    const Essay& essay, const CandidateArgument& argument, const AduTypeProvider& adu,
    const PipelineConfig& config, const std::set<std::size_t>* naturalness_survivors) {
    std::vector<CandidateEnthymeme> candidates;
    for (std::size_t i = 0; i < argument.sentences.size(); ++i) {
        if (naturalness_survivors && naturalness_survivors->count(i) == 0) continue;
        const Sentence& sentence = argument.sentences[i];
        if (sentence.token_count() <= config.min_adu_tokens) continue;
        AduType type = adu.classify(sentence.text, essay.raw_text);
        if (type == AduType::non_argumentative) continue;
        CandidateEnthymeme candidate;
        candidate.essay_id = argument.essay_id;
        candidate.paragraph_index = argument.paragraph_index;
        candidate.sentence_index = i;
        candidate.adu_type = type;
        candidate.token_count = sentence.token_count();
        candidates.push_back(candidate);
    }
    return candidates;
}

PipelineResult run_pipeline(const std::vector<Essay>& essays, const ProviderSet& providers,
                            const ScorerSet* scorers, const PipelineConfig& config) {
    PipelineResult result;
    result.trace.rows.push_back(census("base", essays));

    std::vector<Essay> surviving =
        scorers ? filter_by_quality(essays, *scorers, providers, config) : essays;
    result.trace.rows.push_back(census("essay quality", surviving));

    auto arguments = filter_by_length(surviving, config);
    {
        FilterTrace::Row row;
        row.stage = "argument length";
        row.arguments = arguments.size();
        std::set<std::string> ids;
        for (const auto& argument : arguments) {
            ids.insert(argument.essay_id);
            row.candidates += argument.sentences.size();
        }
        row.essays = ids.size();
        result.trace.rows.push_back(row);
    }

    std::map<std::string, const Essay*> by_id;
    for (const auto& essay : surviving) by_id[essay.id] = &essay;

    std::vector<std::set<std::size_t>> natural(arguments.size());
    parallel_for(arguments.size(), config.jobs, [&](std::size_t i) {
        natural[i] = filter_by_naturalness(*by_id.at(arguments[i].essay_id), arguments[i],
                                           *providers.neighbors);
    });
    {
        // This stage filters candidate ADUs only; arguments are never dropped here.
        FilterTrace::Row row = result.trace.rows.back();
        row.stage = "naturalness";
        row.candidates = 0;
        for (const auto& set : natural) row.candidates += set.size();
        result.trace.rows.push_back(row);
    }

    result.arguments.resize(arguments.size());
    parallel_for(arguments.size(), config.jobs, [&](std::size_t i) {
        result.arguments[i].candidates =
            filter_by_argumentativeness(*by_id.at(arguments[i].essay_id), arguments[i],
                                        *providers.adu_types, config, &natural[i]);
    });
    for (std::size_t i = 0; i < arguments.size(); ++i) {
        result.arguments[i].argument = std::move(arguments[i]);
    }
    {
        FilterTrace::Row row;
        row.stage = "argumentativeness";
        std::set<std::string> ids;
        for (const auto& entry : result.arguments) {
            row.candidates += entry.candidates.size();
            if (!entry.candidates.empty()) {
                row.arguments += 1;
                ids.insert(entry.argument.essay_id);
            }
        }
        row.essays = ids.size();
        result.trace.rows.push_back(row);
    }
    return result;
}

}  // namespace enthymeme
