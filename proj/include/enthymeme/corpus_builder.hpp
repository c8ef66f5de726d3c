#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "enthymeme/pipeline.hpp"
#include "enthymeme/providers.hpp"
#include "enthymeme/util.hpp"

namespace enthymeme {

enum class Label { gap, no_gap };
enum class Split { train, validation, test, unassigned };

std::string to_string(Label label);
Label label_from_string(const std::string& name);
std::string to_string(Split split);
Split split_from_string(const std::string& name);

// One detection/reconstruction example. Gap boundaries are indexed 0..k for a
// k-sentence text: before the first sentence through after the last.
struct CorpusInstance {
    std::string instance_id;
    std::string essay_id;
    std::size_t paragraph_index = 0;
    std::string text_with_marker;
    Label label = Label::no_gap;
    std::size_t gap_boundary = 0;
    std::optional<std::string> enthymeme_text;  // present iff label == gap
    std::optional<AduType> adu_type;            // present iff label == gap
    std::string topic;
    Split split = Split::unassigned;
};

struct SamplingConfig {
    double removal_probability = 0.8;
    std::array<double, 3> split_ratios = {7.0, 1.0, 2.0};
    std::uint64_t seed = 0;
    bool group_by_essay = false;
    std::string marker = "[GAP]";
};

// Independent per-argument RNG stream; instance generation stays deterministic
// under any processing order.
Rng argument_rng(std::uint64_t seed, const std::string& essay_id, std::size_t paragraph_index);

// With probability removal_probability (given a selected candidate): a
// positive with the candidate removed and the marker at its boundary, plus a
// negative with the same reduced text and the marker at a random other
// boundary. Otherwise (or without a candidate): one negative over the
// unmodified argument with the marker at a random boundary.
std::vector<CorpusInstance> make_instances(const CandidateArgument& argument,
                                           const std::optional<CandidateEnthymeme>& selected,
                                           Rng& rng, const SamplingConfig& config);

// The marker replaced by the enthymeme text; equals the original argument
// text for every gap instance.
std::string reinsert_enthymeme(const CorpusInstance& instance, const std::string& marker);

// Largest-remainder apportionment to the ratio, then a seeded uniform shuffle
// of the split labels. Group mode keeps all instances of an essay together.
void assign_splits(std::vector<CorpusInstance>& instances,
                   const std::array<double, 3>& ratios, Rng& rng, bool group_by_essay = false);

std::array<std::size_t, 3> apportion_splits(std::size_t total,
                                            const std::array<double, 3>& ratios);

struct CorpusStats {
    std::size_t total = 0;
    std::size_t positives = 0;
    std::size_t negatives = 0;
    std::map<std::string, double> adu_type_distribution;   // fractions over positives
    std::map<std::size_t, std::size_t> position_histogram;  // removed sentence index -> count
    std::map<std::string, std::size_t> split_sizes;
};

CorpusStats compute_stats(const std::vector<CorpusInstance>& instances);
std::string render_stats(const CorpusStats& stats);

// The random-removal baseline: argumentativeness filtering only, one uniformly
// random qualifying ADU per argument, same 80/20 instance rule.
std::vector<CorpusInstance> create_random_baseline(const std::map<std::string, const Essay*>& essays,
                                                   const std::vector<CandidateArgument>& arguments,
                                                   const AduTypeProvider& adu,
                                                   const PipelineConfig& pipeline_config,
                                                   const SamplingConfig& sampling);

// Line-delimited JSON records, stable field order.
void write_instances(const std::vector<CorpusInstance>& instances, const std::string& path);
std::vector<CorpusInstance> read_instances(const std::string& path);

// corpus.train / corpus.validation / corpus.test plus corpus.stats under the
// directory; requires every instance to carry a split.
void write_corpus(const std::vector<CorpusInstance>& instances, const std::string& directory);
std::vector<CorpusInstance> read_corpus(const std::string& directory);

}  // namespace enthymeme
