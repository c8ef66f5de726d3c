#include "enthymeme/corpus_builder.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "enthymeme/errors.hpp"

namespace fs = std::filesystem;

namespace enthymeme {

std::string to_string(Label label) { return label == Label::gap ? "gap" : "no_gap"; }

Label label_from_string(const std::string& name) {
    if (name == "gap") return Label::gap;
    if (name == "no_gap") return Label::no_gap;
    throw Error("unknown label: " + name);
}

std::string to_string(Split split) {
    switch (split) {
        case Split::train: return "train";
        case Split::validation: return "validation";
        case Split::test: return "test";
        case Split::unassigned: return "unassigned";
    }
    return "unassigned";
}

Split split_from_string(const std::string& name) {
    if (name == "train") return Split::train;
    if (name == "validation") return Split::validation;
    if (name == "test") return Split::test;
    if (name == "unassigned") return Split::unassigned;
    throw Error("unknown split: " + name);
}

Rng argument_rng(std::uint64_t seed, const std::string& essay_id, std::size_t paragraph_index) {
    return Rng(hash_combine(seed, hash_bytes(essay_id + '#' + std::to_string(paragraph_index))));
}

namespace {

std::string marked_text(const std::vector<std::string>& sentences, std::size_t boundary,
                        const std::string& marker) {
    std::vector<std::string> parts;
    parts.reserve(sentences.size() + 1);
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        if (i == boundary) parts.push_back(marker);
        parts.push_back(sentences[i]);
    }
    if (boundary == sentences.size()) parts.push_back(marker);
    return join(parts, " ");
}

std::vector<std::string> sentence_texts(const CandidateArgument& argument) {
    std::vector<std::string> texts;
    texts.reserve(argument.sentences.size());
    for (const auto& sentence : argument.sentences) texts.push_back(sentence.text);
    return texts;
}

}  // namespace

std::vector<CorpusInstance> make_instances(const CandidateArgument& argument,
                                           const std::optional<CandidateEnthymeme>& selected,
                                           Rng& rng, const SamplingConfig& config) {
    auto sentences = sentence_texts(argument);
    std::vector<CorpusInstance> instances;

    auto base_instance = [&](Label label) {
        CorpusInstance instance;
        instance.essay_id = argument.essay_id;
        instance.paragraph_index = argument.paragraph_index;
        instance.topic = argument.topic;
        instance.label = label;
        instance.instance_id = argument.essay_id + ":p" + std::to_string(argument.paragraph_index) +
                               (label == Label::gap ? ":pos" : ":neg");
        return instance;
    };

    bool remove = selected.has_value() && rng.next_double() < config.removal_probability;
    if (remove) {
        std::size_t removed = selected->sentence_index;
        std::vector<std::string> reduced;
        for (std::size_t i = 0; i < sentences.size(); ++i) {
            if (i != removed) reduced.push_back(sentences[i]);
        }
        if (reduced.empty()) {
            // the reduced text has a single boundary, which is the true one
            throw NoValidNegativePositionError(
                "no boundary left for a negative after removing the only sentence");
        }

        CorpusInstance positive = base_instance(Label::gap);
        positive.gap_boundary = removed;
        positive.enthymeme_text = sentences[removed];
        positive.adu_type = selected->adu_type;
        positive.text_with_marker = marked_text(reduced, removed, config.marker);
        instances.push_back(std::move(positive));

        // uniform over the reduced text's boundaries, excluding the true one
        std::size_t options = reduced.size();  // boundaries 0..size minus the true one
        std::size_t pick = rng.next_index(options);
        std::size_t boundary = pick >= removed ? pick + 1 : pick;
        CorpusInstance negative = base_instance(Label::no_gap);
        negative.gap_boundary = boundary;
        negative.text_with_marker = marked_text(reduced, boundary, config.marker);
        instances.push_back(std::move(negative));
    } else {
        CorpusInstance negative = base_instance(Label::no_gap);
        std::size_t boundary = rng.next_index(sentences.size() + 1);
        negative.gap_boundary = boundary;
        negative.text_with_marker = marked_text(sentences, boundary, config.marker);
        instances.push_back(std::move(negative));
    }
    return instances;
}

std::string reinsert_enthymeme(const CorpusInstance& instance, const std::string& marker) {
    if (instance.label != Label::gap || !instance.enthymeme_text) {
        throw NotAGapInstanceError("reinsertion requires a gap instance");
    }
    std::size_t at = instance.text_with_marker.find(marker);
    if (at == std::string::npos ||
        instance.text_with_marker.find(marker, at + 1) != std::string::npos) {
        throw MarkerMissingError("expected exactly one marker in instance " + instance.instance_id);
    }
    std::string out = instance.text_with_marker;
    out.replace(at, marker.size(), *instance.enthymeme_text);
    return out;
}

std::array<std::size_t, 3> apportion_splits(std::size_t total,
                                            const std::array<double, 3>& ratios) {
    double ratio_sum = ratios[0] + ratios[1] + ratios[2];
    if (!(ratio_sum > 0.0)) throw ConfigError("split ratios must be positive");
    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> fractions{};
    std::size_t assigned = 0;
    for (std::size_t k = 0; k < 3; ++k) {
        double exact = static_cast<double>(total) * ratios[k] / ratio_sum;
        sizes[k] = static_cast<std::size_t>(exact);
        fractions[k] = exact - static_cast<double>(sizes[k]);
        assigned += sizes[k];
    }
    // distribute the remainder by largest fractional part, ties to earlier splits
    std::array<std::size_t, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return fractions[a] > fractions[b]; });
    for (std::size_t k = 0; assigned < total; ++k) {
        sizes[order[k % 3]] += 1;
        ++assigned;
    }
    return sizes;
}

void assign_splits(std::vector<CorpusInstance>& instances, const std::array<double, 3>& ratios,
                   Rng& rng, bool group_by_essay) {
    auto sizes = apportion_splits(instances.size(), ratios);

    if (!group_by_essay) {
        std::vector<Split> labels;
        labels.reserve(instances.size());
        labels.insert(labels.end(), sizes[0], Split::train);
        labels.insert(labels.end(), sizes[1], Split::validation);
        labels.insert(labels.end(), sizes[2], Split::test);
        rng.shuffle(labels);
        for (std::size_t i = 0; i < instances.size(); ++i) instances[i].split = labels[i];
        return;
    }

    // group mode: whole essays move together; greedy fill toward the targets
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        auto [it, inserted] = groups.try_emplace(instances[i].essay_id);
        if (inserted) group_order.push_back(instances[i].essay_id);
        it->second.push_back(i);
    }
    rng.shuffle(group_order);
    std::array<long long, 3> deficit = {static_cast<long long>(sizes[0]),
                                        static_cast<long long>(sizes[1]),
                                        static_cast<long long>(sizes[2])};
    static const Split split_of[3] = {Split::train, Split::validation, Split::test};
    for (const auto& id : group_order) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < 3; ++k) {
            if (deficit[k] > deficit[best]) best = k;
        }
        for (std::size_t i : groups[id]) instances[i].split = split_of[best];
        deficit[best] -= static_cast<long long>(groups[id].size());
    }
}

CorpusStats compute_stats(const std::vector<CorpusInstance>& instances) {
    CorpusStats stats;
    stats.total = instances.size();
    std::map<std::string, std::size_t> type_counts;
    for (const auto& instance : instances) {
        stats.split_sizes[to_string(instance.split)] += 1;
        if (instance.label == Label::gap) {
            stats.positives += 1;
            if (instance.adu_type) type_counts[to_string(*instance.adu_type)] += 1;
            stats.position_histogram[instance.gap_boundary] += 1;
        } else {
            stats.negatives += 1;
        }
    }
    for (const auto& [kind, count] : type_counts) {
        stats.adu_type_distribution[kind] =
            static_cast<double>(count) / static_cast<double>(stats.positives);
    }
    return stats;
}

std::string render_stats(const CorpusStats& stats) {
    nlohmann::ordered_json j;
    j["total"] = stats.total;
    j["positives"] = stats.positives;
    j["negatives"] = stats.negatives;
    j["positive_share"] =
        stats.total > 0 ? static_cast<double>(stats.positives) / static_cast<double>(stats.total)
                        : 0.0;
    j["adu_type_distribution"] = nlohmann::ordered_json::object();
    for (const auto& [kind, fraction] : stats.adu_type_distribution) {
        j["adu_type_distribution"][kind] = fraction;
    }
    j["position_histogram"] = nlohmann::ordered_json::array();
    for (const auto& [position, count] : stats.position_histogram) {
        j["position_histogram"].push_back({position, count});
    }
    j["split_sizes"] = nlohmann::ordered_json::object();
    for (const auto& [split, count] : stats.split_sizes) j["split_sizes"][split] = count;
    return j.dump(2) + "\n";
}

std::vector<CorpusInstance> create_random_baseline(
    const std::map<std::string, const Essay*>& essays,
    const std::vector<CandidateArgument>& arguments, const AduTypeProvider& adu,
    const PipelineConfig& pipeline_config, const SamplingConfig& sampling) {
    std::vector<CorpusInstance> instances;
    for (const auto& argument : arguments) {
        const Essay& essay = *essays.at(argument.essay_id);
        auto qualifying =
            filter_by_argumentativeness(essay, argument, adu, pipeline_config, nullptr);
        Rng rng = argument_rng(sampling.seed, argument.essay_id, argument.paragraph_index);
        std::optional<CandidateEnthymeme> selected;
        if (!qualifying.empty()) {
            selected = qualifying[rng.next_index(qualifying.size())];
        }
        auto produced = make_instances(argument, selected, rng, sampling);
        instances.insert(instances.end(), produced.begin(), produced.end());
    }
    return instances;
}

namespace {

nlohmann::ordered_json to_json(const CorpusInstance& instance) {
    nlohmann::ordered_json j;
    j["instance_id"] = instance.instance_id;
    j["essay_id"] = instance.essay_id;
    j["paragraph_index"] = instance.paragraph_index;
    j["text_with_marker"] = instance.text_with_marker;
    j["label"] = to_string(instance.label);
    j["gap_boundary"] = instance.gap_boundary;
    if (instance.enthymeme_text) j["enthymeme_text"] = *instance.enthymeme_text;
    if (instance.adu_type) j["adu_type"] = to_string(*instance.adu_type);
    j["topic"] = instance.topic;
    j["split"] = to_string(instance.split);
    return j;
}

CorpusInstance from_json(const nlohmann::json& j, std::size_t line) {
    try {
        CorpusInstance instance;
        instance.instance_id = j.at("instance_id").get<std::string>();
        instance.essay_id = j.at("essay_id").get<std::string>();
        instance.paragraph_index = j.at("paragraph_index").get<std::size_t>();
        instance.text_with_marker = j.at("text_with_marker").get<std::string>();
        instance.label = label_from_string(j.at("label").get<std::string>());
        instance.gap_boundary = j.at("gap_boundary").get<std::size_t>();
        if (j.contains("enthymeme_text")) {
            instance.enthymeme_text = j.at("enthymeme_text").get<std::string>();
        }
        if (j.contains("adu_type")) {
            instance.adu_type = adu_type_from_string(j.at("adu_type").get<std::string>());
        }
        instance.topic = j.at("topic").get<std::string>();
        instance.split = split_from_string(j.at("split").get<std::string>());
        if ((instance.label == Label::gap) != instance.enthymeme_text.has_value()) {
            throw MalformedRecordError("label and enthymeme_text disagree", line);
        }
        if (instance.label == Label::no_gap && instance.adu_type.has_value()) {
            throw MalformedRecordError("no_gap instance carries an adu_type", line);
        }
        return instance;
    } catch (const MalformedRecordError&) {
        throw;
    } catch (const std::exception& e) {
        throw MalformedRecordError(e.what(), line);
    }
}

}  // namespace

void write_instances(const std::vector<CorpusInstance>& instances, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailureError("cannot write " + path);
    for (const auto& instance : instances) {
        out << to_json(instance).dump() << '\n';
    }
    if (!out) throw IoFailureError("write failed for " + path);
}

std::vector<CorpusInstance> read_instances(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailureError("cannot read " + path);
    std::vector<CorpusInstance> instances;
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const std::exception& e) {
            throw MalformedRecordError(e.what(), line_number);
        }
        instances.push_back(from_json(j, line_number));
    }
    return instances;
}

void write_corpus(const std::vector<CorpusInstance>& instances, const std::string& directory) {
    fs::create_directories(directory);
    std::vector<CorpusInstance> train, validation, test;
    for (const auto& instance : instances) {
        switch (instance.split) {
            case Split::train: train.push_back(instance); break;
            case Split::validation: validation.push_back(instance); break;
            case Split::test: test.push_back(instance); break;
            case Split::unassigned:
                throw Error("instance " + instance.instance_id + " has no split assigned");
        }
    }
    write_instances(train, (fs::path(directory) / "corpus.train").string());
    write_instances(validation, (fs::path(directory) / "corpus.validation").string());
    write_instances(test, (fs::path(directory) / "corpus.test").string());
    std::ofstream stats((fs::path(directory) / "corpus.stats").string(), std::ios::binary);
    if (!stats) throw IoFailureError("cannot write corpus.stats under " + directory);
    stats << render_stats(compute_stats(instances));
}

std::vector<CorpusInstance> read_corpus(const std::string& directory) {
    std::vector<CorpusInstance> instances;
    for (const char* name : {"corpus.train", "corpus.validation", "corpus.test"}) {
        auto part = read_instances((fs::path(directory) / name).string());
        instances.insert(instances.end(), part.begin(), part.end());
    }
    return instances;
}

}  // namespace enthymeme
