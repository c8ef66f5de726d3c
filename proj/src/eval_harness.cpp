#include "enthymeme/eval_harness.hpp"

#include <algorithm>
#include <map>

#include "enthymeme/errors.hpp"
#include "enthymeme/util.hpp"

namespace enthymeme {

DetectionExample to_detection_example(const CorpusInstance& instance, const std::string& marker) {
    std::size_t at = instance.text_with_marker.find(marker);
    if (at == std::string::npos) {
        throw MarkerMissingError("no marker in instance " + instance.instance_id);
    }
    if (instance.text_with_marker.find(marker, at + 1) != std::string::npos) {
        throw MarkerMissingError("multiple markers in instance " + instance.instance_id);
    }
    DetectionExample example;
    example.prefix = instance.text_with_marker.substr(0, at);
    example.suffix = instance.text_with_marker.substr(at + marker.size());
    example.label = instance.label;
    return example;
}

ReconstructionExample to_reconstruction_example(const CorpusInstance& instance, bool augmented,
                                                const std::string& marker) {
    if (instance.label != Label::gap || !instance.enthymeme_text || !instance.adu_type) {
        throw NotAGapInstanceError("instance " + instance.instance_id + " has no enthymeme");
    }
    if (instance.text_with_marker.find(marker) == std::string::npos) {
        throw MarkerMissingError("no marker in instance " + instance.instance_id);
    }
    ReconstructionExample example;
    example.topic = instance.topic;
    example.adu_type = *instance.adu_type;
    example.target = *instance.enthymeme_text;
    example.augmented = augmented;
    if (augmented) {
        example.masked_text = "topic: " + instance.topic + " ; type: " +
                              to_string(*instance.adu_type) + " ; " + instance.text_with_marker;
    } else {
        example.masked_text = instance.text_with_marker;
    }
    return example;
}

ClassificationMetrics classification_metrics(const std::vector<Label>& predictions,
                                             const std::vector<Label>& labels) {
    if (predictions.size() != labels.size() || predictions.empty()) {
        throw LengthMismatchError("predictions and labels must be equally sized and non-empty");
    }
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        bool predicted_gap = predictions[i] == Label::gap;
        bool is_gap = labels[i] == Label::gap;
        if (predicted_gap && is_gap) ++tp;
        if (predicted_gap && !is_gap) ++fp;
        if (!predicted_gap && is_gap) ++fn;
        if (!predicted_gap && !is_gap) ++tn;
    }
    ClassificationMetrics metrics;
    metrics.accuracy = (tp + tn) / static_cast<double>(predictions.size());
    metrics.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    metrics.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    metrics.f1 = metrics.precision + metrics.recall > 0
                     ? 2.0 * metrics.precision * metrics.recall /
                           (metrics.precision + metrics.recall)
                     : 0.0;
    return metrics;
}

namespace {

std::vector<std::vector<std::string>> ngrams(const std::vector<std::string>& tokens,
                                             std::size_t n) {
    std::vector<std::vector<std::string>> out;
    if (tokens.size() < n) return out;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
        out.emplace_back(tokens.begin() + i, tokens.begin() + i + n);
    }
    return out;
}

}  // namespace

double rouge_n(const std::string& candidate, const std::string& reference, std::size_t n) {
    if (n == 0) throw Error("rouge_n requires n >= 1");
    auto reference_grams = ngrams(word_tokens(reference), n);
    if (reference_grams.empty()) return 0.0;
    auto candidate_grams = ngrams(word_tokens(candidate), n);
    std::map<std::vector<std::string>, std::size_t> reference_counts;
    for (const auto& gram : reference_grams) reference_counts[gram] += 1;
    std::size_t matched = 0;
    for (const auto& gram : candidate_grams) {
        auto it = reference_counts.find(gram);
        if (it != reference_counts.end() && it->second > 0) {
            ++matched;
            --it->second;  // clipped multiset intersection
        }
    }
    return static_cast<double>(matched) / static_cast<double>(reference_grams.size());
}

double rouge_l(const std::string& candidate, const std::string& reference) {
    auto cand = word_tokens(candidate);
    auto ref = word_tokens(reference);
    if (ref.empty()) return 0.0;
    // classic LCS table
    std::vector<std::vector<std::size_t>> lcs(cand.size() + 1,
                                              std::vector<std::size_t>(ref.size() + 1, 0));
    for (std::size_t i = 1; i <= cand.size(); ++i) {
        for (std::size_t j = 1; j <= ref.size(); ++j) {
            if (cand[i - 1] == ref[j - 1]) {
                lcs[i][j] = lcs[i - 1][j - 1] + 1;
            } else {
                lcs[i][j] = std::max(lcs[i - 1][j], lcs[i][j - 1]);
            }
        }
    }
    return static_cast<double>(lcs[cand.size()][ref.size()]) /
           static_cast<double>(ref.size());
}

DetectionReport run_detection(const TaskModelBackend& backend,
                              const std::vector<CorpusInstance>& corpus, std::uint64_t seed,
                              const std::string& marker) {
    std::vector<ClassifierExample> train;
    std::vector<DetectionExample> validation, test;
    std::vector<std::string> test_ids;
    std::size_t train_gaps = 0;
    for (const auto& instance : corpus) {
        DetectionExample example = to_detection_example(instance, marker);
        switch (instance.split) {
            case Split::train:
                train.push_back({example.prefix, example.suffix, example.label == Label::gap});
                if (example.label == Label::gap) ++train_gaps;
                break;
            case Split::validation: validation.push_back(std::move(example)); break;
            case Split::test:
                test_ids.push_back(instance.instance_id);
                test.push_back(std::move(example));
                break;
            case Split::unassigned:
                throw DataError("instance " + instance.instance_id + " has no split");
        }
    }
    if (train.empty() || test.empty()) {
        throw DataError("detection needs non-empty train and test splits");
    }

    auto classifier = backend.train_classifier(train);
    auto evaluate = [&](const std::vector<DetectionExample>& examples) {
        std::vector<Label> predictions, labels;
        for (const auto& example : examples) {
            predictions.push_back(classifier->predict_gap(example.prefix, example.suffix)
                                      ? Label::gap
                                      : Label::no_gap);
            labels.push_back(example.label);
        }
        return classification_metrics(predictions, labels);
    };

    DetectionReport report;
    report.test_size = test.size();
    report.test_ids = std::move(test_ids);
    for (const auto& example : test) {
        report.test_predictions.push_back(
            classifier->predict_gap(example.prefix, example.suffix) ? Label::gap : Label::no_gap);
    }
    report.model = classification_metrics(report.test_predictions, [&] {
        std::vector<Label> labels;
        for (const auto& example : test) labels.push_back(example.label);
        return labels;
    }());
    if (!validation.empty()) report.validation = evaluate(validation);

    std::vector<Label> labels;
    for (const auto& example : test) labels.push_back(example.label);

    Rng rng(hash_combine(seed, hash_bytes("detection-random-baseline")));
    std::vector<Label> random_predictions;
    for (std::size_t i = 0; i < test.size(); ++i) {
        random_predictions.push_back((rng.next_u64() & 1ULL) ? Label::gap : Label::no_gap);
    }
    report.random_baseline = classification_metrics(random_predictions, labels);

    Label majority =
        train_gaps * 2 > train.size() ? Label::gap : Label::no_gap;  // ties go negative
    std::vector<Label> majority_predictions(test.size(), majority);
    report.majority_baseline = classification_metrics(majority_predictions, labels);
    return report;
}

OverlapMetrics run_reconstruction(const TaskModelBackend& backend,
                                  const std::vector<CorpusInstance>& corpus, bool augmented,
                                  const SimilarityScoreProvider& similarity,
                                  const std::string& marker) {
    std::vector<GeneratorExample> train;
    std::vector<ReconstructionExample> test;
    std::vector<std::string> test_ids;
    for (const auto& instance : corpus) {
        if (instance.label != Label::gap) continue;  // no target text
        ReconstructionExample example = to_reconstruction_example(instance, augmented, marker);
        switch (instance.split) {
            case Split::train: train.push_back({example.masked_text, example.target}); break;
            case Split::validation: break;  // generation uses no model selection here
            case Split::test:
                test_ids.push_back(instance.instance_id);
                test.push_back(std::move(example));
                break;
            case Split::unassigned:
                throw DataError("instance " + instance.instance_id + " has no split");
        }
    }
    auto generator = backend.train_generator(train);

    OverlapMetrics metrics;
    metrics.total = test.size();
    double r1 = 0.0, r2 = 0.0, rl = 0.0, sim = 0.0;
    for (std::size_t k = 0; k < test.size(); ++k) {
        const auto& example = test[k];
        std::string generated = generator->generate(example.masked_text);
        metrics.generations.emplace_back(test_ids[k], generated);
        if (generated.empty()) continue;  // excluded from the averages
        metrics.evaluated_count += 1;
        r1 += rouge_n(generated, example.target, 1);
        r2 += rouge_n(generated, example.target, 2);
        rl += rouge_l(generated, example.target);
        sim += similarity.score(generated, example.target);
    }
    if (metrics.evaluated_count > 0) {
        double count = static_cast<double>(metrics.evaluated_count);
        metrics.rouge1 = r1 / count;
        metrics.rouge2 = r2 / count;
        metrics.rougeL = rl / count;
        metrics.similarity = sim / count;
    }
    return metrics;
}

}  // namespace enthymeme
