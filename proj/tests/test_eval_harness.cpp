#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "enthymeme/errors.hpp"
#include "enthymeme/eval_harness.hpp"
#include "enthymeme/util.hpp"

using namespace enthymeme;

namespace {

CorpusInstance instance_with(const std::string& id, Label label, const std::string& text,
                             Split split, const std::string& target = "",
                             const std::string& topic = "T") {
    CorpusInstance instance;
    instance.instance_id = id;
    instance.essay_id = id;
    instance.paragraph_index = 0;
    instance.text_with_marker = text;
    instance.label = label;
    instance.gap_boundary = 1;
    if (label == Label::gap) {
        instance.enthymeme_text = target;
        instance.adu_type = AduType::claim;
    }
    instance.topic = topic;
    instance.split = split;
    return instance;
}

// Brute-force ROUGE-N oracle: n-grams joined into strings, sorted, multiset
// intersection by merge walk.
double rouge_n_oracle(const std::string& candidate, const std::string& reference, std::size_t n) {
    auto grams = [n](const std::string& text) {
        auto tokens = word_tokens(text);
        std::vector<std::string> out;
        if (tokens.size() < n) return out;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::string key;
            for (std::size_t k = 0; k < n; ++k) key += tokens[i + k] + '\x1f';
            out.push_back(key);
        }
        return out;
    };
    auto ref = grams(reference);
    if (ref.empty()) return 0.0;
    auto cand = grams(candidate);
    std::sort(ref.begin(), ref.end());
    std::sort(cand.begin(), cand.end());
    std::size_t matched = 0, i = 0, j = 0;
    while (i < cand.size() && j < ref.size()) {
        if (cand[i] == ref[j]) {
            ++matched;
            ++i;
            ++j;
        } else if (cand[i] < ref[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return static_cast<double>(matched) / static_cast<double>(ref.size());
}

// Recursive memoized LCS, independent of the library's table-based version.
std::size_t lcs_recursive(const std::vector<std::string>& a, const std::vector<std::string>& b,
                          std::size_t i, std::size_t j, std::map<std::size_t, std::size_t>& memo) {
    if (i == a.size() || j == b.size()) return 0;
    std::size_t key = i * (b.size() + 1) + j;
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    std::size_t value;
    if (a[i] == b[j]) {
        value = 1 + lcs_recursive(a, b, i + 1, j + 1, memo);
    } else {
        value = std::max(lcs_recursive(a, b, i + 1, j, memo),
                         lcs_recursive(a, b, i, j + 1, memo));
    }
    memo[key] = value;
    return value;
}

double rouge_l_oracle(const std::string& candidate, const std::string& reference) {
    auto cand = word_tokens(candidate);
    auto ref = word_tokens(reference);
    if (ref.empty()) return 0.0;
    std::map<std::size_t, std::size_t> memo;
    return static_cast<double>(lcs_recursive(cand, ref, 0, 0, memo)) /
           static_cast<double>(ref.size());
}

std::string random_text(Rng& rng) {
    static const std::vector<std::string> vocabulary = {"the", "cat", "sat", "on",  "mat",
                                                        "dog", "ran", "far", "big", "sun"};
    std::size_t length = 1 + rng.next_index(12);
    std::string out;
    for (std::size_t i = 0; i < length; ++i) {
        if (i > 0) out += ' ';
        out += vocabulary[rng.next_index(vocabulary.size())];
    }
    return out;
}

// Perfect-model stand-in: answers memorized per masked input.
struct EchoBackend final : TaskModelBackend {
    std::map<std::string, std::string> answers;
    struct Gen final : FittedGenerator {
        std::map<std::string, std::string> answers;
        std::string generate(const std::string& masked_input) const override {
            auto it = answers.find(masked_input);
            return it == answers.end() ? "" : it->second;
        }
    };
    struct Cls final : FittedClassifier {
        bool predict_gap(const std::string&, const std::string&) const override { return false; }
    };
    std::unique_ptr<FittedClassifier> train_classifier(
        const std::vector<ClassifierExample>&) const override {
        return std::make_unique<Cls>();
    }
    std::unique_ptr<FittedGenerator> train_generator(
        const std::vector<GeneratorExample>&) const override {
        auto gen = std::make_unique<Gen>();
        gen->answers = answers;
        return gen;
    }
};

struct SilentBackend final : TaskModelBackend {
    struct Gen final : FittedGenerator {
        std::string generate(const std::string&) const override { return ""; }
    };
    struct Cls final : FittedClassifier {
        bool predict_gap(const std::string&, const std::string&) const override { return false; }
    };
    std::unique_ptr<FittedClassifier> train_classifier(
        const std::vector<ClassifierExample>&) const override {
        return std::make_unique<Cls>();
    }
    std::unique_ptr<FittedGenerator> train_generator(
        const std::vector<GeneratorExample>&) const override {
        return std::make_unique<Gen>();
    }
};

}  // namespace

TEST_SUITE("eval_harness") {

TEST_CASE("detection examples split at the marker losslessly") {
    auto instance = instance_with("d1", Label::gap, "A. [GAP] B.", Split::test, "X.");
    auto example = to_detection_example(instance);
    CHECK(example.prefix == "A. ");
    CHECK(example.suffix == " B.");
    CHECK(example.label == Label::gap);
    CHECK(example.prefix + "[GAP]" + example.suffix == instance.text_with_marker);

    auto leading = instance_with("d2", Label::no_gap, "[GAP] A. B.", Split::test);
    CHECK(to_detection_example(leading).prefix.empty());

    auto doubled = instance_with("d3", Label::no_gap, "A. [GAP] B. [GAP]", Split::test);
    CHECK_THROWS_AS(to_detection_example(doubled), MarkerMissingError);
    auto missing = instance_with("d4", Label::no_gap, "A. B.", Split::test);
    CHECK_THROWS_AS(to_detection_example(missing), MarkerMissingError);
}

TEST_CASE("reconstruction examples require gaps and honor augmentation") {
    auto negative = instance_with("r1", Label::no_gap, "A. [GAP] B.", Split::test);
    CHECK_THROWS_AS(to_reconstruction_example(negative, false), NotAGapInstanceError);

    auto positive = instance_with("r2", Label::gap, "A. [GAP] B.", Split::test, "Missing one.",
                                  "banning smoking in restaurants");
    auto plain = to_reconstruction_example(positive, false);
    auto augmented = to_reconstruction_example(positive, true);
    CHECK(plain.masked_text == "A. [GAP] B.");
    CHECK(plain.target == "Missing one.");
    CHECK(augmented.masked_text.find("banning smoking in restaurants") != std::string::npos);
    // plain and augmented differ only in the prepended header
    CHECK(augmented.masked_text.substr(augmented.masked_text.size() -
                                       plain.masked_text.size()) == plain.masked_text);
    CHECK(augmented.masked_text ==
          "topic: banning smoking in restaurants ; type: claim ; A. [GAP] B.");
}

TEST_CASE("classification metrics definitions") {
    std::vector<Label> perfect = {Label::gap, Label::no_gap, Label::gap};
    auto all_right = classification_metrics(perfect, perfect);
    CHECK(all_right.accuracy == doctest::Approx(1.0));
    CHECK(all_right.precision == doctest::Approx(1.0));
    CHECK(all_right.recall == doctest::Approx(1.0));
    CHECK(all_right.f1 == doctest::Approx(1.0));

    // all-negative predictions on a 53%-negative set
    std::vector<Label> labels;
    for (int i = 0; i < 53; ++i) labels.push_back(Label::no_gap);
    for (int i = 0; i < 47; ++i) labels.push_back(Label::gap);
    std::vector<Label> negatives(labels.size(), Label::no_gap);
    auto majority = classification_metrics(negatives, labels);
    CHECK(majority.accuracy == doctest::Approx(0.53));
    CHECK(majority.precision == doctest::Approx(0.0));
    CHECK(majority.recall == doctest::Approx(0.0));
    CHECK(majority.f1 == doctest::Approx(0.0));

    // confusion matrix by hand: TP=1, FP=1, FN=0, TN=1
    std::vector<Label> predictions = {Label::gap, Label::gap, Label::no_gap};
    std::vector<Label> truth = {Label::gap, Label::no_gap, Label::no_gap};
    auto metrics = classification_metrics(predictions, truth);
    CHECK(metrics.accuracy == doctest::Approx(2.0 / 3.0));
    CHECK(metrics.precision == doctest::Approx(0.5));
    CHECK(metrics.recall == doctest::Approx(1.0));
    CHECK(metrics.f1 == doctest::Approx(2.0 / 3.0));

    CHECK_THROWS_AS(classification_metrics({Label::gap}, {}), LengthMismatchError);
}

TEST_CASE("rouge scores") {
    CHECK(rouge_n("the cat sat", "the cat sat", 1) == doctest::Approx(1.0));
    CHECK(rouge_n("the cat sat", "the cat sat", 2) == doctest::Approx(1.0));
    CHECK(rouge_l("the cat sat", "the cat sat") == doctest::Approx(1.0));

    CHECK(rouge_n("the cat", "the cat sat", 1) == doctest::Approx(2.0 / 3.0));
    CHECK(rouge_n("alpha beta", "gamma delta", 1) == doctest::Approx(0.0));
    CHECK(rouge_l("alpha beta", "gamma delta") == doctest::Approx(0.0));

    // punctuation-stripped, lowercased tokenization
    CHECK(rouge_n("The Cat.", "the cat", 1) == doctest::Approx(1.0));

    // clipping: candidate repetitions cannot exceed reference counts
    CHECK(rouge_n("the the the the", "the cat", 1) == doctest::Approx(0.5));

    // empty reference has no n-grams
    CHECK(rouge_n("anything", "", 1) == doctest::Approx(0.0));
    CHECK(rouge_l("anything", "") == doctest::Approx(0.0));
}

TEST_CASE("rouge agrees with brute-force oracles on random pairs") {
    Rng rng(123);
    for (int trial = 0; trial < 50; ++trial) {
        std::string candidate = random_text(rng);
        std::string reference = random_text(rng);
        for (std::size_t n = 1; n <= 3; ++n) {
            CHECK(rouge_n(candidate, reference, n) ==
                  doctest::Approx(rouge_n_oracle(candidate, reference, n)));
        }
        CHECK(rouge_l(candidate, reference) ==
              doctest::Approx(rouge_l_oracle(candidate, reference)));
        CHECK(rouge_n(candidate, candidate, 1) == doctest::Approx(1.0));
    }
}

TEST_CASE("detection run trains, reports, and includes both baselines") {
    auto providers = make_test_doubles(77);
    std::vector<CorpusInstance> corpus;
    // planted lexical signal: gap instances contain "indeed" before the marker
    for (int i = 0; i < 400; ++i) {
        Split split = i % 10 < 7 ? Split::train : (i % 10 == 7 ? Split::validation : Split::test);
        std::string tail = "tail word " + std::to_string(i % 13) + ".";
        if (i % 2 == 0) {
            corpus.push_back(instance_with("g" + std::to_string(i), Label::gap,
                                           "Left part indeed here. [GAP] Right part " + tail,
                                           split, "Gap sentence."));
        } else {
            corpus.push_back(instance_with("n" + std::to_string(i), Label::no_gap,
                                           "Left part here. [GAP] Right part " + tail, split));
        }
    }
    auto report = run_detection(*providers.task_models, corpus, 31);
    CHECK(report.test_size == 80);
    CHECK(report.model.f1 >= 0.75);  // the double learns the planted signal
    CHECK(report.random_baseline.accuracy > 0.3);
    CHECK(report.random_baseline.accuracy < 0.7);
    // train is majority-gap here (4 of 7 per block), the test half gap
    CHECK(report.majority_baseline.accuracy == doctest::Approx(0.5));
    CHECK(report.majority_baseline.recall == doctest::Approx(1.0));

    // majority accuracy equals the test negative share (53%-negative test split)
    std::vector<CorpusInstance> skewed;
    for (int i = 0; i < 100; ++i) {
        skewed.push_back(instance_with("t" + std::to_string(i),
                                       i < 40 ? Label::gap : Label::no_gap,
                                       "Lead text. [GAP] Tail text.", Split::train,
                                       i < 40 ? "X." : ""));
    }
    for (int i = 0; i < 100; ++i) {
        skewed.push_back(instance_with("s" + std::to_string(i),
                                       i < 47 ? Label::gap : Label::no_gap,
                                       "Lead text. [GAP] Tail text.", Split::test,
                                       i < 47 ? "X." : ""));
    }
    auto skewed_report = run_detection(*providers.task_models, skewed, 31);
    CHECK(skewed_report.majority_baseline.accuracy == doctest::Approx(0.53));
    CHECK(skewed_report.majority_baseline.precision == doctest::Approx(0.0));
    CHECK(skewed_report.majority_baseline.recall == doctest::Approx(0.0));
    CHECK(skewed_report.majority_baseline.f1 == doctest::Approx(0.0));
}

TEST_CASE("reconstruction run skips empty generations") {
    std::vector<CorpusInstance> corpus;
    EchoBackend echo;
    for (int i = 0; i < 30; ++i) {
        std::string target = "Target sentence " + std::to_string(i) + ".";
        std::string text = "Begin " + std::to_string(i) + ". [GAP] End part.";
        auto instance = instance_with("p" + std::to_string(i), Label::gap, text,
                                      i < 20 ? Split::train : Split::test, target);
        corpus.push_back(instance);
        echo.answers[text] = target;
    }
    auto providers = make_test_doubles(3);
    auto metrics = run_reconstruction(echo, corpus, false, *providers.similarity);
    CHECK(metrics.total == 10);
    CHECK(metrics.evaluated_count == 10);
    REQUIRE(metrics.rouge1.has_value());
    CHECK(*metrics.rouge1 == doctest::Approx(1.0));
    CHECK(*metrics.rouge2 == doctest::Approx(1.0));
    CHECK(*metrics.rougeL == doctest::Approx(1.0));
    CHECK(*metrics.similarity == doctest::Approx(1.0));

    SilentBackend silent;
    auto empty = run_reconstruction(silent, corpus, false, *providers.similarity);
    CHECK(empty.evaluated_count == 0);
    CHECK(!empty.rouge1.has_value());
    CHECK(!empty.similarity.has_value());

    // augmented mode still evaluates: the echo keys change with the header
    EchoBackend augmented_echo;
    for (const auto& instance : corpus) {
        auto example = to_reconstruction_example(instance, true);
        augmented_echo.answers[example.masked_text] = example.target;
    }
    auto augmented = run_reconstruction(augmented_echo, corpus, true, *providers.similarity);
    CHECK(augmented.evaluated_count == 10);
    CHECK(*augmented.rouge1 == doctest::Approx(1.0));
}

}  // TEST_SUITE
