#include <memory>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "enthymeme/errors.hpp"
#include "enthymeme/pipeline.hpp"
#include "enthymeme/util.hpp"

using namespace enthymeme;

namespace {

struct ConstantModel final : RegressionModel {
    double value;
    explicit ConstantModel(double v) : value(v) {}
    std::vector<double> predict(const std::vector<std::vector<double>>& rows) const override {
        return std::vector<double>(rows.size(), value);
    }
    std::string serialize() const override { return "constant"; }
};

ScorerSet constant_scorers(double value) {
    auto make = [value](QualityDimension dimension) {
        return ScoringModel(dimension, {FeatureFamily::length_statistics}, {},
                            std::make_shared<ConstantModel>(value), std::nullopt, std::nullopt);
    };
    ScorerSet set;
    set.organization = make(QualityDimension::organization);
    set.clarity = make(QualityDimension::clarity);
    set.strength = make(QualityDimension::strength);
    return set;
}

struct AcceptAllNeighbors final : NeighborPlausibilityProvider {
    NeighborJudgment judge(const std::string&, const std::string&) const override {
        return {true, 1.0};
    }
};

struct RejectAllNeighbors final : NeighborPlausibilityProvider {
    NeighborJudgment judge(const std::string&, const std::string&) const override {
        return {false, 0.0};
    }
};

struct PairNeighbors final : NeighborPlausibilityProvider {
    std::string left, right;
    NeighborJudgment judge(const std::string& l, const std::string& r) const override {
        bool ok = l == left && r == right;
        return {ok, ok ? 1.0 : 0.0};
    }
};

struct AllPremise final : AduTypeProvider {
    AduType classify(const std::string&, const std::string&) const override {
        return AduType::premise;
    }
};

struct LabeledAdu final : AduTypeProvider {
    std::map<std::string, AduType> by_text;
    AduType classify(const std::string& sentence, const std::string&) const override {
        auto it = by_text.find(sentence);
        return it == by_text.end() ? AduType::non_argumentative : it->second;
    }
};

std::string sentences_text(std::size_t count, std::size_t words_per_sentence,
                           const std::string& tag) {
    std::vector<std::string> sentences;
    for (std::size_t s = 0; s < count; ++s) {
        std::vector<std::string> words;
        for (std::size_t w = 0; w + 1 < words_per_sentence; ++w) {
            words.push_back(tag + std::to_string(s) + "w" + std::to_string(w));
        }
        sentences.push_back(join(words, " ") + ".");
    }
    return join(sentences, " ");
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("quality filter keeps strictly above the threshold") {
    auto providers = make_test_doubles(1);
    PipelineConfig config;
    std::vector<Essay> essays = {parse_essay("A. B. C. D.", "q1", "t")};

    CHECK(filter_by_quality(essays, constant_scorers(3.01), providers, config).size() == 1);
    CHECK(filter_by_quality(essays, constant_scorers(3.00), providers, config).empty());
    CHECK(filter_by_quality(essays, constant_scorers(1.0), providers, config).empty());

    // idempotence
    auto kept = filter_by_quality(essays, constant_scorers(3.5), providers, config);
    auto again = filter_by_quality(kept, constant_scorers(3.5), providers, config);
    CHECK(again.size() == kept.size());
}

TEST_CASE("length filter bounds sentences and tokens") {
    PipelineConfig config;
    std::vector<Essay> essays = {
        parse_essay("One two three alpha. Four five six beta. Seven eight nine gamma.", "l1", "t"),
        parse_essay(sentences_text(4, 30, "ok"), "l2", "t"),
        parse_essay(sentences_text(4, 126, "big"), "l3", "t"),
    };
    REQUIRE(essays[0].paragraphs[0].sentences.size() == 3);
    REQUIRE(essays[1].paragraphs[0].token_count() == 120);
    REQUIRE(essays[2].paragraphs[0].token_count() == 504);

    auto arguments = filter_by_length(essays, config);
    REQUIRE(arguments.size() == 1);
    CHECK(arguments[0].essay_id == "l2");
    CHECK(arguments[0].topic == "t");

    // exactly 500 tokens is still allowed
    Essay at_limit = parse_essay(sentences_text(4, 125, "lim"), "l4", "t");
    REQUIRE(at_limit.paragraphs[0].token_count() == 500);
    CHECK(filter_by_length({at_limit}, config).size() == 1);
}

TEST_CASE("naturalness filter consults flanking contexts") {
    PipelineConfig config;
    Essay essay = parse_essay("A one. B two.\n\nC three. D four. E five. F six.", "n1", "Topic");
    auto arguments = filter_by_length({essay}, config);
    REQUIRE(arguments.size() == 1);
    const auto& argument = arguments[0];
    REQUIRE(argument.paragraph_index == 1);

    AcceptAllNeighbors accept;
    CHECK(filter_by_naturalness(essay, argument, accept) ==
          std::set<std::size_t>{0, 1, 2, 3});

    RejectAllNeighbors reject;
    CHECK(filter_by_naturalness(essay, argument, reject).empty());

    // first sentence: left context crosses the paragraph boundary
    PairNeighbors first;
    first.left = "B two.";
    first.right = "D four.";
    CHECK(filter_by_naturalness(essay, argument, first) == std::set<std::size_t>{0});

    // last sentence: no following paragraph, so the title is the right context
    PairNeighbors last;
    last.left = "E five.";
    last.right = "Topic";
    CHECK(filter_by_naturalness(essay, argument, last) == std::set<std::size_t>{3});

    // seeded double agrees with direct oracle calls on every middle sentence
    auto providers = make_test_doubles(23);
    auto passing = filter_by_naturalness(essay, argument, *providers.neighbors);
    for (std::size_t i = 1; i + 1 < argument.sentences.size(); ++i) {
        bool expected = providers.neighbors
                            ->judge(argument.sentences[i - 1].text, argument.sentences[i + 1].text)
                            .plausible;
        CHECK(passing.count(i) == static_cast<std::size_t>(expected));
    }
}

TEST_CASE("argumentativeness filter checks type and token count") {
    PipelineConfig config;
    Essay essay = parse_essay(
        "We ban it all now. Should we ban it now? This has lots of words in it. Filler words "
        "sit here too.",
        "a1", "t");
    auto arguments = filter_by_length({essay}, config);
    REQUIRE(arguments.size() == 1);
    const auto& argument = arguments[0];
    REQUIRE(argument.sentences[0].token_count() == 6);

    LabeledAdu adu;
    adu.by_text = {{"We ban it all now.", AduType::premise},
                   {"Should we ban it now?", AduType::claim},
                   {"This has lots of words in it.", AduType::non_argumentative},
                   {"Filler words sit here too.", AduType::premise}};

    auto candidates = filter_by_argumentativeness(essay, argument, adu, config, nullptr);
    REQUIRE(candidates.size() == 3);  // non-argumentative sentence excluded
    CHECK(candidates[0].adu_type == AduType::premise);
    CHECK(candidates[1].adu_type == AduType::claim);
    CHECK(candidates[1].sentence_index == 1);

    // a premise with exactly five tokens is excluded (strict >)
    Essay short_essay = parse_essay(
        "We ban it now. Should we ban it now? This has lots of words in it. Filler words sit "
        "here too.",
        "a2", "t");
    auto short_args = filter_by_length({short_essay}, config);
    REQUIRE(short_args[0].sentences[0].token_count() == 5);
    AllPremise premise;
    auto short_candidates =
        filter_by_argumentativeness(short_essay, short_args[0], premise, config, nullptr);
    for (const auto& candidate : short_candidates) CHECK(candidate.sentence_index != 0);

    // intersection with naturalness survivors
    std::set<std::size_t> survivors = {1};
    auto restricted = filter_by_argumentativeness(essay, argument, adu, config, &survivors);
    REQUIRE(restricted.size() == 1);
    CHECK(restricted[0].sentence_index == 1);
    CHECK(restricted[0].adu_type == AduType::claim);
}

TEST_CASE("run_pipeline applies stages in order with a monotone trace") {
    auto providers = make_test_doubles(7);
    // accept-all doubles: force naturalness and argumentativeness through
    providers.neighbors = std::make_shared<AcceptAllNeighbors>();
    providers.adu_types = std::make_shared<AllPremise>();
    PipelineConfig config;

    std::vector<Essay> essays;
    Rng rng(31);
    for (int i = 0; i < 12; ++i) {
        std::size_t paragraphs = 1 + rng.next_index(3);
        std::vector<std::string> blocks;
        for (std::size_t p = 0; p < paragraphs; ++p) {
            blocks.push_back(sentences_text(2 + rng.next_index(5), 4 + rng.next_index(6),
                                            "e" + std::to_string(i) + "p" + std::to_string(p)));
        }
        essays.push_back(parse_essay(join(blocks, "\n\n"), "e" + std::to_string(i), "topic"));
    }

    ScorerSet scorers = constant_scorers(4.0);
    auto result = run_pipeline(essays, providers, &scorers, config);

    REQUIRE(result.trace.rows.size() == 5);
    for (std::size_t r = 1; r < result.trace.rows.size(); ++r) {
        CHECK(result.trace.rows[r].essays <= result.trace.rows[r - 1].essays);
        CHECK(result.trace.rows[r].arguments <= result.trace.rows[r - 1].arguments);
        CHECK(result.trace.rows[r].candidates <= result.trace.rows[r - 1].candidates);
    }

    // independent predicate: every >5-token sentence of every qualifying
    // paragraph must be a candidate, and nothing else
    std::set<std::string> expected;
    for (const auto& essay : essays) {
        for (const auto& paragraph : essay.paragraphs) {
            if (paragraph.sentences.size() < 4 || paragraph.token_count() > 500) continue;
            for (const auto& sentence : paragraph.sentences) {
                if (sentence.token_count() > 5) {
                    expected.insert(essay.id + "/" + std::to_string(paragraph.index) + "/" +
                                    std::to_string(sentence.index));
                }
            }
        }
    }
    std::set<std::string> actual;
    for (const auto& entry : result.arguments) {
        for (const auto& candidate : entry.candidates) {
            actual.insert(candidate.essay_id + "/" + std::to_string(candidate.paragraph_index) +
                          "/" + std::to_string(candidate.sentence_index));
        }
    }
    CHECK(actual == expected);

    // arguments with empty candidate sets stay in the mapping
    CHECK(result.arguments.size() == result.trace.rows[2].arguments);

    // trace exports as a tab-separated report
    auto tsv = result.trace.to_tsv();
    CHECK(tsv.find("stage\tessays\targuments\tcandidates") == 0);
    CHECK(tsv.find("argumentativeness") != std::string::npos);

    // without scorers the quality stage passes everything through
    auto unscored = run_pipeline(essays, providers, nullptr, config);
    CHECK(unscored.trace.rows[1].essays == unscored.trace.rows[0].essays);
}

}  // TEST_SUITE
