#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace enthymeme {

// Character span [begin, end) into the text a structure was parsed from.
struct CharSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

struct Token {
    std::string text;
    std::size_t index = 0;  // 0-based within sentence
    CharSpan span;
};

struct Sentence {
    std::string text;
    std::size_t index = 0;  // 0-based within paragraph
    std::vector<Token> tokens;
    CharSpan span;

    std::size_t token_count() const { return tokens.size(); }
};

struct Paragraph {
    std::size_t index = 0;  // 0-based within essay
    std::vector<Sentence> sentences;
    CharSpan span;

    std::size_t token_count() const;
};

struct Essay {
    std::string id;
    std::string title;  // the prompt/topic
    std::vector<Paragraph> paragraphs;
    std::string raw_text;

    std::size_t sentence_count() const;
    std::size_t token_count() const;
    const Sentence& sentence_at(std::size_t paragraph_index, std::size_t sentence_index) const;
};

struct SentenceLocation {
    std::size_t paragraph_index;
    std::size_t sentence_index;
    const Sentence* sentence;
};

// Splits text into sentences. Rule-based: terminal punctuation closes a
// sentence unless the preceding word is a known abbreviation or the
// punctuation is not followed by whitespace (decimals, e.g. "3.5").
// Token spans are relative to `text`. Whitespace-only input yields no
// sentences; a trailing fragment without terminal punctuation is a sentence.
std::vector<Sentence> segment_sentences(std::string_view text);

// Parses a raw essay (paragraphs separated by blank lines) into the
// hierarchical model. Token and sentence spans index into the returned
// Essay's raw_text. Throws EmptyEssayError when raw holds no content.
Essay parse_essay(std::string_view raw, std::string id, std::string title);

// All sentences in document order; size equals Essay::sentence_count().
std::vector<SentenceLocation> all_sentences(const Essay& essay);

// The source slice covering a paragraph's sentences (no leading/trailing
// whitespace, internal line breaks preserved).
std::string paragraph_text(const Essay& essay, const Paragraph& paragraph);

// Re-serializes the essay: paragraph slices joined by blank lines. Equals the
// parse input modulo whitespace at paragraph edges.
std::string essay_text(const Essay& essay);

}  // namespace enthymeme
