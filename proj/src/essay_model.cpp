#include "enthymeme/essay_model.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "enthymeme/errors.hpp"
#include "enthymeme/util.hpp"

namespace enthymeme {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_closer(char c) {
    return c == '"' || c == '\'' || c == ')' || c == ']';
}

// Deliberately short: single capital letters must stay sentence-final so that
// e.g. "A." parses as a sentence, and "no"/"yes" must not be swallowed.
const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> set = {
        "mr", "mrs", "ms", "dr", "prof", "sr", "jr", "st", "vs", "etc",
        "e.g", "i.e", "cf", "al", "fig", "vol", "ca", "approx", "dept", "univ",
    };
    return set;
}

// Word immediately before position `dot` (maximal run of letters and internal
// periods), lowercased. Empty when the period does not follow a word.
std::string word_before(std::string_view text, std::size_t dot) {
    std::size_t end = dot;
    std::size_t begin = end;
    while (begin > 0) {
        char c = text[begin - 1];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '.') {
            --begin;
        } else {
            break;
        }
    }
    while (begin < end && text[begin] == '.') ++begin;
    return lowercase(text.substr(begin, end - begin));
}

std::vector<Token> tokenize_span(std::string_view text, std::size_t begin, std::size_t end) {
    std::vector<Token> tokens;
    std::size_t i = begin;
    while (i < end) {
        char c = text[i];
        if (is_space(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (is_word_char(c)) {
            while (i < end && is_word_char(text[i])) ++i;
        } else {
            ++i;  // punctuation: one char per token
        }
        Token token;
        token.text = std::string(text.substr(start, i - start));
        token.index = tokens.size();
        token.span = {start, i};
        tokens.push_back(std::move(token));
    }
    return tokens;
}

Sentence make_sentence(std::string_view text, std::size_t begin, std::size_t end, std::size_t index) {
    Sentence sentence;
    sentence.tokens = tokenize_span(text, begin, end);
    sentence.index = index;
    std::size_t first = sentence.tokens.front().span.begin;
    std::size_t last = sentence.tokens.back().span.end;
    sentence.span = {first, last};
    sentence.text = std::string(text.substr(first, last - first));
    return sentence;
}

}  // namespace

std::vector<Sentence> segment_sentences(std::string_view text) {
    std::vector<Sentence> sentences;
    std::size_t start = 0;
    while (start < text.size() && is_space(text[start])) ++start;
    if (start >= text.size()) return sentences;

    std::size_t i = start;
    while (i < text.size()) {
        char c = text[i];
        if (!is_terminal(c)) {
            ++i;
            continue;
        }
        std::size_t run_begin = i;
        std::size_t end = i;
        while (end + 1 < text.size() && is_terminal(text[end + 1])) ++end;
        bool plain_period = (end == run_begin) && (c == '.');
        while (end + 1 < text.size() && is_closer(text[end + 1])) ++end;

        bool at_eot = end + 1 >= text.size();
        bool followed_by_space = !at_eot && is_space(text[end + 1]);
        bool boundary = at_eot || followed_by_space;
        if (boundary && plain_period && abbreviations().count(word_before(text, run_begin)) > 0) {
            boundary = false;
        }
        if (!boundary) {
            i = run_begin + 1;
            continue;
        }
        sentences.push_back(make_sentence(text, start, end + 1, sentences.size()));
        i = end + 1;
        while (i < text.size() && is_space(text[i])) ++i;
        start = i;
    }
    if (start < text.size()) {
        sentences.push_back(make_sentence(text, start, text.size(), sentences.size()));
    }
    return sentences;
}

Essay parse_essay(std::string_view raw, std::string id, std::string title) {
    Essay essay;
    essay.id = std::move(id);
    essay.title = std::move(title);
    essay.raw_text = std::string(raw);

    // Paragraph blocks: maximal runs of non-blank lines.
    std::size_t pos = 0;
    std::size_t block_begin = std::string::npos;
    std::size_t block_end = 0;
    auto flush_block = [&]() {
        if (block_begin == std::string::npos) return;
        std::string_view view(essay.raw_text);
        auto parsed = segment_sentences(view.substr(block_begin, block_end - block_begin));
        if (!parsed.empty()) {
            Paragraph paragraph;
            paragraph.index = essay.paragraphs.size();
            for (auto& sentence : parsed) {
                sentence.span.begin += block_begin;
                sentence.span.end += block_begin;
                for (auto& token : sentence.tokens) {
                    token.span.begin += block_begin;
                    token.span.end += block_begin;
                }
                paragraph.sentences.push_back(std::move(sentence));
            }
            paragraph.span = {paragraph.sentences.front().span.begin,
                              paragraph.sentences.back().span.end};
            essay.paragraphs.push_back(std::move(paragraph));
        }
        block_begin = std::string::npos;
    };

    while (pos <= raw.size()) {
        std::size_t line_end = raw.find('\n', pos);
        if (line_end == std::string_view::npos) line_end = raw.size();
        std::string_view line = raw.substr(pos, line_end - pos);
        bool blank = std::all_of(line.begin(), line.end(), is_space);
        if (blank) {
            flush_block();
        } else {
            if (block_begin == std::string::npos) block_begin = pos;
            block_end = line_end;
        }
        if (line_end >= raw.size()) break;
        pos = line_end + 1;
    }
    flush_block();

    if (essay.paragraphs.empty()) {
        throw EmptyEssayError("essay '" + essay.id + "' contains no content");
    }
    return essay;
}

std::vector<SentenceLocation> all_sentences(const Essay& essay) {
    std::vector<SentenceLocation> out;
    out.reserve(essay.sentence_count());
    for (const auto& paragraph : essay.paragraphs) {
        for (const auto& sentence : paragraph.sentences) {
            out.push_back({paragraph.index, sentence.index, &sentence});
        }
    }
    return out;
}

std::string paragraph_text(const Essay& essay, const Paragraph& paragraph) {
    return essay.raw_text.substr(paragraph.span.begin, paragraph.span.end - paragraph.span.begin);
}

std::string essay_text(const Essay& essay) {
    std::string out;
    for (std::size_t i = 0; i < essay.paragraphs.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += paragraph_text(essay, essay.paragraphs[i]);
    }
    return out;
}

std::size_t Paragraph::token_count() const {
    std::size_t count = 0;
    for (const auto& sentence : sentences) count += sentence.token_count();
    return count;
}

std::size_t Essay::sentence_count() const {
    std::size_t count = 0;
    for (const auto& paragraph : paragraphs) count += paragraph.sentences.size();
    return count;
}

std::size_t Essay::token_count() const {
    std::size_t count = 0;
    for (const auto& paragraph : paragraphs) count += paragraph.token_count();
    return count;
}

const Sentence& Essay::sentence_at(std::size_t paragraph_index, std::size_t sentence_index) const {
    return paragraphs.at(paragraph_index).sentences.at(sentence_index);
}

}  // namespace enthymeme
