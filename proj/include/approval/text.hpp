#ifndef APPROVAL_TEXT_HPP
#define APPROVAL_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace approval::text
{

/// Lowercased word tokens. Splits on anything that is not alphanumeric;
/// an apostrophe between two word characters stays inside the token
/// ("don't"). Bytes >= 0x80 count as word characters so UTF-8 words survive.
std::vector<std::string> tokenize(std::string_view text);

struct Sentence
{
    std::string text;
    bool question = false;
};

/// Splits after runs of '.', '!' or '?' that are followed by whitespace or
/// end of text. A trailing fragment without terminator is still a sentence.
std::vector<Sentence> split_sentences(std::string_view text);

/// Vowel-group count with a silent trailing 'e' correction; never below 1.
int count_syllables(std::string_view word);

struct TextCounts
{
    int words = 0;
    int sentences = 0;
    int syllables = 0;
    int questions = 0;
};

TextCounts count_text(std::string_view text);

/// 206.835 - 1.015 * words/sentences - 84.6 * syllables/words.
double flesch_reading_ease(std::string_view text);
double flesch_from_counts(const TextCounts& counts);

/// Fraction of sentences whose terminator run contains '?'.
double question_ratio(std::string_view text);

} // namespace approval::text

#endif // APPROVAL_TEXT_HPP
