#include "approval/text.hpp"

#include "approval/common.hpp"

namespace approval::text
{

namespace
{

bool is_word_byte(unsigned char c)
{
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
}

bool is_space(unsigned char c)
{
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_terminator(char c)
{
    return c == '.' || c == '!' || c == '?';
}

bool is_vowel(char c)
{
    return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}

} // namespace

std::vector<std::string> tokenize(std::string_view text)
{
    std::vector<std::string> tokens;
    std::string current;
    for (std::size_t i = 0; i < text.size(); ++i)
    {
        const auto c = static_cast<unsigned char>(text[i]);
        if (is_word_byte(c))
        {
            current.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : static_cast<char>(c));
        }
        else if (c == '\'' && !current.empty() && i + 1 < text.size() &&
                 is_word_byte(static_cast<unsigned char>(text[i + 1])))
        {
            current.push_back('\'');
        }
        else if (!current.empty())
        {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty())
        tokens.push_back(std::move(current));
    return tokens;
}

std::vector<Sentence> split_sentences(std::string_view text)
{
    std::vector<Sentence> out;
    std::size_t start = 0;
    std::size_t i = 0;
    auto emit = [&](std::size_t end, bool question) {
        std::size_t b = start;
        while (b < end && is_space(static_cast<unsigned char>(text[b])))
            ++b;
        if (b < end && !tokenize(text.substr(b, end - b)).empty())
            out.push_back({std::string(text.substr(b, end - b)), question});
        start = end;
    };
    while (i < text.size())
    {
        if (!is_terminator(text[i]))
        {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool question = false;
        while (j < text.size() && is_terminator(text[j]))
            question |= text[j++] == '?';
        if (j == text.size() || is_space(static_cast<unsigned char>(text[j])))
            emit(j, question);
        i = j;
    }
    if (start < text.size())
        emit(text.size(), false);
    return out;
}

int count_syllables(std::string_view word)
{
    std::string w;
    for (char c : word)
        if (c >= 'a' && c <= 'z')
            w.push_back(c);
        else if (c >= 'A' && c <= 'Z')
            w.push_back(static_cast<char>(c - 'A' + 'a'));
    if (w.empty())
        return 1;
    int groups = 0;
    bool prev = false;
    for (char c : w)
    {
        const bool v = is_vowel(c);
        if (v && !prev)
            ++groups;
        prev = v;
    }
    // silent e: "make", but not "the", "be" or "table"
    if (groups > 1 && w.size() > 2 && w.back() == 'e' && !is_vowel(w[w.size() - 2]) &&
        !(w[w.size() - 2] == 'l' && !is_vowel(w[w.size() - 3])))
        --groups;
    return groups < 1 ? 1 : groups;
}

TextCounts count_text(std::string_view text)
{
    TextCounts c;
    for (const auto& s : split_sentences(text))
    {
        ++c.sentences;
        c.questions += s.question ? 1 : 0;
    }
    for (const auto& token : tokenize(text))
    {
        ++c.words;
        c.syllables += count_syllables(token);
    }
    return c;
}

double flesch_from_counts(const TextCounts& counts)
{
    if (counts.words == 0 || counts.sentences == 0)
        fail(ErrorKind::EmptyText, "readability needs at least one word and one sentence");
    return 206.835 - 1.015 * (static_cast<double>(counts.words) / counts.sentences) -
           84.6 * (static_cast<double>(counts.syllables) / counts.words);
}

double flesch_reading_ease(std::string_view text)
{
    return flesch_from_counts(count_text(text));
}

double question_ratio(std::string_view text)
{
    const auto c = count_text(text);
    if (c.sentences == 0)
        fail(ErrorKind::EmptyText, "question ratio needs at least one sentence");
    return static_cast<double>(c.questions) / c.sentences;
}

} // namespace approval::text
