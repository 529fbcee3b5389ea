#ifndef APPROVAL_LEXICON_HPP
#define APPROVAL_LEXICON_HPP

#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace approval::lexicon
{

/// Category word lists plus the umbrella -> children hierarchy.
/// Patterns are lowercase; a trailing '*' marks a stem (prefix match).
class LexiconHierarchy
{
public:
    /// Format, one entry per line, '#' comments allowed:
    ///   category<TAB>pattern,pattern,...
    ///   umbrella:name<TAB>child,child,...
    static LexiconHierarchy parse(std::string_view text);
    static LexiconHierarchy load(const std::string& path);

    void add_category(const std::string& name, const std::vector<std::string>& patterns);
    void add_umbrella(const std::string& name, const std::vector<std::string>& children);
    /// Throws ConfigError when the hierarchy breaks an invariant.
    void validate() const;

    const std::vector<std::string>& categories() const { return order_; }
    const std::map<std::string, std::vector<std::string>>& umbrella_children() const { return umbrellas_; }
    const std::vector<std::string>& patterns(const std::string& category) const;

    /// Indices (into categories()) of every category the token matches.
    std::vector<int> match(const std::string& token) const;

private:
    void index_pattern(int category, const std::string& pattern);

    std::vector<std::string> order_;
    std::map<std::string, std::vector<std::string>> patterns_;
    std::map<std::string, std::vector<std::string>> umbrellas_;
    std::unordered_map<std::string, std::vector<int>> exact_;
    std::unordered_map<std::string, std::vector<int>> stems_;
    std::size_t longest_stem_ = 0;
};

/// Percentage (0..100) of tokens matching each category, in categories() order.
/// A token may count toward several categories. Empty input -> EmptyText.
std::vector<double> lexicon_percentages(const std::vector<std::string>& tokens, const LexiconHierarchy& lexicon);

std::map<std::string, double> lexicon_percentage_map(const std::vector<std::string>& tokens,
                                                     const LexiconHierarchy& lexicon);

} // namespace approval::lexicon

#endif // APPROVAL_LEXICON_HPP
