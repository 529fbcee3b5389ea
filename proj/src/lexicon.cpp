#include "approval/lexicon.hpp"

#include "approval/common.hpp"
#include "approval/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace approval::lexicon
{

LexiconHierarchy LexiconHierarchy::parse(std::string_view text)
{
    LexiconHierarchy lex;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n'))
    {
        ++line_no;
        if (raw.empty() || raw[0] == '#')
            continue;
        const auto tab = raw.find('\t');
        if (tab == std::string::npos)
            fail(ErrorKind::ConfigError, "lexicon line " + std::to_string(line_no) + ": expected name<TAB>patterns");
        const std::string name = trim(std::string_view(raw).substr(0, tab));
        std::vector<std::string> items;
        for (auto& item : split(std::string_view(raw).substr(tab + 1), ','))
            if (!item.empty())
                items.push_back(item);
        if (name.rfind("umbrella:", 0) == 0)
            lex.add_umbrella(trim(name.substr(9)), items);
        else
            lex.add_category(name, items);
    }
    lex.validate();
    return lex;
}

LexiconHierarchy LexiconHierarchy::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open lexicon '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

void LexiconHierarchy::index_pattern(int category, const std::string& pattern)
{
    if (!pattern.empty() && pattern.back() == '*')
    {
        const std::string stem = pattern.substr(0, pattern.size() - 1);
        stems_[stem].push_back(category);
        longest_stem_ = std::max(longest_stem_, stem.size());
    }
    else
    {
        exact_[pattern].push_back(category);
    }
}

void LexiconHierarchy::add_category(const std::string& name, const std::vector<std::string>& patterns)
{
    if (name.empty())
        fail(ErrorKind::ConfigError, "lexicon category with empty name");
    if (patterns_.count(name))
        fail(ErrorKind::ConfigError, "lexicon category '" + name + "' defined twice");
    for (const auto& p : patterns)
    {
        if (std::any_of(p.begin(), p.end(), [](char c) { return c >= 'A' && c <= 'Z'; }))
            fail(ErrorKind::ConfigError, "lexicon pattern '" + p + "' is not lowercase");
        if (p.empty() || p == "*")
            fail(ErrorKind::ConfigError, "lexicon category '" + name + "' has an empty pattern");
    }
    const int idx = static_cast<int>(order_.size());
    order_.push_back(name);
    patterns_[name] = patterns;
    std::set<std::string> unique(patterns.begin(), patterns.end());
    for (const auto& p : unique)
        index_pattern(idx, p);
}

void LexiconHierarchy::add_umbrella(const std::string& name, const std::vector<std::string>& children)
{
    if (umbrellas_.count(name))
        fail(ErrorKind::ConfigError, "umbrella '" + name + "' defined twice");
    umbrellas_[name] = children;
}

void LexiconHierarchy::validate() const
{
    std::map<std::string, std::string> parent;
    for (const auto& [umbrella, children] : umbrellas_)
    {
        if (!patterns_.count(umbrella))
            fail(ErrorKind::ConfigError, "umbrella '" + umbrella + "' is not a category");
        if (children.empty())
            fail(ErrorKind::ConfigError, "umbrella '" + umbrella + "' has no children");
        for (const auto& child : children)
        {
            if (!patterns_.count(child))
                fail(ErrorKind::ConfigError, "child '" + child + "' of umbrella '" + umbrella + "' is not a category");
            if (child == umbrella)
                fail(ErrorKind::ConfigError, "umbrella '" + umbrella + "' lists itself as a child");
            auto [it, inserted] = parent.emplace(child, umbrella);
            if (!inserted && it->second != umbrella)
                fail(ErrorKind::ConfigError,
                     "category '" + child + "' is a child of both '" + it->second + "' and '" + umbrella + "'");
        }
    }
}

const std::vector<std::string>& LexiconHierarchy::patterns(const std::string& category) const
{
    auto it = patterns_.find(category);
    if (it == patterns_.end())
        fail(ErrorKind::ConfigError, "unknown lexicon category '" + category + "'");
    return it->second;
}

std::vector<int> LexiconHierarchy::match(const std::string& token) const
{
    std::vector<int> hits;
    if (auto it = exact_.find(token); it != exact_.end())
        hits = it->second;
    const std::size_t max_len = std::min(longest_stem_, token.size());
    for (std::size_t len = 1; len <= max_len; ++len)
        if (auto it = stems_.find(token.substr(0, len)); it != stems_.end())
            hits.insert(hits.end(), it->second.begin(), it->second.end());
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    return hits;
}

std::vector<double> lexicon_percentages(const std::vector<std::string>& tokens, const LexiconHierarchy& lexicon)
{
    if (tokens.empty())
        fail(ErrorKind::EmptyText, "lexicon percentages of an empty token list");
    std::vector<double> counts(lexicon.categories().size(), 0.0);
    for (const auto& token : tokens)
        for (int c : lexicon.match(token))
            counts[static_cast<std::size_t>(c)] += 1.0;
    for (auto& v : counts)
        v = 100.0 * v / static_cast<double>(tokens.size());
    return counts;
}

std::map<std::string, double> lexicon_percentage_map(const std::vector<std::string>& tokens,
                                                     const LexiconHierarchy& lexicon)
{
    const auto values = lexicon_percentages(tokens, lexicon);
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[lexicon.categories()[i]] = values[i];
    return out;
}

} // namespace approval::lexicon
