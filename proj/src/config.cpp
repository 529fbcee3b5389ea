#include "approval/config.hpp"

#include "approval/common.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace approval
{

std::string trim(std::string_view text)
{
    std::size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1])))
        --e;
    return std::string(text.substr(b, e - b));
}

std::vector<std::string> split(std::string_view text, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true)
    {
        const auto pos = text.find(sep, start);
        out.push_back(trim(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

KeyValueFile KeyValueFile::parse(std::string_view text)
{
    KeyValueFile file;
    std::string section;
    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n'))
    {
        ++line_no;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line = trim(line.substr(0, hash));
        if (line.empty() || line[0] == ';')
            continue;
        if (line.front() == '[')
        {
            if (line.back() != ']')
                fail(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            fail(ErrorKind::ConfigError, "line " + std::to_string(line_no) + ": empty key");
        file.values_[section.empty() ? key : section + "." + key] = value;
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::IoError, "cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

bool KeyValueFile::has(std::string_view key) const
{
    return values_.count(std::string(key)) > 0;
}

std::string KeyValueFile::get(std::string_view key, std::string_view fallback) const
{
    auto it = values_.find(std::string(key));
    return it == values_.end() ? std::string(fallback) : it->second;
}

double KeyValueFile::get_double(std::string_view key, double fallback) const
{
    auto it = values_.find(std::string(key));
    if (it == values_.end())
        return fallback;
    try
    {
        std::size_t used = 0;
        const double v = std::stod(it->second, &used);
        if (used != it->second.size())
            throw std::invalid_argument("trailing");
        return v;
    }
    catch (const std::exception&)
    {
        fail(ErrorKind::ConfigError, "key '" + it->first + "' is not a number: '" + it->second + "'");
    }
}

long long KeyValueFile::get_int(std::string_view key, long long fallback) const
{
    auto it = values_.find(std::string(key));
    if (it == values_.end())
        return fallback;
    long long v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(ErrorKind::ConfigError, "key '" + it->first + "' is not an integer: '" + s + "'");
    return v;
}

bool KeyValueFile::get_bool(std::string_view key, bool fallback) const
{
    auto it = values_.find(std::string(key));
    if (it == values_.end())
        return fallback;
    const auto& s = it->second;
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    fail(ErrorKind::ConfigError, "key '" + it->first + "' is not a boolean: '" + s + "'");
}

std::vector<std::string> KeyValueFile::get_list(std::string_view key, const std::vector<std::string>& fallback) const
{
    auto it = values_.find(std::string(key));
    if (it == values_.end())
        return fallback;
    std::vector<std::string> out;
    for (auto& item : split(it->second, ','))
        if (!item.empty())
            out.push_back(item);
    return out;
}

std::string KeyValueFile::canonical() const
{
    std::string out;
    for (const auto& [k, v] : values_)
        out += k + "=" + v + "\n";
    return out;
}

} // namespace approval
