#ifndef APPROVAL_CONFIG_HPP
#define APPROVAL_CONFIG_HPP

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace approval
{

/// Declarative `key = value` file with `[section]` headers. Keys are stored
/// as "section.key"; keys before any header live in the unnamed section.
class KeyValueFile
{
public:
    static KeyValueFile parse(std::string_view text);
    static KeyValueFile load(const std::string& path);

    bool has(std::string_view key) const;
    std::string get(std::string_view key, std::string_view fallback) const;
    double get_double(std::string_view key, double fallback) const;
    long long get_int(std::string_view key, long long fallback) const;
    bool get_bool(std::string_view key, bool fallback) const;
    std::vector<std::string> get_list(std::string_view key, const std::vector<std::string>& fallback) const;

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    const std::map<std::string, std::string>& values() const { return values_; }

    /// Canonical "key=value" lines in sorted order; stable input for hashing.
    std::string canonical() const;

private:
    std::map<std::string, std::string> values_;
};

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

} // namespace approval

#endif // APPROVAL_CONFIG_HPP
