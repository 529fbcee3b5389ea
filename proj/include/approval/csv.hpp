#ifndef APPROVAL_CSV_HPP
#define APPROVAL_CSV_HPP

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace approval::csv
{

/// A parsed CSV file: header plus string cells. Lines starting with '#'
/// before the header are treated as comments and kept in `comments`.
struct Table
{
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::optional<std::size_t> column(std::string_view name) const;
    std::size_t require_column(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

std::string escape(std::string_view cell);

class Writer
{
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void comment(std::string_view text);
    void row(const std::vector<std::string>& cells);

private:
    std::ostream& out_;
};

} // namespace approval::csv

#endif // APPROVAL_CSV_HPP
