#include "approval/csv.hpp"

#include "approval/common.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

namespace approval::csv
{

std::optional<std::size_t> Table::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return i;
    return std::nullopt;
}

std::size_t Table::require_column(std::string_view name) const
{
    auto idx = column(name);
    if (!idx)
        fail(ErrorKind::SchemaError, "missing column '" + std::string(name) + "'");
    return *idx;
}

namespace
{

// RFC 4180 record splitter over an in-memory buffer. Quoted fields may span lines.
bool next_record(std::string_view data, std::size_t& pos, std::vector<std::string>& cells)
{
    cells.clear();
    if (pos >= data.size())
        return false;
    std::string cell;
    bool quoted = false;
    bool field_started = false;
    while (pos < data.size())
    {
        const char c = data[pos++];
        if (quoted)
        {
            if (c == '"')
            {
                if (pos < data.size() && data[pos] == '"')
                {
                    cell.push_back('"');
                    ++pos;
                }
                else
                    quoted = false;
            }
            else
                cell.push_back(c);
            continue;
        }
        if (c == '"' && !field_started)
        {
            quoted = true;
            field_started = true;
        }
        else if (c == ',')
        {
            cells.push_back(std::move(cell));
            cell.clear();
            field_started = false;
        }
        else if (c == '\n' || c == '\r')
        {
            if (c == '\r' && pos < data.size() && data[pos] == '\n')
                ++pos;
            cells.push_back(std::move(cell));
            return true;
        }
        else
        {
            cell.push_back(c);
            field_started = true;
        }
    }
    if (quoted)
        fail(ErrorKind::SchemaError, "unterminated quoted CSV field");
    cells.push_back(std::move(cell));
    return true;
}

} // namespace

Table read(std::istream& in)
{
    const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Table table;
    std::size_t pos = 0;
    if (data.size() >= 3 && static_cast<unsigned char>(data[0]) == 0xEF)
        pos = 3; // UTF-8 BOM
    std::vector<std::string> cells;
    bool have_header = false;
    while (true)
    {
        if (!have_header && pos < data.size() && data[pos] == '#')
        {
            const auto eol = data.find('\n', pos);
            std::string line = data.substr(pos + 1, eol == std::string::npos ? std::string::npos : eol - pos - 1);
            if (!line.empty() && line.back() == '\r')
                line.pop_back();
            while (!line.empty() && line.front() == ' ')
                line.erase(line.begin());
            table.comments.push_back(std::move(line));
            pos = eol == std::string::npos ? data.size() : eol + 1;
            continue;
        }
        if (!next_record(data, pos, cells))
            break;
        if (cells.size() == 1 && cells[0].empty())
            continue; // blank line
        if (!have_header)
        {
            table.header = cells;
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size())
            fail(ErrorKind::SchemaError, "CSV row " + std::to_string(table.rows.size() + 1) + " has " +
                                             std::to_string(cells.size()) + " cells, header has " +
                                             std::to_string(table.header.size()));
        table.rows.push_back(cells);
    }
    if (!have_header)
        fail(ErrorKind::SchemaError, "CSV has no header row");
    return table;
}

Table read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::IoError, "cannot open '" + path + "'");
    return read(in);
}

std::string escape(std::string_view cell)
{
    if (cell.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(cell);
    std::string out = "\"";
    for (char c : cell)
    {
        if (c == '"')
            out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void Writer::comment(std::string_view text)
{
    out_ << "# " << text << '\n';
}

void Writer::row(const std::vector<std::string>& cells)
{
    for (std::size_t i = 0; i < cells.size(); ++i)
    {
        if (i)
            out_ << ',';
        out_ << escape(cells[i]);
    }
    out_ << '\n';
}

} // namespace approval::csv
