#include "approval/common.hpp"

#include <cmath>
#include <cstdio>

namespace approval
{

std::string_view to_string(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::AuthorIneligible: return "AuthorIneligible";
    case ErrorKind::GroupTooSmall: return "GroupTooSmall";
    case ErrorKind::EmptyText: return "EmptyText";
    case ErrorKind::InvalidComposition: return "InvalidComposition";
    case ErrorKind::InsufficientRows: return "InsufficientRows";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::NoVaryingColumns: return "NoVaryingColumns";
    case ErrorKind::SubredditSkipped: return "SubredditSkipped";
    case ErrorKind::EmptyGroup: return "EmptyGroup";
    case ErrorKind::PipelineHalt: return "PipelineHalt";
    case ErrorKind::NumericError: return "NumericError";
    case ErrorKind::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorKind::SingleClusterError: return "SingleClusterError";
    case ErrorKind::InvalidPValue: return "InvalidPValue";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::UndefinedAuc: return "UndefinedAuc";
    case ErrorKind::BaselineSkipped: return "BaselineSkipped";
    case ErrorKind::DegenerateCentroid: return "DegenerateCentroid";
    case ErrorKind::InsufficientGroup: return "InsufficientGroup";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::SchemaError: return "SchemaError";
    case ErrorKind::ProvenanceError: return "ProvenanceError";
    case ErrorKind::ValidationError: return "ValidationError";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind)
{
}

void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value)
{
    return splitmix64(seed ^ (splitmix64(value) + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis)
{
    std::uint64_t h = basis;
    for (unsigned char c : bytes)
    {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

double standard_normal(Rng& rng)
{
    // Box-Muller on raw bits keeps draws portable across standard libraries.
    double u1 = uniform01(rng);
    while (u1 <= 0.0)
        u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::string hex64(std::uint64_t value)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

std::string format_fixed(double value, int digits)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

std::string format_full(double value)
{
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

namespace
{

// Days-from-civil / civil-from-days (proleptic Gregorian).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d)
{
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d)
{
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

} // namespace

std::int64_t parse_date(std::string_view text)
{
    int y = 0;
    unsigned m = 0, d = 0;
    const std::string s(text);
    if (std::sscanf(s.c_str(), "%d-%u-%u", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31)
        fail(ErrorKind::ConfigError, "invalid date '" + s + "' (expected YYYY-MM-DD)");
    return days_from_civil(y, m, d) * seconds_per_day;
}

std::string format_date(std::int64_t utc_seconds)
{
    std::int64_t y;
    unsigned m, d;
    civil_from_days(utc_day(utc_seconds), y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02u", static_cast<long long>(y), m, d);
    return buf;
}

int utc_year_month(std::int64_t utc_seconds)
{
    std::int64_t y;
    unsigned m, d;
    civil_from_days(utc_day(utc_seconds), y, m, d);
    return static_cast<int>(y * 100 + m);
}

} // namespace approval
