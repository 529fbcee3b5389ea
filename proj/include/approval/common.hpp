#ifndef APPROVAL_COMMON_HPP
#define APPROVAL_COMMON_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace approval
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

/// Every failure the engine reports carries one of these kinds so callers
/// (and the CLI exit-code mapping) can branch without string matching.
enum class ErrorKind
{
    AuthorIneligible,
    GroupTooSmall,
    EmptyText,
    InvalidComposition,
    InsufficientRows,
    ShapeError,
    NoVaryingColumns,
    SubredditSkipped,
    EmptyGroup,
    PipelineHalt,
    NumericError,
    MaxIterExceeded,
    SingleClusterError,
    InvalidPValue,
    DegenerateLabels,
    UndefinedAuc,
    BaselineSkipped,
    DegenerateCentroid,
    InsufficientGroup,
    ConfigError,
    SchemaError,
    ProvenanceError,
    ValidationError,
    IoError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

/// Deterministic 64-bit mixing used to derive independent RNG substreams.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value);
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t basis = 1469598103934665603ULL);

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0)
{
    return Rng(splitmix64(hash_combine(seed, stream)));
}

/// Uniform double in [0,1) built from raw engine bits, so draws are identical
/// across standard-library implementations.
inline double uniform01(Rng& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double standard_normal(Rng& rng);

std::string hex64(std::uint64_t value);

/// printf-style fixed formatting ("%.{digits}f").
std::string format_fixed(double value, int digits);

/// Shortest round-trip representation ("%.17g"), used for CSV cells.
std::string format_full(double value);

constexpr std::int64_t seconds_per_day = 86400;

inline std::int64_t utc_day(std::int64_t utc_seconds)
{
    return utc_seconds >= 0 ? utc_seconds / seconds_per_day
                            : -((-utc_seconds + seconds_per_day - 1) / seconds_per_day);
}

inline int utc_hour(std::int64_t utc_seconds)
{
    return static_cast<int>((utc_seconds - utc_day(utc_seconds) * seconds_per_day) / 3600);
}

/// Parses "YYYY-MM-DD" into seconds since epoch at 00:00 UTC.
std::int64_t parse_date(std::string_view text);
std::string format_date(std::int64_t utc_seconds);

/// (year, month) of a UTC timestamp, packed as year*100+month.
int utc_year_month(std::int64_t utc_seconds);

} // namespace approval

#endif // APPROVAL_COMMON_HPP
