#pragma once

#include <cstdint>
#include <string>

namespace firesat {

/**
 * UTC instant, stored as seconds since 1970-01-01T00:00:00Z.
 * Leap seconds are not modeled; at scheduling resolution (100 s steps)
 * the distinction is irrelevant.
 */
struct UtcTime {
    double sec = 0.0;

    UtcTime() = default;
    explicit UtcTime(double s) : sec(s) {}

    UtcTime operator+(double ds) const { return UtcTime{sec + ds}; }
    UtcTime operator-(double ds) const { return UtcTime{sec - ds}; }
    double operator-(UtcTime other) const { return sec - other.sec; }

    bool operator==(const UtcTime&) const = default;
    auto operator<=>(const UtcTime&) const = default;
};

// Parses "YYYY-MM-DDThh:mm:ssZ" (fractional seconds allowed, 'T' or space).
UtcTime parse_utc(const std::string& iso);

std::string format_utc(UtcTime t);

// Julian date of a UTC instant.
double julian_date(UtcTime t);

// J2000 reference epoch (2000-01-01T12:00:00Z).
inline constexpr double kJ2000UnixSec = 946728000.0;

} // namespace firesat
