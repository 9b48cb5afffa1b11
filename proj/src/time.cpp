#include "firesat/time.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace firesat {

namespace {

// Days from civil date (proleptic Gregorian), days since 1970-01-01.
int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    int64_t era = (y >= 0 ? y : y - 399) / 400;
    int yoe = static_cast<int>(y - era * 400);
    int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
    z += 719468;
    int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    int64_t doe = z - era * 146097;
    int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    int64_t yy = yoe + era * 400;
    int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    int64_t mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

} // namespace

UtcTime parse_utc(const std::string& iso) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0;
    double s = 0.0;
    char sep = 0;
    int n = std::sscanf(iso.c_str(), "%d-%d-%d%c%d:%d:%lf", &y, &mo, &d, &sep,
                        &h, &mi, &s);
    if (n < 3 || mo < 1 || mo > 12 || d < 1 || d > 31)
        throw std::invalid_argument("parse_utc: bad timestamp '" + iso + "'");
    if (n >= 4 && sep != 'T' && sep != 't' && sep != ' ')
        throw std::invalid_argument("parse_utc: bad separator in '" + iso + "'");
    double day_sec = h * 3600.0 + mi * 60.0 + s;
    return UtcTime{static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 +
                   day_sec};
}

std::string format_utc(UtcTime t) {
    double day = std::floor(t.sec / 86400.0);
    double frac = t.sec - day * 86400.0;
    // Round to whole milliseconds so formatting is stable.
    long long ms = llround(frac * 1000.0);
    if (ms >= 86400000) { ms -= 86400000; day += 1.0; }
    int y, mo, d;
    civil_from_days(static_cast<int64_t>(day), y, mo, d);
    int h = static_cast<int>(ms / 3600000);
    int mi = static_cast<int>((ms / 60000) % 60);
    int s = static_cast<int>((ms / 1000) % 60);
    int rem = static_cast<int>(ms % 1000);
    char buf[48];
    if (rem == 0)
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, mo,
                      d, h, mi, s);
    else
        std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ",
                      y, mo, d, h, mi, s, rem);
    return buf;
}

double julian_date(UtcTime t) {
    return t.sec / 86400.0 + 2440587.5;
}

} // namespace firesat
