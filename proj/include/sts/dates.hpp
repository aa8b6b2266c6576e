#pragma once

#include <cstdio>
#include <string>

#include "sts/errors.hpp"

namespace sts {

// Calendar date handled as days since 1970-01-01 (proleptic Gregorian).
// Conversions follow the classic civil-from-days / days-from-civil algorithm.
struct Date {
    long long days_since_epoch = 0;

    friend bool operator==(const Date& a, const Date& b) { return a.days_since_epoch == b.days_since_epoch; }
    friend bool operator<(const Date& a, const Date& b) { return a.days_since_epoch < b.days_since_epoch; }
    Date plus_days(long long d) const { return Date{days_since_epoch + d}; }
};

inline long long days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const long long era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<long long>(doe) - 719468;
}

inline void civil_from_days(long long z, int& y, int& m, int& d) {
    z += 719468;
    const long long era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const long long yy = static_cast<long long>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

inline Date parse_date(const std::string& iso) {
    int y = 0, m = 0, d = 0;
    if (std::sscanf(iso.c_str(), "%d-%d-%d", &y, &m, &d) != 3 || m < 1 || m > 12 || d < 1 || d > 31) {
        throw FormatError("invalid ISO-8601 date '" + iso + "'");
    }
    return Date{days_from_civil(y, m, d)};
}

inline std::string format_date(Date date) {
    int y, m, d;
    civil_from_days(date.days_since_epoch, y, m, d);
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", y, m, d);
    return std::string(buf);
}

constexpr double kSecondsPerWeek = 7.0 * 86400.0;

}  // namespace sts
