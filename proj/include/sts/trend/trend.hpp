#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sts/dates.hpp"
#include "sts/kinematics/speed.hpp"

namespace sts::trend {

// Weekly-binned speed-of-ascent series. Bins are consecutive 7-day windows
// anchored at a caller-supplied epoch date (measurement timestamps are
// seconds since that date), so an event landing on a week boundary stays a
// bin boundary. Empty weeks are omitted, not interpolated.
struct TrendSeries {
    Date epoch;
    std::optional<Date> event_date;
    std::vector<long long> week_index;  // weeks since epoch, ascending
    std::vector<Date> week_start;
    std::vector<double> mean_v;  // m/s
    std::vector<double> sem_v;   // standard error of the mean, 0 for single-sample bins
    std::vector<long long> count;
    long long excluded_low_quality = 0;

    std::size_t size() const { return week_index.size(); }
};

TrendSeries weekly_aggregate(const std::vector<kin::StSMeasurement>& measurements,
                             kin::Direction direction, Date epoch,
                             std::optional<Date> event_date = std::nullopt);

struct LinearFit {
    double slope = 0.0;      // per week
    double intercept = 0.0;  // at week 0
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

enum class StatKind { Ok, NoVariance };

struct StatResult {
    StatKind kind = StatKind::Ok;
    double value = 0.0;
};

// R^2 of the OLS line of weekly means against week index (>= 3 weeks).
// All-identical means have no variance to explain and are reported as a
// distinct no-variance outcome rather than a number.
StatResult r_squared(const TrendSeries& trend);

// Pearson correlation of weekly means over the weeks both series share
// (>= 3 overlapping weeks required).
StatResult trend_correlation(const TrendSeries& a, const TrendSeries& b);

// OLS over a week-index subrange [from_week, to_week]; used for the
// post-event recovery slope.
LinearFit fit_weeks(const TrendSeries& trend, long long from_week, long long to_week);
StatResult r_squared_weeks(const TrendSeries& trend, long long from_week, long long to_week);

std::string trend_to_csv(const TrendSeries& trend);
TrendSeries trend_from_csv(const std::string& path, Date epoch,
                           std::optional<Date> event_date = std::nullopt);

}  // namespace sts::trend
