#include "sts/trend/trend.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace sts::trend {

TrendSeries weekly_aggregate(const std::vector<kin::StSMeasurement>& measurements, kin::Direction direction,
                             Date epoch, std::optional<Date> event_date) {
    TrendSeries out;
    out.epoch = epoch;
    out.event_date = event_date;

    std::map<long long, std::vector<double>> bins;
    for (const auto& m : measurements) {
        if (m.direction != direction) continue;
        if (m.quality == kin::MeasurementQuality::Low) {
            ++out.excluded_low_quality;
            continue;
        }
        const long long week = static_cast<long long>(std::floor(m.peak_time / kSecondsPerWeek));
        bins[week].push_back(m.v_soa);
    }
    if (bins.empty()) {
        throw DegenerateInputError("weekly_aggregate: no usable measurements after filtering");
    }
    for (const auto& [week, values] : bins) {
        double sum = 0.0;
        for (double v : values) sum += v;
        const double mean = sum / static_cast<double>(values.size());
        double sem = 0.0;
        if (values.size() > 1) {
            double sq = 0.0;
            for (double v : values) sq += (v - mean) * (v - mean);
            sem = std::sqrt(sq / static_cast<double>(values.size() - 1)) /
                  std::sqrt(static_cast<double>(values.size()));
        }
        out.week_index.push_back(week);
        out.week_start.push_back(epoch.plus_days(7 * week));
        out.mean_v.push_back(mean);
        out.sem_v.push_back(sem);
        out.count.push_back(static_cast<long long>(values.size()));
    }
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit fit;
    fit.slope = sxx > 0 ? sxy / sxx : 0.0;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

namespace {

StatResult r_squared_of(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() < 3) throw DegenerateInputError("r_squared: need at least 3 weeks");
    double my = 0;
    for (double v : y) my += v;
    my /= static_cast<double>(y.size());
    double ss_tot = 0;
    for (double v : y) ss_tot += (v - my) * (v - my);
    if (ss_tot == 0.0) return {StatKind::NoVariance, 0.0};
    const LinearFit fit = linear_fit(x, y);
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
    }
    return {StatKind::Ok, 1.0 - ss_res / ss_tot};
}

}  // namespace

StatResult r_squared(const TrendSeries& trend) {
    std::vector<double> x(trend.size()), y(trend.mean_v);
    for (std::size_t i = 0; i < trend.size(); ++i) x[i] = static_cast<double>(trend.week_index[i]);
    return r_squared_of(x, y);
}

StatResult trend_correlation(const TrendSeries& a, const TrendSeries& b) {
    std::vector<double> va, vb;
    std::size_t j = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        while (j < b.size() && b.week_index[j] < a.week_index[i]) ++j;
        if (j < b.size() && b.week_index[j] == a.week_index[i]) {
            va.push_back(a.mean_v[i]);
            vb.push_back(b.mean_v[j]);
        }
    }
    if (va.size() < 3) {
        throw DegenerateInputError("trend_correlation: need at least 3 overlapping weeks, have " +
                                   std::to_string(va.size()));
    }
    const double n = static_cast<double>(va.size());
    double ma = 0, mb = 0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        ma += va[i];
        mb += vb[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0, sbb = 0, sab = 0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        saa += (va[i] - ma) * (va[i] - ma);
        sbb += (vb[i] - mb) * (vb[i] - mb);
        sab += (va[i] - ma) * (vb[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return {StatKind::NoVariance, 0.0};
    return {StatKind::Ok, sab / std::sqrt(saa * sbb)};
}

namespace {

void select_weeks(const TrendSeries& trend, long long from_week, long long to_week, std::vector<double>& x,
                  std::vector<double>& y) {
    for (std::size_t i = 0; i < trend.size(); ++i) {
        if (trend.week_index[i] >= from_week && trend.week_index[i] <= to_week) {
            x.push_back(static_cast<double>(trend.week_index[i]));
            y.push_back(trend.mean_v[i]);
        }
    }
}

}  // namespace

LinearFit fit_weeks(const TrendSeries& trend, long long from_week, long long to_week) {
    std::vector<double> x, y;
    select_weeks(trend, from_week, to_week, x, y);
    if (x.size() < 2) throw DegenerateInputError("fit_weeks: need at least 2 weeks in range");
    return linear_fit(x, y);
}

StatResult r_squared_weeks(const TrendSeries& trend, long long from_week, long long to_week) {
    std::vector<double> x, y;
    select_weeks(trend, from_week, to_week, x, y);
    return r_squared_of(x, y);
}

std::string trend_to_csv(const TrendSeries& trend) {
    std::ostringstream out;
    out << "week_start,mean_v,sem_v,count\n";
    for (std::size_t i = 0; i < trend.size(); ++i) {
        out << format_date(trend.week_start[i]) << ',' << format_double(trend.mean_v[i]) << ','
            << format_double(trend.sem_v[i]) << ',' << trend.count[i] << '\n';
    }
    return out.str();
}

TrendSeries trend_from_csv(const std::string& path, Date epoch, std::optional<Date> event_date) {
    const CsvFile csv = read_csv(path, "week_start,mean_v,sem_v,count");
    TrendSeries out;
    out.epoch = epoch;
    out.event_date = event_date;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 4) throw FormatError(ctx + ": expected 4 fields");
        const Date ws = parse_date(row[0]);
        const long long days = ws.days_since_epoch - epoch.days_since_epoch;
        if (days % 7 != 0) throw IntegrityError(ctx + ": week_start not aligned to the epoch's week grid");
        out.week_index.push_back(days / 7);
        out.week_start.push_back(ws);
        out.mean_v.push_back(parse_double(row[1], ctx));
        out.sem_v.push_back(parse_double(row[2], ctx));
        out.count.push_back(parse_int(row[3], ctx));
    }
    return out;
}

}  // namespace sts::trend
