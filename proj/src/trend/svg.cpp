#include "sts/trend/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace sts::trend {

std::string trend_to_svg(const TrendSeries& trend) {
    if (trend.size() == 0) throw DegenerateInputError("trend_to_svg: empty trend");

    const double width = 640, height = 400;
    const double ml = 60, mr = 20, mt = 20, mb = 45;  // margins
    const double pw = width - ml - mr, ph = height - mt - mb;

    long long w_lo = trend.week_index.front(), w_hi = trend.week_index.back();
    if (trend.event_date) {
        const long long ew = (trend.event_date->days_since_epoch - trend.epoch.days_since_epoch) / 7;
        w_lo = std::min(w_lo, ew);
        w_hi = std::max(w_hi, ew);
    }
    if (w_hi == w_lo) ++w_hi;
    double v_lo = trend.mean_v[0], v_hi = trend.mean_v[0];
    for (std::size_t i = 0; i < trend.size(); ++i) {
        v_lo = std::min(v_lo, trend.mean_v[i] - trend.sem_v[i]);
        v_hi = std::max(v_hi, trend.mean_v[i] + trend.sem_v[i]);
    }
    const double v_pad = std::max(0.05, 0.1 * (v_hi - v_lo));
    v_lo -= v_pad;
    v_hi += v_pad;

    auto px = [&](double week) { return ml + (week - w_lo) / static_cast<double>(w_hi - w_lo) * pw; };
    auto py = [&](double v) { return mt + (v_hi - v) / (v_hi - v_lo) * ph; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    svg << "  <rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    // axes
    svg << "  <line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    svg << "  <line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    svg << "  <text x=\"" << ml + pw / 2 << "\" y=\"" << height - 8
        << "\" text-anchor=\"middle\" font-size=\"14\">weeks since epoch</text>\n";
    svg << "  <text x=\"16\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 16 " << mt + ph / 2
        << ")\">speed of ascent [m/s]</text>\n";
    // y tick labels
    for (int k = 0; k <= 4; ++k) {
        const double v = v_lo + k * (v_hi - v_lo) / 4.0;
        svg << "  <text x=\"" << ml - 6 << "\" y=\"" << py(v) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << format_fixed(v, 2) << "</text>\n";
    }
    // x tick labels
    for (long long wk = w_lo; wk <= w_hi; wk += std::max<long long>(1, (w_hi - w_lo) / 8)) {
        svg << "  <text x=\"" << px(static_cast<double>(wk)) << "\" y=\"" << mt + ph + 16
            << "\" text-anchor=\"middle\" font-size=\"11\">" << wk << "</text>\n";
    }
    // event line
    if (trend.event_date) {
        const double ew = static_cast<double>(trend.event_date->days_since_epoch -
                                              trend.epoch.days_since_epoch) / 7.0;
        svg << "  <line class=\"event\" x1=\"" << px(ew) << "\" y1=\"" << mt << "\" x2=\"" << px(ew)
            << "\" y2=\"" << mt + ph << "\" stroke=\"black\" stroke-width=\"2\"/>\n";
    }
    // error bars then markers
    for (std::size_t i = 0; i < trend.size(); ++i) {
        const double x = px(static_cast<double>(trend.week_index[i]));
        svg << "  <line class=\"errbar\" x1=\"" << x << "\" y1=\"" << py(trend.mean_v[i] - trend.sem_v[i])
            << "\" x2=\"" << x << "\" y2=\"" << py(trend.mean_v[i] + trend.sem_v[i])
            << "\" stroke=\"steelblue\"/>\n";
    }
    for (std::size_t i = 0; i < trend.size(); ++i) {
        svg << "  <circle class=\"marker\" cx=\"" << px(static_cast<double>(trend.week_index[i])) << "\" cy=\""
            << py(trend.mean_v[i]) << "\" r=\"3.5\" fill=\"steelblue\"/>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

void emit_trend_plot(const TrendSeries& trend, const std::string& out_path, const std::string& format) {
    if (trend.size() == 0) throw DegenerateInputError("emit_trend_plot: empty trend");
    if (format == "svg") {
        write_text_file(out_path, trend_to_svg(trend));
    } else if (format == "csv") {
        write_text_file(out_path, trend_to_csv(trend));
    } else {
        throw ConfigError("emit_trend_plot: unknown format '" + format + "' (svg|csv)");
    }
}

}  // namespace sts::trend
