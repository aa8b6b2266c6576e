#pragma once

#include <string>

#include "sts/trend/trend.hpp"

namespace sts::trend {

// Self-contained SVG: one marker + error bar per week, a vertical event line
// when event_date is set, axes labelled in weeks and m/s.
std::string trend_to_svg(const TrendSeries& trend);

void emit_trend_plot(const TrendSeries& trend, const std::string& out_path, const std::string& format);

}  // namespace sts::trend
