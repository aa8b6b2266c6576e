#include "sts/eval/compare.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"
#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace sts::eval {

namespace {

// Linear interpolation of (t, v) samples at query time q (clamped ends).
double interp(const std::vector<double>& t, const std::vector<double>& v, double q) {
    if (q <= t.front()) return v.front();
    if (q >= t.back()) return v.back();
    std::size_t lo = 0, hi = t.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (t[mid] <= q)
            lo = mid;
        else
            hi = mid;
    }
    const double u = (q - t[lo]) / (t[hi] - t[lo]);
    return v[lo] + u * (v[hi] - v[lo]);
}

}  // namespace

ComparisonReport compare_estimators(const std::vector<TransitionPair>& transitions,
                                    const kin::SavgolConfig& config) {
    if (transitions.size() < 2) {
        throw DegenerateInputError("compare_estimators: need at least 2 transitions");
    }
    ComparisonReport report;
    report.n_transitions = static_cast<int>(transitions.size());
    report.mean_curve_estimate.assign(kCurvePoints, 0.0);
    report.mean_curve_reference.assign(kCurvePoints, 0.0);

    for (const auto& tr : transitions) {
        if (!(tr.t_end > tr.t_start)) {
            throw IntegrityError("compare_estimators: degenerate interval [" + format_double(tr.t_start) +
                                 ", " + format_double(tr.t_end) + "]");
        }
        const kin::VerticalSpeedSeries v_est =
            kin::vertical_speed(tr.estimate, kin::Direction::SitToStand, config);
        const kin::VerticalSpeedSeries v_ref =
            kin::vertical_speed(tr.reference_t, tr.reference_y, kin::Direction::SitToStand, config);

        report.v_estimate.push_back(
            kin::speed_of_ascent(v_est, tr.t_start, tr.t_end, tr.estimate.track_id,
                                 kin::Direction::SitToStand).v_soa);
        report.v_reference.push_back(
            kin::speed_of_ascent(v_ref, tr.t_start, tr.t_end, "reference", kin::Direction::SitToStand).v_soa);

        for (int j = 0; j < kCurvePoints; ++j) {
            const double q = tr.t_start + (tr.t_end - tr.t_start) * j / (kCurvePoints - 1);
            report.mean_curve_estimate[j] += interp(v_est.timestamps, v_est.v, q);
            report.mean_curve_reference[j] += interp(v_ref.timestamps, v_ref.v, q);
        }
    }
    for (int j = 0; j < kCurvePoints; ++j) {
        report.mean_curve_estimate[j] /= report.n_transitions;
        report.mean_curve_reference[j] /= report.n_transitions;
    }

    const double n = static_cast<double>(report.n_transitions);
    double me = 0, mr = 0;
    for (int i = 0; i < report.n_transitions; ++i) {
        me += report.v_estimate[i];
        mr += report.v_reference[i];
    }
    me /= n;
    mr /= n;
    report.bias = me - mr;
    report.bias_percent = mr != 0.0 ? report.bias / mr * 100.0 : 0.0;

    double see = 0, srr = 0, ser = 0;
    for (int i = 0; i < report.n_transitions; ++i) {
        const double de = report.v_estimate[i] - me;
        const double dr = report.v_reference[i] - mr;
        see += de * de;
        srr += dr * dr;
        ser += de * dr;
    }
    report.pearson_r = (see > 0 && srr > 0) ? ser / std::sqrt(see * srr) : 1.0;
    return report;
}

std::string comparison_table_csv(const ComparisonReport& report) {
    std::ostringstream out;
    out << "transition,v_soa_estimate,v_soa_reference\n";
    for (int i = 0; i < report.n_transitions; ++i) {
        out << i << ',' << format_double(report.v_estimate[i]) << ','
            << format_double(report.v_reference[i]) << '\n';
    }
    return out.str();
}

std::string comparison_summary_json(const ComparisonReport& report) {
    nlohmann::ordered_json j;
    j["n"] = report.n_transitions;
    j["bias"] = report.bias;
    j["bias_percent"] = report.bias_percent;
    j["pearson_r"] = report.pearson_r;
    return j.dump(2) + "\n";
}

std::string mean_curve_csv(const std::vector<double>& curve) {
    std::ostringstream out;
    out << "tau,mean_v\n";
    for (std::size_t j = 0; j < curve.size(); ++j) {
        out << format_double(static_cast<double>(j) / (curve.size() - 1)) << ',' << format_double(curve[j])
            << '\n';
    }
    return out.str();
}

}  // namespace sts::eval
