#pragma once

#include <string>
#include <vector>

#include "sts/ingest/types.hpp"
#include "sts/kinematics/speed.hpp"

namespace sts::eval {

// One Sit-to-Stand transition observed by two estimators: the 3D box track
// (estimate) and a reference centre-of-gravity height series.
struct TransitionPair {
    ingest::BBox3DTrack estimate;
    std::vector<double> reference_t;
    std::vector<double> reference_y;
    double t_start = 0.0;
    double t_end = 0.0;
};

constexpr int kCurvePoints = 101;  // normalized-time grid for the mean curves

struct ComparisonReport {
    int n_transitions = 0;
    double bias = 0.0;          // mean(estimate - reference), m/s
    double bias_percent = 0.0;  // bias / mean(reference) * 100
    double pearson_r = 0.0;
    std::vector<double> v_estimate;  // per-transition speeds of ascent
    std::vector<double> v_reference;
    std::vector<double> mean_curve_estimate;   // kCurvePoints values over tau in [0,1]
    std::vector<double> mean_curve_reference;
};

// Per transition, the speed of ascent is measured on both signals with the
// same filter; mean V_y curves are built on normalized time
// tau = (t - t_start)/(t_end - t_start) by linear interpolation onto a
// 101-point grid and averaged across transitions.
ComparisonReport compare_estimators(const std::vector<TransitionPair>& transitions,
                                    const kin::SavgolConfig& config = kin::SavgolConfig{});

std::string comparison_table_csv(const ComparisonReport& report);
std::string comparison_summary_json(const ComparisonReport& report);
std::string mean_curve_csv(const std::vector<double>& curve);

}  // namespace sts::eval
