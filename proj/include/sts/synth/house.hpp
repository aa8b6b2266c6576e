#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sts/classifier/types.hpp"
#include "sts/synth/motion.hpp"

namespace sts::synth {

// Multi-week "house" recording: per week, a mix of transition clips whose
// target speeds follow weekly_v_soa_schedule and distractor clips
// (walk/reach/idle). Everything lands on disk in the ingest formats.
struct HouseScenario {
    int version = 1;
    std::uint64_t seed = 12345;
    int duration_weeks = 1;
    std::optional<int> event_week;              // e.g. surgery; bin boundary by construction
    std::vector<double> weekly_v_soa_schedule;  // m/s, one per week
    double sit_to_stand_per_week = 4.0;         // expected counts (Poisson), exact when forced
    double stand_to_sit_per_week = 6.0;
    double other_per_week = 20.0;
    bool forced_counts = false;
    double noise_sigma = 0.004;  // box-track jitter, meters

    void validate() const;
};

HouseScenario scenario_from_json_file(const std::string& path);
std::string scenario_to_json(const HouseScenario& s);

struct TruthRow {
    std::string clip_id;
    MotionKind kind = MotionKind::Idle;
    double v_soa_true = 0.0;
    double peak_time_true = 0.0;  // absolute seconds since house epoch
    int week_index = 0;
};

struct HouseSummary {
    std::string directory;
    std::vector<TruthRow> truth;
    std::vector<clf::LabelRow> labels;
    int clips_per_class[3] = {0, 0, 0};  // StSClass order
    std::string manifest_path;           // truth.csv
};

// Layout:
//   <out>/labels.csv                clip_id,t_start,t_end,label
//   <out>/truth.csv                 clip_id,kind,v_soa_true,peak_time_true,week_index
//   <out>/tracks/<clip>.csv         bbox track
//   <out>/streams/<clip>/...        silhouette stream
HouseSummary generate_house(const HouseScenario& scenario, const std::string& out_dir);

std::vector<TruthRow> truth_from_csv(const std::string& path);

}  // namespace sts::synth
