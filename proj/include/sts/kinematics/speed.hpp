#pragma once

#include <string>
#include <vector>

#include "sts/ingest/types.hpp"
#include "sts/kinematics/savgol.hpp"

namespace sts::kin {

enum class Direction { SitToStand, StandToSit };

std::string direction_name(Direction d);
Direction direction_from_name(const std::string& name);

struct VerticalSpeedSeries {
    std::vector<double> timestamps;
    std::vector<double> v;  // m/s, sign already applied per direction
};

enum class MeasurementQuality { Ok, Low };

struct StSMeasurement {
    std::string track_id;
    Direction direction = Direction::SitToStand;
    double t_start = 0.0;
    double t_end = 0.0;
    double peak_time = 0.0;
    double v_soa = 0.0;  // m/s; negative only when no real ascent exists (quality Low)
    MeasurementQuality quality = MeasurementQuality::Ok;
};

// Vertical speed from raw (t, y) samples: +/- savgol(y, deriv 1) / savgol(t, deriv 1).
// Sign is + for SitToStand, - for StandToSit, so a genuine transition always
// yields a positive peak. Non-uniform timestamps are handled exactly by the
// ratio; no resampling.
VerticalSpeedSeries vertical_speed(const std::vector<double>& timestamps, const std::vector<double>& y,
                                   Direction direction, const SavgolConfig& config = SavgolConfig{});

// Same on a track's top edge y1(t).
VerticalSpeedSeries vertical_speed(const ingest::BBox3DTrack& track, Direction direction,
                                   const SavgolConfig& config = SavgolConfig{});

// Maximum of V_y over samples in the closed interval; peak_time is the
// earliest maximising sample. A negative maximum is reported as-is with
// quality Low, never clamped.
StSMeasurement speed_of_ascent(const VerticalSpeedSeries& vs, double t_start, double t_end,
                               const std::string& track_id, Direction direction);

// Measurement CSV (track_id,direction,t_start,t_end,peak_time,v_soa,quality),
// v_soa fixed to 6 decimals.
std::string measurements_to_csv(const std::vector<StSMeasurement>& ms);
std::vector<StSMeasurement> measurements_from_csv(const std::string& path);

}  // namespace sts::kin
