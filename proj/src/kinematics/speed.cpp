#include "sts/kinematics/speed.hpp"

#include <cmath>
#include <sstream>

#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace sts::kin {

std::string direction_name(Direction d) {
    return d == Direction::SitToStand ? "Sit-to-Stand" : "Stand-to-Sit";
}

Direction direction_from_name(const std::string& name) {
    if (name == "Sit-to-Stand") return Direction::SitToStand;
    if (name == "Stand-to-Sit") return Direction::StandToSit;
    throw FormatError("unknown direction '" + name + "'");
}

VerticalSpeedSeries vertical_speed(const std::vector<double>& timestamps, const std::vector<double>& y,
                                   Direction direction, const SavgolConfig& base) {
    if (timestamps.size() != y.size()) {
        throw ShapeError("vertical_speed: timestamps and y differ in length");
    }
    for (std::size_t i = 1; i < timestamps.size(); ++i) {
        if (!(timestamps[i] > timestamps[i - 1])) {
            throw IntegrityError("vertical_speed: timestamps not strictly increasing at index " +
                                 std::to_string(i));
        }
    }
    SavgolConfig cfg = base;
    cfg.deriv = 1;
    const std::vector<double> dy = savgol_filter(y, cfg);
    const std::vector<double> dt = savgol_filter(timestamps, cfg);

    const double sign = direction == Direction::SitToStand ? 1.0 : -1.0;
    VerticalSpeedSeries out;
    out.timestamps = timestamps;
    out.v.resize(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(dt[i] > 0.0)) {
            throw IntegrityError("vertical_speed: filtered time vector non-increasing at index " +
                                 std::to_string(i));
        }
        out.v[i] = sign * dy[i] / dt[i];
    }
    return out;
}

VerticalSpeedSeries vertical_speed(const ingest::BBox3DTrack& track, Direction direction,
                                   const SavgolConfig& config) {
    std::vector<double> t, y;
    t.reserve(track.boxes.size());
    y.reserve(track.boxes.size());
    for (const auto& b : track.boxes) {
        t.push_back(b.timestamp);
        y.push_back(b.y1);
    }
    return vertical_speed(t, y, direction, config);
}

StSMeasurement speed_of_ascent(const VerticalSpeedSeries& vs, double t_start, double t_end,
                               const std::string& track_id, Direction direction) {
    StSMeasurement m;
    m.track_id = track_id;
    m.direction = direction;
    m.t_start = t_start;
    m.t_end = t_end;

    bool found = false;
    for (std::size_t i = 0; i < vs.timestamps.size(); ++i) {
        const double t = vs.timestamps[i];
        if (t < t_start || t > t_end) continue;
        if (!found || vs.v[i] > m.v_soa) {
            m.v_soa = vs.v[i];
            m.peak_time = t;
            found = true;
        }
    }
    if (!found) {
        throw DegenerateInputError("speed_of_ascent: no samples in [" + format_double(t_start) + ", " +
                                   format_double(t_end) + "]");
    }
    m.quality = m.v_soa >= 0.0 ? MeasurementQuality::Ok : MeasurementQuality::Low;
    return m;
}

std::string measurements_to_csv(const std::vector<StSMeasurement>& ms) {
    std::ostringstream out;
    out << "track_id,direction,t_start,t_end,peak_time,v_soa,quality\n";
    for (const auto& m : ms) {
        out << m.track_id << ',' << direction_name(m.direction) << ',' << format_double(m.t_start) << ','
            << format_double(m.t_end) << ',' << format_double(m.peak_time) << ','
            << format_fixed(m.v_soa, 6) << ',' << (m.quality == MeasurementQuality::Ok ? "ok" : "low")
            << '\n';
    }
    return out.str();
}

std::vector<StSMeasurement> measurements_from_csv(const std::string& path) {
    const CsvFile csv = read_csv(path, "track_id,direction,t_start,t_end,peak_time,v_soa,quality");
    std::vector<StSMeasurement> out;
    out.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 7) throw FormatError(ctx + ": expected 7 fields");
        StSMeasurement m;
        m.track_id = row[0];
        m.direction = direction_from_name(row[1]);
        m.t_start = parse_double(row[2], ctx);
        m.t_end = parse_double(row[3], ctx);
        m.peak_time = parse_double(row[4], ctx);
        m.v_soa = parse_double(row[5], ctx);
        if (row[6] == "ok")
            m.quality = MeasurementQuality::Ok;
        else if (row[6] == "low")
            m.quality = MeasurementQuality::Low;
        else
            throw FormatError(ctx + ": unknown quality '" + row[6] + "'");
        out.push_back(m);
    }
    return out;
}

}  // namespace sts::kin
