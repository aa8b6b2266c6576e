#include "sts/synth/house.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sts/csv.hpp"
#include "sts/dates.hpp"
#include "sts/errors.hpp"
#include "sts/ingest/load.hpp"
#include "sts/ingest/stream.hpp"
#include "sts/rng.hpp"
#include "sts/synth/render.hpp"

namespace fs = std::filesystem;

namespace sts::synth {

void HouseScenario::validate() const {
    if (version != 1) throw ConfigError("scenario: unsupported version " + std::to_string(version));
    if (duration_weeks < 1) throw ConfigError("scenario: duration_weeks must be >= 1");
    if (static_cast<int>(weekly_v_soa_schedule.size()) != duration_weeks) {
        throw ConfigError("scenario: weekly_v_soa_schedule length " +
                          std::to_string(weekly_v_soa_schedule.size()) + " != duration_weeks " +
                          std::to_string(duration_weeks));
    }
    if (sit_to_stand_per_week < 0 || stand_to_sit_per_week < 0 || other_per_week < 0) {
        throw ConfigError("scenario: class_mix counts must be >= 0");
    }
    if (event_week && (*event_week < 0 || *event_week > duration_weeks)) {
        throw ConfigError("scenario: event_week out of range");
    }
    if (noise_sigma < 0) throw ConfigError("scenario: noise_sigma must be >= 0");
}

HouseScenario scenario_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    HouseScenario s;
    try {
        s.version = j.value("version", 1);
        s.seed = j.value("seed", std::uint64_t{12345});
        s.duration_weeks = j.at("duration_weeks").get<int>();
        if (j.contains("event_week") && !j["event_week"].is_null()) s.event_week = j["event_week"].get<int>();
        s.weekly_v_soa_schedule = j.at("weekly_v_soa_schedule").get<std::vector<double>>();
        const auto& mix = j.at("class_mix");
        s.sit_to_stand_per_week = mix.at("sit_to_stand").get<double>();
        s.stand_to_sit_per_week = mix.at("stand_to_sit").get<double>();
        s.other_per_week = mix.at("other").get<double>();
        s.forced_counts = j.value("forced_counts", false);
        s.noise_sigma = j.value("noise_sigma", 0.004);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
    s.validate();
    return s;
}

std::string scenario_to_json(const HouseScenario& s) {
    nlohmann::ordered_json j;
    j["version"] = s.version;
    j["seed"] = s.seed;
    j["duration_weeks"] = s.duration_weeks;
    if (s.event_week)
        j["event_week"] = *s.event_week;
    else
        j["event_week"] = nullptr;
    j["weekly_v_soa_schedule"] = s.weekly_v_soa_schedule;
    j["class_mix"] = {{"sit_to_stand", s.sit_to_stand_per_week},
                      {"stand_to_sit", s.stand_to_sit_per_week},
                      {"other", s.other_per_week}};
    j["forced_counts"] = s.forced_counts;
    j["noise_sigma"] = s.noise_sigma;
    return j.dump(2) + "\n";
}

namespace {

std::string truth_to_csv(const std::vector<TruthRow>& rows) {
    std::ostringstream out;
    out << "clip_id,kind,v_soa_true,peak_time_true,week_index\n";
    for (const auto& r : rows) {
        out << r.clip_id << ',' << kind_name(r.kind) << ',' << format_double(r.v_soa_true) << ','
            << format_double(r.peak_time_true) << ',' << r.week_index << '\n';
    }
    return out.str();
}

}  // namespace

std::vector<TruthRow> truth_from_csv(const std::string& path) {
    const CsvFile csv = read_csv(path, "clip_id,kind,v_soa_true,peak_time_true,week_index");
    std::vector<TruthRow> out;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 5) throw FormatError(ctx + ": expected 5 fields");
        TruthRow t;
        t.clip_id = row[0];
        t.kind = kind_from_name(row[1]);
        t.v_soa_true = parse_double(row[2], ctx);
        t.peak_time_true = parse_double(row[3], ctx);
        t.week_index = static_cast<int>(parse_int(row[4], ctx));
        out.push_back(std::move(t));
    }
    return out;
}

HouseSummary generate_house(const HouseScenario& scenario, const std::string& out_dir) {
    scenario.validate();
    HouseSummary summary;
    summary.directory = out_dir;
    fs::create_directories(fs::path(out_dir) / "tracks");
    fs::create_directories(fs::path(out_dir) / "streams");

    Rng rng(scenario.seed);
    const Camera camera;

    for (int week = 0; week < scenario.duration_weeks; ++week) {
        const double v_week = scenario.weekly_v_soa_schedule[week];

        auto draw_count = [&](double mix) {
            if (scenario.forced_counts) return static_cast<int>(std::llround(mix));
            return mix > 0.0 ? rng.poisson(mix) : 0;
        };
        const int n_s2s = draw_count(scenario.sit_to_stand_per_week);
        const int n_st2s = draw_count(scenario.stand_to_sit_per_week);
        const int n_other = draw_count(scenario.other_per_week);
        const int total = n_s2s + n_st2s + n_other;

        // one clip slot per event, shuffled over the week
        std::vector<MotionKind> kinds;
        kinds.reserve(total);
        for (int i = 0; i < n_s2s; ++i) kinds.push_back(MotionKind::SitToStand);
        for (int i = 0; i < n_st2s; ++i) kinds.push_back(MotionKind::StandToSit);
        for (int i = 0; i < n_other; ++i) {
            const std::size_t pick = rng.index(3);
            kinds.push_back(pick == 0 ? MotionKind::Walk : pick == 1 ? MotionKind::Reach : MotionKind::Idle);
        }
        rng.shuffle(kinds);

        std::vector<double> offsets(total);
        for (auto& o : offsets) o = rng.uniform(0.0, kSecondsPerWeek - 2.0 * ingest::kClipSeconds);
        std::sort(offsets.begin(), offsets.end());

        for (int i = 0; i < total; ++i) {
            char id[32];
            std::snprintf(id, sizeof(id), "w%03d_c%04d", week, i);
            const std::string clip_id = id;
            const double t_offset = week * kSecondsPerWeek + offsets[i];

            MotionParams p;
            p.kind = kinds[i];
            p.noise_sigma = scenario.noise_sigma;
            p.seed = rng.next_u64();
            if (p.kind == MotionKind::SitToStand || p.kind == MotionKind::StandToSit) {
                const double v_target = std::max(0.05, rng.normal(v_week, 0.1 * v_week));
                const double k0 = rng.uniform(2.8, 3.8);
                p.amplitude = std::clamp(4.0 * v_target / k0, 0.30, 0.65);
                p.rate = 4.0 * v_target / p.amplitude;
                p.midpoint = rng.uniform(3.5, 6.5);
                p.base_height = rng.uniform(1.10, 1.30);
            } else if (p.kind == MotionKind::Idle) {
                p.base_height = rng.uniform() < 0.5 ? rng.uniform(1.15, 1.35)   // seated
                                                    : rng.uniform(1.55, 1.80);  // standing
            } else {
                p.midpoint = p.kind == MotionKind::Reach ? rng.uniform(3.0, 7.0) : 5.0;
                p.base_height = rng.uniform(1.55, 1.80);
            }

            const Motion motion = generate_motion(p, 10.0, ingest::kClipSeconds, t_offset, clip_id);
            ingest::save_bbox_track((fs::path(out_dir) / "tracks" / (clip_id + ".csv")).string(),
                                    motion.track);
            {
                ingest::SilhouetteStreamWriter writer(
                    (fs::path(out_dir) / "streams" / clip_id).string());
                for (const auto& frame : render_silhouette_frames(motion, camera)) writer.append(frame);
            }

            clf::LabelRow label;
            label.clip_id = clip_id;
            label.t_start = t_offset;
            label.t_end = t_offset + ingest::kClipSeconds;
            label.label = p.kind == MotionKind::SitToStand ? clf::StSClass::SitToStand
                          : p.kind == MotionKind::StandToSit ? clf::StSClass::StandToSit
                                                             : clf::StSClass::Other;
            summary.labels.push_back(label);
            ++summary.clips_per_class[static_cast<int>(label.label)];

            TruthRow truth;
            truth.clip_id = clip_id;
            truth.kind = p.kind;
            truth.v_soa_true = motion.truth.v_soa_true;
            truth.peak_time_true = motion.truth.peak_time_true;
            truth.week_index = week;
            summary.truth.push_back(truth);
        }
    }

    write_text_file((fs::path(out_dir) / "labels.csv").string(), clf::labels_to_csv(summary.labels));
    summary.manifest_path = (fs::path(out_dir) / "truth.csv").string();
    write_text_file(summary.manifest_path, truth_to_csv(summary.truth));
    return summary;
}

}  // namespace sts::synth
