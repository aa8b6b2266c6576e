#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "sts/csv.hpp"
#include "sts/ingest/load.hpp"
#include "sts/kinematics/speed.hpp"
#include "sts/synth/house.hpp"
#include "sts/synth/motion.hpp"
#include "sts/synth/render.hpp"

namespace fs = std::filesystem;
using namespace sts::synth;

namespace {

std::string temp_dir(const std::string& name) {
    const std::string dir = "/tmp/sts_synth_" + name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("logistic ground truth is A*k/4") {
    MotionParams p;
    p.kind = MotionKind::SitToStand;
    p.amplitude = 0.5;
    p.rate = 8.0;
    const Motion m = generate_motion(p, 10.0, 10.0);
    CHECK(m.truth.v_soa_true == doctest::Approx(1.0));
    CHECK(m.truth.peak_time_true == doctest::Approx(p.midpoint));
}

TEST_CASE("idle motion is constant with zero truth") {
    MotionParams p;
    p.kind = MotionKind::Idle;
    p.noise_sigma = 0.0;
    const Motion m = generate_motion(p, 10.0, 10.0);
    CHECK(m.truth.v_soa_true == doctest::Approx(0.0));
    for (const auto& b : m.track.boxes) CHECK(b.y1 == doctest::Approx(p.base_height));
}

TEST_CASE("same seed gives identical tracks") {
    MotionParams p;
    p.kind = MotionKind::SitToStand;
    p.amplitude = 0.4;
    p.rate = 3.0;
    p.noise_sigma = 0.01;
    p.seed = 99;
    const Motion a = generate_motion(p, 10.0, 10.0);
    const Motion b = generate_motion(p, 10.0, 10.0);
    REQUIRE(a.track.boxes.size() == b.track.boxes.size());
    for (std::size_t i = 0; i < a.track.boxes.size(); ++i) {
        CHECK(a.track.boxes[i].y1 == b.track.boxes[i].y1);  // bitwise
    }
}

TEST_CASE("noiseless kinematics pipeline recovers the analytic truth") {
    // realistic StS rise rates; 5% at 10 Hz and 2% at 30 Hz
    for (const double k : {2.5, 3.5, 4.5}) {
        for (const auto& [rate, tol] : {std::pair{10.0, 0.05}, std::pair{30.0, 0.02}}) {
            MotionParams p;
            p.kind = MotionKind::SitToStand;
            p.amplitude = 0.5;
            p.rate = k;
            p.noise_sigma = 0.0;
            const Motion m = generate_motion(p, rate, 10.0);
            const auto vs = sts::kin::vertical_speed(m.track, sts::kin::Direction::SitToStand);
            const auto meas = sts::kin::speed_of_ascent(vs, 0.0, 10.0, "m", sts::kin::Direction::SitToStand);
            CHECK(std::fabs(meas.v_soa - m.truth.v_soa_true) / m.truth.v_soa_true < tol);
        }
    }
}

TEST_CASE("idle rendering is pixelwise static") {
    MotionParams p;
    p.kind = MotionKind::Idle;
    p.base_height = 1.7;
    const Motion m = generate_motion(p, 10.0, 10.0);
    const auto frames = render_silhouette_frames(m);
    REQUIRE(frames.size() == 100);
    for (std::size_t i = 1; i < frames.size(); ++i) CHECK(frames[i].bits == frames[0].bits);
}

TEST_CASE("sit-to-stand rendering raises the mask centroid monotonically") {
    MotionParams p;
    p.kind = MotionKind::SitToStand;
    p.amplitude = 0.5;
    p.rate = 3.0;
    p.base_height = 1.2;
    const Motion m = generate_motion(p, 10.0, 10.0);
    const auto frames = render_silhouette_frames(m);

    std::vector<double> centroid_height(frames.size());
    for (std::size_t f = 0; f < frames.size(); ++f) {
        double sum_row = 0;
        long long count = 0;
        for (int r = 0; r < frames[f].height; ++r)
            for (int c = 0; c < frames[f].width; ++c)
                if (frames[f].at(r, c)) {
                    sum_row += r;
                    ++count;
                }
        REQUIRE(count > 0);
        centroid_height[f] = frames[f].height - sum_row / count;  // up = larger
    }
    for (std::size_t f = 1; f < frames.size(); ++f) {
        CHECK(centroid_height[f] >= centroid_height[f - 1] - 1.0);  // 1 px tolerance
    }
    CHECK(centroid_height.back() > centroid_height.front() + 5.0);  // it actually rose
}

TEST_CASE("rendered stream segments into exactly one 100-frame clip") {
    const std::string dir = temp_dir("oneclip");
    MotionParams p;
    p.kind = MotionKind::SitToStand;
    p.amplitude = 0.5;
    p.rate = 3.0;
    const Motion m = generate_motion(p, 10.0, 10.0);
    {
        sts::ingest::SilhouetteStreamWriter writer(dir);
        for (const auto& f : render_silhouette_frames(m)) writer.append(f);
    }
    sts::ingest::SilhouetteStreamReader reader(dir);
    const auto result = sts::ingest::segment_clips(reader, m.track);
    REQUIRE(result.clips.size() == 1);
    CHECK(result.clips[0].frames.frames() == 100);
    CHECK(result.clips[0].source_boxes.size() == m.track.boxes.size());
}

TEST_CASE("forced counts produce the exact label tally") {
    const std::string dir = temp_dir("forced");
    HouseScenario s;
    s.seed = 7;
    s.duration_weeks = 1;
    s.weekly_v_soa_schedule = {0.4};
    s.sit_to_stand_per_week = 10;
    s.stand_to_sit_per_week = 10;
    s.other_per_week = 30;
    s.forced_counts = true;
    const HouseSummary summary = generate_house(s, dir);
    CHECK(summary.labels.size() == 50);
    CHECK(summary.clips_per_class[0] == 10);
    CHECK(summary.clips_per_class[1] == 10);
    CHECK(summary.clips_per_class[2] == 30);

    const auto labels = sts::clf::load_labels(dir + "/labels.csv");
    CHECK(labels.size() == 50);
    const auto truth = truth_from_csv(dir + "/truth.csv");
    CHECK(truth.size() == 50);
}

TEST_CASE("zero class mix yields an empty dataset and manifest") {
    const std::string dir = temp_dir("empty");
    HouseScenario s;
    s.duration_weeks = 1;
    s.weekly_v_soa_schedule = {0.4};
    s.sit_to_stand_per_week = 0;
    s.stand_to_sit_per_week = 0;
    s.other_per_week = 0;
    s.forced_counts = true;
    const HouseSummary summary = generate_house(s, dir);
    CHECK(summary.labels.empty());
    CHECK(summary.truth.empty());
    CHECK(fs::exists(dir + "/labels.csv"));
}

TEST_CASE("house generation is byte-identical for a fixed seed") {
    const std::string dir_a = temp_dir("det_a");
    const std::string dir_b = temp_dir("det_b");
    HouseScenario s;
    s.seed = 2024;
    s.duration_weeks = 2;
    s.weekly_v_soa_schedule = {0.4, 0.42};
    s.sit_to_stand_per_week = 2;
    s.stand_to_sit_per_week = 3;
    s.other_per_week = 4;
    generate_house(s, dir_a);
    generate_house(s, dir_b);

    // compare every file byte for byte
    std::vector<std::string> rel;
    for (const auto& entry : fs::recursive_directory_iterator(dir_a)) {
        if (entry.is_regular_file()) rel.push_back(fs::relative(entry.path(), dir_a).string());
    }
    CHECK(rel.size() > 4);
    for (const auto& r : rel) {
        const std::string a = sts::read_text_file((fs::path(dir_a) / r).string());
        const std::string b = sts::read_text_file((fs::path(dir_b) / r).string());
        CHECK_MESSAGE(a == b, r);
    }
}

TEST_CASE("generated artifacts round-trip through the ingest loaders bit-exactly") {
    const std::string dir = temp_dir("roundtrip");
    HouseScenario s;
    s.seed = 5;
    s.duration_weeks = 1;
    s.weekly_v_soa_schedule = {0.45};
    s.sit_to_stand_per_week = 1;
    s.stand_to_sit_per_week = 1;
    s.other_per_week = 1;
    s.forced_counts = true;
    const HouseSummary summary = generate_house(s, dir);
    for (const auto& label : summary.labels) {
        const auto track = sts::ingest::load_bbox_track(dir + "/tracks/" + label.clip_id + ".csv");
        CHECK(track.boxes.size() == 101);
        CHECK(track.boxes.front().timestamp == label.t_start);  // bit-exact
        sts::ingest::SilhouetteStreamReader reader(dir + "/streams/" + label.clip_id);
        int frames = 0;
        while (auto f = reader.next()) {
            CHECK(f->width == 100);
            ++frames;
        }
        CHECK(frames == 100);
    }
}

TEST_CASE("scenario json round-trip") {
    HouseScenario s;
    s.seed = 31337;
    s.duration_weeks = 3;
    s.event_week = 1;
    s.weekly_v_soa_schedule = {0.4, 0.25, 0.3};
    s.sit_to_stand_per_week = 5.5;
    s.forced_counts = false;
    s.noise_sigma = 0.002;
    const std::string path = "/tmp/sts_scenario_rt.json";
    sts::write_text_file(path, scenario_to_json(s));
    const HouseScenario t = scenario_from_json_file(path);
    CHECK(t.seed == s.seed);
    CHECK(t.duration_weeks == 3);
    REQUIRE(t.event_week.has_value());
    CHECK(*t.event_week == 1);
    CHECK(t.weekly_v_soa_schedule == s.weekly_v_soa_schedule);
    CHECK(t.sit_to_stand_per_week == s.sit_to_stand_per_week);
    CHECK(t.noise_sigma == s.noise_sigma);
}
