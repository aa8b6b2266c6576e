#include <cmath>
#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "json.hpp"
#include "sts/classifier/train.hpp"
#include "sts/csv.hpp"
#include "sts/ingest/load.hpp"
#include "sts/kinematics/speed.hpp"
#include "sts/nn/checkpoint.hpp"
#include "sts/synth/house.hpp"
#include "sts/synth/render.hpp"

namespace fs = std::filesystem;
using namespace sts;

namespace {

std::string temp_dir(const std::string& name) {
    const std::string dir = "/tmp/sts_pipeline_" + name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Renders a handful of labelled clips directly in memory.
std::vector<clf::LabeledClip> tiny_dataset() {
    std::vector<clf::LabeledClip> out;
    int id = 0;
    auto add = [&](synth::MotionKind kind, clf::StSClass label, std::uint64_t seed) {
        synth::MotionParams p;
        p.kind = kind;
        p.seed = seed;
        if (kind == synth::MotionKind::SitToStand || kind == synth::MotionKind::StandToSit) {
            p.amplitude = 0.5;
            p.rate = 3.0;
            p.base_height = 1.2;
        } else {
            p.base_height = 1.7;
        }
        const auto motion = synth::generate_motion(p, 10.0, 10.0, 0.0, "clip" + std::to_string(id++));
        const auto frames = synth::render_silhouette_frames(motion);

        clf::LabeledClip lc;
        lc.label = label;
        lc.clip.clip_id = motion.track.track_id;
        lc.clip.track_id = motion.track.track_id;
        lc.clip.t_start = 0.0;
        lc.clip.t_end = 10.0;
        lc.clip.frames = ingest::BitVolume(ingest::kClipFrames, ingest::kClipSize, ingest::kClipSize);
        for (int f = 0; f < ingest::kClipFrames; ++f) {
            const auto crop = ingest::crop_and_resize(frames[f], ingest::mask_bounds(frames[f]),
                                                      ingest::kClipSize);
            for (int r = 0; r < ingest::kClipSize; ++r)
                for (int c = 0; c < ingest::kClipSize; ++c)
                    if (crop[r * ingest::kClipSize + c]) lc.clip.frames.set(f, r, c, true);
        }
        lc.clip.source_boxes = motion.track.boxes;
        out.push_back(std::move(lc));
    };
    add(synth::MotionKind::SitToStand, clf::StSClass::SitToStand, 1);
    add(synth::MotionKind::SitToStand, clf::StSClass::SitToStand, 2);
    add(synth::MotionKind::StandToSit, clf::StSClass::StandToSit, 3);
    add(synth::MotionKind::StandToSit, clf::StSClass::StandToSit, 4);
    add(synth::MotionKind::Walk, clf::StSClass::Other, 5);
    add(synth::MotionKind::Idle, clf::StSClass::Other, 6);
    return out;
}

std::vector<float> flatten_params(clf::Network<float>& net) {
    std::vector<float> flat;
    for (auto* p : net.checkpoint_params()) flat.insert(flat.end(), p->value.begin(), p->value.end());
    return flat;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(STS_BINARY_PATH) + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

}  // namespace

TEST_CASE("training for zero epochs leaves the network at its initialization") {
    const auto dataset = tiny_dataset();
    clf::NetworkConfig cfg;
    clf::Network<float> net(cfg);
    net.init_weights(77);
    const auto before = flatten_params(net);
    clf::TrainHyper hyper;
    hyper.epochs = 0;
    const auto result = clf::train(net, dataset, hyper);
    CHECK(result.log.empty());
    CHECK(flatten_params(net) == before);
}

TEST_CASE("first-epoch loss is finite and below ln3 + 0.1; same seed twice is bitwise identical") {
    const auto dataset = tiny_dataset();
    clf::TrainHyper hyper;
    hyper.epochs = 1;
    hyper.batch = 6;
    hyper.learning_rate = 0.02;
    hyper.seed = 4242;

    const std::string dir_a = temp_dir("train_a");
    const std::string dir_b = temp_dir("train_b");
    std::vector<float> params_a, params_b;
    double loss = 0;
    {
        clf::NetworkConfig cfg;
        clf::Network<float> net(cfg);
        net.init_weights(hyper.seed);
        const auto result = clf::train(net, dataset, hyper, dir_a);
        REQUIRE(result.log.size() == 1);
        loss = result.log[0].train_loss;
        params_a = flatten_params(net);
    }
    CHECK(std::isfinite(loss));
    CHECK(loss < std::log(3.0) + 0.1);
    {
        clf::NetworkConfig cfg;
        clf::Network<float> net(cfg);
        net.init_weights(hyper.seed);
        clf::train(net, dataset, hyper, dir_b);
        params_b = flatten_params(net);
    }
    CHECK(params_a == params_b);
    CHECK(read_text_file(dir_a + "/model.ckpt") == read_text_file(dir_b + "/model.ckpt"));
}

TEST_CASE("classification is deterministic and validates clip shape") {
    const auto dataset = tiny_dataset();
    clf::NetworkConfig cfg;
    clf::Network<float> net(cfg);
    net.init_weights(7);
    const auto a = clf::classify_clip(net, dataset[0].clip);
    const auto b = clf::classify_clip(net, dataset[0].clip);
    for (int c = 0; c < 3; ++c) CHECK(a.probabilities[c] == b.probabilities[c]);
    CHECK(a.predicted == clf::argmax_class(a.probabilities));
    double sum = 0;
    for (double p : a.probabilities) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    ingest::Clip wrong;
    wrong.frames = ingest::BitVolume(10, 10, 10);
    CHECK_THROWS_AS(clf::classify_clip(net, wrong), sts::ShapeError);
}

TEST_CASE("cli: help exits 0, bad usage exits 2") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("synth") == 2);                       // missing required options
    CHECK(run_cli("nonsense") == 2);                    // unknown subcommand
    CHECK(run_cli("classify --data /nonexistent --model /nonexistent --out /tmp/x.csv") == 2);
}

TEST_CASE("cli: synth -> classify -> measure -> trend round trip") {
    const std::string base = temp_dir("cli");
    synth::HouseScenario s;
    s.seed = 55;
    s.duration_weeks = 1;
    s.weekly_v_soa_schedule = {0.4};
    s.sit_to_stand_per_week = 3;
    s.stand_to_sit_per_week = 3;
    s.other_per_week = 4;
    s.forced_counts = true;
    write_text_file(base + "/scenario.json", synth::scenario_to_json(s));

    CHECK(run_cli("synth --scenario " + base + "/scenario.json --out " + base + "/house") == 0);
    CHECK(fs::exists(base + "/house/truth.csv"));

    {  // deterministic untrained model
        clf::NetworkConfig cfg;
        clf::Network<float> net(cfg);
        net.init_weights(1);
        nn::save_checkpoint(base + "/model.ckpt", net.checkpoint_params());
    }
    CHECK(run_cli("classify --data " + base + "/house --model " + base + "/model.ckpt --out " + base +
                  "/cls.csv") == 0);
    const auto rows = clf::classifications_from_csv(base + "/cls.csv");
    CHECK(rows.size() == 10);

    CHECK(run_cli("measure --data " + base + "/house --classifications " + base + "/cls.csv --out " + base +
                  "/meas.csv") == 0);
    CHECK(fs::exists(base + "/meas.csv"));

    // trend over the manual labels instead (guaranteed StS measurements)
    std::vector<clf::ClipClassification> manual;
    for (const auto& l : clf::load_labels(base + "/house/labels.csv")) {
        clf::ClipClassification row;
        row.clip_id = l.clip_id;
        row.predicted = l.label;
        row.probabilities[static_cast<int>(l.label)] = 1.0;
        manual.push_back(row);
    }
    write_text_file(base + "/cls_manual.csv", clf::classifications_to_csv(manual));
    CHECK(run_cli("measure --data " + base + "/house --classifications " + base +
                  "/cls_manual.csv --out " + base + "/meas_manual.csv") == 0);
    CHECK(run_cli("trend --measurements " + base + "/meas_manual.csv --direction Sit-to-Stand "
                  "--epoch-date 2024-01-01 --out " + base + "/trend.csv --svg " + base + "/trend.svg") == 0);
    CHECK(fs::exists(base + "/trend.csv"));
    CHECK(fs::exists(base + "/trend.svg"));

    // report with labels present emits accuracy and both trends
    CHECK(run_cli("report --data " + base + "/house --model " + base + "/model.ckpt --out " + base +
                  "/report --epoch-date 2024-01-01") == 0);
    const auto summary = nlohmann::json::parse(read_text_file(base + "/report/summary.json"));
    CHECK(summary.contains("n_clips"));
    CHECK(summary.contains("overall_accuracy"));
    CHECK(summary.contains("trend_r_squared"));
    CHECK(summary["n_clips"].get<int>() == 10);
}

TEST_CASE("cli: measure skips tracks shorter than the filter window with exit 0") {
    const std::string base = temp_dir("short");
    fs::create_directories(base + "/tracks");
    // 5-sample track: shorter than the 11-point window
    std::string csv = "t,x1,y1,z1,x2,y2,z2\n";
    for (int i = 0; i < 5; ++i)
        csv += format_double(i * 0.1) + ",0.3,1.5,0.2,-0.3,0,-0.2\n";
    write_text_file(base + "/tracks/short.csv", csv);

    std::vector<clf::ClipClassification> rows(1);
    rows[0].clip_id = "short";
    rows[0].predicted = clf::StSClass::SitToStand;
    rows[0].probabilities[0] = 1.0;
    write_text_file(base + "/cls.csv", clf::classifications_to_csv(rows));

    CHECK(run_cli("measure --data " + base + " --classifications " + base + "/cls.csv --out " + base +
                  "/meas.csv") == 0);
    const auto ms = kin::measurements_from_csv(base + "/meas.csv");
    CHECK(ms.empty());
}
