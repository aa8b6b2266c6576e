// sts: coarse-to-fine Sit-to-Stand analysis pipeline.
//
// Subcommands wire the library stages together through files:
//   synth -> train -> classify -> measure -> trend, plus validate / compare /
//   report. Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "sts/classifier/train.hpp"
#include "sts/csv.hpp"
#include "sts/dates.hpp"
#include "sts/errors.hpp"
#include "sts/eval/compare.hpp"
#include "sts/eval/confusion.hpp"
#include "sts/ingest/load.hpp"
#include "sts/kinematics/speed.hpp"
#include "sts/nn/checkpoint.hpp"
#include "sts/synth/house.hpp"
#include "sts/trend/svg.hpp"
#include "sts/trend/trend.hpp"

namespace fs = std::filesystem;
using namespace sts;

namespace {

constexpr std::uint64_t kDefaultSeed = 12345;

struct StageFailure {
    std::string stage;
    std::string message;
};

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) {
        throw ConfigError("missing " + what + ": " + path);
    }
}

std::vector<clf::LabeledClip> load_house_clips(const std::string& dir) {
    require_file(dir + "/labels.csv", "label file");
    std::vector<clf::LabeledClip> out;
    const auto labels = clf::load_labels(dir + "/labels.csv");
    for (const auto& l : labels) {
        const std::string track_path = dir + "/tracks/" + l.clip_id + ".csv";
        require_file(track_path, "track for clip " + l.clip_id);
        auto track = ingest::load_bbox_track(track_path);
        track.track_id = l.clip_id;
        ingest::SilhouetteStreamReader reader(dir + "/streams/" + l.clip_id);
        auto seg = ingest::segment_clips(reader, track);
        for (auto& clip : seg.clips) {
            clf::LabeledClip lc;
            lc.clip = std::move(clip);
            lc.label = l.label;
            out.push_back(std::move(lc));
        }
    }
    return out;
}

// Track files in deterministic order; used when no label file is present.
std::vector<std::string> list_track_ids(const std::string& dir) {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir + "/tracks")) {
        if (entry.path().extension() == ".csv") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

clf::Network<float> load_model(const std::string& path) {
    require_file(path, "model checkpoint");
    clf::NetworkConfig cfg;
    clf::Network<float> net(cfg);
    nn::load_checkpoint(path, net.checkpoint_params());
    return net;
}

std::vector<clf::ClipClassification> classify_house(clf::Network<float>& net, const std::string& data_dir,
                                                    int batch) {
    std::vector<ingest::Clip> clips;
    for (const std::string& id : list_track_ids(data_dir)) {
        auto track = ingest::load_bbox_track(data_dir + "/tracks/" + id + ".csv");
        track.track_id = id;
        ingest::SilhouetteStreamReader reader(data_dir + "/streams/" + id);
        auto seg = ingest::segment_clips(reader, track);
        for (auto& clip : seg.clips) clips.push_back(std::move(clip));
    }
    std::vector<const ingest::Clip*> ptrs;
    ptrs.reserve(clips.size());
    for (const auto& c : clips) ptrs.push_back(&c);
    return clf::classify_clips(net, ptrs, batch);
}

// Measurement stage shared by cmd_measure and cmd_report: StS-classified
// clips only, skipping tracks too short for the filter window.
std::vector<kin::StSMeasurement> measure_classified(const std::string& data_dir,
                                                    const std::vector<clf::ClipClassification>& rows,
                                                    std::vector<std::string>& warnings) {
    std::vector<kin::StSMeasurement> out;
    for (const auto& row : rows) {
        if (row.predicted == clf::StSClass::Other) continue;
        const kin::Direction direction = row.predicted == clf::StSClass::SitToStand
                                             ? kin::Direction::SitToStand
                                             : kin::Direction::StandToSit;
        // clip ids are either <track> or <track>#<window>
        std::string track_id = row.clip_id;
        int window = 0;
        if (const auto at = track_id.find('#'); at != std::string::npos) {
            window = std::stoi(track_id.substr(at + 1));
            track_id = track_id.substr(0, at);
        }
        const std::string track_path = data_dir + "/tracks/" + track_id + ".csv";
        require_file(track_path, "track for clip " + row.clip_id);
        const auto track = ingest::load_bbox_track(track_path);
        const double t0 = track.boxes.front().timestamp + window * ingest::kClipSeconds;
        const double t1 = t0 + ingest::kClipSeconds;

        std::vector<double> ts, ys;
        for (const auto& b : track.boxes) {
            if (b.timestamp >= t0 && b.timestamp <= t1) {
                ts.push_back(b.timestamp);
                ys.push_back(b.y1);
            }
        }
        try {
            auto vs = kin::vertical_speed(ts, ys, direction);
            auto m = kin::speed_of_ascent(vs, t0, t1, row.clip_id, direction);
            out.push_back(std::move(m));
        } catch (const DegenerateInputError& e) {
            warnings.push_back(row.clip_id + ": skipped (" + e.what() + ")");
        }
    }
    return out;
}

nlohmann::ordered_json stat_to_json(const trend::StatResult& r) {
    nlohmann::ordered_json j;
    j["kind"] = r.kind == trend::StatKind::Ok ? "ok" : "no_variance";
    j["value"] = r.value;
    return j;
}

int cmd_synth(const std::string& scenario_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed_override) {
    require_file(scenario_path, "scenario file");
    synth::HouseScenario scenario = synth::scenario_from_json_file(scenario_path);
    if (seed_override) scenario.seed = *seed_override;
    const auto summary = synth::generate_house(scenario, out_dir);
    std::printf("%s\n", summary.manifest_path.c_str());
    std::printf("clips: %d Sit-to-Stand, %d Stand-to-Sit, %d Other\n", summary.clips_per_class[0],
                summary.clips_per_class[1], summary.clips_per_class[2]);
    return 0;
}

int cmd_train(const std::vector<std::string>& data_dirs, const std::string& out_dir,
              const clf::TrainHyper& hyper, const std::string& val_dir) {
    std::vector<clf::LabeledClip> dataset;
    for (const auto& dir : data_dirs) {
        auto clips = load_house_clips(dir);
        dataset.insert(dataset.end(), std::make_move_iterator(clips.begin()),
                       std::make_move_iterator(clips.end()));
    }
    std::vector<clf::LabeledClip> val;
    if (!val_dir.empty()) val = load_house_clips(val_dir);

    clf::NetworkConfig cfg;
    clf::Network<float> net(cfg);
    net.init_weights(hyper.seed);
    const auto result = clf::train(net, dataset, hyper, out_dir, val.empty() ? nullptr : &val);
    for (const auto& log : result.log) {
        std::printf("epoch %d: loss %.4f train_acc %.4f", log.epoch, log.train_loss, log.train_accuracy);
        if (log.val_accuracy >= 0) std::printf(" val_acc %.4f", log.val_accuracy);
        std::printf("\n");
    }
    if (result.aborted_non_finite) {
        std::fprintf(stderr, "training aborted: non-finite loss; last good checkpoint retained\n");
        return 1;
    }
    std::printf("%s\n", (fs::path(out_dir) / "model.ckpt").string().c_str());
    return 0;
}

int cmd_classify(const std::string& data_dir, const std::string& model_path, const std::string& out_path,
                 int batch) {
    auto net = load_model(model_path);
    const auto rows = classify_house(net, data_dir, batch);
    write_text_file(out_path, clf::classifications_to_csv(rows));
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_measure(const std::string& data_dir, const std::string& classifications_path,
                const std::string& out_path) {
    require_file(classifications_path, "classification file");
    const auto rows = clf::classifications_from_csv(classifications_path);
    std::vector<std::string> warnings;
    const auto measurements = measure_classified(data_dir, rows, warnings);
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    write_text_file(out_path, kin::measurements_to_csv(measurements));
    std::printf("%s\n", out_path.c_str());
    return 0;
}

int cmd_trend(const std::string& measurements_path, const std::string& direction_name,
              const std::string& epoch_str, const std::string& event_str, const std::string& out_csv,
              const std::string& out_svg) {
    require_file(measurements_path, "measurement file");
    const auto measurements = kin::measurements_from_csv(measurements_path);
    const Date epoch = parse_date(epoch_str);
    std::optional<Date> event;
    if (!event_str.empty()) event = parse_date(event_str);
    const auto series = trend::weekly_aggregate(measurements, kin::direction_from_name(direction_name),
                                                epoch, event);
    trend::emit_trend_plot(series, out_csv, "csv");
    if (!out_svg.empty()) trend::emit_trend_plot(series, out_svg, "svg");
    const auto r2 = trend::r_squared_weeks(series, series.week_index.front(), series.week_index.back());
    std::printf("%s\n", out_csv.c_str());
    std::printf("weeks: %zu, R^2: %s\n", series.size(),
                r2.kind == trend::StatKind::Ok ? format_double(r2.value).c_str() : "no-variance");
    return 0;
}

int cmd_validate(const std::vector<std::string>& house_dirs, const std::string& out_dir,
                 const clf::TrainHyper& hyper) {
    std::vector<clf::HouseSet> houses;
    for (const auto& dir : house_dirs) {
        clf::HouseSet hs;
        hs.name = fs::path(dir).filename().string();
        hs.clips = load_house_clips(dir);
        houses.push_back(std::move(hs));
    }
    fs::create_directories(out_dir);
    const clf::NetworkConfig cfg;
    const auto result = clf::cross_validate(houses, cfg, hyper, out_dir);

    nlohmann::ordered_json summary;
    summary["folds"] = nlohmann::ordered_json::array();
    for (const auto& fold : result.folds) {
        const std::string matrix_path = (fs::path(out_dir) / ("confusion_" + fold.held_out + ".csv")).string();
        write_text_file(matrix_path, eval::confusion_to_csv(fold.report.matrix));
        nlohmann::ordered_json jf;
        jf["held_out"] = fold.held_out;
        jf["overall"] = fold.report.overall;
        const char* names[3] = {"sit_to_stand", "stand_to_sit", "other"};
        for (int c = 0; c < 3; ++c) {
            if (fold.report.recall[c])
                jf["recall"][names[c]] = *fold.report.recall[c];
            else
                jf["recall"][names[c]] = nullptr;
        }
        jf["sts_false_positive_rate"] = fold.report.sts_false_positive_rate;
        jf["confusion_csv"] = matrix_path;
        for (const auto& w : fold.report.warnings) jf["warnings"].push_back(w);
        summary["folds"].push_back(jf);
        std::printf("fold %s: overall %.4f\n", fold.held_out.c_str(), fold.report.overall);
    }
    summary["average_overall"] = result.average_overall;
    const std::string summary_path = (fs::path(out_dir) / "summary.json").string();
    write_text_file(summary_path, summary.dump(2) + "\n");
    std::printf("average overall: %.4f\n%s\n", result.average_overall, summary_path.c_str());
    return 0;
}

int cmd_compare(const std::string& transitions_path, const std::string& out_dir) {
    require_file(transitions_path, "transition list");
    const CsvFile csv = read_csv(transitions_path, "estimate_track,reference_series,t_start,t_end");
    const fs::path base = fs::path(transitions_path).parent_path();
    std::vector<eval::TransitionPair> pairs;
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = transitions_path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 4) throw FormatError(ctx + ": expected 4 fields");
        eval::TransitionPair pair;
        pair.estimate = ingest::load_bbox_track((base / row[0]).string());
        const CsvFile ref = read_csv((base / row[1]).string(), "t,y");
        for (std::size_t i = 0; i < ref.rows.size(); ++i) {
            pair.reference_t.push_back(parse_double(ref.rows[i][0], row[1]));
            pair.reference_y.push_back(parse_double(ref.rows[i][1], row[1]));
        }
        pair.t_start = parse_double(row[2], ctx);
        pair.t_end = parse_double(row[3], ctx);
        pairs.push_back(std::move(pair));
    }
    const auto report = eval::compare_estimators(pairs);
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "per_transition.csv").string(), eval::comparison_table_csv(report));
    write_text_file((fs::path(out_dir) / "summary.json").string(), eval::comparison_summary_json(report));
    write_text_file((fs::path(out_dir) / "mean_curve_estimate.csv").string(),
                    eval::mean_curve_csv(report.mean_curve_estimate));
    write_text_file((fs::path(out_dir) / "mean_curve_reference.csv").string(),
                    eval::mean_curve_csv(report.mean_curve_reference));
    std::printf("n=%d bias=%.6f m/s (%.2f%%) pearson_r=%.6f\n%s\n", report.n_transitions, report.bias,
                report.bias_percent, report.pearson_r, (fs::path(out_dir) / "summary.json").string().c_str());
    return 0;
}

// Full pipeline: segment -> classify -> measure -> trend (+ manual trend and
// accuracy when ground-truth labels are present).
int cmd_report(const std::string& data_dir, const std::string& model_path, const std::string& out_dir,
               const std::string& direction_name, const std::string& epoch_str, const std::string& event_str,
               int batch) {
    fs::create_directories(out_dir);
    auto net = load_model(model_path);
    const kin::Direction direction = kin::direction_from_name(direction_name);
    const Date epoch = parse_date(epoch_str);
    std::optional<Date> event;
    if (!event_str.empty()) event = parse_date(event_str);

    const auto classifications = classify_house(net, data_dir, batch);
    const std::string classifications_path = (fs::path(out_dir) / "classifications.csv").string();
    write_text_file(classifications_path, clf::classifications_to_csv(classifications));

    std::vector<std::string> warnings;
    const auto measurements = measure_classified(data_dir, classifications, warnings);
    const std::string measurements_path = (fs::path(out_dir) / "measurements.csv").string();
    write_text_file(measurements_path, kin::measurements_to_csv(measurements));

    const auto auto_trend = trend::weekly_aggregate(measurements, direction, epoch, event);
    trend::emit_trend_plot(auto_trend, (fs::path(out_dir) / "trend_auto.csv").string(), "csv");
    trend::emit_trend_plot(auto_trend, (fs::path(out_dir) / "trend_auto.svg").string(), "svg");

    nlohmann::ordered_json summary;
    summary["version"] = 1;
    summary["n_clips"] = classifications.size();
    summary["n_measurements"] = measurements.size();
    summary["excluded_low_quality"] = auto_trend.excluded_low_quality;
    summary["direction"] = direction_name;
    summary["trend_auto_csv"] = (fs::path(out_dir) / "trend_auto.csv").string();
    const auto r2 = trend::r_squared_weeks(auto_trend, auto_trend.week_index.front(),
                                           auto_trend.week_index.back());
    summary["trend_r_squared"] = stat_to_json(r2);

    // manual comparison when ground-truth labels exist
    if (fs::exists(data_dir + "/labels.csv")) {
        const auto labels = clf::load_labels(data_dir + "/labels.csv");
        std::map<std::string, clf::StSClass> truth;
        for (const auto& l : labels) truth[l.clip_id] = l.label;

        std::vector<clf::StSClass> t, p;
        for (const auto& c : classifications) {
            const auto it = truth.find(c.clip_id);
            if (it == truth.end()) continue;
            t.push_back(it->second);
            p.push_back(c.predicted);
        }
        const auto acc = eval::confusion_and_accuracy(t, p);
        const std::string confusion_path = (fs::path(out_dir) / "confusion.csv").string();
        write_text_file(confusion_path, eval::confusion_to_csv(acc.matrix));
        summary["overall_accuracy"] = acc.overall;
        summary["sts_false_positive_rate"] = acc.sts_false_positive_rate;
        summary["confusion_csv"] = confusion_path;

        // manual trend: measure the clips the *labels* say are StS
        std::vector<clf::ClipClassification> manual_rows;
        for (const auto& l : labels) {
            clf::ClipClassification row;
            row.clip_id = l.clip_id;
            row.predicted = l.label;
            row.probabilities[static_cast<int>(l.label)] = 1.0;
            manual_rows.push_back(std::move(row));
        }
        const auto manual_measurements = measure_classified(data_dir, manual_rows, warnings);
        write_text_file((fs::path(out_dir) / "measurements_manual.csv").string(),
                        kin::measurements_to_csv(manual_measurements));
        const auto manual_trend = trend::weekly_aggregate(manual_measurements, direction, epoch, event);
        trend::emit_trend_plot(manual_trend, (fs::path(out_dir) / "trend_manual.csv").string(), "csv");
        trend::emit_trend_plot(manual_trend, (fs::path(out_dir) / "trend_manual.svg").string(), "svg");
        try {
            summary["manual_auto_correlation"] = stat_to_json(trend::trend_correlation(manual_trend, auto_trend));
        } catch (const DegenerateInputError& e) {
            summary["manual_auto_correlation"] = nullptr;
        }
    }

    for (const auto& w : warnings) summary["warnings"].push_back(w);
    const std::string summary_path = (fs::path(out_dir) / "summary.json").string();
    write_text_file(summary_path, summary.dump(2) + "\n");
    std::printf("%s\n", summary_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
#ifdef __GLIBC__
    mallopt(M_MMAP_THRESHOLD, 512 * 1024 * 1024);
    mallopt(M_TRIM_THRESHOLD, 512 * 1024 * 1024);
#endif

    CLI::App app{"Sit-to-Stand analysis pipeline over binary silhouette video"};
    app.require_subcommand(1);

    // synth
    std::string scenario_path, out_dir;
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic house dataset with ground truth");
    synth_cmd->add_option("--scenario", scenario_path, "scenario JSON")->required();
    synth_cmd->add_option("--out", out_dir, "output directory")->required();
    synth_cmd->add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) {
        seed_given = true;
    });

    // train
    std::vector<std::string> data_dirs;
    std::string val_dir, model_path, data_dir;
    clf::TrainHyper hyper;
    auto* train_cmd = app.add_subcommand("train", "train the clip classifier on labelled house data");
    train_cmd->add_option("--data", data_dirs, "house directories")->required();
    train_cmd->add_option("--out", out_dir, "checkpoint directory")->required();
    train_cmd->add_option("--val", val_dir, "held-out house for per-epoch accuracy");
    train_cmd->add_option("--epochs", hyper.epochs, "training epochs");
    train_cmd->add_option("--lr", hyper.learning_rate, "learning rate");
    train_cmd->add_option("--momentum", hyper.momentum, "SGD momentum");
    train_cmd->add_option("--batch", hyper.batch, "batch size");
    train_cmd->add_option("--seed", hyper.seed, "init/sampler seed");

    // classify
    std::string classifications_path;
    auto* classify_cmd = app.add_subcommand("classify", "classify every clip of a house");
    classify_cmd->add_option("--data", data_dir, "house directory")->required();
    classify_cmd->add_option("--model", model_path, "model checkpoint")->required();
    classify_cmd->add_option("--out", classifications_path, "output CSV")->required();
    int batch = 8;
    classify_cmd->add_option("--batch", batch, "inference batch size");

    // measure
    std::string measurements_path;
    auto* measure_cmd = app.add_subcommand("measure", "speed of ascent/descent for StS-classified clips");
    measure_cmd->add_option("--data", data_dir, "house directory")->required();
    measure_cmd->add_option("--classifications", classifications_path, "classification CSV")->required();
    measure_cmd->add_option("--out", measurements_path, "output CSV")->required();

    // trend
    std::string direction_name = "Sit-to-Stand";
    std::string epoch_str = "1970-01-01", event_str;
    std::string out_csv, out_svg;
    auto* trend_cmd = app.add_subcommand("trend", "weekly trend series from measurements");
    trend_cmd->add_option("--measurements", measurements_path, "measurement CSV")->required();
    trend_cmd->add_option("--direction", direction_name, "Sit-to-Stand | Stand-to-Sit");
    trend_cmd->add_option("--epoch-date", epoch_str, "week-grid anchor date (ISO-8601)");
    trend_cmd->add_option("--event-date", event_str, "event (e.g. surgery) date");
    trend_cmd->add_option("--out", out_csv, "trend CSV")->required();
    trend_cmd->add_option("--svg", out_svg, "trend SVG plot");

    // validate
    std::vector<std::string> house_dirs;
    auto* validate_cmd = app.add_subcommand("validate", "leave-one-house-out cross-validation");
    validate_cmd->add_option("--houses", house_dirs, "house directories (>= 2)")->required();
    validate_cmd->add_option("--out", out_dir, "output directory")->required();
    validate_cmd->add_option("--epochs", hyper.epochs, "training epochs");
    validate_cmd->add_option("--lr", hyper.learning_rate, "learning rate");
    validate_cmd->add_option("--momentum", hyper.momentum, "SGD momentum");
    validate_cmd->add_option("--batch", hyper.batch, "batch size");
    validate_cmd->add_option("--seed", hyper.seed, "init/sampler seed");

    // compare
    std::string transitions_path;
    auto* compare_cmd = app.add_subcommand("compare", "box-track vs reference estimator comparison");
    compare_cmd->add_option("--transitions", transitions_path, "transition list CSV")->required();
    compare_cmd->add_option("--out", out_dir, "output directory")->required();

    // report
    auto* report_cmd = app.add_subcommand("report", "full pipeline with summary JSON");
    report_cmd->add_option("--data", data_dir, "house directory")->required();
    report_cmd->add_option("--model", model_path, "model checkpoint")->required();
    report_cmd->add_option("--out", out_dir, "output directory")->required();
    report_cmd->add_option("--direction", direction_name, "trend direction");
    report_cmd->add_option("--epoch-date", epoch_str, "week-grid anchor date");
    report_cmd->add_option("--event-date", event_str, "event date");
    report_cmd->add_option("--batch", batch, "inference batch size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        if (synth_cmd->parsed()) {
            return cmd_synth(scenario_path, out_dir,
                             seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt);
        }
        if (train_cmd->parsed()) return cmd_train(data_dirs, out_dir, hyper, val_dir);
        if (classify_cmd->parsed()) return cmd_classify(data_dir, model_path, classifications_path, batch);
        if (measure_cmd->parsed()) return cmd_measure(data_dir, classifications_path, measurements_path);
        if (trend_cmd->parsed())
            return cmd_trend(measurements_path, direction_name, epoch_str, event_str, out_csv, out_svg);
        if (validate_cmd->parsed()) return cmd_validate(house_dirs, out_dir, hyper);
        if (compare_cmd->parsed()) return cmd_compare(transitions_path, out_dir);
        if (report_cmd->parsed())
            return cmd_report(data_dir, model_path, out_dir, direction_name, epoch_str, event_str, batch);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pipeline failure in '%s': %s\n",
                     app.get_subcommands().empty() ? "?" : app.get_subcommands()[0]->get_name().c_str(),
                     e.what());
        return 1;
    }
    return 2;
}
