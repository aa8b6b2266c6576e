#include "sts/ingest/load.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "sts/csv.hpp"
#include "sts/errors.hpp"

namespace sts::ingest {

BBox3DTrack load_bbox_track(const std::string& path) {
    const CsvFile csv = read_csv(path, "t,x1,y1,z1,x2,y2,z2");
    BBox3DTrack track;
    track.track_id = path;
    track.boxes.reserve(csv.rows.size());
    for (std::size_t r = 0; r < csv.rows.size(); ++r) {
        const auto& row = csv.rows[r];
        const std::string ctx = path + ":" + std::to_string(csv.line_numbers[r]);
        if (row.size() != 7) throw FormatError(ctx + ": expected 7 fields, got " + std::to_string(row.size()));
        BBox3D b;
        b.timestamp = parse_double(row[0], ctx);
        b.x1 = parse_double(row[1], ctx);
        b.y1 = parse_double(row[2], ctx);
        b.z1 = parse_double(row[3], ctx);
        b.x2 = parse_double(row[4], ctx);
        b.y2 = parse_double(row[5], ctx);
        b.z2 = parse_double(row[6], ctx);
        if (b.y1 < b.y2) {
            throw IntegrityError(ctx + ": y1 < y2 (top edge below bottom edge)");
        }
        if (!track.boxes.empty() && !(b.timestamp > track.boxes.back().timestamp)) {
            throw IntegrityError(ctx + ": non-increasing timestamp");
        }
        track.boxes.push_back(b);
    }
    return track;
}

void save_bbox_track(const std::string& path, const BBox3DTrack& track) {
    std::ostringstream out;
    out << "t,x1,y1,z1,x2,y2,z2\n";
    for (const auto& b : track.boxes) {
        out << format_double(b.timestamp) << ',' << format_double(b.x1) << ',' << format_double(b.y1) << ','
            << format_double(b.z1) << ',' << format_double(b.x2) << ',' << format_double(b.y2) << ','
            << format_double(b.z2) << '\n';
    }
    write_text_file(path, out.str());
}

SkeletonSequence load_skeleton(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    SkeletonSequence seq;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (line_no == 1) {
            seq.joint_names = fields;
            continue;
        }
        const std::string ctx = path + ":" + std::to_string(line_no);
        if (fields.size() != 1 + 3 * seq.joint_names.size()) {
            throw FormatError(ctx + ": expected " + std::to_string(1 + 3 * seq.joint_names.size()) +
                              " fields for " + std::to_string(seq.joint_names.size()) + " joints");
        }
        seq.timestamps.push_back(parse_double(fields[0], ctx));
        std::vector<Vec3> joints(seq.joint_names.size());
        for (std::size_t j = 0; j < joints.size(); ++j) {
            joints[j].x = parse_double(fields[1 + 3 * j], ctx);
            joints[j].y = parse_double(fields[2 + 3 * j], ctx);
            joints[j].z = parse_double(fields[3 + 3 * j], ctx);
        }
        seq.frames.push_back(std::move(joints));
    }
    if (seq.timestamps.size() >= 2) {
        std::vector<double> deltas;
        for (std::size_t i = 1; i < seq.timestamps.size(); ++i)
            deltas.push_back(seq.timestamps[i] - seq.timestamps[i - 1]);
        std::nth_element(deltas.begin(), deltas.begin() + deltas.size() / 2, deltas.end());
        const double dt = deltas[deltas.size() / 2];
        if (dt > 0) seq.frame_rate = 1.0 / dt;
    }
    return seq;
}

void save_skeleton(const std::string& path, const SkeletonSequence& seq) {
    std::ostringstream out;
    for (std::size_t j = 0; j < seq.joint_names.size(); ++j) {
        if (j) out << ',';
        out << seq.joint_names[j];
    }
    out << '\n';
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        out << format_double(seq.timestamps[f]);
        for (const Vec3& v : seq.frames[f]) {
            out << ',' << format_double(v.x) << ',' << format_double(v.y) << ',' << format_double(v.z);
        }
        out << '\n';
    }
    write_text_file(path, out.str());
}

Rect2D mask_bounds(const SilhouetteFrame& frame) {
    int min_x = frame.width, min_y = frame.height, max_x = -1, max_y = -1;
    for (int r = 0; r < frame.height; ++r) {
        const std::uint8_t* row = frame.bits.data() + static_cast<std::size_t>(r) * frame.width;
        for (int c = 0; c < frame.width; ++c) {
            if (row[c]) {
                min_x = std::min(min_x, c);
                max_x = std::max(max_x, c);
                min_y = std::min(min_y, r);
                max_y = std::max(max_y, r);
            }
        }
    }
    if (max_x < 0) return {0, 0, frame.width, frame.height};  // empty mask: whole frame
    return {min_x, min_y, max_x - min_x + 1, max_y - min_y + 1};
}

std::vector<std::uint8_t> crop_and_resize(const SilhouetteFrame& frame, const Rect2D& box2d, int out) {
    if (box2d.width < 1 || box2d.height < 1 || box2d.x + box2d.width <= 0 || box2d.y + box2d.height <= 0 ||
        box2d.x >= frame.width || box2d.y >= frame.height) {
        throw DegenerateInputError("crop_and_resize: box does not intersect the frame");
    }
    const int side = std::max(box2d.width, box2d.height);
    const int off_x = (side - box2d.width) / 2;
    const int off_y = (side - box2d.height) / 2;

    std::vector<std::uint8_t> result(static_cast<std::size_t>(out) * out, 0);
    for (int i = 0; i < out; ++i) {
        // nearest-neighbour source row in the square canvas
        const int cy = static_cast<int>((i + 0.5) * side / out);
        const int by = cy - off_y;
        const int fy = box2d.y + by;
        if (by < 0 || by >= box2d.height || fy < 0 || fy >= frame.height) continue;
        for (int j = 0; j < out; ++j) {
            const int cx = static_cast<int>((j + 0.5) * side / out);
            const int bx = cx - off_x;
            const int fx = box2d.x + bx;
            if (bx < 0 || bx >= box2d.width || fx < 0 || fx >= frame.width) continue;
            result[static_cast<std::size_t>(i) * out + j] = frame.at(fy, fx);
        }
    }
    return result;
}

namespace {

struct PreparedFrame {
    double timestamp;
    std::vector<std::uint8_t> crop;  // kClipSize x kClipSize
};

}  // namespace

SegmentationResult segment_clips(SilhouetteStreamReader& frames, const BBox3DTrack& track) {
    SegmentationResult result;
    if (track.boxes.empty()) return result;
    const double t0 = track.boxes.front().timestamp;
    const double t_end = track.boxes.back().timestamp;
    const int n_windows = static_cast<int>(std::floor((t_end - t0) / kClipSeconds));
    if (n_windows < 1) return result;

    std::deque<PreparedFrame> buffer;
    bool stream_done = false;
    auto pull = [&]() -> bool {
        if (stream_done) return false;
        auto f = frames.next();
        if (!f) {
            stream_done = true;
            return false;
        }
        PreparedFrame p;
        p.timestamp = f->timestamp;
        p.crop = crop_and_resize(*f, mask_bounds(*f), kClipSize);
        buffer.push_back(std::move(p));
        return true;
    };

    const double step = kClipSeconds / kClipFrames;
    for (int k = 0; k < n_windows; ++k) {
        const double w_start = t0 + k * kClipSeconds;
        const double w_end = w_start + kClipSeconds;

        // keep only frames that can still be nearest to some sample
        while (!buffer.empty() && buffer.front().timestamp < w_start - kClipSeconds) buffer.pop_front();
        // read ahead far enough that later frames cannot beat the buffered ones
        while (!stream_done && (buffer.empty() || buffer.back().timestamp <= w_end + kClipSeconds)) {
            if (!pull()) break;
        }

        bool has_in_window = false;
        for (const auto& p : buffer) {
            if (p.timestamp >= w_start && p.timestamp < w_end) {
                has_in_window = true;
                break;
            }
        }
        if (!has_in_window) {
            result.gap_warnings.push_back("window " + std::to_string(k) + " [" + format_double(w_start) +
                                          ", " + format_double(w_end) + ") has no source frames; skipped");
            continue;
        }

        Clip clip;
        clip.track_id = track.track_id;
        clip.clip_id = n_windows == 1 ? track.track_id : track.track_id + "#" + std::to_string(k);
        clip.t_start = w_start;
        clip.t_end = w_end;
        clip.frames = BitVolume(kClipFrames, kClipSize, kClipSize);
        for (int s = 0; s < kClipFrames; ++s) {
            const double ts = w_start + s * step;
            // nearest-in-time frame in the buffer (sorted by timestamp)
            std::size_t lo = 0, hi = buffer.size();
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                if (buffer[mid].timestamp < ts)
                    lo = mid + 1;
                else
                    hi = mid;
            }
            std::size_t best = lo < buffer.size() ? lo : buffer.size() - 1;
            if (lo > 0 && (lo == buffer.size() ||
                           std::fabs(buffer[lo - 1].timestamp - ts) <= std::fabs(buffer[lo].timestamp - ts))) {
                best = lo - 1;
            }
            const auto& crop = buffer[best].crop;
            for (int r = 0; r < kClipSize; ++r)
                for (int c = 0; c < kClipSize; ++c)
                    if (crop[static_cast<std::size_t>(r) * kClipSize + c]) clip.frames.set(s, r, c, true);
        }
        for (const auto& b : track.boxes) {
            if (b.timestamp >= clip.t_start && b.timestamp <= clip.t_end) clip.source_boxes.push_back(b);
        }
        result.clips.push_back(std::move(clip));
    }
    return result;
}

BBox3DTrack bbox_from_skeleton(const SkeletonSequence& seq) {
    BBox3DTrack track;
    track.track_id = "skeleton";
    track.boxes.reserve(seq.frames.size());
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        const auto& joints = seq.frames[f];
        if (joints.empty()) {
            throw IntegrityError("bbox_from_skeleton: frame " + std::to_string(f) + " has zero joints");
        }
        BBox3D b;
        b.timestamp = seq.timestamps[f];
        b.x1 = b.x2 = joints[0].x;
        b.y1 = b.y2 = joints[0].y;
        b.z1 = b.z2 = joints[0].z;
        for (const Vec3& j : joints) {
            b.x1 = std::max(b.x1, j.x);
            b.x2 = std::min(b.x2, j.x);
            b.y1 = std::max(b.y1, j.y);
            b.y2 = std::min(b.y2, j.y);
            b.z1 = std::max(b.z1, j.z);
            b.z2 = std::min(b.z2, j.z);
        }
        track.boxes.push_back(b);
    }
    return track;
}

std::vector<Vec3> cg_from_skeleton(const SkeletonSequence& seq,
                                   const std::array<std::string, 4>& iliac_joints) {
    std::array<std::size_t, 4> idx{};
    for (std::size_t k = 0; k < 4; ++k) {
        auto it = std::find(seq.joint_names.begin(), seq.joint_names.end(), iliac_joints[k]);
        if (it == seq.joint_names.end()) {
            std::string available;
            for (const auto& n : seq.joint_names) available += (available.empty() ? "" : ", ") + n;
            throw ConfigError("cg_from_skeleton: joint '" + iliac_joints[k] +
                              "' not found; available: " + available);
        }
        idx[k] = static_cast<std::size_t>(it - seq.joint_names.begin());
    }
    std::vector<Vec3> cg(seq.frames.size());
    for (std::size_t f = 0; f < seq.frames.size(); ++f) {
        Vec3 sum;
        for (std::size_t k = 0; k < 4; ++k) {
            sum.x += seq.frames[f][idx[k]].x;
            sum.y += seq.frames[f][idx[k]].y;
            sum.z += seq.frames[f][idx[k]].z;
        }
        cg[f] = {sum.x / 4.0, sum.y / 4.0, sum.z / 4.0};
    }
    return cg;
}

}  // namespace sts::ingest
