#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sts/errors.hpp"

namespace sts::ingest {

// Binary person mask, one byte per pixel in memory (0/1), packed PBM on disk.
struct SilhouetteFrame {
    double timestamp = 0.0;  // seconds since stream epoch
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> bits;  // row-major, size width*height, 1 = person

    std::uint8_t at(int row, int col) const { return bits[static_cast<std::size_t>(row) * width + col]; }
};

// Axis-aligned 3D box; index 1 is right/top/front, index 2 is left/bottom/back,
// so y1 >= y2 always (y1 is the top edge).
struct BBox3D {
    double timestamp = 0.0;
    double x1 = 0, y1 = 0, z1 = 0;
    double x2 = 0, y2 = 0, z2 = 0;
};

struct BBox3DTrack {
    std::string track_id;
    std::vector<BBox3D> boxes;

    void validate() const {
        for (std::size_t i = 0; i < boxes.size(); ++i) {
            if (boxes[i].y1 < boxes[i].y2) {
                throw IntegrityError("track " + track_id + ": y1 < y2 at index " + std::to_string(i));
            }
            if (i > 0 && !(boxes[i].timestamp > boxes[i - 1].timestamp)) {
                throw IntegrityError("track " + track_id + ": non-increasing timestamp at index " +
                                     std::to_string(i));
            }
        }
    }
};

struct Vec3 {
    double x = 0, y = 0, z = 0;
};

struct SkeletonSequence {
    std::vector<std::string> joint_names;
    std::vector<double> timestamps;            // one per frame
    std::vector<std::vector<Vec3>> frames;     // frames[i].size() == joint_names.size()
    double frame_rate = 0.0;                   // Hz
};

// Fixed-size binary clip tensor (time x height x width), bit-packed to keep
// whole-house corpora resident at desk scale.
class BitVolume {
public:
    BitVolume() = default;
    BitVolume(int t, int h, int w) : t_(t), h_(h), w_(w), bits_((static_cast<std::size_t>(t) * h * w + 7) / 8, 0) {}

    int frames() const { return t_; }
    int height() const { return h_; }
    int width() const { return w_; }

    bool get(int t, int row, int col) const {
        const std::size_t idx = (static_cast<std::size_t>(t) * h_ + row) * w_ + col;
        return (bits_[idx >> 3] >> (idx & 7)) & 1;
    }
    void set(int t, int row, int col, bool v) {
        const std::size_t idx = (static_cast<std::size_t>(t) * h_ + row) * w_ + col;
        if (v)
            bits_[idx >> 3] |= static_cast<std::uint8_t>(1u << (idx & 7));
        else
            bits_[idx >> 3] &= static_cast<std::uint8_t>(~(1u << (idx & 7)));
    }

    const std::vector<std::uint8_t>& raw() const { return bits_; }

private:
    int t_ = 0, h_ = 0, w_ = 0;
    std::vector<std::uint8_t> bits_;
};

constexpr int kClipFrames = 100;
constexpr int kClipSize = 100;          // pixels per side
constexpr double kClipSeconds = 10.0;

// One classifier input unit: a 10 s window of a track rendered as a
// 100x100x100 binary tensor plus the 3D boxes covering the window.
struct Clip {
    std::string clip_id;
    std::string track_id;
    double t_start = 0.0;
    double t_end = 0.0;
    BitVolume frames;                 // kClipFrames x kClipSize x kClipSize
    std::vector<BBox3D> source_boxes; // boxes with timestamp in [t_start, t_end]
};

}  // namespace sts::ingest
