#pragma once

#include <array>
#include <string>
#include <vector>

#include "sts/ingest/stream.hpp"
#include "sts/ingest/types.hpp"

namespace sts::ingest {

// CSV track format: header t,x1,y1,z1,x2,y2,z2, one row per sample.
BBox3DTrack load_bbox_track(const std::string& path);
void save_bbox_track(const std::string& path, const BBox3DTrack& track);

// Skeleton file: header of comma-separated joint names, then one row per
// frame of t followed by x,y,z per joint (meters).
SkeletonSequence load_skeleton(const std::string& path);
void save_skeleton(const std::string& path, const SkeletonSequence& seq);

struct Rect2D {
    int x = 0, y = 0, width = 0, height = 0;  // pixels, top-left origin
};

// Tight bounding box of the set pixels; falls back to the full frame when
// the mask is empty.
Rect2D mask_bounds(const SilhouetteFrame& frame);

// Crops box2d out of the frame (zeros outside), pads to a centred square and
// nearest-neighbour resamples to out x out. Output values stay binary.
std::vector<std::uint8_t> crop_and_resize(const SilhouetteFrame& frame, const Rect2D& box2d, int out);

struct SegmentationResult {
    std::vector<Clip> clips;
    std::vector<std::string> gap_warnings;  // windows skipped for lack of frames
};

// Non-overlapping consecutive 10 s windows starting at the track's first
// timestamp. Within each window, 100 uniformly spaced sample times are filled
// with the crop of the nearest-in-time source frame; windows containing no
// source frame are skipped with a warning; the trailing partial window is
// discarded, never padded.
SegmentationResult segment_clips(SilhouetteStreamReader& frames, const BBox3DTrack& track);

// Componentwise min/max of the joints per frame, mapped to the index-1 =
// right/top/front convention (y1 = max y).
BBox3DTrack bbox_from_skeleton(const SkeletonSequence& seq);

// Per-frame arithmetic mean of the four named iliac joints.
std::vector<Vec3> cg_from_skeleton(const SkeletonSequence& seq,
                                   const std::array<std::string, 4>& iliac_joints);

}  // namespace sts::ingest
