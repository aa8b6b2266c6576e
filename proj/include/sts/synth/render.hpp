#pragma once

#include <vector>

#include "sts/ingest/types.hpp"
#include "sts/synth/motion.hpp"

namespace sts::synth {

// World-to-pixel projection for the renderer: x_min..x_max maps to columns,
// y_max..y_min to rows (row 0 at the top).
struct Camera {
    double x_min = -1.6;
    double x_max = 1.6;
    double y_min = 0.0;
    double y_max = 2.2;
    int width = 100;
    int height = 100;
};

// Rasterises an articulated capsule figure (head, torso, thighs, shins, and a
// reaching arm when applicable) whose posture follows the motion's clean
// height signal. 100 frames at 10 fps covering the motion's clip window,
// timestamps offset like the box track. Deterministic per motion.
std::vector<ingest::SilhouetteFrame> render_silhouette_frames(const Motion& motion,
                                                              const Camera& camera = Camera{});

}  // namespace sts::synth
