#include "sts/synth/render.hpp"

#include <algorithm>
#include <cmath>

namespace sts::synth {

namespace {

struct Capsule {
    double x0, y0, x1, y1, r;  // world meters
};

double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

double dist2_to_segment(double px, double py, const Capsule& c) {
    const double vx = c.x1 - c.x0, vy = c.y1 - c.y0;
    const double len2 = vx * vx + vy * vy;
    double u = 0.0;
    if (len2 > 0.0) u = clamp01(((px - c.x0) * vx + (py - c.y0) * vy) / len2);
    const double dx = px - (c.x0 + u * vx), dy = py - (c.y0 + u * vy);
    return dx * dx + dy * dy;
}

// Figure proportions relative to the current head-top height y_top. The
// posture parameter s (0 = seated, 1 = standing) bends the legs.
void build_figure(const Motion& m, double t, double y_top, std::vector<Capsule>& out) {
    out.clear();
    const MotionParams& p = m.params;

    double s = 1.0;  // standing by default
    double x_c = 0.0;
    double leg_phase = 0.0;
    switch (p.kind) {
        case MotionKind::SitToStand:
            s = clamp01((y_top - p.base_height) / p.amplitude);
            break;
        case MotionKind::StandToSit:
            s = clamp01((y_top - p.base_height) / p.amplitude);
            break;
        case MotionKind::Walk:
            x_c = 0.7 * std::sin(2.0 * M_PI * 0.12 * t);
            leg_phase = std::sin(2.0 * M_PI * 1.8 * t);
            break;
        case MotionKind::Reach:
        case MotionKind::Idle:
            break;
    }
    if (p.kind == MotionKind::Idle && p.base_height < 1.45) s = 0.0;  // seated idle

    const double head_r = 0.095;
    const double head_cy = y_top - head_r;
    const double neck_y = y_top - 2.0 * head_r - 0.02;
    const double hip_y = 0.50 * y_top + 0.06 * (1.0 - s);
    const double lean = 0.10 * (1.0 - s);

    // head as a tiny capsule (degenerate segment)
    out.push_back({x_c, head_cy, x_c, head_cy, head_r});
    // torso
    out.push_back({x_c + lean, hip_y, x_c, neck_y, 0.145});

    if (p.kind == MotionKind::Walk) {
        for (int leg = 0; leg < 2; ++leg) {
            const double swing = 0.16 * leg_phase * (leg == 0 ? 1.0 : -1.0);
            const double knee_x = x_c + swing * 0.6;
            const double knee_y = hip_y * 0.55;
            const double ankle_x = x_c + swing;
            out.push_back({x_c, hip_y, knee_x, knee_y, 0.07});
            out.push_back({knee_x, knee_y, ankle_x, 0.05, 0.055});
        }
    } else {
        // knees travel forward as the figure sits
        const double knee_x = x_c + 0.30 * (1.0 - s) + 0.02;
        const double knee_y = hip_y * (0.45 + 0.15 * s);
        out.push_back({x_c + lean, hip_y, knee_x, knee_y, 0.075});
        out.push_back({knee_x, knee_y, knee_x * (1.0 - 0.3 * s), 0.05, 0.055});
    }

    if (p.kind == MotionKind::Reach) {
        const double d = t - p.midpoint;
        const double raise = clamp01(std::exp(-d * d / (2.0 * 0.6 * 0.6)) * 1.4);
        const double hand_y = neck_y + raise * (y_top - neck_y + 0.25);
        out.push_back({x_c + 0.05, neck_y, x_c + 0.22, hand_y, 0.05});
    }
}

}  // namespace

std::vector<ingest::SilhouetteFrame> render_silhouette_frames(const Motion& motion, const Camera& cam) {
    std::vector<ingest::SilhouetteFrame> frames;
    frames.reserve(ingest::kClipFrames);
    const double step = ingest::kClipSeconds / ingest::kClipFrames;
    const double sx = (cam.x_max - cam.x_min) / cam.width;
    const double sy = (cam.y_max - cam.y_min) / cam.height;

    std::vector<Capsule> parts;
    for (int f = 0; f < ingest::kClipFrames; ++f) {
        const double t = f * step;
        // clean posture signal at the nearest box sample
        const int i = std::min<int>(static_cast<int>(std::lround(t * motion.frame_rate)),
                                    static_cast<int>(motion.y_clean.size()) - 1);
        build_figure(motion, t, motion.y_clean[i], parts);

        ingest::SilhouetteFrame frame;
        frame.timestamp = motion.t_offset + t;
        frame.width = cam.width;
        frame.height = cam.height;
        frame.bits.assign(static_cast<std::size_t>(cam.width) * cam.height, 0);

        for (const Capsule& c : parts) {
            const double x_lo = std::min(c.x0, c.x1) - c.r, x_hi = std::max(c.x0, c.x1) + c.r;
            const double y_lo = std::min(c.y0, c.y1) - c.r, y_hi = std::max(c.y0, c.y1) + c.r;
            int col0 = static_cast<int>(std::floor((x_lo - cam.x_min) / sx));
            int col1 = static_cast<int>(std::ceil((x_hi - cam.x_min) / sx));
            int row0 = static_cast<int>(std::floor((cam.y_max - y_hi) / sy));
            int row1 = static_cast<int>(std::ceil((cam.y_max - y_lo) / sy));
            col0 = std::max(col0, 0);
            row0 = std::max(row0, 0);
            col1 = std::min(col1, cam.width - 1);
            row1 = std::min(row1, cam.height - 1);
            const double r2 = c.r * c.r;
            for (int row = row0; row <= row1; ++row) {
                const double wy = cam.y_max - (row + 0.5) * sy;
                for (int col = col0; col <= col1; ++col) {
                    const double wx = cam.x_min + (col + 0.5) * sx;
                    if (dist2_to_segment(wx, wy, c) <= r2) {
                        frame.bits[static_cast<std::size_t>(row) * cam.width + col] = 1;
                    }
                }
            }
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace sts::synth
