#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sts/ingest/types.hpp"

namespace sts::synth {

enum class MotionKind { SitToStand, StandToSit, Walk, Reach, Idle };

std::string kind_name(MotionKind k);
MotionKind kind_from_name(const std::string& name);

// Analytic motion parameters. Transitions use a logistic height profile
// y_top(t) = base + A / (1 + exp(-k (t - t0))), whose derivative peaks at
// exactly A*k/4 at t0; that closed form is the oracle every downstream
// measurement is checked against.
struct MotionParams {
    MotionKind kind = MotionKind::Idle;
    double amplitude = 0.5;    // A, meters (transitions)
    double rate = 4.0;         // k, 1/s (transitions)
    double midpoint = 5.0;     // t0, seconds within the clip
    double base_height = 1.2;  // sitting y_top for transitions, standing height otherwise
    double noise_sigma = 0.0;  // meters, added to the box track only
    std::uint64_t seed = 0;

    void validate() const;
};

struct MotionTruth {
    double v_soa_true = 0.0;     // max vertical speed magnitude
    double peak_time_true = 0.0; // absolute seconds
};

struct Motion {
    MotionParams params;
    ingest::BBox3DTrack track;   // noisy y_top, timestamps offset + i/rate
    std::vector<double> y_clean; // noiseless posture signal, one per box sample
    MotionTruth truth;
    double t_offset = 0.0;
    double frame_rate = 10.0;
    double duration = 10.0;
};

// duration seconds sampled at frame_rate (inclusive endpoint, so a 10 s
// motion at 10 Hz has 101 box samples and spans exactly one clip window).
Motion generate_motion(const MotionParams& params, double frame_rate, double duration,
                       double t_offset = 0.0, const std::string& track_id = "motion");

}  // namespace sts::synth
