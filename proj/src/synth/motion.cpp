#include "sts/synth/motion.hpp"

#include <cmath>

#include "sts/errors.hpp"
#include "sts/rng.hpp"

namespace sts::synth {

namespace {
constexpr double kWalkBob = 0.02;        // vertical bob amplitude, m
constexpr double kWalkBobHz = 1.8;       // steps per second
constexpr double kWalkSwayHz = 0.12;     // lateral room crossing
constexpr double kWalkSway = 0.7;        // m
constexpr double kReachAmplitude = 0.16; // m
constexpr double kReachSigma = 0.6;      // s

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }
}  // namespace

std::string kind_name(MotionKind k) {
    switch (k) {
        case MotionKind::SitToStand: return "SitToStand";
        case MotionKind::StandToSit: return "StandToSit";
        case MotionKind::Walk: return "Walk";
        case MotionKind::Reach: return "Reach";
        default: return "Idle";
    }
}

MotionKind kind_from_name(const std::string& name) {
    if (name == "SitToStand") return MotionKind::SitToStand;
    if (name == "StandToSit") return MotionKind::StandToSit;
    if (name == "Walk") return MotionKind::Walk;
    if (name == "Reach") return MotionKind::Reach;
    if (name == "Idle") return MotionKind::Idle;
    throw FormatError("unknown motion kind '" + name + "'");
}

void MotionParams::validate() const {
    const bool transition = kind == MotionKind::SitToStand || kind == MotionKind::StandToSit;
    if (transition && (amplitude <= 0.0 || rate <= 0.0)) {
        throw ConfigError("motion: transition kinds need amplitude > 0 and rate > 0");
    }
    if (noise_sigma < 0.0) throw ConfigError("motion: noise_sigma must be >= 0");
}

Motion generate_motion(const MotionParams& params, double frame_rate, double duration, double t_offset,
                       const std::string& track_id) {
    params.validate();
    Motion m;
    m.params = params;
    m.t_offset = t_offset;
    m.frame_rate = frame_rate;
    m.duration = duration;
    m.track.track_id = track_id;

    const int n = static_cast<int>(std::lround(duration * frame_rate)) + 1;
    m.y_clean.resize(n);
    m.track.boxes.resize(n);

    Rng rng(params.seed);
    double max_abs_dy = 0.0;
    double peak_local = params.midpoint;

    for (int i = 0; i < n; ++i) {
        const double t = i / frame_rate;
        double y = params.base_height;
        double x_c = 0.0;
        switch (params.kind) {
            case MotionKind::SitToStand:
                y += params.amplitude * logistic(params.rate * (t - params.midpoint));
                break;
            case MotionKind::StandToSit:
                y += params.amplitude * logistic(-params.rate * (t - params.midpoint));
                break;
            case MotionKind::Walk: {
                y += kWalkBob * std::sin(2.0 * M_PI * kWalkBobHz * t);
                x_c = kWalkSway * std::sin(2.0 * M_PI * kWalkSwayHz * t);
                break;
            }
            case MotionKind::Reach: {
                const double d = t - params.midpoint;
                y += kReachAmplitude * std::exp(-d * d / (2.0 * kReachSigma * kReachSigma));
                break;
            }
            case MotionKind::Idle:
                break;
        }
        m.y_clean[i] = y;

        ingest::BBox3D& b = m.track.boxes[i];
        b.timestamp = t_offset + t;
        b.x1 = x_c + 0.28;
        b.x2 = x_c - 0.28;
        b.y1 = y + (params.noise_sigma > 0.0 ? rng.normal(0.0, params.noise_sigma) : 0.0);
        b.y2 = 0.0;
        b.z1 = 0.25;
        b.z2 = -0.25;
        if (b.y1 < b.y2) b.y1 = b.y2;  // noise must not break the top>=bottom invariant
    }

    switch (params.kind) {
        case MotionKind::SitToStand:
        case MotionKind::StandToSit:
            m.truth.v_soa_true = params.amplitude * params.rate / 4.0;
            break;
        case MotionKind::Walk:
            m.truth.v_soa_true = kWalkBob * 2.0 * M_PI * kWalkBobHz;
            peak_local = 0.25 / kWalkBobHz;
            break;
        case MotionKind::Reach:
            // derivative of the Gaussian bump peaks one sigma before the midpoint
            m.truth.v_soa_true = kReachAmplitude / kReachSigma * std::exp(-0.5);
            peak_local = params.midpoint - kReachSigma;
            break;
        case MotionKind::Idle:
            m.truth.v_soa_true = 0.0;
            peak_local = 0.0;
            break;
    }
    m.truth.peak_time_true = t_offset + peak_local;
    return m;
}

}  // namespace sts::synth
