#pragma once

#include <string>
#include <vector>

#include "sts/errors.hpp"

namespace sts::clf {

// Class order is part of the contract: ties in argmax break towards the
// earlier class.
enum class StSClass : int { SitToStand = 0, StandToSit = 1, Other = 2 };

inline std::string class_name(StSClass c) {
    switch (c) {
        case StSClass::SitToStand: return "Sit-to-Stand";
        case StSClass::StandToSit: return "Stand-to-Sit";
        default: return "Other";
    }
}

inline StSClass class_from_name(const std::string& name) {
    if (name == "Sit-to-Stand") return StSClass::SitToStand;
    if (name == "Stand-to-Sit") return StSClass::StandToSit;
    if (name == "Other") return StSClass::Other;
    throw FormatError("unknown class label '" + name + "'");
}

struct ClipClassification {
    std::string clip_id;
    StSClass predicted = StSClass::Other;
    double probabilities[3] = {0, 0, 0};  // class order, sums to 1
};

inline StSClass argmax_class(const double probs[3]) {
    int best = 0;
    for (int c = 1; c < 3; ++c) {
        if (probs[c] > probs[best]) best = c;
    }
    return static_cast<StSClass>(best);
}

// Architecture description. The default mirrors the production network:
// four Inception stacks (16/32/64/128 filters), a 25x512 feature sequence
// into a 128-unit LSTM and a 3-way dense softmax head. Smaller configs are
// used by tests.
struct NetworkConfig {
    int input_t = 100, input_h = 100, input_w = 100;
    std::vector<int> stack_filters = {16, 32, 64, 128};
    int lstm_units = 128;
    int classes = 3;
    int pseudo_time_steps = 25;
    int feature_dim = 512;

    void validate() const;  // throws ConfigError explaining the arithmetic
};

struct LabelRow {
    std::string clip_id;
    double t_start = 0.0;
    double t_end = 0.0;
    StSClass label = StSClass::Other;
};

std::vector<LabelRow> load_labels(const std::string& path);
std::string labels_to_csv(const std::vector<LabelRow>& rows);

std::string classifications_to_csv(const std::vector<ClipClassification>& rows);
std::vector<ClipClassification> classifications_from_csv(const std::string& path);

}  // namespace sts::clf
