#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sts/classifier/types.hpp"
#include "sts/rng.hpp"

namespace sts::clf {

// Balanced epoch sampling: every epoch keeps all Sit-to-Stand and all
// Stand-to-Sit indices and draws a fresh uniform under-sample of "Other" of
// size round(mean(n_sts, n_sts2)), without replacement, reshuffled per epoch.
class BalancedSampler {
public:
    BalancedSampler(const std::vector<StSClass>& labels, std::uint64_t seed) : rng_(seed) {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            switch (labels[i]) {
                case StSClass::SitToStand: sit_to_stand_.push_back(i); break;
                case StSClass::StandToSit: stand_to_sit_.push_back(i); break;
                case StSClass::Other: other_.push_back(i); break;
            }
        }
        if (sit_to_stand_.empty() || stand_to_sit_.empty()) {
            throw ConfigError("balanced sampler: both minority classes must be present");
        }
        other_subset_size_ = static_cast<std::size_t>(
            std::llround(0.5 * (static_cast<double>(sit_to_stand_.size()) +
                                static_cast<double>(stand_to_sit_.size()))));
        if (other_subset_size_ > other_.size()) {
            other_subset_size_ = other_.size();
            undersized_other_ = true;
        }
    }

    std::size_t other_subset_size() const { return other_subset_size_; }
    bool undersized_other() const { return undersized_other_; }

    std::vector<std::size_t> epoch() {
        std::vector<std::size_t> indices;
        indices.reserve(sit_to_stand_.size() + stand_to_sit_.size() + other_subset_size_);
        indices.insert(indices.end(), sit_to_stand_.begin(), sit_to_stand_.end());
        indices.insert(indices.end(), stand_to_sit_.begin(), stand_to_sit_.end());
        const std::vector<std::size_t> picks =
            rng_.sample_without_replacement(other_.size(), other_subset_size_);
        for (std::size_t p : picks) indices.push_back(other_[p]);
        rng_.shuffle(indices);
        return indices;
    }

private:
    Rng rng_;
    std::vector<std::size_t> sit_to_stand_, stand_to_sit_, other_;
    std::size_t other_subset_size_ = 0;
    bool undersized_other_ = false;
};

}  // namespace sts::clf
