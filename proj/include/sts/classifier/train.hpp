#pragma once

#include <string>
#include <vector>

#include "sts/classifier/network.hpp"
#include "sts/classifier/types.hpp"
#include "sts/eval/confusion.hpp"
#include "sts/ingest/types.hpp"

namespace sts::clf {

struct LabeledClip {
    ingest::Clip clip;
    StSClass label = StSClass::Other;
};

struct TrainHyper {
    double learning_rate = 0.02;
    double momentum = 0.9;
    int epochs = 12;
    int batch = 4;
    std::uint64_t seed = 12345;
    int val_subset = 64;  // held-out clips scored per epoch (full set is cross_validate's job)
};

struct EpochLog {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = -1.0;  // -1 when no validation set
};

struct TrainResult {
    std::vector<EpochLog> log;
    bool aborted_non_finite = false;
    std::string last_checkpoint;
};

// Converts packed clip bits to the network's float input tensor.
nn::Tensor5<float> clips_to_tensor(const std::vector<const ingest::Clip*>& batch);

// Balanced-epoch SGD training. The caller owns network initialisation
// (deterministic for a fixed seed: same init + same sampler sequence give
// bitwise-identical checkpoints). Per-epoch checkpoints land in
// checkpoint_dir (when non-empty) as epoch_NNN.ckpt plus model.ckpt for the
// latest good state; a non-finite loss aborts, keeping the last good
// checkpoint.
TrainResult train(Network<float>& net, const std::vector<LabeledClip>& dataset, const TrainHyper& hyper,
                  const std::string& checkpoint_dir = "",
                  const std::vector<LabeledClip>* validation = nullptr);

ClipClassification classify_clip(Network<float>& net, const ingest::Clip& clip);

// Batched inference over a whole set, in input order.
std::vector<ClipClassification> classify_clips(Network<float>& net,
                                               const std::vector<const ingest::Clip*>& clips, int batch = 8);

struct HouseSet {
    std::string name;
    std::vector<LabeledClip> clips;
};

struct FoldResult {
    std::string held_out;
    eval::AccuracyReport report;
};

struct CrossValidationResult {
    std::vector<FoldResult> folds;
    double average_overall = 0.0;
};

// Leave-one-house-out cross-validation: per fold, train on all other houses
// and score every clip of the held-out house.
CrossValidationResult cross_validate(const std::vector<HouseSet>& houses, const NetworkConfig& config,
                                     const TrainHyper& hyper, const std::string& work_dir = "");

}  // namespace sts::clf
