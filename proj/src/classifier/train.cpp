#include "sts/classifier/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "sts/classifier/sampler.hpp"
#include "sts/nn/checkpoint.hpp"
#include "sts/nn/dense.hpp"
#include "sts/nn/sgd.hpp"

namespace fs = std::filesystem;

namespace sts::clf {

nn::Tensor5<float> clips_to_tensor(const std::vector<const ingest::Clip*>& batch) {
    const int n = static_cast<int>(batch.size());
    nn::Tensor5<float> x(n, 1, ingest::kClipFrames, ingest::kClipSize, ingest::kClipSize);
    for (int b = 0; b < n; ++b) {
        const ingest::BitVolume& v = batch[b]->frames;
        float* dst = x.channel_ptr(b, 0);
        std::size_t i = 0;
        for (int t = 0; t < ingest::kClipFrames; ++t)
            for (int r = 0; r < ingest::kClipSize; ++r)
                for (int c = 0; c < ingest::kClipSize; ++c, ++i) dst[i] = v.get(t, r, c) ? 1.0f : 0.0f;
    }
    return x;
}

namespace {

double accuracy_of(Network<float>& net, const std::vector<LabeledClip>& set,
                   const std::vector<std::size_t>& indices, int batch) {
    if (indices.empty()) return -1.0;
    long long hits = 0;
    for (std::size_t at = 0; at < indices.size(); at += batch) {
        std::vector<const ingest::Clip*> chunk;
        for (std::size_t i = at; i < std::min(indices.size(), at + batch); ++i)
            chunk.push_back(&set[indices[i]].clip);
        const nn::Tensor5<float> x = clips_to_tensor(chunk);
        const std::vector<float> logits = net.forward(x, false);
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            const float* l = logits.data() + i * 3;
            int best = 0;
            for (int c = 1; c < 3; ++c)
                if (l[c] > l[best]) best = c;
            if (static_cast<StSClass>(best) == set[indices[at + i]].label) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(indices.size());
}

}  // namespace

TrainResult train(Network<float>& net, const std::vector<LabeledClip>& dataset, const TrainHyper& hyper,
                  const std::string& checkpoint_dir, const std::vector<LabeledClip>* validation) {
    TrainResult result;
    if (hyper.epochs == 0) return result;

    std::vector<StSClass> labels(dataset.size());
    for (std::size_t i = 0; i < dataset.size(); ++i) labels[i] = dataset[i].label;
    BalancedSampler sampler(labels, hyper.seed);
    nn::SgdOptimizer<float> opt(static_cast<float>(hyper.learning_rate),
                                static_cast<float>(hyper.momentum));
    const std::vector<nn::Param<float>*> params = net.trainable_params();
    const std::vector<nn::Param<float>*> ckpt_params = net.checkpoint_params();

    std::vector<std::size_t> val_indices;
    if (validation && !validation->empty()) {
        Rng vrng(hyper.seed ^ 0x9e3779b97f4a7c15ull);
        const std::size_t n = std::min<std::size_t>(validation->size(),
                                                    static_cast<std::size_t>(hyper.val_subset));
        val_indices = vrng.sample_without_replacement(validation->size(), n);
        std::sort(val_indices.begin(), val_indices.end());
    }

    if (!checkpoint_dir.empty()) fs::create_directories(checkpoint_dir);

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        const std::vector<std::size_t> order = sampler.epoch();
        double loss_sum = 0.0;
        long long seen = 0, hits = 0;

        for (std::size_t at = 0; at < order.size(); at += hyper.batch) {
            std::vector<const ingest::Clip*> chunk;
            std::vector<int> targets;
            for (std::size_t i = at; i < std::min(order.size(), at + hyper.batch); ++i) {
                chunk.push_back(&dataset[order[i]].clip);
                targets.push_back(static_cast<int>(dataset[order[i]].label));
            }
            const int b = static_cast<int>(chunk.size());
            const nn::Tensor5<float> x = clips_to_tensor(chunk);
            const std::vector<float> logits = net.forward(x, true);
            const std::vector<float> probs = nn::softmax(logits, b, 3);
            const float loss = nn::cross_entropy(probs, targets, 3);
            if (!std::isfinite(loss)) {
                result.aborted_non_finite = true;
                return result;
            }
            loss_sum += static_cast<double>(loss) * b;
            for (int i = 0; i < b; ++i) {
                const float* p = probs.data() + static_cast<std::size_t>(i) * 3;
                int best = 0;
                for (int c = 1; c < 3; ++c)
                    if (p[c] > p[best]) best = c;
                if (best == targets[i]) ++hits;
            }
            seen += b;

            nn::SgdOptimizer<float>::zero_grad(params);
            net.backward(nn::cross_entropy_grad(probs, targets, 3));
            opt.step(params);
        }

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = loss_sum / static_cast<double>(seen);
        log.train_accuracy = static_cast<double>(hits) / static_cast<double>(seen);
        if (validation && !val_indices.empty()) {
            log.val_accuracy = accuracy_of(net, *validation, val_indices, hyper.batch);
        }
        result.log.push_back(log);

        if (!checkpoint_dir.empty()) {
            char name[32];
            std::snprintf(name, sizeof(name), "epoch_%03d.ckpt", epoch);
            const std::string path = (fs::path(checkpoint_dir) / name).string();
            nn::save_checkpoint(path, ckpt_params);
            nn::save_checkpoint((fs::path(checkpoint_dir) / "model.ckpt").string(), ckpt_params);
            result.last_checkpoint = path;
        }
    }
    return result;
}

ClipClassification classify_clip(Network<float>& net, const ingest::Clip& clip) {
    if (clip.frames.frames() != ingest::kClipFrames || clip.frames.height() != ingest::kClipSize ||
        clip.frames.width() != ingest::kClipSize) {
        throw ShapeError("classify_clip: clip tensor is not " + std::to_string(ingest::kClipFrames) + "x" +
                         std::to_string(ingest::kClipSize) + "x" + std::to_string(ingest::kClipSize));
    }
    const nn::Tensor5<float> x = clips_to_tensor({&clip});
    const std::vector<float> logits = net.forward(x, false);
    const std::vector<float> probs = nn::softmax(logits, 1, 3);
    ClipClassification out;
    out.clip_id = clip.clip_id;
    for (int c = 0; c < 3; ++c) out.probabilities[c] = static_cast<double>(probs[c]);
    out.predicted = argmax_class(out.probabilities);
    return out;
}

std::vector<ClipClassification> classify_clips(Network<float>& net,
                                               const std::vector<const ingest::Clip*>& clips, int batch) {
    std::vector<ClipClassification> out;
    out.reserve(clips.size());
    for (std::size_t at = 0; at < clips.size(); at += batch) {
        std::vector<const ingest::Clip*> chunk(clips.begin() + at,
                                               clips.begin() + std::min(clips.size(), at + batch));
        const nn::Tensor5<float> x = clips_to_tensor(chunk);
        const std::vector<float> logits = net.forward(x, false);
        const std::vector<float> probs = nn::softmax(logits, static_cast<int>(chunk.size()), 3);
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            ClipClassification c;
            c.clip_id = chunk[i]->clip_id;
            for (int k = 0; k < 3; ++k) c.probabilities[k] = static_cast<double>(probs[i * 3 + k]);
            c.predicted = argmax_class(c.probabilities);
            out.push_back(std::move(c));
        }
    }
    return out;
}

CrossValidationResult cross_validate(const std::vector<HouseSet>& houses, const NetworkConfig& config,
                                     const TrainHyper& hyper, const std::string& work_dir) {
    if (houses.size() < 2) throw ConfigError("cross_validate: need at least 2 houses");
    CrossValidationResult result;

    for (std::size_t fold = 0; fold < houses.size(); ++fold) {
        std::vector<LabeledClip> train_set;
        for (std::size_t h = 0; h < houses.size(); ++h) {
            if (h == fold) continue;
            train_set.insert(train_set.end(), houses[h].clips.begin(), houses[h].clips.end());
        }
        Network<float> net(config);
        net.init_weights(hyper.seed);
        std::string ckpt_dir;
        if (!work_dir.empty()) {
            ckpt_dir = (fs::path(work_dir) / ("fold_" + houses[fold].name)).string();
        }
        train(net, train_set, hyper, ckpt_dir, &houses[fold].clips);

        std::vector<const ingest::Clip*> eval_clips;
        std::vector<StSClass> truth;
        for (const auto& lc : houses[fold].clips) {
            eval_clips.push_back(&lc.clip);
            truth.push_back(lc.label);
        }
        const std::vector<ClipClassification> preds = classify_clips(net, eval_clips, hyper.batch);
        std::vector<StSClass> predicted(preds.size());
        for (std::size_t i = 0; i < preds.size(); ++i) predicted[i] = preds[i].predicted;

        FoldResult fr;
        fr.held_out = houses[fold].name;
        fr.report = eval::confusion_and_accuracy(truth, predicted);
        result.folds.push_back(std::move(fr));
    }

    double sum = 0.0;
    for (const auto& f : result.folds) sum += f.report.overall;
    result.average_overall = sum / static_cast<double>(result.folds.size());
    return result;
}

}  // namespace sts::clf
