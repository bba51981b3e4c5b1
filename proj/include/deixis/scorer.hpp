#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "deixis/adapter.hpp"
#include "deixis/qa.hpp"
#include "deixis/sequence.hpp"
#include "deixis/synth.hpp"

namespace deixis {

struct ScorerConfig {
    std::size_t d = 64;  // token width of the toy model
    std::size_t d_h = 32;
    int frames = 8;      // uniformly sampled frames per clip
    int n_vis = 12;      // visual tokens per frame, fixed per run
    double tau = 0.5;
};

/// Minimal trainable sequence scorer: a learned query from the pooled key
/// tokens attends over visual tokens; the pooled context is matched
/// bilinearly against each option embedding. All answer-position outputs
/// depend only on elements before the answer tokens.
struct ToySequenceModel {
    std::size_t d = 64;
    GateConfig gate;
    AdapterParams adapter; // trained jointly, from scratch
    Matrix w_q;            // query from pooled key tokens
    Matrix w_k;            // key projection of visual tokens
    Matrix w_c;            // context from attention-pooled visual tokens
    Matrix w_t;            // context from pooled question tokens
    Matrix w_o;            // readout to the option-embedding space

    static ToySequenceModel init(const ScorerConfig& config, std::uint64_t seed);
};

/// Everything needed to score one QA item and backpropagate into the
/// adapter: raw keypoints and confidences per sampled frame.
struct ScoringItem {
    std::string qa_id;
    std::string clip_id;
    TaskCategory category = TaskCategory::Reference;
    std::vector<Vector> question_tokens;
    std::vector<VisualTokenBlock> visual_blocks;
    std::vector<std::array<Vec3, kNumHandKeypoints>> frame_keypoints;
    std::vector<double> frame_confidences;
    std::vector<Vector> option_embeddings;
    int gold = 0;
};

/// Deterministic hash embedding of a string into the first half of a
/// d-vector; the second half is reserved for geometry features.
Vector identity_embedding(const std::string& text, std::size_t d);

ScoringItem make_scoring_item(const ClipRecord& clip, const QAItem& item,
                              const std::vector<SceneFact>& facts,
                              const ScorerConfig& config);

/// Builds the interleaved sequence for an item under the model's current
/// adapter. strip_hand omits every key token (the hand-removal arm).
InterleavedSequence assemble_sequence(const ToySequenceModel& model,
                                      const ScoringItem& item, bool strip_hand);

/// Per-option log-scores; softmax of the result is the option distribution.
Vector toy_score(const ToySequenceModel& model, const InterleavedSequence& seq,
                 const std::vector<Vector>& option_embeddings);

Vector softmax(const Vector& logits);

struct ModelGrads {
    Matrix w_q, w_k, w_c, w_t, w_o;
    AdapterGrads adapter;

    static ModelGrads zeros(const ToySequenceModel& model);
    void scale(double s);
};

/// Mean cross-entropy over the dataset; fills grads when not null.
double batch_loss(const ToySequenceModel& model, const std::vector<ScoringItem>& dataset,
                  bool strip_hand, ModelGrads* grads = nullptr);

double accuracy(const ToySequenceModel& model, const std::vector<ScoringItem>& dataset,
                bool strip_hand);

struct TrainConfig {
    int steps = 300;
    double lr = 5e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    bool strip_hand = false;
    bool cosine_decay = true;
};

struct TrainResult {
    std::vector<double> loss_trace; // full-batch loss before each step
};

/// Full-batch Adam on the cross-entropy over option scores. Deterministic
/// given the model's initial state and the dataset order.
TrainResult toy_train(ToySequenceModel& model, const std::vector<ScoringItem>& dataset,
                      const TrainConfig& config);

nlohmann::json model_to_json(const ToySequenceModel& model);
ToySequenceModel model_from_json(const nlohmann::json& j);

} // namespace deixis
