#include "deixis/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "deixis/eval.hpp"

namespace deixis {

namespace {

struct ForwardCache {
    Vector h_bar, t_bar, q, w;
    std::vector<std::size_t> vis_idx; // element indices of visual tokens
    Vector alpha;
    Vector pooled;   // attention-pooled visual token
    Vector ctx, readout;
    Vector scores;
    std::size_t key_count = 0;
};

ForwardCache forward(const ToySequenceModel& model, const InterleavedSequence& seq,
                     const std::vector<Vector>& option_embeddings) {
    const std::size_t d = model.d;
    for (const auto& e : option_embeddings) {
        if (e.size() != d) throw WidthMismatch("option embedding width");
    }

    ForwardCache cache;
    cache.h_bar.assign(d, 0.0);
    cache.t_bar.assign(d, 0.0);
    std::size_t n_question = 0;

    const std::size_t answer_start = seq.answer_start();
    for (std::size_t i = 0; i < answer_start; ++i) {
        const auto& e = seq.elements[i];
        if (e.embedding.size() != d) throw WidthMismatch("sequence element width");
        switch (e.kind) {
            case TokenKind::Key:
                axpy(cache.h_bar, 1.0, e.embedding);
                ++cache.key_count;
                break;
            case TokenKind::Question:
                axpy(cache.t_bar, 1.0, e.embedding);
                ++n_question;
                break;
            case TokenKind::Visual:
                cache.vis_idx.push_back(i);
                break;
            default:
                break;
        }
    }
    if (cache.key_count > 0) {
        for (auto& v : cache.h_bar) v /= static_cast<double>(cache.key_count);
    }
    if (n_question > 0) {
        for (auto& v : cache.t_bar) v /= static_cast<double>(n_question);
    }

    cache.q = matvec(model.w_q, cache.h_bar);
    cache.w = matvec_t(model.w_k, cache.q);

    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    Vector logits(cache.vis_idx.size(), 0.0);
    for (std::size_t j = 0; j < cache.vis_idx.size(); ++j) {
        logits[j] = dot(cache.w, seq.elements[cache.vis_idx[j]].embedding) * inv_sqrt_d;
    }
    cache.alpha = softmax(logits);

    cache.pooled.assign(d, 0.0);
    for (std::size_t j = 0; j < cache.vis_idx.size(); ++j) {
        axpy(cache.pooled, cache.alpha[j], seq.elements[cache.vis_idx[j]].embedding);
    }

    cache.ctx = matvec(model.w_c, cache.pooled);
    axpy(cache.ctx, 1.0, matvec(model.w_t, cache.t_bar));
    cache.readout = matvec(model.w_o, cache.ctx);

    cache.scores.resize(option_embeddings.size());
    for (std::size_t o = 0; o < option_embeddings.size(); ++o) {
        cache.scores[o] = dot(option_embeddings[o], cache.readout);
    }
    return cache;
}

std::vector<std::string> tokenize_words(const std::string& text, std::size_t cap) {
    std::vector<std::string> words;
    std::string cur;
    for (char ch : text) {
        if (std::isalnum(static_cast<unsigned char>(ch))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
        } else if (!cur.empty()) {
            words.push_back(cur);
            cur.clear();
            if (words.size() >= cap) return words;
        }
    }
    if (!cur.empty() && words.size() < cap) words.push_back(cur);
    return words;
}

} // namespace

Vector softmax(const Vector& logits) {
    Vector out(logits.size());
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : logits) mx = std::max(mx, v);
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return out;
}

ToySequenceModel ToySequenceModel::init(const ScorerConfig& config, std::uint64_t seed) {
    Rng rng(seed ^ 0x70b5c0deULL);
    ToySequenceModel m;
    m.d = config.d;
    m.gate.tau = config.tau;
    m.adapter = AdapterParams::init(config.d_h, config.d, rng);
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d));
    m.w_q = Matrix::random(config.d, config.d, rng, scale);
    m.w_k = Matrix::random(config.d, config.d, rng, scale);
    m.w_c = Matrix::random(config.d, config.d, rng, scale);
    m.w_t = Matrix::random(config.d, config.d, rng, scale);
    m.w_o = Matrix::random(config.d, config.d, rng, scale);
    return m;
}

Vector identity_embedding(const std::string& text, std::size_t d) {
    Vector out(d, 0.0);
    const std::size_t half = d / 2;
    Rng rng(fnv1a(text));
    const double mag = 1.0 / std::sqrt(static_cast<double>(half));
    for (std::size_t i = 0; i < half; ++i) {
        out[i] = rng.coin() ? mag : -mag;
    }
    return out;
}

ScoringItem make_scoring_item(const ClipRecord& clip, const QAItem& item,
                              const std::vector<SceneFact>& facts,
                              const ScorerConfig& config) {
    ScoringItem si;
    si.qa_id = item.qa_id;
    si.clip_id = item.clip_id;
    si.category = item.category;
    si.gold = item.answer_index;

    for (const auto& word : tokenize_words(item.question, 12)) {
        si.question_tokens.push_back(identity_embedding(word, config.d));
    }

    const std::size_t d = config.d;
    const std::size_t geo = d / 2; // geometry features live in the second half
    const auto frames = frame_sample(clip, config.frames);
    for (int f : frames) {
        VisualTokenBlock block;
        block.frame_index = f;
        const CameraPose& cam = clip.camera_track[f];
        for (const auto& fact : facts) {
            if (static_cast<int>(block.tokens.size()) >= config.n_vis) break;
            const Vec3 cam_c = cam.world_to_camera(fact.centroid);
            if (cam_c.z <= 0.0) continue;
            const double u = cam.intrinsics.cx + cam.intrinsics.fx * cam_c.x / cam_c.z;
            const double v = cam.intrinsics.cy + cam.intrinsics.fy * cam_c.y / cam_c.z;
            if (u < 0 || u >= cam.intrinsics.width || v < 0 || v >= cam.intrinsics.height)
                continue;

            Vector tok = identity_embedding(fact.referring_expression, d);
            const Vec3 dir = cam_c.normalized();
            if (geo + 6 < d) {
                tok[geo + 0] = dir.x;
                tok[geo + 1] = dir.y;
                tok[geo + 2] = dir.z;
                tok[geo + 3] = cam_c.z / 2.0;
                tok[geo + 4] = u / cam.intrinsics.width - 0.5;
                tok[geo + 5] = v / cam.intrinsics.height - 0.5;
                tok[geo + 6] = 1.0; // lets the key projection bias real tokens vs padding
            }
            block.tokens.push_back(std::move(tok));
        }
        while (static_cast<int>(block.tokens.size()) < config.n_vis) {
            block.tokens.emplace_back(d, 0.0);
        }
        si.visual_blocks.push_back(std::move(block));

        const HandPose* pose = clip.hand_track.at_frame(f);
        if (pose != nullptr) {
            si.frame_keypoints.push_back(pose->keypoints);
            si.frame_confidences.push_back(pose->confidence);
        } else {
            si.frame_keypoints.push_back({});
            si.frame_confidences.push_back(0.0);
        }
    }

    for (const auto& opt : item.options) {
        si.option_embeddings.push_back(identity_embedding(opt, config.d));
    }
    return si;
}

InterleavedSequence assemble_sequence(const ToySequenceModel& model,
                                      const ScoringItem& item, bool strip_hand) {
    std::vector<HandIntentToken> hand_tokens;
    hand_tokens.reserve(item.visual_blocks.size());
    for (std::size_t t = 0; t < item.visual_blocks.size(); ++t) {
        if (strip_hand) {
            hand_tokens.emplace_back();
        } else {
            hand_tokens.push_back(adapter_forward(model.adapter, item.frame_keypoints[t],
                                                  item.frame_confidences[t], model.gate));
        }
    }
    const std::vector<Vector> answer_tokens = {Vector(model.d, 0.0)};
    return interleave(item.question_tokens, item.visual_blocks, hand_tokens, answer_tokens);
}

Vector toy_score(const ToySequenceModel& model, const InterleavedSequence& seq,
                 const std::vector<Vector>& option_embeddings) {
    return forward(model, seq, option_embeddings).scores;
}

ModelGrads ModelGrads::zeros(const ToySequenceModel& model) {
    ModelGrads g;
    g.w_q = Matrix(model.d, model.d);
    g.w_k = Matrix(model.d, model.d);
    g.w_c = Matrix(model.d, model.d);
    g.w_t = Matrix(model.d, model.d);
    g.w_o = Matrix(model.d, model.d);
    g.adapter.w1 = Matrix(model.adapter.d_h, kKeypointDim);
    g.adapter.w2 = Matrix(model.adapter.d, model.adapter.d_h);
    g.adapter.ln_gain.assign(kKeypointDim, 0.0);
    g.adapter.ln_bias.assign(kKeypointDim, 0.0);
    g.adapter.keypoints.assign(kKeypointDim, 0.0);
    return g;
}

void ModelGrads::scale(double s) {
    for (auto* m : {&w_q, &w_k, &w_c, &w_t, &w_o}) {
        for (auto& v : m->data) v *= s;
    }
    adapter.scale(s);
}

double batch_loss(const ToySequenceModel& model, const std::vector<ScoringItem>& dataset,
                  bool strip_hand, ModelGrads* grads) {
    const std::size_t d = model.d;
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
    double total_loss = 0.0;

    for (const auto& item : dataset) {
        const InterleavedSequence seq = assemble_sequence(model, item, strip_hand);
        const ForwardCache cache = forward(model, seq, item.option_embeddings);

        const Vector probs = softmax(cache.scores);
        total_loss += -std::log(std::max(probs[item.gold], 1e-300));
        if (grads == nullptr) continue;

        // d(loss)/d(score_o) = p_o - 1[o = gold]
        Vector d_scores = probs;
        d_scores[item.gold] -= 1.0;

        Vector d_readout(d, 0.0);
        for (std::size_t o = 0; o < item.option_embeddings.size(); ++o) {
            axpy(d_readout, d_scores[o], item.option_embeddings[o]);
        }

        add_outer(grads->w_o, d_readout, cache.ctx);
        Vector d_ctx = matvec_t(model.w_o, d_readout);

        add_outer(grads->w_c, d_ctx, cache.pooled);
        Vector d_pooled = matvec_t(model.w_c, d_ctx);
        add_outer(grads->w_t, d_ctx, cache.t_bar);

        // attention backward
        Vector d_alpha(cache.vis_idx.size(), 0.0);
        for (std::size_t j = 0; j < cache.vis_idx.size(); ++j) {
            d_alpha[j] = dot(d_pooled, seq.elements[cache.vis_idx[j]].embedding);
        }
        double alpha_dot = 0.0;
        for (std::size_t j = 0; j < d_alpha.size(); ++j) alpha_dot += cache.alpha[j] * d_alpha[j];
        Vector d_w(d, 0.0);
        for (std::size_t j = 0; j < cache.vis_idx.size(); ++j) {
            const double d_logit = cache.alpha[j] * (d_alpha[j] - alpha_dot);
            axpy(d_w, d_logit * inv_sqrt_d, seq.elements[cache.vis_idx[j]].embedding);
        }

        add_outer(grads->w_k, cache.q, d_w);
        Vector d_q = matvec(model.w_k, d_w);

        add_outer(grads->w_q, d_q, cache.h_bar);

        if (!strip_hand && cache.key_count > 0) {
            Vector d_h_bar = matvec_t(model.w_q, d_q);
            for (auto& v : d_h_bar) v /= static_cast<double>(cache.key_count);
            for (std::size_t t = 0; t < item.visual_blocks.size(); ++t) {
                if (item.frame_confidences[t] < model.gate.tau) continue;
                const AdapterGrads ag =
                    adapter_backward(model.adapter, item.frame_keypoints[t],
                                     item.frame_confidences[t], model.gate, d_h_bar);
                grads->adapter.accumulate(ag);
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(dataset.size());
    if (grads != nullptr) grads->scale(inv_n);
    return total_loss * inv_n;
}

double accuracy(const ToySequenceModel& model, const std::vector<ScoringItem>& dataset,
                bool strip_hand) {
    if (dataset.empty()) return 0.0;
    std::size_t correct = 0;
    for (const auto& item : dataset) {
        const InterleavedSequence seq = assemble_sequence(model, item, strip_hand);
        const Vector scores = toy_score(model, seq, item.option_embeddings);
        const std::size_t best =
            std::max_element(scores.begin(), scores.end()) - scores.begin();
        if (static_cast<int>(best) == item.gold) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(dataset.size());
}

namespace {

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

void adam_update(std::vector<double>& params, const std::vector<double>& grads,
                 AdamState& state, double lr, const TrainConfig& cfg, int step) {
    const double b1t = 1.0 - std::pow(cfg.beta1, step);
    const double b2t = 1.0 - std::pow(cfg.beta2, step);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / b1t;
        const double vhat = state.v[i] / b2t;
        params[i] -= lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
}

} // namespace

TrainResult toy_train(ToySequenceModel& model, const std::vector<ScoringItem>& dataset,
                      const TrainConfig& config) {
    TrainResult result;
    if (dataset.empty()) return result;

    AdamState s_q(model.w_q.data.size());
    AdamState s_k(model.w_k.data.size());
    AdamState s_c(model.w_c.data.size());
    AdamState s_t(model.w_t.data.size());
    AdamState s_o(model.w_o.data.size());
    AdamState s_w1(model.adapter.w1.data.size());
    AdamState s_w2(model.adapter.w2.data.size());
    AdamState s_g(model.adapter.ln_gain.size());
    AdamState s_b(model.adapter.ln_bias.size());

    for (int step = 1; step <= config.steps; ++step) {
        ModelGrads grads = ModelGrads::zeros(model);
        const double loss = batch_loss(model, dataset, config.strip_hand, &grads);
        result.loss_trace.push_back(loss);

        double lr = config.lr;
        if (config.cosine_decay) {
            const double progress = static_cast<double>(step - 1) / config.steps;
            lr = config.lr * (0.55 + 0.45 * std::cos(M_PI * progress));
        }

        adam_update(model.w_q.data, grads.w_q.data, s_q, lr, config, step);
        adam_update(model.w_k.data, grads.w_k.data, s_k, lr, config, step);
        adam_update(model.w_c.data, grads.w_c.data, s_c, lr, config, step);
        adam_update(model.w_t.data, grads.w_t.data, s_t, lr, config, step);
        adam_update(model.w_o.data, grads.w_o.data, s_o, lr, config, step);
        if (!config.strip_hand) {
            adam_update(model.adapter.w1.data, grads.adapter.w1.data, s_w1, lr, config, step);
            adam_update(model.adapter.w2.data, grads.adapter.w2.data, s_w2, lr, config, step);
            adam_update(model.adapter.ln_gain, grads.adapter.ln_gain, s_g, lr, config, step);
            adam_update(model.adapter.ln_bias, grads.adapter.ln_bias, s_b, lr, config, step);
        }
    }
    return result;
}

nlohmann::json model_to_json(const ToySequenceModel& model) {
    return nlohmann::json{{"format_version", 1},
                          {"d", model.d},
                          {"tau", model.gate.tau},
                          {"adapter", adapter_to_json(model.adapter)},
                          {"w_q", model.w_q.data},
                          {"w_k", model.w_k.data},
                          {"w_c", model.w_c.data},
                          {"w_t", model.w_t.data},
                          {"w_o", model.w_o.data}};
}

ToySequenceModel model_from_json(const nlohmann::json& j) {
    ToySequenceModel m;
    m.d = j.at("d").get<std::size_t>();
    m.gate.tau = j.at("tau").get<double>();
    m.adapter = adapter_from_json(j.at("adapter"));
    auto load = [&](Matrix& mat, const char* key) {
        mat = Matrix(m.d, m.d);
        mat.data = j.at(key).get<std::vector<double>>();
        if (mat.data.size() != m.d * m.d) throw ShapeMismatch(std::string(key) + " size");
    };
    load(m.w_q, "w_q");
    load(m.w_k, "w_k");
    load(m.w_c, "w_c");
    load(m.w_t, "w_t");
    load(m.w_o, "w_o");
    return m;
}

} // namespace deixis
