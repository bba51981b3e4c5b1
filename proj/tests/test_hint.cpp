#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "deixis/eval.hpp"
#include "deixis/scorer.hpp"
#include "deixis/sequence.hpp"

using namespace deixis;

namespace {

// Independent scalar-loop reimplementation of the adapter forward pass.
// Deliberately structured differently from the library path: one fused
// routine over raw arrays in long double.
std::vector<double> adapter_oracle(std::size_t d_h, std::size_t d, const double* w1,
                                   const double* w2, const double* gain,
                                   const double* bias, const double* k) {
    long double mean = 0.0L;
    for (int i = 0; i < 63; ++i) mean += k[i];
    mean /= 63.0L;
    long double var = 0.0L;
    for (int i = 0; i < 63; ++i) var += (k[i] - mean) * (k[i] - mean);
    var /= 63.0L;
    const long double inv_std = 1.0L / sqrtl(var + 1e-5L);

    long double normed[63];
    for (int i = 0; i < 63; ++i) {
        normed[i] = ((long double)k[i] - mean) * inv_std * (long double)gain[i] +
                    (long double)bias[i];
    }

    const long double c = sqrtl(2.0L / M_PIl);
    std::vector<long double> hidden(d_h, 0.0L);
    for (std::size_t r = 0; r < d_h; ++r) {
        long double acc = 0.0L;
        for (int i = 0; i < 63; ++i) acc += (long double)w1[r * 63 + i] * normed[i];
        const long double u = c * (acc + 0.044715L * acc * acc * acc);
        hidden[r] = 0.5L * acc * (1.0L + tanhl(u));
    }

    std::vector<double> out(d, 0.0);
    for (std::size_t r = 0; r < d; ++r) {
        long double acc = 0.0L;
        for (std::size_t i = 0; i < d_h; ++i) acc += (long double)w2[r * d_h + i] * hidden[i];
        out[r] = (double)acc;
    }
    return out;
}

std::array<Vec3, kNumHandKeypoints> random_keypoints(Rng& rng) {
    std::array<Vec3, kNumHandKeypoints> k;
    for (auto& v : k) {
        v = {rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.1, 1.0)};
    }
    return k;
}

Vector random_vector(std::size_t n, Rng& rng) {
    Vector v(n);
    for (auto& x : v) x = rng.uniform(-1, 1);
    return v;
}

VisualTokenBlock block_of(int frame, int n_vis, std::size_t d, Rng& rng) {
    VisualTokenBlock b;
    b.frame_index = frame;
    for (int i = 0; i < n_vis; ++i) b.tokens.push_back(random_vector(d, rng));
    return b;
}

} // namespace

TEST_CASE("layer_norm maps the zero vector to zero") {
    const Vector zeros(63, 0.0);
    const Vector ones(63, 1.0);
    const auto out = layer_norm(zeros, ones, zeros);
    for (double v : out) CHECK(v == 0.0);
}

TEST_CASE("layer_norm normalizes mean and variance") {
    Rng rng(5);
    Vector x(63);
    for (auto& v : x) v = rng.uniform(-3, 3);
    const auto out = layer_norm(x, Vector(63, 1.0), Vector(63, 0.0));
    double mean = 0;
    for (double v : out) mean += v;
    mean /= 63;
    double var = 0;
    for (double v : out) var += (v - mean) * (v - mean);
    var /= 63;
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("layer_norm matches a scalar-loop oracle") {
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        Vector x(63), g(63), b(63);
        for (auto& v : x) v = rng.uniform(-2, 2);
        for (auto& v : g) v = rng.uniform(0.5, 1.5);
        for (auto& v : b) v = rng.uniform(-0.5, 0.5);
        const auto lib = layer_norm(x, g, b);

        long double mean = 0;
        for (double v : x) mean += v;
        mean /= 63;
        long double var = 0;
        for (double v : x) var += ((long double)v - mean) * ((long double)v - mean);
        var /= 63;
        for (int i = 0; i < 63; ++i) {
            const long double want =
                ((long double)x[i] - mean) / sqrtl(var + 1e-5L) * (long double)g[i] +
                (long double)b[i];
            CHECK(std::fabs(lib[i] - (double)want) < 1e-9);
        }
    }
}

TEST_CASE("adapter gate: low confidence yields no token") {
    Rng rng(2);
    const auto params = AdapterParams::init(4, 8, rng);
    const auto k = random_keypoints(rng);
    CHECK(!adapter_forward(params, k, 0.3, {0.5}).present());
    CHECK(adapter_forward(params, k, 0.5, {0.5}).present()); // c == tau passes (>=)
}

TEST_CASE("zero keypoints with identity LayerNorm give a zero token") {
    Rng rng(3);
    auto params = AdapterParams::init(4, 8, rng);
    params.ln_gain.assign(63, 1.0);
    params.ln_bias.assign(63, 0.0);
    std::array<Vec3, kNumHandKeypoints> zeros{};
    const auto token = adapter_forward(params, zeros, 0.9, {0.5});
    REQUIRE(token.present());
    for (double v : *token.value) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("adapter_forward matches the independent scalar-loop oracle") {
    Rng rng(23);
    for (int trial = 0; trial < 30; ++trial) {
        auto params = AdapterParams::init(4, 8, rng);
        for (auto& v : params.ln_gain) v = rng.uniform(0.5, 1.5);
        for (auto& v : params.ln_bias) v = rng.uniform(-0.3, 0.3);
        const auto k = random_keypoints(rng);
        const auto token = adapter_forward(params, k, 0.8, {0.5});
        REQUIRE(token.present());

        const auto flat = flatten_keypoints(k);
        const auto want =
            adapter_oracle(4, 8, params.w1.data.data(), params.w2.data.data(),
                           params.ln_gain.data(), params.ln_bias.data(), flat.data());
        for (std::size_t i = 0; i < want.size(); ++i) {
            CHECK(std::fabs((*token.value)[i] - want[i]) < 1e-9);
        }
    }
}

TEST_CASE("adapter is linear in W2") {
    Rng rng(31);
    auto params = AdapterParams::init(6, 10, rng);
    const auto k = random_keypoints(rng);
    const auto base = adapter_forward(params, k, 0.9, {0.5});
    for (auto& v : params.w2.data) v *= 2.0;
    const auto doubled = adapter_forward(params, k, 0.9, {0.5});
    for (std::size_t i = 0; i < base.value->size(); ++i) {
        CHECK((*doubled.value)[i] == doctest::Approx(2.0 * (*base.value)[i]));
    }
}

TEST_CASE("adapter_backward matches central finite differences") {
    Rng rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d_h = 2 + rng.index(5);
        const std::size_t d = 2 + rng.index(7);
        auto params = AdapterParams::init(d_h, d, rng);
        for (auto& v : params.ln_gain) v = rng.uniform(0.5, 1.5);
        for (auto& v : params.ln_bias) v = rng.uniform(-0.3, 0.3);
        auto k = random_keypoints(rng);
        const auto grad_out = random_vector(d, rng);

        const auto grads = adapter_backward(params, k, 0.9, {0.5}, grad_out);
        auto loss_params = [&](const AdapterParams& p) {
            return dot(*adapter_forward(p, k, 0.9, {0.5}).value, grad_out);
        };
        const double h = 1e-5;
        auto check_rel = [&](double fd, double an) {
            const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
            CHECK(std::fabs(fd - an) / denom < 1e-4);
        };

        for (int probe = 0; probe < 4; ++probe) {
            {
                const std::size_t i = rng.index(params.w1.data.size());
                auto p = params, m = params;
                p.w1.data[i] += h;
                m.w1.data[i] -= h;
                check_rel((loss_params(p) - loss_params(m)) / (2 * h), grads.w1.data[i]);
            }
            {
                const std::size_t i = rng.index(params.w2.data.size());
                auto p = params, m = params;
                p.w2.data[i] += h;
                m.w2.data[i] -= h;
                check_rel((loss_params(p) - loss_params(m)) / (2 * h), grads.w2.data[i]);
            }
            {
                const std::size_t i = rng.index(63);
                auto p = params, m = params;
                p.ln_gain[i] += h;
                m.ln_gain[i] -= h;
                check_rel((loss_params(p) - loss_params(m)) / (2 * h), grads.ln_gain[i]);
                auto pb = params, mb = params;
                pb.ln_bias[i] += h;
                mb.ln_bias[i] -= h;
                check_rel((loss_params(pb) - loss_params(mb)) / (2 * h), grads.ln_bias[i]);
            }
            {
                // input gradient: perturb one keypoint coordinate
                const std::size_t i = rng.index(63);
                auto kp = k, km = k;
                double* coords_p = &kp[i / 3].x;
                double* coords_m = &km[i / 3].x;
                coords_p[i % 3] += h;
                coords_m[i % 3] -= h;
                const double fd = (dot(*adapter_forward(params, kp, 0.9, {0.5}).value,
                                       grad_out) -
                                   dot(*adapter_forward(params, km, 0.9, {0.5}).value,
                                       grad_out)) /
                                  (2 * h);
                check_rel(fd, grads.keypoints[i]);
            }
        }
    }
}

TEST_CASE("adapter_backward zero upstream gradient gives zero gradients") {
    Rng rng(43);
    const auto params = AdapterParams::init(4, 8, rng);
    const auto k = random_keypoints(rng);
    const auto grads = adapter_backward(params, k, 0.9, {0.5}, Vector(8, 0.0));
    for (double v : grads.w1.data) CHECK(v == 0.0);
    for (double v : grads.w2.data) CHECK(v == 0.0);
    for (double v : grads.keypoints) CHECK(v == 0.0);
}

TEST_CASE("adapter_backward refuses a closed gate") {
    Rng rng(44);
    const auto params = AdapterParams::init(4, 8, rng);
    const auto k = random_keypoints(rng);
    CHECK_THROWS_AS(adapter_backward(params, k, 0.2, {0.5}, Vector(8, 1.0)), GateClosed);
}

TEST_CASE("interleave gates key tokens per frame") {
    Rng rng(51);
    const std::size_t d = 8;
    const auto params = AdapterParams::init(4, d, rng);
    const GateConfig gate{0.5};
    const auto k = random_keypoints(rng);

    std::vector<VisualTokenBlock> blocks = {block_of(0, 3, d, rng), block_of(1, 3, d, rng)};
    std::vector<HandIntentToken> hands = {adapter_forward(params, k, 0.9, gate),
                                          adapter_forward(params, k, 0.2, gate)};
    const auto seq = interleave({random_vector(d, rng)}, blocks, hands,
                                {random_vector(d, rng)});
    CHECK(seq.key_token_count() == 1);

    // the key token sits immediately after its frame's visual block
    bool found = false;
    for (std::size_t i = 0; i < seq.elements.size(); ++i) {
        if (seq.elements[i].kind == TokenKind::Key) {
            found = true;
            CHECK(seq.elements[i].frame_index == 0);
            REQUIRE(i >= 1);
            CHECK(seq.elements[i - 1].kind == TokenKind::Visual);
            CHECK(seq.elements[i - 1].frame_index == 0);
        }
    }
    CHECK(found);
}

TEST_CASE("interleave with all hand tokens absent matches the baseline layout") {
    Rng rng(52);
    const std::size_t d = 8;
    std::vector<VisualTokenBlock> blocks = {block_of(0, 2, d, rng), block_of(1, 2, d, rng)};
    const auto question = std::vector<Vector>{random_vector(d, rng)};
    const auto answer = std::vector<Vector>{random_vector(d, rng)};
    const auto seq =
        interleave(question, blocks, {HandIntentToken{}, HandIntentToken{}}, answer);
    CHECK(seq.key_token_count() == 0);
    CHECK(seq.length() == 1 + 4 + 1);
    for (const auto& e : seq.elements) CHECK(e.kind != TokenKind::Key);
}

TEST_CASE("interleave token accounting at the evaluation shape") {
    Rng rng(53);
    const std::size_t d = 2; // width is irrelevant to the counts
    std::vector<VisualTokenBlock> blocks;
    std::vector<HandIntentToken> hands;
    for (int t = 0; t < 32; ++t) {
        blocks.push_back(block_of(t, 256, d, rng));
        hands.push_back(HandIntentToken{Vector(d, 0.1)});
    }
    std::vector<Vector> question(30, Vector(d, 0.0));
    std::vector<Vector> answer(10, Vector(d, 0.0));
    const auto seq = interleave(question, blocks, hands, answer);
    CHECK(seq.key_token_count() == 32);
    CHECK(seq.length() == 32 * 256 + 32 + 40);
    CHECK(token_overhead(seq) == doctest::Approx(32.0 / 8264.0));
    CHECK(token_overhead(seq) < 0.01);
}

TEST_CASE("token_overhead degenerate cases") {
    CHECK(token_overhead(InterleavedSequence{}) == 0.0);
    Rng rng(99);
    const std::size_t d = 2;
    std::vector<VisualTokenBlock> blocks;
    std::vector<HandIntentToken> hands;
    for (int t = 0; t < 32; ++t) {
        blocks.push_back(block_of(t, 4, d, rng));
        hands.push_back(HandIntentToken{Vector(d, 0.5)}); // tau = 0: gate fully open
    }
    const auto seq = interleave({}, blocks, hands, {});
    CHECK(seq.key_token_count() == 32);
}

TEST_CASE("interleave validates lengths and ordering") {
    Rng rng(54);
    const std::size_t d = 4;
    std::vector<VisualTokenBlock> blocks = {block_of(0, 2, d, rng)};
    CHECK_THROWS_AS(interleave({}, blocks, {}, {}), LengthMismatch);
    std::vector<VisualTokenBlock> bad = {block_of(1, 2, d, rng), block_of(0, 2, d, rng)};
    CHECK_THROWS_AS(interleave({}, bad, {HandIntentToken{}, HandIntentToken{}}, {}),
                    LengthMismatch);
}

TEST_CASE("gating biconditional and tau monotonicity") {
    Rng rng(55);
    const std::size_t d = 6;
    const auto params = AdapterParams::init(3, d, rng);

    std::vector<double> confidences;
    for (int i = 0; i < 1000; ++i) confidences.push_back(rng.uniform());

    std::size_t prev_count = confidences.size() + 1;
    for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const GateConfig gate{tau};
        std::vector<VisualTokenBlock> blocks;
        std::vector<HandIntentToken> hands;
        const auto k = random_keypoints(rng);
        for (std::size_t t = 0; t < confidences.size(); ++t) {
            blocks.push_back({static_cast<int>(t), {Vector(d, 0.0)}});
            hands.push_back(adapter_forward(params, k, confidences[t], gate));
        }
        const auto seq = interleave({}, blocks, hands, {});

        std::size_t expected = 0;
        for (double c : confidences) {
            if (c >= tau) ++expected;
        }
        CHECK(seq.key_token_count() == expected); // KeyToken present iff c >= tau
        CHECK(seq.key_token_count() <= prev_count);
        prev_count = seq.key_token_count();
    }
}

namespace {

ScoringItem synthetic_item(Rng& rng, std::size_t d, int frames, int n_vis, int options) {
    ScoringItem item;
    item.gold = static_cast<int>(rng.index(options));
    item.question_tokens = {random_vector(d, rng), random_vector(d, rng)};
    for (int t = 0; t < frames; ++t) {
        item.visual_blocks.push_back(block_of(t, n_vis, d, rng));
        item.frame_keypoints.push_back(random_keypoints(rng));
        item.frame_confidences.push_back(rng.uniform(0.4, 1.0));
    }
    for (int o = 0; o < options; ++o) item.option_embeddings.push_back(random_vector(d, rng));
    return item;
}

} // namespace

TEST_CASE("toy_score: permuting options permutes scores") {
    Rng rng(61);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    auto model = ToySequenceModel::init(cfg, 9);
    auto item = synthetic_item(rng, cfg.d, 3, 4, 5);
    const auto seq = assemble_sequence(model, item, false);

    const auto scores = toy_score(model, seq, item.option_embeddings);
    auto permuted = item.option_embeddings;
    std::swap(permuted[0], permuted[3]);
    const auto scores2 = toy_score(model, seq, permuted);
    CHECK(scores2[0] == doctest::Approx(scores[3]));
    CHECK(scores2[3] == doctest::Approx(scores[0]));
    CHECK(scores2[1] == doctest::Approx(scores[1]));
}

TEST_CASE("toy_score probabilities sum to one") {
    Rng rng(62);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    auto model = ToySequenceModel::init(cfg, 10);
    auto item = synthetic_item(rng, cfg.d, 3, 4, 5);
    const auto seq = assemble_sequence(model, item, false);
    const auto probs = softmax(toy_score(model, seq, item.option_embeddings));
    double sum = 0;
    for (double p : probs) sum += p;
    CHECK(std::fabs(sum - 1.0) < 1e-9);
}

TEST_CASE("toy_score rejects mismatched widths") {
    Rng rng(67);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    auto model = ToySequenceModel::init(cfg, 14);
    auto item = synthetic_item(rng, cfg.d, 2, 3, 4);
    const auto seq = assemble_sequence(model, item, false);
    std::vector<Vector> bad_options = {Vector(8, 0.0)};
    CHECK_THROWS_AS(toy_score(model, seq, bad_options), WidthMismatch);
}

TEST_CASE("removing key tokens changes the context iff any were present") {
    Rng rng(63);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    auto model = ToySequenceModel::init(cfg, 11);

    auto item = synthetic_item(rng, cfg.d, 3, 4, 5);
    item.frame_confidences = {0.9, 0.8, 0.7}; // all gates open
    const auto with = toy_score(model, assemble_sequence(model, item, false),
                                item.option_embeddings);
    const auto without = toy_score(model, assemble_sequence(model, item, true),
                                   item.option_embeddings);
    bool differs = false;
    for (std::size_t i = 0; i < with.size(); ++i) {
        if (std::fabs(with[i] - without[i]) > 1e-12) differs = true;
    }
    CHECK(differs);

    item.frame_confidences = {0.1, 0.1, 0.1}; // no tokens pass the gate
    const auto gated = toy_score(model, assemble_sequence(model, item, false),
                                 item.option_embeddings);
    const auto stripped = toy_score(model, assemble_sequence(model, item, true),
                                    item.option_embeddings);
    for (std::size_t i = 0; i < gated.size(); ++i) {
        CHECK(gated[i] == doctest::Approx(stripped[i]));
    }
}

TEST_CASE("scores are invariant to modifications at and after the answer position") {
    Rng rng(64);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    auto model = ToySequenceModel::init(cfg, 12);
    auto item = synthetic_item(rng, cfg.d, 3, 4, 5);
    auto seq = assemble_sequence(model, item, false);
    const auto before = toy_score(model, seq, item.option_embeddings);

    for (auto& e : seq.elements) {
        if (e.kind == TokenKind::Answer) {
            for (auto& v : e.embedding) v = rng.uniform(-5, 5);
        }
    }
    const auto after = toy_score(model, seq, item.option_embeddings);
    for (std::size_t i = 0; i < before.size(); ++i) {
        CHECK(before[i] == after[i]);
    }
}

TEST_CASE("toy_train is deterministic and memorizes a single item") {
    Rng rng(65);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    std::vector<ScoringItem> data = {synthetic_item(rng, cfg.d, 2, 3, 5)};

    TrainConfig tc;
    tc.steps = 500;
    tc.lr = 1e-2;

    auto m1 = ToySequenceModel::init(cfg, 77);
    auto m2 = ToySequenceModel::init(cfg, 77);
    const auto t1 = toy_train(m1, data, tc);
    const auto t2 = toy_train(m2, data, tc);
    CHECK(m1.w_q.data == m2.w_q.data);
    CHECK(m1.adapter.w1.data == m2.adapter.w1.data);
    CHECK(t1.loss_trace == t2.loss_trace);
    CHECK(t1.loss_trace.back() < 0.01);
}

TEST_CASE("training loss trace is monotone on its 10-step moving average") {
    Rng rng(68);
    ScorerConfig cfg;
    cfg.d = 16;
    cfg.d_h = 8;
    std::vector<ScoringItem> data;
    for (int i = 0; i < 12; ++i) data.push_back(synthetic_item(rng, cfg.d, 2, 3, 5));

    auto model = ToySequenceModel::init(cfg, 21);
    TrainConfig tc;
    tc.steps = 120;
    const auto trace = toy_train(model, data, tc).loss_trace;

    auto moving = [&](std::size_t end) {
        double s = 0;
        for (std::size_t i = end - 10; i < end; ++i) s += trace[i];
        return s / 10.0;
    };
    for (std::size_t end = 11; end <= trace.size(); ++end) {
        CHECK(moving(end) <= moving(end - 1) + 1e-9);
    }
}

TEST_CASE("full training gradient matches finite differences on a 3-item batch") {
    Rng rng(66);
    ScorerConfig cfg;
    cfg.d = 10;
    cfg.d_h = 5;
    auto model = ToySequenceModel::init(cfg, 13);
    std::vector<ScoringItem> data = {synthetic_item(rng, cfg.d, 2, 3, 4),
                                     synthetic_item(rng, cfg.d, 2, 3, 4),
                                     synthetic_item(rng, cfg.d, 2, 3, 4)};

    ModelGrads grads = ModelGrads::zeros(model);
    batch_loss(model, data, false, &grads);

    const double h = 1e-5;
    auto check_rel = [&](double fd, double an) {
        const double denom = std::max({std::fabs(fd), std::fabs(an), 1e-6});
        CHECK(std::fabs(fd - an) / denom < 1e-3);
    };
    auto probe_matrix = [&](Matrix ToySequenceModel::*member, const Matrix& g) {
        for (int probe = 0; probe < 5; ++probe) {
            const std::size_t i = rng.index(g.data.size());
            auto plus = model, minus = model;
            (plus.*member).data[i] += h;
            (minus.*member).data[i] -= h;
            const double fd =
                (batch_loss(plus, data, false) - batch_loss(minus, data, false)) / (2 * h);
            check_rel(fd, g.data[i]);
        }
    };
    probe_matrix(&ToySequenceModel::w_q, grads.w_q);
    probe_matrix(&ToySequenceModel::w_k, grads.w_k);
    probe_matrix(&ToySequenceModel::w_c, grads.w_c);
    probe_matrix(&ToySequenceModel::w_t, grads.w_t);
    probe_matrix(&ToySequenceModel::w_o, grads.w_o);

    // adapter weights, reached through the key tokens
    for (int probe = 0; probe < 5; ++probe) {
        const std::size_t i = rng.index(model.adapter.w1.data.size());
        auto plus = model, minus = model;
        plus.adapter.w1.data[i] += h;
        minus.adapter.w1.data[i] -= h;
        const double fd =
            (batch_loss(plus, data, false) - batch_loss(minus, data, false)) / (2 * h);
        check_rel(fd, grads.adapter.w1.data[i]);
    }
}

TEST_CASE("model checkpoint round trip") {
    ScorerConfig cfg;
    cfg.d = 12;
    cfg.d_h = 6;
    const auto model = ToySequenceModel::init(cfg, 99);
    const auto j = model_to_json(model);
    const auto back = model_from_json(j);
    CHECK(back.w_q.data == model.w_q.data);
    CHECK(back.adapter.w2.data == model.adapter.w2.data);
    CHECK(back.gate.tau == model.gate.tau);
    CHECK(model_to_json(back).dump() == j.dump());
}

TEST_CASE("adapter checkpoint rejects inconsistent shapes") {
    Rng rng(7);
    auto j = adapter_to_json(AdapterParams::init(4, 8, rng));
    j["d_h"] = 5; // now W1 no longer matches
    CHECK_THROWS_AS(adapter_from_json(j), ShapeMismatch);
}
