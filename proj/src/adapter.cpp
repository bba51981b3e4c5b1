#include "deixis/adapter.hpp"

#include <cmath>

namespace deixis {

namespace {
constexpr double kGeluCoeff = 0.044715;
const double kSqrt2OverPi = std::sqrt(2.0 / M_PI);
} // namespace

double gelu(double x) {
    const double u = kSqrt2OverPi * (x + kGeluCoeff * x * x * x);
    return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
    const double u = kSqrt2OverPi * (x + kGeluCoeff * x * x * x);
    const double t = std::tanh(u);
    const double du = kSqrt2OverPi * (1.0 + 3.0 * kGeluCoeff * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

AdapterParams AdapterParams::init(std::size_t d_h, std::size_t d, Rng& rng) {
    AdapterParams p;
    p.d_h = d_h;
    p.d = d;
    p.w1 = Matrix::random(d_h, kKeypointDim, rng, 1.0 / std::sqrt(double(kKeypointDim)));
    p.w2 = Matrix::random(d, d_h, rng, 1.0 / std::sqrt(double(d_h)));
    p.ln_gain.assign(kKeypointDim, 1.0);
    p.ln_bias.assign(kKeypointDim, 0.0);
    return p;
}

void AdapterParams::check_shapes() const {
    if (d_h < 1 || d < 1 || w1.rows != d_h || w1.cols != kKeypointDim || w2.rows != d ||
        w2.cols != d_h || ln_gain.size() != kKeypointDim ||
        ln_bias.size() != kKeypointDim) {
        throw ShapeMismatch("adapter parameter shapes are inconsistent");
    }
}

Vector layer_norm(const Vector& x, const Vector& gain, const Vector& bias) {
    const std::size_t n = x.size();
    if (gain.size() != n || bias.size() != n) throw ShapeMismatch("layer_norm sizes");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = (x[i] - mean) * inv_std * gain[i] + bias[i];
    }
    return out;
}

Vector flatten_keypoints(const std::array<Vec3, kNumHandKeypoints>& keypoints) {
    Vector out(kKeypointDim);
    for (int k = 0; k < kNumHandKeypoints; ++k) {
        out[3 * k + 0] = keypoints[k].x;
        out[3 * k + 1] = keypoints[k].y;
        out[3 * k + 2] = keypoints[k].z;
    }
    return out;
}

HandIntentToken adapter_forward(const AdapterParams& params,
                                const std::array<Vec3, kNumHandKeypoints>& keypoints,
                                double confidence, const GateConfig& gate) {
    params.check_shapes();
    if (confidence < gate.tau) return {};

    const Vector k = flatten_keypoints(keypoints);
    const Vector normed = layer_norm(k, params.ln_gain, params.ln_bias);
    Vector hidden = matvec(params.w1, normed);
    for (auto& v : hidden) v = gelu(v);
    HandIntentToken token;
    token.value = matvec(params.w2, hidden);
    return token;
}

void AdapterGrads::accumulate(const AdapterGrads& other) {
    for (std::size_t i = 0; i < w1.data.size(); ++i) w1.data[i] += other.w1.data[i];
    for (std::size_t i = 0; i < w2.data.size(); ++i) w2.data[i] += other.w2.data[i];
    for (std::size_t i = 0; i < ln_gain.size(); ++i) ln_gain[i] += other.ln_gain[i];
    for (std::size_t i = 0; i < ln_bias.size(); ++i) ln_bias[i] += other.ln_bias[i];
    for (std::size_t i = 0; i < keypoints.size(); ++i) keypoints[i] += other.keypoints[i];
}

void AdapterGrads::scale(double s) {
    for (auto& v : w1.data) v *= s;
    for (auto& v : w2.data) v *= s;
    for (auto& v : ln_gain) v *= s;
    for (auto& v : ln_bias) v *= s;
    for (auto& v : keypoints) v *= s;
}

AdapterGrads adapter_backward(const AdapterParams& params,
                              const std::array<Vec3, kNumHandKeypoints>& keypoints,
                              double confidence, const GateConfig& gate,
                              const Vector& grad_out) {
    params.check_shapes();
    if (confidence < gate.tau) {
        throw GateClosed("confidence " + std::to_string(confidence) + " below tau " +
                         std::to_string(gate.tau));
    }
    if (grad_out.size() != params.d) throw ShapeMismatch("grad_out width");

    // forward pass, keeping intermediates
    const Vector k = flatten_keypoints(keypoints);
    const std::size_t n = k.size();
    double mean = 0.0;
    for (double v : k) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : k) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

    Vector xhat(n);
    for (std::size_t i = 0; i < n; ++i) xhat[i] = (k[i] - mean) * inv_std;
    Vector normed(n);
    for (std::size_t i = 0; i < n; ++i) normed[i] = xhat[i] * params.ln_gain[i] + params.ln_bias[i];

    const Vector pre = matvec(params.w1, normed); // d_h
    Vector act(pre.size());
    for (std::size_t i = 0; i < pre.size(); ++i) act[i] = gelu(pre[i]);

    AdapterGrads g;
    g.w1 = Matrix(params.d_h, kKeypointDim);
    g.w2 = Matrix(params.d, params.d_h);
    g.ln_gain.assign(n, 0.0);
    g.ln_bias.assign(n, 0.0);
    g.keypoints.assign(n, 0.0);

    // H = W2 * act
    add_outer(g.w2, grad_out, act);
    Vector d_act = matvec_t(params.w2, grad_out); // d_h

    Vector d_pre(d_act.size());
    for (std::size_t i = 0; i < d_act.size(); ++i) d_pre[i] = d_act[i] * gelu_grad(pre[i]);

    add_outer(g.w1, d_pre, normed);
    Vector d_normed = matvec_t(params.w1, d_pre); // 63

    for (std::size_t i = 0; i < n; ++i) {
        g.ln_gain[i] = d_normed[i] * xhat[i];
        g.ln_bias[i] = d_normed[i];
    }

    // LayerNorm backward with population statistics:
    // dk_i = inv_std * (dxhat_i - mean(dxhat) - xhat_i * mean(dxhat .* xhat))
    Vector d_xhat(n);
    double mean_dxhat = 0.0;
    double mean_dxhat_xhat = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d_xhat[i] = d_normed[i] * params.ln_gain[i];
        mean_dxhat += d_xhat[i];
        mean_dxhat_xhat += d_xhat[i] * xhat[i];
    }
    mean_dxhat /= static_cast<double>(n);
    mean_dxhat_xhat /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.keypoints[i] = inv_std * (d_xhat[i] - mean_dxhat - xhat[i] * mean_dxhat_xhat);
    }
    return g;
}

nlohmann::json adapter_to_json(const AdapterParams& params) {
    return nlohmann::json{{"format_version", 1},
                          {"d_h", params.d_h},
                          {"d", params.d},
                          {"W1", params.w1.data},
                          {"W2", params.w2.data},
                          {"ln_gain", params.ln_gain},
                          {"ln_bias", params.ln_bias}};
}

AdapterParams adapter_from_json(const nlohmann::json& j) {
    AdapterParams p;
    p.d_h = j.at("d_h").get<std::size_t>();
    p.d = j.at("d").get<std::size_t>();
    p.w1 = Matrix(p.d_h, kKeypointDim);
    p.w1.data = j.at("W1").get<std::vector<double>>();
    p.w2 = Matrix(p.d, p.d_h);
    p.w2.data = j.at("W2").get<std::vector<double>>();
    p.ln_gain = j.at("ln_gain").get<std::vector<double>>();
    p.ln_bias = j.at("ln_bias").get<std::vector<double>>();
    p.check_shapes();
    if (p.w1.data.size() != p.d_h * kKeypointDim || p.w2.data.size() != p.d * p.d_h) {
        throw ShapeMismatch("checkpoint weight sizes");
    }
    return p;
}

} // namespace deixis
