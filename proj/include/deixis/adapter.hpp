#pragma once

#include <array>
#include <optional>
#include <string>

#include <json.hpp>

#include "deixis/geometry.hpp"
#include "deixis/hand.hpp"
#include "deixis/matrix.hpp"

namespace deixis {

inline constexpr int kKeypointDim = 63; // flatten(21 x 3)
inline constexpr double kLayerNormEps = 1e-5;

struct GateConfig {
    double tau = 0.5;
};

/// Keypoint adapter weights: H = W2 * gelu(W1 * LN(flatten(K))). No bias
/// terms on W1/W2; LayerNorm carries the affine parameters.
struct AdapterParams {
    std::size_t d_h = 64;
    std::size_t d = 128;
    Matrix w1;      // d_h x 63
    Matrix w2;      // d x d_h
    Vector ln_gain; // 63
    Vector ln_bias; // 63

    static AdapterParams init(std::size_t d_h, std::size_t d, Rng& rng);
    void check_shapes() const;
};

struct HandIntentToken {
    std::optional<Vector> value; // absent when the gate is closed

    bool present() const { return value.has_value(); }
};

/// GeLU (tanh approximation, coefficient 0.044715) and its derivative.
double gelu(double x);
double gelu_grad(double x);

/// (x - mean) / sqrt(var + eps) * gain + bias, population variance.
Vector layer_norm(const Vector& x, const Vector& gain, const Vector& bias);

Vector flatten_keypoints(const std::array<Vec3, kNumHandKeypoints>& keypoints);

/// Eq.-style gated forward: token present iff confidence >= tau.
HandIntentToken adapter_forward(const AdapterParams& params,
                                const std::array<Vec3, kNumHandKeypoints>& keypoints,
                                double confidence, const GateConfig& gate);

struct AdapterGrads {
    Matrix w1;
    Matrix w2;
    Vector ln_gain;
    Vector ln_bias;
    Vector keypoints; // 63, flattened layout

    void accumulate(const AdapterGrads& other);
    void scale(double s);
};

/// Analytic gradients of <grad_out, H> w.r.t. every parameter and the input.
/// Throws GateClosed when confidence < tau (no token, no gradient).
AdapterGrads adapter_backward(const AdapterParams& params,
                              const std::array<Vec3, kNumHandKeypoints>& keypoints,
                              double confidence, const GateConfig& gate,
                              const Vector& grad_out);

nlohmann::json adapter_to_json(const AdapterParams& params);
AdapterParams adapter_from_json(const nlohmann::json& j);

} // namespace deixis
