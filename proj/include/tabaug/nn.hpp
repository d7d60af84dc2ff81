#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tabaug/rng.hpp"

namespace tabaug {

/// Dense row-major numeric array with an explicit shape. The first shape
/// entry is always the batch dimension.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::vector<std::size_t> s, double fill = 0.0);

    std::size_t size() const { return values.size(); }
    std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }
    /// Elements per batch sample.
    std::size_t sampleSize() const;
    bool sameShape(const Tensor& other) const { return shape == other.shape; }
};

enum class Activation { Relu, LeakyRelu, Sigmoid, Tanh };

struct LayerSpec {
    enum class Kind {
        Dense,
        Conv2d,
        ConvTranspose2d,
        MaskedConv2d,
        Act,
        Flatten,
        Reshape,
    };

    Kind kind = Kind::Dense;
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t inChannels = 0;
    std::size_t outChannels = 0;
    std::size_t kernel = 0;
    std::size_t stride = 1;
    std::size_t pad = 0;
    /// Mask B includes the center pixel, mask A does not.
    bool maskIncludesCenter = false;
    Activation activation = Activation::Relu;
    double leak = 0.01;
    /// Target sample shape (without the batch dimension) for Reshape.
    std::vector<std::size_t> targetShape;
};

namespace layers {
LayerSpec dense(std::size_t in, std::size_t out);
LayerSpec conv2d(std::size_t inChannels, std::size_t outChannels,
                 std::size_t kernel, std::size_t stride = 1, std::size_t pad = 0);
LayerSpec convTranspose2d(std::size_t inChannels, std::size_t outChannels,
                          std::size_t kernel, std::size_t stride = 1,
                          std::size_t pad = 0);
LayerSpec maskedConv2d(std::size_t inChannels, std::size_t outChannels,
                       std::size_t kernel, bool includeCenter);
LayerSpec relu();
LayerSpec leakyRelu(double leak = 0.01);
LayerSpec sigmoid();
LayerSpec tanhAct();
LayerSpec flatten();
LayerSpec reshape(std::vector<std::size_t> targetShape);
}  // namespace layers

struct NetworkSpec {
    std::vector<LayerSpec> layers;
    std::uint64_t seed = 0;
};

/// Stable hash of the architecture (not the seed), used to pair checkpoints
/// with the spec they were trained under.
std::uint64_t specHash(const NetworkSpec& spec);

std::string specToJson(const NetworkSpec& spec);
NetworkSpec specFromJson(const std::string& text);

/// Feed-forward stack over a flat, contiguous parameter buffer. Forward in
/// training mode caches per-layer inputs; backward consumes those caches,
/// accumulates parameter gradients and returns the gradient with respect to
/// the network input.
class Network {
public:
    Network() = default;
    explicit Network(NetworkSpec spec);

    Tensor forward(const Tensor& input);
    /// Cache-free forward pass usable on a frozen, shared network.
    Tensor infer(const Tensor& input) const;
    Tensor backward(const Tensor& outputGrad);
    void zeroGrad();

    std::size_t paramCount() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    std::span<double> grads() { return grads_; }
    std::span<const double> grads() const { return grads_; }
    const NetworkSpec& spec() const { return spec_; }

    std::vector<std::size_t> outputShape(
        const std::vector<std::size_t>& inputShape) const;

private:
    struct Slot {
        std::size_t offset = 0;
        std::size_t count = 0;
    };

    Tensor runLayer(std::size_t layer, const Tensor& input, bool cache);
    Tensor runLayerBackward(std::size_t layer, const Tensor& outputGrad);

    NetworkSpec spec_;
    std::vector<Slot> slots_;
    std::vector<double> params_;
    std::vector<double> grads_;
    std::vector<Tensor> cachedInputs_;
    bool hasCache_ = false;
};

enum class LossKind { Bce, Ce, Mse };

struct LossResult {
    double value = 0.0;
    Tensor grad;
};

/// Mean loss over the batch plus its gradient with respect to `prediction`.
/// For Ce the prediction holds logits of shape {N, K} and the target holds N
/// class indices; Bce and Mse compare same-shaped tensors elementwise.
LossResult evalLoss(LossKind kind, const Tensor& prediction,
                    const Tensor& target);

/// Mean loss restricted to one batch sample; used to attribute non-finite
/// losses to an offending sample.
double sampleLoss(LossKind kind, const Tensor& prediction,
                  const Tensor& target, std::size_t sample);

struct OptimizerState {
    enum class Kind { Sgd, Adam };

    Kind kind = Kind::Sgd;
    double learningRate = 0.01;
    double momentum = 0.0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t step = 0;

    static OptimizerState sgd(double learningRate, double momentum = 0.0);
    static OptimizerState adam(double learningRate, double beta1 = 0.9,
                               double beta2 = 0.999, double epsilon = 1e-8);

    /// One in-place descent step; moment buffers are sized on first use.
    void apply(std::span<double> params, std::span<const double> grads);
};

/// One optimizer step on the mean batch loss; returns the pre-update loss.
double trainStep(Network& net, LossKind loss, const Tensor& input,
                 const Tensor& target, OptimizerState& optimizer);

struct GradCheckResult {
    double maxRelativeError = 0.0;
    /// True when the comparison set was empty.
    bool degenerate = false;
    std::size_t checkedParams = 0;
};

/// Central-difference check of the analytic parameter gradient. All
/// parameters are checked up to `subsetLimit`; larger nets get a seeded
/// random subset of that size. A zero limit yields a degenerate result.
GradCheckResult gradCheck(Network& net, LossKind loss, const Tensor& input,
                          const Tensor& target, double epsilon,
                          std::size_t subsetLimit = 10000,
                          std::uint64_t seed = 99);

/// Versioned binary parameter dump (magic, spec hash, parameter count,
/// doubles) plus a JSON sidecar at path + ".json" holding the spec.
void saveCheckpoint(const Network& net, const std::string& path);
Network loadCheckpoint(const std::string& path);

}  // namespace tabaug
