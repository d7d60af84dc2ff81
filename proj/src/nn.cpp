#include "tabaug/nn.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace tabaug {

namespace {

std::size_t shapeProduct(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                           std::multiplies<>());
}

std::string kindName(LayerSpec::Kind kind) {
    switch (kind) {
        case LayerSpec::Kind::Dense: return "dense";
        case LayerSpec::Kind::Conv2d: return "conv2d";
        case LayerSpec::Kind::ConvTranspose2d: return "conv_transpose2d";
        case LayerSpec::Kind::MaskedConv2d: return "masked_conv2d";
        case LayerSpec::Kind::Act: return "act";
        case LayerSpec::Kind::Flatten: return "flatten";
        case LayerSpec::Kind::Reshape: return "reshape";
    }
    return "?";
}

LayerSpec::Kind kindFromName(const std::string& name) {
    if (name == "dense") return LayerSpec::Kind::Dense;
    if (name == "conv2d") return LayerSpec::Kind::Conv2d;
    if (name == "conv_transpose2d") return LayerSpec::Kind::ConvTranspose2d;
    if (name == "masked_conv2d") return LayerSpec::Kind::MaskedConv2d;
    if (name == "act") return LayerSpec::Kind::Act;
    if (name == "flatten") return LayerSpec::Kind::Flatten;
    if (name == "reshape") return LayerSpec::Kind::Reshape;
    throw std::invalid_argument("unknown layer kind '" + name + "'");
}

std::string activationName(Activation a) {
    switch (a) {
        case Activation::Relu: return "relu";
        case Activation::LeakyRelu: return "leaky_relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
    }
    return "?";
}

Activation activationFromName(const std::string& name) {
    if (name == "relu") return Activation::Relu;
    if (name == "leaky_relu") return Activation::LeakyRelu;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

[[noreturn]] void shapeError(std::size_t layer, const LayerSpec& spec,
                             const std::string& detail) {
    throw std::invalid_argument("layer " + std::to_string(layer) + " (" +
                                kindName(spec.kind) + "): " + detail);
}

/// True for kernel taps an autoregressive mask admits; the center tap is
/// admitted only by mask B.
bool maskAllows(std::size_t kh, std::size_t kw, std::size_t kernel,
                bool includeCenter) {
    const std::size_t c = kernel / 2;
    if (kh < c) return true;
    if (kh > c) return false;
    if (kw < c) return true;
    return includeCenter && kw == c;
}

std::size_t weightCount(const LayerSpec& l) {
    switch (l.kind) {
        case LayerSpec::Kind::Dense: return l.in * l.out;
        case LayerSpec::Kind::Conv2d:
        case LayerSpec::Kind::ConvTranspose2d:
        case LayerSpec::Kind::MaskedConv2d:
            return l.inChannels * l.outChannels * l.kernel * l.kernel;
        default: return 0;
    }
}

std::size_t biasCount(const LayerSpec& l) {
    switch (l.kind) {
        case LayerSpec::Kind::Dense: return l.out;
        case LayerSpec::Kind::Conv2d:
        case LayerSpec::Kind::ConvTranspose2d:
        case LayerSpec::Kind::MaskedConv2d:
            return l.outChannels;
        default: return 0;
    }
}

std::size_t fanIn(const LayerSpec& l) {
    switch (l.kind) {
        case LayerSpec::Kind::Dense: return l.in;
        case LayerSpec::Kind::Conv2d:
        case LayerSpec::Kind::ConvTranspose2d:
            return l.inChannels * l.kernel * l.kernel;
        case LayerSpec::Kind::MaskedConv2d: {
            std::size_t taps = 0;
            for (std::size_t kh = 0; kh < l.kernel; ++kh)
                for (std::size_t kw = 0; kw < l.kernel; ++kw)
                    if (maskAllows(kh, kw, l.kernel, l.maskIncludesCenter)) ++taps;
            return std::max<std::size_t>(1, l.inChannels * taps);
        }
        default: return 1;
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s, double fill)
    : shape(std::move(s)), values(shapeProduct(shape), fill) {}

std::size_t Tensor::sampleSize() const {
    if (shape.empty()) return 0;
    std::size_t n = 1;
    for (std::size_t i = 1; i < shape.size(); ++i) n *= shape[i];
    return n;
}

namespace layers {

LayerSpec dense(std::size_t in, std::size_t out) {
    LayerSpec l;
    l.kind = LayerSpec::Kind::Dense;
    l.in = in;
    l.out = out;
    return l;
}

LayerSpec conv2d(std::size_t inChannels, std::size_t outChannels,
                 std::size_t kernel, std::size_t stride, std::size_t pad) {
    LayerSpec l;
    l.kind = LayerSpec::Kind::Conv2d;
    l.inChannels = inChannels;
    l.outChannels = outChannels;
    l.kernel = kernel;
    l.stride = stride;
    l.pad = pad;
    return l;
}

LayerSpec convTranspose2d(std::size_t inChannels, std::size_t outChannels,
                          std::size_t kernel, std::size_t stride,
                          std::size_t pad) {
    LayerSpec l = conv2d(inChannels, outChannels, kernel, stride, pad);
    l.kind = LayerSpec::Kind::ConvTranspose2d;
    return l;
}

LayerSpec maskedConv2d(std::size_t inChannels, std::size_t outChannels,
                       std::size_t kernel, bool includeCenter) {
    LayerSpec l = conv2d(inChannels, outChannels, kernel, 1, kernel / 2);
    l.kind = LayerSpec::Kind::MaskedConv2d;
    l.maskIncludesCenter = includeCenter;
    return l;
}

LayerSpec relu() {
    LayerSpec l;
    l.kind = LayerSpec::Kind::Act;
    l.activation = Activation::Relu;
    return l;
}

LayerSpec leakyRelu(double leak) {
    LayerSpec l = relu();
    l.activation = Activation::LeakyRelu;
    l.leak = leak;
    return l;
}

LayerSpec sigmoid() {
    LayerSpec l = relu();
    l.activation = Activation::Sigmoid;
    return l;
}

LayerSpec tanhAct() {
    LayerSpec l = relu();
    l.activation = Activation::Tanh;
    return l;
}

LayerSpec flatten() {
    LayerSpec l;
    l.kind = LayerSpec::Kind::Flatten;
    return l;
}

LayerSpec reshape(std::vector<std::size_t> targetShape) {
    LayerSpec l;
    l.kind = LayerSpec::Kind::Reshape;
    l.targetShape = std::move(targetShape);
    return l;
}

}  // namespace layers

std::uint64_t specHash(const NetworkSpec& spec) {
    std::ostringstream out;
    for (const auto& l : spec.layers) {
        out << kindName(l.kind) << ':' << l.in << ',' << l.out << ','
            << l.inChannels << ',' << l.outChannels << ',' << l.kernel << ','
            << l.stride << ',' << l.pad << ',' << l.maskIncludesCenter << ','
            << activationName(l.activation) << ',' << l.leak << ",[";
        for (auto d : l.targetShape) out << d << ' ';
        out << "];";
    }
    return fnv1a(out.str());
}

std::string specToJson(const NetworkSpec& spec) {
    nlohmann::json j;
    j["seed"] = spec.seed;
    j["layers"] = nlohmann::json::array();
    for (const auto& l : spec.layers) {
        nlohmann::json e;
        e["kind"] = kindName(l.kind);
        switch (l.kind) {
            case LayerSpec::Kind::Dense:
                e["in"] = l.in;
                e["out"] = l.out;
                break;
            case LayerSpec::Kind::Conv2d:
            case LayerSpec::Kind::ConvTranspose2d:
            case LayerSpec::Kind::MaskedConv2d:
                e["in_channels"] = l.inChannels;
                e["out_channels"] = l.outChannels;
                e["kernel"] = l.kernel;
                e["stride"] = l.stride;
                e["pad"] = l.pad;
                if (l.kind == LayerSpec::Kind::MaskedConv2d)
                    e["include_center"] = l.maskIncludesCenter;
                break;
            case LayerSpec::Kind::Act:
                e["activation"] = activationName(l.activation);
                e["leak"] = l.leak;
                break;
            case LayerSpec::Kind::Flatten:
                break;
            case LayerSpec::Kind::Reshape:
                e["target_shape"] = l.targetShape;
                break;
        }
        j["layers"].push_back(e);
    }
    return j.dump(2);
}

NetworkSpec specFromJson(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    NetworkSpec spec;
    spec.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("layers")) {
        LayerSpec l;
        l.kind = kindFromName(e.at("kind").get<std::string>());
        switch (l.kind) {
            case LayerSpec::Kind::Dense:
                l.in = e.at("in").get<std::size_t>();
                l.out = e.at("out").get<std::size_t>();
                break;
            case LayerSpec::Kind::Conv2d:
            case LayerSpec::Kind::ConvTranspose2d:
            case LayerSpec::Kind::MaskedConv2d:
                l.inChannels = e.at("in_channels").get<std::size_t>();
                l.outChannels = e.at("out_channels").get<std::size_t>();
                l.kernel = e.at("kernel").get<std::size_t>();
                l.stride = e.at("stride").get<std::size_t>();
                l.pad = e.at("pad").get<std::size_t>();
                l.maskIncludesCenter = e.value("include_center", false);
                break;
            case LayerSpec::Kind::Act:
                l.activation = activationFromName(e.at("activation").get<std::string>());
                l.leak = e.value("leak", 0.01);
                break;
            case LayerSpec::Kind::Flatten:
                break;
            case LayerSpec::Kind::Reshape:
                l.targetShape = e.at("target_shape").get<std::vector<std::size_t>>();
                break;
        }
        spec.layers.push_back(std::move(l));
    }
    return spec;
}

Network::Network(NetworkSpec spec) : spec_(std::move(spec)) {
    std::size_t total = 0;
    for (const auto& l : spec_.layers) {
        Slot slot;
        slot.offset = total;
        slot.count = weightCount(l) + biasCount(l);
        total += slot.count;
        slots_.push_back(slot);
    }
    params_.assign(total, 0.0);
    grads_.assign(total, 0.0);
    cachedInputs_.resize(spec_.layers.size());

    Rng rng(spec_.seed);
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        const auto& l = spec_.layers[i];
        const std::size_t weights = weightCount(l);
        if (weights == 0) continue;
        const double limit = std::sqrt(6.0 / static_cast<double>(fanIn(l)));
        double* w = params_.data() + slots_[i].offset;
        for (std::size_t k = 0; k < weights; ++k)
            w[k] = rng.uniform(-limit, limit);
        // Biases stay zero.
    }
}

std::vector<std::size_t> Network::outputShape(
    const std::vector<std::size_t>& inputShape) const {
    std::vector<std::size_t> shape = inputShape;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i) {
        const auto& l = spec_.layers[i];
        switch (l.kind) {
            case LayerSpec::Kind::Dense:
                if (shape.size() != 2 || shape[1] != l.in)
                    shapeError(i, l, "expected {N, " + std::to_string(l.in) + "} input");
                shape = {shape[0], l.out};
                break;
            case LayerSpec::Kind::Conv2d:
            case LayerSpec::Kind::MaskedConv2d: {
                if (shape.size() != 4 || shape[1] != l.inChannels)
                    shapeError(i, l, "expected {N, " + std::to_string(l.inChannels) +
                                         ", H, W} input");
                const std::size_t h = shape[2], w = shape[3];
                if (h + 2 * l.pad < l.kernel || w + 2 * l.pad < l.kernel)
                    shapeError(i, l, "kernel larger than padded input");
                shape = {shape[0], l.outChannels,
                         (h + 2 * l.pad - l.kernel) / l.stride + 1,
                         (w + 2 * l.pad - l.kernel) / l.stride + 1};
                break;
            }
            case LayerSpec::Kind::ConvTranspose2d: {
                if (shape.size() != 4 || shape[1] != l.inChannels)
                    shapeError(i, l, "expected {N, " + std::to_string(l.inChannels) +
                                         ", H, W} input");
                const std::size_t h = shape[2], w = shape[3];
                const std::size_t oh = (h - 1) * l.stride + l.kernel;
                const std::size_t ow = (w - 1) * l.stride + l.kernel;
                if (oh < 2 * l.pad || ow < 2 * l.pad)
                    shapeError(i, l, "padding exceeds transposed output");
                shape = {shape[0], l.outChannels, oh - 2 * l.pad, ow - 2 * l.pad};
                break;
            }
            case LayerSpec::Kind::Act:
                break;
            case LayerSpec::Kind::Flatten: {
                std::size_t flat = 1;
                for (std::size_t d = 1; d < shape.size(); ++d) flat *= shape[d];
                shape = {shape[0], flat};
                break;
            }
            case LayerSpec::Kind::Reshape: {
                std::size_t flat = 1;
                for (std::size_t d = 1; d < shape.size(); ++d) flat *= shape[d];
                if (flat != shapeProduct(l.targetShape))
                    shapeError(i, l, "element count mismatch");
                shape.assign(1, shape[0]);
                shape.insert(shape.end(), l.targetShape.begin(), l.targetShape.end());
                break;
            }
        }
    }
    return shape;
}

Tensor Network::runLayer(std::size_t layer, const Tensor& input, bool cache) {
    const auto& l = spec_.layers[layer];
    const double* w = params_.data() + slots_[layer].offset;
    Tensor out;
    const std::size_t n = input.batch();
    switch (l.kind) {
        case LayerSpec::Kind::Dense: {
            if (input.shape.size() != 2 || input.shape[1] != l.in)
                shapeError(layer, l, "expected {N, " + std::to_string(l.in) +
                                         "} input, got rank " +
                                         std::to_string(input.shape.size()));
            const double* b = w + l.in * l.out;
            out = Tensor({n, l.out});
            for (std::size_t s = 0; s < n; ++s) {
                const double* x = input.values.data() + s * l.in;
                double* y = out.values.data() + s * l.out;
                for (std::size_t o = 0; o < l.out; ++o) {
                    double acc = b[o];
                    const double* row = w + o * l.in;
                    for (std::size_t i = 0; i < l.in; ++i) acc += row[i] * x[i];
                    y[o] = acc;
                }
            }
            break;
        }
        case LayerSpec::Kind::Conv2d:
        case LayerSpec::Kind::MaskedConv2d: {
            if (input.shape.size() != 4 || input.shape[1] != l.inChannels)
                shapeError(layer, l, "expected {N, " +
                                         std::to_string(l.inChannels) +
                                         ", H, W} input");
            const std::size_t h = input.shape[2], wd = input.shape[3];
            if (h + 2 * l.pad < l.kernel || wd + 2 * l.pad < l.kernel)
                shapeError(layer, l, "kernel larger than padded input");
            const std::size_t oh = (h + 2 * l.pad - l.kernel) / l.stride + 1;
            const std::size_t ow = (wd + 2 * l.pad - l.kernel) / l.stride + 1;
            const bool masked = l.kind == LayerSpec::Kind::MaskedConv2d;
            const double* b = w + weightCount(l);
            out = Tensor({n, l.outChannels, oh, ow});
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t oc = 0; oc < l.outChannels; ++oc)
                    for (std::size_t y = 0; y < oh; ++y)
                        for (std::size_t x = 0; x < ow; ++x) {
                            double acc = b[oc];
                            for (std::size_t ic = 0; ic < l.inChannels; ++ic)
                                for (std::size_t kh = 0; kh < l.kernel; ++kh) {
                                    const std::ptrdiff_t iy =
                                        static_cast<std::ptrdiff_t>(y * l.stride + kh) -
                                        static_cast<std::ptrdiff_t>(l.pad);
                                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h))
                                        continue;
                                    for (std::size_t kw = 0; kw < l.kernel; ++kw) {
                                        if (masked &&
                                            !maskAllows(kh, kw, l.kernel,
                                                        l.maskIncludesCenter))
                                            continue;
                                        const std::ptrdiff_t ix =
                                            static_cast<std::ptrdiff_t>(x * l.stride + kw) -
                                            static_cast<std::ptrdiff_t>(l.pad);
                                        if (ix < 0 ||
                                            ix >= static_cast<std::ptrdiff_t>(wd))
                                            continue;
                                        acc += input.values[((s * l.inChannels + ic) * h +
                                                             iy) * wd + ix] *
                                               w[((oc * l.inChannels + ic) * l.kernel +
                                                  kh) * l.kernel + kw];
                                    }
                                }
                            out.values[((s * l.outChannels + oc) * oh + y) * ow + x] = acc;
                        }
            break;
        }
        case LayerSpec::Kind::ConvTranspose2d: {
            if (input.shape.size() != 4 || input.shape[1] != l.inChannels)
                shapeError(layer, l, "expected {N, " +
                                         std::to_string(l.inChannels) +
                                         ", H, W} input");
            const std::size_t h = input.shape[2], wd = input.shape[3];
            const std::size_t oh = (h - 1) * l.stride + l.kernel - 2 * l.pad;
            const std::size_t ow = (wd - 1) * l.stride + l.kernel - 2 * l.pad;
            const double* b = w + weightCount(l);
            out = Tensor({n, l.outChannels, oh, ow});
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t oc = 0; oc < l.outChannels; ++oc) {
                    double* plane =
                        out.values.data() + (s * l.outChannels + oc) * oh * ow;
                    for (std::size_t i = 0; i < oh * ow; ++i) plane[i] = b[oc];
                }
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t ic = 0; ic < l.inChannels; ++ic)
                    for (std::size_t y = 0; y < h; ++y)
                        for (std::size_t x = 0; x < wd; ++x) {
                            const double v =
                                input.values[((s * l.inChannels + ic) * h + y) * wd + x];
                            for (std::size_t oc = 0; oc < l.outChannels; ++oc)
                                for (std::size_t kh = 0; kh < l.kernel; ++kh) {
                                    const std::ptrdiff_t oy =
                                        static_cast<std::ptrdiff_t>(y * l.stride + kh) -
                                        static_cast<std::ptrdiff_t>(l.pad);
                                    if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(oh))
                                        continue;
                                    for (std::size_t kw = 0; kw < l.kernel; ++kw) {
                                        const std::ptrdiff_t ox =
                                            static_cast<std::ptrdiff_t>(x * l.stride + kw) -
                                            static_cast<std::ptrdiff_t>(l.pad);
                                        if (ox < 0 ||
                                            ox >= static_cast<std::ptrdiff_t>(ow))
                                            continue;
                                        out.values[((s * l.outChannels + oc) * oh + oy) *
                                                       ow + ox] +=
                                            v * w[((ic * l.outChannels + oc) * l.kernel +
                                                   kh) * l.kernel + kw];
                                    }
                                }
                        }
            break;
        }
        case LayerSpec::Kind::Act: {
            out = input;
            for (auto& v : out.values) {
                switch (l.activation) {
                    case Activation::Relu: v = v > 0.0 ? v : 0.0; break;
                    case Activation::LeakyRelu: v = v > 0.0 ? v : l.leak * v; break;
                    case Activation::Sigmoid:
                        v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                     : std::exp(v) / (1.0 + std::exp(v));
                        break;
                    case Activation::Tanh: v = std::tanh(v); break;
                }
            }
            break;
        }
        case LayerSpec::Kind::Flatten: {
            if (input.shape.size() < 2)
                shapeError(layer, l, "needs a batch dimension");
            out = input;
            out.shape = {n, input.sampleSize()};
            break;
        }
        case LayerSpec::Kind::Reshape: {
            if (input.sampleSize() != shapeProduct(l.targetShape))
                shapeError(layer, l, "element count mismatch");
            out = input;
            out.shape.assign(1, n);
            out.shape.insert(out.shape.end(), l.targetShape.begin(),
                             l.targetShape.end());
            break;
        }
    }
    if (cache) cachedInputs_[layer] = input;
    return out;
}

Tensor Network::runLayerBackward(std::size_t layer, const Tensor& outputGrad) {
    const auto& l = spec_.layers[layer];
    const Tensor& input = cachedInputs_[layer];
    const double* w = params_.data() + slots_[layer].offset;
    double* gw = grads_.data() + slots_[layer].offset;
    Tensor gradIn(input.shape);
    const std::size_t n = input.batch();
    switch (l.kind) {
        case LayerSpec::Kind::Dense: {
            double* gb = gw + l.in * l.out;
            for (std::size_t s = 0; s < n; ++s) {
                const double* x = input.values.data() + s * l.in;
                const double* gy = outputGrad.values.data() + s * l.out;
                double* gx = gradIn.values.data() + s * l.in;
                for (std::size_t o = 0; o < l.out; ++o) {
                    const double g = gy[o];
                    gb[o] += g;
                    const double* row = w + o * l.in;
                    double* grow = gw + o * l.in;
                    for (std::size_t i = 0; i < l.in; ++i) {
                        grow[i] += g * x[i];
                        gx[i] += g * row[i];
                    }
                }
            }
            break;
        }
        case LayerSpec::Kind::Conv2d:
        case LayerSpec::Kind::MaskedConv2d: {
            const std::size_t h = input.shape[2], wd = input.shape[3];
            const std::size_t oh = outputGrad.shape[2], ow = outputGrad.shape[3];
            const bool masked = l.kind == LayerSpec::Kind::MaskedConv2d;
            double* gb = gw + weightCount(l);
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t oc = 0; oc < l.outChannels; ++oc)
                    for (std::size_t y = 0; y < oh; ++y)
                        for (std::size_t x = 0; x < ow; ++x) {
                            const double g =
                                outputGrad.values[((s * l.outChannels + oc) * oh + y) *
                                                      ow + x];
                            gb[oc] += g;
                            for (std::size_t ic = 0; ic < l.inChannels; ++ic)
                                for (std::size_t kh = 0; kh < l.kernel; ++kh) {
                                    const std::ptrdiff_t iy =
                                        static_cast<std::ptrdiff_t>(y * l.stride + kh) -
                                        static_cast<std::ptrdiff_t>(l.pad);
                                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(h))
                                        continue;
                                    for (std::size_t kw = 0; kw < l.kernel; ++kw) {
                                        if (masked &&
                                            !maskAllows(kh, kw, l.kernel,
                                                        l.maskIncludesCenter))
                                            continue;
                                        const std::ptrdiff_t ix =
                                            static_cast<std::ptrdiff_t>(x * l.stride + kw) -
                                            static_cast<std::ptrdiff_t>(l.pad);
                                        if (ix < 0 ||
                                            ix >= static_cast<std::ptrdiff_t>(wd))
                                            continue;
                                        const std::size_t xi =
                                            ((s * l.inChannels + ic) * h + iy) * wd + ix;
                                        const std::size_t wi =
                                            ((oc * l.inChannels + ic) * l.kernel + kh) *
                                                l.kernel + kw;
                                        gw[wi] += g * input.values[xi];
                                        gradIn.values[xi] += g * w[wi];
                                    }
                                }
                        }
            break;
        }
        case LayerSpec::Kind::ConvTranspose2d: {
            const std::size_t h = input.shape[2], wd = input.shape[3];
            const std::size_t oh = outputGrad.shape[2], ow = outputGrad.shape[3];
            double* gb = gw + weightCount(l);
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t oc = 0; oc < l.outChannels; ++oc)
                    for (std::size_t i = 0; i < oh * ow; ++i)
                        gb[oc] += outputGrad.values[(s * l.outChannels + oc) * oh * ow + i];
            for (std::size_t s = 0; s < n; ++s)
                for (std::size_t ic = 0; ic < l.inChannels; ++ic)
                    for (std::size_t y = 0; y < h; ++y)
                        for (std::size_t x = 0; x < wd; ++x) {
                            const std::size_t xi =
                                ((s * l.inChannels + ic) * h + y) * wd + x;
                            double acc = 0.0;
                            for (std::size_t oc = 0; oc < l.outChannels; ++oc)
                                for (std::size_t kh = 0; kh < l.kernel; ++kh) {
                                    const std::ptrdiff_t oy =
                                        static_cast<std::ptrdiff_t>(y * l.stride + kh) -
                                        static_cast<std::ptrdiff_t>(l.pad);
                                    if (oy < 0 || oy >= static_cast<std::ptrdiff_t>(oh))
                                        continue;
                                    for (std::size_t kw = 0; kw < l.kernel; ++kw) {
                                        const std::ptrdiff_t ox =
                                            static_cast<std::ptrdiff_t>(x * l.stride + kw) -
                                            static_cast<std::ptrdiff_t>(l.pad);
                                        if (ox < 0 ||
                                            ox >= static_cast<std::ptrdiff_t>(ow))
                                            continue;
                                        const double g =
                                            outputGrad.values[((s * l.outChannels + oc) *
                                                               oh + oy) * ow + ox];
                                        const std::size_t wi =
                                            ((ic * l.outChannels + oc) * l.kernel + kh) *
                                                l.kernel + kw;
                                        acc += g * w[wi];
                                        gw[wi] += g * input.values[xi];
                                    }
                                }
                            gradIn.values[xi] = acc;
                        }
            break;
        }
        case LayerSpec::Kind::Act: {
            for (std::size_t i = 0; i < input.values.size(); ++i) {
                const double x = input.values[i];
                double d = 0.0;
                switch (l.activation) {
                    case Activation::Relu: d = x > 0.0 ? 1.0 : 0.0; break;
                    case Activation::LeakyRelu: d = x > 0.0 ? 1.0 : l.leak; break;
                    case Activation::Sigmoid: {
                        const double sv = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                                   : std::exp(x) / (1.0 + std::exp(x));
                        d = sv * (1.0 - sv);
                        break;
                    }
                    case Activation::Tanh: {
                        const double t = std::tanh(x);
                        d = 1.0 - t * t;
                        break;
                    }
                }
                gradIn.values[i] = outputGrad.values[i] * d;
            }
            break;
        }
        case LayerSpec::Kind::Flatten:
        case LayerSpec::Kind::Reshape:
            gradIn.values = outputGrad.values;
            break;
    }
    return gradIn;
}

Tensor Network::forward(const Tensor& input) {
    Tensor current = input;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i)
        current = runLayer(i, current, true);
    hasCache_ = true;
    return current;
}

Tensor Network::infer(const Tensor& input) const {
    // The cache-free path reuses runLayer without touching state.
    auto& self = const_cast<Network&>(*this);
    Tensor current = input;
    for (std::size_t i = 0; i < spec_.layers.size(); ++i)
        current = self.runLayer(i, current, false);
    return current;
}

Tensor Network::backward(const Tensor& outputGrad) {
    if (!hasCache_)
        throw std::logic_error("backward called before forward");
    Tensor current = outputGrad;
    for (std::size_t i = spec_.layers.size(); i-- > 0;)
        current = runLayerBackward(i, current);
    return current;
}

void Network::zeroGrad() { std::fill(grads_.begin(), grads_.end(), 0.0); }

LossResult evalLoss(LossKind kind, const Tensor& prediction,
                    const Tensor& target) {
    LossResult res;
    switch (kind) {
        case LossKind::Mse: {
            if (!prediction.sameShape(target))
                throw std::invalid_argument("mse shape mismatch");
            res.grad = Tensor(prediction.shape);
            const double scale = 1.0 / static_cast<double>(prediction.size());
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                const double d = prediction.values[i] - target.values[i];
                res.value += d * d * scale;
                res.grad.values[i] = 2.0 * d * scale;
            }
            break;
        }
        case LossKind::Bce: {
            if (!prediction.sameShape(target))
                throw std::invalid_argument("bce shape mismatch");
            res.grad = Tensor(prediction.shape);
            const double scale = 1.0 / static_cast<double>(prediction.size());
            constexpr double kEps = 1e-12;
            for (std::size_t i = 0; i < prediction.size(); ++i) {
                const double p =
                    std::clamp(prediction.values[i], kEps, 1.0 - kEps);
                const double t = target.values[i];
                res.value -= (t * std::log(p) + (1.0 - t) * std::log(1.0 - p)) * scale;
                res.grad.values[i] = (p - t) / (p * (1.0 - p)) * scale;
            }
            break;
        }
        case LossKind::Ce: {
            if (prediction.shape.size() != 2)
                throw std::invalid_argument("ce expects {N, K} logits");
            const std::size_t n = prediction.shape[0], k = prediction.shape[1];
            if (target.size() != n)
                throw std::invalid_argument("ce expects one class index per sample");
            res.grad = Tensor(prediction.shape);
            const double scale = 1.0 / static_cast<double>(n);
            for (std::size_t s = 0; s < n; ++s) {
                const double* logits = prediction.values.data() + s * k;
                const auto y = static_cast<std::size_t>(target.values[s]);
                if (y >= k)
                    throw std::invalid_argument("ce class index out of range");
                double mx = logits[0];
                for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, logits[c]);
                double sum = 0.0;
                for (std::size_t c = 0; c < k; ++c) sum += std::exp(logits[c] - mx);
                const double lse = mx + std::log(sum);
                res.value += (lse - logits[y]) * scale;
                for (std::size_t c = 0; c < k; ++c)
                    res.grad.values[s * k + c] =
                        (std::exp(logits[c] - lse) - (c == y ? 1.0 : 0.0)) * scale;
            }
            break;
        }
    }
    return res;
}

double sampleLoss(LossKind kind, const Tensor& prediction, const Tensor& target,
                  std::size_t sample) {
    const std::size_t stride = prediction.sampleSize();
    switch (kind) {
        case LossKind::Mse: {
            double acc = 0.0;
            for (std::size_t i = 0; i < stride; ++i) {
                const double d = prediction.values[sample * stride + i] -
                                 target.values[sample * stride + i];
                acc += d * d;
            }
            return acc / static_cast<double>(stride);
        }
        case LossKind::Bce: {
            double acc = 0.0;
            constexpr double kEps = 1e-12;
            for (std::size_t i = 0; i < stride; ++i) {
                const double p = std::clamp(
                    prediction.values[sample * stride + i], kEps, 1.0 - kEps);
                const double t = target.values[sample * stride + i];
                acc -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
            }
            return acc / static_cast<double>(stride);
        }
        case LossKind::Ce: {
            const std::size_t k = stride;
            const double* logits = prediction.values.data() + sample * k;
            const auto y = static_cast<std::size_t>(target.values[sample]);
            double mx = logits[0];
            for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, logits[c]);
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum += std::exp(logits[c] - mx);
            return mx + std::log(sum) - logits[y];
        }
    }
    return 0.0;
}

OptimizerState OptimizerState::sgd(double learningRate, double momentum) {
    OptimizerState s;
    s.kind = Kind::Sgd;
    s.learningRate = learningRate;
    s.momentum = momentum;
    return s;
}

OptimizerState OptimizerState::adam(double learningRate, double beta1,
                                    double beta2, double epsilon) {
    OptimizerState s;
    s.kind = Kind::Adam;
    s.learningRate = learningRate;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.epsilon = epsilon;
    return s;
}

void OptimizerState::apply(std::span<double> params,
                           std::span<const double> grads) {
    if (params.size() != grads.size())
        throw std::invalid_argument("optimizer parameter/gradient size mismatch");
    if (kind == Kind::Sgd) {
        if (momentum != 0.0 && m.size() != params.size())
            m.assign(params.size(), 0.0);
        if (momentum == 0.0) {
            for (std::size_t i = 0; i < params.size(); ++i)
                params[i] -= learningRate * grads[i];
        } else {
            for (std::size_t i = 0; i < params.size(); ++i) {
                m[i] = momentum * m[i] + grads[i];
                params[i] -= learningRate * m[i];
            }
        }
        ++step;
        return;
    }
    if (m.size() != params.size()) {
        m.assign(params.size(), 0.0);
        v.assign(params.size(), 0.0);
    }
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        params[i] -= learningRate * mhat / (std::sqrt(vhat) + epsilon);
    }
}

double trainStep(Network& net, LossKind loss, const Tensor& input,
                 const Tensor& target, OptimizerState& optimizer) {
    const Tensor prediction = net.forward(input);
    const LossResult res = evalLoss(loss, prediction, target);
    if (!std::isfinite(res.value)) {
        for (std::size_t s = 0; s < prediction.batch(); ++s)
            if (!std::isfinite(sampleLoss(loss, prediction, target, s)))
                throw std::runtime_error("non-finite loss at batch index " +
                                         std::to_string(s));
        throw std::runtime_error("non-finite loss");
    }
    net.zeroGrad();
    net.backward(res.grad);
    optimizer.apply(net.params(), net.grads());
    return res.value;
}

GradCheckResult gradCheck(Network& net, LossKind loss, const Tensor& input,
                          const Tensor& target, double epsilon,
                          std::size_t subsetLimit, std::uint64_t seed) {
    if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
    GradCheckResult result;
    const std::size_t count = net.paramCount();
    if (subsetLimit == 0 || count == 0) {
        result.degenerate = true;
        return result;
    }
    std::vector<std::size_t> indices(count);
    std::iota(indices.begin(), indices.end(), std::size_t{0});
    if (count > subsetLimit) {
        Rng rng(seed);
        for (std::size_t j = 0; j < subsetLimit; ++j) {
            const std::size_t pick = j + rng.index(count - j);
            std::swap(indices[j], indices[pick]);
        }
        indices.resize(subsetLimit);
    }

    const Tensor prediction = net.forward(input);
    const LossResult analyticLoss = evalLoss(loss, prediction, target);
    net.zeroGrad();
    net.backward(analyticLoss.grad);
    std::vector<double> analytic(net.grads().begin(), net.grads().end());

    auto params = net.params();
    for (const std::size_t i : indices) {
        const double original = params[i];
        params[i] = original + epsilon;
        const double up = evalLoss(loss, net.infer(input), target).value;
        params[i] = original - epsilon;
        const double down = evalLoss(loss, net.infer(input), target).value;
        params[i] = original;
        const double numeric = (up - down) / (2.0 * epsilon);
        const double denom =
            std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
        result.maxRelativeError =
            std::max(result.maxRelativeError, std::abs(analytic[i] - numeric) / denom);
    }
    result.checkedParams = indices.size();
    return result;
}

namespace {
constexpr char kCheckpointMagic[8] = {'T', 'B', 'G', 'N', 'E', 'T', '0', '1'};
}

void saveCheckpoint(const Network& net, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    const std::uint64_t hash = specHash(net.spec());
    const std::uint64_t count = net.paramCount();
    out.write(reinterpret_cast<const char*>(&hash), sizeof(hash));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(net.params().data()),
              static_cast<std::streamsize>(count * sizeof(double)));
    if (!out) throw std::runtime_error("short write on checkpoint '" + path + "'");

    std::ofstream sidecar(path + ".json");
    sidecar << specToJson(net.spec()) << '\n';
}

Network loadCheckpoint(const std::string& path) {
    std::ifstream sidecar(path + ".json");
    if (!sidecar)
        throw std::runtime_error("missing checkpoint sidecar '" + path + ".json'");
    std::ostringstream text;
    text << sidecar.rdbuf();
    Network net(specFromJson(text.str()));

    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read checkpoint '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("bad checkpoint magic in '" + path + "'");
    std::uint64_t hash = 0, count = 0;
    in.read(reinterpret_cast<char*>(&hash), sizeof(hash));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    if (hash != specHash(net.spec()))
        throw std::runtime_error("checkpoint spec hash mismatch for '" + path + "'");
    if (count != net.paramCount())
        throw std::runtime_error("checkpoint parameter count mismatch for '" +
                                 path + "'");
    in.read(reinterpret_cast<char*>(net.params().data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw std::runtime_error("truncated checkpoint '" + path + "'");
    return net;
}

}  // namespace tabaug
