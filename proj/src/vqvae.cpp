#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "vq_common.hpp"

namespace tabaug {

namespace vqdetail {

AeComponents makeAutoencoder(int gridSize, std::size_t channels,
                             std::size_t codeDim, std::size_t codebookK,
                             std::uint64_t seed) {
    if (gridSize < 4 || gridSize % 4 != 0)
        throw std::invalid_argument(
            "VQ models need a grid size that is a multiple of 4");
    AeComponents ae;
    ae.gridSize = gridSize;
    ae.codeGrid = gridSize / 4;

    NetworkSpec enc;
    enc.layers = {layers::conv2d(1, channels, 4, 2, 1), layers::relu(),
                  layers::conv2d(channels, codeDim, 4, 2, 1)};
    enc.seed = deriveSeed(seed, "vq/encoder");
    ae.encoder = Network(enc);

    NetworkSpec dec;
    dec.layers = {layers::convTranspose2d(codeDim, channels, 4, 2, 1),
                  layers::relu(),
                  layers::convTranspose2d(channels, 1, 4, 2, 1),
                  layers::sigmoid()};
    dec.seed = deriveSeed(seed, "vq/decoder");
    ae.decoder = Network(dec);

    ae.codebook = makeCodeBook(codebookK, codeDim, deriveSeed(seed, "vq/codebook"), 0.5);
    return ae;
}

void quantizeBatch(const Tensor& ze, const CodeBook& codebook, Tensor& zq,
                   std::vector<std::size_t>& assignments) {
    const std::size_t b = ze.shape[0], dim = ze.shape[1];
    const std::size_t h = ze.shape[2], w = ze.shape[3];
    zq = Tensor(ze.shape);
    assignments.assign(b * h * w, 0);
    std::vector<double> z(dim);
    for (std::size_t s = 0; s < b; ++s)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                for (std::size_t c = 0; c < dim; ++c)
                    z[c] = ze.values[((s * dim + c) * h + y) * w + x];
                const std::size_t k = nearestEntry(z, codebook);
                assignments[s * h * w + y * w + x] = k;
                for (std::size_t c = 0; c < dim; ++c)
                    zq.values[((s * dim + c) * h + y) * w + x] =
                        codebook.entries[k * dim + c];
            }
}

Tensor imagesToTensor(const std::vector<ImageSample>& images,
                      const std::vector<std::size_t>& indices) {
    const auto g = static_cast<std::size_t>(images[indices[0]].gridSize);
    Tensor t({indices.size(), 1, g, g});
    for (std::size_t s = 0; s < indices.size(); ++s)
        std::copy(images[indices[s]].pixels.begin(),
                  images[indices[s]].pixels.end(),
                  t.values.begin() + static_cast<std::ptrdiff_t>(s * g * g));
    return t;
}

void trainAutoencoder(AeComponents& ae, const std::vector<ImageSample>& images,
                      int epochs, double beta, double learningRate,
                      std::size_t batchSize, std::uint64_t seed,
                      std::vector<EpochLog>& log, AeBatchHook* hook) {
    if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    Rng rng(deriveSeed(seed, "vq/ae"));
    OptimizerState encOpt = OptimizerState::adam(learningRate);
    OptimizerState decOpt = OptimizerState::adam(learningRate);
    OptimizerState cbOpt = OptimizerState::adam(learningRate);
    std::vector<double> cbGrads(ae.codebook.entries.size(), 0.0);
    const std::size_t dim = ae.codebook.dim;

    for (int epoch = 1; epoch <= epochs; ++epoch) {
        std::vector<std::size_t> order(images.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);

        EpochLog entry;
        entry.epoch = epoch;
        double reconSum = 0.0, vqSum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size(); start += batchSize) {
            const std::size_t end = std::min(order.size(), start + batchSize);
            const std::vector<std::size_t> batch(order.begin() + start,
                                                 order.begin() + end);
            const Tensor x = imagesToTensor(images, batch);
            const Tensor ze = ae.encoder.forward(x);
            Tensor zq;
            std::vector<std::size_t> assignments;
            quantizeBatch(ze, ae.codebook, zq, assignments);
            const Tensor xhat = ae.decoder.forward(zq);
            const LossResult recon = evalLoss(LossKind::Mse, xhat, x);
            if (!std::isfinite(recon.value))
                throw std::runtime_error(
                    "non-finite reconstruction loss at epoch " +
                    std::to_string(epoch));

            Tensor reconGrad = recon.grad;
            if (hook) hook->onBatch(x, xhat, reconGrad, entry);

            ae.decoder.zeroGrad();
            const Tensor gradZq = ae.decoder.backward(reconGrad);

            const std::size_t m = ze.size();
            const double invM = 1.0 / static_cast<double>(m);
            double vqDist = 0.0;
            for (std::size_t i = 0; i < m; ++i) {
                const double d = ze.values[i] - zq.values[i];
                vqDist += d * d;
            }
            vqDist *= invM;

            // Straight-through copy, plus the commitment pull when beta != 0.
            Tensor gradZe = gradZq;
            if (beta != 0.0)
                for (std::size_t i = 0; i < m; ++i)
                    gradZe.values[i] +=
                        2.0 * beta * (ze.values[i] - zq.values[i]) * invM;
            ae.encoder.zeroGrad();
            ae.encoder.backward(gradZe);

            std::fill(cbGrads.begin(), cbGrads.end(), 0.0);
            const std::size_t h = ze.shape[2], w = ze.shape[3];
            const std::size_t hw = h * w;
            for (std::size_t s = 0; s < batch.size(); ++s)
                for (std::size_t p = 0; p < hw; ++p) {
                    const std::size_t k = assignments[s * hw + p];
                    for (std::size_t c = 0; c < dim; ++c) {
                        const std::size_t zi = (s * dim + c) * hw + p;
                        cbGrads[k * dim + c] +=
                            2.0 * (zq.values[zi] - ze.values[zi]) * invM;
                    }
                }

            encOpt.apply(ae.encoder.params(), ae.encoder.grads());
            decOpt.apply(ae.decoder.params(), ae.decoder.grads());
            cbOpt.apply(ae.codebook.entries, cbGrads);

            reconSum += recon.value;
            vqSum += vqDist;
            ++steps;
        }
        const double inv = 1.0 / static_cast<double>(steps);
        entry.reconstruction = reconSum * inv;
        entry.codebookLoss = vqSum * inv;
        entry.commitment = beta * vqSum * inv;
        entry.total = entry.reconstruction + entry.codebookLoss + entry.commitment;
        if (hook) hook->onEpochEnd(entry);
        log.push_back(entry);
    }
}

}  // namespace vqdetail

namespace {

Tensor singleImageTensor(const ImageSample& image) {
    const auto g = static_cast<std::size_t>(image.gridSize);
    Tensor t({1, 1, g, g});
    t.values = image.pixels;
    return t;
}

}  // namespace

VqvaeModel vqvaeTrain(const std::vector<ImageSample>& images,
                      const VqvaeConfig& config) {
    vqdetail::validateTrainingImages(images);
    auto ae = vqdetail::makeAutoencoder(images[0].gridSize, config.channels,
                                        config.codeDim, config.codebookK,
                                        config.seed);
    std::vector<EpochLog> log;
    vqdetail::trainAutoencoder(ae, images, config.epochs, config.beta,
                               config.learningRate, config.batchSize,
                               config.seed, log, nullptr);

    // Usage measured once on the final parameters over the training set.
    ae.codebook.usageHistogram.assign(ae.codebook.entryCount, 0);
    std::vector<double> z(ae.codebook.dim);
    for (const auto& image : images) {
        const Tensor ze = ae.encoder.infer(singleImageTensor(image));
        const std::size_t hw = ze.shape[2] * ze.shape[3];
        for (std::size_t p = 0; p < hw; ++p) {
            for (std::size_t c = 0; c < ae.codebook.dim; ++c)
                z[c] = ze.values[c * hw + p];
            vqQuantize(z, ae.codebook);
        }
    }
    std::vector<std::string> warnings;
    const double dead = deadEntryFraction(ae.codebook);
    if (dead > 0.9)
        warnings.push_back("dead codebook: " +
                           std::to_string(static_cast<int>(dead * 100.0)) +
                           "% of entries unused after training");

    return VqvaeModel{config,
                      ae.gridSize,
                      ae.codeGrid,
                      std::move(ae.encoder),
                      std::move(ae.decoder),
                      std::move(ae.codebook),
                      std::move(log),
                      std::move(warnings)};
}

std::vector<std::size_t> vqvaeEncode(const VqvaeModel& model,
                                     const ImageSample& image) {
    const Tensor ze = model.encoder.infer(singleImageTensor(image));
    const std::size_t hw = ze.shape[2] * ze.shape[3];
    std::vector<std::size_t> codes(hw);
    std::vector<double> z(model.codebook.dim);
    for (std::size_t p = 0; p < hw; ++p) {
        for (std::size_t c = 0; c < model.codebook.dim; ++c)
            z[c] = ze.values[c * hw + p];
        codes[p] = nearestEntry(z, model.codebook);
    }
    return codes;
}

ImageSample vqvaeDecode(const VqvaeModel& model,
                        const std::vector<std::size_t>& codes, int label) {
    const auto h = static_cast<std::size_t>(model.codeGrid);
    if (codes.size() != h * h)
        throw std::invalid_argument("code grid size mismatch");
    const std::size_t dim = model.codebook.dim;
    Tensor zq({1, dim, h, h});
    for (std::size_t p = 0; p < h * h; ++p)
        for (std::size_t c = 0; c < dim; ++c)
            zq.values[c * h * h + p] = model.codebook.entries[codes[p] * dim + c];
    const Tensor out = model.decoder.infer(zq);
    ImageSample img;
    img.gridSize = model.gridSize;
    img.label = label;
    img.pixels = out.values;
    return img;
}

VqvaeGradientProbe vqvaeProbeGradients(VqvaeModel& model,
                                       const ImageSample& image) {
    const Tensor x = singleImageTensor(image);
    const Tensor ze = model.encoder.forward(x);
    Tensor zq;
    std::vector<std::size_t> assignments;
    vqdetail::quantizeBatch(ze, model.codebook, zq, assignments);
    const Tensor xhat = model.decoder.forward(zq);
    const LossResult recon = evalLoss(LossKind::Mse, xhat, x);
    model.decoder.zeroGrad();
    const Tensor gradZq = model.decoder.backward(recon.grad);

    VqvaeGradientProbe probe;
    probe.decoderInputGrad = gradZq.values;
    Tensor gradZe = gradZq;
    if (model.config.beta != 0.0) {
        const double invM = 1.0 / static_cast<double>(ze.size());
        for (std::size_t i = 0; i < ze.size(); ++i)
            gradZe.values[i] += 2.0 * model.config.beta *
                                (ze.values[i] - zq.values[i]) * invM;
    }
    probe.encoderOutputGrad = gradZe.values;
    model.decoder.zeroGrad();
    return probe;
}

double vqvaeSurrogateLoss(const VqvaeModel& model, const ImageSample& image,
                          const VqvaeSurrogateContext& context) {
    const Tensor x = singleImageTensor(image);
    const Tensor ze = model.encoder.infer(x);
    Tensor decIn = ze;
    for (std::size_t i = 0; i < decIn.size(); ++i)
        decIn.values[i] += context.offset[i];
    const Tensor xhat = model.decoder.infer(decIn);
    const double recon = evalLoss(LossKind::Mse, xhat, x).value;

    const std::size_t dim = model.codebook.dim;
    const std::size_t hw = ze.shape[2] * ze.shape[3];
    const double invM = 1.0 / static_cast<double>(ze.size());
    double codebookTerm = 0.0, commitTerm = 0.0;
    for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t k = context.assignments[p];
        for (std::size_t c = 0; c < dim; ++c) {
            const double dCb = context.baseZe[c * hw + p] -
                               model.codebook.entries[k * dim + c];
            codebookTerm += dCb * dCb;
            const double dCommit =
                ze.values[c * hw + p] - context.baseEntries[p * dim + c];
            commitTerm += dCommit * dCommit;
        }
    }
    return recon + codebookTerm * invM +
           model.config.beta * commitTerm * invM;
}

std::vector<double> vqvaeAnalyticGradients(VqvaeModel& model,
                                           const ImageSample& image,
                                           VqvaeSurrogateContext& contextOut) {
    const Tensor x = singleImageTensor(image);
    const Tensor ze = model.encoder.forward(x);
    Tensor zq;
    vqdetail::quantizeBatch(ze, model.codebook, zq, contextOut.assignments);
    const std::size_t dim = model.codebook.dim;
    const std::size_t hw = ze.shape[2] * ze.shape[3];
    contextOut.offset.resize(ze.size());
    for (std::size_t i = 0; i < ze.size(); ++i)
        contextOut.offset[i] = zq.values[i] - ze.values[i];
    contextOut.baseZe = ze.values;
    contextOut.baseEntries.resize(hw * dim);
    for (std::size_t p = 0; p < hw; ++p)
        for (std::size_t c = 0; c < dim; ++c)
            contextOut.baseEntries[p * dim + c] = zq.values[c * hw + p];

    const Tensor xhat = model.decoder.forward(zq);
    const LossResult recon = evalLoss(LossKind::Mse, xhat, x);
    model.decoder.zeroGrad();
    const Tensor gradZq = model.decoder.backward(recon.grad);
    const double invM = 1.0 / static_cast<double>(ze.size());
    Tensor gradZe = gradZq;
    if (model.config.beta != 0.0)
        for (std::size_t i = 0; i < ze.size(); ++i)
            gradZe.values[i] += 2.0 * model.config.beta *
                                (ze.values[i] - zq.values[i]) * invM;
    model.encoder.zeroGrad();
    model.encoder.backward(gradZe);

    std::vector<double> cbGrads(model.codebook.entries.size(), 0.0);
    for (std::size_t p = 0; p < hw; ++p) {
        const std::size_t k = contextOut.assignments[p];
        for (std::size_t c = 0; c < dim; ++c) {
            const std::size_t zi = c * hw + p;
            cbGrads[k * dim + c] +=
                2.0 * (zq.values[zi] - ze.values[zi]) * invM;
        }
    }

    std::vector<double> grads;
    grads.insert(grads.end(), model.encoder.grads().begin(),
                 model.encoder.grads().end());
    grads.insert(grads.end(), model.decoder.grads().begin(),
                 model.decoder.grads().end());
    grads.insert(grads.end(), cbGrads.begin(), cbGrads.end());
    return grads;
}

// ---------------------------------------------------------------------------
// PixelCNN prior over the code grid.

namespace {

Tensor oneHotBatch(const std::vector<std::vector<std::size_t>>& sequences,
                   const std::vector<std::size_t>& indices, std::size_t vocab,
                   std::size_t grid) {
    Tensor t({indices.size(), vocab, grid, grid}, 0.0);
    const std::size_t hw = grid * grid;
    for (std::size_t s = 0; s < indices.size(); ++s)
        for (std::size_t p = 0; p < hw; ++p) {
            const std::size_t code = sequences[indices[s]][p];
            t.values[(s * vocab + code) * hw + p] = 1.0;
        }
    return t;
}

void addClassBias(Tensor& hidden, const std::vector<double>& classBias,
                  const std::vector<int>& labels, std::size_t channels) {
    const std::size_t hw = hidden.shape[2] * hidden.shape[3];
    for (std::size_t s = 0; s < hidden.shape[0]; ++s) {
        const double* bias =
            classBias.data() + static_cast<std::size_t>(labels[s]) * channels;
        for (std::size_t c = 0; c < channels; ++c) {
            double* plane = hidden.values.data() + (s * channels + c) * hw;
            for (std::size_t i = 0; i < hw; ++i) plane[i] += bias[c];
        }
    }
}

}  // namespace

PixelCnnPrior priorTrain(const VqvaeModel& model,
                         const std::vector<ImageSample>& images,
                         const PixelCnnConfig& config) {
    vqdetail::validateTrainingImages(images);
    std::vector<std::vector<std::size_t>> sequences;
    std::vector<int> labels;
    sequences.reserve(images.size());
    for (const auto& image : images) {
        sequences.push_back(vqvaeEncode(model, image));
        labels.push_back(image.label);
    }
    return priorTrainOnCodes(sequences, labels, model.codebook.entryCount,
                             model.codeGrid, config);
}

PixelCnnPrior priorTrainOnCodes(
    const std::vector<std::vector<std::size_t>>& sequences,
    const std::vector<int>& labels, std::size_t vocab, int codeGrid,
    const PixelCnnConfig& config) {
    if (sequences.empty()) throw std::invalid_argument("no code sequences");
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    if (sequences.size() != labels.size())
        throw std::invalid_argument("sequence/label count mismatch");
    if (vocab < 2) throw std::invalid_argument("vocab must be >= 2");
    const auto grid = static_cast<std::size_t>(codeGrid);
    const std::size_t hw = grid * grid;
    for (const auto& seq : sequences) {
        if (seq.size() != hw)
            throw std::invalid_argument("code grid size mismatch");
        for (auto code : seq)
            if (code >= vocab)
                throw std::invalid_argument("code index out of range");
    }
    const std::size_t channels = config.channels;

    PixelCnnPrior prior;
    prior.config = config;
    prior.vocab = vocab;
    prior.codeGrid = codeGrid;
    {
        NetworkSpec entry;
        entry.layers = {layers::maskedConv2d(vocab, channels, 3, false)};
        entry.seed = deriveSeed(config.seed, "pixelcnn/entry");
        prior.entry = Network(entry);
        NetworkSpec tail;
        tail.layers = {layers::relu(),
                       layers::maskedConv2d(channels, channels, 3, true),
                       layers::relu(),
                       layers::maskedConv2d(channels, channels, 3, true),
                       layers::relu(),
                       layers::conv2d(channels, vocab, 1)};
        tail.seed = deriveSeed(config.seed, "pixelcnn/tail");
        prior.tail = Network(tail);
    }
    prior.classBias.assign(2 * channels, 0.0);

    OptimizerState entryOpt = OptimizerState::adam(config.learningRate);
    OptimizerState tailOpt = OptimizerState::adam(config.learningRate);
    OptimizerState biasOpt = OptimizerState::adam(config.learningRate);
    std::vector<double> biasGrads(prior.classBias.size(), 0.0);
    Rng rng(deriveSeed(config.seed, "pixelcnn/train"));

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::vector<std::size_t> order(sequences.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(order);
        double lossSum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += config.batchSize) {
            const std::size_t end =
                std::min(order.size(), start + config.batchSize);
            const std::vector<std::size_t> batch(order.begin() + start,
                                                 order.begin() + end);
            std::vector<int> batchLabels;
            for (auto idx : batch) batchLabels.push_back(labels[idx]);

            Tensor x = oneHotBatch(sequences, batch, vocab, grid);
            Tensor h1 = prior.entry.forward(x);
            addClassBias(h1, prior.classBias, batchLabels, channels);
            const Tensor logits = prior.tail.forward(h1);

            const double scale =
                1.0 / (static_cast<double>(batch.size()) * static_cast<double>(hw));
            Tensor dLogits(logits.shape, 0.0);
            double loss = 0.0;
            for (std::size_t s = 0; s < batch.size(); ++s)
                for (std::size_t p = 0; p < hw; ++p) {
                    const std::size_t y = sequences[batch[s]][p];
                    double mx = -1e300;
                    for (std::size_t k = 0; k < vocab; ++k)
                        mx = std::max(mx, logits.values[(s * vocab + k) * hw + p]);
                    double sum = 0.0;
                    for (std::size_t k = 0; k < vocab; ++k)
                        sum += std::exp(logits.values[(s * vocab + k) * hw + p] - mx);
                    const double lse = mx + std::log(sum);
                    loss += (lse - logits.values[(s * vocab + y) * hw + p]) * scale;
                    for (std::size_t k = 0; k < vocab; ++k)
                        dLogits.values[(s * vocab + k) * hw + p] =
                            (std::exp(logits.values[(s * vocab + k) * hw + p] - lse) -
                             (k == y ? 1.0 : 0.0)) *
                            scale;
                }

            prior.tail.zeroGrad();
            const Tensor gH1 = prior.tail.backward(dLogits);
            std::fill(biasGrads.begin(), biasGrads.end(), 0.0);
            for (std::size_t s = 0; s < batch.size(); ++s) {
                double* grad = biasGrads.data() +
                               static_cast<std::size_t>(batchLabels[s]) * channels;
                for (std::size_t c = 0; c < channels; ++c) {
                    const double* plane = gH1.values.data() + (s * channels + c) * hw;
                    for (std::size_t i = 0; i < hw; ++i) grad[c] += plane[i];
                }
            }
            prior.entry.zeroGrad();
            prior.entry.backward(gH1);

            entryOpt.apply(prior.entry.params(), prior.entry.grads());
            tailOpt.apply(prior.tail.params(), prior.tail.grads());
            biasOpt.apply(prior.classBias, biasGrads);
            lossSum += loss;
            ++steps;
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.total = lossSum / static_cast<double>(steps);
        prior.log.push_back(entry);
    }
    return prior;
}

std::vector<double> priorLogits(const PixelCnnPrior& prior,
                                const std::vector<std::size_t>& codes,
                                int label) {
    const auto grid = static_cast<std::size_t>(prior.codeGrid);
    const std::size_t hw = grid * grid;
    if (codes.size() != hw)
        throw std::invalid_argument("code grid size mismatch");
    Tensor x({1, prior.vocab, grid, grid}, 0.0);
    for (std::size_t p = 0; p < hw; ++p) x.values[codes[p] * hw + p] = 1.0;
    Tensor h1 = prior.entry.infer(x);
    addClassBias(h1, prior.classBias, {label},
                 prior.classBias.size() / 2);
    const Tensor logits = prior.tail.infer(h1);
    return logits.values;
}

double priorLogProb(const PixelCnnPrior& prior,
                    const std::vector<std::size_t>& codes, int label) {
    const auto grid = static_cast<std::size_t>(prior.codeGrid);
    const std::size_t hw = grid * grid;
    const std::vector<double> lg = priorLogits(prior, codes, label);
    double logProb = 0.0;
    for (std::size_t p = 0; p < hw; ++p) {
        double mx = -1e300;
        for (std::size_t k = 0; k < prior.vocab; ++k)
            mx = std::max(mx, lg[k * hw + p]);
        double sum = 0.0;
        for (std::size_t k = 0; k < prior.vocab; ++k)
            sum += std::exp(lg[k * hw + p] - mx);
        logProb += lg[codes[p] * hw + p] - (mx + std::log(sum));
    }
    return logProb;
}

std::vector<std::size_t> priorSample(const PixelCnnPrior& prior, int label,
                                     Rng& rng) {
    const auto grid = static_cast<std::size_t>(prior.codeGrid);
    const std::size_t hw = grid * grid;
    std::vector<std::size_t> codes(hw, 0);
    std::vector<double> probs(prior.vocab);
    for (std::size_t p = 0; p < hw; ++p) {
        // Masking makes position p independent of the placeholder suffix.
        const std::vector<double> lg = priorLogits(prior, codes, label);
        double mx = -1e300;
        for (std::size_t k = 0; k < prior.vocab; ++k)
            mx = std::max(mx, lg[k * hw + p]);
        double sum = 0.0;
        for (std::size_t k = 0; k < prior.vocab; ++k) {
            probs[k] = std::exp(lg[k * hw + p] - mx);
            sum += probs[k];
        }
        const double u = rng.uniform() * sum;
        double acc = 0.0;
        std::size_t choice = prior.vocab - 1;
        for (std::size_t k = 0; k < prior.vocab; ++k) {
            acc += probs[k];
            if (u < acc) {
                choice = k;
                break;
            }
        }
        codes[p] = choice;
    }
    return codes;
}

std::vector<ImageSample> vqvaeGenerate(const VqvaeModel& model,
                                       const PixelCnnPrior& prior, int label,
                                       std::size_t count, std::uint64_t seed) {
    Rng rng(deriveSeed(seed, "vqvae/generate"));
    std::vector<ImageSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto codes = priorSample(prior, label, rng);
        ImageSample img = vqvaeDecode(model, codes, label);
        img.synthetic = true;
        clampPixels(img);
        out.push_back(std::move(img));
    }
    return out;
}

}  // namespace tabaug
