#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tabaug/genmodels.hpp"

namespace tabaug {

namespace {

void validateImages(const std::vector<ImageSample>& images) {
    if (images.empty()) throw std::invalid_argument("no training images");
    bool has0 = false, has1 = false;
    for (const auto& img : images) {
        if (img.gridSize != images[0].gridSize)
            throw std::invalid_argument("mixed grid sizes in training images");
        (img.label == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1)
        throw std::invalid_argument("both classes must be present");
}

struct CganTrainer {
    const std::vector<ImageSample>& images;
    CganModel model;
    std::size_t gridSq;
    Rng trainRng;
    OptimizerState gOpt, dOpt, gEmbOpt, dEmbOpt;
    std::vector<double> gEmbGrads, dEmbGrads;

    CganTrainer(const std::vector<ImageSample>& imgs, const CganConfig& config)
        : images(imgs),
          model{config, imgs[0].gridSize, makeGenerator(config, imgs[0].gridSize),
                makeDiscriminator(config, imgs[0].gridSize), {}, {}, {}},
          gridSq(static_cast<std::size_t>(imgs[0].gridSize) * imgs[0].gridSize),
          trainRng(deriveSeed(config.seed, "cgan/train")),
          gOpt(OptimizerState::adam(config.learningRate)),
          dOpt(OptimizerState::adam(config.learningRate)),
          gEmbOpt(OptimizerState::adam(config.learningRate)),
          dEmbOpt(OptimizerState::adam(config.learningRate)) {
        Rng embedRng(deriveSeed(config.seed, "cgan/embed"));
        model.generatorEmbed.resize(2 * config.labelEmbedDim);
        model.discriminatorEmbed.resize(2 * config.labelEmbedDim);
        for (auto& v : model.generatorEmbed) v = embedRng.uniform(-0.1, 0.1);
        for (auto& v : model.discriminatorEmbed) v = embedRng.uniform(-0.1, 0.1);
        gEmbGrads.assign(model.generatorEmbed.size(), 0.0);
        dEmbGrads.assign(model.discriminatorEmbed.size(), 0.0);
    }

    static Network makeGenerator(const CganConfig& config, int gridSize) {
        NetworkSpec spec;
        std::size_t width = config.noiseDim + config.labelEmbedDim;
        for (const std::size_t h : config.hiddenWidths) {
            spec.layers.push_back(layers::dense(width, h));
            spec.layers.push_back(layers::relu());
            width = h;
        }
        spec.layers.push_back(layers::dense(
            width, static_cast<std::size_t>(gridSize) * gridSize));
        spec.layers.push_back(layers::sigmoid());
        spec.seed = deriveSeed(config.seed, "cgan/generator");
        return Network(spec);
    }

    static Network makeDiscriminator(const CganConfig& config, int gridSize) {
        NetworkSpec spec;
        std::size_t width = static_cast<std::size_t>(gridSize) * gridSize +
                            config.labelEmbedDim;
        for (auto it = config.hiddenWidths.rbegin();
             it != config.hiddenWidths.rend(); ++it) {
            spec.layers.push_back(layers::dense(width, *it));
            spec.layers.push_back(layers::leakyRelu(0.2));
            width = *it;
        }
        spec.layers.push_back(layers::dense(width, 1));
        spec.layers.push_back(layers::sigmoid());
        spec.seed = deriveSeed(config.seed, "cgan/discriminator");
        return Network(spec);
    }

    const double* embedRow(const std::vector<double>& table, int label) const {
        return table.data() +
               static_cast<std::size_t>(label) * model.config.labelEmbedDim;
    }

    Tensor generatorInput(const std::vector<int>& labels) {
        const std::size_t e = model.config.labelEmbedDim;
        const std::size_t z = model.config.noiseDim;
        Tensor input({labels.size(), z + e});
        for (std::size_t s = 0; s < labels.size(); ++s) {
            double* row = input.values.data() + s * (z + e);
            for (std::size_t i = 0; i < z; ++i) row[i] = trainRng.normal();
            const double* emb = embedRow(model.generatorEmbed, labels[s]);
            for (std::size_t i = 0; i < e; ++i) row[z + i] = emb[i];
        }
        return input;
    }

    Tensor discriminatorInput(const std::vector<const double*>& pixelRows,
                              const std::vector<int>& labels) const {
        const std::size_t e = model.config.labelEmbedDim;
        Tensor input({pixelRows.size(), gridSq + e});
        for (std::size_t s = 0; s < pixelRows.size(); ++s) {
            double* row = input.values.data() + s * (gridSq + e);
            std::copy(pixelRows[s], pixelRows[s] + gridSq, row);
            const double* emb = embedRow(model.discriminatorEmbed, labels[s]);
            for (std::size_t i = 0; i < e; ++i) row[gridSq + i] = emb[i];
        }
        return input;
    }

    /// Pre-update BCE of the discriminator on a real batch plus matching
    /// fakes; updates D and its label embedding.
    double discriminatorStep(const std::vector<std::size_t>& batch) {
        const std::size_t b = batch.size();
        std::vector<int> labels;
        labels.reserve(2 * b);
        std::vector<const double*> rows;
        rows.reserve(2 * b);
        for (const std::size_t idx : batch) {
            rows.push_back(images[idx].pixels.data());
            labels.push_back(images[idx].label);
        }
        // Fakes conditioned on the same label batch, generator frozen.
        std::vector<int> fakeLabels(labels);
        const Tensor fake = model.generator.infer(generatorInput(fakeLabels));
        for (std::size_t s = 0; s < b; ++s) {
            rows.push_back(fake.values.data() + s * gridSq);
            labels.push_back(fakeLabels[s]);
        }
        Tensor input = discriminatorInput(rows, labels);
        Tensor target({2 * b, 1});
        for (std::size_t s = 0; s < b; ++s) target.values[s] = 1.0;

        const Tensor out = model.discriminator.forward(input);
        const LossResult loss = evalLoss(LossKind::Bce, out, target);
        model.discriminator.zeroGrad();
        const Tensor inputGrad = model.discriminator.backward(loss.grad);
        accumulateEmbedGrads(inputGrad, labels, gridSq, dEmbGrads);
        dOpt.apply(model.discriminator.params(), model.discriminator.grads());
        dEmbOpt.apply(model.discriminatorEmbed, dEmbGrads);
        std::fill(dEmbGrads.begin(), dEmbGrads.end(), 0.0);
        return loss.value;
    }

    /// Pre-update generator BCE (non-saturating target 1 through D).
    double generatorStep(const std::vector<std::size_t>& batch) {
        const std::size_t b = batch.size();
        std::vector<int> labels;
        labels.reserve(b);
        for (const std::size_t idx : batch) labels.push_back(images[idx].label);

        Tensor gInput = generatorInput(labels);
        const Tensor generated = model.generator.forward(gInput);
        std::vector<const double*> rows(b);
        for (std::size_t s = 0; s < b; ++s)
            rows[s] = generated.values.data() + s * gridSq;
        Tensor dInput = discriminatorInput(rows, labels);
        const Tensor out = model.discriminator.forward(dInput);
        const Tensor target({b, 1}, 1.0);
        const LossResult loss = evalLoss(LossKind::Bce, out, target);

        model.discriminator.zeroGrad();
        const Tensor dInputGrad = model.discriminator.backward(loss.grad);
        // Only the image slice flows back into the generator; D stays fixed.
        Tensor genGrad({b, gridSq});
        const std::size_t e = model.config.labelEmbedDim;
        for (std::size_t s = 0; s < b; ++s)
            std::copy(dInputGrad.values.data() + s * (gridSq + e),
                      dInputGrad.values.data() + s * (gridSq + e) + gridSq,
                      genGrad.values.data() + s * gridSq);
        model.generator.zeroGrad();
        const Tensor gInputGrad = model.generator.backward(genGrad);
        accumulateEmbedGrads(gInputGrad, labels, model.config.noiseDim, gEmbGrads);
        gOpt.apply(model.generator.params(), model.generator.grads());
        gEmbOpt.apply(model.generatorEmbed, gEmbGrads);
        std::fill(gEmbGrads.begin(), gEmbGrads.end(), 0.0);
        return loss.value;
    }

    void accumulateEmbedGrads(const Tensor& inputGrad,
                              const std::vector<int>& labels,
                              std::size_t sliceOffset,
                              std::vector<double>& embGrads) const {
        const std::size_t e = model.config.labelEmbedDim;
        const std::size_t stride = inputGrad.sampleSize();
        for (std::size_t s = 0; s < labels.size(); ++s) {
            const double* slice = inputGrad.values.data() + s * stride + sliceOffset;
            double* grad = embGrads.data() +
                           static_cast<std::size_t>(labels[s]) * e;
            for (std::size_t i = 0; i < e; ++i) grad[i] += slice[i];
        }
    }

    std::vector<std::vector<std::size_t>> epochBatches() {
        std::vector<std::size_t> order(images.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        trainRng.shuffle(order);
        std::vector<std::vector<std::size_t>> batches;
        for (std::size_t start = 0; start < order.size();
             start += model.config.batchSize) {
            const std::size_t end =
                std::min(order.size(), start + model.config.batchSize);
            batches.emplace_back(order.begin() + start, order.begin() + end);
        }
        return batches;
    }
};

}  // namespace

CganModel cganTrain(const std::vector<ImageSample>& images,
                    const CganConfig& config) {
    validateImages(images);
    if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
    CganTrainer trainer(images, config);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        double dSum = 0.0, gSum = 0.0;
        std::size_t steps = 0;
        for (const auto& batch : trainer.epochBatches()) {
            const double dLoss = trainer.discriminatorStep(batch);
            const double gLoss = trainer.generatorStep(batch);
            if (!std::isfinite(dLoss) || !std::isfinite(gLoss))
                throw std::runtime_error("non-finite adversarial loss at epoch " +
                                         std::to_string(epoch));
            dSum += dLoss;
            gSum += gLoss;
            ++steps;
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.discriminator = dSum / static_cast<double>(steps);
        entry.generator = gSum / static_cast<double>(steps);
        entry.total = entry.discriminator + entry.generator;
        trainer.model.log.push_back(entry);
    }
    return std::move(trainer.model);
}

std::vector<ImageSample> cganGenerate(const CganModel& model, int label,
                                      std::size_t count, std::uint64_t seed) {
    std::vector<ImageSample> out;
    if (count == 0) return out;
    const std::size_t z = model.config.noiseDim;
    const std::size_t e = model.config.labelEmbedDim;
    const std::size_t gridSq =
        static_cast<std::size_t>(model.gridSize) * model.gridSize;
    Rng rng(deriveSeed(seed, "cgan/generate"));
    Tensor input({count, z + e});
    const double* emb = model.generatorEmbed.data() +
                        static_cast<std::size_t>(label) * e;
    for (std::size_t s = 0; s < count; ++s) {
        double* row = input.values.data() + s * (z + e);
        for (std::size_t i = 0; i < z; ++i) row[i] = rng.normal();
        for (std::size_t i = 0; i < e; ++i) row[z + i] = emb[i];
    }
    const Tensor generated = model.generator.infer(input);
    out.reserve(count);
    for (std::size_t s = 0; s < count; ++s) {
        ImageSample img;
        img.gridSize = model.gridSize;
        img.label = label;
        img.synthetic = true;
        img.pixels.assign(generated.values.begin() + s * gridSq,
                          generated.values.begin() + (s + 1) * gridSq);
        clampPixels(img);
        out.push_back(std::move(img));
    }
    return out;
}

std::vector<double> cganDiscriminatorWarmup(
    const std::vector<ImageSample>& images, const CganConfig& config,
    std::size_t steps) {
    validateImages(images);
    CganTrainer trainer(images, config);
    std::vector<double> losses;
    losses.reserve(steps);
    while (losses.size() < steps)
        for (const auto& batch : trainer.epochBatches()) {
            if (losses.size() >= steps) break;
            losses.push_back(trainer.discriminatorStep(batch));
        }
    return losses;
}

}  // namespace tabaug
