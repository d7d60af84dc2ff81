#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "vq_common.hpp"

namespace tabaug {

std::string generativeKindName(GenerativeKind kind) {
    switch (kind) {
        case GenerativeKind::Cgan: return "cgan";
        case GenerativeKind::Vqvae: return "vqvae";
        case GenerativeKind::Vqgan: return "vqgan";
    }
    throw std::logic_error("unknown generative kind");
}

void writeLossCsv(const std::vector<EpochLog>& log, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << std::setprecision(17);
    out << "epoch,reconstruction,codebook,commitment,discriminator,generator,"
           "total\n";
    for (const auto& e : log)
        out << e.epoch << ',' << e.reconstruction << ',' << e.codebookLoss
            << ',' << e.commitment << ',' << e.discriminator << ','
            << e.generator << ',' << e.total << '\n';
}

namespace {

Network makeVqganDiscriminator(int gridSize, std::uint64_t seed) {
    const auto quarter = static_cast<std::size_t>(gridSize / 4);
    NetworkSpec spec;
    spec.layers = {layers::conv2d(1, 16, 3, 2, 1),
                   layers::leakyRelu(0.2),
                   layers::conv2d(16, 32, 3, 2, 1),
                   layers::leakyRelu(0.2),
                   layers::conv2d(32, 32, 3, 1, 1),
                   layers::leakyRelu(0.2),
                   layers::flatten(),
                   layers::dense(32 * quarter * quarter, 1),
                   layers::sigmoid()};
    spec.seed = seed;
    return Network(spec);
}

/// Trains the discriminator once per batch and, when the adversarial weight
/// is positive, adds the generator-facing gradient to the reconstruction
/// gradient. At weight 0 it never touches `reconGrad`, so the autoencoder
/// updates stay bitwise identical to plain VQVAE training.
class AdversarialHook final : public vqdetail::AeBatchHook {
public:
    AdversarialHook(Network& discriminator, double weight, double learningRate,
                    std::vector<std::string>& warnings)
        : disc_(discriminator),
          weight_(weight),
          opt_(OptimizerState::adam(learningRate)),
          warnings_(warnings) {}

    void onBatch(const Tensor& realBatch, const Tensor& recon,
                 Tensor& reconGrad, EpochLog& entry) override {
        const std::size_t b = realBatch.shape[0];
        const Tensor ones({b, std::size_t{1}}, 1.0);
        const Tensor zeros({b, std::size_t{1}}, 0.0);

        disc_.zeroGrad();
        const Tensor realOut = disc_.forward(realBatch);
        const LossResult lossReal = evalLoss(LossKind::Bce, realOut, ones);
        disc_.backward(lossReal.grad);
        const Tensor fakeOut = disc_.forward(recon);
        const LossResult lossFake = evalLoss(LossKind::Bce, fakeOut, zeros);
        disc_.backward(lossFake.grad);
        opt_.apply(disc_.params(), disc_.grads());

        for (std::size_t i = 0; i < b; ++i) {
            if (realOut.values[i] > 0.5) ++correctReal_;
            if (fakeOut.values[i] < 0.5) ++correctFake_;
        }
        seen_ += b;
        entry.discriminator += 0.5 * (lossReal.value + lossFake.value);
        ++batches_;

        if (weight_ > 0.0) {
            // Non-saturating generator-facing term: reconstruction -> "real".
            disc_.zeroGrad();
            const Tensor advOut = disc_.forward(recon);
            const LossResult adv = evalLoss(LossKind::Bce, advOut, ones);
            const Tensor inputGrad = disc_.backward(adv.grad);
            for (std::size_t i = 0; i < reconGrad.size(); ++i)
                reconGrad.values[i] += weight_ * inputGrad.values[i];
            entry.generator += adv.value;
            disc_.zeroGrad();
        }
    }

    void onEpochEnd(EpochLog& entry) override {
        if (batches_ > 0) {
            entry.discriminator /= static_cast<double>(batches_);
            entry.generator /= static_cast<double>(batches_);
        }
        const bool perfect =
            seen_ > 0 && correctReal_ == seen_ && correctFake_ == seen_;
        perfectRun_ = perfect ? perfectRun_ + 1 : 0;
        if (perfectRun_ >= 10 && !warned_) {
            warnings_.push_back(
                "discriminator collapse: perfect real/fake accuracy for 10 "
                "consecutive epochs");
            warned_ = true;
        }
        batches_ = 0;
        seen_ = correctReal_ = correctFake_ = 0;
    }

private:
    Network& disc_;
    double weight_;
    OptimizerState opt_;
    std::vector<std::string>& warnings_;
    std::size_t batches_ = 0;
    std::size_t seen_ = 0, correctReal_ = 0, correctFake_ = 0;
    int perfectRun_ = 0;
    bool warned_ = false;
};

std::vector<std::size_t> encodeImage(const Network& encoder,
                                     const CodeBook& codebook,
                                     const ImageSample& image) {
    const auto g = static_cast<std::size_t>(image.gridSize);
    Tensor x({1, 1, g, g});
    x.values = image.pixels;
    const Tensor ze = encoder.infer(x);
    const std::size_t hw = ze.shape[2] * ze.shape[3];
    std::vector<std::size_t> codes(hw);
    std::vector<double> z(codebook.dim);
    for (std::size_t p = 0; p < hw; ++p) {
        for (std::size_t c = 0; c < codebook.dim; ++c)
            z[c] = ze.values[c * hw + p];
        codes[p] = nearestEntry(z, codebook);
    }
    return codes;
}

ImageSample decodeCodes(const Network& decoder, const CodeBook& codebook,
                        int codeGrid, int gridSize,
                        const std::vector<std::size_t>& codes, int label) {
    const auto h = static_cast<std::size_t>(codeGrid);
    if (codes.size() != h * h)
        throw std::invalid_argument("code grid size mismatch");
    const std::size_t dim = codebook.dim;
    Tensor zq({1, dim, h, h});
    for (std::size_t p = 0; p < h * h; ++p)
        for (std::size_t c = 0; c < dim; ++c)
            zq.values[c * h * h + p] = codebook.entries[codes[p] * dim + c];
    const Tensor out = decoder.infer(zq);
    ImageSample img;
    img.gridSize = gridSize;
    img.label = label;
    img.pixels = out.values;
    return img;
}

}  // namespace

VqganModel vqganTrain(const std::vector<ImageSample>& images,
                      const VqganConfig& config) {
    vqdetail::validateTrainingImages(images);
    auto ae = vqdetail::makeAutoencoder(images[0].gridSize, config.channels,
                                        config.codeDim, config.codebookK,
                                        config.seed);
    VqganModel model;
    model.config = config;
    model.gridSize = ae.gridSize;
    model.codeGrid = ae.codeGrid;
    model.discriminator = makeVqganDiscriminator(
        images[0].gridSize, deriveSeed(config.seed, "vqgan/disc"));

    AdversarialHook hook(model.discriminator, config.adversarialWeight,
                         config.discriminatorLearningRate, model.warnings);
    vqdetail::trainAutoencoder(ae, images, config.epochs, config.beta,
                               config.learningRate, config.batchSize,
                               config.seed, model.log, &hook);
    model.encoder = std::move(ae.encoder);
    model.decoder = std::move(ae.decoder);
    model.codebook = std::move(ae.codebook);

    // Causal self-attention prior over the flattened code sequences.
    std::vector<std::vector<std::size_t>> sequences;
    std::vector<int> labels;
    sequences.reserve(images.size());
    for (const auto& image : images) {
        sequences.push_back(
            encodeImage(model.encoder, model.codebook, image));
        labels.push_back(image.label);
    }
    AttentionPriorConfig pc;
    pc.vocab = model.codebook.entryCount;
    pc.seqLen = static_cast<std::size_t>(model.codeGrid) *
                static_cast<std::size_t>(model.codeGrid);
    pc.width = config.priorWidth;
    pc.heads = config.priorHeads;
    pc.layerCount = 2;
    pc.seed = deriveSeed(config.seed, "vqgan/prior");
    model.prior = TransformerPrior(pc);

    OptimizerState priorOpt = OptimizerState::adam(config.priorLearningRate);
    Rng shuffleRng(deriveSeed(config.seed, "vqgan/prior-train"));
    for (int epoch = 1; epoch <= config.priorEpochs; ++epoch) {
        std::vector<std::size_t> order(sequences.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffleRng.shuffle(order);
        double lossSum = 0.0;
        std::size_t steps = 0;
        for (std::size_t start = 0; start < order.size();
             start += config.batchSize) {
            const std::size_t end =
                std::min(order.size(), start + config.batchSize);
            std::vector<std::vector<std::size_t>> batchSeqs;
            std::vector<int> batchLabels;
            for (std::size_t i = start; i < end; ++i) {
                batchSeqs.push_back(sequences[order[i]]);
                batchLabels.push_back(labels[order[i]]);
            }
            model.prior.zeroGrad();
            const double loss = model.prior.lossAndGrad(batchSeqs, batchLabels);
            if (!std::isfinite(loss))
                throw std::runtime_error("non-finite prior loss at epoch " +
                                         std::to_string(epoch));
            priorOpt.apply(model.prior.params(), model.prior.grads());
            lossSum += loss;
            ++steps;
        }
        EpochLog entry;
        entry.epoch = epoch;
        entry.total = lossSum / static_cast<double>(steps);
        model.priorLog.push_back(entry);
    }
    return model;
}

std::vector<std::size_t> vqganEncode(const VqganModel& model,
                                     const ImageSample& image) {
    return encodeImage(model.encoder, model.codebook, image);
}

std::vector<ImageSample> vqganGenerate(const VqganModel& model, int label,
                                       std::size_t count, std::uint64_t seed,
                                       bool rawRandomCodes) {
    Rng rng(deriveSeed(seed, "vqgan/generate"));
    const std::size_t hw = static_cast<std::size_t>(model.codeGrid) *
                           static_cast<std::size_t>(model.codeGrid);
    std::vector<ImageSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::size_t> codes;
        if (rawRandomCodes) {
            codes.resize(hw);
            for (auto& code : codes) code = rng.index(model.codebook.entryCount);
        } else {
            codes = model.prior.sample(label, rng);
        }
        ImageSample img = decodeCodes(model.decoder, model.codebook,
                                      model.codeGrid, model.gridSize, codes,
                                      label);
        img.synthetic = true;
        clampPixels(img);
        out.push_back(std::move(img));
    }
    return out;
}

MinorityGeneration generateMinority(const GenerativeModel& model,
                                    const TabularDataset& train,
                                    const PixelMapping& mapping,
                                    std::uint64_t seed) {
    std::size_t majority = 0, minority = 0;
    for (int label : train.labels) (label == 1 ? minority : majority) += 1;
    MinorityGeneration gen;
    if (majority <= minority) return gen;
    const std::size_t need = majority - minority;

    switch (model.kind) {
        case GenerativeKind::Cgan:
            if (!model.cgan)
                throw std::invalid_argument("generative bundle lacks a cGAN");
            gen.images = cganGenerate(*model.cgan, 1, need, seed);
            break;
        case GenerativeKind::Vqvae:
            if (!model.vqvae || !model.vqvaePrior)
                throw std::invalid_argument(
                    "generative bundle lacks a VQVAE or its prior");
            gen.images =
                vqvaeGenerate(*model.vqvae, *model.vqvaePrior, 1, need, seed);
            break;
        case GenerativeKind::Vqgan:
            if (!model.vqgan)
                throw std::invalid_argument("generative bundle lacks a VQGAN");
            gen.images = vqganGenerate(*model.vqgan, 1, need, seed);
            break;
    }

    gen.rows.reserve(gen.images.size());
    for (auto& img : gen.images) {
        gen.clampedPixelCount += clampPixels(img);
        gen.rows.push_back(inverseTransform(img, mapping, true));
    }
    return gen;
}

}  // namespace tabaug
