#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tabaug/attention.hpp"
#include "tabaug/codebook.hpp"
#include "tabaug/dataset.hpp"
#include "tabaug/nn.hpp"
#include "tabaug/pixelmap.hpp"

namespace tabaug {

enum class GenerativeKind { Cgan, Vqvae, Vqgan };

std::string generativeKindName(GenerativeKind kind);

/// One log line per epoch. Which fields are meaningful depends on the model:
/// cGAN fills discriminator/generator, the VQ models fill the reconstruction
/// triplet, VQGAN additionally fills discriminator.
struct EpochLog {
    int epoch = 0;
    double reconstruction = 0.0;
    double codebookLoss = 0.0;
    double commitment = 0.0;
    double discriminator = 0.0;
    double generator = 0.0;
    double total = 0.0;
};

void writeLossCsv(const std::vector<EpochLog>& log, const std::string& path);

// ---------------------------------------------------------------------------
// cGAN

struct CganConfig {
    int epochs = 50;
    std::size_t batchSize = 32;
    double learningRate = 2e-4;
    std::size_t noiseDim = 100;
    std::size_t labelEmbedDim = 8;
    /// Hidden widths of the generator; the discriminator mirrors them.
    std::vector<std::size_t> hiddenWidths = {512, 1024};
    std::uint64_t seed = 0;
};

struct CganModel {
    CganConfig config;
    int gridSize = 0;
    Network generator;
    Network discriminator;
    std::vector<double> generatorEmbed;      // 2 x labelEmbedDim
    std::vector<double> discriminatorEmbed;  // 2 x labelEmbedDim
    std::vector<EpochLog> log;
};

/// Alternating discriminator/generator BCE steps; both nets see the label
/// embedding concatenated to their input.
CganModel cganTrain(const std::vector<ImageSample>& images,
                    const CganConfig& config);

std::vector<ImageSample> cganGenerate(const CganModel& model, int label,
                                      std::size_t count, std::uint64_t seed);

/// Trains only the discriminator against a frozen, freshly initialized
/// generator and returns the per-step pre-update BCE losses. Test hook for
/// the windowed-decrease property.
std::vector<double> cganDiscriminatorWarmup(
    const std::vector<ImageSample>& images, const CganConfig& config,
    std::size_t steps);

// ---------------------------------------------------------------------------
// VQVAE + PixelCNN prior

struct VqvaeConfig {
    int epochs = 30;
    std::size_t codebookK = 128;
    std::size_t codeDim = 16;
    double beta = 0.25;
    double learningRate = 1e-3;
    std::size_t batchSize = 32;
    std::size_t channels = 32;
    std::uint64_t seed = 0;
};

struct VqvaeModel {
    VqvaeConfig config;
    int gridSize = 0;
    int codeGrid = 0;  // gridSize / 4 after two stride-2 convs
    Network encoder;
    Network decoder;
    CodeBook codebook;
    std::vector<EpochLog> log;
    std::vector<std::string> warnings;
};

/// Reconstruction MSE + codebook + beta-weighted commitment loss with the
/// straight-through estimator; grid size must be a multiple of 4.
VqvaeModel vqvaeTrain(const std::vector<ImageSample>& images,
                      const VqvaeConfig& config);

/// Code-grid indices for one image, in raster order.
std::vector<std::size_t> vqvaeEncode(const VqvaeModel& model,
                                     const ImageSample& image);

ImageSample vqvaeDecode(const VqvaeModel& model,
                        const std::vector<std::size_t>& codes, int label);

/// What the encoder's backward receives versus what the decoder's backward
/// produced at the quantization boundary, for one un-applied training step.
/// With beta == 0 the two are bitwise identical (pure straight-through).
struct VqvaeGradientProbe {
    std::vector<double> encoderOutputGrad;
    std::vector<double> decoderInputGrad;
};
VqvaeGradientProbe vqvaeProbeGradients(VqvaeModel& model,
                                       const ImageSample& image);

/// Frozen base-point context defining the straight-through surrogate: the
/// stop-gradient arguments of the loss become constants captured here.
struct VqvaeSurrogateContext {
    std::vector<double> offset;       // z_q - z_e at the base point
    std::vector<std::size_t> assignments;
    std::vector<double> baseZe;       // sg(z_e) for the codebook term
    std::vector<double> baseEntries;  // sg(c) per position, commitment term
};

/// Total loss with the stop-gradient arguments frozen at `context`; exactly
/// the function the analytic straight-through gradients differentiate, so a
/// valid finite-difference oracle.
double vqvaeSurrogateLoss(const VqvaeModel& model, const ImageSample& image,
                          const VqvaeSurrogateContext& context);

/// Analytic gradients of the surrogate at the current parameters,
/// concatenated as [encoder params, decoder params, codebook entries];
/// fills the context that fixes the surrogate.
std::vector<double> vqvaeAnalyticGradients(VqvaeModel& model,
                                           const ImageSample& image,
                                           VqvaeSurrogateContext& contextOut);

struct PixelCnnConfig {
    int epochs = 20;
    std::size_t channels = 64;
    double learningRate = 1e-3;
    std::size_t batchSize = 32;
    std::uint64_t seed = 0;
};

/// Class-conditional masked-convolution model over the code grid: one mask-A
/// layer, a per-class channel bias, two mask-B layers and a 1x1 head.
struct PixelCnnPrior {
    PixelCnnConfig config;
    std::size_t vocab = 0;
    int codeGrid = 0;
    Network entry;  // mask-A layer
    Network tail;   // relu + mask-B stack + 1x1 head
    std::vector<double> classBias;  // 2 x channels
    std::vector<EpochLog> log;
};

PixelCnnPrior priorTrain(const VqvaeModel& model,
                         const std::vector<ImageSample>& images,
                         const PixelCnnConfig& config);

/// Same trainer on pre-encoded code grids (raster order, values < vocab).
PixelCnnPrior priorTrainOnCodes(
    const std::vector<std::vector<std::size_t>>& sequences,
    const std::vector<int>& labels, std::size_t vocab, int codeGrid,
    const PixelCnnConfig& config);

/// Logits {vocab, h, w} for teacher-forced codes.
std::vector<double> priorLogits(const PixelCnnPrior& prior,
                                const std::vector<std::size_t>& codes,
                                int label);

double priorLogProb(const PixelCnnPrior& prior,
                    const std::vector<std::size_t>& codes, int label);

std::vector<std::size_t> priorSample(const PixelCnnPrior& prior, int label,
                                     Rng& rng);

std::vector<ImageSample> vqvaeGenerate(const VqvaeModel& model,
                                       const PixelCnnPrior& prior, int label,
                                       std::size_t count, std::uint64_t seed);

// ---------------------------------------------------------------------------
// VQGAN

struct VqganConfig {
    int epochs = 50;
    std::size_t codebookK = 128;
    std::size_t codeDim = 16;
    double beta = 0.25;
    double adversarialWeight = 0.1;
    double learningRate = 1e-3;
    double discriminatorLearningRate = 1e-4;
    std::size_t batchSize = 32;
    std::size_t channels = 32;
    int priorEpochs = 20;
    std::size_t priorWidth = 64;
    std::size_t priorHeads = 4;
    double priorLearningRate = 1e-3;
    std::uint64_t seed = 0;
};

struct VqganModel {
    VqganConfig config;
    int gridSize = 0;
    int codeGrid = 0;
    Network encoder;
    Network decoder;
    CodeBook codebook;
    Network discriminator;
    TransformerPrior prior;
    std::vector<EpochLog> log;
    std::vector<EpochLog> priorLog;
    std::vector<std::string> warnings;
};

/// VQVAE objective plus a conv-discriminator adversarial term on the
/// reconstructions, then a causal self-attention prior over the flattened
/// code sequences. With adversarial_weight exactly 0 the autoencoder phase
/// consumes the same random stream as vqvaeTrain and reproduces its losses
/// bit for bit.
VqganModel vqganTrain(const std::vector<ImageSample>& images,
                      const VqganConfig& config);

std::vector<std::size_t> vqganEncode(const VqganModel& model,
                                     const ImageSample& image);

/// Samples code sequences from the trained prior (or uniformly random codes
/// when rawRandomCodes is set) and decodes them.
std::vector<ImageSample> vqganGenerate(const VqganModel& model, int label,
                                       std::size_t count, std::uint64_t seed,
                                       bool rawRandomCodes = false);

// ---------------------------------------------------------------------------
// Minority-class generation

/// One trained generative bundle; exactly one member matching `kind` is set.
struct GenerativeModel {
    GenerativeKind kind = GenerativeKind::Vqvae;
    std::optional<CganModel> cgan;
    std::optional<VqvaeModel> vqvae;
    std::optional<PixelCnnPrior> vqvaePrior;
    std::optional<VqganModel> vqgan;
};

struct MinorityGeneration {
    /// Denormalized tabular rows for class 1.
    std::vector<std::vector<double>> rows;
    std::vector<ImageSample> images;
    std::size_t clampedPixelCount = 0;
};

/// Generates exactly majorityCount - minorityCount class-1 images, clamps
/// them to [0,1], inverse-transforms through `mapping` and denormalizes.
MinorityGeneration generateMinority(const GenerativeModel& model,
                                    const TabularDataset& train,
                                    const PixelMapping& mapping,
                                    std::uint64_t seed);

}  // namespace tabaug
