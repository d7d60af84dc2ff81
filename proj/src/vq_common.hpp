#pragma once

#include <stdexcept>
#include <vector>

#include "tabaug/genmodels.hpp"

// Shared internals of the two VQ trainers. vqganTrain reuses the exact
// autoencoder path (same derived random stream), which is what makes its
// adversarial_weight = 0 reduction to vqvaeTrain bitwise.
namespace tabaug::vqdetail {

inline void validateTrainingImages(const std::vector<ImageSample>& images) {
    if (images.empty()) throw std::invalid_argument("no training images");
    for (const auto& img : images)
        if (img.gridSize != images[0].gridSize)
            throw std::invalid_argument("mixed grid sizes in training images");
}

struct AeComponents {
    Network encoder;
    Network decoder;
    CodeBook codebook;
    int gridSize = 0;
    int codeGrid = 0;
};

AeComponents makeAutoencoder(int gridSize, std::size_t channels,
                             std::size_t codeDim, std::size_t codebookK,
                             std::uint64_t seed);

/// Per-batch extension point used by the VQGAN trainer. `reconGrad` is the
/// reconstruction-loss gradient with respect to the decoder output; a hook
/// may add its own (weighted) term before the decoder backward pass runs.
class AeBatchHook {
public:
    virtual ~AeBatchHook() = default;
    virtual void onBatch(const Tensor& realBatch, const Tensor& recon,
                         Tensor& reconGrad, EpochLog& entry) = 0;
    virtual void onEpochEnd(EpochLog& entry) = 0;
};

void trainAutoencoder(AeComponents& ae, const std::vector<ImageSample>& images,
                      int epochs, double beta, double learningRate,
                      std::size_t batchSize, std::uint64_t seed,
                      std::vector<EpochLog>& log, AeBatchHook* hook);

/// Nearest-entry quantization of an encoder output batch {B, dim, h, w};
/// assignments are per sample in raster order.
void quantizeBatch(const Tensor& ze, const CodeBook& codebook, Tensor& zq,
                   std::vector<std::size_t>& assignments);

Tensor imagesToTensor(const std::vector<ImageSample>& images,
                      const std::vector<std::size_t>& indices);

}  // namespace tabaug::vqdetail
