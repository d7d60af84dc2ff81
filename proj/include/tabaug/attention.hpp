#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tabaug/rng.hpp"

namespace tabaug {

struct AttentionPriorConfig {
    std::size_t vocab = 0;
    std::size_t seqLen = 0;
    std::size_t width = 64;
    std::size_t heads = 4;
    std::size_t layerCount = 2;
    std::size_t ffMult = 2;
    std::uint64_t seed = 0;
};

/// Small causal self-attention language model over code indices, used as the
/// VQGAN prior. Class conditioning is a learned embedding added to every
/// input position. Forward and reverse passes are written out by hand and
/// validated against finite differences in the tests.
class TransformerPrior {
public:
    TransformerPrior() = default;
    explicit TransformerPrior(AttentionPriorConfig config);

    const AttentionPriorConfig& config() const { return config_; }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }
    std::span<double> grads() { return grads_; }
    void zeroGrad();
    std::size_t paramCount() const { return params_.size(); }

    /// Teacher-forced logits, {seqLen, vocab} row-major; row t conditions
    /// only on tokens strictly before t.
    std::vector<double> logits(const std::vector<std::size_t>& tokens,
                               int label) const;

    /// Mean next-token cross-entropy over all positions of all sequences;
    /// accumulates parameter gradients.
    double lossAndGrad(const std::vector<std::vector<std::size_t>>& sequences,
                       const std::vector<int>& labels);

    double sequenceLogProb(const std::vector<std::size_t>& tokens,
                           int label) const;

    /// Ancestral sampling in raster order.
    std::vector<std::size_t> sample(int label, Rng& rng) const;

private:
    struct Cache;
    std::vector<double> forwardOne(const std::vector<std::size_t>& tokens,
                                   int label, Cache* cache) const;
    void backwardOne(const std::vector<std::size_t>& tokens, int label,
                     const Cache& cache, const std::vector<double>& logitGrad);

    AttentionPriorConfig config_;
    std::vector<double> params_;
    std::vector<double> grads_;

    // Flat-buffer offsets, fixed at construction.
    std::size_t offTokenEmbed_ = 0, offStartEmbed_ = 0, offPosEmbed_ = 0,
                offClassEmbed_ = 0, offHead_ = 0, offHeadBias_ = 0;
    struct LayerOffsets {
        std::size_t wq, bq, wk, bk, wv, bv, wo, bo, w1, b1, w2, b2;
    };
    std::vector<LayerOffsets> layerOffsets_;
};

}  // namespace tabaug
