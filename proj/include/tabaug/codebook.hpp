#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tabaug {

/// Discrete latent vocabulary for the VQ models: K entries of width dim plus
/// a usage histogram filled by quantization calls.
struct CodeBook {
    std::size_t entryCount = 0;
    std::size_t dim = 0;
    std::vector<double> entries;                // entryCount x dim, row-major
    std::vector<std::uint64_t> usageHistogram;  // entryCount

    std::span<const double> entry(std::size_t k) const {
        return {entries.data() + k * dim, dim};
    }
};

/// Seeded uniform initialization in [-limit, limit].
CodeBook makeCodeBook(std::size_t entryCount, std::size_t dim,
                      std::uint64_t seed, double limit = 1.0);

/// Index of the nearest entry by squared Euclidean distance, ties broken by
/// the lowest index. Increments the usage histogram.
std::size_t vqQuantize(std::span<const double> z, CodeBook& codebook);

/// Same lookup without touching the histogram.
std::size_t nearestEntry(std::span<const double> z, const CodeBook& codebook);

/// Fraction of entries with zero recorded usage.
double deadEntryFraction(const CodeBook& codebook);

}  // namespace tabaug
