#include "tabaug/codebook.hpp"

#include <stdexcept>

#include "tabaug/rng.hpp"

namespace tabaug {

CodeBook makeCodeBook(std::size_t entryCount, std::size_t dim,
                      std::uint64_t seed, double limit) {
    if (entryCount < 2) throw std::invalid_argument("codebook needs K >= 2");
    CodeBook cb;
    cb.entryCount = entryCount;
    cb.dim = dim;
    cb.entries.resize(entryCount * dim);
    cb.usageHistogram.assign(entryCount, 0);
    Rng rng(seed);
    for (auto& v : cb.entries) v = rng.uniform(-limit, limit);
    return cb;
}

std::size_t nearestEntry(std::span<const double> z, const CodeBook& codebook) {
    if (z.size() != codebook.dim)
        throw std::invalid_argument("vq_quantize dimension mismatch");
    std::size_t best = 0;
    double bestDist = 0.0;
    for (std::size_t k = 0; k < codebook.entryCount; ++k) {
        const double* c = codebook.entries.data() + k * codebook.dim;
        double dist = 0.0;
        for (std::size_t i = 0; i < codebook.dim; ++i) {
            const double d = z[i] - c[i];
            dist += d * d;
        }
        if (k == 0 || dist < bestDist) {
            best = k;
            bestDist = dist;
        }
    }
    return best;
}

std::size_t vqQuantize(std::span<const double> z, CodeBook& codebook) {
    const std::size_t k = nearestEntry(z, codebook);
    ++codebook.usageHistogram[k];
    return k;
}

double deadEntryFraction(const CodeBook& codebook) {
    if (codebook.entryCount == 0) return 0.0;
    std::size_t dead = 0;
    for (auto c : codebook.usageHistogram)
        if (c == 0) ++dead;
    return static_cast<double>(dead) / static_cast<double>(codebook.entryCount);
}

}  // namespace tabaug
