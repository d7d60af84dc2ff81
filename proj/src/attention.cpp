#include "tabaug/attention.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tabaug {

namespace {

/// Y = X * M + b with X (rows x in), M (in x out) row-major.
void linearForward(const std::vector<double>& x, const double* m,
                   const double* b, std::size_t rows, std::size_t in,
                   std::size_t out, std::vector<double>& y) {
    y.assign(rows * out, 0.0);
    for (std::size_t t = 0; t < rows; ++t) {
        const double* xr = x.data() + t * in;
        double* yr = y.data() + t * out;
        for (std::size_t o = 0; o < out; ++o) yr[o] = b[o];
        for (std::size_t i = 0; i < in; ++i) {
            const double xv = xr[i];
            if (xv == 0.0) continue;
            const double* mr = m + i * out;
            for (std::size_t o = 0; o < out; ++o) yr[o] += xv * mr[o];
        }
    }
}

/// Accumulates dM += X^T * dY, db += colsum(dY) and dX += dY * M^T.
void linearBackward(const std::vector<double>& x, const double* m,
                    const std::vector<double>& dy, std::size_t rows,
                    std::size_t in, std::size_t out, double* dm, double* db,
                    std::vector<double>& dx) {
    for (std::size_t t = 0; t < rows; ++t) {
        const double* xr = x.data() + t * in;
        const double* dyr = dy.data() + t * out;
        double* dxr = dx.data() + t * in;
        for (std::size_t o = 0; o < out; ++o) db[o] += dyr[o];
        for (std::size_t i = 0; i < in; ++i) {
            const double* mr = m + i * out;
            double* dmr = dm + i * out;
            double acc = 0.0;
            for (std::size_t o = 0; o < out; ++o) {
                dmr[o] += xr[i] * dyr[o];
                acc += dyr[o] * mr[o];
            }
            dxr[i] += acc;
        }
    }
}

}  // namespace

struct TransformerPrior::Cache {
    struct LayerCache {
        std::vector<double> xin, q, k, v, attn, o, xmid, f1pre, f1;
    };
    std::vector<LayerCache> layers;
    std::vector<double> xFinal;
};

TransformerPrior::TransformerPrior(AttentionPriorConfig config)
    : config_(config) {
    const std::size_t w = config_.width;
    if (config_.vocab < 2) throw std::invalid_argument("prior vocab must be >= 2");
    if (config_.heads == 0 || w % config_.heads != 0)
        throw std::invalid_argument("attention width must divide into heads");
    const std::size_t f = config_.ffMult * w;
    const std::size_t t = config_.seqLen;
    const std::size_t k = config_.vocab;

    std::size_t cursor = 0;
    auto reserve = [&cursor](std::size_t count) {
        const std::size_t off = cursor;
        cursor += count;
        return off;
    };
    offTokenEmbed_ = reserve(k * w);
    offStartEmbed_ = reserve(w);
    offPosEmbed_ = reserve(t * w);
    offClassEmbed_ = reserve(2 * w);
    for (std::size_t l = 0; l < config_.layerCount; ++l) {
        LayerOffsets lo;
        lo.wq = reserve(w * w);
        lo.bq = reserve(w);
        lo.wk = reserve(w * w);
        lo.bk = reserve(w);
        lo.wv = reserve(w * w);
        lo.bv = reserve(w);
        lo.wo = reserve(w * w);
        lo.bo = reserve(w);
        lo.w1 = reserve(w * f);
        lo.b1 = reserve(f);
        lo.w2 = reserve(f * w);
        lo.b2 = reserve(w);
        layerOffsets_.push_back(lo);
    }
    offHead_ = reserve(w * k);
    offHeadBias_ = reserve(k);

    params_.assign(cursor, 0.0);
    grads_.assign(cursor, 0.0);

    Rng rng(config_.seed);
    auto fillUniform = [&](std::size_t off, std::size_t count, double limit) {
        for (std::size_t i = 0; i < count; ++i)
            params_[off + i] = rng.uniform(-limit, limit);
    };
    fillUniform(offTokenEmbed_, k * w, 0.1);
    fillUniform(offStartEmbed_, w, 0.1);
    fillUniform(offPosEmbed_, t * w, 0.1);
    fillUniform(offClassEmbed_, 2 * w, 0.1);
    const double heW = std::sqrt(6.0 / static_cast<double>(w));
    const double heF = std::sqrt(6.0 / static_cast<double>(f));
    for (const auto& lo : layerOffsets_) {
        fillUniform(lo.wq, w * w, heW);
        fillUniform(lo.wk, w * w, heW);
        fillUniform(lo.wv, w * w, heW);
        fillUniform(lo.wo, w * w, heW);
        fillUniform(lo.w1, w * f, heW);
        fillUniform(lo.w2, f * w, heF);
    }
    fillUniform(offHead_, w * k, heW);
}

void TransformerPrior::zeroGrad() {
    std::fill(grads_.begin(), grads_.end(), 0.0);
}

std::vector<double> TransformerPrior::forwardOne(
    const std::vector<std::size_t>& tokens, int label, Cache* cache) const {
    const std::size_t w = config_.width;
    const std::size_t t = config_.seqLen;
    const std::size_t heads = config_.heads;
    const std::size_t hd = w / heads;
    const std::size_t f = config_.ffMult * w;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    if (tokens.size() != t)
        throw std::invalid_argument("prior sequence length mismatch");
    if (label != 0 && label != 1)
        throw std::invalid_argument("prior label must be 0 or 1");

    std::vector<double> x(t * w);
    const double* classEmbed = params_.data() + offClassEmbed_ +
                               static_cast<std::size_t>(label) * w;
    for (std::size_t p = 0; p < t; ++p) {
        const double* base =
            p == 0 ? params_.data() + offStartEmbed_
                   : params_.data() + offTokenEmbed_ + tokens[p - 1] * w;
        const double* pos = params_.data() + offPosEmbed_ + p * w;
        double* row = x.data() + p * w;
        for (std::size_t i = 0; i < w; ++i) row[i] = base[i] + pos[i] + classEmbed[i];
    }

    if (cache) cache->layers.resize(config_.layerCount);
    for (std::size_t l = 0; l < config_.layerCount; ++l) {
        const auto& lo = layerOffsets_[l];
        std::vector<double> q, k, v;
        linearForward(x, params_.data() + lo.wq, params_.data() + lo.bq, t, w, w, q);
        linearForward(x, params_.data() + lo.wk, params_.data() + lo.bk, t, w, w, k);
        linearForward(x, params_.data() + lo.wv, params_.data() + lo.bv, t, w, w, v);

        std::vector<double> attn(heads * t * t, 0.0);
        std::vector<double> o(t * w, 0.0);
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t col = h * hd;
            for (std::size_t i = 0; i < t; ++i) {
                double mx = -1e300;
                std::vector<double> s(i + 1);
                for (std::size_t j = 0; j <= i; ++j) {
                    double dot = 0.0;
                    for (std::size_t c = 0; c < hd; ++c)
                        dot += q[i * w + col + c] * k[j * w + col + c];
                    s[j] = dot * scale;
                    mx = std::max(mx, s[j]);
                }
                double sum = 0.0;
                for (std::size_t j = 0; j <= i; ++j) {
                    s[j] = std::exp(s[j] - mx);
                    sum += s[j];
                }
                for (std::size_t j = 0; j <= i; ++j) {
                    const double a = s[j] / sum;
                    attn[(h * t + i) * t + j] = a;
                    for (std::size_t c = 0; c < hd; ++c)
                        o[i * w + col + c] += a * v[j * w + col + c];
                }
            }
        }
        std::vector<double> attnOut;
        linearForward(o, params_.data() + lo.wo, params_.data() + lo.bo, t, w, w,
                      attnOut);
        std::vector<double> xmid(t * w);
        for (std::size_t i = 0; i < t * w; ++i) xmid[i] = x[i] + attnOut[i];

        std::vector<double> f1pre;
        linearForward(xmid, params_.data() + lo.w1, params_.data() + lo.b1, t, w,
                      f, f1pre);
        std::vector<double> f1(f1pre);
        for (auto& vv : f1) vv = vv > 0.0 ? vv : 0.0;
        std::vector<double> f2;
        linearForward(f1, params_.data() + lo.w2, params_.data() + lo.b2, t, f, w,
                      f2);

        if (cache) {
            auto& lc = cache->layers[l];
            lc.xin = x;
            lc.q = std::move(q);
            lc.k = std::move(k);
            lc.v = std::move(v);
            lc.attn = std::move(attn);
            lc.o = std::move(o);
            lc.xmid = xmid;
            lc.f1pre = std::move(f1pre);
            lc.f1 = std::move(f1);
        }
        for (std::size_t i = 0; i < t * w; ++i) x[i] = xmid[i] + f2[i];
    }

    if (cache) cache->xFinal = x;
    std::vector<double> logits;
    linearForward(x, params_.data() + offHead_, params_.data() + offHeadBias_, t,
                  w, config_.vocab, logits);
    return logits;
}

void TransformerPrior::backwardOne(const std::vector<std::size_t>& tokens,
                                   int label, const Cache& cache,
                                   const std::vector<double>& logitGrad) {
    const std::size_t w = config_.width;
    const std::size_t t = config_.seqLen;
    const std::size_t heads = config_.heads;
    const std::size_t hd = w / heads;
    const std::size_t f = config_.ffMult * w;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));

    std::vector<double> dx(t * w, 0.0);
    linearBackward(cache.xFinal, params_.data() + offHead_, logitGrad, t, w,
                   config_.vocab, grads_.data() + offHead_,
                   grads_.data() + offHeadBias_, dx);

    for (std::size_t l = config_.layerCount; l-- > 0;) {
        const auto& lo = layerOffsets_[l];
        const auto& lc = cache.layers[l];

        // Feed-forward block: x_out = xmid + relu(xmid*W1 + b1)*W2 + b2.
        std::vector<double> df1(t * f, 0.0);
        std::vector<double> dxmid = dx;  // residual branch
        linearBackward(lc.f1, params_.data() + lo.w2, dx, t, f, w,
                       grads_.data() + lo.w2, grads_.data() + lo.b2, df1);
        for (std::size_t i = 0; i < t * f; ++i)
            if (lc.f1pre[i] <= 0.0) df1[i] = 0.0;
        linearBackward(lc.xmid, params_.data() + lo.w1, df1, t, w, f,
                       grads_.data() + lo.w1, grads_.data() + lo.b1, dxmid);

        // Attention block: xmid = xin + (heads(xin))*Wo + bo.
        std::vector<double> dxin = dxmid;  // residual branch
        std::vector<double> dO(t * w, 0.0);
        linearBackward(lc.o, params_.data() + lo.wo, dxmid, t, w, w,
                       grads_.data() + lo.wo, grads_.data() + lo.bo, dO);

        std::vector<double> dq(t * w, 0.0), dk(t * w, 0.0), dv(t * w, 0.0);
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t col = h * hd;
            for (std::size_t i = 0; i < t; ++i) {
                std::vector<double> da(i + 1, 0.0);
                for (std::size_t j = 0; j <= i; ++j) {
                    const double a = lc.attn[(h * t + i) * t + j];
                    double dot = 0.0;
                    for (std::size_t c = 0; c < hd; ++c) {
                        dot += dO[i * w + col + c] * lc.v[j * w + col + c];
                        dv[j * w + col + c] += a * dO[i * w + col + c];
                    }
                    da[j] = dot;
                }
                double sumAd = 0.0;
                for (std::size_t j = 0; j <= i; ++j)
                    sumAd += da[j] * lc.attn[(h * t + i) * t + j];
                for (std::size_t j = 0; j <= i; ++j) {
                    const double a = lc.attn[(h * t + i) * t + j];
                    const double ds = a * (da[j] - sumAd) * scale;
                    for (std::size_t c = 0; c < hd; ++c) {
                        dq[i * w + col + c] += ds * lc.k[j * w + col + c];
                        dk[j * w + col + c] += ds * lc.q[i * w + col + c];
                    }
                }
            }
        }
        linearBackward(lc.xin, params_.data() + lo.wq, dq, t, w, w,
                       grads_.data() + lo.wq, grads_.data() + lo.bq, dxin);
        linearBackward(lc.xin, params_.data() + lo.wk, dk, t, w, w,
                       grads_.data() + lo.wk, grads_.data() + lo.bk, dxin);
        linearBackward(lc.xin, params_.data() + lo.wv, dv, t, w, w,
                       grads_.data() + lo.wv, grads_.data() + lo.bv, dxin);
        dx = std::move(dxin);
    }

    double* gradClass = grads_.data() + offClassEmbed_ +
                        static_cast<std::size_t>(label) * w;
    for (std::size_t p = 0; p < t; ++p) {
        const double* row = dx.data() + p * w;
        double* gradPos = grads_.data() + offPosEmbed_ + p * w;
        double* gradBase = p == 0 ? grads_.data() + offStartEmbed_
                                  : grads_.data() + offTokenEmbed_ +
                                        tokens[p - 1] * w;
        for (std::size_t i = 0; i < w; ++i) {
            gradPos[i] += row[i];
            gradClass[i] += row[i];
            gradBase[i] += row[i];
        }
    }
}

std::vector<double> TransformerPrior::logits(
    const std::vector<std::size_t>& tokens, int label) const {
    return forwardOne(tokens, label, nullptr);
}

double TransformerPrior::lossAndGrad(
    const std::vector<std::vector<std::size_t>>& sequences,
    const std::vector<int>& labels) {
    if (sequences.size() != labels.size())
        throw std::invalid_argument("sequence/label count mismatch");
    const std::size_t t = config_.seqLen;
    const std::size_t k = config_.vocab;
    const double scale =
        1.0 / (static_cast<double>(sequences.size()) * static_cast<double>(t));
    double loss = 0.0;
    for (std::size_t s = 0; s < sequences.size(); ++s) {
        Cache cache;
        const std::vector<double> lg =
            forwardOne(sequences[s], labels[s], &cache);
        std::vector<double> dLogits(t * k, 0.0);
        for (std::size_t p = 0; p < t; ++p) {
            const double* row = lg.data() + p * k;
            const std::size_t y = sequences[s][p];
            if (y >= k)
                throw std::invalid_argument("code index exceeds prior vocab");
            double mx = row[0];
            for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, row[c]);
            double sum = 0.0;
            for (std::size_t c = 0; c < k; ++c) sum += std::exp(row[c] - mx);
            const double lse = mx + std::log(sum);
            loss += (lse - row[y]) * scale;
            double* drow = dLogits.data() + p * k;
            for (std::size_t c = 0; c < k; ++c)
                drow[c] = (std::exp(row[c] - lse) - (c == y ? 1.0 : 0.0)) * scale;
        }
        backwardOne(sequences[s], labels[s], cache, dLogits);
    }
    return loss;
}

double TransformerPrior::sequenceLogProb(const std::vector<std::size_t>& tokens,
                                         int label) const {
    const std::size_t t = config_.seqLen;
    const std::size_t k = config_.vocab;
    const std::vector<double> lg = logits(tokens, label);
    double logProb = 0.0;
    for (std::size_t p = 0; p < t; ++p) {
        const double* row = lg.data() + p * k;
        double mx = row[0];
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        for (std::size_t c = 0; c < k; ++c) sum += std::exp(row[c] - mx);
        logProb += row[tokens[p]] - (mx + std::log(sum));
    }
    return logProb;
}

std::vector<std::size_t> TransformerPrior::sample(int label, Rng& rng) const {
    const std::size_t t = config_.seqLen;
    const std::size_t k = config_.vocab;
    std::vector<std::size_t> tokens(t, 0);
    for (std::size_t p = 0; p < t; ++p) {
        // Causality makes row p independent of the placeholder suffix.
        const std::vector<double> lg = logits(tokens, label);
        const double* row = lg.data() + p * k;
        double mx = row[0];
        for (std::size_t c = 1; c < k; ++c) mx = std::max(mx, row[c]);
        double sum = 0.0;
        std::vector<double> probs(k);
        for (std::size_t c = 0; c < k; ++c) {
            probs[c] = std::exp(row[c] - mx);
            sum += probs[c];
        }
        const double u = rng.uniform() * sum;
        double acc = 0.0;
        std::size_t choice = k - 1;
        for (std::size_t c = 0; c < k; ++c) {
            acc += probs[c];
            if (u < acc) {
                choice = c;
                break;
            }
        }
        tokens[p] = choice;
    }
    return tokens;
}

}  // namespace tabaug
