#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace snvsim {

// Philox4x32-10 counter-based generator (Salmon et al., Random123).
// The 128-bit counter is split into a 64-bit stream index (high words,
// fixed per stream) and a 64-bit draw position (low words). Deriving a
// stream is O(1) and streams for distinct indices are independent, which
// is what makes worker-count-independent parallel runs possible.
struct Philox4x32 {
    std::array<std::uint32_t, 2> key{};
    std::array<std::uint32_t, 4> ctr{};

    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> c,
                                              std::array<std::uint32_t, 2> k) {
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k[0] += kWeyl0;
                k[1] += kWeyl1;
            }
            const std::uint64_t p0 = std::uint64_t(kMul0) * c[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * c[2];
            const std::uint32_t hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
            const std::uint32_t hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
            c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        }
        return c;
    }
};

class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream_index) {
        gen_.key = {std::uint32_t(seed), std::uint32_t(seed >> 32)};
        gen_.ctr = {0, 0, std::uint32_t(stream_index), std::uint32_t(stream_index >> 32)};
    }

    std::uint32_t u32() {
        if (buf_pos_ == 4) refill();
        return buf_[buf_pos_++];
    }

    std::uint64_t u64() {
        const std::uint64_t lo = u32();
        const std::uint64_t hi = u32();
        return lo | (hi << 32);
    }

    // uniform in [0, 1) with 53-bit resolution
    double uniform() { return double(u64() >> 11) * 0x1.0p-53; }

    double exponential(double rate) {
        if (rate <= 0.0) return std::numeric_limits<double>::infinity();
        return -std::log1p(-uniform()) / rate;
    }

    double normal(double mean = 0.0, double sigma = 1.0) {
        if (have_spare_) {
            have_spare_ = false;
            return mean + sigma * spare_;
        }
        // trig Box-Muller: fixed two-uniform cost keeps draw accounting simple
        const double u1 = 1.0 - uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return mean + sigma * r * std::cos(a);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Exact Poisson sampler: Knuth product below the crossover, Hormann's
    // PTRS transformed rejection above it. Both consume only this stream,
    // so results are platform-independent.
    std::int64_t poisson(double mean) {
        if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
        if (mean == 0.0) return 0;
        if (mean < 30.0) return poisson_knuth(mean);
        return poisson_ptrs(mean);
    }

private:
    void refill() {
        buf_ = Philox4x32::block(gen_.ctr, gen_.key);
        buf_pos_ = 0;
        if (++gen_.ctr[0] == 0) ++gen_.ctr[1];  // 64-bit position increment
    }

    std::int64_t poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::int64_t poisson_ptrs(double mean) {
        const double b = 0.931 + 2.53 * std::sqrt(mean);
        const double a = -0.059 + 0.02483 * b;
        const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        const double v_r = 0.9277 - 3.6224 / (b - 2.0);
        const double log_mean = std::log(mean);
        for (;;) {
            const double u = uniform() - 0.5;
            const double v = uniform();
            const double us = 0.5 - std::abs(u);
            const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
            if (us >= 0.07 && v <= v_r) return std::int64_t(kf);
            if (kf < 0.0 || (us < 0.013 && v > us)) continue;
            if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
                kf * log_mean - mean - std::lgamma(kf + 1.0)) {
                return std::int64_t(kf);
            }
        }
    }

    Philox4x32 gen_;
    std::array<std::uint32_t, 4> buf_{};
    int buf_pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

inline RngStream derive_stream(std::uint64_t seed, std::uint64_t stream_index) {
    return RngStream(seed, stream_index);
}

}  // namespace snvsim
