#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace spgarch {

/// Philox4x32-10 counter-based generator (Salmon et al. 2011).
///
/// Streams: the 64-bit key is (seed, stream), so replication r of a study
/// seeded with s uses Philox(key = (s, r)) — independent streams without
/// coordination. Satisfies UniformRandomBitGenerator (32-bit output).
class Philox {
public:
    using result_type = std::uint32_t;

    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
               static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)} {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        if (pos_ == 4) {
            block_ = round10(counter_, key_);
            advance_counter();
            pos_ = 0;
        }
        return block_[pos_++];
    }

private:
    // Philox uses a 4x32 key internally; the upper two key words carry the
    // stream id (the reference algorithm keys on 2x32, extended here by
    // folding the stream words in before the rounds).
    std::array<std::uint32_t, 4> key_;
    std::array<std::uint32_t, 4> counter_{0, 0, 0, 0};
    std::array<std::uint32_t, 4> block_{};
    int pos_ = 4;

    void advance_counter() {
        for (auto& c : counter_)
            if (++c != 0) break;
    }

    static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
    }
    static std::uint32_t mullo(std::uint32_t a, std::uint32_t b) { return a * b; }

    std::array<std::uint32_t, 4> round10(std::array<std::uint32_t, 4> ctr,
                                         std::array<std::uint32_t, 4> key) const {
        constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
        constexpr std::uint32_t C0 = 0x9E3779B9u, C1 = 0xBB67AE85u;
        // Fold the stream words into the round key once up front.
        std::uint32_t k0 = key[0] ^ key[2];
        std::uint32_t k1 = key[1] ^ key[3];
        for (int r = 0; r < 10; ++r) {
            std::uint32_t lo0 = mullo(M0, ctr[0]), hi0 = mulhi(M0, ctr[0]);
            std::uint32_t lo1 = mullo(M1, ctr[2]), hi1 = mulhi(M1, ctr[2]);
            ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
            k0 += C0;
            k1 += C1;
        }
        return ctr;
    }
};

}  // namespace spgarch
