#pragma once

#include <array>
#include <cstdint>

namespace hybridsim {

/// Philox4x32-10 block function: 128-bit counter, 64-bit key.
[[nodiscard]] std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                                         std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream. The key is the master seed, the upper half
/// of the counter is the stream id and the lower half counts blocks, so a
/// stream is a pure function of (seed, stream_id) and needs no jump-ahead.
class RngStream {
public:
    RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

    /// Uniform in the open interval (0, 1).
    [[nodiscard]] double next_uniform() noexcept;

    /// -log(next_uniform()) / rate. Throws std::invalid_argument for rate <= 0.
    [[nodiscard]] double next_exponential(double rate);

    [[nodiscard]] std::uint64_t next_u64() noexcept;

    [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
    [[nodiscard]] std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    void refill() noexcept;

    std::uint64_t seed_;
    std::uint64_t stream_id_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int available_ = 0;
};

/// Maps 64 random bits to (0, 1): the top 52 bits plus one half ulp.
[[nodiscard]] constexpr double bits_to_open_unit(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// -log(u) / rate.
[[nodiscard]] double exponential_from_uniform(double u, double rate);

}  // namespace hybridsim
