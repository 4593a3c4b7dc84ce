#pragma once

#include <array>
#include <cstdint>

namespace cfmoll {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key);
};

/// Independent random stream identified by (seed, task). Draws depend only on
/// that pair and on the position in the stream, so work split into tasks is
/// reproducible however the tasks are scheduled.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::uint64_t task);

    std::uint32_t next_u32();
    /// Uniform on the open interval (0, 1), 53 random bits.
    double uniform();
    /// Standard normal via Box-Muller.
    double normal();

private:
    Philox4x32::Key key_;
    std::uint64_t task_;
    std::uint64_t block_ = 0;
    Philox4x32::Counter buffer_{};
    int used_ = 4;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// Tasks in different domains never share a stream.
inline constexpr std::uint64_t task_in_domain(std::uint64_t domain, std::uint64_t task)
{
    return (domain << 48) ^ task;
}

} // namespace cfmoll
