#include "cfmoll/random.hpp"

#include <cmath>
#include <numbers>

namespace cfmoll {

namespace {

constexpr std::uint32_t mul0 = 0xD2511F53u;
constexpr std::uint32_t mul1 = 0xCD9E8D57u;
constexpr std::uint32_t weyl0 = 0x9E3779B9u;
constexpr std::uint32_t weyl1 = 0xBB67AE85u;

Philox4x32::Counter round(const Philox4x32::Counter& c, const Philox4x32::Key& k)
{
    const std::uint64_t p0 = std::uint64_t(mul0) * c[0];
    const std::uint64_t p1 = std::uint64_t(mul1) * c[2];
    return {std::uint32_t(p1 >> 32) ^ c[1] ^ k[0], std::uint32_t(p1), std::uint32_t(p0 >> 32) ^ c[3] ^ k[1],
            std::uint32_t(p0)};
}

} // namespace

Philox4x32::Counter Philox4x32::block(Counter counter, Key key)
{
    counter = round(counter, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += weyl0;
        key[1] += weyl1;
        counter = round(counter, key);
    }
    return counter;
}

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t task)
    : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)}, task_(task)
{
}

std::uint32_t RandomStream::next_u32()
{
    if (used_ == 4) {
        buffer_ = Philox4x32::block(
            {std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(task_), std::uint32_t(task_ >> 32)},
            key_);
        ++block_;
        used_ = 0;
    }
    return buffer_[std::size_t(used_++)];
}

double RandomStream::uniform()
{
    const std::uint32_t a = next_u32() >> 5;
    const std::uint32_t b = next_u32() >> 6;
    return (double(a) * 67108864.0 + double(b) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal()
{
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    const double radius = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

} // namespace cfmoll
