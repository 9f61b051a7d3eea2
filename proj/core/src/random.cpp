#include "mfhawkes/random.hpp"

#include <cmath>

#include <boost/math/special_functions/erf.hpp>

namespace mfh
{
namespace
{
constexpr std::uint32_t kMulA = 0xD2511F53u;
constexpr std::uint32_t kMulB = 0xCD9E8D57u;
constexpr std::uint32_t kWeylA = 0x9E3779B9u;
constexpr std::uint32_t kWeylB = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo)
{
    std::uint64_t const product = std::uint64_t(a) * std::uint64_t(b);
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

// 53-bit mantissa mapped to the open interval (0, 1)
inline double to_open_unit(std::uint32_t hi, std::uint32_t lo)
{
    std::uint64_t const bits = (std::uint64_t(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}
}  // namespace

Philox4x32::Counter Philox4x32::block(Counter ctr, Key key)
{
    for (int round = 0; round < 10; ++round)
    {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMulA, ctr[0], hi0, lo0);
        mulhilo(kMulB, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeylA;
        key[1] += kWeylB;
    }
    return ctr;
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

SeedPolicy SeedPolicy::reseeded(std::uint64_t salt) const
{
    SeedPolicy result = *this;
    result.master_seed = mix64(master_seed ^ mix64(salt + 0x5EEDull));
    return result;
}

RandomStream::RandomStream(SeedPolicy const& policy,
                           StreamPurpose purpose,
                           std::uint64_t replicate,
                           std::uint32_t unit,
                           std::uint32_t sub)
    : unit_(unit), sub_(sub)
{
    std::uint64_t k = mix64(policy.master_seed);
    k = mix64(k ^ (std::uint64_t(purpose) << 56));
    k = mix64(k ^ replicate);
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::array<std::uint32_t, 4> RandomStream::next_block()
{
    Philox4x32::Counter ctr{static_cast<std::uint32_t>(position_),
                            static_cast<std::uint32_t>(position_ >> 32),
                            unit_,
                            sub_};
    ++position_;
    return Philox4x32::block(ctr, key_);
}

std::array<double, 2> RandomStream::uniform_pair()
{
    auto const b = next_block();
    return {to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
}

double RandomStream::uniform()
{
    if (has_cached_)
    {
        has_cached_ = false;
        return cached_[1];
    }
    cached_ = uniform_pair();
    has_cached_ = true;
    return cached_[0];
}

double RandomStream::normal()
{
    return normal_quantile(uniform());
}

double RandomStream::exponential()
{
    return -std::log(uniform());
}

double normal_quantile(double p)
{
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

}  // namespace mfh
