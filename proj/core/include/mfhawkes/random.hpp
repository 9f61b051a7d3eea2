#pragma once

#include <array>
#include <cstdint>

namespace mfh
{
//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator.
 *
 * A block of four 32-bit words is a pure function of (key, counter), so any
 * stream position can be reached without generating the preceding values.
 */
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key);
};

//---------------------------------------------------------------------------//
//! Independent random-stream families. Each family owns a disjoint key space.
enum class StreamPurpose : std::uint32_t
{
    poisson_measure = 1,  //!< per-unit Poisson random measure layers
    limit_noise = 2,      //!< Brownian increments for limit processes
    gaussian_reference = 3,
    aux = 4,
};

//---------------------------------------------------------------------------//
/*!
 * Deterministic seeding policy.
 *
 * The triple (master seed, replicate, unit) together with a purpose tag and a
 * sub-index selects one stream. Streams never depend on thread scheduling.
 */
struct SeedPolicy
{
    std::uint64_t master_seed = 0;
    //! Height of one Poisson-measure layer (intensity units).
    double layer_height = 1.0;

    //! Seed policy for a fresh, statistically independent run
    SeedPolicy reseeded(std::uint64_t salt) const;
};

//---------------------------------------------------------------------------//
/*!
 * One random stream: a Philox counter walk over (key, fixed words).
 *
 * Each call to next_block() consumes one 128-bit block; uniform doubles use
 * 53 bits of a 64-bit half.
 */
class RandomStream
{
  public:
    RandomStream(SeedPolicy const& policy,
                 StreamPurpose purpose,
                 std::uint64_t replicate,
                 std::uint32_t unit,
                 std::uint32_t sub = 0);

    //! Two uniforms in the open interval (0, 1)
    std::array<double, 2> uniform_pair();
    //! Uniform in (0, 1)
    double uniform();
    //! Standard normal via the inverse CDF
    double normal();
    //! Exponential with unit rate
    double exponential();

    std::uint64_t position() const { return position_; }

  private:
    Philox4x32::Key key_{};
    std::uint32_t unit_ = 0;
    std::uint32_t sub_ = 0;
    std::uint64_t position_ = 0;
    std::array<double, 2> cached_{};
    bool has_cached_ = false;

    std::array<std::uint32_t, 4> next_block();
};

//! SplitMix64 finaliser, used to derive Philox keys
std::uint64_t mix64(std::uint64_t x);

//! Standard normal quantile function
double normal_quantile(double p);

}  // namespace mfh
