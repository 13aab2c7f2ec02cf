// Stateless counter-based random numbers.
//
// Every variate in the library is a pure function of a key tuple
// (seed, stream tag, domain, coordinates...). Nothing is advanced in place
// except CounterStream, which is itself just a key plus a counter.

#ifndef ERWRE_COUNTER_RNG_HPP
#define ERWRE_COUNTER_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace erwre {

// Separates the uses of one master seed so no two consumers share variates.
enum class Domain : std::uint64_t {
    SiteP = 1,
    SiteCookies = 2,
    Coin = 3,
    GenerationEnv = 4,
    Offspring = 5,
    Immigration = 6,
    Replica = 7,
    Aux = 8,
};

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t kHashInit = 0x6a09e667f3bcc909ULL;

// Folds more words into a partial hash: hash_continue(hash_words({a}), {b})
// equals hash_words({a, b}).
constexpr std::uint64_t hash_continue(std::uint64_t h, std::initializer_list<std::uint64_t> words) noexcept
{
    for (std::uint64_t w : words) {
        h = mix64(h ^ mix64(w + 0x632be59bd9b4e019ULL));
    }
    return h;
}

constexpr std::uint64_t hash_words(std::initializer_list<std::uint64_t> words) noexcept
{
    return hash_continue(kHashInit, words);
}

// Maps 64 random bits to the open interval (0, 1).
constexpr double to_open_unit(std::uint64_t bits) noexcept
{
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Derives an independent 64-bit seed for replica `r` of a master seed.
constexpr std::uint64_t replica_seed(std::uint64_t master, std::uint64_t r) noexcept
{
    return hash_words({master, static_cast<std::uint64_t>(Domain::Replica), r});
}

// UniformRandomBitGenerator over hash(key, counter). Two streams with the
// same key produce the same sequence regardless of what else is running.
class CounterStream {
public:
    using result_type = std::uint64_t;

    CounterStream(std::uint64_t seed, std::uint64_t tag, Domain domain) noexcept
        : key_{hash_words({seed, tag, static_cast<std::uint64_t>(domain)})}
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept
    {
        return std::numeric_limits<result_type>::max();
    }

    result_type operator()() noexcept { return mix64(key_ ^ mix64(counter_++)); }

    double uniform() noexcept { return to_open_unit((*this)()); }

    std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace erwre

#endif // ERWRE_COUNTER_RNG_HPP
