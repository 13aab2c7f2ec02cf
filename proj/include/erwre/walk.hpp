// The excited random walk in a random environment.

#ifndef ERWRE_WALK_HPP
#define ERWRE_WALK_HPP

#include "erwre/environment.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

namespace erwre {

// Per-site visit counters plus the cached site parameters, stored over the
// contiguous interval of visited sites.
class SiteTape {
public:
    struct Entry {
        Site site;
        std::uint64_t visits = 0;
        bool loaded = false;
    };

    Entry& at(const Environment& env, std::int64_t z);

    // Number of arrivals recorded at z (0 for unvisited sites).
    std::uint64_t visits(std::int64_t z) const noexcept;

private:
    std::vector<Entry> nonnegative_;
    std::vector<Entry> negative_; // index -z-1
};

struct WalkState {
    std::int64_t position = 0;
    std::uint64_t steps = 0;
    SiteTape tape;

    explicit WalkState(std::int64_t start = 0) : position{start} {}
};

// One step of the walk: counts the arrival at the current site as visit i and
// moves by coin_flip(z, i). Returns the increment (+1 or -1).
int walk_step(WalkState& state, const Environment& env, const CoinSource& coins);

enum class Termination { HitTarget, Horizon };

struct WalkSummary {
    std::int64_t start = 0;
    std::int64_t final_position = 0;
    std::uint64_t steps_taken = 0;
    // T_k = inf{n >= 1 : S_n = k}; std::nullopt means Timeout.
    std::map<std::int64_t, std::optional<std::uint64_t>> hit_times;
    std::uint64_t returns_to_origin = 0;
    std::int64_t min_position = 0;
    std::int64_t max_position = 0;
    // upcrossings[k] = U_k, with U_0 = 1. Empty unless start == 1.
    std::vector<std::uint64_t> upcrossings;
    Termination terminated_by = Termination::Horizon;
    // Full trajectory S_0..S_n, only when RunOptions::record_path is set.
    std::vector<std::int64_t> path;

    bool operator==(const WalkSummary&) const = default;

    std::uint64_t upcrossings_at(std::size_t k) const noexcept
    {
        return k < upcrossings.size() ? upcrossings[k] : 0;
    }
};

struct RunOptions {
    std::uint64_t horizon = 100000;
    std::set<std::int64_t> stop_targets;
    // Additional sites whose hitting times are recorded without stopping.
    std::set<std::int64_t> watch_targets;
    bool record_path = false;
};

// Runs until a stop target is hit or `horizon` steps were taken.
// Throws std::invalid_argument for horizon == 0.
WalkSummary run_walk(std::int64_t start, const Environment& env, const CoinSource& coins,
                     const RunOptions& options);

// run_walk from 1 stopped at 0, with the upcrossing table.
WalkSummary excursion_upcrossings(const Environment& env, const CoinSource& coins,
                                  std::uint64_t horizon);

const char* to_string(Termination t) noexcept;

} // namespace erwre

#endif // ERWRE_WALK_HPP
