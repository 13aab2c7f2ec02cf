#include "erwre/walk.hpp"

#include <algorithm>
#include <stdexcept>

namespace erwre {

SiteTape::Entry& SiteTape::at(const Environment& env, std::int64_t z)
{
    std::vector<Entry>& side = z >= 0 ? nonnegative_ : negative_;
    const auto index = static_cast<std::size_t>(z >= 0 ? z : -(z + 1));
    if (index >= side.size()) {
        side.resize(std::max(index + 1, side.size() * 2));
    }
    Entry& e = side[index];
    if (!e.loaded) {
        e.site = env.site(z);
        e.loaded = true;
    }
    return e;
}

std::uint64_t SiteTape::visits(std::int64_t z) const noexcept
{
    const std::vector<Entry>& side = z >= 0 ? nonnegative_ : negative_;
    const auto index = static_cast<std::size_t>(z >= 0 ? z : -(z + 1));
    return index < side.size() ? side[index].visits : 0;
}

int walk_step(WalkState& state, const Environment& env, const CoinSource& coins)
{
    SiteTape::Entry& e = state.tape.at(env, state.position);
    const std::uint64_t i = ++e.visits;
    const int dx = coins.flip(e.site, state.position, i);
    state.position += dx;
    ++state.steps;
    return dx;
}

WalkSummary run_walk(std::int64_t start, const Environment& env, const CoinSource& coins,
                     const RunOptions& options)
{
    if (options.horizon == 0) {
        throw std::invalid_argument("horizon must be at least 1");
    }

    WalkSummary out;
    out.start = start;
    out.min_position = start;
    out.max_position = start;
    for (std::int64_t t : options.stop_targets) {
        out.hit_times[t] = std::nullopt;
    }
    for (std::int64_t t : options.watch_targets) {
        out.hit_times[t] = std::nullopt;
    }
    const bool count_upcrossings = start == 1;
    if (count_upcrossings) {
        out.upcrossings.assign(2, 0);
        out.upcrossings[0] = 1;
    }
    if (options.record_path) {
        out.path.push_back(start);
    }

    const bool any_targets = !out.hit_times.empty();
    bool returned_to_zero = false;

    WalkState state{start};
    out.terminated_by = Termination::Horizon;
    while (state.steps < options.horizon) {
        const std::int64_t from = state.position;
        const int dx = walk_step(state, env, coins);
        const std::int64_t to = state.position;

        if (count_upcrossings && !returned_to_zero && dx > 0 && from >= 1) {
            const auto k = static_cast<std::size_t>(from);
            if (k >= out.upcrossings.size()) {
                out.upcrossings.resize(k + 1, 0);
            }
            ++out.upcrossings[k];
        }
        if (to == 0) {
            ++out.returns_to_origin;
            returned_to_zero = true;
        }
        out.min_position = std::min(out.min_position, to);
        out.max_position = std::max(out.max_position, to);
        if (options.record_path) {
            out.path.push_back(to);
        }

        if (any_targets) {
            if (auto it = out.hit_times.find(to); it != out.hit_times.end() && !it->second) {
                it->second = state.steps;
                if (options.stop_targets.count(to) != 0) {
                    out.terminated_by = Termination::HitTarget;
                    break;
                }
            }
        }
    }

    if (count_upcrossings) {
        while (out.upcrossings.size() > 1 && out.upcrossings.back() == 0) {
            out.upcrossings.pop_back();
        }
    }
    out.final_position = state.position;
    out.steps_taken = state.steps;
    return out;
}

WalkSummary excursion_upcrossings(const Environment& env, const CoinSource& coins,
                                  std::uint64_t horizon)
{
    RunOptions options;
    options.horizon = horizon;
    options.stop_targets = {0};
    return run_walk(1, env, coins, options);
}

const char* to_string(Termination t) noexcept
{
    return t == Termination::HitTarget ? "hit_target" : "horizon";
}

} // namespace erwre
