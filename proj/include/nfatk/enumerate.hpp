#ifndef NFATK_ENUMERATE_HPP
#define NFATK_ENUMERATE_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "nfatk/bitmask.hpp"
#include "nfatk/nfa.hpp"
#include "nfatk/unroll.hpp"

namespace nfatk {

enum class EnumerationPhase { precomputation_done, enumerating, exhausted };

/// Constant-delay enumeration of L_n(a) for an unambiguous NFA: DFS over
/// the fully-trimmed dag, edges ordered by (symbol, target). Every word is
/// emitted exactly once; between consecutive emissions the instrumented
/// step count (vertex visits + cursor advances) is bounded by a constant
/// times n, independent of |L_n(a)|.
///
/// Sessions are plain values: copying one and resuming the copy yields the
/// identical remainder sequence. A session is single-threaded; distinct
/// sessions over the same inputs may run concurrently.
class UfaEnumeration {
public:
    /// Precomputation: cluster finals, remove ε, unroll, trim. Raises
    /// ContractError on ambiguous input.
    UfaEnumeration(const Nfa& a, std::size_t n);

    /// Next word, or nullopt once exhausted.
    std::optional<Word> next();

    EnumerationPhase phase() const { return phase_; }
    /// Largest instrumented step count observed between emissions.
    std::uint64_t max_delay_steps() const { return max_delay_; }

private:
    struct Frame {
        StateId vertex;
        std::uint32_t cursor;  // next out-edge to explore
    };

    LayeredDag dag_;
    std::vector<Frame> dfs_stack_;
    Word partial_word_;
    std::uint32_t initial_cursor_ = 0;
    EnumerationPhase phase_;
    std::uint64_t step_counter_ = 0;  // steps since last emission
    std::uint64_t max_delay_ = 0;
};

/// Polynomial-delay enumeration of L_n(a) for an arbitrary ε-free NFA by
/// flashlight search: a prefix is extended by symbol b exactly when the
/// reached state set at the next layer still meets the trimmed dag (whose
/// vertices are all co-reachable to F^n), so every descent ends in an
/// emission and no word repeats even when runs are ambiguous.
class NfaEnumeration {
public:
    NfaEnumeration(const Nfa& a, std::size_t n);

    std::optional<Word> next();

    EnumerationPhase phase() const { return phase_; }

private:
    struct Frame {
        Mask states;             // reached survivors at this layer
        std::uint32_t cursor;    // next symbol to try
    };

    LayeredDag dag_;
    std::vector<Frame> dfs_stack_;
    Word partial_word_;
    EnumerationPhase phase_;
};

/// Convenience: drain an enumeration session into a vector (test helper and
/// CLI backend), optionally stopping after `limit` words.
template <typename Session>
std::vector<Word> collect_all(Session& session, std::size_t limit = SIZE_MAX) {
    std::vector<Word> words;
    while (words.size() < limit) {
        auto w = session.next();
        if (!w) break;
        words.push_back(std::move(*w));
    }
    return words;
}

} // namespace nfatk

#endif
