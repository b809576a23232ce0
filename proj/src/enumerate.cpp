#include "nfatk/enumerate.hpp"

namespace nfatk {

namespace {

LayeredDag ufa_enumeration_dag(const Nfa& a, std::size_t n) {
    if (!is_unambiguous(a))
        throw ContractError("enumerate_ufa requires an unambiguous NFA");
    return trim(build_unrolled(remove_epsilon(cluster_finals(a)), n));
}

} // namespace

UfaEnumeration::UfaEnumeration(const Nfa& a, std::size_t n) : dag_(ufa_enumeration_dag(a, n)) {
    phase_ = dag_.empty() ? EnumerationPhase::exhausted : EnumerationPhase::precomputation_done;
}

std::optional<Word> UfaEnumeration::next() {
    if (phase_ == EnumerationPhase::exhausted) return std::nullopt;
    phase_ = EnumerationPhase::enumerating;
    const std::size_t n = dag_.length();
    for (;;) {
        if (dfs_stack_.empty()) {
            const StateSet& roots = dag_.initial_layer0();
            if (initial_cursor_ >= roots.size()) {
                phase_ = EnumerationPhase::exhausted;
                max_delay_ = std::max(max_delay_, step_counter_);
                return std::nullopt;
            }
            dfs_stack_.push_back({roots[initial_cursor_++], 0});
            ++step_counter_;
            continue;
        }
        std::size_t layer = dfs_stack_.size() - 1;
        if (layer == n) {
            // Trim guarantees every layer-n vertex is final: emit.
            Word out = partial_word_;
            dfs_stack_.pop_back();
            if (!partial_word_.empty()) partial_word_.pop_back();
            ++step_counter_;
            max_delay_ = std::max(max_delay_, step_counter_);
            step_counter_ = 0;
            return out;
        }
        Frame& frame = dfs_stack_.back();
        const auto& edges = dag_.out_edges(layer, frame.vertex);
        if (frame.cursor < edges.size()) {
            const DagEdge& e = edges[frame.cursor++];
            ++step_counter_;  // cursor advance
            partial_word_.push_back(e.symbol);
            dfs_stack_.push_back({e.other, 0});
            ++step_counter_;  // descent
        } else {
            dfs_stack_.pop_back();
            if (!partial_word_.empty()) partial_word_.pop_back();
            ++step_counter_;  // backtrack
        }
    }
}

NfaEnumeration::NfaEnumeration(const Nfa& a, std::size_t n)
    : dag_(trim(build_unrolled(a, n))) {
    phase_ = dag_.empty() ? EnumerationPhase::exhausted : EnumerationPhase::precomputation_done;
    if (!dag_.empty()) {
        Mask roots(dag_.state_count());
        for (StateId q : dag_.initial_layer0()) roots.set(q);
        dfs_stack_.push_back({std::move(roots), 0});
    }
}

std::optional<Word> NfaEnumeration::next() {
    if (phase_ == EnumerationPhase::exhausted) return std::nullopt;
    phase_ = EnumerationPhase::enumerating;
    const std::size_t n = dag_.length();
    const std::uint32_t sigma = static_cast<std::uint32_t>(dag_.alphabet_size());
    for (;;) {
        if (dfs_stack_.empty()) {
            phase_ = EnumerationPhase::exhausted;
            return std::nullopt;
        }
        std::size_t layer = dfs_stack_.size() - 1;
        if (layer == n) {
            // Reached sets at layer n are nonempty subsets of F^n.
            Word out = partial_word_;
            dfs_stack_.pop_back();
            if (!partial_word_.empty()) partial_word_.pop_back();
            return out;
        }
        Frame& frame = dfs_stack_.back();
        if (frame.cursor < sigma) {
            SymbolId s = frame.cursor++;
            Mask next_states = advance_mask(dag_, layer, frame.states, s);
            if (next_states.any()) {
                // Some survivor is reached: the prefix extends to a full
                // accepted word, so descending cannot dead-end.
                partial_word_.push_back(s);
                dfs_stack_.push_back({std::move(next_states), 0});
            }
        } else {
            dfs_stack_.pop_back();
            if (!partial_word_.empty()) partial_word_.pop_back();
        }
    }
}

} // namespace nfatk
