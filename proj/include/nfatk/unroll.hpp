#ifndef NFATK_UNROLL_HPP
#define NFATK_UNROLL_HPP

#include <string>
#include <vector>

#include "nfatk/bitmask.hpp"
#include "nfatk/nfa.hpp"

namespace nfatk {

/// How aggressively a LayeredDag has been pruned.
enum class TrimMode {
    unpruned,        ///< transient: the raw n+1-copy unrolling
    forward_pruned,  ///< every vertex is reachable from I^0
    fully_trimmed,   ///< additionally every vertex lies on an I^0 -> F^n path
};

struct DagEdge {
    SymbolId symbol;
    StateId other;  // target for out-edges, source for in-edges
    friend auto operator<=>(const DagEdge&, const DagEdge&) = default;
};

/// The n-times-unrolled copy of an NFA: layers 0..n, vertex (q, alpha) for
/// each surviving state q at layer alpha, and an edge (p,alpha) -b->
/// (q,alpha+1) per NFA transition (p,b,q). Acyclic by construction; the
/// substrate for exact DP, DFS enumeration, and sketching. Immutable and
/// shareable once built.
class LayeredDag {
public:
    LayeredDag(const Nfa& source, std::size_t n, TrimMode mode);

    std::size_t length() const { return n_; }               // n: layers 0..n
    std::size_t state_count() const { return m_; }          // states of the source
    std::size_t alphabet_size() const { return alphabet_.size(); }
    const std::string& state_name(StateId q) const { return state_names_[q]; }
    const std::string& symbol_name(SymbolId s) const { return alphabet_[s]; }
    TrimMode trim_mode() const { return mode_; }

    bool present(std::size_t layer, StateId q) const { return present_[layer].test(q); }
    const Mask& layer_mask(std::size_t layer) const { return present_[layer]; }
    const StateSet& layer_states(std::size_t layer) const { return layer_states_[layer]; }

    /// Out-edges of (q, layer), sorted by (symbol, target).
    const std::vector<DagEdge>& out_edges(std::size_t layer, StateId q) const {
        return out_[layer][q];
    }
    /// In-edges of (q, layer), sorted by (symbol, source); sources live at layer-1.
    const std::vector<DagEdge>& in_edges(std::size_t layer, StateId q) const {
        return in_[layer][q];
    }

    /// Initial states surviving at layer 0.
    const StateSet& initial_layer0() const { return initial_layer0_; }
    /// Final states surviving at layer n.
    const StateSet& final_layern() const { return final_layern_; }
    const Mask& initial_mask() const { return initial_mask_; }

    std::size_t vertex_count() const;
    std::size_t edge_count() const;
    bool empty() const { return vertex_count() == 0; }

    /// Mutating pruning passes used by prune_forward/trim.
    void apply_forward_prune();
    void apply_trim();

private:
    void drop_absent_edges();
    void rebuild_layer_lists();

    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::string> state_names_;
    std::vector<std::string> alphabet_;
    std::vector<Mask> present_;                         // [layer]
    std::vector<StateSet> layer_states_;                // [layer], sorted
    std::vector<std::vector<std::vector<DagEdge>>> out_;  // [layer][state]
    std::vector<std::vector<std::vector<DagEdge>>> in_;   // [layer][state]
    StateSet initial_layer0_;
    StateSet final_layern_;
    Mask initial_mask_;  // initials of the source automaton
    Mask final_mask_;    // finals of the source automaton
    TrimMode mode_;
};

/// Unrolls `a` n times. Construction proceeds layer by layer from I^0, so
/// the result is forward-pruned: every vertex has a path from some initial
/// vertex. Requires an ε-free automaton.
LayeredDag build_unrolled(const Nfa& a, std::size_t n);

/// The raw unrolling: every state in every layer, no pruning. Feed it to
/// prune_forward or trim before anything else consumes it.
LayeredDag unroll_raw(const Nfa& a, std::size_t n);

/// Removes exactly the vertices unreachable from I^0 (idempotent).
LayeredDag prune_forward(LayeredDag d);

/// Keeps exactly the vertices on some I^0 -> F^n path. An empty result
/// signals an empty length-n language.
LayeredDag trim(LayeredDag d);

/// Single-final equivalent: a fresh state q_F becomes the only final state;
/// every transition into an old final state gains a redirected copy into
/// q_F, and q_F joins the initial set when some initial state was final
/// (the ε-edges of the textbook construction, folded away on the target
/// side so that exactly one final state remains). Adds exactly one state.
Nfa cluster_finals(const Nfa& a);

/// States of `d` at layer |w| reachable from I^0 along w.
Mask reach_mask(const LayeredDag& d, const Word& w);

/// One simulation step inside the dag: image of `current` (at `layer`)
/// under symbol s, restricted to survivors of layer+1.
Mask advance_mask(const LayeredDag& d, std::size_t layer, const Mask& current, SymbolId s);

/// Debug rendering in DOT format; vertices labeled state@layer.
std::string to_dot(const LayeredDag& d);

} // namespace nfatk

#endif
