#include "nfatk/unroll.hpp"

#include <algorithm>
#include <sstream>

namespace nfatk {

LayeredDag::LayeredDag(const Nfa& source, std::size_t n, TrimMode mode)
    : n_(n), m_(source.state_count()), alphabet_(source.alphabet()), mode_(mode) {
    if (source.has_epsilon())
        throw ContractError("unrolling requires an epsilon-free automaton");
    state_names_.reserve(m_);
    for (StateId q = 0; q < m_; ++q) state_names_.push_back(source.state_name(q));
    present_.assign(n_ + 1, Mask(m_));
    out_.assign(n_ + 1, std::vector<std::vector<DagEdge>>(m_));
    in_.assign(n_ + 1, std::vector<std::vector<DagEdge>>(m_));
    initial_mask_ = Mask(m_);
    for (StateId i : source.initial()) initial_mask_.set(i);
    final_mask_ = Mask(m_);
    for (StateId f : source.final()) final_mask_.set(f);

    if (mode == TrimMode::unpruned) {
        // The raw object: all n+1 copies of every state, all edges.
        for (std::size_t layer = 0; layer <= n_; ++layer)
            for (StateId q = 0; q < m_; ++q) present_[layer].set(q);
        for (std::size_t layer = 0; layer < n_; ++layer)
            for (StateId q = 0; q < m_; ++q)
                for (SymbolId s = 0; s < source.alphabet_size(); ++s)
                    for (StateId p : source.successors(q, s)) {
                        out_[layer][q].push_back({s, p});
                        in_[layer + 1][p].push_back({s, q});
                    }
    } else {
        // Layer-by-layer forward construction: only vertices reachable from
        // I^0 ever materialize, so the fresh dag is forward-pruned.
        for (StateId q : source.initial()) present_[0].set(q);
        for (std::size_t layer = 0; layer < n_; ++layer) {
            for (StateId q = 0; q < m_; ++q) {
                if (!present_[layer].test(q)) continue;
                for (SymbolId s = 0; s < source.alphabet_size(); ++s)
                    for (StateId p : source.successors(q, s)) {
                        present_[layer + 1].set(p);
                        out_[layer][q].push_back({s, p});
                        in_[layer + 1][p].push_back({s, q});
                    }
            }
        }
    }
    for (auto& per_layer : in_)
        for (auto& edges : per_layer) std::sort(edges.begin(), edges.end());
    rebuild_layer_lists();
}

void LayeredDag::rebuild_layer_lists() {
    layer_states_.assign(n_ + 1, {});
    for (std::size_t layer = 0; layer <= n_; ++layer)
        for (StateId q = 0; q < m_; ++q)
            if (present_[layer].test(q)) layer_states_[layer].push_back(q);
    initial_layer0_.clear();
    for (StateId q : layer_states_[0])
        if (initial_mask_.test(q)) initial_layer0_.push_back(q);
    final_layern_.clear();
    for (StateId q : layer_states_[n_])
        if (final_mask_.test(q)) final_layern_.push_back(q);
}

void LayeredDag::drop_absent_edges() {
    for (std::size_t layer = 0; layer <= n_; ++layer)
        for (StateId q = 0; q < m_; ++q) {
            if (!present_[layer].test(q)) {
                out_[layer][q].clear();
                in_[layer][q].clear();
                continue;
            }
            auto keep_out = [&](const DagEdge& e) { return present_[layer + 1].test(e.other); };
            auto keep_in = [&](const DagEdge& e) { return present_[layer - 1].test(e.other); };
            if (layer < n_) {
                auto& edges = out_[layer][q];
                edges.erase(std::remove_if(edges.begin(), edges.end(),
                                           [&](const DagEdge& e) { return !keep_out(e); }),
                            edges.end());
            }
            if (layer > 0) {
                auto& edges = in_[layer][q];
                edges.erase(std::remove_if(edges.begin(), edges.end(),
                                           [&](const DagEdge& e) { return !keep_in(e); }),
                            edges.end());
            }
        }
}

void LayeredDag::apply_forward_prune() {
    std::vector<Mask> reach(n_ + 1, Mask(m_));
    for (StateId q : initial_layer0_) reach[0].set(q);
    for (std::size_t layer = 0; layer < n_; ++layer)
        for (StateId q = 0; q < m_; ++q)
            if (reach[layer].test(q))
                for (const DagEdge& e : out_[layer][q])
                    if (present_[layer + 1].test(e.other)) reach[layer + 1].set(e.other);
    for (std::size_t layer = 0; layer <= n_; ++layer) present_[layer] = reach[layer];
    drop_absent_edges();
    rebuild_layer_lists();
    if (mode_ == TrimMode::unpruned) mode_ = TrimMode::forward_pruned;
}

void LayeredDag::apply_trim() {
    apply_forward_prune();
    mode_ = TrimMode::fully_trimmed;
    std::vector<Mask> coreach(n_ + 1, Mask(m_));
    for (StateId q : layer_states_[n_])
        if (final_mask_.test(q)) coreach[n_].set(q);
    for (std::size_t layer = n_; layer > 0; --layer)
        for (StateId q = 0; q < m_; ++q)
            if (coreach[layer].test(q))
                for (const DagEdge& e : in_[layer][q])
                    if (present_[layer - 1].test(e.other)) coreach[layer - 1].set(e.other);
    for (std::size_t layer = 0; layer <= n_; ++layer) {
        present_[layer] &= coreach[layer];
    }
    drop_absent_edges();
    rebuild_layer_lists();
}

std::size_t LayeredDag::vertex_count() const {
    std::size_t c = 0;
    for (const auto& layer : layer_states_) c += layer.size();
    return c;
}

std::size_t LayeredDag::edge_count() const {
    std::size_t c = 0;
    for (std::size_t layer = 0; layer < n_; ++layer)
        for (StateId q : layer_states_[layer]) c += out_[layer][q].size();
    return c;
}

LayeredDag build_unrolled(const Nfa& a, std::size_t n) {
    return LayeredDag(a, n, TrimMode::forward_pruned);
}

LayeredDag unroll_raw(const Nfa& a, std::size_t n) {
    return LayeredDag(a, n, TrimMode::unpruned);
}

LayeredDag prune_forward(LayeredDag d) {
    d.apply_forward_prune();
    return d;
}

LayeredDag trim(LayeredDag d) {
    d.apply_trim();
    return d;
}

Nfa cluster_finals(const Nfa& a) {
    Nfa out;
    for (SymbolId s = 0; s < a.alphabet_size(); ++s) out.add_symbol(a.symbol_name(s));
    for (StateId q = 0; q < a.state_count(); ++q) out.add_state(a.state_name(q));
    std::string fresh = "qf*";
    while (a.find_state(fresh) != a.state_count()) fresh += '\'';
    StateId qf = out.add_state(fresh);

    for (StateId q = 0; q < a.state_count(); ++q)
        for (SymbolId s = 0; s < a.alphabet_size(); ++s)
            for (StateId p : a.successors(q, s)) {
                out.add_transition(q, s, p);
                if (a.is_final(p)) out.add_transition(q, s, qf);
            }
    for (StateId q = 0; q < a.state_count(); ++q)
        for (StateId p : a.epsilon_successors(q)) {
            out.add_epsilon(q, p);
            if (a.is_final(p)) out.add_epsilon(q, qf);
        }

    bool initial_final = false;
    for (StateId q : a.initial()) {
        out.mark_initial(q);
        initial_final = initial_final || a.is_final(q);
    }
    if (initial_final) out.mark_initial(qf);
    out.mark_final(qf);
    return out;
}

Mask reach_mask(const LayeredDag& d, const Word& w) {
    Mask current = d.initial_mask();
    current &= d.layer_mask(0);
    for (std::size_t i = 0; i < w.size(); ++i) current = advance_mask(d, i, current, w[i]);
    return current;
}

Mask advance_mask(const LayeredDag& d, std::size_t layer, const Mask& current, SymbolId s) {
    Mask next(d.state_count());
    for (StateId q : d.layer_states(layer)) {
        if (!current.test(q)) continue;
        for (const DagEdge& e : d.out_edges(layer, q))
            if (e.symbol == s) next.set(e.other);
    }
    next &= d.layer_mask(layer + 1);
    return next;
}

std::string to_dot(const LayeredDag& d) {
    std::ostringstream out;
    out << "digraph unrolled {\n  rankdir=LR;\n";
    for (std::size_t layer = 0; layer <= d.length(); ++layer)
        for (StateId q : d.layer_states(layer))
            out << "  \"" << d.state_name(q) << "@" << layer << "\";\n";
    for (std::size_t layer = 0; layer < d.length(); ++layer)
        for (StateId q : d.layer_states(layer))
            for (const DagEdge& e : d.out_edges(layer, q))
                out << "  \"" << d.state_name(q) << "@" << layer << "\" -> \""
                    << d.state_name(e.other) << "@" << layer + 1 << "\" [label=\""
                    << d.symbol_name(e.symbol) << "\"];\n";
    out << "}\n";
    return out.str();
}

} // namespace nfatk
