#include "nfatk/exact.hpp"

#include <algorithm>
#include <deque>

namespace nfatk {

std::vector<std::vector<BigInt>> forward_path_counts(const LayeredDag& d) {
    std::vector<std::vector<BigInt>> counts(d.length() + 1,
                                            std::vector<BigInt>(d.state_count(), BigInt(0)));
    for (StateId q : d.layer_states(0)) counts[0][q] = BigInt(1);
    for (std::size_t layer = 0; layer < d.length(); ++layer)
        for (StateId q : d.layer_states(layer))
            for (const DagEdge& e : d.out_edges(layer, q))
                counts[layer + 1][e.other] += counts[layer][q];
    return counts;
}

std::vector<std::vector<BigInt>> backward_path_counts(const LayeredDag& d) {
    std::vector<std::vector<BigInt>> counts(d.length() + 1,
                                            std::vector<BigInt>(d.state_count(), BigInt(0)));
    for (StateId q : d.final_layern()) counts[d.length()][q] = BigInt(1);
    for (std::size_t layer = d.length(); layer > 0; --layer)
        for (StateId q : d.layer_states(layer - 1))
            for (const DagEdge& e : d.out_edges(layer - 1, q))
                counts[layer - 1][q] += counts[layer][e.other];
    return counts;
}

BigInt count_paths(const LayeredDag& d) {
    if (d.trim_mode() != TrimMode::fully_trimmed)
        throw ContractError("count_paths requires a fully-trimmed dag");
    if (d.empty()) return BigInt(0);
    auto counts = forward_path_counts(d);
    BigInt total(0);
    for (StateId q : d.final_layern()) total += counts[d.length()][q];
    return total;
}

BigInt count_exact_ufa(const Nfa& a, std::size_t n) {
    if (!is_unambiguous(a)) throw ContractError("count_exact_ufa requires an unambiguous NFA");
    Nfa clustered = remove_epsilon(cluster_finals(a));
    return count_paths(trim(build_unrolled(clustered, n)));
}

// ---------------------------------------------------------------------------
// Brute-force oracle

namespace {

std::vector<bool> epsilon_close(const Nfa& a, std::vector<bool> states) {
    std::deque<StateId> work;
    for (StateId q = 0; q < a.state_count(); ++q)
        if (states[q]) work.push_back(q);
    while (!work.empty()) {
        StateId q = work.front();
        work.pop_front();
        for (StateId p : a.epsilon_successors(q))
            if (!states[p]) {
                states[p] = true;
                work.push_back(p);
            }
    }
    return states;
}

} // namespace

bool membership_with_epsilon(const Nfa& a, const Word& w) {
    std::vector<bool> current(a.state_count(), false);
    for (StateId q : a.initial()) current[q] = true;
    current = epsilon_close(a, std::move(current));
    for (SymbolId s : w) {
        if (s >= a.alphabet_size()) throw InputError("word symbol not in alphabet");
        std::vector<bool> next(a.state_count(), false);
        for (StateId q = 0; q < a.state_count(); ++q)
            if (current[q])
                for (StateId p : a.successors(q, s)) next[p] = true;
        current = epsilon_close(a, std::move(next));
    }
    for (StateId q = 0; q < a.state_count(); ++q)
        if (current[q] && a.is_final(q)) return true;
    return false;
}

std::set<Word> brute_force_language(const Nfa& a, std::size_t n, std::uint64_t cap) {
    const std::size_t sigma = a.alphabet_size();
    // |Sigma|^n against the cap, without overflow.
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (sigma == 0) {
            total = 0;
            break;
        }
        if (total > cap / sigma) throw CapExceededError("brute force cap exceeded");
        total *= sigma;
    }
    std::set<Word> language;
    if (sigma == 0 && n > 0) return language;
    Word w(n, 0);
    for (;;) {
        if (membership_with_epsilon(a, w)) language.insert(w);
        // Odometer over Sigma^n.
        std::size_t i = n;
        while (i > 0) {
            if (++w[i - 1] < sigma) break;
            w[i - 1] = 0;
            --i;
        }
        if (i == 0) break;
    }
    return language;
}

BigInt brute_force_count(const Nfa& a, std::size_t n, std::uint64_t cap) {
    return BigInt(static_cast<long>(brute_force_language(a, n, cap).size()));
}

// ---------------------------------------------------------------------------
// Exact uniform sampling for UFAs

namespace {

LayeredDag ufa_sampler_dag(const Nfa& a, std::size_t n) {
    if (!is_unambiguous(a))
        throw ContractError("exact_sampler_ufa requires an unambiguous NFA");
    return trim(build_unrolled(remove_epsilon(cluster_finals(a)), n));
}

} // namespace

UfaSampler::UfaSampler(const Nfa& a, std::size_t n) : dag_(ufa_sampler_dag(a, n)) {
    from_ = backward_path_counts(dag_);
}

BigInt UfaSampler::count() const {
    BigInt total(0);
    for (StateId q : dag_.initial_layer0()) total += from_[0][q];
    return total;
}

namespace {

/// Weighted choice among `options` with exact integer weights.
template <typename T>
const T& weighted_pick(RandomStream& rng, const std::vector<T>& options,
                       const std::vector<BigInt>& weights) {
    BigInt total(0);
    for (const BigInt& w : weights) total += w;
    BigInt draw = uniform_below(rng, total);
    BigInt acc(0);
    for (std::size_t i = 0; i < options.size(); ++i) {
        acc += weights[i];
        if (draw < acc) return options[i];
    }
    return options.back();  // unreachable for positive total
}

} // namespace

Word UfaSampler::draw(RandomStream& rng) const {
    if (dag_.empty()) throw EmptyLanguageError("exact_sampler_ufa: empty language");
    // Entry vertex weighted by its path count to F^n.
    std::vector<StateId> starts(dag_.initial_layer0().begin(), dag_.initial_layer0().end());
    std::vector<BigInt> weights;
    weights.reserve(starts.size());
    for (StateId q : starts) weights.push_back(from_[0][q]);
    StateId current = weighted_pick(rng, starts, weights);

    Word w;
    w.reserve(dag_.length());
    for (std::size_t layer = 0; layer < dag_.length(); ++layer) {
        const auto& edges = dag_.out_edges(layer, current);
        std::vector<BigInt> edge_weights;
        edge_weights.reserve(edges.size());
        for (const DagEdge& e : edges) edge_weights.push_back(from_[layer + 1][e.other]);
        const DagEdge& chosen = weighted_pick(rng, edges, edge_weights);
        w.push_back(chosen.symbol);
        current = chosen.other;
    }
    return w;
}

BigRational UfaSampler::word_probability(const Word& w) const {
    if (w.size() != dag_.length()) return BigRational(0);
    BigInt total = count();
    if (total.is_zero()) return BigRational(0);
    // Sum of branch-rational products over all w-labeled walks, as a DP over
    // layers. For a member of the language this telescopes to 1/count.
    std::vector<BigRational> prob(dag_.state_count(), BigRational(0));
    for (StateId q : dag_.initial_layer0()) prob[q] = BigRational(from_[0][q], total);
    for (std::size_t layer = 0; layer < dag_.length(); ++layer) {
        std::vector<BigRational> next(dag_.state_count(), BigRational(0));
        for (StateId q : dag_.layer_states(layer)) {
            if (prob[q].is_zero()) continue;
            for (const DagEdge& e : dag_.out_edges(layer, q)) {
                if (e.symbol != w[layer]) continue;
                next[e.other] += prob[q] * BigRational(from_[layer + 1][e.other], from_[layer][q]);
            }
        }
        prob = std::move(next);
    }
    BigRational result(0);
    for (StateId q : dag_.layer_states(dag_.length())) result += prob[q];
    return result;
}

Word exact_sampler_ufa(const Nfa& a, std::size_t n, RandomStream& rng) {
    UfaSampler sampler(a, n);
    return sampler.draw(rng);
}

} // namespace nfatk
