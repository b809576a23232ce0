#ifndef NFATK_NFA_HPP
#define NFATK_NFA_HPP

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace nfatk {

using StateId = std::uint32_t;
using SymbolId = std::uint32_t;

/// A word over an automaton's alphabet, stored as symbol indices.
using Word = std::vector<SymbolId>;

/// Sorted set of state indices.
using StateSet = std::vector<StateId>;

struct Transition {
    StateId src;
    SymbolId symbol;
    StateId dst;
    friend auto operator<=>(const Transition&, const Transition&) = default;
};

/// Input or file-format problem (bad symbol, undeclared state, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text-format parse failure; message names the offending line.
class ParseError : public InputError {
public:
    ParseError(std::size_t line, const std::string& what)
        : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Violated operation precondition (e.g. exact counting on an ambiguous NFA).
class ContractError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Nondeterministic finite automaton (Q, Sigma, Delta, I, F), possibly with
/// epsilon transitions. State and symbol declaration order is significant:
/// it defines the canonical total order used by the estimator and by every
/// deterministic iteration in the library. Values are immutable once built
/// and safe to share across threads.
class Nfa {
public:
    Nfa() = default;

    /// Builder-style construction; validates and freezes in finish().
    StateId add_state(const std::string& name);
    SymbolId add_symbol(const std::string& name);
    void add_transition(StateId src, SymbolId symbol, StateId dst);
    void add_epsilon(StateId src, StateId dst);
    void mark_initial(StateId q);
    void mark_final(StateId q);

    std::size_t state_count() const { return state_names_.size(); }
    std::size_t alphabet_size() const { return alphabet_.size(); }
    const std::string& state_name(StateId q) const { return state_names_[q]; }
    const std::string& symbol_name(SymbolId s) const { return alphabet_[s]; }
    const std::vector<std::string>& alphabet() const { return alphabet_; }

    /// Index lookups; return npos (state_count()/alphabet_size()) when absent.
    StateId find_state(const std::string& name) const;
    SymbolId find_symbol(const std::string& name) const;

    const StateSet& initial() const { return initial_; }
    const StateSet& final() const { return final_; }
    bool is_initial(StateId q) const { return initial_mask_[q]; }
    bool is_final(StateId q) const { return final_mask_[q]; }

    /// Successors of q on symbol s, sorted ascending.
    const StateSet& successors(StateId q, SymbolId s) const { return delta_[q][s]; }
    /// Epsilon successors of q, sorted ascending.
    const StateSet& epsilon_successors(StateId q) const { return eps_[q]; }

    std::size_t transition_count() const { return transition_count_; }
    std::size_t epsilon_count() const { return epsilon_count_; }
    bool has_epsilon() const { return epsilon_count_ > 0; }

    /// All transitions sorted by (src, symbol, dst).
    std::vector<Transition> transitions() const;

    bool operator==(const Nfa& other) const;

private:
    std::vector<std::string> state_names_;
    std::vector<std::string> alphabet_;
    std::vector<std::vector<StateSet>> delta_;  // [state][symbol] -> sorted targets
    std::vector<StateSet> eps_;                 // [state] -> sorted targets
    StateSet initial_;
    StateSet final_;
    std::vector<bool> initial_mask_;
    std::vector<bool> final_mask_;
    std::size_t transition_count_ = 0;
    std::size_t epsilon_count_ = 0;
};

/// Parses the line-oriented NFA text format:
///
///     # comment
///     alphabet: a b
///     states: q0 q1
///     initial: q0
///     final: q1
///     trans: q0 a q1
///     eps: q0 q1
///
/// Tokens are whitespace-free. Malformed lines, undeclared names and
/// duplicate declarations raise ParseError naming the line.
Nfa parse_nfa(std::istream& in);
Nfa parse_nfa_string(const std::string& text);
Nfa parse_nfa_file(const std::string& path);

/// Serializes in the same format; parse_nfa(serialize_nfa(a)) == a.
std::string serialize_nfa(const Nfa& a);

/// Epsilon-free equivalent with the same state set: forward ε-closure is
/// folded into outgoing transitions and states whose closure meets F become
/// final. No states are deleted (pruning is a separate concern).
Nfa remove_epsilon(const Nfa& a);

/// True iff some run from an initial to a final state spells w.
/// Requires an ε-free automaton; runs in O(|w| * |Delta|).
bool membership(const Nfa& a, const Word& w);

/// States reachable from the initial set along paths labeled exactly w
/// (ε-free automata only). membership(a,w) iff the result intersects F.
StateSet reachable_states(const Nfa& a, const Word& w);

/// True iff no word has two distinct accepting runs, decided by trimming
/// the self-product on state pairs (seeded with I×I, accepting at F×F) and
/// checking for a surviving off-diagonal pair. Requires ε-free input.
bool is_unambiguous(const Nfa& a);

/// One step of the MEM-NFA self-reduction: the one-symbol-b successors of
/// the initial set become the new initial set of an otherwise unchanged
/// automaton, producing N' whose length-(n-1) language is exactly
/// { y : b·y is length-n accepted by a }. Requires a single final state,
/// no ε-transitions, n >= 1. Never changes the state or transition count.
/// When no initial state has a b-transition the result has an empty
/// length-(n-1) language, which is a valid outcome.
Nfa self_reduce_step(const Nfa& a, std::size_t n, SymbolId b);

/// Word helpers. render() concatenates single-character symbol names and
/// space-separates longer ones; parse is the inverse for a given automaton.
std::string render_word(const Nfa& a, const Word& w);
Word word_from_string(const Nfa& a, const std::string& text);

} // namespace nfatk

#endif
