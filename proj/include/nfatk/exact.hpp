#ifndef NFATK_EXACT_HPP
#define NFATK_EXACT_HPP

#include <set>
#include <vector>

#include "nfatk/nfa.hpp"
#include "nfatk/rational.hpp"
#include "nfatk/rng.hpp"
#include "nfatk/unroll.hpp"

namespace nfatk {

/// Requested brute-force enumeration would exceed the configured cap.
class CapExceededError : public ContractError {
public:
    using ContractError::ContractError;
};

/// The sampled language is empty.
class EmptyLanguageError : public ContractError {
public:
    using ContractError::ContractError;
};

inline constexpr std::uint64_t kDefaultBruteForceCap = 1ULL << 20;

/// Per-vertex counts of I^0 -> (q,layer) paths.
std::vector<std::vector<BigInt>> forward_path_counts(const LayeredDag& d);
/// Per-vertex counts of (q,layer) -> F^n paths.
std::vector<std::vector<BigInt>> backward_path_counts(const LayeredDag& d);

/// Number of I^0 -> F^n paths of a fully-trimmed dag, exactly.
BigInt count_paths(const LayeredDag& d);

/// |L_n(a)| for an unambiguous automaton, exactly: cluster finals, unroll,
/// trim, count paths. Ambiguity is checked (it silently breaks correctness),
/// so an ambiguous input raises ContractError.
BigInt count_exact_ufa(const Nfa& a, std::size_t n);

/// Exactly { w in Sigma^n : membership(a, w) }, by checking every word of
/// length n; the independent test oracle for everything else. Handles
/// ε-transitions (simulation with ε-closures). Refuses when |Sigma|^n
/// exceeds `cap`.
std::set<Word> brute_force_language(const Nfa& a, std::size_t n,
                                    std::uint64_t cap = kDefaultBruteForceCap);

/// |brute_force_language(a, n)| as a big integer.
BigInt brute_force_count(const Nfa& a, std::size_t n,
                         std::uint64_t cap = kDefaultBruteForceCap);

/// Membership that tolerates ε-transitions; used by the brute-force oracle.
bool membership_with_epsilon(const Nfa& a, const Word& w);

/// A word distributed exactly uniformly over L_n(a), for unambiguous a:
/// walks the trimmed dag choosing each edge with probability
/// (paths through edge)/(paths through vertex), using exact integer counts
/// and exact rational randomness. Raises EmptyLanguageError when L_n(a) is
/// empty.
Word exact_sampler_ufa(const Nfa& a, std::size_t n, RandomStream& rng);

/// Precomputed form of exact_sampler_ufa for repeated draws.
class UfaSampler {
public:
    UfaSampler(const Nfa& a, std::size_t n);
    bool empty() const { return dag_.empty(); }
    Word draw(RandomStream& rng) const;
    /// Exact probability the walk emits w: 1/count for members, 0 otherwise.
    BigRational word_probability(const Word& w) const;
    BigInt count() const;

private:
    LayeredDag dag_;
    std::vector<std::vector<BigInt>> from_;  // paths to F^n
};

} // namespace nfatk

#endif
