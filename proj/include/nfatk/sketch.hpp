#ifndef NFATK_SKETCH_HPP
#define NFATK_SKETCH_HPP

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nfatk/bitmask.hpp"
#include "nfatk/exact.hpp"
#include "nfatk/nfa.hpp"
#include "nfatk/rational.hpp"
#include "nfatk/rng.hpp"
#include "nfatk/unroll.hpp"

namespace nfatk {

/// A sketch invariant was violated at runtime (e.g. an acceptance
/// probability above 1); indicates corrupt estimates, never silent error.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Statistical parameters of the approximation scheme. The guaranteed
/// defaults are
///   k = ceil(n*m/eps),   s = 2k^7,   c = ceil((2+ln4+8 ln k)/ln((1-f)^-1))
/// with f the per-attempt success floor and acceptance scale just below
/// e^-5; they make the worst-case analysis go through but are
/// astronomically expensive even for tiny inputs. Overridden budgets are
/// how the scheme actually runs, and the gap is stated, not hidden. In
/// guaranteed mode the fields are derived and must not be overridden.
struct Budget {
    enum class Mode { guaranteed, overridden };

    std::uint64_t k = 1;
    std::uint64_t sample_size = 1;  // s
    std::uint64_t retries = 1;      // c
    BigRational accept_scale;       // rejection-sampler acceptance scale
    Mode mode = Mode::overridden;

    /// Exact rational stand-ins just below e^-5 and e^-9
    /// (continued-fraction truncations; lower bounds, so every guarantee
    /// the irrational constants witness still holds).
    static const BigRational& default_accept_scale();  // 12/1781
    static const BigRational& success_floor();         // 11/89134

    static std::uint64_t default_retries(std::uint64_t k);
    /// ceil(n*m/eps), computed exactly.
    static std::uint64_t default_k(std::size_t n, std::size_t m, const BigRational& eps);
    static Budget guaranteed_defaults(std::size_t n, std::size_t m, const BigRational& eps);
    static Budget overridden(std::uint64_t k, std::uint64_t s, std::uint64_t c,
                             BigRational accept_scale = default_accept_scale());

    /// Preprocessing amplification: k scaled by ceil(ln(1/delta));
    /// guaranteed budgets recompute s and c from the scaled k, overridden
    /// budgets keep their explicit s and c.
    Budget scaled_for_delta(const BigRational& delta) const;
};

/// The approximation state: for every surviving vertex q^alpha of a
/// forward-pruned dag, an exact-rational estimate N(q^alpha) of
/// |L(q^alpha)| and a multiset S(q^alpha) of words sampled from
/// L(q^alpha) (each of length alpha, duplicates allowed). Layer 0 stores
/// the single empty word; the estimator's ratios are invariant under
/// duplicating it to sample_size copies.
///
/// In oracle mode (a test configuration) S(q^alpha) is the full language and
/// N the exact count, which makes the estimator and sampler analytically
/// exact. Completed sketches are immutable; the estimate memo behind
/// estimate_set is internally synchronized.
class Sketch {
public:
    enum class Mode { built, oracle };

    struct Sample {
        Word word;
        Mask reach;  // dag states at the word's layer reached by it
    };
    struct VertexData {
        BigRational estimate;
        std::vector<Sample> samples;
    };
    struct FailurePoint {
        std::size_t layer;
        StateId state;
        std::uint64_t slot;
    };

    Sketch(Sketch&&) = default;
    Sketch& operator=(Sketch&&) = default;

    const LayeredDag& dag() const { return dag_; }
    const Budget& budget() const { return budget_; }
    std::uint64_t seed() const { return seed_; }
    Mode mode() const { return mode_; }
    std::size_t length() const { return dag_.length(); }
    std::uint64_t source_hash() const { return nfa_hash_; }

    /// False after a build FAILURE: callers get no guarantee from this
    /// sketch (the generator contract's not-good-for-generation marker).
    bool good_for_generation() const { return good_; }
    const std::optional<FailurePoint>& failure() const { return failure_; }

    const VertexData& at(std::size_t layer, StateId q) const { return data_[layer][q]; }
    bool has_vertex(std::size_t layer, StateId q) const { return dag_.present(layer, q); }

    /// The union estimate over a mask of layer states (memoized).
    BigRational estimate_masked(std::size_t layer, const Mask& P) const;
    /// Predecessor partitions of P (at `layer`) per symbol; results live at
    /// layer-1 (memoized).
    const std::array<Mask, 2>& partitions(std::size_t layer, const Mask& P) const;

private:
    Sketch() = default;
    friend Sketch build_sketch(const Nfa&, std::size_t, const Budget&, std::uint64_t, unsigned);
    friend Sketch build_oracle_sketch(const Nfa&, std::size_t, const BigRational&, std::uint64_t);
    friend Sketch parse_sketch(const std::string&, const Nfa&);

    struct Caches {
        std::mutex mu;
        std::map<std::pair<std::size_t, Mask>, BigRational> estimates;
        std::map<std::pair<std::size_t, Mask>, std::array<Mask, 2>> partitions;
    };

    LayeredDag dag_{Nfa{}, 0, TrimMode::forward_pruned};
    Budget budget_;
    std::uint64_t seed_ = 0;
    std::uint64_t nfa_hash_ = 0;
    Mode mode_ = Mode::built;
    bool good_ = true;
    std::optional<FailurePoint> failure_;
    std::vector<std::vector<VertexData>> data_;  // [layer][state]
    mutable std::unique_ptr<Caches> caches_ = std::make_unique<Caches>();
};

/// The union estimate
///   N(P) = sum_{p in P} N(p) * |S(p) \ union_{q in P, q < p} L(q)| / |S(p)|
/// under the canonical declaration order: each vertex contributes its
/// estimate scaled by the sampled fraction of its language not covered by
/// earlier members, so the sum never double-counts intersections. The
/// exclusion test for a sampled word is an intersection of its memoized
/// reachable-state mask with the earlier members of P. Empty P yields 0.
/// All members must survive in the sketch's dag at `layer`.
BigRational estimate_set(const Sketch& sk, std::size_t layer, const StateSet& P);

/// One run of the rejection sampler from vertex q at `layer`: walks
/// predecessor partitions backwards choosing symbol b with exact
/// probability N(P_b)/(N(P_0)+N(P_1)), accumulates the acceptance value
/// (accept_scale / N(q^alpha)) / (product of choice probabilities), and at
/// layer 0 returns the word with that probability, else nullopt (FAIL).
/// Raises InternalError if the acceptance value exceeds 1, which a sound
/// sketch never produces.
std::optional<Word> sample_one(const Sketch& sk, std::size_t layer, StateId q, RandomStream& rng);

/// Exact probability that sample_one(sk, layer, q) returns w: exactly
/// accept_scale / N(q^layer) for every member of L(q^layer) when the
/// sketch is sound (the rejection step cancels the walk's bias), 0 for
/// non-members. Used by the analytic acceptance tests.
BigRational sample_one_word_probability(const Sketch& sk, std::size_t layer, StateId q,
                                        const Word& w);

/// Layer-by-layer sketch construction over the forward-pruned unrolling
/// of a binary-alphabet ε-free automaton whose L_n is known nonempty:
/// every initial vertex starts with N = 1 and S = {ε}, and each later
/// vertex sums the union estimates of its two predecessor partitions and
/// then fills its sample set by rejection sampling. Each vertex draws its
/// randomness from a stream derived from (seed, layer, state), so results
/// are identical for every thread count. On retry exhaustion the partial
/// sketch is returned flagged not-good-for-generation with the failure's
/// (layer, state, slot).
Sketch build_sketch(const Nfa& a, std::size_t n, const Budget& budget, std::uint64_t seed,
                    unsigned threads = 1);

/// Test configuration: S(q^alpha) = the full language L(q^alpha), N exact.
/// Refuses (CapExceededError) when the per-layer language sizes exceed cap.
Sketch build_oracle_sketch(const Nfa& a, std::size_t n,
                           const BigRational& accept_scale = Budget::default_accept_scale(),
                           std::uint64_t cap = kDefaultBruteForceCap);

/// N(F^n) of a completed sketch rounded to the nearest integer; 0 for a
/// sketch flagged bad (the scheme's failure-event semantics).
BigInt count_from_sketch(const Sketch& sk);

struct ApproxCount {
    BigInt estimate;
    bool failure_event = false;  // build FAILURE reported as estimate 0
    std::optional<Sketch::FailurePoint> failure;
};

/// The approximation scheme: returns 0 for an empty language, otherwise
/// builds a sketch and reports round(N(F^n)). With the guaranteed budget
/// the estimate is within eps relative error with probability >= 3/4.
/// Requires a binary alphabet and no ε-transitions; n < 2 or fewer than two
/// states dispatch to the exact small-case path.
ApproxCount count_approx(const Nfa& a, std::size_t n, const BigRational& eps, std::uint64_t seed,
                         const std::optional<Budget>& budget_override = std::nullopt,
                         unsigned threads = 1);

struct PreprocessOutcome {
    bool empty_language = false;
    std::optional<Sketch> sketch;  // engaged iff !empty_language
};

/// Generator preprocessing: clusters finals (so generation samples at a
/// single final vertex), scales the budget for the amplified 1-delta
/// success probability, and builds the sketch. EMPTY marker when L_n(a)
/// is empty.
PreprocessOutcome pplvug_preprocess(const Nfa& a, std::size_t n, const BigRational& delta,
                                    std::uint64_t seed,
                                    const std::optional<Budget>& budget_override = std::nullopt,
                                    unsigned threads = 1);

struct GenerateOutcome {
    std::optional<Word> word;  // nullopt = fail
    bool guaranteed = true;    // false when the sketch was flagged not-good
};

/// The Las Vegas generator: repeats sample_one at the clustered final
/// vertex up to pplvug_repetition_bound() times; conditioned on success the
/// output is exactly uniform on L_n (when the sketch is good).
GenerateOutcome pplvug_generate(const Sketch& sk, RandomStream& rng);

/// R = ceil(ln 2 / -ln(1 - success_floor)): enough repetitions to push
/// the failure probability below 1/2.
std::uint64_t pplvug_repetition_bound();

/// FNV-1a over the canonical serialization; pins a sketch to its automaton.
std::uint64_t nfa_hash(const Nfa& a);

/// Length-prefixed text serialization (the generator's good-for-generation
/// string): header with k, s, c, accept scale, seed, automaton hash, then
/// per-vertex estimates as num/den and samples as bit-strings.
std::string serialize_sketch(const Sketch& sk);

/// Rebuilds a sketch against the automaton it was built from; the header
/// hash must match. Reachability masks are recomputed.
Sketch parse_sketch(const std::string& text, const Nfa& a);

} // namespace nfatk

#endif
