#include "nfatk/sketch.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

namespace nfatk {

// ---------------------------------------------------------------------------
// Budget

const BigRational& Budget::default_accept_scale() {
    static const BigRational v(BigInt(12), BigInt(1781));
    return v;
}

const BigRational& Budget::success_floor() {
    static const BigRational v(BigInt(11), BigInt(89134));
    return v;
}

std::uint64_t Budget::default_retries(std::uint64_t k) {
    // ceil((2 + ln 4 + 8 ln k) / ln((1-f)^-1)) with f the per-attempt
    // success floor; an integer loop bound, so double precision is fine.
    double floor_d = success_floor().to_double();
    double denom = -std::log1p(-floor_d);
    double num = 2.0 + std::log(4.0) + 8.0 * std::log(static_cast<double>(k));
    return static_cast<std::uint64_t>(std::ceil(num / denom));
}

std::uint64_t Budget::default_k(std::size_t n, std::size_t m, const BigRational& eps) {
    if (eps <= BigRational(0) || eps >= BigRational(1))
        throw ContractError("epsilon must lie in (0,1)");
    BigInt nm = BigInt(static_cast<long>(n)) * BigInt(static_cast<long>(m));
    BigRational k_exact = BigRational(nm) / eps;
    BigInt k_num = k_exact.numerator();
    BigInt k_den = k_exact.denominator();
    mpz_class kz;
    mpz_cdiv_q(kz.get_mpz_t(), k_num.raw().get_mpz_t(), k_den.raw().get_mpz_t());
    BigInt k_big(kz);
    if (k_big > BigInt(static_cast<long>(1) << 40))
        throw ContractError("default budget k is not representable sensibly");
    std::uint64_t k = k_big.to_u64();
    return k == 0 ? 1 : k;
}

Budget Budget::guaranteed_defaults(std::size_t n, std::size_t m, const BigRational& eps) {
    Budget b;
    b.mode = Mode::guaranteed;
    b.k = default_k(n, m, eps);
    BigInt s_big = BigInt(2) * BigInt::pow(BigInt(static_cast<long>(b.k)), 7);
    if (s_big.bit_length() > 63)
        throw ContractError("default sample size 2k^7 exceeds representable range");
    b.sample_size = s_big.to_u64();
    b.retries = default_retries(b.k);
    b.accept_scale = default_accept_scale();
    return b;
}

Budget Budget::overridden(std::uint64_t k, std::uint64_t s, std::uint64_t c,
                          BigRational accept_scale) {
    if (k == 0 || s == 0 || c == 0 || accept_scale <= BigRational(0))
        throw ContractError("budget fields must be strictly positive");
    Budget b;
    b.mode = Mode::overridden;
    b.k = k;
    b.sample_size = s;
    b.retries = c;
    b.accept_scale = std::move(accept_scale);
    return b;
}

Budget Budget::scaled_for_delta(const BigRational& delta) const {
    if (delta <= BigRational(0) || delta >= BigRational(1))
        throw ContractError("delta must lie in (0,1)");
    double factor_d = std::ceil(std::log(1.0 / delta.to_double()));
    std::uint64_t factor = factor_d < 1.0 ? 1 : static_cast<std::uint64_t>(factor_d);
    Budget b = *this;
    b.k = k * factor;
    if (mode == Mode::guaranteed) {
        BigInt s_big = BigInt(2) * BigInt::pow(BigInt(static_cast<long>(b.k)), 7);
        if (s_big.bit_length() > 63)
            throw ContractError("scaled default sample size exceeds representable range");
        b.sample_size = s_big.to_u64();
        b.retries = default_retries(b.k);
    }
    return b;
}

// ---------------------------------------------------------------------------
// Union estimates and predecessor partitions

BigRational Sketch::estimate_masked(std::size_t layer, const Mask& P) const {
    if (P.none()) return BigRational(0);
    {
        std::lock_guard<std::mutex> lock(caches_->mu);
        auto it = caches_->estimates.find({layer, P});
        if (it != caches_->estimates.end()) return it->second;
    }
    Mask earlier(dag_.state_count());
    BigRational total(0);
    for (StateId p : dag_.layer_states(layer)) {  // ascending = canonical order
        if (!P.test(p)) continue;
        const VertexData& v = data_[layer][p];
        std::size_t kept = 0;
        for (const Sample& s : v.samples)
            if (!s.reach.intersects(earlier)) ++kept;
        total += v.estimate * BigRational(BigInt(static_cast<long>(kept)),
                                          BigInt(static_cast<long>(v.samples.size())));
        earlier.set(p);
    }
    std::lock_guard<std::mutex> lock(caches_->mu);
    return caches_->estimates.emplace(std::make_pair(layer, P), total).first->second;
}

const std::array<Mask, 2>& Sketch::partitions(std::size_t layer, const Mask& P) const {
    {
        std::lock_guard<std::mutex> lock(caches_->mu);
        auto it = caches_->partitions.find({layer, P});
        if (it != caches_->partitions.end()) return it->second;
    }
    std::array<Mask, 2> parts{Mask(dag_.state_count()), Mask(dag_.state_count())};
    for (StateId q : dag_.layer_states(layer)) {
        if (!P.test(q)) continue;
        for (const DagEdge& e : dag_.in_edges(layer, q)) parts[e.symbol].set(e.other);
    }
    std::lock_guard<std::mutex> lock(caches_->mu);
    return caches_->partitions.emplace(std::make_pair(layer, P), std::move(parts)).first->second;
}

BigRational estimate_set(const Sketch& sk, std::size_t layer, const StateSet& P) {
    Mask mask(sk.dag().state_count());
    for (StateId q : P) {
        if (!sk.has_vertex(layer, q))
            throw ContractError("estimate_set: state does not survive at this layer");
        mask.set(q);
    }
    return sk.estimate_masked(layer, mask);
}

// ---------------------------------------------------------------------------
// The rejection sampler

std::optional<Word> sample_one(const Sketch& sk, std::size_t layer, StateId q,
                               RandomStream& rng) {
    const BigRational& n_q = sk.at(layer, q).estimate;
    BigRational accept_prob = sk.budget().accept_scale / n_q;

    Mask current(sk.dag().state_count());
    current.set(q);
    Word reversed;
    reversed.reserve(layer);
    for (std::size_t beta = layer; beta > 0; --beta) {
        const std::array<Mask, 2>& parts = sk.partitions(beta, current);
        BigRational n0 = sk.estimate_masked(beta - 1, parts[0]);
        BigRational n1 = sk.estimate_masked(beta - 1, parts[1]);
        BigRational total = n0 + n1;
        SymbolId b;
        if (n0.is_zero()) {
            b = 1;
        } else if (n1.is_zero()) {
            b = 0;
        } else {
            b = bernoulli(rng, n0 / total) ? 0 : 1;
        }
        accept_prob = accept_prob * (total / (b == 0 ? n0 : n1));
        reversed.push_back(b);
        current = parts[b];
    }
    if (accept_prob > BigRational(1))
        throw InternalError("sample_one: acceptance value exceeds 1; sketch is corrupt");
    if (!bernoulli(rng, accept_prob)) return std::nullopt;
    std::reverse(reversed.begin(), reversed.end());
    return reversed;
}

BigRational sample_one_word_probability(const Sketch& sk, std::size_t layer, StateId q,
                                        const Word& w) {
    if (w.size() != layer) return BigRational(0);
    const BigRational& n_q = sk.at(layer, q).estimate;
    BigRational accept_prob = sk.budget().accept_scale / n_q;
    BigRational path_prob(1);
    Mask current(sk.dag().state_count());
    current.set(q);
    for (std::size_t beta = layer; beta > 0; --beta) {
        const std::array<Mask, 2>& parts = sk.partitions(beta, current);
        BigRational n0 = sk.estimate_masked(beta - 1, parts[0]);
        BigRational n1 = sk.estimate_masked(beta - 1, parts[1]);
        SymbolId b = w[beta - 1];
        const BigRational& n_b = (b == 0) ? n0 : n1;
        if (n_b.is_zero()) return BigRational(0);
        BigRational p_b = n_b / (n0 + n1);
        path_prob *= p_b;
        accept_prob = accept_prob / p_b;
        current = parts[b];
    }
    if (accept_prob > BigRational(1))
        throw InternalError("sample_one_word_probability: acceptance value exceeds 1");
    // The product telescopes to accept_scale / N(q) on sound sketches.
    return path_prob * accept_prob;
}

// ---------------------------------------------------------------------------
// Building the sketch

namespace {

void require_binary(const Nfa& a, const char* op) {
    if (a.alphabet_size() != 2)
        throw ContractError(std::string(op) + " requires a binary alphabet");
    if (a.has_epsilon())
        throw ContractError(std::string(op) + " requires an epsilon-free automaton");
}

Mask singleton_mask(std::size_t bits, StateId q) {
    Mask m(bits);
    m.set(q);
    return m;
}

} // namespace

Sketch build_sketch(const Nfa& a, std::size_t n, const Budget& budget, std::uint64_t seed,
                    unsigned threads) {
    require_binary(a, "build_sketch");
    Sketch sk;
    sk.dag_ = build_unrolled(a, n);
    sk.budget_ = budget;
    sk.seed_ = seed;
    sk.nfa_hash_ = nfa_hash(a);
    sk.mode_ = Sketch::Mode::built;
    sk.data_.assign(n + 1, std::vector<Sketch::VertexData>(sk.dag_.state_count()));

    // Layer 0: N(q^0) = 1 and S(q^0) = {ε}.
    const Mask& layer0 = sk.dag_.layer_mask(0);
    for (StateId q : sk.dag_.layer_states(0)) {
        sk.data_[0][q].estimate = BigRational(1);
        sk.data_[0][q].samples.push_back({Word{}, layer0});
    }

    struct VertexFailure {
        StateId state;
        std::uint64_t slot;
    };

    const unsigned worker_count = std::max(1u, threads);
    for (std::size_t layer = 1; layer <= n && sk.good_; ++layer) {
        const StateSet& vertices = sk.dag_.layer_states(layer);
        std::vector<std::optional<VertexFailure>> failures(vertices.size());

        auto process_vertex = [&](std::size_t vi) {
            StateId q = vertices[vi];
            Mask self = singleton_mask(sk.dag_.state_count(), q);
            const std::array<Mask, 2>& parts = sk.partitions(layer, self);
            BigRational estimate = sk.estimate_masked(layer - 1, parts[0]) +
                                   sk.estimate_masked(layer - 1, parts[1]);
            sk.data_[layer][q].estimate = std::move(estimate);

            RandomStream rng = RandomStream::derive(seed, {layer, q});
            auto& samples = sk.data_[layer][q].samples;
            samples.reserve(static_cast<std::size_t>(
                std::min<std::uint64_t>(budget.sample_size, 1u << 20)));
            for (std::uint64_t slot = 0; slot < budget.sample_size; ++slot) {
                std::optional<Word> w;
                for (std::uint64_t attempt = 0; attempt < budget.retries && !w; ++attempt)
                    w = sample_one(sk, layer, q, rng);
                if (!w) {
                    failures[vi] = VertexFailure{q, slot};
                    return;
                }
                Mask reach = reach_mask(sk.dag_, *w);
                samples.push_back({std::move(*w), std::move(reach)});
            }
        };

        if (worker_count == 1 || vertices.size() <= 1) {
            for (std::size_t vi = 0; vi < vertices.size(); ++vi) process_vertex(vi);
        } else {
            std::atomic<std::size_t> next_index{0};
            std::vector<std::thread> workers;
            workers.reserve(worker_count);
            for (unsigned t = 0; t < worker_count; ++t)
                workers.emplace_back([&] {
                    for (;;) {
                        std::size_t vi = next_index.fetch_add(1);
                        if (vi >= vertices.size()) return;
                        process_vertex(vi);
                    }
                });
            for (auto& w : workers) w.join();
        }

        // Deterministic failure report: the least (state, slot) of the first
        // failing layer, independent of thread schedule.
        for (std::size_t vi = 0; vi < vertices.size(); ++vi) {
            if (!failures[vi]) continue;
            if (!sk.failure_ || failures[vi]->state < sk.failure_->state) {
                sk.failure_ = Sketch::FailurePoint{layer, failures[vi]->state, failures[vi]->slot};
            }
            sk.good_ = false;
        }
    }
    return sk;
}

Sketch build_oracle_sketch(const Nfa& a, std::size_t n, const BigRational& accept_scale,
                           std::uint64_t cap) {
    require_binary(a, "build_oracle_sketch");
    Sketch sk;
    sk.dag_ = build_unrolled(a, n);
    sk.budget_ = Budget::overridden(1, 1, 1, accept_scale);
    sk.seed_ = 0;
    sk.nfa_hash_ = nfa_hash(a);
    sk.mode_ = Sketch::Mode::oracle;
    sk.data_.assign(n + 1, std::vector<Sketch::VertexData>(sk.dag_.state_count()));

    // Per-layer map word -> reached survivors; a vertex's language is every
    // word whose mask covers it.
    std::map<Word, Mask> layer_words;
    layer_words.emplace(Word{}, sk.dag_.layer_mask(0));
    for (std::size_t layer = 0; layer <= n; ++layer) {
        for (StateId q : sk.dag_.layer_states(layer)) {
            auto& vd = sk.data_[layer][q];
            BigInt size(0);
            for (const auto& [word, mask] : layer_words) {
                if (!mask.test(q)) continue;
                vd.samples.push_back({word, mask});
                size += BigInt(1);
            }
            vd.estimate = BigRational(size);
        }
        if (layer == n) break;
        std::map<Word, Mask> next;
        for (const auto& [word, mask] : layer_words) {
            for (SymbolId s = 0; s < 2; ++s) {
                Mask adv = advance_mask(sk.dag_, layer, mask, s);
                if (adv.none()) continue;
                Word w = word;
                w.push_back(s);
                next.emplace(std::move(w), std::move(adv));
            }
        }
        if (next.size() > cap)
            throw CapExceededError("oracle sketch cap exceeded");
        layer_words = std::move(next);
    }
    return sk;
}

// ---------------------------------------------------------------------------
// Counting

BigInt count_from_sketch(const Sketch& sk) {
    if (!sk.good_for_generation()) return BigInt(0);
    Mask finals(sk.dag().state_count());
    for (StateId q : sk.dag().final_layern()) finals.set(q);
    if (finals.none()) return BigInt(0);
    return sk.estimate_masked(sk.length(), finals).round_nearest();
}

namespace {

/// Exact dispatch for the degenerate corner (m <= 1 or n <= 1).
BigInt count_small_case(const Nfa& a, std::size_t n) {
    if (n == 0) {
        for (StateId q : a.initial())
            if (a.is_final(q)) return BigInt(1);
        return BigInt(0);
    }
    if (n == 1) {
        BigInt total(0);
        for (SymbolId s = 0; s < a.alphabet_size(); ++s)
            if (membership(a, Word{s})) total += BigInt(1);
        return total;
    }
    // n >= 2, so at most one state: L_n is (self-loop symbols)^n when the
    // state is both initial and final.
    if (a.state_count() == 0) return BigInt(0);
    StateId q = 0;
    if (!a.is_initial(q) || !a.is_final(q)) return BigInt(0);
    long loops = 0;
    for (SymbolId s = 0; s < a.alphabet_size(); ++s)
        if (!a.successors(q, s).empty()) ++loops;
    return BigInt::pow(BigInt(loops), static_cast<unsigned long>(n));
}

} // namespace

ApproxCount count_approx(const Nfa& a, std::size_t n, const BigRational& eps, std::uint64_t seed,
                         const std::optional<Budget>& budget_override, unsigned threads) {
    require_binary(a, "count_approx");
    if (eps <= BigRational(0) || eps >= BigRational(1))
        throw ContractError("epsilon must lie in (0,1)");
    if (n < 2 || a.state_count() < 2) return {count_small_case(a, n), false, std::nullopt};
    if (trim(build_unrolled(a, n)).empty()) return {BigInt(0), false, std::nullopt};

    Budget budget = budget_override ? *budget_override
                                    : Budget::guaranteed_defaults(n, a.state_count(), eps);
    Sketch sk = build_sketch(a, n, budget, seed, threads);
    if (!sk.good_for_generation()) return {BigInt(0), true, sk.failure()};
    return {count_from_sketch(sk), false, std::nullopt};
}

// ---------------------------------------------------------------------------
// Preprocessing + Las Vegas generation

PreprocessOutcome pplvug_preprocess(const Nfa& a, std::size_t n, const BigRational& delta,
                                    std::uint64_t seed, const std::optional<Budget>& budget_override,
                                    unsigned threads) {
    require_binary(a, "pplvug_preprocess");
    Nfa clustered = cluster_finals(a);
    if (trim(build_unrolled(clustered, n)).empty()) return {true, std::nullopt};
    Budget base = budget_override
                      ? *budget_override
                      : Budget::guaranteed_defaults(n, clustered.state_count(), BigRational(1, 2));
    Budget scaled = base.scaled_for_delta(delta);
    PreprocessOutcome out;
    out.empty_language = false;
    out.sketch = build_sketch(clustered, n, scaled, seed, threads);
    return out;
}

std::uint64_t pplvug_repetition_bound() {
    double floor_d = Budget::success_floor().to_double();
    return static_cast<std::uint64_t>(std::ceil(std::log(2.0) / -std::log1p(-floor_d)));
}

GenerateOutcome pplvug_generate(const Sketch& sk, RandomStream& rng) {
    const StateSet& finals = sk.dag().final_layern();
    if (finals.size() != 1)
        throw ContractError("pplvug_generate requires a clustered (single-final) sketch");
    GenerateOutcome out;
    out.guaranteed = sk.good_for_generation();
    StateId target = finals.front();
    // A build that failed below the last layer never estimated the final
    // vertex; there is nothing to sample from (and no guarantee to honor).
    if (sk.at(sk.length(), target).estimate.is_zero()) return out;
    const std::uint64_t repetitions = pplvug_repetition_bound();
    for (std::uint64_t i = 0; i < repetitions; ++i) {
        std::optional<Word> w = sample_one(sk, sk.length(), target, rng);
        if (w) {
            out.word = std::move(w);
            return out;
        }
    }
    return out;  // fail
}

// ---------------------------------------------------------------------------
// Serialization

std::uint64_t nfa_hash(const Nfa& a) {
    std::string text = serialize_nfa(a);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::string word_bits(const Word& w) {
    if (w.empty()) return "-";
    std::string s;
    s.reserve(w.size());
    for (SymbolId b : w) s += static_cast<char>('0' + b);
    return s;
}

Word bits_word(const std::string& s) {
    Word w;
    if (s == "-") return w;
    w.reserve(s.size());
    for (char c : s) {
        if (c != '0' && c != '1') throw InputError("bad sample bit-string: " + s);
        w.push_back(static_cast<SymbolId>(c - '0'));
    }
    return w;
}

} // namespace

std::string serialize_sketch(const Sketch& sk) {
    std::ostringstream out;
    out << "sketch 1\n";
    out << "k " << sk.budget().k << "\n";
    out << "s " << sk.budget().sample_size << "\n";
    out << "c " << sk.budget().retries << "\n";
    out << "accept " << sk.budget().accept_scale.str() << "\n";
    out << "seed " << sk.seed() << "\n";
    out << "mode " << (sk.mode() == Sketch::Mode::oracle ? "oracle" : "built") << "\n";
    out << "good " << (sk.good_for_generation() ? 1 : 0) << "\n";
    if (sk.failure())
        out << "failure " << sk.failure()->layer << " " << sk.failure()->state << " "
            << sk.failure()->slot << "\n";
    out << "len " << sk.length() << "\n";
    out << "nfa-hash " << sk.source_hash() << "\n";
    std::size_t vertices = 0;
    for (std::size_t layer = 0; layer <= sk.length(); ++layer)
        vertices += sk.dag().layer_states(layer).size();
    out << "vertices " << vertices << "\n";
    for (std::size_t layer = 0; layer <= sk.length(); ++layer)
        for (StateId q : sk.dag().layer_states(layer)) {
            const auto& vd = sk.at(layer, q);
            out << "v " << layer << " " << q << " " << vd.estimate.str() << " "
                << vd.samples.size() << "\n";
            for (const auto& s : vd.samples) out << word_bits(s.word) << "\n";
        }
    return out.str();
}

Sketch parse_sketch(const std::string& text, const Nfa& a) {
    std::istringstream in(text);
    std::string tok;
    auto expect = [&](const std::string& key) {
        in >> tok;
        if (tok != key) throw InputError("sketch parse: expected " + key + ", got " + tok);
    };
    expect("sketch");
    int version;
    in >> version;
    if (version != 1) throw InputError("sketch parse: unsupported version");
    std::uint64_t k, s, c, seed;
    expect("k");
    in >> k;
    expect("s");
    in >> s;
    expect("c");
    in >> c;
    expect("accept");
    in >> tok;
    BigRational accept = BigRational::parse(tok);
    expect("seed");
    in >> seed;
    expect("mode");
    in >> tok;
    Sketch::Mode mode = (tok == "oracle") ? Sketch::Mode::oracle : Sketch::Mode::built;
    expect("good");
    int good;
    in >> good;
    in >> tok;
    std::optional<Sketch::FailurePoint> failure;
    if (tok == "failure") {
        Sketch::FailurePoint fp;
        in >> fp.layer >> fp.state >> fp.slot;
        failure = fp;
        expect("len");
    } else if (tok != "len") {
        throw InputError("sketch parse: expected len");
    }
    std::size_t n;
    in >> n;
    expect("nfa-hash");
    std::uint64_t hash;
    in >> hash;
    if (hash != nfa_hash(a))
        throw InputError("sketch parse: automaton hash mismatch");
    expect("vertices");
    std::size_t vertices;
    in >> vertices;

    Sketch sk;
    sk.dag_ = build_unrolled(a, n);
    sk.budget_ = Budget::overridden(k, s, c, accept);
    sk.budget_.mode = Budget::Mode::overridden;
    sk.seed_ = seed;
    sk.nfa_hash_ = hash;
    sk.mode_ = mode;
    sk.good_ = good != 0;
    sk.failure_ = failure;
    sk.data_.assign(n + 1, std::vector<Sketch::VertexData>(sk.dag_.state_count()));
    for (std::size_t i = 0; i < vertices; ++i) {
        expect("v");
        std::size_t layer;
        StateId q;
        std::size_t count;
        in >> layer >> q >> tok >> count;
        if (layer > n || q >= sk.dag_.state_count() || !sk.dag_.present(layer, q))
            throw InputError("sketch parse: vertex not present in dag");
        auto& vd = sk.data_[layer][q];
        vd.estimate = BigRational::parse(tok);
        vd.samples.reserve(count);
        for (std::size_t j = 0; j < count; ++j) {
            in >> tok;
            Word w = bits_word(tok);
            if (w.size() != layer) throw InputError("sketch parse: sample length mismatch");
            vd.samples.push_back({w, reach_mask(sk.dag_, w)});
        }
    }
    return sk;
}

} // namespace nfatk
