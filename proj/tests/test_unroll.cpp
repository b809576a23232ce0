#include <doctest.h>

#include <set>
#include <string>

#include "nfatk/exact.hpp"
#include "nfatk/unroll.hpp"
#include "test_support.hpp"

using namespace nfatk;
using namespace nfatk::test;

TEST_CASE("the running example unrolled at n=3 and trimmed is the six-vertex dag") {
    LayeredDag d = trim(build_unrolled(ufa7(), 3));
    CHECK(d.vertex_count() == 6);
    CHECK(d.edge_count() == 8);
    Nfa a = ufa7();
    auto has = [&](const std::string& name, std::size_t layer) {
        return d.present(layer, a.find_state(name));
    };
    CHECK(has("q0", 0));
    CHECK(has("q1", 1));
    CHECK(has("q2", 1));
    CHECK(has("q3", 2));
    CHECK(has("q4", 2));
    CHECK(has("qF", 3));
    CHECK_FALSE(has("q5", 3));
    CHECK_FALSE(has("q5", 2));
}

TEST_CASE("n=0 unrolling keeps exactly the initial states") {
    LayeredDag d = build_unrolled(ufa7(), 0);
    CHECK(d.trim_mode() == TrimMode::forward_pruned);
    CHECK(d.vertex_count() == 1);
    CHECK(d.layer_states(0) == ufa7().initial());
}

TEST_CASE("per-vertex path labels match run enumeration on random automata") {
    RandomStream rng(17);
    for (int i = 0; i < 30; ++i) {
        Nfa a = random_nfa(rng, {});
        std::size_t n = rng.uniform_below_u64(7);
        LayeredDag d = build_unrolled(a, n);
        for (std::size_t layer = 0; layer <= n; ++layer) {
            for (StateId q = 0; q < a.state_count(); ++q) {
                // Words labeling initial->q runs of this length, by direct
                // simulation.
                std::set<Word> expected;
                for (const Word& w : all_words(a.alphabet_size(), layer)) {
                    StateSet reached = reachable_states(a, w);
                    if (std::binary_search(reached.begin(), reached.end(), q))
                        expected.insert(w);
                }
                if (!d.present(layer, q)) {
                    CHECK(expected.empty());
                    continue;
                }
                std::set<Word> got;
                for (const Word& w : all_words(a.alphabet_size(), layer))
                    if (reach_mask(d, w).test(q)) got.insert(w);
                CHECK(got == expected);
                CHECK_FALSE(got.empty());  // forward-pruned: L(q^alpha) nonempty
            }
        }
    }
}

TEST_CASE("dag path counts equal exhaustive run enumeration") {
    // Literal enumeration of all state sequences, independent of every DP.
    RandomStream rng(113);
    for (int i = 0; i < 25; ++i) {
        RandomNfaOptions opt;
        opt.max_states = 4;
        Nfa a = random_nfa(rng, opt);
        std::size_t n = rng.uniform_below_u64(5);
        LayeredDag d = build_unrolled(a, n);
        auto counts = forward_path_counts(d);
        // Every state sequence of length n+1: check run validity per word.
        for (StateId target = 0; target < a.state_count(); ++target) {
            std::size_t runs = 0;
            std::vector<StateId> seq(n + 1, 0);
            for (;;) {
                bool valid = a.is_initial(seq[0]) && seq[n] == target;
                for (std::size_t j = 0; j + 1 <= n && valid; ++j) {
                    bool has_edge = false;
                    for (SymbolId s = 0; s < a.alphabet_size() && !has_edge; ++s)
                        has_edge = std::binary_search(a.successors(seq[j], s).begin(),
                                                      a.successors(seq[j], s).end(), seq[j + 1]);
                    valid = has_edge;
                }
                if (valid) {
                    // Count label choices along the sequence.
                    std::size_t labelings = 1;
                    for (std::size_t j = 0; j + 1 <= n; ++j) {
                        std::size_t symbols = 0;
                        for (SymbolId s = 0; s < a.alphabet_size(); ++s)
                            if (std::binary_search(a.successors(seq[j], s).begin(),
                                                   a.successors(seq[j], s).end(), seq[j + 1]))
                                ++symbols;
                        labelings *= symbols;
                    }
                    runs += labelings;
                }
                std::size_t j = n + 1;
                while (j > 0) {
                    if (++seq[j - 1] < a.state_count()) break;
                    seq[j - 1] = 0;
                    --j;
                }
                if (j == 0) break;
            }
            BigInt dp = d.present(n, target) ? counts[n][target] : BigInt(0);
            CHECK(dp == BigInt(static_cast<long>(runs)));
        }
    }
}

TEST_CASE("prune_forward drops vertices with no path from the initial layer") {
    // The raw unroll carries every state in every layer; a layer-1
    // vertex like q3 has no incoming edge from I^0 and must go.
    Nfa a = ufa7();
    LayeredDag raw = unroll_raw(a, 2);
    CHECK(raw.trim_mode() == TrimMode::unpruned);
    CHECK(raw.vertex_count() == 3 * a.state_count());
    CHECK(raw.present(1, a.find_state("q3")));
    LayeredDag pruned = prune_forward(raw);
    CHECK(pruned.trim_mode() == TrimMode::forward_pruned);
    CHECK_FALSE(pruned.present(1, a.find_state("q3")));
    CHECK(pruned.present(1, a.find_state("q1")));
    CHECK(pruned.present(1, a.find_state("q2")));
    CHECK_FALSE(pruned.present(0, a.find_state("q1")));  // layer 0 keeps only I^0
    // Equal to the forward-built dag.
    LayeredDag direct = build_unrolled(a, 2);
    for (std::size_t layer = 0; layer <= 2; ++layer)
        CHECK(pruned.layer_states(layer) == direct.layer_states(layer));
    CHECK(pruned.edge_count() == direct.edge_count());
}

TEST_CASE("prune_forward removes unreached vertices and is idempotent") {
    RandomStream rng(19);
    for (int i = 0; i < 100; ++i) {
        Nfa a = random_nfa(rng, {});
        std::size_t n = rng.uniform_below_u64(6);
        LayeredDag d = unroll_raw(a, n);
        LayeredDag once = prune_forward(d);
        LayeredDag twice = prune_forward(once);
        CHECK(once.vertex_count() == twice.vertex_count());
        CHECK(once.edge_count() == twice.edge_count());
        for (std::size_t layer = 0; layer <= n; ++layer)
            CHECK(once.layer_states(layer) == twice.layer_states(layer));
        // Survivors of the raw prune match the forward construction.
        LayeredDag direct = build_unrolled(a, n);
        for (std::size_t layer = 0; layer <= n; ++layer)
            CHECK(once.layer_states(layer) == direct.layer_states(layer));
    }
}

TEST_CASE("trim keeps exactly the accepting-path vertices") {
    // A layer-1 vertex with no continuation to F^n disappears.
    Nfa a;
    SymbolId zero = a.add_symbol("0");
    a.add_symbol("1");
    StateId q0 = a.add_state("q0");
    StateId dead = a.add_state("dead");
    StateId fin = a.add_state("fin");
    a.add_transition(q0, zero, dead);
    a.add_transition(q0, zero, fin);
    a.add_transition(fin, zero, fin);
    a.mark_initial(q0);
    a.mark_final(fin);
    LayeredDag d = trim(build_unrolled(a, 2));
    CHECK(d.present(1, fin));
    CHECK_FALSE(d.present(1, dead));
}

TEST_CASE("trim yields the empty dag exactly when L_n is empty") {
    Nfa unreachable_final = parse_nfa_string(
        "alphabet: 0\nstates: q0 q1\ninitial: q0\nfinal: q1\ntrans: q0 0 q0\n");
    CHECK(trim(build_unrolled(unreachable_final, 3)).empty());

    RandomStream rng(23);
    for (int i = 0; i < 60; ++i) {
        Nfa a = random_nfa(rng, {});
        std::size_t n = rng.uniform_below_u64(6);
        bool empty_by_oracle = brute_force_language(a, n).empty();
        CHECK(trim(build_unrolled(a, n)).empty() == empty_by_oracle);
    }
}

TEST_CASE("trimming preserves the accepting path set") {
    RandomStream rng(29);
    for (int i = 0; i < 40; ++i) {
        Nfa a = random_nfa(rng, {});
        std::size_t n = 1 + rng.uniform_below_u64(5);
        LayeredDag pruned = build_unrolled(a, n);
        LayeredDag trimmed = trim(pruned);
        // Same accepted words; and in the trimmed dag every non-final layer
        // vertex keeps an outgoing edge.
        for (const Word& w : all_words(a.alphabet_size(), n)) {
            Mask end_pruned = reach_mask(pruned, w);
            bool accepted_pruned = false;
            for (StateId q : pruned.final_layern()) accepted_pruned |= end_pruned.test(q);
            bool accepted_trimmed = false;
            if (!trimmed.empty()) {
                Mask end_trimmed = reach_mask(trimmed, w);
                for (StateId q : trimmed.final_layern())
                    accepted_trimmed |= end_trimmed.test(q);
            }
            CHECK(accepted_pruned == accepted_trimmed);
        }
        for (std::size_t layer = 0; layer < n; ++layer)
            for (StateId q : trimmed.layer_states(layer))
                CHECK_FALSE(trimmed.out_edges(layer, q).empty());
    }
}

TEST_CASE("cluster_finals: already single-final automaton gains one state") {
    Nfa a = ufa7();
    Nfa c = cluster_finals(a);
    CHECK(c.state_count() == a.state_count() + 1);
    CHECK(c.final().size() == 1);
    std::set<Word> expected;
    for (const Word& w : all_words(2, 3))
        if (membership(a, w)) expected.insert(w);
    CHECK(expected.size() == 5);
    CHECK(brute_force_language(c, 3) == expected);
}

TEST_CASE("cluster_finals merges the languages of two finals") {
    Nfa a;
    SymbolId zero = a.add_symbol("0");
    SymbolId one = a.add_symbol("1");
    StateId q0 = a.add_state("q0");
    StateId f0 = a.add_state("f0");
    StateId f1 = a.add_state("f1");
    a.add_transition(q0, zero, f0);
    a.add_transition(q0, one, f1);
    a.mark_initial(q0);
    a.mark_final(f0);
    a.mark_final(f1);
    Nfa c = cluster_finals(a);
    CHECK(c.final().size() == 1);
    std::set<Word> expected{Word{zero}, Word{one}};
    CHECK(brute_force_language(c, 1) == expected);
    CHECK(brute_force_language(c, 0).empty());
    CHECK(brute_force_language(c, 2).empty());
}

TEST_CASE("cluster_finals preserves languages on random automata") {
    RandomStream rng(37);
    for (int i = 0; i < 50; ++i) {
        RandomNfaOptions opt;
        opt.epsilon_density = (i % 4 == 0) ? 0.1 : 0.0;
        Nfa a = random_nfa(rng, opt);
        Nfa c = cluster_finals(a);
        CHECK(c.final().size() == 1);
        for (std::size_t n = 0; n <= 4; ++n)
            CHECK(brute_force_language(a, n) == brute_force_language(c, n));
    }
}

TEST_CASE("dot dump names vertices state@layer") {
    std::string dot = to_dot(trim(build_unrolled(ufa7(), 3)));
    CHECK(dot.find("\"q0@0\"") != std::string::npos);
    CHECK(dot.find("\"qF@3\"") != std::string::npos);
    CHECK(dot.find("label=\"a\"") != std::string::npos);
    CHECK(dot.find("q5") == std::string::npos);
}
