// Acceptance suite: one test case per criterion, each printing a single
// PASS/FAIL line. Statistical cases use fixed seeds throughout, so a green
// run is reproducible bit for bit.

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include "nfatk/enumerate.hpp"
#include "nfatk/exact.hpp"
#include "nfatk/reduce.hpp"
#include "nfatk/sketch.hpp"
#include "nfatk/statistics.hpp"
#include "nfatk/unroll.hpp"
#include "test_support.hpp"

using namespace nfatk;
using namespace nfatk::test;

namespace {

void report(int criterion, const std::string& name, bool pass) {
    std::cout << "[criterion " << criterion << "] " << name << ": " << (pass ? "PASS" : "FAIL")
              << std::endl;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// The reduced budget the statistical criteria run under: s = 2000 and
/// c = 50, with the acceptance scale raised from the worst-case-analysis
/// constant e^-5 to 1/4. At e^-5 every reduced build exhausts its retries;
/// at 1/4 the acceptance value stays runtime-checked against 1, so
/// conditional uniformity remains exact.
Budget acceptance_budget() {
    return Budget::overridden(10, 2000, 50, BigRational(BigInt(1), BigInt(4)));
}

struct Instance {
    std::string name;
    Nfa automaton;
    std::size_t n;
};

/// The ten fixed instances of criterion 4: the running example, the 2^8
/// cube, and eight frozen random automata (seeds fixed, nonempty languages
/// checked below).
std::vector<Instance> criterion4_instances() {
    std::vector<Instance> instances;
    instances.push_back({"ufa7(n=3)", ufa7_binary(), 3});

    Nfa cube;  // ambiguous two-state automaton accepting every word
    {
        SymbolId zero = cube.add_symbol("0");
        SymbolId one = cube.add_symbol("1");
        StateId p = cube.add_state("p");
        StateId q = cube.add_state("q");
        cube.add_transition(p, zero, p);
        cube.add_transition(p, one, p);
        cube.add_transition(p, zero, q);
        cube.add_transition(p, one, q);
        cube.mark_initial(p);
        cube.mark_final(p);
        cube.mark_final(q);
    }
    instances.push_back({"cube(n=8)", cube, 8});

    const std::uint64_t frozen_seeds[] = {11, 14, 17, 23, 31, 38, 46, 59};
    std::size_t lengths[] = {4, 5, 6, 4, 5, 6, 5, 4};
    for (std::size_t i = 0; i < 8; ++i) {
        RandomStream rng(frozen_seeds[i]);
        for (;;) {
            RandomNfaOptions opt;
            opt.max_states = 3 + i % 4;
            opt.edge_density = 0.3;
            Nfa a = random_nfa(rng, opt);
            if (a.state_count() < 2) continue;
            if (trim(build_unrolled(a, lengths[i])).empty()) continue;
            instances.push_back({"frozen" + std::to_string(i) + "(n=" +
                                     std::to_string(lengths[i]) + ")",
                                 a, lengths[i]});
            break;
        }
    }
    return instances;
}

std::string run_command(const std::string& args) {
    std::string command = std::string(NFATK_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buffer[4096];
    while (std::size_t got = std::fread(buffer, 1, sizeof buffer, pipe)) output.append(buffer, got);
    pclose(pipe);
    return output;
}

} // namespace

TEST_CASE("criterion 1: exact counting equals brute force with zero tolerance") {
    auto start = std::chrono::steady_clock::now();
    bool pass = count_exact_ufa(ufa7(), 3) == BigInt(5);

    RandomStream rng(1001);
    int done = 0;
    while (done < 200) {
        RandomNfaOptions opt;
        opt.max_states = 8;
        opt.edge_density = 0.18;
        Nfa a = random_nfa(rng, opt);
        if (!is_unambiguous(a)) continue;
        ++done;
        std::size_t n = rng.uniform_below_u64(11);
        if (count_exact_ufa(a, n) != brute_force_count(a, n)) pass = false;
    }
    double elapsed = seconds_since(start);
    pass = pass && elapsed < 30.0;
    report(1, "exact counting, 200 random UFAs + the 7-state example, <30s (took " +
                  std::to_string(elapsed) + "s)",
           pass);
    CHECK(pass);
}

TEST_CASE("criterion 2: enumeration correctness and constant-delay regression") {
    bool pass = true;
    RandomStream rng(1002);
    int ufa_cases = 0;
    for (int i = 0; i < 100; ++i) {
        RandomNfaOptions opt;
        opt.max_states = 6;
        Nfa a = random_nfa(rng, opt);
        std::size_t n = rng.uniform_below_u64(9);
        std::set<Word> oracle = brute_force_language(a, n);

        NfaEnumeration nfa_session(a, n);
        std::vector<Word> nfa_words = collect_all(nfa_session);
        if (nfa_words.size() != oracle.size() || to_set(nfa_words) != oracle) pass = false;

        if (is_unambiguous(a)) {
            ++ufa_cases;
            UfaEnumeration ufa_session(a, n);
            std::vector<Word> ufa_words = collect_all(ufa_session);
            if (ufa_words.size() != oracle.size() || to_set(ufa_words) != oracle) pass = false;
        }
    }
    pass = pass && ufa_cases >= 20;  // the sample must actually exercise the UFA path

    // Constant-delay instrumentation: one constant C for all three sizes.
    const std::uint64_t c_pinned = 8;
    for (std::size_t n : {4, 8, 12}) {
        UfaEnumeration session(total_binary_automaton(), n);
        std::size_t emitted = 0;
        while (session.next()) ++emitted;
        if (emitted != (std::size_t{1} << n)) pass = false;
        if (session.max_delay_steps() > c_pinned * n) pass = false;
    }
    report(2, "enumeration vs brute force (100 NFAs) + delay <= 8n for n in {4,8,12}", pass);
    CHECK(pass);
}

TEST_CASE("criterion 3: oracle-sketch count_approx equals brute force exactly") {
    bool pass = true;
    RandomStream rng(1003);
    int done = 0;
    while (done < 200) {
        RandomNfaOptions opt;
        opt.max_states = 5;
        Nfa a = random_nfa(rng, opt);
        std::size_t n = rng.uniform_below_u64(7);
        ++done;
        Sketch sk = build_oracle_sketch(a, n);
        if (count_from_sketch(sk) != brute_force_count(a, n)) pass = false;
    }
    report(3, "union-estimator telescoping: 200 random instances, zero tolerance", pass);
    CHECK(pass);
}

TEST_CASE("criterion 4: approximation-scheme statistical acceptance at reduced budget") {
    bool pass = true;
    const BigRational eps = BigRational::parse("0.3");
    const Budget budget = acceptance_budget();
    for (const Instance& inst : criterion4_instances()) {
        auto start = std::chrono::steady_clock::now();
        BigInt exact = brute_force_count(inst.automaton, inst.n);
        REQUIRE(!exact.is_zero());
        if (inst.name == "ufa7(n=3)") REQUIRE(exact == BigInt(5));
        if (inst.name == "cube(n=8)") REQUIRE(exact == BigInt(256));
        BigRational bound = eps * BigRational(exact);
        int hits = 0;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            try {
                ApproxCount r = count_approx(inst.automaton, inst.n, eps, seed, budget);
                if (r.failure_event) continue;
                BigRational err = (BigRational(r.estimate) - BigRational(exact)).abs();
                if (err <= bound) ++hits;
            } catch (const InternalError&) {
                // A tripped phi <= 1 invariant counts as a failed trial.
            }
        }
        double elapsed = seconds_since(start);
        bool instance_pass = hits >= 75 && elapsed < 600.0;
        std::cout << "  [criterion 4] " << inst.name << ": exact=" << exact.str() << ", "
                  << hits << "/100 within 30% in " << elapsed << "s" << std::endl;
        pass = pass && instance_pass;
    }
    report(4, "relative error <= 0.3 in >= 75/100 seeded trials on 10 instances", pass);
    CHECK(pass);
}

TEST_CASE("criterion 5: uniform generation, analytic and empirical") {
    bool pass = true;

    // Oracle mode: per-word acceptance probability is exactly phi_0.
    Sketch oracle = build_oracle_sketch(ufa7_binary(), 3);
    Nfa a = ufa7_binary();
    StateId qf = a.find_state("qF");
    BigRational phi0 = oracle.budget().accept_scale / oracle.at(3, qf).estimate;
    std::set<Word> lang = brute_force_language(a, 3);
    for (const Word& w : all_words(2, 3)) {
        BigRational p = sample_one_word_probability(oracle, 3, qf, w);
        if (lang.count(w)) {
            if (p != phi0) pass = false;
        } else if (!p.is_zero()) {
            pass = false;
        }
    }

    // Oracle mode, empirical: chi-square over 1e5 conditioned draws.
    {
        RandomStream rng(2005);
        std::map<Word, std::size_t> counts;
        std::size_t accepted = 0;
        while (accepted < 100000) {
            auto w = sample_one(oracle, 3, qf, rng);
            if (!w) continue;
            ++accepted;
            counts[*w]++;
        }
        if (counts.size() != 5) pass = false;
        std::vector<std::size_t> observed;
        for (const auto& [w, c] : counts) observed.push_back(c);
        UniformityTest t = test_uniformity(observed, accepted, 1e-3);
        std::cout << "  [criterion 5] oracle chi-square stat=" << t.statistic
                  << " p=" << t.p_value << std::endl;
        if (t.rejected) pass = false;
    }

    // Built sketch at the reduced budget: chi-square at 1e-4 over 1e5 draws.
    {
        PreprocessOutcome pre = pplvug_preprocess(ufa7_binary(), 3,
                                                  BigRational(BigInt(1), BigInt(2)), 77,
                                                  acceptance_budget());
        REQUIRE(!pre.empty_language);
        REQUIRE(pre.sketch->good_for_generation());
        std::map<Word, std::size_t> counts;
        std::size_t produced = 0;
        std::uint64_t draw = 0;
        while (produced < 100000) {
            RandomStream rng = RandomStream::derive(913, {draw++});
            GenerateOutcome out = pplvug_generate(*pre.sketch, rng);
            if (!out.word) continue;
            ++produced;
            counts[*out.word]++;
        }
        if (counts.size() != 5) pass = false;
        std::vector<std::size_t> observed;
        for (const auto& [w, c] : counts) observed.push_back(c);
        UniformityTest t = test_uniformity(observed, produced, 1e-4);
        std::cout << "  [criterion 5] built-sketch chi-square stat=" << t.statistic
                  << " p=" << t.p_value << std::endl;
        if (t.rejected) pass = false;
    }
    report(5, "per-word probability exactly phi_0 + chi-square (oracle 1e-3, built 1e-4)", pass);
    CHECK(pass);
}

TEST_CASE("criterion 6: sampler failure frequencies match the analytics") {
    bool pass = true;
    Sketch oracle = build_oracle_sketch(ufa7_binary(), 3);
    Nfa a = ufa7_binary();
    StateId qf = a.find_state("qF");
    const std::size_t trials = 100000;

    // Single-attempt FAIL frequency vs the 1 - r9 ceiling.
    {
        RandomStream rng(2006);
        std::size_t fails = 0;
        for (std::size_t i = 0; i < trials; ++i)
            if (!sample_one(oracle, 3, qf, rng)) ++fails;
        double observed = static_cast<double>(fails) / trials;
        double ceiling = 1.0 - Budget::success_floor().to_double();
        double sigma = std::sqrt(ceiling * (1 - ceiling) / trials);
        std::cout << "  [criterion 6] single-attempt FAIL " << observed << " vs ceiling "
                  << ceiling << std::endl;
        if (observed > ceiling + 3 * sigma) pass = false;
        // The analytic single-attempt value is 1 - 5*phi_0; check 3 sigma.
        BigRational phi0 = oracle.budget().accept_scale / oracle.at(3, qf).estimate;
        double p_fail = 1.0 - 5.0 * phi0.to_double();
        double sigma_exact = std::sqrt(p_fail * (1 - p_fail) / trials);
        if (std::abs(observed - p_fail) > 3 * sigma_exact) pass = false;
    }

    // Full generator: FAIL frequency vs (1 - |L| phi_0)^R, on the oracle
    // sketch of the clustered automaton so the analytic value is exact.
    {
        Nfa clustered = cluster_finals(ufa7_binary());
        Sketch oracle_clustered = build_oracle_sketch(clustered, 3);
        StateId qfc = oracle_clustered.dag().final_layern().front();
        BigRational phi0 =
            oracle_clustered.budget().accept_scale / oracle_clustered.at(3, qfc).estimate;
        double p_success = 5.0 * phi0.to_double();
        double p_fail_gen = std::pow(1.0 - p_success, static_cast<double>(pplvug_repetition_bound()));
        std::size_t fails = 0;
        for (std::size_t i = 0; i < trials; ++i) {
            RandomStream rng = RandomStream::derive(2007, {i});
            GenerateOutcome out = pplvug_generate(oracle_clustered, rng);
            if (!out.word) ++fails;
        }
        double observed = static_cast<double>(fails) / trials;
        double sigma = std::sqrt(std::max(p_fail_gen * (1 - p_fail_gen) / trials, 1e-30));
        std::cout << "  [criterion 6] generator FAIL " << observed << " vs analytic "
                  << p_fail_gen << std::endl;
        if (std::abs(observed - p_fail_gen) > 3 * sigma && fails > 0) pass = false;
    }
    report(6, "FAIL frequency within 3 sigma of the analytic values", pass);
    CHECK(pass);
}

TEST_CASE("criterion 7: self-reduction prefix-shift identity, verbatim") {
    bool pass = true;
    RandomStream rng(1007);
    int done = 0;
    while (done < 200) {
        RandomNfaOptions opt;
        opt.max_states = 6;
        opt.single_final = true;
        Nfa a = random_nfa(rng, opt);
        std::size_t n = 1 + rng.uniform_below_u64(6);
        ++done;
        for (SymbolId b = 0; b < a.alphabet_size(); ++b) {
            Nfa reduced = self_reduce_step(a, n, b);
            if (reduced.state_count() > a.state_count()) pass = false;
            if (reduced.transition_count() > a.transition_count()) pass = false;
            std::set<Word> lhs = brute_force_language(reduced, n - 1);
            std::set<Word> rhs;
            for (const Word& suffix : all_words(a.alphabet_size(), n - 1)) {
                Word full{b};
                full.insert(full.end(), suffix.begin(), suffix.end());
                if (membership(a, full)) rhs.insert(suffix);
            }
            if (lhs != rhs) pass = false;
        }
    }
    report(7, "prefix-shift identity on 200 random single-final NFAs, all symbols, n <= 6",
           pass);
    CHECK(pass);
}

TEST_CASE("criterion 8: reductions match their truth-table / path oracles") {
    bool pass = true;
    RandomStream rng(1008);

    // DNF: 100 random formulas, n <= 10 variables.
    for (int i = 0; i < 100; ++i) {
        std::uint32_t vars = 1 + static_cast<std::uint32_t>(rng.uniform_below_u64(10));
        std::size_t disjuncts = 1 + rng.uniform_below_u64(5);
        std::string text =
            "p dnf " + std::to_string(vars) + " " + std::to_string(disjuncts) + "\n";
        for (std::size_t d = 0; d < disjuncts; ++d) {
            std::size_t lits = 1 + rng.uniform_below_u64(vars);
            for (std::size_t l = 0; l < lits; ++l) {
                long var = 1 + static_cast<long>(rng.uniform_below_u64(vars));
                text += std::to_string(rng.uniform_below_u64(2) ? var : -var) + " ";
            }
            text += "0\n";
        }
        DnfFormula f = parse_dnf_string(text);
        NfaWithLength r = dnf_to_nfa(f);
        std::size_t expected = 0;
        for (std::size_t bits = 0; bits < (std::size_t{1} << vars); ++bits) {
            std::vector<bool> sigma(vars);
            for (std::uint32_t j = 0; j < vars; ++j) sigma[j] = (bits >> j) & 1;
            if (f.satisfied_by(sigma)) ++expected;
        }
        if (brute_force_count(r.nfa, r.length) != BigInt(static_cast<long>(expected)))
            pass = false;
    }

    // OBDD / nOBDD: random diagrams with <= 8 nodes.
    int obdd_done = 0;
    while (obdd_done < 60) {
        std::uint32_t vars = 1 + static_cast<std::uint32_t>(rng.uniform_below_u64(6));
        Obdd d;
        for (std::uint32_t v = 1; v <= vars; ++v) d.order.push_back(v);
        std::size_t node_count = 1 + rng.uniform_below_u64(8);
        std::vector<std::uint32_t> var_of(node_count);
        for (std::size_t i = 0; i < node_count; ++i) {
            bool nondet = rng.uniform_below_u64(4) == 0;
            var_of[i] =
                nondet ? 0 : 1 + static_cast<std::uint32_t>(rng.uniform_below_u64(vars));
        }
        auto pick_child = [&](std::size_t i, std::uint32_t min_var) -> std::int64_t {
            std::vector<std::int64_t> candidates{Obdd::kTerminal0, Obdd::kTerminal1};
            for (std::size_t j = i + 1; j < node_count; ++j)
                if (var_of[j] == 0 || var_of[j] > min_var)
                    candidates.push_back(static_cast<std::int64_t>(j + 1));
            return candidates[rng.uniform_below_u64(candidates.size())];
        };
        for (std::size_t i = 0; i < node_count; ++i) {
            Obdd::Node node;
            node.id = static_cast<std::int64_t>(i + 1);
            if (var_of[i] == 0) {
                node.nondet = true;
                d.deterministic = false;
                node.lo = pick_child(i, 0);
                node.hi = pick_child(i, 0);
            } else {
                node.var = var_of[i];
                node.lo = pick_child(i, var_of[i]);
                node.hi = pick_child(i, var_of[i]);
            }
            d.nodes.push_back(node);
        }
        NfaWithLength r;
        try {
            r = obdd_to_nfa(d);
        } catch (const InputError&) {
            continue;  // nondet hops may violate the order; skip those inputs
        }
        ++obdd_done;
        std::size_t expected = 0;
        for (std::size_t bits = 0; bits < (std::size_t{1} << vars); ++bits) {
            std::vector<bool> sigma(vars);
            for (std::uint32_t j = 0; j < vars; ++j) sigma[j] = (bits >> j) & 1;
            if (d.evaluate(sigma)) ++expected;
        }
        if (brute_force_count(r.nfa, r.length) != BigInt(static_cast<long>(expected)))
            pass = false;
        if (d.deterministic && !is_unambiguous(r.nfa)) pass = false;
    }

    // RPQ: random graphs (<= 5 vertices), n <= 5, exhaustive path filter.
    for (int i = 0; i < 60; ++i) {
        std::size_t vcount = 2 + rng.uniform_below_u64(4);
        std::size_t labels = 1 + rng.uniform_below_u64(2);
        std::string text;
        for (std::size_t s = 0; s < vcount; ++s) text += "vertex v" + std::to_string(s) + "\n";
        for (std::size_t s = 0; s < vcount; ++s)
            for (std::size_t t = 0; t < vcount; ++t)
                for (std::size_t l = 0; l < labels; ++l)
                    if (rng.uniform_below_u64(100) < 30)
                        text += "edge v" + std::to_string(s) + " l" + std::to_string(l) +
                                " v" + std::to_string(t) + "\n";
        LabeledGraph g = parse_graph_string(text);
        if (g.edges.empty()) continue;
        Nfa query;
        for (std::size_t l = 0; l < labels; ++l) query.add_symbol("l" + std::to_string(l));
        {
            RandomNfaOptions opt;
            opt.max_states = 3;
            opt.alphabet = labels;
            Nfa r = random_nfa(rng, opt);
            for (StateId q = 0; q < r.state_count(); ++q) query.add_state(r.state_name(q));
            for (const Transition& t : r.transitions())
                query.add_transition(t.src, t.symbol, t.dst);
            for (StateId q : r.initial()) query.mark_initial(q);
            for (StateId q : r.final()) query.mark_final(q);
        }
        std::size_t n = rng.uniform_below_u64(6);
        std::string u = "v0", v = "v" + std::to_string(vcount - 1);
        NfaWithLength prod = rpq_to_nfa(g, query, u, v, n);
        struct Hop {
            std::uint32_t vertex;
            Word word;
        };
        std::vector<Hop> frontier{{g.find_vertex(u), {}}};
        for (std::size_t step = 0; step < n; ++step) {
            std::vector<Hop> next;
            for (const Hop& h : frontier)
                for (const auto& e : g.edges)
                    if (e.src == h.vertex) {
                        Word w = h.word;
                        w.push_back(e.label);
                        next.push_back({e.dst, std::move(w)});
                    }
            frontier = std::move(next);
        }
        std::size_t expected = 0;
        for (const Hop& h : frontier) {
            if (h.vertex != g.find_vertex(v)) continue;
            Word qw;
            for (SymbolId l : h.word) qw.push_back(query.find_symbol(g.labels[l]));
            if (membership_with_epsilon(query, qw)) ++expected;
        }
        if (brute_force_count(prod.nfa, n) != BigInt(static_cast<long>(expected))) pass = false;
    }

    // Binarization preserves counts exactly.
    for (int i = 0; i < 40; ++i) {
        RandomNfaOptions opt;
        opt.max_states = 4;
        opt.alphabet = 1 + rng.uniform_below_u64(5);
        Nfa a = random_nfa(rng, opt);
        BinarizedNfa b = binarize(a);
        std::size_t n = rng.uniform_below_u64(4);
        if (brute_force_count(b.nfa, n * b.width) != brute_force_count(a, n)) pass = false;
    }
    report(8, "DNF/OBDD/RPQ counts vs oracles; binarize count-preserving", pass);
    CHECK(pass);
}

TEST_CASE("criterion 9: byte-identical CLI output for identical seeds") {
    bool pass = true;
    char tmpl[] = "/tmp/nfatk_accept_XXXXXX";
    REQUIRE(mkdtemp(tmpl) != nullptr);
    std::string dir = tmpl;
    std::string ufa7_path = dir + "/ufa7.nfa";
    {
        std::ofstream out(ufa7_path);
        out << serialize_nfa(ufa7());
    }
    const std::string budget_flags = "--budget-s 500 --budget-c 50 --accept-scale 1/4 ";
    std::vector<std::string> commands = {
        "count --approx --len 3 --eps 0.3 --seed 41 " + budget_flags + ufa7_path,
        "count --approx --len 3 --eps 0.3 --seed 41 --threads 4 " + budget_flags + ufa7_path,
        "sample --len 3 --num 8 --seed 42 " + budget_flags + ufa7_path,
        "sample --len 3 --num 8 --seed 42 --threads 4 " + budget_flags + ufa7_path,
        "stats --trials 4 --len 3 --eps 0.3 --seed 43 --json " + budget_flags + ufa7_path,
        "enumerate --len 3 " + ufa7_path,
    };
    // Same command twice: byte-identical; --threads variants agree with
    // their single-threaded counterparts.
    std::vector<std::string> outputs;
    for (const std::string& cmd : commands) {
        std::string first = run_command(cmd);
        std::string second = run_command(cmd);
        if (first != second) pass = false;
        if (first.empty()) pass = false;
        outputs.push_back(first);
    }
    if (outputs[0] != outputs[1]) pass = false;  // count: threads 1 vs 4
    if (outputs[2] != outputs[3]) pass = false;  // sample: threads 1 vs 4
    report(9, "identical seed => byte-identical output, including --threads 4", pass);
    CHECK(pass);
}
