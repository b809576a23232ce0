// nfatk: counting, enumeration, and uniform sampling of the length-n words
// accepted by an NFA, plus adapters from DNF / OBDD / regular path query
// inputs. Batch-oriented: data to stdout, diagnostics to stderr.
//
// Exit codes: 0 success, 2 usage error, 3 input parse error, 4 contract
// violation. An approximation-scheme failure event is not an error: the
// estimate 0 is printed with a warning and the exit code stays 0.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "nfatk/enumerate.hpp"
#include "nfatk/exact.hpp"
#include "nfatk/nfa.hpp"
#include "nfatk/rational.hpp"
#include "nfatk/reduce.hpp"
#include "nfatk/rng.hpp"
#include "nfatk/sketch.hpp"
#include "nfatk/statistics.hpp"
#include "nfatk/unroll.hpp"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitParse = 3;
constexpr int kExitContract = 4;

struct BudgetFlags {
    std::optional<std::uint64_t> k;
    std::optional<std::uint64_t> s;
    std::optional<std::uint64_t> c;
    std::optional<std::string> accept_scale;

    bool any() const { return k || s || c || accept_scale; }

    /// Overridden budget when any flag is set, else the guaranteed default.
    /// Missing fields come from the formulas one by one, so overriding s
    /// and c works even where the derived 2k^7 would not be representable.
    nfatk::Budget resolve(std::size_t n, std::size_t m, const nfatk::BigRational& eps) const {
        if (!any()) return nfatk::Budget::guaranteed_defaults(n, m, eps);
        std::uint64_t kk = k ? *k : nfatk::Budget::default_k(n, m, eps);
        std::uint64_t ss;
        if (s) {
            ss = *s;
        } else {
            nfatk::BigInt s_big =
                nfatk::BigInt(2) * nfatk::BigInt::pow(nfatk::BigInt(static_cast<long>(kk)), 7);
            if (s_big.bit_length() > 63)
                throw nfatk::ContractError(
                    "derived sample size 2k^7 is not representable; pass --budget-s");
            ss = s_big.to_u64();
        }
        std::uint64_t cc = c ? *c : nfatk::Budget::default_retries(kk);
        return nfatk::Budget::overridden(
            kk, ss, cc,
            accept_scale ? nfatk::BigRational::parse(*accept_scale)
                         : nfatk::Budget::default_accept_scale());
    }
};

void add_budget_flags(CLI::App* cmd, BudgetFlags& flags) {
    cmd->add_option("--budget-k", flags.k, "Override the budget parameter k");
    cmd->add_option("--budget-s", flags.s, "Override the per-vertex sample-set size s");
    cmd->add_option("--budget-c", flags.c, "Override the per-sample retry count c");
    cmd->add_option("--accept-scale", flags.accept_scale,
                    "Override the acceptance scale (rational, e.g. 1/4)");
}

/// ε-free copy plus, when the alphabet is not binary, the binarization the
/// approximation core needs.
struct ApproxInput {
    nfatk::Nfa automaton;                          // binary, ε-free
    std::size_t length;                            // scaled by the code width
    std::optional<nfatk::BinarizedNfa> binarized;  // engaged when encoding happened
};

ApproxInput prepare_approx_input(const nfatk::Nfa& parsed, std::size_t n) {
    ApproxInput in;
    nfatk::Nfa eps_free = nfatk::remove_epsilon(parsed);
    if (eps_free.alphabet_size() == 2) {
        in.automaton = std::move(eps_free);
        in.length = n;
    } else {
        nfatk::BinarizedNfa bin = nfatk::binarize(eps_free);
        in.length = n * bin.width;
        in.automaton = bin.nfa;
        in.binarized = std::move(bin);
    }
    return in;
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return nfatk::RandomStream::derive(seed, {tag, index}).next_u64();
}

int run_count(const std::string& path, bool exact, bool approx, bool brute, std::size_t n,
              const std::string& eps_text, std::uint64_t seed, const BudgetFlags& budget,
              unsigned threads) {
    if (static_cast<int>(exact) + static_cast<int>(approx) + static_cast<int>(brute) != 1) {
        std::cerr << "count: exactly one of --exact, --approx, --brute is required\n";
        return kExitUsage;
    }
    nfatk::Nfa a = nfatk::parse_nfa_file(path);
    if (brute) {
        std::cout << nfatk::brute_force_count(a, n).str() << "\n";
        return kExitOk;
    }
    if (exact) {
        std::cout << nfatk::count_exact_ufa(nfatk::remove_epsilon(a), n).str() << "\n";
        return kExitOk;
    }
    nfatk::BigRational eps = nfatk::BigRational::parse(eps_text);
    ApproxInput in = prepare_approx_input(a, n);
    std::optional<nfatk::Budget> override_budget;
    if (budget.any()) override_budget = budget.resolve(in.length, in.automaton.state_count(), eps);
    nfatk::ApproxCount result =
        nfatk::count_approx(in.automaton, in.length, eps, seed, override_budget, threads);
    if (result.failure_event) {
        std::cerr << "warning: sampling failed (layer " << result.failure->layer << ", state "
                  << result.failure->state << ", slot " << result.failure->slot
                  << "); reporting 0\n";
    }
    std::cout << result.estimate.str() << "\n";
    return kExitOk;
}

int run_enumerate(const std::string& path, std::size_t n, std::uint64_t limit) {
    nfatk::Nfa a = nfatk::remove_epsilon(nfatk::parse_nfa_file(path));
    std::uint64_t emitted = 0;
    auto drain = [&](auto& session) {
        while (emitted < limit) {
            auto w = session.next();
            if (!w) break;
            std::cout << nfatk::render_word(a, *w) << "\n";
            ++emitted;
        }
    };
    if (nfatk::is_unambiguous(a)) {
        nfatk::UfaEnumeration session(a, n);
        drain(session);
    } else {
        nfatk::NfaEnumeration session(a, n);
        drain(session);
    }
    return kExitOk;
}

int run_sample(const std::string& path, std::size_t n, std::uint64_t num,
               const std::string& delta_text, std::uint64_t seed, const BudgetFlags& budget,
               unsigned threads) {
    nfatk::Nfa parsed = nfatk::parse_nfa_file(path);
    nfatk::BigRational delta = nfatk::BigRational::parse(delta_text);
    ApproxInput in = prepare_approx_input(parsed, n);
    std::optional<nfatk::Budget> override_budget;
    if (budget.any())
        override_budget = budget.resolve(in.length, in.automaton.state_count() + 1,
                                         nfatk::BigRational(nfatk::BigInt(1), nfatk::BigInt(2)));
    nfatk::PreprocessOutcome pre =
        nfatk::pplvug_preprocess(in.automaton, in.length, delta, seed, override_budget, threads);
    if (pre.empty_language) {
        std::cerr << "empty language\n";
        return kExitOk;
    }
    if (!pre.sketch->good_for_generation())
        std::cerr << "warning: sketch is not good-for-generation; no uniformity guarantee\n";
    for (std::uint64_t i = 0; i < num; ++i) {
        nfatk::RandomStream rng = nfatk::RandomStream::derive(seed, {0x67656eULL, i});
        nfatk::GenerateOutcome out = nfatk::pplvug_generate(*pre.sketch, rng);
        if (!out.word) {
            std::cout << "fail\n";
            continue;
        }
        if (in.binarized) {
            std::cout << nfatk::render_word(parsed, in.binarized->decode(*out.word)) << "\n";
        } else {
            std::cout << nfatk::render_word(in.automaton, *out.word) << "\n";
        }
    }
    return kExitOk;
}

int run_check(const std::string& what, const std::string& path, std::optional<std::size_t> len) {
    nfatk::Nfa a = nfatk::parse_nfa_file(path);
    if (what == "ambiguity") {
        if (a.has_epsilon())
            throw nfatk::ContractError(
                "ambiguity is defined on epsilon-free automata; remove epsilons first");
        std::cout << (nfatk::is_unambiguous(a) ? "unambiguous" : "ambiguous") << "\n";
        return kExitOk;
    }
    nfatk::Nfa eps_free = nfatk::remove_epsilon(a);
    bool empty;
    if (len) {
        empty = nfatk::trim(nfatk::build_unrolled(eps_free, *len)).empty();
    } else {
        // Some word is accepted iff L_n is nonempty for some n below the
        // state count (shortest accepting path visits no state twice).
        empty = true;
        for (std::size_t n = 0; n <= eps_free.state_count() && empty; ++n)
            empty = nfatk::trim(nfatk::build_unrolled(eps_free, n)).empty();
    }
    std::cout << (empty ? "empty" : "nonempty") << "\n";
    return kExitOk;
}

int run_reduce(const std::string& kind, const std::string& path, const std::string& query_path,
               const std::string& from, const std::string& to, std::size_t len) {
    nfatk::NfaWithLength out;
    if (kind == "dnf") {
        out = nfatk::dnf_to_nfa(nfatk::parse_dnf_file(path));
    } else if (kind == "obdd") {
        out = nfatk::obdd_to_nfa(nfatk::parse_obdd_file(path));
    } else {
        nfatk::LabeledGraph g = nfatk::parse_graph_file(path);
        nfatk::Nfa query = nfatk::parse_nfa_file(query_path);
        out = nfatk::rpq_to_nfa(g, query, from, to, len);
    }
    std::cout << "# length: " << out.length << "\n" << nfatk::serialize_nfa(out.nfa);
    return kExitOk;
}

json count_stats(const nfatk::Nfa& parsed, std::size_t n, const std::string& eps_text,
                 std::uint64_t seed, std::size_t trials, const BudgetFlags& budget,
                 unsigned threads) {
    nfatk::BigRational eps = nfatk::BigRational::parse(eps_text);
    ApproxInput in = prepare_approx_input(parsed, n);
    std::optional<nfatk::Budget> override_budget;
    if (budget.any()) override_budget = budget.resolve(in.length, in.automaton.state_count(), eps);

    std::optional<nfatk::BigInt> exact;
    try {
        exact = nfatk::brute_force_count(parsed, n);
    } catch (const nfatk::CapExceededError&) {
        nfatk::Nfa eps_free = nfatk::remove_epsilon(parsed);
        if (nfatk::is_unambiguous(eps_free)) exact = nfatk::count_exact_ufa(eps_free, n);
    }

    json rows = json::array();
    std::size_t successes = 0;
    std::size_t failures = 0;
    for (std::size_t t = 0; t < trials; ++t) {
        std::uint64_t s = trial_seed(seed, 0x636e74ULL, t);
        nfatk::ApproxCount r =
            nfatk::count_approx(in.automaton, in.length, eps, s, override_budget, threads);
        json row;
        row["trial"] = t;
        row["seed"] = s;
        row["estimate"] = r.estimate.str();
        row["failure_event"] = r.failure_event;
        if (r.failure_event) ++failures;
        if (exact) {
            row["exact"] = exact->str();
            nfatk::BigRational err(0);
            if (!exact->is_zero()) {
                err = (nfatk::BigRational(r.estimate) - nfatk::BigRational(*exact)).abs() /
                      nfatk::BigRational(*exact);
            } else if (!r.estimate.is_zero()) {
                err = nfatk::BigRational(1);
            }
            row["relative_error"] = err.str();
            row["relative_error_value"] = err.to_double();
            if (err <= eps) ++successes;
        }
        rows.push_back(std::move(row));
    }
    json report;
    report["schema"] = 1;
    report["mode"] = "count";
    report["len"] = n;
    report["eps"] = eps.str();
    report["seed"] = seed;
    report["trials"] = trials;
    report["states"] = parsed.state_count();
    report["transitions"] = parsed.transition_count();
    report["rows"] = std::move(rows);
    report["failure_events"] = failures;
    if (exact) {
        report["exact"] = exact->str();
        report["success_fraction"] = static_cast<double>(successes) / static_cast<double>(trials);
    } else {
        report["exact"] = nullptr;
        report["success_fraction"] = nullptr;
    }
    return report;
}

json uniformity_stats(const nfatk::Nfa& parsed, std::size_t n, std::uint64_t seed,
                      std::size_t draws, const BudgetFlags& budget, double significance,
                      unsigned threads) {
    ApproxInput in = prepare_approx_input(parsed, n);
    std::optional<nfatk::Budget> override_budget;
    if (budget.any())
        override_budget = budget.resolve(in.length, in.automaton.state_count() + 1,
                                         nfatk::BigRational(nfatk::BigInt(1), nfatk::BigInt(2)));
    nfatk::PreprocessOutcome pre =
        nfatk::pplvug_preprocess(in.automaton, in.length, nfatk::BigRational(nfatk::BigInt(1), nfatk::BigInt(2)),
                                 seed, override_budget, threads);

    json report;
    report["schema"] = 1;
    report["mode"] = "uniformity";
    report["len"] = n;
    report["seed"] = seed;
    report["draws"] = draws;
    if (pre.empty_language) {
        report["empty_language"] = true;
        return report;
    }
    report["empty_language"] = false;
    report["good_for_generation"] = pre.sketch->good_for_generation();

    std::map<std::string, std::size_t> counts;
    std::size_t produced = 0;
    std::size_t fails = 0;
    for (std::size_t i = 0; i < draws; ++i) {
        nfatk::RandomStream rng = nfatk::RandomStream::derive(seed, {0x756e69ULL, i});
        nfatk::GenerateOutcome out = nfatk::pplvug_generate(*pre.sketch, rng);
        if (!out.word) {
            ++fails;
            continue;
        }
        ++produced;
        if (in.binarized) {
            counts[nfatk::render_word(parsed, in.binarized->decode(*out.word))]++;
        } else {
            counts[nfatk::render_word(in.automaton, *out.word)]++;
        }
    }
    json freq = json::object();
    std::vector<std::size_t> observed;
    for (const auto& [w, c] : counts) {
        freq[w] = c;
        observed.push_back(c);
    }
    report["fails"] = fails;
    report["produced"] = produced;
    report["frequencies"] = std::move(freq);

    std::optional<nfatk::BigInt> exact;
    try {
        exact = nfatk::brute_force_count(parsed, n);
    } catch (const nfatk::CapExceededError&) {
    }
    if (exact) report["exact"] = exact->str();
    // The goodness-of-fit needs the full support, so it only runs when every
    // word of the language was drawn at least once.
    if (exact && !exact->is_zero() && produced > 0 &&
        nfatk::BigInt(static_cast<long>(observed.size())) == *exact) {
        nfatk::UniformityTest t = nfatk::test_uniformity(observed, produced, significance);
        report["chi_square"] = t.statistic;
        report["p_value"] = t.p_value;
        report["rejected"] = t.rejected;
        report["significance"] = significance;
    }
    return report;
}

void print_count_stats_text(const json& report) {
    std::cout << "trials: " << report["trials"] << "\n";
    if (!report["exact"].is_null())
        std::cout << "exact: " << report["exact"].get<std::string>() << "\n";
    for (const auto& row : report["rows"]) {
        std::cout << "trial " << row["trial"] << ": estimate "
                  << row["estimate"].get<std::string>();
        if (row.contains("relative_error_value"))
            std::cout << " (relative error " << row["relative_error_value"].get<double>() << ")";
        std::cout << "\n";
    }
    if (!report["success_fraction"].is_null())
        std::cout << "success fraction: " << report["success_fraction"].get<double>() << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"counting, enumeration, and uniform sampling for NFA languages"};
    app.require_subcommand(1);

    std::string path, eps_text = "0.5", delta_text = "0.5";
    std::size_t len = 0;
    std::uint64_t seed = 0;
    std::uint64_t limit = UINT64_MAX;
    std::uint64_t num = 1;
    unsigned threads = 1;
    BudgetFlags budget;

    auto* count = app.add_subcommand("count", "Count the length-n words of an NFA language");
    bool exact = false, approx = false, brute = false;
    count->add_flag("--exact", exact, "Exact count (unambiguous NFAs only)");
    count->add_flag("--approx", approx, "Randomized approximation scheme");
    count->add_flag("--brute", brute, "Brute-force oracle count");
    count->add_option("--len", len, "Word length n")->required();
    count->add_option("--eps", eps_text, "Relative error bound in (0,1)");
    count->add_option("--seed", seed, "Randomness seed");
    count->add_option("--threads", threads, "Worker threads for sketch construction");
    count->add_option("file", path, "NFA text file")->required();
    add_budget_flags(count, budget);

    auto* enumerate = app.add_subcommand("enumerate", "Stream the length-n words, one per line");
    enumerate->add_option("--len", len, "Word length n")->required();
    enumerate->add_option("--limit", limit, "Stop after this many words");
    enumerate->add_option("file", path, "NFA text file")->required();

    auto* sample = app.add_subcommand("sample", "Uniformly sample length-n words");
    sample->add_option("--len", len, "Word length n")->required();
    sample->add_option("--num", num, "Number of samples");
    sample->add_option("--delta", delta_text, "Preprocessing failure bound in (0,1)");
    sample->add_option("--seed", seed, "Randomness seed");
    sample->add_option("--threads", threads, "Worker threads for sketch construction");
    sample->add_option("file", path, "NFA text file")->required();
    add_budget_flags(sample, budget);

    auto* check = app.add_subcommand("check", "Decide ambiguity or emptiness");
    std::string what;
    std::optional<std::size_t> check_len;
    check->add_option("property", what, "ambiguity or emptiness")
        ->required()
        ->check(CLI::IsMember({"ambiguity", "emptiness"}));
    check->add_option("--len", check_len, "Restrict emptiness to L_n");
    check->add_option("file", path, "NFA text file")->required();

    auto* reduce = app.add_subcommand("reduce", "Compile DNF/OBDD/RPQ inputs to NFA text");
    std::string kind, query_path, from, to;
    reduce->add_option("kind", kind, "dnf, obdd, or rpq")
        ->required()
        ->check(CLI::IsMember({"dnf", "obdd", "rpq"}));
    reduce->add_option("file", path, "Input file (formula, diagram, or graph)")->required();
    reduce->add_option("--query", query_path, "RPQ: regular expression as an NFA file");
    reduce->add_option("--from", from, "RPQ: source vertex");
    reduce->add_option("--to", to, "RPQ: target vertex");
    reduce->add_option("--len", len, "RPQ: path length");

    auto* stats = app.add_subcommand("stats", "Repeated-trial reports against the exact oracle");
    std::size_t trials = 10;
    bool as_json = false;
    std::string stats_mode = "count";
    double significance = 1e-3;
    stats->add_option("--trials", trials, "Number of repeated approx counts");
    stats->add_option("--len", len, "Word length n")->required();
    stats->add_option("--eps", eps_text, "Relative error bound");
    stats->add_option("--seed", seed, "Randomness seed");
    stats->add_option("--num", num, "Uniformity mode: number of draws");
    stats->add_option("--mode", stats_mode, "count or uniformity")
        ->check(CLI::IsMember({"count", "uniformity"}));
    stats->add_option("--significance", significance, "Uniformity rejection level");
    stats->add_option("--threads", threads, "Worker threads");
    stats->add_flag("--json", as_json, "Emit a machine-readable report");
    stats->add_option("file", path, "NFA text file")->required();
    add_budget_flags(stats, budget);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*count)
            return run_count(path, exact, approx, brute, len, eps_text, seed, budget, threads);
        if (*enumerate) return run_enumerate(path, len, limit);
        if (*sample) return run_sample(path, len, num, delta_text, seed, budget, threads);
        if (*check) return run_check(what, path, check_len);
        if (*reduce) {
            if (kind == "rpq" && (query_path.empty() || from.empty() || to.empty())) {
                std::cerr << "reduce rpq: --query, --from, --to are required\n";
                return kExitUsage;
            }
            return run_reduce(kind, path, query_path, from, to, len);
        }
        // stats
        nfatk::Nfa parsed = nfatk::parse_nfa_file(path);
        json report = (stats_mode == "count")
                          ? count_stats(parsed, len, eps_text, seed, trials, budget, threads)
                          : uniformity_stats(parsed, len, seed, num, budget, significance,
                                             threads);
        if (as_json || stats_mode == "uniformity") {
            std::cout << report.dump(2) << "\n";
        } else {
            print_count_stats_text(report);
        }
        return kExitOk;
    } catch (const nfatk::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const nfatk::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitParse;
    } catch (const nfatk::InternalError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitContract;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitContract;
    }
}
