#include "nfatk/nfa.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <istream>
#include <sstream>

namespace nfatk {

namespace {

void insert_sorted(StateSet& set, StateId q) {
    auto it = std::lower_bound(set.begin(), set.end(), q);
    if (it == set.end() || *it != q) set.insert(it, q);
}

} // namespace

StateId Nfa::add_state(const std::string& name) {
    if (find_state(name) != state_names_.size())
        throw InputError("duplicate state: " + name);
    state_names_.push_back(name);
    delta_.emplace_back(alphabet_.size());
    eps_.emplace_back();
    initial_mask_.push_back(false);
    final_mask_.push_back(false);
    return static_cast<StateId>(state_names_.size() - 1);
}

SymbolId Nfa::add_symbol(const std::string& name) {
    if (find_symbol(name) != alphabet_.size())
        throw InputError("duplicate symbol: " + name);
    alphabet_.push_back(name);
    for (auto& row : delta_) row.emplace_back();
    return static_cast<SymbolId>(alphabet_.size() - 1);
}

void Nfa::add_transition(StateId src, SymbolId symbol, StateId dst) {
    if (src >= state_count() || dst >= state_count() || symbol >= alphabet_size())
        throw InputError("transition references undeclared state or symbol");
    StateSet& targets = delta_[src][symbol];
    std::size_t before = targets.size();
    insert_sorted(targets, dst);
    transition_count_ += targets.size() - before;
}

void Nfa::add_epsilon(StateId src, StateId dst) {
    if (src >= state_count() || dst >= state_count())
        throw InputError("epsilon transition references undeclared state");
    std::size_t before = eps_[src].size();
    insert_sorted(eps_[src], dst);
    epsilon_count_ += eps_[src].size() - before;
}

void Nfa::mark_initial(StateId q) {
    if (q >= state_count()) throw InputError("initial state undeclared");
    if (!initial_mask_[q]) {
        initial_mask_[q] = true;
        insert_sorted(initial_, q);
    }
}

void Nfa::mark_final(StateId q) {
    if (q >= state_count()) throw InputError("final state undeclared");
    if (!final_mask_[q]) {
        final_mask_[q] = true;
        insert_sorted(final_, q);
    }
}

StateId Nfa::find_state(const std::string& name) const {
    for (StateId i = 0; i < state_names_.size(); ++i)
        if (state_names_[i] == name) return i;
    return static_cast<StateId>(state_names_.size());
}

SymbolId Nfa::find_symbol(const std::string& name) const {
    for (SymbolId i = 0; i < alphabet_.size(); ++i)
        if (alphabet_[i] == name) return i;
    return static_cast<SymbolId>(alphabet_.size());
}

std::vector<Transition> Nfa::transitions() const {
    std::vector<Transition> out;
    out.reserve(transition_count_);
    for (StateId q = 0; q < state_count(); ++q)
        for (SymbolId s = 0; s < alphabet_size(); ++s)
            for (StateId p : delta_[q][s]) out.push_back({q, s, p});
    return out;
}

bool Nfa::operator==(const Nfa& other) const {
    return state_names_ == other.state_names_ && alphabet_ == other.alphabet_ &&
           delta_ == other.delta_ && eps_ == other.eps_ && initial_ == other.initial_ &&
           final_ == other.final_;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream iss(line);
    std::string tok;
    while (iss >> tok) tokens.push_back(tok);
    return tokens;
}

} // namespace

Nfa parse_nfa(std::istream& in) {
    Nfa a;
    bool saw_states = false;
    bool saw_alphabet = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::vector<std::string> tokens = tokenize(line);
        if (tokens.empty()) continue;
        const std::string& head = tokens.front();
        try {
            if (head == "alphabet:") {
                if (saw_alphabet) throw InputError("duplicate alphabet section");
                saw_alphabet = true;
                for (std::size_t i = 1; i < tokens.size(); ++i) a.add_symbol(tokens[i]);
            } else if (head == "states:") {
                if (saw_states) throw InputError("duplicate states section");
                saw_states = true;
                for (std::size_t i = 1; i < tokens.size(); ++i) a.add_state(tokens[i]);
            } else if (head == "initial:") {
                for (std::size_t i = 1; i < tokens.size(); ++i) {
                    StateId q = a.find_state(tokens[i]);
                    if (q == a.state_count()) throw InputError("undeclared state: " + tokens[i]);
                    a.mark_initial(q);
                }
            } else if (head == "final:") {
                for (std::size_t i = 1; i < tokens.size(); ++i) {
                    StateId q = a.find_state(tokens[i]);
                    if (q == a.state_count()) throw InputError("undeclared state: " + tokens[i]);
                    a.mark_final(q);
                }
            } else if (head == "trans:") {
                if (tokens.size() != 4) throw InputError("trans: expects `src symbol dst`");
                StateId src = a.find_state(tokens[1]);
                SymbolId sym = a.find_symbol(tokens[2]);
                StateId dst = a.find_state(tokens[3]);
                if (src == a.state_count()) throw InputError("undeclared state: " + tokens[1]);
                if (sym == a.alphabet_size()) throw InputError("undeclared symbol: " + tokens[2]);
                if (dst == a.state_count()) throw InputError("undeclared state: " + tokens[3]);
                a.add_transition(src, sym, dst);
            } else if (head == "eps:") {
                if (tokens.size() != 3) throw InputError("eps: expects `src dst`");
                StateId src = a.find_state(tokens[1]);
                StateId dst = a.find_state(tokens[2]);
                if (src == a.state_count()) throw InputError("undeclared state: " + tokens[1]);
                if (dst == a.state_count()) throw InputError("undeclared state: " + tokens[2]);
                a.add_epsilon(src, dst);
            } else {
                throw InputError("unknown directive: " + head);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const InputError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    if (!saw_states) throw ParseError(lineno, "missing states section");
    return a;
}

Nfa parse_nfa_string(const std::string& text) {
    std::istringstream iss(text);
    return parse_nfa(iss);
}

Nfa parse_nfa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return parse_nfa(in);
}

std::string serialize_nfa(const Nfa& a) {
    std::ostringstream out;
    out << "alphabet:";
    for (const auto& s : a.alphabet()) out << ' ' << s;
    out << "\nstates:";
    for (StateId q = 0; q < a.state_count(); ++q) out << ' ' << a.state_name(q);
    out << "\ninitial:";
    for (StateId q : a.initial()) out << ' ' << a.state_name(q);
    out << "\nfinal:";
    for (StateId q : a.final()) out << ' ' << a.state_name(q);
    out << '\n';
    for (const Transition& t : a.transitions())
        out << "trans: " << a.state_name(t.src) << ' ' << a.symbol_name(t.symbol) << ' '
            << a.state_name(t.dst) << '\n';
    for (StateId q = 0; q < a.state_count(); ++q)
        for (StateId p : a.epsilon_successors(q))
            out << "eps: " << a.state_name(q) << ' ' << a.state_name(p) << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Epsilon removal

namespace {

/// Forward ε-closure of each state (reflexive, transitive).
std::vector<StateSet> epsilon_closures(const Nfa& a) {
    std::vector<StateSet> closures(a.state_count());
    for (StateId q = 0; q < a.state_count(); ++q) {
        std::vector<bool> seen(a.state_count(), false);
        std::deque<StateId> work{q};
        seen[q] = true;
        while (!work.empty()) {
            StateId cur = work.front();
            work.pop_front();
            for (StateId nxt : a.epsilon_successors(cur))
                if (!seen[nxt]) {
                    seen[nxt] = true;
                    work.push_back(nxt);
                }
        }
        for (StateId p = 0; p < a.state_count(); ++p)
            if (seen[p]) closures[q].push_back(p);
    }
    return closures;
}

} // namespace

Nfa remove_epsilon(const Nfa& a) {
    if (!a.has_epsilon()) return a;
    std::vector<StateSet> closures = epsilon_closures(a);
    Nfa out;
    for (SymbolId s = 0; s < a.alphabet_size(); ++s) out.add_symbol(a.symbol_name(s));
    for (StateId q = 0; q < a.state_count(); ++q) out.add_state(a.state_name(q));
    for (StateId q = 0; q < a.state_count(); ++q) {
        for (StateId c : closures[q])
            for (SymbolId s = 0; s < a.alphabet_size(); ++s)
                for (StateId p : a.successors(c, s)) out.add_transition(q, s, p);
        bool reaches_final = false;
        for (StateId c : closures[q]) reaches_final = reaches_final || a.is_final(c);
        if (reaches_final) out.mark_final(q);
    }
    for (StateId q : a.initial()) out.mark_initial(q);
    return out;
}

// ---------------------------------------------------------------------------
// Simulation

namespace {

void require_epsilon_free(const Nfa& a, const char* op) {
    if (a.has_epsilon())
        throw ContractError(std::string(op) + " requires an epsilon-free automaton");
}

void require_symbols(const Nfa& a, const Word& w) {
    for (SymbolId s : w)
        if (s >= a.alphabet_size()) throw InputError("word symbol not in alphabet");
}

std::vector<bool> step(const Nfa& a, const std::vector<bool>& current, SymbolId s) {
    std::vector<bool> next(a.state_count(), false);
    for (StateId q = 0; q < a.state_count(); ++q)
        if (current[q])
            for (StateId p : a.successors(q, s)) next[p] = true;
    return next;
}

} // namespace

StateSet reachable_states(const Nfa& a, const Word& w) {
    require_epsilon_free(a, "reachable_states");
    require_symbols(a, w);
    std::vector<bool> current(a.state_count(), false);
    for (StateId q : a.initial()) current[q] = true;
    for (SymbolId s : w) current = step(a, current, s);
    StateSet out;
    for (StateId q = 0; q < a.state_count(); ++q)
        if (current[q]) out.push_back(q);
    return out;
}

bool membership(const Nfa& a, const Word& w) {
    StateSet reached = reachable_states(a, w);
    for (StateId q : reached)
        if (a.is_final(q)) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Ambiguity via the self-product

bool is_unambiguous(const Nfa& a) {
    require_epsilon_free(a, "is_unambiguous");
    const std::size_t m = a.state_count();
    auto idx = [m](StateId p, StateId q) { return static_cast<std::size_t>(p) * m + q; };

    // Forward reachability from all ordered initial pairs.
    std::vector<bool> fwd(m * m, false);
    std::deque<std::pair<StateId, StateId>> work;
    for (StateId p : a.initial())
        for (StateId q : a.initial())
            if (!fwd[idx(p, q)]) {
                fwd[idx(p, q)] = true;
                work.emplace_back(p, q);
            }
    while (!work.empty()) {
        auto [p, q] = work.front();
        work.pop_front();
        for (SymbolId s = 0; s < a.alphabet_size(); ++s)
            for (StateId p2 : a.successors(p, s))
                for (StateId q2 : a.successors(q, s))
                    if (!fwd[idx(p2, q2)]) {
                        fwd[idx(p2, q2)] = true;
                        work.emplace_back(p2, q2);
                    }
    }

    // Reverse product adjacency restricted to forward-reachable pairs.
    std::vector<bool> bwd(m * m, false);
    for (StateId p : a.final())
        for (StateId q : a.final())
            if (fwd[idx(p, q)] && !bwd[idx(p, q)]) {
                bwd[idx(p, q)] = true;
                work.emplace_back(p, q);
            }
    // Predecessor lists per symbol, computed once.
    std::vector<std::vector<StateSet>> pred(m, std::vector<StateSet>(a.alphabet_size()));
    for (StateId q = 0; q < m; ++q)
        for (SymbolId s = 0; s < a.alphabet_size(); ++s)
            for (StateId p : a.successors(q, s)) pred[p][s].push_back(q);
    while (!work.empty()) {
        auto [p, q] = work.front();
        work.pop_front();
        for (SymbolId s = 0; s < a.alphabet_size(); ++s)
            for (StateId p0 : pred[p][s])
                for (StateId q0 : pred[q][s])
                    if (fwd[idx(p0, q0)] && !bwd[idx(p0, q0)]) {
                        bwd[idx(p0, q0)] = true;
                        work.emplace_back(p0, q0);
                    }
    }

    // Two distinct accepting runs of the same word differ at some index,
    // which is exactly a useful off-diagonal pair.
    for (StateId p = 0; p < m; ++p)
        for (StateId q = 0; q < m; ++q)
            if (p != q && fwd[idx(p, q)] && bwd[idx(p, q)]) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Self-reduction

Nfa self_reduce_step(const Nfa& a, std::size_t n, SymbolId b) {
    require_epsilon_free(a, "self_reduce_step");
    if (a.final().size() != 1)
        throw ContractError("self_reduce_step requires a single final state");
    if (n < 1) throw ContractError("self_reduce_step requires n >= 1");
    if (b >= a.alphabet_size()) throw InputError("self_reduce_step: symbol not in alphabet");

    const StateId old_final = a.final().front();

    // Q_b: one-step b-successors of the initial set. Physically fusing these
    // states into one loses which member a mid-run re-entry came through and
    // can accept words with no preimage, so the merge is realized on the
    // initial-set side instead: Q_b becomes the initial set of an otherwise
    // unchanged automaton. Then y is length-(n-1) accepted iff some Q_b
    // member reads y to the final state iff b.y is length-n accepted, and no
    // count ever changes. Empty Q_b leaves no initial states, which is the
    // documented empty-language outcome.
    Nfa out;
    for (SymbolId s = 0; s < a.alphabet_size(); ++s) out.add_symbol(a.symbol_name(s));
    for (StateId q = 0; q < a.state_count(); ++q) out.add_state(a.state_name(q));
    for (const Transition& t : a.transitions()) out.add_transition(t.src, t.symbol, t.dst);
    for (StateId i : a.initial())
        for (StateId q : a.successors(i, b)) out.mark_initial(q);
    out.mark_final(old_final);
    return out;
}

// ---------------------------------------------------------------------------
// Word rendering

std::string render_word(const Nfa& a, const Word& w) {
    bool single_char = true;
    for (const auto& s : a.alphabet()) single_char = single_char && s.size() == 1;
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!single_char && i > 0) out += ' ';
        out += a.symbol_name(w[i]);
    }
    return out;
}

Word word_from_string(const Nfa& a, const std::string& text) {
    bool single_char = true;
    for (const auto& s : a.alphabet()) single_char = single_char && s.size() == 1;
    Word w;
    if (single_char) {
        for (char c : text) {
            SymbolId s = a.find_symbol(std::string(1, c));
            if (s == a.alphabet_size()) throw InputError("symbol not in alphabet: " + std::string(1, c));
            w.push_back(s);
        }
    } else {
        std::istringstream iss(text);
        std::string tok;
        while (iss >> tok) {
            SymbolId s = a.find_symbol(tok);
            if (s == a.alphabet_size()) throw InputError("symbol not in alphabet: " + tok);
            w.push_back(s);
        }
    }
    return w;
}

} // namespace nfatk
