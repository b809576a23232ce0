#include "nfatk/reduce.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace nfatk {

// ---------------------------------------------------------------------------
// DNF

bool DnfFormula::satisfied_by(const std::vector<bool>& assignment) const {
    for (const Disjunct& d : disjuncts) {
        if (!d.satisfiable) continue;
        bool ok = true;
        for (auto [var, positive] : d.literals)
            if (assignment[var - 1] != positive) {
                ok = false;
                break;
            }
        if (ok) return true;
    }
    return false;
}

DnfFormula parse_dnf(std::istream& in) {
    DnfFormula f;
    bool saw_header = false;
    std::size_t expected_disjuncts = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream iss(line);
        std::string tok;
        if (!(iss >> tok)) continue;
        if (tok == "c") continue;
        if (tok == "p") {
            std::string kind;
            if (!(iss >> kind >> f.variable_count >> expected_disjuncts) || kind != "dnf")
                throw ParseError(lineno, "expected `p dnf <vars> <disjuncts>`");
            saw_header = true;
            continue;
        }
        if (!saw_header) throw ParseError(lineno, "missing `p dnf` header");
        DnfFormula::Disjunct d;
        std::map<std::uint32_t, bool> polarity;
        long lit = 0;
        std::istringstream body(line);
        bool terminated = false;
        while (body >> lit) {
            if (lit == 0) {
                terminated = true;
                break;
            }
            std::uint32_t var = static_cast<std::uint32_t>(lit < 0 ? -lit : lit);
            if (var == 0 || var > f.variable_count)
                throw ParseError(lineno, "variable index out of range");
            bool pos = lit > 0;
            auto it = polarity.find(var);
            if (it != polarity.end() && it->second != pos) d.satisfiable = false;
            polarity[var] = pos;
        }
        if (!terminated) throw ParseError(lineno, "disjunct not 0-terminated");
        if (d.satisfiable)
            for (auto [var, pos] : polarity) d.literals.emplace_back(var, pos);
        else
            d.literals.clear();  // complementary literals: no witnesses
        f.disjuncts.push_back(std::move(d));
    }
    if (!saw_header) throw ParseError(lineno, "missing `p dnf` header");
    if (expected_disjuncts != f.disjuncts.size())
        throw ParseError(lineno, "disjunct count does not match header");
    return f;
}

DnfFormula parse_dnf_string(const std::string& text) {
    std::istringstream iss(text);
    return parse_dnf(iss);
}

DnfFormula parse_dnf_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return parse_dnf(in);
}

NfaWithLength dnf_to_nfa(const DnfFormula& f) {
    const std::uint32_t n = f.variable_count;
    Nfa a;
    SymbolId zero = a.add_symbol("0");
    SymbolId one = a.add_symbol("1");
    StateId start = a.add_state("s");
    a.mark_initial(start);
    if (n == 0) {
        // Zero variables: the empty assignment satisfies any satisfiable
        // disjunct.
        for (const auto& d : f.disjuncts)
            if (d.satisfiable) {
                a.mark_final(start);
                break;
            }
        return {std::move(a), 0};
    }
    for (std::size_t di = 0; di < f.disjuncts.size(); ++di) {
        const auto& d = f.disjuncts[di];
        if (!d.satisfiable) continue;
        // Chain of n states; position j (1-based) is reached after reading
        // the value of variable j.
        std::vector<StateId> chain;
        chain.reserve(n);
        for (std::uint32_t j = 1; j <= n; ++j)
            chain.push_back(a.add_state("d" + std::to_string(di) + "_" + std::to_string(j)));
        auto literal = [&](std::uint32_t var) -> int {
            auto it = std::lower_bound(d.literals.begin(), d.literals.end(),
                                       std::make_pair(var, false));
            if (it != d.literals.end() && it->first == var) return it->second ? 1 : 0;
            return -1;  // free
        };
        for (std::uint32_t j = 1; j <= n; ++j) {
            StateId src = (j == 1) ? start : chain[j - 2];
            int forced = literal(j);
            if (forced != 0) a.add_transition(src, one, chain[j - 1]);
            if (forced != 1) a.add_transition(src, zero, chain[j - 1]);
        }
        a.mark_final(chain[n - 1]);
    }
    return {std::move(a), n};
}

// ---------------------------------------------------------------------------
// OBDD

bool Obdd::evaluate(const std::vector<bool>& assignment) const {
    if (nodes.empty()) return false;
    // Nondeterministic nodes may follow both children; the consistency
    // promise makes "some path hits T1" the right semantics.
    std::vector<std::int64_t> frontier{nodes.front().id};
    std::map<std::int64_t, const Node*> by_id;
    for (const Node& node : nodes) by_id[node.id] = &node;
    std::vector<std::int64_t> next;
    std::size_t rounds = 0;
    const std::size_t round_limit = nodes.size() * (order.size() + 2) + 4;
    while (!frontier.empty()) {
        if (++rounds > round_limit) throw InputError("cycle in OBDD");
        next.clear();
        for (std::int64_t id : frontier) {
            if (id == kTerminal1) return true;
            if (id == kTerminal0) continue;
            const Node* node = by_id.at(id);
            if (node->nondet) {
                next.push_back(node->lo);
                next.push_back(node->hi);
            } else {
                bool value = assignment[node->var - 1];
                next.push_back(value ? node->hi : node->lo);
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        frontier.swap(next);
    }
    return false;
}

namespace {

std::int64_t parse_obdd_child(const std::string& tok, std::size_t lineno) {
    if (tok == "T0") return Obdd::kTerminal0;
    if (tok == "T1") return Obdd::kTerminal1;
    try {
        return std::stoll(tok);
    } catch (...) {
        throw ParseError(lineno, "bad node reference: " + tok);
    }
}

} // namespace

Obdd parse_obdd(std::istream& in) {
    Obdd d;
    bool saw_order = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream iss(line);
        std::string head;
        if (!(iss >> head)) continue;
        if (head == "order:") {
            if (saw_order) throw ParseError(lineno, "duplicate order");
            saw_order = true;
            std::uint32_t var;
            while (iss >> var) d.order.push_back(var);
        } else if (head == "node") {
            if (!saw_order) throw ParseError(lineno, "order must precede nodes");
            Obdd::Node node;
            std::string var_tok, lo_tok, hi_tok;
            if (!(iss >> node.id >> var_tok >> lo_tok >> hi_tok))
                throw ParseError(lineno, "expected `node <id> <var|-> <lo> <hi>`");
            if (var_tok == "-") {
                node.nondet = true;
                d.deterministic = false;
            } else {
                std::uint32_t var = static_cast<std::uint32_t>(std::stoul(var_tok));
                // Variables are named by their index; position in the order
                // is what the automaton construction consumes.
                auto it = std::find(d.order.begin(), d.order.end(), var);
                if (it == d.order.end()) throw ParseError(lineno, "variable not in order");
                node.var = static_cast<std::uint32_t>(it - d.order.begin()) + 1;
            }
            node.lo = parse_obdd_child(lo_tok, lineno);
            node.hi = parse_obdd_child(hi_tok, lineno);
            d.nodes.push_back(node);
        } else {
            throw ParseError(lineno, "unknown directive: " + head);
        }
    }
    if (!saw_order) throw ParseError(lineno, "missing order");
    return d;
}

Obdd parse_obdd_string(const std::string& text) {
    std::istringstream iss(text);
    return parse_obdd(iss);
}

Obdd parse_obdd_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return parse_obdd(in);
}

NfaWithLength obdd_to_nfa(const Obdd& d) {
    const std::uint32_t n = d.variable_count();
    Nfa a;
    SymbolId zero = a.add_symbol("0");
    SymbolId one = a.add_symbol("1");

    std::map<std::int64_t, const Obdd::Node*> by_id;
    for (const auto& node : d.nodes) {
        if (by_id.count(node.id)) throw InputError("duplicate OBDD node id");
        by_id[node.id] = &node;
    }

    // Closure through nondeterministic nodes down to variable-labeled nodes
    // or terminals; checks acyclicity of the nondet part on the way.
    auto nondet_closure = [&](std::int64_t id, auto&& self,
                              std::vector<std::int64_t>& acc, int depth) -> void {
        if (depth > static_cast<int>(d.nodes.size()))
            throw InputError("cycle through nondeterministic OBDD nodes");
        if (id == Obdd::kTerminal0 || id == Obdd::kTerminal1) {
            acc.push_back(id);
            return;
        }
        auto it = by_id.find(id);
        if (it == by_id.end()) throw InputError("undeclared OBDD node referenced");
        const Obdd::Node* node = it->second;
        if (!node->nondet) {
            acc.push_back(id);
            return;
        }
        self(node->lo, self, acc, depth + 1);
        self(node->hi, self, acc, depth + 1);
    };

    // States are (node, position) pairs: about to read variable at
    // `position` (1-based) while sitting at `node`; terminal-1 chains pad
    // the remaining free variables.
    std::map<std::pair<std::int64_t, std::uint32_t>, StateId> states;
    auto state_of = [&](std::int64_t id, std::uint32_t pos) -> StateId {
        auto key = std::make_pair(id, pos);
        auto it = states.find(key);
        if (it != states.end()) return it->second;
        std::string name = (id == Obdd::kTerminal1 ? "T1" : "n" + std::to_string(id)) + "@" +
                           std::to_string(pos);
        StateId q = a.add_state(name);
        states.emplace(key, q);
        return q;
    };

    // Breadth-first materialization of reachable (node, position) states.
    std::vector<std::pair<std::int64_t, std::uint32_t>> work;
    std::vector<std::int64_t> roots;
    if (!d.nodes.empty()) nondet_closure(d.nodes.front().id, nondet_closure, roots, 0);
    for (std::int64_t id : roots) {
        if (id == Obdd::kTerminal0) continue;
        StateId q = state_of(id, 1);
        a.mark_initial(q);
        work.emplace_back(id, 1);
    }
    std::map<std::pair<std::int64_t, std::uint32_t>, bool> expanded;
    while (!work.empty()) {
        auto [id, pos] = work.back();
        work.pop_back();
        if (expanded[{id, pos}]) continue;
        expanded[{id, pos}] = true;
        StateId src = state_of(id, pos);
        if (id == Obdd::kTerminal1) {
            if (pos == n + 1) {
                a.mark_final(src);
            } else {
                // Remaining variables are free bits.
                StateId nxt = state_of(id, pos + 1);
                a.add_transition(src, zero, nxt);
                a.add_transition(src, one, nxt);
                work.emplace_back(id, pos + 1);
            }
            continue;
        }
        const Obdd::Node* node = by_id.at(id);
        // A variable node arriving at or past its own position has been
        // reached out of order (pos == n+1 is the degenerate case).
        if (node->var < pos) throw InputError("variable-order violation in OBDD");
        if (node->var > pos) {
            // Skipped variable: free bit.
            StateId nxt = state_of(id, pos + 1);
            a.add_transition(src, zero, nxt);
            a.add_transition(src, one, nxt);
            work.emplace_back(id, pos + 1);
            continue;
        }
        for (int bit = 0; bit <= 1; ++bit) {
            std::vector<std::int64_t> targets;
            nondet_closure(bit ? node->hi : node->lo, nondet_closure, targets, 0);
            for (std::int64_t t : targets) {
                if (t == Obdd::kTerminal0) continue;
                StateId nxt = state_of(t, pos + 1);
                a.add_transition(src, bit ? one : zero, nxt);
                work.emplace_back(t, pos + 1);
            }
        }
    }
    // Degenerate case: the root chain never materialized any state (e.g.
    // constant-false); keep an automaton with one dead state.
    if (a.state_count() == 0) {
        StateId q = a.add_state("dead");
        (void)q;
    }
    return {std::move(a), n};
}

// ---------------------------------------------------------------------------
// RPQ

std::uint32_t LabeledGraph::find_vertex(const std::string& name) const {
    for (std::uint32_t i = 0; i < vertices.size(); ++i)
        if (vertices[i] == name) return i;
    return static_cast<std::uint32_t>(vertices.size());
}

LabeledGraph parse_graph(std::istream& in) {
    LabeledGraph g;
    auto vertex = [&](const std::string& name) {
        std::uint32_t v = g.find_vertex(name);
        if (v == g.vertices.size()) g.vertices.push_back(name);
        return v;
    };
    auto label = [&](const std::string& name) {
        for (std::uint32_t i = 0; i < g.labels.size(); ++i)
            if (g.labels[i] == name) return i;
        g.labels.push_back(name);
        return static_cast<std::uint32_t>(g.labels.size() - 1);
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream iss(line);
        std::string head;
        if (!(iss >> head)) continue;
        if (head == "vertex") {
            std::string name;
            if (!(iss >> name)) throw ParseError(lineno, "expected `vertex <name>`");
            vertex(name);
        } else if (head == "edge") {
            std::string src, lab, dst;
            if (!(iss >> src >> lab >> dst))
                throw ParseError(lineno, "expected `edge <src> <label> <dst>`");
            g.edges.push_back({vertex(src), label(lab), vertex(dst)});
        } else {
            throw ParseError(lineno, "unknown directive: " + head);
        }
    }
    return g;
}

LabeledGraph parse_graph_string(const std::string& text) {
    std::istringstream iss(text);
    return parse_graph(iss);
}

LabeledGraph parse_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    return parse_graph(in);
}

NfaWithLength rpq_to_nfa(const LabeledGraph& g, const Nfa& r, const std::string& u,
                         const std::string& v, std::size_t n) {
    if (r.has_epsilon()) throw ContractError("rpq_to_nfa requires an epsilon-free query");
    std::uint32_t src = g.find_vertex(u);
    std::uint32_t dst = g.find_vertex(v);
    if (src == g.vertices.size()) throw InputError("unknown vertex: " + u);
    if (dst == g.vertices.size()) throw InputError("unknown vertex: " + v);

    Nfa a;
    // Alphabet {label@target}: a word spells the traversed edges, so paths
    // are recoverable from words and counting words counts paths.
    std::vector<std::vector<SymbolId>> symbol_of(g.labels.size(),
                                                 std::vector<SymbolId>(g.vertices.size()));
    std::vector<std::vector<bool>> symbol_used(g.labels.size(),
                                               std::vector<bool>(g.vertices.size(), false));
    for (const auto& e : g.edges) {
        if (!symbol_used[e.label][e.dst]) {
            symbol_used[e.label][e.dst] = true;
            symbol_of[e.label][e.dst] =
                a.add_symbol(g.labels[e.label] + "@" + g.vertices[e.dst]);
        }
    }
    auto product_state = [&](std::uint32_t x, StateId q) {
        return static_cast<StateId>(x * r.state_count() + q);
    };
    for (std::uint32_t x = 0; x < g.vertices.size(); ++x)
        for (StateId q = 0; q < r.state_count(); ++q)
            a.add_state(g.vertices[x] + "," + r.state_name(q));
    for (const auto& e : g.edges) {
        SymbolId sym = symbol_of[e.label][e.dst];
        SymbolId rl = r.find_symbol(g.labels[e.label]);
        if (rl == r.alphabet_size()) continue;  // label outside the query alphabet
        for (StateId q = 0; q < r.state_count(); ++q)
            for (StateId q2 : r.successors(q, rl))
                a.add_transition(product_state(e.src, q), sym, product_state(e.dst, q2));
    }
    for (StateId q : r.initial()) a.mark_initial(product_state(src, q));
    for (StateId q : r.final()) a.mark_final(product_state(dst, q));
    return {std::move(a), n};
}

// ---------------------------------------------------------------------------
// Binarization

BinarizedNfa binarize(const Nfa& a) {
    if (a.has_epsilon()) throw ContractError("binarize requires an epsilon-free automaton");
    if (a.alphabet_size() == 0) throw ContractError("binarize requires a nonempty alphabet");
    std::size_t width = 1;
    while ((1ULL << width) < a.alphabet_size()) ++width;

    BinarizedNfa out;
    out.width = width;
    out.source_alphabet = a.alphabet();
    Nfa& b = out.nfa;
    SymbolId zero = b.add_symbol("0");
    SymbolId one = b.add_symbol("1");

    // Per-state prefix tree over codeword bits; a node exists only when some
    // symbol's codeword passes through it, so unused codewords lead nowhere.
    for (StateId q = 0; q < a.state_count(); ++q) b.add_state(a.state_name(q));

    for (StateId q = 0; q < a.state_count(); ++q) {
        std::map<std::string, StateId> tree;  // proper prefixes -> state
        auto tree_state = [&](const std::string& prefix) {
            auto it = tree.find(prefix);
            if (it != tree.end()) return it->second;
            StateId node = b.add_state(a.state_name(q) + "~" + prefix);
            tree.emplace(prefix, node);
            return node;
        };
        for (SymbolId s = 0; s < a.alphabet_size(); ++s) {
            if (a.successors(q, s).empty()) continue;
            // Big-endian codeword = alphabet index.
            std::string code(width, '0');
            for (std::size_t i = 0; i < width; ++i)
                if (s & (1ULL << (width - 1 - i))) code[i] = '1';
            StateId current = q;
            for (std::size_t i = 0; i + 1 < width; ++i) {
                StateId nxt = tree_state(code.substr(0, i + 1));
                b.add_transition(current, code[i] == '1' ? one : zero, nxt);
                current = nxt;
            }
            for (StateId p : a.successors(q, s))
                b.add_transition(current, code[width - 1] == '1' ? one : zero, p);
        }
    }
    for (StateId q : a.initial()) b.mark_initial(q);
    for (StateId q : a.final()) b.mark_final(q);
    return out;
}

Word BinarizedNfa::decode(const Word& bits) const {
    if (bits.size() % width != 0) throw InputError("binary word length not a multiple of width");
    Word out;
    out.reserve(bits.size() / width);
    for (std::size_t i = 0; i < bits.size(); i += width) {
        std::uint64_t index = 0;
        for (std::size_t j = 0; j < width; ++j) index = (index << 1) | bits[i + j];
        if (index >= source_alphabet.size()) throw InputError("unused codeword in binary word");
        out.push_back(static_cast<SymbolId>(index));
    }
    return out;
}

Word BinarizedNfa::encode(const Word& w) const {
    Word out;
    out.reserve(w.size() * width);
    for (SymbolId s : w) {
        if (s >= source_alphabet.size()) throw InputError("symbol not in source alphabet");
        for (std::size_t j = 0; j < width; ++j)
            out.push_back((s >> (width - 1 - j)) & 1);
    }
    return out;
}

} // namespace nfatk
