#ifndef NFATK_REDUCE_HPP
#define NFATK_REDUCE_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nfatk/nfa.hpp"

namespace nfatk {

/// A DNF formula: disjuncts over variables 1..variable_count. Disjuncts
/// containing a variable with both polarities are unsatisfiable; they are
/// kept (the input permits them) but flagged and contribute no witnesses.
struct DnfFormula {
    struct Disjunct {
        /// Sorted by variable, one entry per variable; only meaningful when
        /// satisfiable.
        std::vector<std::pair<std::uint32_t, bool>> literals;
        bool satisfiable = true;
    };
    std::uint32_t variable_count = 0;
    std::vector<Disjunct> disjuncts;

    bool satisfied_by(const std::vector<bool>& assignment) const;
};

/// DIMACS-like input: header `p dnf <vars> <disjuncts>`, one disjunct per
/// line of signed variable indices terminated by 0; `c` lines are comments.
DnfFormula parse_dnf(std::istream& in);
DnfFormula parse_dnf_string(const std::string& text);
DnfFormula parse_dnf_file(const std::string& path);

struct NfaWithLength {
    Nfa nfa;
    std::size_t length;
};

/// SAT-DNF as a length-n NFA problem: L_n(result) is the set of satisfying
/// assignments encoded as n-bit strings (bit j = value of variable j+1).
/// One state chain per satisfiable disjunct behind a shared fresh initial
/// state; overlapping disjuncts make the result ambiguous by design.
NfaWithLength dnf_to_nfa(const DnfFormula& f);

/// Ordered BDD, possibly nondeterministic (nOBDD). Nodes are either
/// variable-labeled with lo/hi children, nondeterministic (no variable; an
/// assignment may follow either child), or the terminals T0/T1. Variables
/// along every root-terminal path strictly increase in the given order.
struct Obdd {
    static constexpr std::int64_t kTerminal0 = -1;
    static constexpr std::int64_t kTerminal1 = -2;

    struct Node {
        std::int64_t id;
        bool nondet = false;      // no variable; children unlabeled
        std::uint32_t var = 0;    // position in the order, 1-based; 0 if nondet
        std::int64_t lo = kTerminal0;
        std::int64_t hi = kTerminal0;
    };
    std::vector<std::uint32_t> order;  // variable indices, outermost first
    std::vector<Node> nodes;           // first node is the root
    bool deterministic = true;

    std::uint32_t variable_count() const { return static_cast<std::uint32_t>(order.size()); }
    bool evaluate(const std::vector<bool>& assignment) const;
};

/// Line format: `order: v1 v2 ...` then `node <id> <var|-> <lo> <hi>` with
/// children node ids or T0/T1; the first node is the root.
Obdd parse_obdd(std::istream& in);
Obdd parse_obdd_string(const std::string& text);
Obdd parse_obdd_file(const std::string& path);

/// EVAL-OBDD / EVAL-nOBDD as a length-n NFA problem: L_n = the accepted
/// assignments in variable order, with skipped variables expanded into
/// explicit free-bit states. Deterministic OBDD inputs yield unambiguous
/// automata. Order violations raise InputError.
NfaWithLength obdd_to_nfa(const Obdd& d);

/// Edge-labeled graph for regular path queries.
struct LabeledGraph {
    std::vector<std::string> vertices;
    std::vector<std::string> labels;
    struct Edge {
        std::uint32_t src;
        std::uint32_t label;
        std::uint32_t dst;
    };
    std::vector<Edge> edges;

    std::uint32_t find_vertex(const std::string& name) const;
};

/// Lines `vertex <name>` (optional; vertices auto-declare) and
/// `edge <src> <label> <dst>`.
LabeledGraph parse_graph(std::istream& in);
LabeledGraph parse_graph_string(const std::string& text);
LabeledGraph parse_graph_file(const std::string& path);

/// EVAL-RPQ as a length-n NFA problem: the product of graph and query over
/// the alphabet {label@target}, so every accepted word spells out one u->v
/// path of exactly n edges satisfying the query, and counting words counts
/// paths. The query r must be ε-free.
NfaWithLength rpq_to_nfa(const LabeledGraph& g, const Nfa& r, const std::string& u,
                         const std::string& v, std::size_t n);

/// Fixed-width binary encoding of a general-alphabet NFA: each symbol
/// becomes its alphabet index in width = max(1, ceil(log2 |Sigma|)) bits,
/// decoded through per-state prefix trees; unused codewords lead nowhere.
/// |L_{n*width}(binary)| = |L_n(a)| and decode() inverts sampling.
struct BinarizedNfa {
    Nfa nfa;
    std::size_t width = 1;
    std::vector<std::string> source_alphabet;

    /// Maps a length-(n*width) binary word back to the source alphabet.
    Word decode(const Word& bits) const;
    /// Source word to its binary encoding.
    Word encode(const Word& w) const;
};

BinarizedNfa binarize(const Nfa& a);

} // namespace nfatk

#endif
