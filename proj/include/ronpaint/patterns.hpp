#pragma once

// Substructure patterns in the PubChem fingerprint notation (a SMARTS subset)
// and a backtracking matcher over Molecule graphs.
//
//   C, N, O ...     aliphatic element      c, n, o ...  aromatic element
//   a               any aromatic atom      A            any aliphatic atom
//   [a;!#6]         ';'-joined conjunction of optionally '!'-negated primitives,
//                   '#n' matches atomic number n regardless of aromaticity
//   - = # :         single, double, triple, aromatic bond
//   (no symbol)     single or aromatic
//
// Branches and ring-closure digits follow SMILES.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ronpaint/digest.hpp"
#include "ronpaint/error.hpp"
#include "ronpaint/molgraph.hpp"

namespace ronpaint {

enum class PrimitiveKind : std::uint8_t { element, aromatic_any, aliphatic_any, aromatic_element, aliphatic_element };

struct AtomTerm {
    bool negated = false;
    PrimitiveKind kind = PrimitiveKind::element;
    int atomic_number = 0;

    bool primitive_holds(const Atom& atom) const noexcept {
        switch (kind) {
            case PrimitiveKind::element: return atom.atomic_number == atomic_number;
            case PrimitiveKind::aromatic_any: return atom.aromatic;
            case PrimitiveKind::aliphatic_any: return !atom.aromatic;
            case PrimitiveKind::aromatic_element: return atom.aromatic && atom.atomic_number == atomic_number;
            case PrimitiveKind::aliphatic_element: return !atom.aromatic && atom.atomic_number == atomic_number;
        }
        return false;
    }
    bool holds(const Atom& atom) const noexcept { return primitive_holds(atom) != negated; }

    friend bool operator==(const AtomTerm&, const AtomTerm&) = default;
};

struct AtomPredicate {
    std::vector<AtomTerm> terms;

    bool matches(const Atom& atom) const noexcept {
        return std::all_of(terms.begin(), terms.end(), [&](const AtomTerm& t) { return t.holds(atom); });
    }
    friend bool operator==(const AtomPredicate&, const AtomPredicate&) = default;
};

enum class BondPredicate : std::uint8_t { single, double_, triple, aromatic, single_or_aromatic };

inline bool bond_matches(BondPredicate pred, BondOrder order) noexcept {
    switch (pred) {
        case BondPredicate::single: return order == BondOrder::single;
        case BondPredicate::double_: return order == BondOrder::double_;
        case BondPredicate::triple: return order == BondOrder::triple;
        case BondPredicate::aromatic: return order == BondOrder::aromatic;
        case BondPredicate::single_or_aromatic: return order == BondOrder::single || order == BondOrder::aromatic;
    }
    return false;
}

struct PatternBond {
    std::size_t begin = 0;
    std::size_t end = 0;
    BondPredicate kind = BondPredicate::single_or_aromatic;

    friend bool operator==(const PatternBond&, const PatternBond&) = default;
};

struct Pattern {
    std::string id;
    std::string source_text;
    std::vector<AtomPredicate> atoms;
    std::vector<PatternBond> bonds;

    std::size_t atom_count() const noexcept { return atoms.size(); }
};

namespace detail {

class PatternParser {
public:
    PatternParser(std::string id, std::string_view text) : id_(std::move(id)), text_(text) {}

    Pattern parse() {
        if (text_.empty()) fail("empty pattern", 0);
        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            switch (c) {
                case '-': set_bond(BondPredicate::single); break;
                case '=': set_bond(BondPredicate::double_); break;
                case '#': set_bond(BondPredicate::triple); break;
                case ':': set_bond(BondPredicate::aromatic); break;
                case '(':
                    if (!prev_) fail("branch opened before any atom", pos_);
                    if (pending_) fail("bond symbol before '('", pos_);
                    branches_.push_back({*prev_, pos_, atoms_.size()});
                    break;
                case ')':
                    if (branches_.empty()) fail("unbalanced ')'", pos_);
                    if (pending_) fail("bond symbol is not followed by an atom", pending_offset_);
                    if (atoms_.size() == branches_.back().atoms_before) fail("empty branch", pos_);
                    prev_ = branches_.back().atom;
                    branches_.pop_back();
                    break;
                case '[': parse_bracket(); continue;
                case ']': fail("unbalanced ']'", pos_);
                default:
                    if (c >= '1' && c <= '9') {
                        ring_digit(c);
                    } else {
                        parse_bare();
                        continue;
                    }
            }
            ++pos_;
        }
        if (pending_) fail("bond symbol is not followed by an atom", pending_offset_);
        if (!branches_.empty()) fail("unbalanced '('", branches_.back().offset);
        for (std::size_t d = 0; d < rings_.size(); ++d)
            if (rings_[d]) fail("ring-closure digit " + std::to_string(d) + " is never closed", rings_[d]->offset);
        return Pattern{id_, std::string(text_), std::move(atoms_), std::move(bonds_)};
    }

private:
    struct OpenRing {
        std::size_t atom;
        std::optional<BondPredicate> kind;
        std::size_t offset;
    };
    struct OpenBranch {
        std::size_t atom;
        std::size_t offset;
        std::size_t atoms_before;
    };

    [[noreturn]] void fail(const std::string& what, std::size_t offset) const {
        throw ParseError("pattern '" + id_ + "': " + what, std::string(text_), offset);
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void set_bond(BondPredicate kind) {
        if (!prev_) fail("bond symbol before any atom", pos_);
        if (pending_) fail("two consecutive bond symbols", pos_);
        pending_ = kind;
        pending_offset_ = pos_;
    }

    void ring_digit(char digit) {
        if (!prev_) fail("ring-closure digit before any atom", pos_);
        auto& slot = rings_[static_cast<std::size_t>(digit - '0')];
        if (!slot) {
            slot = OpenRing{*prev_, pending_, pos_};
        } else {
            std::optional<BondPredicate> kind = slot->kind;
            if (pending_) {
                if (kind && *kind != *pending_) fail("conflicting ring-closure bond symbols", pos_);
                kind = pending_;
            }
            add_bond(slot->atom, *prev_, kind, pos_);
            slot.reset();
        }
        pending_.reset();
    }

    // Reads an element symbol starting at pos_. Uppercase means aliphatic,
    // lowercase aromatic. Returns nullopt without consuming on no match.
    std::optional<AtomTerm> element_term() {
        const char c = peek();
        if (c >= 'A' && c <= 'Z') {
            if (pos_ + 1 < text_.size()) {
                const std::string two{c, text_[pos_ + 1]};
                if (two == "Cl" || two == "Br") {
                    pos_ += 2;
                    return AtomTerm{false, PrimitiveKind::aliphatic_element, *detail::element_number(two)};
                }
            }
            if (c != 'H') {
                if (auto z = detail::element_number(std::string(1, c))) {
                    ++pos_;
                    return AtomTerm{false, PrimitiveKind::aliphatic_element, *z};
                }
            }
        } else if (c >= 'a' && c <= 'z') {
            auto z = detail::element_number(std::string(1, static_cast<char>(c - 'a' + 'A')));
            if (z && detail::can_be_aromatic(*z)) {
                ++pos_;
                return AtomTerm{false, PrimitiveKind::aromatic_element, *z};
            }
        }
        return std::nullopt;
    }

    void parse_bare() {
        const std::size_t start = pos_;
        const char c = peek();
        AtomPredicate pred;
        if (c == 'a') {
            ++pos_;
            pred.terms.push_back({false, PrimitiveKind::aromatic_any, 0});
        } else if (c == 'A') {
            ++pos_;
            pred.terms.push_back({false, PrimitiveKind::aliphatic_any, 0});
        } else if (auto term = element_term()) {
            pred.terms.push_back(*term);
        } else {
            fail(std::string("unknown atom '") + c + "'", start);
        }
        add_atom(std::move(pred), start);
    }

    void parse_bracket() {
        const std::size_t open = pos_;
        ++pos_;
        AtomPredicate pred;
        while (true) {
            if (pos_ >= text_.size()) fail("unterminated '['", open);
            AtomTerm term;
            if (peek() == '!') {
                term.negated = true;
                ++pos_;
            }
            const std::size_t prim_start = pos_;
            const char c = peek();
            if (c == '#') {
                ++pos_;
                std::size_t digits = 0;
                int z = 0;
                while (std::isdigit(static_cast<unsigned char>(peek()))) {
                    z = z * 10 + (peek() - '0');
                    ++pos_;
                    if (++digits > 3) fail("atomic number too long", prim_start);
                }
                if (digits == 0 || z == 0) fail("'#' must be followed by a positive atomic number", prim_start);
                term.kind = PrimitiveKind::element;
                term.atomic_number = z;
            } else if (c == 'a') {
                ++pos_;
                term.kind = PrimitiveKind::aromatic_any;
            } else if (c == 'A') {
                ++pos_;
                term.kind = PrimitiveKind::aliphatic_any;
            } else if (auto el = element_term()) {
                term.kind = el->kind;
                term.atomic_number = el->atomic_number;
            } else if (c == ',') {
                fail("OR-lists (',') are not supported", pos_);
            } else if (c == ']' || c == ';') {
                fail("empty primitive", pos_);
            } else {
                fail(std::string("unknown primitive '") + (c ? std::string(1, c) : std::string("<end>")) + "'", pos_);
            }
            pred.terms.push_back(term);
            if (peek() == ';') {
                ++pos_;
                continue;
            }
            if (peek() == ']') {
                ++pos_;
                break;
            }
            if (pos_ >= text_.size()) fail("unterminated '['", open);
            if (peek() == ',') fail("OR-lists (',') are not supported", pos_);
            fail(std::string("unknown primitive '") + peek() + "'", pos_);
        }
        add_atom(std::move(pred), open);
    }

    void add_atom(AtomPredicate pred, std::size_t offset) {
        const std::size_t idx = atoms_.size();
        atoms_.push_back(std::move(pred));
        if (prev_) add_bond(*prev_, idx, pending_, pending_ ? pending_offset_ : offset);
        pending_.reset();
        prev_ = idx;
    }

    void add_bond(std::size_t a, std::size_t b, std::optional<BondPredicate> kind, std::size_t offset) {
        if (a == b) fail("ring closure bonds an atom to itself", offset);
        for (const auto& bond : bonds_)
            if ((bond.begin == a && bond.end == b) || (bond.begin == b && bond.end == a))
                fail("duplicate bond between the same two pattern atoms", offset);
        bonds_.push_back({a, b, kind.value_or(BondPredicate::single_or_aromatic)});
    }

    std::string id_;
    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<AtomPredicate> atoms_;
    std::vector<PatternBond> bonds_;
    std::optional<std::size_t> prev_;
    std::optional<BondPredicate> pending_;
    std::size_t pending_offset_ = 0;
    std::vector<OpenBranch> branches_;
    std::array<std::optional<OpenRing>, 10> rings_{};
};

}  // namespace detail

inline Pattern parse_pattern(std::string id, std::string_view text) {
    return detail::PatternParser(std::move(id), text).parse();
}

/// All injective embeddings of one pattern into one molecule.
struct MatchSet {
    std::string pattern_id;
    std::vector<std::vector<std::size_t>> embeddings;  // indexed by pattern atom, sorted lexicographically
    std::set<std::size_t> matched_atoms;
    std::set<std::size_t> matched_bonds;

    bool empty() const noexcept { return embeddings.empty(); }
    friend bool operator==(const MatchSet&, const MatchSet&) = default;
};

namespace detail {

// Visit order for the pattern atoms: depth-first from atom 0 with ascending
// neighbor order, so every atom after the first has an already placed anchor.
struct MatchPlan {
    struct Step {
        std::size_t pattern_atom;
        std::optional<std::size_t> anchor;  // earlier pattern atom bonded to this one
        BondPredicate anchor_bond = BondPredicate::single_or_aromatic;
        std::vector<std::pair<std::size_t, BondPredicate>> closures;  // other earlier neighbors
    };
    std::vector<Step> steps;
};

inline MatchPlan make_plan(const Pattern& p) {
    const std::size_t n = p.atoms.size();
    std::vector<std::vector<std::pair<std::size_t, BondPredicate>>> adj(n);
    for (const auto& b : p.bonds) {
        adj[b.begin].push_back({b.end, b.kind});
        adj[b.end].push_back({b.begin, b.kind});
    }
    for (auto& a : adj) std::sort(a.begin(), a.end(), [](auto& x, auto& y) { return x.first < y.first; });

    MatchPlan plan;
    std::vector<bool> placed(n, false);
    std::vector<std::pair<std::size_t, std::optional<std::size_t>>> stack{{0, std::nullopt}};
    while (!stack.empty()) {
        auto [atom, parent] = stack.back();
        stack.pop_back();
        if (placed[atom]) continue;
        placed[atom] = true;
        MatchPlan::Step step{atom, parent, BondPredicate::single_or_aromatic, {}};
        for (const auto& [nbr, kind] : adj[atom]) {
            if (!placed[nbr]) continue;
            if (parent && nbr == *parent)
                step.anchor_bond = kind;
            else
                step.closures.push_back({nbr, kind});
        }
        plan.steps.push_back(std::move(step));
        for (auto it = adj[atom].rbegin(); it != adj[atom].rend(); ++it)
            if (!placed[it->first]) stack.push_back({it->first, atom});
    }
    if (plan.steps.size() != n) throw InputError("pattern '" + p.id + "' is not connected");
    return plan;
}

template <class OnEmbedding>
bool search(const Pattern& p, const Molecule& mol, const MatchPlan& plan, std::size_t depth,
            std::vector<std::size_t>& image, std::vector<bool>& used, OnEmbedding& on_embedding) {
    constexpr std::size_t kUnset = static_cast<std::size_t>(-1);
    if (depth == plan.steps.size()) return on_embedding(image);

    const auto& step = plan.steps[depth];
    auto try_candidate = [&](std::size_t cand) -> bool {
        if (used[cand] || !p.atoms[step.pattern_atom].matches(mol.atom(cand))) return false;
        for (const auto& [earlier, kind] : step.closures) {
            auto bond = mol.bond_between(image[earlier], cand);
            if (!bond || !bond_matches(kind, mol.bond(*bond).order)) return false;
        }
        image[step.pattern_atom] = cand;
        used[cand] = true;
        const bool stop = search(p, mol, plan, depth + 1, image, used, on_embedding);
        used[cand] = false;
        image[step.pattern_atom] = kUnset;
        return stop;
    };

    if (!step.anchor) {
        for (std::size_t cand = 0; cand < mol.atom_count(); ++cand)
            if (try_candidate(cand)) return true;
    } else {
        for (const auto& nb : mol.neighbors(image[*step.anchor])) {
            if (!bond_matches(step.anchor_bond, mol.bond(nb.bond).order)) continue;
            if (try_candidate(nb.atom)) return true;
        }
    }
    return false;
}

}  // namespace detail

/// Enumerates every injective mapping of pattern atoms onto molecule atoms
/// that satisfies all atom and bond predicates. Automorphic embeddings are
/// kept as distinct tuples.
inline MatchSet match_pattern(const Pattern& p, const Molecule& mol) {
    MatchSet out;
    out.pattern_id = p.id;
    if (p.atoms.empty() || p.atoms.size() > mol.atom_count()) return out;

    const auto plan = detail::make_plan(p);
    std::vector<std::size_t> image(p.atoms.size(), static_cast<std::size_t>(-1));
    std::vector<bool> used(mol.atom_count(), false);
    auto collect = [&](const std::vector<std::size_t>& emb) {
        out.embeddings.push_back(emb);
        return false;
    };
    detail::search(p, mol, plan, 0, image, used, collect);
    std::sort(out.embeddings.begin(), out.embeddings.end());

    for (const auto& emb : out.embeddings) {
        out.matched_atoms.insert(emb.begin(), emb.end());
        for (const auto& b : p.bonds) {
            auto bond = mol.bond_between(emb[b.begin], emb[b.end]);
            if (!bond) throw InvariantError("embedding maps a pattern bond onto a non-bond");
            out.matched_bonds.insert(*bond);
        }
    }
    return out;
}

/// True iff the pattern has at least one embedding; stops at the first one.
inline bool contains_pattern(const Pattern& p, const Molecule& mol) {
    if (p.atoms.empty() || p.atoms.size() > mol.atom_count()) return false;
    const auto plan = detail::make_plan(p);
    std::vector<std::size_t> image(p.atoms.size(), static_cast<std::size_t>(-1));
    std::vector<bool> used(mol.atom_count(), false);
    auto stop_at_first = [](const std::vector<std::size_t>&) { return true; };
    return detail::search(p, mol, plan, 0, image, used, stop_at_first);
}

/// Ordered pattern list with a content-derived identity. Fingerprints and
/// models carry the identity so that mismatched pattern files are caught.
struct PatternSet {
    std::string id;
    std::vector<Pattern> patterns;

    std::size_t size() const noexcept { return patterns.size(); }
    std::optional<std::size_t> index_of(std::string_view pattern_id) const {
        for (std::size_t i = 0; i < patterns.size(); ++i)
            if (patterns[i].id == pattern_id) return i;
        return std::nullopt;
    }
};

/// Builds a pattern set from (id, pattern text) pairs, in bit order.
inline PatternSet make_pattern_set(const std::vector<std::pair<std::string, std::string>>& entries) {
    if (entries.empty()) throw InputError("pattern set is empty");
    PatternSet set;
    std::string canonical;
    std::set<std::string> seen;
    for (const auto& [id, text] : entries) {
        if (id.empty()) throw InputError("pattern with empty id");
        if (!seen.insert(id).second) throw InputError("duplicate pattern id '" + id + "'");
        set.patterns.push_back(parse_pattern(id, text));
        canonical += id + '\t' + text + '\n';
    }
    set.id = "fnv1a64:" + hex64(fnv1a64(canonical));
    return set;
}

/// Parses pattern-set text: one `id<TAB>pattern` per line, '#' comments.
inline PatternSet parse_pattern_set(std::string_view content) {
    std::vector<std::pair<std::string, std::string>> entries;
    std::istringstream in{std::string(content)};
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw InputError("pattern file line " + std::to_string(lineno) + ": expected 'id<TAB>pattern'");
        std::string text = line.substr(tab + 1);
        while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.pop_back();
        entries.emplace_back(line.substr(0, tab), text);
    }
    return make_pattern_set(entries);
}

inline PatternSet load_pattern_set(const std::string& path) { return parse_pattern_set(read_file(path)); }

/// Binary presence vector over a pattern set. Doubles as the interpretable
/// representation: features are already binary, so no separate mapping exists.
struct FingerprintVector {
    std::vector<std::uint8_t> bits;
    std::string pattern_set_id;

    std::size_t size() const noexcept { return bits.size(); }
    bool test(std::size_t i) const { return bits.at(i) != 0; }
    std::size_t count() const noexcept {
        return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
    }
    std::vector<std::size_t> active() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) out.push_back(i);
        return out;
    }
    friend bool operator==(const FingerprintVector&, const FingerprintVector&) = default;
};

inline FingerprintVector compute_fingerprint(const Molecule& mol, const PatternSet& patterns) {
    if (patterns.patterns.empty()) throw InputError("pattern set is empty");
    FingerprintVector fp;
    fp.pattern_set_id = patterns.id;
    fp.bits.reserve(patterns.size());
    for (const auto& p : patterns.patterns) fp.bits.push_back(contains_pattern(p, mol) ? 1 : 0);
    return fp;
}

/// Match sets for every pattern, in pattern-set order.
inline std::vector<MatchSet> match_all(const Molecule& mol, const PatternSet& patterns) {
    std::vector<MatchSet> out;
    out.reserve(patterns.size());
    for (const auto& p : patterns.patterns) out.push_back(match_pattern(p, mol));
    return out;
}

}  // namespace ronpaint
