#pragma once

// Molecular graphs parsed from a SMILES subset.
//
// Supported: organic-subset atoms (B C N O P S F Cl Br I, aromatic b c n o p s),
// bracket atoms with element, aromatic flag, H count and charge, bond symbols
// - = # :, branches and ring-closure digits 1-9. Stereo markers, isotopes,
// wildcards, atom classes and disconnected ('.') input are rejected rather than
// ignored. Hydrogens stay implicit; aromaticity is read from lowercase symbols
// only, never perceived.

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ronpaint/error.hpp"

namespace ronpaint {

enum class BondOrder : std::uint8_t { single, double_, triple, aromatic };

struct Atom {
    std::size_t index = 0;
    int atomic_number = 6;
    bool aromatic = false;
    std::optional<int> explicit_h_count;
    int formal_charge = 0;

    friend bool operator==(const Atom&, const Atom&) = default;
};

struct Bond {
    std::size_t begin = 0;
    std::size_t end = 0;
    BondOrder order = BondOrder::single;

    std::size_t other(std::size_t atom) const noexcept { return atom == begin ? end : begin; }
    friend bool operator==(const Bond&, const Bond&) = default;
};

struct Neighbor {
    std::size_t atom;
    std::size_t bond;
};

namespace detail {

struct ElementInfo {
    std::string_view symbol;
    int atomic_number;
};

inline constexpr std::array<ElementInfo, 11> kElements{{
    {"H", 1}, {"B", 5}, {"C", 6}, {"N", 7}, {"O", 8}, {"F", 9},
    {"P", 15}, {"S", 16}, {"Cl", 17}, {"Br", 35}, {"I", 53},
}};

inline std::optional<int> element_number(std::string_view symbol) {
    for (const auto& e : kElements)
        if (e.symbol == symbol) return e.atomic_number;
    return std::nullopt;
}

inline bool can_be_aromatic(int z) { return z == 5 || z == 6 || z == 7 || z == 8 || z == 15 || z == 16; }

}  // namespace detail

inline bool is_supported_element(int atomic_number) {
    return std::any_of(detail::kElements.begin(), detail::kElements.end(),
                       [&](const auto& e) { return e.atomic_number == atomic_number; });
}

inline std::string element_symbol(int atomic_number) {
    for (const auto& e : detail::kElements)
        if (e.atomic_number == atomic_number) return std::string(e.symbol);
    return "#" + std::to_string(atomic_number);
}

/// Immutable heavy-atom graph. Atom order is the left-to-right order of atom
/// tokens in the source SMILES; neighbor lists are sorted by atom index.
class Molecule {
public:
    Molecule() = default;

    /// Builds a molecule from explicit parts and validates every graph
    /// invariant. Throws InputError on violation.
    Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source_text = {})
        : atoms_(std::move(atoms)), bonds_(std::move(bonds)), source_text_(std::move(source_text)) {
        validate_and_index();
    }

    std::span<const Atom> atoms() const noexcept { return atoms_; }
    std::span<const Bond> bonds() const noexcept { return bonds_; }
    const Atom& atom(std::size_t i) const { return atoms_.at(i); }
    const Bond& bond(std::size_t i) const { return bonds_.at(i); }
    std::size_t atom_count() const noexcept { return atoms_.size(); }
    std::size_t bond_count() const noexcept { return bonds_.size(); }
    const std::string& source_text() const noexcept { return source_text_; }

    std::span<const Neighbor> neighbors(std::size_t atom) const { return adjacency_.at(atom); }

    std::optional<std::size_t> bond_between(std::size_t a, std::size_t b) const {
        for (const auto& n : adjacency_.at(a))
            if (n.atom == b) return n.bond;
        return std::nullopt;
    }

    friend bool operator==(const Molecule& a, const Molecule& b) {
        return a.atoms_ == b.atoms_ && a.bonds_ == b.bonds_ && a.source_text_ == b.source_text_;
    }

private:
    void validate_and_index() {
        const std::size_t n = atoms_.size();
        if (n == 0) throw InputError("molecule has no atoms");
        for (std::size_t i = 0; i < n; ++i) {
            if (atoms_[i].index != i) throw InputError("atom index does not match its position");
            if (!is_supported_element(atoms_[i].atomic_number))
                throw InputError("unsupported element with atomic number " +
                                 std::to_string(atoms_[i].atomic_number));
        }
        adjacency_.assign(n, {});
        for (std::size_t b = 0; b < bonds_.size(); ++b) {
            const Bond& bond = bonds_[b];
            if (bond.begin >= n || bond.end >= n) throw InputError("bond endpoint out of range");
            if (bond.begin == bond.end) throw InputError("bond joins an atom to itself");
            if (bond.order == BondOrder::aromatic &&
                !(atoms_[bond.begin].aromatic && atoms_[bond.end].aromatic))
                throw InputError("aromatic bond between non-aromatic atoms");
            for (const auto& nb : adjacency_[bond.begin])
                if (nb.atom == bond.end) throw InputError("duplicate bond between an atom pair");
            adjacency_[bond.begin].push_back({bond.end, b});
            adjacency_[bond.end].push_back({bond.begin, b});
        }
        for (auto& list : adjacency_)
            std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) { return x.atom < y.atom; });

        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t reached = 1;
        while (!stack.empty()) {
            const std::size_t a = stack.back();
            stack.pop_back();
            for (const auto& nb : adjacency_[a])
                if (!seen[nb.atom]) {
                    seen[nb.atom] = true;
                    ++reached;
                    stack.push_back(nb.atom);
                }
        }
        if (reached != n) throw InputError("molecule graph is not connected");
    }

    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::string source_text_;
    std::vector<std::vector<Neighbor>> adjacency_;
};

namespace detail {

class SmilesParser {
public:
    explicit SmilesParser(std::string_view text) : text_(text) {}

    Molecule parse() {
        if (text_.empty()) throw ParseError("empty SMILES", std::string(text_), 0);
        for (std::size_t i = 0; i < text_.size(); ++i)
            if (static_cast<unsigned char>(text_[i]) > 127)
                fail("non-ASCII character", i);

        while (pos_ < text_.size()) {
            const char c = text_[pos_];
            switch (c) {
                case '-': set_bond(BondOrder::single); break;
                case '=': set_bond(BondOrder::double_); break;
                case '#': set_bond(BondOrder::triple); break;
                case ':': set_bond(BondOrder::aromatic); break;
                case '(': open_branch(); break;
                case ')': close_branch(); break;
                case '[': parse_bracket_atom(); continue;
                case '/':
                case '\\': fail("stereo bond markers are not supported", pos_);
                case '@': fail("chirality markers are not supported", pos_);
                case '.': fail("multi-fragment SMILES ('.') is not supported", pos_);
                case '*': fail("wildcard atoms are not supported", pos_);
                case '%': fail("two-digit ring closures are not supported", pos_);
                default:
                    if (c >= '0' && c <= '9') {
                        ring_closure(c);
                    } else {
                        parse_organic_atom();
                        continue;
                    }
            }
            ++pos_;
        }

        if (pending_bond_) fail("bond symbol is not followed by an atom", pending_bond_offset_);
        if (!branches_.empty()) fail("unbalanced '('", branches_.back().offset);
        for (std::size_t d = 0; d < rings_.size(); ++d)
            if (rings_[d]) fail("ring-closure digit " + std::to_string(d) + " is never closed", rings_[d]->offset);

        return Molecule(std::move(atoms_), std::move(bonds_), std::string(text_));
    }

private:
    struct OpenRing {
        std::size_t atom;
        std::optional<BondOrder> order;
        std::size_t offset;
    };
    struct OpenBranch {
        std::size_t atom;
        std::size_t offset;
        std::size_t atoms_before;
    };

    [[noreturn]] void fail(const std::string& what, std::size_t offset) const {
        throw ParseError(what, std::string(text_), offset);
    }

    void set_bond(BondOrder order) {
        if (!prev_) fail("bond symbol before any atom", pos_);
        if (pending_bond_) fail("two consecutive bond symbols", pos_);
        pending_bond_ = order;
        pending_bond_offset_ = pos_;
    }

    void open_branch() {
        if (!prev_) fail("branch opened before any atom", pos_);
        if (pending_bond_) fail("bond symbol before '('", pending_bond_offset_);
        branches_.push_back({*prev_, pos_, atoms_.size()});
    }

    void close_branch() {
        if (branches_.empty()) fail("unbalanced ')'", pos_);
        if (pending_bond_) fail("bond symbol is not followed by an atom", pending_bond_offset_);
        if (atoms_.size() == branches_.back().atoms_before) fail("empty branch", pos_);
        prev_ = branches_.back().atom;
        branches_.pop_back();
    }

    void ring_closure(char digit) {
        if (digit == '0') fail("ring-closure digit 0 is not supported", pos_);
        if (!prev_) fail("ring-closure digit before any atom", pos_);
        auto& slot = rings_[static_cast<std::size_t>(digit - '0')];
        if (!slot) {
            slot = OpenRing{*prev_, pending_bond_, pos_};
        } else {
            std::optional<BondOrder> order = slot->order;
            if (pending_bond_) {
                if (order && *order != *pending_bond_) fail("conflicting ring-closure bond orders", pos_);
                order = pending_bond_;
            }
            add_bond(slot->atom, *prev_, order, pos_);
            slot.reset();
        }
        pending_bond_.reset();
    }

    void parse_organic_atom() {
        const std::size_t start = pos_;
        const char c = text_[pos_];
        int z = 0;
        bool aromatic = false;
        if (c == 'C' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'l') {
            z = 17;
            pos_ += 2;
        } else if (c == 'B' && pos_ + 1 < text_.size() && text_[pos_ + 1] == 'r') {
            z = 35;
            pos_ += 2;
        } else {
            switch (c) {
                case 'B': z = 5; break;
                case 'C': z = 6; break;
                case 'N': z = 7; break;
                case 'O': z = 8; break;
                case 'P': z = 15; break;
                case 'S': z = 16; break;
                case 'F': z = 9; break;
                case 'I': z = 53; break;
                case 'b': z = 5; aromatic = true; break;
                case 'c': z = 6; aromatic = true; break;
                case 'n': z = 7; aromatic = true; break;
                case 'o': z = 8; aromatic = true; break;
                case 'p': z = 15; aromatic = true; break;
                case 's': z = 16; aromatic = true; break;
                default: fail(std::string("unsupported token '") + c + "'", pos_);
            }
            ++pos_;
        }
        add_atom(Atom{atoms_.size(), z, aromatic, std::nullopt, 0}, start);
    }

    void parse_bracket_atom() {
        const std::size_t open = pos_;
        ++pos_;
        auto peek = [&]() -> char { return pos_ < text_.size() ? text_[pos_] : '\0'; };
        if (std::isdigit(static_cast<unsigned char>(peek()))) fail("isotopes are not supported", pos_);
        if (peek() == '*') fail("wildcard atoms are not supported", pos_);

        int z = 0;
        bool aromatic = false;
        const char first = peek();
        if (first >= 'A' && first <= 'Z') {
            std::string symbol(1, first);
            ++pos_;
            const char second = peek();
            if (second >= 'a' && second <= 'z' && detail::element_number(symbol + second)) {
                symbol += second;
                ++pos_;
            }
            auto num = detail::element_number(symbol);
            if (!num) fail("unsupported element '" + symbol + "'", pos_ - symbol.size());
            z = *num;
        } else if (first >= 'a' && first <= 'z') {
            auto num = detail::element_number(std::string(1, static_cast<char>(first - 'a' + 'A')));
            if (!num || !detail::can_be_aromatic(*num))
                fail(std::string("unsupported aromatic element '") + first + "'", pos_);
            z = *num;
            aromatic = true;
            ++pos_;
        } else {
            fail("expected element symbol in bracket atom", pos_);
        }

        if (peek() == '@') fail("chirality markers are not supported", pos_);

        std::optional<int> h_count;
        if (peek() == 'H') {
            ++pos_;
            int h = 1;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                h = peek() - '0';
                ++pos_;
            }
            h_count = h;
        }

        int charge = 0;
        if (peek() == '+' || peek() == '-') {
            const char sign_char = peek();
            const int sign = sign_char == '+' ? 1 : -1;
            ++pos_;
            int magnitude = 1;
            if (std::isdigit(static_cast<unsigned char>(peek()))) {
                magnitude = peek() - '0';
                ++pos_;
            } else {
                while (peek() == sign_char) {
                    ++magnitude;
                    ++pos_;
                }
            }
            charge = sign * magnitude;
        }

        if (peek() == ':') fail("atom classes are not supported", pos_);
        if (peek() != ']') {
            if (pos_ >= text_.size()) fail("unterminated bracket atom", open);
            fail(std::string("unexpected character '") + peek() + "' in bracket atom", pos_);
        }
        ++pos_;
        add_atom(Atom{atoms_.size(), z, aromatic, h_count, charge}, open);
    }

    void add_atom(Atom atom, std::size_t offset) {
        const std::size_t idx = atoms_.size();
        atoms_.push_back(atom);
        if (prev_) add_bond(*prev_, idx, pending_bond_, pending_bond_ ? pending_bond_offset_ : offset);
        pending_bond_.reset();
        prev_ = idx;
    }

    void add_bond(std::size_t a, std::size_t b, std::optional<BondOrder> order, std::size_t offset) {
        if (a == b) fail("ring closure bonds an atom to itself", offset);
        for (const auto& bond : bonds_)
            if ((bond.begin == a && bond.end == b) || (bond.begin == b && bond.end == a))
                fail("duplicate bond between the same two atoms", offset);
        const bool both_aromatic = atoms_[a].aromatic && atoms_[b].aromatic;
        BondOrder resolved = order.value_or(both_aromatic ? BondOrder::aromatic : BondOrder::single);
        if (resolved == BondOrder::aromatic && !both_aromatic)
            fail("aromatic bond between non-aromatic atoms", offset);
        bonds_.push_back(Bond{a, b, resolved});
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::optional<std::size_t> prev_;
    std::optional<BondOrder> pending_bond_;
    std::size_t pending_bond_offset_ = 0;
    std::vector<OpenBranch> branches_;
    std::array<std::optional<OpenRing>, 10> rings_{};
};

}  // namespace detail

/// Parses a SMILES string. Throws ParseError (with byte offset) on anything
/// outside the supported subset.
inline Molecule parse_smiles(std::string_view text) { return detail::SmilesParser(text).parse(); }

/// Bonds lying on at least one cycle, i.e. every bond that is not a bridge.
inline std::set<std::size_t> ring_bonds(const Molecule& mol) {
    const std::size_t n = mol.atom_count();
    std::vector<std::size_t> disc(n, 0), low(n, 0);
    std::vector<bool> is_bridge(mol.bond_count(), false);
    std::size_t timer = 0;

    struct Frame {
        std::size_t atom;
        std::size_t parent_bond;
        std::size_t next;
    };
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);

    for (std::size_t root = 0; root < n; ++root) {
        if (disc[root] != 0) continue;
        std::vector<Frame> stack{{root, kNone, 0}};
        disc[root] = low[root] = ++timer;
        while (!stack.empty()) {
            Frame& f = stack.back();
            auto nbrs = mol.neighbors(f.atom);
            if (f.next < nbrs.size()) {
                const Neighbor nb = nbrs[f.next++];
                if (nb.bond == f.parent_bond) continue;
                if (disc[nb.atom] == 0) {
                    disc[nb.atom] = low[nb.atom] = ++timer;
                    stack.push_back({nb.atom, nb.bond, 0});
                } else {
                    low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
                }
            } else {
                const Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    Frame& parent = stack.back();
                    low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
                    if (low[done.atom] > disc[parent.atom]) is_bridge[done.parent_bond] = true;
                }
            }
        }
    }

    std::set<std::size_t> out;
    for (std::size_t b = 0; b < mol.bond_count(); ++b)
        if (!is_bridge[b]) out.insert(b);
    return out;
}

/// A named SMILES line from a text file.
struct SmilesRecord {
    std::string smiles;
    std::string name;
    std::size_t line = 0;
};

/// Reads one SMILES per line; blank lines and lines starting with '#' are
/// skipped. Anything after the first whitespace is kept as the record name.
inline std::vector<SmilesRecord> read_smiles_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open SMILES file '" + path + "'");
    std::vector<SmilesRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto end = line.find_first_of(" \t", first);
        SmilesRecord rec;
        rec.smiles = line.substr(first, end == std::string::npos ? std::string::npos : end - first);
        if (end != std::string::npos) {
            const auto name_start = line.find_first_not_of(" \t", end);
            if (name_start != std::string::npos) rec.name = line.substr(name_start);
        }
        rec.line = lineno;
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace ronpaint
