#include <gtest/gtest.h>

#include <random>
#include <string>

#include "ronpaint/molgraph.hpp"
#include "support/random_smiles.hpp"

using namespace ronpaint;
using testing_oracle::random_smiles;

namespace {

// Independent token counter: counts atom tokens and ring-closure digits by a
// plain character scan, without building a graph.
struct TokenCounts {
    std::size_t atoms = 0;
    std::size_t ring_digits = 0;
    std::size_t double_bonds = 0;
};

TokenCounts count_tokens(const std::string& s) {
    TokenCounts t;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '[') {
            ++t.atoms;
            i = s.find(']', i);
        } else if (c == 'C' && i + 1 < s.size() && s[i + 1] == 'l') {
            ++t.atoms;
            ++i;
        } else if (c == 'B' && i + 1 < s.size() && s[i + 1] == 'r') {
            ++t.atoms;
            ++i;
        } else if (std::string("BCNOPSFIbcnops").find(c) != std::string::npos) {
            ++t.atoms;
        } else if (c >= '1' && c <= '9') {
            ++t.ring_digits;
        } else if (c == '=') {
            ++t.double_bonds;
        }
    }
    return t;
}

std::size_t count_order(const Molecule& m, BondOrder order) {
    std::size_t n = 0;
    for (const auto& b : m.bonds()) n += b.order == order;
    return n;
}

// Bond b is on a cycle iff its endpoints stay connected once b is removed.
bool on_cycle_by_deletion(const Molecule& m, std::size_t b) {
    const auto& bond = m.bond(b);
    std::vector<bool> seen(m.atom_count(), false);
    std::vector<std::size_t> stack{bond.begin};
    seen[bond.begin] = true;
    while (!stack.empty()) {
        auto a = stack.back();
        stack.pop_back();
        for (const auto& nb : m.neighbors(a)) {
            if (nb.bond == b || seen[nb.atom]) continue;
            seen[nb.atom] = true;
            stack.push_back(nb.atom);
        }
    }
    return seen[bond.end];
}

}  // namespace

TEST(ParseSmiles, LinearAlkane) {
    auto m = parse_smiles("CCCCC");
    EXPECT_EQ(m.atom_count(), 5u);
    EXPECT_EQ(m.bond_count(), 4u);
    EXPECT_EQ(count_order(m, BondOrder::single), 4u);
    EXPECT_TRUE(ring_bonds(m).empty());
}

TEST(ParseSmiles, BenzeneRingClosure) {
    auto m = parse_smiles("c1ccccc1");
    ASSERT_EQ(m.atom_count(), 6u);
    EXPECT_EQ(m.bond_count(), 6u);
    for (const auto& a : m.atoms()) {
        EXPECT_TRUE(a.aromatic);
        EXPECT_EQ(a.atomic_number, 6);
    }
    EXPECT_EQ(count_order(m, BondOrder::aromatic), 6u);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(m.neighbors(i).size(), 2u);
    EXPECT_EQ(ring_bonds(m).size(), 6u);
}

TEST(ParseSmiles, Myrcene) {
    const std::string smi = "C=CC(=C)CCC=C(C)C";
    auto m = parse_smiles(smi);
    auto oracle = count_tokens(smi);
    EXPECT_EQ(oracle.atoms, 10u);
    EXPECT_EQ(oracle.ring_digits, 0u);
    EXPECT_EQ(m.atom_count(), oracle.atoms);
    EXPECT_EQ(m.bond_count(), oracle.atoms - 1);
    EXPECT_EQ(count_order(m, BondOrder::double_), oracle.double_bonds);
    EXPECT_EQ(count_order(m, BondOrder::double_), 3u);
}

TEST(ParseSmiles, BracketAtoms) {
    auto m = parse_smiles("[NH4+]");
    EXPECT_EQ(m.atom(0).atomic_number, 7);
    EXPECT_EQ(m.atom(0).explicit_h_count, 4);
    EXPECT_EQ(m.atom(0).formal_charge, 1);

    auto pyrrole = parse_smiles("c1cc[nH]c1");
    EXPECT_EQ(pyrrole.atom(3).atomic_number, 7);
    EXPECT_TRUE(pyrrole.atom(3).aromatic);
    EXPECT_EQ(pyrrole.atom(3).explicit_h_count, 1);
    EXPECT_EQ(count_order(pyrrole, BondOrder::aromatic), 5u);

    auto oxide = parse_smiles("C[O--]");
    EXPECT_EQ(oxide.atom(1).formal_charge, -2);
    EXPECT_EQ(parse_smiles("[Cl-]").atom(0).atomic_number, 17);
    EXPECT_FALSE(parse_smiles("C").atom(0).explicit_h_count.has_value());
}

TEST(ParseSmiles, HalogensAndExplicitBonds) {
    auto m = parse_smiles("ClC(Br)=CC#N");
    EXPECT_EQ(m.atom(0).atomic_number, 17);
    EXPECT_EQ(m.atom(2).atomic_number, 35);
    EXPECT_EQ(m.bond(*m.bond_between(1, 3)).order, BondOrder::double_);
    EXPECT_EQ(m.bond(*m.bond_between(4, 5)).order, BondOrder::triple);
}

TEST(ParseSmiles, SingleBondBetweenAromaticsIsKept) {
    auto biphenyl = parse_smiles("c1ccccc1-c2ccccc2");
    EXPECT_EQ(biphenyl.bond(*biphenyl.bond_between(5, 6)).order, BondOrder::single);
    EXPECT_EQ(ring_bonds(biphenyl).size(), 12u);
}

TEST(ParseSmiles, RingClosureBondOrder) {
    auto m = parse_smiles("C=1CCCCC1");
    EXPECT_EQ(m.bond(*m.bond_between(0, 5)).order, BondOrder::double_);
    EXPECT_THROW(parse_smiles("C=1CCCCC#1"), ParseError);
}

TEST(ParseSmiles, RejectsUnsupportedTokens) {
    struct Case {
        const char* text;
        std::size_t offset;
    };
    const Case cases[] = {
        {"C/C=C/C", 1}, {"C[C@H](O)N", 3}, {"[13CH4]", 1}, {"C*C", 1}, {"CC.O", 2},
        {"C%10CC%10", 1}, {"CC(C", 2}, {"CC)C", 2}, {"C1CC", 1}, {"CC=", 2},
        {"=CC", 0}, {"[Xe]", 1}, {"[CH4:1]", 4}, {"C()C", 2}, {"C1C1", 3},
        {"CXC", 1}, {"C:C", 1}, {"[se]", 2},
    };
    for (const auto& c : cases) {
        try {
            parse_smiles(c.text);
            ADD_FAILURE() << "accepted " << c.text;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.offset(), c.offset) << c.text << ": " << e.what();
        }
    }
    EXPECT_THROW(parse_smiles(""), ParseError);
    EXPECT_THROW(parse_smiles("C\xc3\xa9"), ParseError);
}

TEST(ParseSmiles, ErrorMessageNamesProblem) {
    try {
        parse_smiles("C/C");
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("stereo"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("offset 1"), std::string::npos);
    }
}

TEST(RingBonds, EucalyptolBicycle) {
    auto m = parse_smiles("CC12CCC(CC1)C(C)(C)O2");
    ASSERT_EQ(m.atom_count(), 11u);
    std::set<std::size_t> oracle;
    for (std::size_t b = 0; b < m.bond_count(); ++b)
        if (on_cycle_by_deletion(m, b)) oracle.insert(b);
    // Frozen from the deletion oracle: everything except the three methyl bonds.
    const std::set<std::size_t> expected{1, 2, 3, 4, 5, 6, 7, 10, 11};
    EXPECT_EQ(oracle, expected);
    EXPECT_EQ(ring_bonds(m), expected);
}

TEST(RingBonds, AgreesWithDeletionOracleOnRandomInputs) {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t rings = 0;
        auto smi = random_smiles(rng, &rings);
        auto m = parse_smiles(smi);
        std::set<std::size_t> oracle;
        for (std::size_t b = 0; b < m.bond_count(); ++b)
            if (on_cycle_by_deletion(m, b)) oracle.insert(b);
        EXPECT_EQ(ring_bonds(m), oracle) << smi;
    }
}

TEST(ParseSmilesProperty, CountsAndPurity) {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 500; ++trial) {
        std::size_t rings = 0;
        auto smi = random_smiles(rng, &rings);
        auto m = parse_smiles(smi);
        auto tokens = count_tokens(smi);
        EXPECT_EQ(m.atom_count(), tokens.atoms) << smi;
        EXPECT_EQ(tokens.ring_digits, 2 * rings) << smi;
        EXPECT_EQ(m.bond_count(), m.atom_count() - 1 + rings) << smi;
        EXPECT_EQ(parse_smiles(smi), m) << smi;
    }
}

TEST(Molecule, ConstructorValidatesInvariants) {
    std::vector<Atom> two{{0, 6, false, {}, 0}, {1, 6, false, {}, 0}};
    EXPECT_THROW(Molecule(two, {}), InputError);  // disconnected
    EXPECT_THROW(Molecule(two, {{0, 1, BondOrder::aromatic}}), InputError);
    EXPECT_THROW(Molecule(two, {{0, 1, BondOrder::single}, {1, 0, BondOrder::single}}), InputError);
    EXPECT_THROW(Molecule(two, {{0, 2, BondOrder::single}}), InputError);
    EXPECT_THROW(Molecule({{0, 2, false, {}, 0}}, {}), InputError);
    EXPECT_NO_THROW(Molecule(two, {{0, 1, BondOrder::double_}}));
}

TEST(ReadSmilesFile, SkipsCommentsAndKeepsNames) {
    const std::string path = testing::TempDir() + "/smiles.txt";
    {
        std::ofstream out(path);
        out << "# header\n\nCCO ethanol\n  c1ccccc1\tbenzene ring\nC\n";
    }
    auto recs = read_smiles_file(path);
    ASSERT_EQ(recs.size(), 3u);
    EXPECT_EQ(recs[0].smiles, "CCO");
    EXPECT_EQ(recs[0].name, "ethanol");
    EXPECT_EQ(recs[1].name, "benzene ring");
    EXPECT_EQ(recs[2].line, 5u);
    EXPECT_THROW(read_smiles_file(path + ".missing"), InputError);
}
