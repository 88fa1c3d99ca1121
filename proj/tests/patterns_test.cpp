#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "ronpaint/patterns.hpp"
#include "support/brute_force_matcher.hpp"
#include "support/match_corpus.hpp"

using namespace ronpaint;
using ronpaint::testing_oracle::brute_force_embeddings;

namespace {

bool is_aliphatic_carbon(const AtomPredicate& p) {
    return p.terms.size() == 1 && !p.terms[0].negated && p.terms[0].kind == PrimitiveKind::aliphatic_element &&
           p.terms[0].atomic_number == 6;
}

std::size_t degree(const Pattern& p, std::size_t atom) {
    return static_cast<std::size_t>(std::count_if(p.bonds.begin(), p.bonds.end(), [&](const PatternBond& b) {
        return b.begin == atom || b.end == atom;
    }));
}

PatternSet myrcene_patterns() {
    return make_pattern_set({{"chain5", "C-C-C-C-C"},
                             {"ene_chain5", "C=C-C-C-C"},
                             {"branch_ene", "C(-C)(-C)(=C)"},
                             {"ene", "C=C"}});
}

}  // namespace

TEST(ParsePattern, SingleBondedCarbonPath) {
    auto p = parse_pattern("p", "C-C-C-C-C");
    ASSERT_EQ(p.atoms.size(), 5u);
    ASSERT_EQ(p.bonds.size(), 4u);
    for (const auto& a : p.atoms) EXPECT_TRUE(is_aliphatic_carbon(a));
    for (std::size_t i = 0; i < 4; ++i) {
        EXPECT_EQ(p.bonds[i].begin, i);
        EXPECT_EQ(p.bonds[i].end, i + 1);
        EXPECT_EQ(p.bonds[i].kind, BondPredicate::single);
    }
}

TEST(ParsePattern, AromaticFiveRingWithNonCarbon) {
    auto p = parse_pattern("p", "[a;!#6]1aaaa1");
    ASSERT_EQ(p.atoms.size(), 5u);
    ASSERT_EQ(p.bonds.size(), 5u);
    const std::vector<AtomTerm> first{{false, PrimitiveKind::aromatic_any, 0}, {true, PrimitiveKind::element, 6}};
    EXPECT_EQ(p.atoms[0].terms, first);
    for (std::size_t i = 1; i < 5; ++i) {
        ASSERT_EQ(p.atoms[i].terms.size(), 1u);
        EXPECT_EQ(p.atoms[i].terms[0].kind, PrimitiveKind::aromatic_any);
    }
    for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(degree(p, i), 2u);
    for (const auto& b : p.bonds) EXPECT_EQ(b.kind, BondPredicate::single_or_aromatic);
}

TEST(ParsePattern, BranchedVertex) {
    auto p = parse_pattern("p", "C(-C)(-C)(=C)");
    ASSERT_EQ(p.atoms.size(), 4u);
    ASSERT_EQ(p.bonds.size(), 3u);
    EXPECT_EQ(degree(p, 0), 3u);
    std::vector<BondPredicate> kinds;
    for (const auto& b : p.bonds) {
        EXPECT_EQ(b.begin, 0u);
        kinds.push_back(b.kind);
    }
    EXPECT_EQ(kinds, (std::vector{BondPredicate::single, BondPredicate::single, BondPredicate::double_}));
}

TEST(ParsePattern, Errors) {
    struct Case {
        const char* text;
        std::size_t offset;
    };
    const Case cases[] = {
        {"[a;!#6", 0}, {"C]", 1}, {"[a;X]", 3}, {"[a,n]", 2}, {"C1CC", 1}, {"C(C", 1},
        {"[#]", 1}, {"[]", 1}, {"C-", 1}, {"[a;]", 3}, {"CqC", 1}, {"[R2]", 1},
    };
    for (const auto& c : cases) {
        try {
            parse_pattern("bad", c.text);
            ADD_FAILURE() << "accepted " << c.text;
        } catch (const ParseError& e) {
            EXPECT_EQ(e.offset(), c.offset) << c.text << ": " << e.what();
        }
    }
}

TEST(ParsePattern, BracketPrimitives) {
    auto p = parse_pattern("p", "[#8;A]-[c;!#7]");
    ASSERT_EQ(p.atoms.size(), 2u);
    EXPECT_EQ(p.atoms[0].terms.size(), 2u);
    EXPECT_EQ(p.atoms[1].terms[0].kind, PrimitiveKind::aromatic_element);
    EXPECT_TRUE(p.atoms[1].terms[1].negated);
    auto cl = parse_pattern("p", "[Cl]");
    EXPECT_EQ(cl.atoms[0].terms[0].atomic_number, 17);
}

TEST(MatchPattern, PathOntoEqualPathBothOrientations) {
    auto m = match_pattern(parse_pattern("p", "C-C-C-C-C"), parse_smiles("CCCCC"));
    const std::vector<std::vector<std::size_t>> expected{{0, 1, 2, 3, 4}, {4, 3, 2, 1, 0}};
    EXPECT_EQ(m.embeddings, expected);
    EXPECT_EQ(m.matched_atoms, (std::set<std::size_t>{0, 1, 2, 3, 4}));
    EXPECT_EQ(m.matched_bonds, (std::set<std::size_t>{0, 1, 2, 3}));
}

TEST(MatchPattern, MyrceneNamedPaths) {
    auto myrcene = parse_smiles("C=CC(=C)CCC=C(C)C");
    auto chain = match_pattern(parse_pattern("a", "C-C-C-C-C"), myrcene);
    auto ene_chain = match_pattern(parse_pattern("b", "C=C-C-C-C"), myrcene);
    EXPECT_FALSE(chain.empty());
    EXPECT_FALSE(ene_chain.empty());
    // The only five-carbon single-bonded path runs 1-2-4-5-6.
    EXPECT_EQ(chain.matched_atoms, (std::set<std::size_t>{1, 2, 4, 5, 6}));
    EXPECT_EQ(chain.embeddings.size(), 2u);
}

TEST(MatchPattern, HeteroaromaticFiveRing) {
    auto p = parse_pattern("p", "[a;!#6]1aaaa1");
    auto pyrrole = parse_smiles("c1cc[nH]c1");
    auto benzene = parse_smiles("c1ccccc1");
    auto hit = match_pattern(p, pyrrole);
    EXPECT_FALSE(hit.empty());
    EXPECT_EQ(hit.embeddings, brute_force_embeddings(p, pyrrole));
    // Nitrogen fixed on pattern atom 0, two ring directions.
    EXPECT_EQ(hit.embeddings.size(), 2u);
    for (const auto& e : hit.embeddings) EXPECT_EQ(e[0], 3u);
    EXPECT_TRUE(match_pattern(p, benzene).empty());
    EXPECT_TRUE(brute_force_embeddings(p, benzene).empty());
}

TEST(MatchPattern, DefaultBondAcceptsSingleOrAromaticOnly) {
    auto p = parse_pattern("p", "CC");
    EXPECT_FALSE(match_pattern(p, parse_smiles("CC")).empty());
    EXPECT_TRUE(match_pattern(p, parse_smiles("C=C")).empty());
    auto arom = parse_pattern("p", "cc");
    EXPECT_FALSE(match_pattern(arom, parse_smiles("c1ccccc1")).empty());
    EXPECT_TRUE(match_pattern(parse_pattern("p", "c-c"), parse_smiles("c1ccccc1")).empty());
    EXPECT_FALSE(match_pattern(parse_pattern("p", "c:c"), parse_smiles("c1ccccc1")).empty());
}

TEST(MatchPattern, OracleEquivalenceOnCorpus) {
    using namespace ronpaint::testing_oracle;
    std::size_t pairs = 0;
    for (auto pat_text : kCorpusPatterns) {
        auto p = parse_pattern("p", pat_text);
        for (auto smi : kCorpusMolecules) {
            auto mol = parse_smiles(smi);
            auto got = match_pattern(p, mol);
            EXPECT_EQ(got.embeddings, brute_force_embeddings(p, mol)) << pat_text << " vs " << smi;
            EXPECT_EQ(got.empty(), !contains_pattern(p, mol));
            std::set<std::size_t> atoms;
            for (const auto& e : got.embeddings) atoms.insert(e.begin(), e.end());
            EXPECT_EQ(got.matched_atoms, atoms);
            EXPECT_TRUE(std::is_sorted(got.embeddings.begin(), got.embeddings.end()));
            ++pairs;
        }
    }
    EXPECT_GE(pairs, 600u);
}

TEST(MatchPattern, PathEmbeddingsClosedUnderReversal) {
    const char* paths[] = {"C-C-C-C-C", "C-C", "C-O-C", "CCCC", "C=C"};
    for (auto path : paths) {
        auto p = parse_pattern("p", path);
        for (auto smi : testing_oracle::kCorpusMolecules) {
            auto m = match_pattern(p, parse_smiles(smi));
            std::set<std::vector<std::size_t>> set(m.embeddings.begin(), m.embeddings.end());
            for (auto e : m.embeddings) {
                std::reverse(e.begin(), e.end());
                EXPECT_TRUE(set.count(e)) << path << " vs " << smi;
            }
        }
    }
}

TEST(MatchPattern, AddingAtomNeverClearsABit) {
    std::mt19937 rng(11);
    std::vector<Pattern> pats;
    for (auto t : testing_oracle::kCorpusPatterns) pats.push_back(parse_pattern("p", t));
    const int elements[] = {6, 6, 6, 8, 7};
    for (auto smi : testing_oracle::kCorpusMolecules) {
        auto mol = parse_smiles(smi);
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<Atom> atoms(mol.atoms().begin(), mol.atoms().end());
            std::vector<Bond> bonds(mol.bonds().begin(), mol.bonds().end());
            const std::size_t attach = std::uniform_int_distribution<std::size_t>(0, atoms.size() - 1)(rng);
            const int z = elements[std::uniform_int_distribution<int>(0, 4)(rng)];
            atoms.push_back({atoms.size(), z, false, {}, 0});
            const BondOrder order = std::uniform_int_distribution<int>(0, 1)(rng) ? BondOrder::double_ : BondOrder::single;
            bonds.push_back({attach, atoms.size() - 1, order});
            Molecule grown(atoms, bonds);
            for (const auto& p : pats) {
                if (contains_pattern(p, mol)) {
                    EXPECT_TRUE(contains_pattern(p, grown)) << p.source_text << " " << smi;
                }
            }
        }
    }
}

TEST(Fingerprint, Examples) {
    auto single = make_pattern_set({{"chain5", "C-C-C-C-C"}});
    EXPECT_EQ(compute_fingerprint(parse_smiles("C"), single).bits, std::vector<std::uint8_t>{0});

    auto two = make_pattern_set({{"chain5", "C-C-C-C-C"}, {"ene", "C=C"}});
    EXPECT_EQ(compute_fingerprint(parse_smiles("CCCCC"), two).bits, (std::vector<std::uint8_t>{1, 0}));

    auto fp = compute_fingerprint(parse_smiles("C=CC(=C)CCC=C(C)C"), myrcene_patterns());
    EXPECT_EQ(fp.bits, (std::vector<std::uint8_t>{1, 1, 1, 1}));
    EXPECT_EQ(fp.pattern_set_id, myrcene_patterns().id);
    EXPECT_EQ(fp.count(), 4u);
}

TEST(PatternSet, FileFormatAndIdentity) {
    auto a = parse_pattern_set("# comment\nchain5\tC-C-C-C-C\n\nene\tC=C\r\n");
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a.patterns[1].id, "ene");
    EXPECT_EQ(a.index_of("ene"), 1u);
    auto reordered = parse_pattern_set("ene\tC=C\nchain5\tC-C-C-C-C\n");
    EXPECT_NE(a.id, reordered.id);
    EXPECT_EQ(a.id, parse_pattern_set("chain5\tC-C-C-C-C\nene\tC=C\n").id);
    EXPECT_THROW(parse_pattern_set("chain5 C-C-C\n"), InputError);
    EXPECT_THROW(parse_pattern_set("x\tC\nx\tO\n"), InputError);
    EXPECT_THROW(parse_pattern_set("# nothing\n"), InputError);
    EXPECT_THROW(parse_pattern_set("x\t[a;Q]\n"), ParseError);
}

TEST(PatternSet, ShippedDefaultSetParses) {
    auto set = load_pattern_set(std::string(RONPAINT_SOURCE_DIR) + "/data/patterns/default.tsv");
    EXPECT_GE(set.size(), 20u);
    for (auto id : {"C-C-C-C-C", "C=C-C-C-C", "C(-C)(-C)(=C)", "C=C", "[a;!#6]1aaaa1"}) {
        bool found = false;
        for (const auto& p : set.patterns) found |= p.source_text == id;
        EXPECT_TRUE(found) << id;
    }
}

TEST(MatchAll, OneMatchSetPerPattern) {
    auto set = myrcene_patterns();
    auto all = match_all(parse_smiles("C=CC(=C)CCC=C(C)C"), set);
    ASSERT_EQ(all.size(), 4u);
    EXPECT_EQ(all[2].pattern_id, "branch_ene");
    EXPECT_EQ(all[2].matched_atoms, (std::set<std::size_t>{1, 2, 3, 4, 6, 7, 8, 9}));
}
