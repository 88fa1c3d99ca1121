#!/usr/bin/env python3
"""Regenerates the synthetic corpora under data/.

The RON values written here are NOT measurements. They come from a fixed
structural rule (see `synthetic_ron`) plus seeded noise, chosen so that long
single-bonded carbon chains push RON down while C=C bonds and branched alkene
vertices push it up. The corpora exist to exercise the pipeline end to end.

Usage: python3 tools/gen_demo_data.py [output_dir]
"""

import os
import random
import sys

# --------------------------------------------------------------------------
# Minimal molecular graph + SMILES writer/reader (organic subset only).

class Mol:
    def __init__(self):
        self.elem = []      # 'C', 'O', 'N'
        self.arom = []
        self.bonds = {}     # frozenset({a, b}) -> order (1, 2, 3, 'a')

    def add_atom(self, elem, arom=False):
        self.elem.append(elem)
        self.arom.append(arom)
        return len(self.elem) - 1

    def add_bond(self, a, b, order=1):
        self.bonds[frozenset((a, b))] = order

    def nbrs(self, a):
        out = []
        for key, order in self.bonds.items():
            if a in key:
                (b,) = tuple(key - {a})
                out.append((b, order))
        return sorted(out)

    def valence_used(self, a):
        total = 0
        for _, order in self.nbrs(a):
            total += 1.5 if order == 'a' else order
        return total


def to_smiles(mol):
    n = len(mol.elem)
    visited = [False] * n
    order_seen = []
    parent = {0: None}
    # Spanning tree by DFS to find ring-closure (back) edges.
    tree_edges = set()
    stack = [0]
    while stack:
        a = stack.pop()
        if visited[a]:
            continue
        visited[a] = True
        order_seen.append(a)
        if parent[a] is not None:
            tree_edges.add(frozenset((a, parent[a])))
        for b, _ in reversed(mol.nbrs(a)):
            if not visited[b]:
                parent[b] = a
                stack.append(b)
    ring_edges = [e for e in mol.bonds if e not in tree_edges]
    closures = {a: [] for a in range(n)}
    for digit, e in enumerate(sorted(ring_edges, key=lambda e: sorted(e)), start=1):
        a, b = sorted(e)
        closures[a].append((digit, e))
        closures[b].append((digit, e))

    def bond_sym(a, b, order):
        if order == 2:
            return '='
        if order == 3:
            return '#'
        if order == 1 and mol.arom[a] and mol.arom[b]:
            return '-'
        return ''

    def atom_sym(a):
        return mol.elem[a].lower() if mol.arom[a] else mol.elem[a]

    written = set()

    def write(a, from_atom):
        s = atom_sym(a)
        written.add(a)
        for digit, e in closures[a]:
            (other,) = tuple(e - {a})
            if other in written:
                s += bond_sym(a, other, mol.bonds[e]) + str(digit)
            else:
                s += str(digit)
        children = [b for b, _ in mol.nbrs(a)
                    if b != from_atom and frozenset((a, b)) in tree_edges and parent.get(b) == a]
        for i, b in enumerate(children):
            sub = bond_sym(a, b, mol.bonds[frozenset((a, b))]) + write(b, a)
            s += sub if i == len(children) - 1 else '(' + sub + ')'
        return s

    return write(0, None)


def from_smiles(text):
    mol = Mol()
    prev = None
    stack = []
    rings = {}
    pending = None
    i = 0
    while i < len(text):
        c = text[i]
        if c in '-=#':
            pending = {'-': 1, '=': 2, '#': 3}[c]
        elif c == '(':
            stack.append(prev)
        elif c == ')':
            prev = stack.pop()
        elif c.isdigit():
            d = int(c)
            if d in rings:
                a, order = rings.pop(d)
                o = pending or order
                if o is None:
                    o = 'a' if mol.arom[a] and mol.arom[prev] else 1
                mol.add_bond(a, prev, o)
            else:
                rings[d] = (prev, pending)
            pending = None
        else:
            if c == '[':
                j = text.index(']', i)
                sym = text[i + 1:j].replace('H', '') or 'H'
                i = j
            else:
                sym = c
            arom = sym.islower()
            a = mol.add_atom(sym.upper(), arom)
            if prev is not None:
                o = pending
                if o is None:
                    o = 'a' if mol.arom[a] and mol.arom[prev] else 1
                mol.add_bond(prev, a, o)
            prev = a
            pending = None
        i += 1
    assert not rings and not stack, text
    return mol

# --------------------------------------------------------------------------
# Feature detection for the synthetic rule (independent of the C++ matcher).

def is_aliph_c(mol, a):
    return mol.elem[a] == 'C' and not mol.arom[a]


def single_c_paths(mol, length):
    """True iff some simple path of `length` aliphatic carbons uses only single bonds."""
    def extend(path):
        if len(path) == length:
            return True
        for b, order in mol.nbrs(path[-1]):
            if order == 1 and is_aliph_c(mol, b) and b not in path:
                if extend(path + [b]):
                    return True
        return False
    return any(is_aliph_c(mol, a) and extend([a]) for a in range(len(mol.elem)))


def longest_single_c_path(mol):
    best = 0
    for k in range(1, len(mol.elem) + 1):
        if single_c_paths(mol, k):
            best = k
        else:
            break
    return best


def has_ene(mol):
    return any(order == 2 and all(is_aliph_c(mol, x) for x in key) for key, order in mol.bonds.items())


def has_ene_chain5(mol):
    # C=C-C-C-C
    for key, order in mol.bonds.items():
        if order != 2 or not all(is_aliph_c(mol, x) for x in key):
            continue
        a, b = tuple(key)
        for start, nxt in ((a, b), (b, a)):
            def extend(path):
                if len(path) == 5:
                    return True
                for c, o in mol.nbrs(path[-1]):
                    if o == 1 and is_aliph_c(mol, c) and c not in path:
                        if extend(path + [c]):
                            return True
                return False
            if extend([start, nxt]):
                return True
    return False


def has_branch_ene(mol):
    # C(-C)(-C)(=C)
    for a in range(len(mol.elem)):
        if not is_aliph_c(mol, a):
            continue
        singles = sum(1 for b, o in mol.nbrs(a) if o == 1 and is_aliph_c(mol, b))
        doubles = sum(1 for b, o in mol.nbrs(a) if o == 2 and is_aliph_c(mol, b))
        if singles >= 2 and doubles >= 1:
            return True
    return False


def quaternary_count(mol):
    return sum(1 for a in range(len(mol.elem))
               if is_aliph_c(mol, a) and sum(1 for b, o in mol.nbrs(a) if o == 1 and mol.elem[b] == 'C') == 4)


def synthetic_ron(mol, rng):
    ron = 95.0
    ron -= 14.0 * single_c_paths(mol, 5)
    ron -= 6.0 * has_ene_chain5(mol)
    ron += 9.0 * has_branch_ene(mol)
    ron += 7.0 * has_ene(mol)
    ron += 2.0 * quaternary_count(mol)
    ron += 10.0 * any(mol.arom)
    ron += 3.0 * ('O' in mol.elem)
    ron -= 1.5 * max(0, longest_single_c_path(mol) - 5)
    ron += rng.gauss(0.0, 1.5)
    return round(ron, 1)

# --------------------------------------------------------------------------
# Random structures.

def random_tree(rng, n_carbons):
    mol = Mol()
    mol.add_atom('C')
    for _ in range(n_carbons - 1):
        candidates = [a for a in range(len(mol.elem)) if mol.valence_used(a) < 3]
        # Prefer extending chains so long paths are common.
        weights = [3.0 if mol.valence_used(a) == 1 else 1.0 for a in candidates]
        a = rng.choices(candidates, weights)[0]
        b = mol.add_atom('C')
        mol.add_bond(a, b)
    return mol


def add_double_bonds(rng, mol, count):
    for _ in range(count):
        options = [k for k, o in mol.bonds.items() if o == 1
                   and all(mol.elem[x] == 'C' and not mol.arom[x] and mol.valence_used(x) <= 3 for x in k)
                   and not any(mol.bonds[e] == 2 for x in k for e in mol.bonds if x in e)]
        if not options:
            return
        mol.bonds[rng.choice(sorted(options, key=sorted))] = 2


def add_oxygen(rng, mol):
    kind = rng.choice(['alcohol', 'ether', 'ketone'])
    carbons = [a for a in range(len(mol.elem)) if mol.elem[a] == 'C' and not mol.arom[a]]
    if kind == 'alcohol':
        a = rng.choice([c for c in carbons if mol.valence_used(c) <= 3] or carbons)
        mol.add_bond(a, mol.add_atom('O'))
    elif kind == 'ether':
        a = rng.choice([c for c in carbons if mol.valence_used(c) <= 3] or carbons)
        o = mol.add_atom('O')
        mol.add_bond(a, o)
        mol.add_bond(o, mol.add_atom('C'))
    else:
        ok = [c for c in carbons if mol.valence_used(c) <= 2]
        if ok:
            mol.add_bond(rng.choice(ok), mol.add_atom('O'), 2)


def attach_ring(rng, mol):
    kind = rng.choice(['cyclopentane', 'cyclohexane', 'benzene', 'cyclohexene'])
    size = 5 if kind == 'cyclopentane' else 6
    arom = kind == 'benzene'
    ring = [mol.add_atom('C', arom) for _ in range(size)]
    for i in range(size):
        order = 'a' if arom else 1
        mol.add_bond(ring[i], ring[(i + 1) % size], order)
    if kind == 'cyclohexene':
        mol.bonds[frozenset((ring[2], ring[3]))] = 2
    anchor = rng.choice([a for a in range(len(mol.elem)) if a not in ring and mol.valence_used(a) <= 3])
    mol.add_bond(anchor, ring[0])


def random_molecule(rng):
    mol = random_tree(rng, rng.randint(3, 9))
    add_double_bonds(rng, mol, rng.choices([0, 1, 2], [0.35, 0.45, 0.2])[0])
    if rng.random() < 0.2:
        add_oxygen(rng, mol)
    if rng.random() < 0.15:
        attach_ring(rng, mol)
    return mol


def generate(rng, count, prefix, used):
    rows = []
    while len(rows) < count:
        mol = random_molecule(rng)
        smi = to_smiles(mol)
        canon = canonical_key(from_smiles(smi))
        if canon in used:
            continue
        used.add(canon)
        rows.append((f"{prefix}-{len(rows) + 1:03d}", smi, synthetic_ron(mol, rng)))
    return rows


def canonical_key(mol):
    # Cheap invariant to avoid obvious duplicates: sorted (element, degree-profile) multiset.
    desc = []
    for a in range(len(mol.elem)):
        nb = sorted((mol.elem[b], str(o)) for b, o in mol.nbrs(a))
        desc.append((mol.elem[a], mol.arom[a], tuple(nb)))
    return tuple(sorted(desc)), len(mol.bonds)


VALIDATION = [
    ("myrcene", "C=CC(=C)CCC=C(C)C"),
    ("ocimene", "C=CC(C)=CCC=C(C)C"),
    ("eucalyptol", "CC12CCC(CC1)C(C)(C)O2"),
    ("limonene", "CC1=CCC(CC1)C(=C)C"),
    ("alpha-pinene", "CC1=CCC2CC1C2(C)C"),
    ("isoprene", "C=CC(=C)C"),
    ("toluene", "Cc1ccccc1"),
    ("p-xylene", "Cc1ccc(C)cc1"),
    ("ethanol", "CCO"),
    ("isobutanol", "CC(C)CO"),
    ("2-methylfuran", "Cc1ccco1"),
    ("cyclopentanone", "O=C1CCCC1"),
    ("diisobutylene", "C=C(C)CC(C)(C)C"),
    ("1-hexene", "C=CCCCC"),
    ("farnesene", "C=CC(=C)CCC=C(C)CCC=C(C)C"),
    ("methyl butanoate", "CCCC(=O)OC"),
]


def write_csv(path, rows, with_label):
    with open(path, "w") as f:
        f.write("name,smiles,ron,label\n")
        for name, smi, ron in rows:
            label = ("high" if ron >= 94.4 else "low") if with_label else ""
            f.write(f"{name},{smi},{ron},{label}\n")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else os.path.join(os.path.dirname(__file__), "..", "data")
    rng = random.Random(148)
    used = {canonical_key(from_smiles(s)) for _, s in VALIDATION}
    train = generate(rng, 148, "train", used)
    bench = generate(random.Random(200), 200, "bench", set(used))

    vrng = random.Random(16)
    validation = [(name, smi, synthetic_ron(from_smiles(smi), vrng)) for name, smi in VALIDATION]

    write_csv(os.path.join(out, "demo_train.csv"), train, with_label=True)
    write_csv(os.path.join(out, "demo_validation.csv"), validation, with_label=False)
    write_csv(os.path.join(out, "benchmark_200.csv"), bench, with_label=True)
    for name, rows in (("train", train), ("validation", validation), ("benchmark", bench)):
        high = sum(1 for r in rows if r[2] >= 94.4)
        print(f"{name}: {len(rows)} rows, {high} high")


if __name__ == "__main__":
    main()
