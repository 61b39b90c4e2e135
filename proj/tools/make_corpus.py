#!/usr/bin/env python3
"""Regenerates data/corpus.smi: drug-like SMILES assembled from ring,
substituent and linker fragments. Output is deterministic for a given seed."""

import argparse
import random

AROMATIC_RINGS = [
    list("cccccc"),
    list("ccnccc"),
    list("cncncc"),
    list("ccccnc"),
    ["c", "c", "s", "c", "c"],
    ["c", "c", "o", "c", "c"],
    ["c", "c", "[nH]", "c", "c"],
    ["c", "n", "c", "[nH]", "c"],
]
ALIPHATIC_RINGS = [
    list("CCCCCC"),
    list("CCNCCC"),
    list("CCOCCN"),
    list("CNCCNC"),
    list("CCC"),
    list("CCOCC"),
    list("CCCCC"),
]
FUSED = [
    "c1ccc2ccccc2c1",
    "c1ccc2[nH]ccc2c1",
    "c1ccc2ncccc2c1",
    "c1ccc2[nH]cnc2c1",
    "C1CCc2ccccc2C1",
    "c1ccc2occc2c1",
]
SUBSTITUENTS = ["C", "CC", "F", "Cl", "Br", "O", "OC", "N", "C(F)(F)F", "C#N",
                "C(=O)O", "C(=O)N", "N(C)C", "S(C)(=O)=O", "OCC", "C(C)C"]
LINKERS = ["", "C", "CC", "O", "N", "C(=O)N", "NC(=O)", "OC", "S", "C(=O)", "CN",
           "CCN", "CO", "N1CCN(CC1)"]
CAPS = ["C", "CC", "CCC", "CC(C)", "OC", "N", "CCO", "CCN", "CN(C)", "O=C(O)",
        "NC(=O)", "CS", "FC(F)(F)"]
TAILS = ["C", "CC", "O", "N", "C(=O)O", "C(=O)N", "OC", "F", "Cl", "CCO", "C#N",
         "CN", "C(C)C"]


def ring(rng):
    if rng.random() < 0.12:
        return rng.choice(FUSED), False
    aromatic = rng.random() < 0.65
    atoms = list(rng.choice(AROMATIC_RINGS if aromatic else ALIPHATIC_RINGS))
    n = len(atoms)
    subs = {}
    for _ in range(rng.choice([0, 0, 1, 1, 2])):
        pos = rng.randrange(1, n - 1)
        # ring heteroatoms carry no substituent
        if atoms[pos].startswith("[") or atoms[pos] in ("n", "o", "s", "O", "S"):
            continue
        if not aromatic and atoms[pos] == "N":
            continue
        subs[pos] = rng.choice(SUBSTITUENTS)
    out = atoms[0] + "1"
    for i in range(1, n):
        out += atoms[i]
        if i == n - 1:
            out += "1"
        elif i in subs:
            out += "(" + subs[i] + ")"
    has_aliphatic = not aromatic or bool(subs)
    return out, has_aliphatic


def molecule(rng):
    parts = []
    aliphatic = False
    if rng.random() < 0.6:
        parts.append(rng.choice(CAPS))
        aliphatic = True
    units = rng.choice([1, 1, 2, 2, 2, 3])
    for u in range(units):
        if u > 0:
            link = rng.choice(LINKERS)
            parts.append(link)
            aliphatic = aliphatic or bool(link)
        r, ali = ring(rng)
        parts.append(r)
        aliphatic = aliphatic or ali
    if rng.random() < 0.5 or not aliphatic:
        parts.append(rng.choice(TAILS))
    return "".join(parts)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--max-chars", type=int, default=60)
    ap.add_argument("--out", default="data/corpus.smi")
    args = ap.parse_args()

    rng = random.Random(args.seed)
    seen = []
    keys = set()
    while len(seen) < args.count:
        m = molecule(rng)
        if len(m) > args.max_chars or m in keys:
            continue
        keys.add(m)
        seen.append(m)
    with open(args.out, "w") as f:
        f.write("# bundled training corpus: fragment-assembled drug-like SMILES\n")
        f.write(f"# generated by tools/make_corpus.py --seed {args.seed} --count {args.count}\n")
        for m in seen:
            f.write(m + "\n")


if __name__ == "__main__":
    main()
