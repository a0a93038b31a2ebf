#!/usr/bin/env python3
"""Regenerate data/pseudonyms.csv: fictional country-style names.

The names are built from syllable tables with a fixed seed, so the output is
stable. To use a different name source (for example names screened by hand),
write any one-column CSV with a `label` header and point the benchmark config's
`pseudonyms` entry at it.
"""
import argparse
import csv
import random

ONSETS = ["B", "C", "D", "F", "G", "H", "K", "L", "M", "N", "P", "Q", "R", "S", "T",
          "V", "Z", "Br", "Dr", "Gr", "Kr", "Tr", "Vr", "Th", "Sh", "El", "Al", "Or",
          "Es", "Ar", "Is", "Ul"]
MIDDLES = ["a", "e", "i", "o", "u", "ae", "ia", "or", "en", "al", "ar", "ir", "os",
           "und", "est", "ov", "an", "el"]
ENDINGS = ["ia", "land", "stan", "ria", "ora", "mar", "heim", "onia", "avia", "esh",
           "uria", "ador", "istan", "ica", "ene", "opia", "ania", "gard", "aro", "eth"]
PREFIXES = ["", "", "", "", "", "North ", "South ", "East ", "West ", "New ",
            "Upper ", "Lower "]
SUFFIXES = ["", "", "", "", "", "", " Republic", " Federation", " Isles"]


def make_names(n, seed):
    rng = random.Random(seed)
    names = []
    seen = set()
    while len(names) < n:
        core = rng.choice(ONSETS) + rng.choice(MIDDLES)
        if rng.random() < 0.4:
            core += rng.choice(MIDDLES)
        core += rng.choice(ENDINGS)
        name = rng.choice(PREFIXES) + core.capitalize() + rng.choice(SUFFIXES)
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/pseudonyms.csv")
    ap.add_argument("--count", type=int, default=700)
    ap.add_argument("--seed", type=int, default=20250406)
    args = ap.parse_args()
    with open(args.out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["label"])
        for name in make_names(args.count, args.seed):
            w.writerow([name])


if __name__ == "__main__":
    main()
