#!/usr/bin/env python3
"""Recomputes expected.json for the intrinsic fixtures with exact arithmetic.

Every vector lies on a Pythagorean-triple direction (or an axis), so each
norm is an integer and every cosine is a rational number. Neighbor lists and
Jaccard values are therefore exact; Pearson correlations are exact up to the
final square root, which is taken with 50-digit decimals.

Conventions mirrored from the tool:
  * neighbors sort by cosine descending, ties by word ascending, query excluded
  * the dictionary lookup is case-insensitive
  * unmatched terms become "surface:<lowercased term>" (surface policy) or
    are dropped (drop policy)
  * correlation compares cosine profiles over all unordered pairs of the
    shared vocabulary

Usage: python3 derive_expected.py > expected.json
"""

import json
import math
from decimal import Decimal, getcontext
from fractions import Fraction
from itertools import combinations

getcontext().prec = 50
TABLES = ["patent", "generic"]
QUERY = "ibuprofen"
K = 10


def read_table(path):
    with open(path) as f:
        rows, dim = map(int, f.readline().split())
        table = {}
        for line in f:
            word, *values = line.split()
            assert len(values) == dim
            table[word] = [int(v) for v in values]
        assert len(table) == rows
        return table


def exact_norm(v):
    sq = sum(x * x for x in v)
    r = math.isqrt(sq)
    assert r * r == sq, f"{v} has an irrational norm"
    return r


def cosine(u, v):
    return Fraction(sum(a * b for a, b in zip(u, v)), exact_norm(u) * exact_norm(v))


def neighbors(table, query, k):
    q = table[query]
    scored = [(cosine(q, v), w) for w, v in table.items() if w != query]
    scored.sort(key=lambda s: (-s[0], s[1]))
    return scored[:k]


def read_dictionary(path):
    with open(path) as f:
        return dict((t.lower(), i) for t, i in (line.rstrip("\n").split("\t") for line in f if line.strip()))


def normalize(words, dictionary, surface):
    ids = set()
    for w in words:
        if w.lower() in dictionary:
            ids.add(dictionary[w.lower()])
        elif surface:
            ids.add("surface:" + w.lower())
    return ids


def jaccard(a, b):
    return Fraction(len(a & b), len(a | b))


def pearson(x, y):
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    sxy = sum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = sum((a - mx) ** 2 for a in x)
    syy = sum((b - my) ** 2 for b in y)
    ratio = sxy * sxy / (sxx * syy)
    root = (Decimal(ratio.numerator) / Decimal(ratio.denominator)).sqrt()
    return float(root if sxy >= 0 else -root)


def main():
    tables = {name: read_table(f"{name}.txt") for name in TABLES}
    dictionary = read_dictionary("dictionary.tsv")
    lists = {name: neighbors(tables[name], QUERY, K) for name in TABLES}
    out = {"query": QUERY, "k": K, "neighbors": {}, "jaccard": {}, "correlation": {}}
    for name in TABLES:
        out["neighbors"][name] = [
            {"word": w, "score": float(s), "exact": f"{s.numerator}/{s.denominator}"} for s, w in lists[name]
        ]
    words = {name: [w for _, w in lists[name]] for name in TABLES}
    for policy, surface in (("surface", True), ("drop", False)):
        a, b = (normalize(words[n], dictionary, surface) for n in TABLES)
        j = jaccard(a, b)
        out["jaccard"][policy] = {"value": float(j), "exact": f"{j.numerator}/{j.denominator}"}
    shared = sorted(set(tables["patent"]) & set(tables["generic"]))
    profiles = [[cosine(tables[n][u], tables[n][v]) for u, v in combinations(shared, 2)] for n in TABLES]
    out["correlation"] = {"shared_vocab_size": len(shared), "pearson": pearson(*profiles)}
    print(json.dumps(out, indent=2))


if __name__ == "__main__":
    main()
