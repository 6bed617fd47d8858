"""
Measuring how far apart two residue windows are
===============================================

A window's Lempel-Ziv complexity is the number of fragments in its exhaustive
history. Appending a second window and counting how many fragments that adds
gives a distance that needs no alignment and no substitution matrix.
"""

from mcpss import DissimilarityConfig, compound_dissimilarity, exhaustive_history, zeta
from mcpss.dissimilarity import dissimilarity_rate, lz_score, ngram_score

# The history splits a string wherever a new piece of text begins.
for s in ("TTCCPSTCIVPSA", "APAFSVSGG", "AAAA"):
    h = exhaustive_history(s)
    print(f"{s:<15} {str(h):<24} c = {h.complexity}")

# zeta(p, q) counts the fragments q adds after p. Similar windows add few.
p, q, r = "AAKLLEAMK", "AAKLMEALK", "VTIYFVWTV"
print("\nzeta(p, q) =", zeta(p, q), "  zeta(p, r) =", zeta(p, r))

# lz_score normalises by each window's own complexity and keeps the worse side.
print("lz_score(p, q) =", lz_score(p, q), "  lz_score(p, r) =", lz_score(p, r))

# The composition factor looks at which letters are shared, the n-gram term at
# which short substrings are shared. Both shrink the distance of close windows.
print("rate(p, q) =", dissimilarity_rate(p, q), "  shared 3-grams:", ngram_score(p, q, 3))

for measure in ("lz", "lz+rho", "full"):
    cfg = DissimilarityConfig.from_measure(measure, 3, "rate")
    near = float(compound_dissimilarity(p, q, cfg))
    far = float(compound_dissimilarity(p, r, cfg))
    print(f"{measure:<7} d(p, q) = {near:.4f}   d(p, r) = {far:.4f}")
