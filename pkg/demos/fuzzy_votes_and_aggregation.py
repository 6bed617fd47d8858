"""
From neighbours to a structure string
=====================================

Train both classifiers on a small generated corpus, look at the fuzzy votes
for one protein, and watch the five aggregation rules resolve the residues
where the two classifiers disagree.
"""

import numpy as np

from mcpss import RunConfig
from mcpss.pipeline import compute_streams
from mcpss.aggregate import AggregationContext, ClassifierWeights, aggregate_protein, protein_rngs
from mcpss.synthetic import CorpusSpec, synthetic_corpus

corpus = synthetic_corpus(3, CorpusSpec(proteins=14, min_segment=8, max_segment=20))
train, test = corpus.subset(range(12), "train"), corpus.subset([12, 13], "test")
config = RunConfig(window_size=9, k=5, k_prime=5)

# One fuzzy membership row per residue, one SVM class per residue.
streams = compute_streams(train, test, config)
u, svm = streams.votes["full"][0], streams.svm[0]
truth = streams.truths[0]
print("truth ", truth)
print("fknn  ", streams.top_decisions("full")[0])
print("svm   ", streams.svm_decisions()[0])

disagree = np.flatnonzero(u.argmax(axis=1) != svm)
print(f"\n{len(disagree)} of {len(truth)} residues are contested")
for i in disagree[:5]:
    print(f"  residue {i}: memberships H/E/C = {np.round(u[i], 3)}, svm = {'HEC'[svm[i]]}")

# Rules 1 and 3 fall back on the fuzzy ranking; rules 2, 4 and 5 spin a wheel
# that gives [0, 0.75] to the fuzzy KNN.
weights = ClassifierWeights.from_breakpoint(0.75)
for rule in range(1, 6):
    ctx = AggregationContext(rule, weights if rule in (2, 4, 5) else None)
    out = aggregate_protein(u, svm, ctx, protein_rngs(0, 1)[0])
    hits = sum(a == b for a, b in zip(out, truth))
    print(f"MCP{rule} {out}  Q3 {100 * hits / len(truth):.1f}")
