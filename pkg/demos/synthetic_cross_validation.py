"""
Cross-validating the full pipeline
==================================

Labels in the generated corpus are a fixed function of each residue's
width-5 neighbourhood, so a good predictor can get them almost all right.
This runs 3-fold cross-validation (about a minute) and prints the ablation
table: three fuzzy KNN measures, the edit-kernel SVM and the five rules.
"""

from mcpss import RunConfig
from mcpss.cli import format_ablation
from mcpss.pipeline import ABLATION_ROWS, FKNN_LABELS, ablation_predictions, cross_validated_streams, cv_result, sweep
from mcpss.synthetic import synthetic_corpus

corpus = synthetic_corpus(0)
config = RunConfig(folds=3)
print(f"{len(corpus)} proteins, {corpus.residue_count} residues")

# The classifiers are trained once per fold; every row below reuses them.
streams = cross_validated_streams(corpus, config, tuple(FKNN_LABELS))
cv = cv_result(streams, ablation_predictions(streams, config), config.folds)
print(format_ablation([(name, cv.pooled(name)) for name in ABLATION_ROWS]))

# How much to trust each classifier on disagreement: a sweep of the breakpoint.
print("\nbreakpoint  Q3 (rule 2, 15 draws)")
for b, acc in sweep(streams, config.replace(draws=15)):
    print(f"   {b:.1f}     {acc:.2f}")
