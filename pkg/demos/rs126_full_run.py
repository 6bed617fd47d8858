"""
Ten-fold cross-validation on RS126 (long run, opt in)
=====================================================

Usage: ``python demos/rs126_full_run.py RS126_FILE [--workers N]``

The file uses the paired-lines layout (``>id``, sequence, structure). With
17-residue windows every fold compares tens of thousands of windows pairwise
for three measures and trains three SVMs, so expect hours, not minutes.
Results land in ``rs126-out/``; there is no target to pass or fail.
"""

import argparse
import json
import time
from pathlib import Path

from mcpss import RunConfig
from mcpss.cli import format_ablation
from mcpss.ingest import parse_dataset
from mcpss.pipeline import ABLATION_ROWS, FKNN_LABELS, ablation_predictions, cross_validated_streams, cv_result

parser = argparse.ArgumentParser()
parser.add_argument("dataset")
parser.add_argument("--workers", type=int, default=1)
parser.add_argument("--format", default="paired")
args = parser.parse_args()

data = parse_dataset(args.dataset, args.format, name="RS126")
config = RunConfig(folds=10, workers=args.workers)
out = Path("rs126-out")
out.mkdir(exist_ok=True)
print(f"{len(data)} proteins, {data.residue_count} residues")

start = time.perf_counter()
streams = cross_validated_streams(data, config, tuple(FKNN_LABELS))
cv = cv_result(streams, ablation_predictions(streams, config), config.folds)
rows = [(name, cv.pooled(name)) for name in ABLATION_ROWS]
print(format_ablation(rows))
print(f"{(time.perf_counter() - start) / 3600:.2f} h")

(out / "ablation.json").write_text(json.dumps(
    {"config": config.snapshot(), "rows": [{"method": n, **r.to_dict()} for n, r in rows]},
    indent=2, sort_keys=True))
