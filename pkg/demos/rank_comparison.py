"""How far apart are two band rankings?

Three rankings of the five user-friendly bands ship with the package: one
from the banded model, one from gradient-boosted trees and one from human
listeners. The absolute rank distance sums |rank difference| over bands.
To judge whether a distance is small, compare it with the distances of
every possible ranking to the human one.
"""
import itertools
from collections import Counter
from pathlib import Path

import bandtag
from bandtag.io import load_ranks
from bandtag.metrics import rank_abs_distance

data = Path(bandtag.__file__).parent / "data"
human_name, human = load_ranks(data / "user_friendly_human.ranks.json")
for method in ("em_banded", "xgboost", "human"):
    name, ranks = load_ranks(data / f"user_friendly_{method}.ranks.json")
    print(f"{name:18s} distance to {human_name}: {rank_abs_distance(ranks, human)}")

bands = sorted(human)
spread = Counter(rank_abs_distance(dict(zip(bands, p)), human)
                 for p in itertools.permutations(range(1, len(bands) + 1)))
total = sum(spread.values())
print(f"\ndistances over all {total} rankings of {len(bands)} bands")
at_most = 0
for d in sorted(spread):
    at_most += spread[d]
    print(f"  {d:2d}: {spread[d]:3d}  (share at or below: {at_most / total:.2f})")
