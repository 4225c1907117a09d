"""Checking the fast recursion against brute force.

For short series every segmentation can be listed explicitly.  The dynamic
program must reproduce the evidence, the segment-count posterior and the
regression curve of that enumeration up to rounding.
"""

import numpy as np

from bpcr.dp import regress
from bpcr.oracle import compare, enumerate_posterior
from bpcr.pipeline import resolve_hyper
from bpcr.segment_evidence import gaussian_moments

rng = np.random.default_rng(0)
y = np.repeat([0.0, 2.0, 1.0], [4, 3, 5]) + rng.normal(0, 0.3, 12)
hp = resolve_hyper(y)
mt = gaussian_moments(y, hp)

fast = regress(y, mt, hp)
slow = enumerate_posterior(mt)
print(f"{sum(slow.counts.values())} segmentations enumerated for n={y.size}")
print(f"log evidence: recursion {fast.log_evidence:.12f}, enumeration {slow.log_evidence:.12f}")
for key, dev in compare(fast, slow).items():
    print(f"  {key:20s} max relative deviation {dev:.1e}")
