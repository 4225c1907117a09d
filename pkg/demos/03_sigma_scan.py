"""How the answer depends on the noise scale.

The in-segment noise sigma is a hyper-parameter.  Too small and every
wiggle becomes a segment; too large and real steps get absorbed.  Scanning
the evidence over sigma shows that the simple successive-difference
estimate lands close to the evidence maximum.
"""

import numpy as np

from bpcr.hyperparams import estimate_moments, evidence_scan
from bpcr.synthgen import generate

y, truth = generate("gm")
hp = estimate_moments(y)
points = evidence_scan(y, hp, np.linspace(0.1, 1.0, 19))
best = max(points, key=lambda p: p.log_evidence)

print(f"true sigma {truth.noise_scale}, estimate {hp.sigma:.3f}, evidence maximum at {best.sigma:.3f}\n")
print(" sigma   log P(y|sigma)  k_hat")
for p in points:
    bar = "#" * max(0, int((p.log_evidence - best.log_evidence + 40) / 2))
    print(f" {p.sigma:5.2f}  {p.log_evidence:12.2f}  {p.k_hat:5d}  {bar}")
