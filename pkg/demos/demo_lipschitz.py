"""
Auditing a representation map for distance expansion
====================================================

A fair-representation map sends records from the original feature space
into a new space where a downstream model makes its decisions.  The audit
checks the defining requirement: no pair of records may end up further
apart in the mapped space than it was originally (ratios above 1 mean
"similar people were pulled apart").
"""

from fairaudit import CounterRng, audit_map

rng = CounterRng(5)
x = rng.uniforms(1000 * 4).reshape(1000, 4)

# a contraction: project onto the first two coordinates and shrink
mapped = 0.8 * x[:, :2]
rep = audit_map(x, mapped)
print(f"contraction: max ratio {rep.max_ratio:.4f}, "
      f"violations {rep.violation_count}/{rep.pairs_examined} -> "
      f"{'pass' if rep.passed else 'FAIL'}")

# a map that stretches one direction: similar pairs get pulled apart
stretch = x.copy()
stretch[:, 0] *= 3.0
rep = audit_map(x, stretch)
print(f"stretch:     max ratio {rep.max_ratio:.4f}, "
      f"violations {rep.violation_count}/{rep.pairs_examined} -> "
      f"{'pass' if rep.passed else 'FAIL'}")
worst = rep.violations[0]
print(f"  worst pair ({worst.i}, {worst.j}): "
      f"original {worst.d_original:.4f} -> mapped {worst.d_mapped:.4f}")

# probability-vector outputs are compared by total variation distance
logits = rng.uniforms(1000 * 3).reshape(1000, 3)
probs = logits / logits.sum(axis=1, keepdims=True)
rep = audit_map(x, probs, d_mapped="total_variation")
print(f"soft output: max ratio {rep.max_ratio:.4f} -> "
      f"{'pass' if rep.passed else 'FAIL'}")

# beyond ~2M pairs the scan samples uniformly; a sampled max never
# exceeds the exhaustive one
big = rng.uniforms(5000 * 3).reshape(5000, 3)
rep_full = audit_map(big, 1.2 * big, sampling="exhaustive")
rep_samp = audit_map(big, 1.2 * big, seed=99, sample_count=100000)
print(f"exhaustive max {rep_full.max_ratio:.4f} >= "
      f"sampled max {rep_samp.max_ratio:.4f}: "
      f"{rep_samp.max_ratio <= rep_full.max_ratio}")
