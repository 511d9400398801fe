"""Numerical constants shared across the package.

They are module-level so callers can tune them (``kpartite.config.DENSE_CAP = ...``)
before building states; every function reads them at call time.
"""

#: Amplitudes with smaller magnitude are dropped from sparse pure states.
PRUNE_TOL = 1e-15

#: Allowed deviation from unit norm / unit total weight.
NORM_TOL = 1e-12

#: Renormalisation larger than this is recorded on the state.
RENORM_REPORT_TOL = 1e-9

#: Hermiticity, trace and positivity tolerance for dense density matrices.
DENSE_TOL = 1e-10

#: Largest total Hilbert-space dimension that may be materialised densely.
DENSE_CAP = 4096

#: Largest two-copy dimension (total dimension squared) for the brute-force oracle.
TWO_COPY_CAP = 4096

#: Largest site count for the full proper-subset sum.
MAX_SUBSET_SITES = 24

#: Masks processed per block by the streaming subset accumulator.
SUBSET_CHUNK = 1 << 16

#: Relative violation tolerance: violated iff margin > VIOLATION_RTOL * (1 + |lhs| + |rhs|).
VIOLATION_RTOL = 1e-9

#: QFI eigenvalue pairs whose sum is below this are skipped.
QFI_PAIR_TOL = 1e-12
