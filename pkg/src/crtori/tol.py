"""Default numerical tolerances shared across the float-facing modules."""

EPS_RANK = 1e-9  # relative singular-value cutoff for rank decisions
EPS_EQ = 1e-9  # relative entrywise cutoff for float equality
EPS_POS = 1e-9  # relative eigenvalue cutoff for positive definiteness
EPS_INT = 1e-6  # absolute distance-to-integer cutoff for lattice membership
SUBSPACE_TOL = 1e-8  # principal-angle cutoff for subspace equality
