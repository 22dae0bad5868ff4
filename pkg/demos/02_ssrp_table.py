"""
Twenty-one social science replications
======================================

The bundled fixture holds correlations and sample sizes.  ``analyze``
turns each pair into the usual summary measures; the output is what the
``repsuccess analyze`` command prints.
"""
from repsuccess.io_cli import analyze, bundled_fixture, load_studies, write_rows

studies = load_studies(bundled_fixture())
print(len(studies), "studies of kind", studies.kind)

rows = analyze(studies, gamma=1 / 3)
cols = ("c", "d", "Q", "minbf_o", "minbf_r", "p_s", "bf_s", "bf_r")
print(f"{'study':32s}" + "".join(f"{c:>10s}" for c in cols))
for r in rows:
    print(f"{r.id:32s}" + "".join(f"{getattr(r, c):>10s}" for c in cols))

# an empty BF_S means no level gamma makes the replication a success
print("no BF_S:", [r.id for r in rows if not r.bf_s_exists])

# the same rows as JSON
write_rows(rows[:2], "-", "json")
