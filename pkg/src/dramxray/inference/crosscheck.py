"""Agreement among the three boundary-discovery techniques.

AIB and row-copy test every adjacent row pair, so a boundary one of them reports and the
other does not is a CONFLICT. Retention only sees polarity changes, so its silence proves
nothing, but a retention boundary the full-coverage techniques miss is a CONFLICT too.
"""

from __future__ import annotations

FULL_COVERAGE = ("aib", "rowcopy")


def cross_check(techniques: dict) -> dict:
    present = {k: set(v) for k, v in techniques.items() if v is not None}
    full = [k for k in FULL_COVERAGE if k in present]
    every = sorted(set().union(*present.values())) if present else []
    rows = {}
    for b in every:
        claims = sorted(k for k, v in present.items() if b in v)
        missing = [k for k in full if b not in present[k]]
        if missing:
            status = "CONFLICT"
        elif len(claims) >= 2:
            status = "CONFIRMED"
        else:
            status = "SINGLE-SOURCE"
        rows[str(b)] = {"status": status, "techniques": claims}
    verdict = "CONFLICT" if any(r["status"] == "CONFLICT" for r in rows.values()) else "CONSISTENT"
    counts = {}
    for r in rows.values():
        counts[r["status"]] = counts.get(r["status"], 0) + 1
    return {"verdict": verdict, "boundaries": rows, "counts": counts, "techniques": sorted(present)}
