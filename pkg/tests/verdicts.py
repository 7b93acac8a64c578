"""Collects one PASS/FAIL line per acceptance criterion for the run summary."""

LINES = []


def verdict(cid: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {cid}: {detail}"
    LINES.append(line)
    print(line)
    return ok
