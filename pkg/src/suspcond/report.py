"""``key=value`` output helpers shared by the CLI commands."""
from __future__ import annotations

import numbers


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, numbers.Integral):
        return str(int(v))
    if isinstance(v, numbers.Real):
        # repr of a float is locale independent and round-trips
        return repr(float(v))
    return str(v)


def format_kv(items: dict) -> str:
    return "".join(f"{k}={format_value(v)}\n" for k, v in items.items())


def parse_kv(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#") or "=" not in line:
            continue
        k, v = line.split("=", 1)
        out[k] = v
    return out
