"""Access to the shipped tables (index sets, published values, schedules)."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources


@lru_cache(maxsize=None)
def _load(name: str) -> dict:
    return json.loads(resources.files("mvmourre").joinpath(f"data/{name}").read_text())


def golden() -> dict:
    return _load("golden.json")


def sigma_table(kappa: int, n: int) -> tuple:
    try:
        return tuple(_load("sigma_tables.json")["tables"][str(kappa)][str(n)])
    except KeyError:
        raise KeyError(f"no index set shipped for kappa={kappa}, band {n}") from None
