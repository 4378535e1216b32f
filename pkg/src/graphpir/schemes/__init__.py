"""Retrieval schemes and a small registry that routes names to builders."""

from __future__ import annotations

from typing import Optional

from ..analysis import is_cyclic, is_fully_connected
from ..errors import UnsupportedStructureError
from ..gf import FieldSpec
from ..storage import THREE_PER_DATABASE, StorageSystem
from .base import (
    LITERAL,
    UNIFORM_ENSEMBLE,
    Equation,
    QueryPlan,
    Transcript,
    answer_query,
    decode,
    dumps_transcript,
    linear_system,
    load_transcript,
    run,
    transcript_from_dict,
    transcript_to_dict,
)
from .baseline import plan_download_all, plan_sun_jafar_332
from .cyclic import plan_cyclic
from .fully_connected import decoding_matrix, default_field, plan_fully_connected
from .m3 import plan_m3_example

DOWNLOAD_ALL = "download-all"
SUN_JAFAR_332 = "sun-jafar-332"
CYCLIC = "cyclic"
FULLY_CONNECTED = "fully-connected"
M3_EXAMPLE = "m3-example"

SCHEME_NAMES = (DOWNLOAD_ALL, SUN_JAFAR_332, CYCLIC, FULLY_CONNECTED, M3_EXAMPLE)


def applies(scheme: str, system: StorageSystem) -> bool:
    if scheme == DOWNLOAD_ALL:
        return True
    if scheme == SUN_JAFAR_332:
        return system.params == (3, 2, 2, 3) and is_fully_connected(system)
    if scheme == CYCLIC:
        return is_cyclic(system)
    if scheme == FULLY_CONNECTED:
        return is_fully_connected(system)
    if scheme == M3_EXAMPLE:
        return system == THREE_PER_DATABASE
    raise UnsupportedStructureError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEME_NAMES)}")


def applicable_schemes(system: StorageSystem) -> list[str]:
    """Schemes worth reporting for ``system``.

    The fully-connected entry is listed only for K >= 4, where it is a scheme
    of its own rather than a route to download-all or the cyclic scheme.
    """
    out = [s for s in SCHEME_NAMES if applies(s, system)]
    if FULLY_CONNECTED in out and system.k < 4:
        out.remove(FULLY_CONNECTED)
    return out


def build_plan(
    scheme: str,
    system: StorageSystem,
    desired: int,
    seed: int = 0,
    q: Optional[FieldSpec] = None,
    l: int = 1,
) -> QueryPlan:
    """Build a plan by scheme name.

    ``fully-connected`` routes K=2 to download-all and K=3 to the cyclic
    scheme. ``q`` matters for download-all and fully-connected only; ``l``
    for download-all only (the other schemes fix L).
    """
    if not applies(scheme, system):
        raise UnsupportedStructureError(f"scheme {scheme!r} does not apply to system {system.params}")
    if scheme == FULLY_CONNECTED and system.k == 2:
        scheme = DOWNLOAD_ALL
    elif scheme == FULLY_CONNECTED and system.k == 3:
        scheme = CYCLIC
    if scheme == DOWNLOAD_ALL:
        return plan_download_all(system, desired, l=l, q=q or FieldSpec(2))
    if scheme == SUN_JAFAR_332:
        return plan_sun_jafar_332(desired, seed, system=system)
    if scheme == CYCLIC:
        return plan_cyclic(system, desired, seed)
    if scheme == FULLY_CONNECTED:
        return plan_fully_connected(system, desired, seed, q=q)
    return plan_m3_example(desired, seed, system=system)


__all__ = [
    "LITERAL",
    "UNIFORM_ENSEMBLE",
    "Equation",
    "QueryPlan",
    "Transcript",
    "SCHEME_NAMES",
    "DOWNLOAD_ALL",
    "SUN_JAFAR_332",
    "CYCLIC",
    "FULLY_CONNECTED",
    "M3_EXAMPLE",
    "answer_query",
    "applicable_schemes",
    "applies",
    "build_plan",
    "decode",
    "decoding_matrix",
    "default_field",
    "dumps_transcript",
    "linear_system",
    "load_transcript",
    "plan_cyclic",
    "plan_download_all",
    "plan_fully_connected",
    "plan_m3_example",
    "plan_sun_jafar_332",
    "run",
    "transcript_from_dict",
    "transcript_to_dict",
]
