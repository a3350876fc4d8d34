"""Bundled demonstration catalogs, regenerated by scripts/gen_fixtures.py.

us:  continental airport inventory (2577 airports, 2076 with fuel prices)
uc1: fleet patrol over 25 forest cells around Purdue University Airport
uc2: Purdue-to-Indianapolis errand flight with zones and a weather band
uc3: 12-airport ferry corridor with contrasting fuel prices
"""

from __future__ import annotations

from pathlib import Path

from ..errors import InvalidInputError

FIXTURE_NAMES = ("us", "uc1", "uc2", "uc3")


def fixture_manifest(name: str) -> Path:
    """Manifest path of a bundled catalog."""
    if name not in FIXTURE_NAMES:
        raise InvalidInputError(f"no fixture catalog {name!r}; choose from {FIXTURE_NAMES}")
    return Path(__file__).resolve().parent / name / "manifest.json"
