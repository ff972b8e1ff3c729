"""Generic functions and classes.

.. testsetup::

    from boxchain.generic import *
"""
import hashlib
from typing import Iterable, List, Tuple

from boxchain.constants import SIGNIFICANT_DIGITS


def format_number(value: float) -> str:
    """Format a number with 12 significant digits, locale-independent.

    >>> format_number(0.2240418076553646)
    '0.224041807655'
    >>> format_number(4.144653167389282)
    '4.14465316739'
    >>> format_number(2)
    '2'
    >>> format_number(2.061153622438558e-09)
    '2.06115362244e-09'
    """
    return "{:.{digits}g}".format(value, digits=SIGNIFICANT_DIGITS)


def name_value(name: str, value) -> str:
    """Format one ``name=value`` output line.

    >>> name_value("attack_success_prob", 4.5399929762484854e-05)
    'attack_success_prob=4.53999297625e-05'
    >>> name_value("boxers", "4 7 11")
    'boxers=4 7 11'
    """
    if isinstance(value, float):
        value = format_number(value)
    return "{}={}".format(name, value)


def parse_pairs(text: str, item_separator=",", pair_separator=":") -> List[Tuple[str, str]]:
    """Parse a list of pairs like ``1:0.5,2:0.5``.

    >>> parse_pairs("1:0.5, 2:0.5")
    [('1', '0.5'), ('2', '0.5')]
    >>> parse_pairs("4=0.2,5=0.8", pair_separator="=")
    [('4', '0.2'), ('5', '0.8')]
    >>> parse_pairs("")
    []
    >>> parse_pairs("1:0.5,2")
    Traceback (most recent call last):
      ...
    ValueError: Expected <key>:<value>, got '2'
    """
    pairs = []
    for item in text.split(item_separator):
        clean_item = item.strip()
        if not clean_item:
            continue
        key, separator, value = clean_item.partition(pair_separator)
        if not separator or not key.strip() or not value.strip():
            raise ValueError("Expected <key>{}<value>, got {!r}".format(pair_separator, clean_item))
        pairs.append((key.strip(), value.strip()))
    return pairs


def sha256_digest(*parts: bytes) -> bytes:
    """Return the SHA-256 digest of the concatenated parts.

    >>> sha256_digest(b"box", b"chain").hex()[:16]
    '19715dccdd719310'
    """
    hasher = hashlib.sha256()
    for part in parts:
        hasher.update(part)
    return hasher.digest()


def pack_ids(ids: Iterable[int]) -> bytes:
    """Serialize integers as 8-byte big-endian words.

    >>> pack_ids([1, 256]).hex()
    '00000000000000010000000000000100'
    """
    return b"".join(int(value).to_bytes(8, "big", signed=False) for value in ids)


def ceil_div(numerator: int, denominator: int) -> int:
    """Integer division rounding up.

    >>> ceil_div(20, 4)
    5
    >>> ceil_div(21, 4)
    6
    """
    return -(-numerator // denominator)


def pretty_exception(err: Exception, message: str):
    """Return a pretty error message with the full path of the Exception."""
    return "{} ({}.{}: {})".format(message, err.__class__.__module__, err.__class__.__name__, str(err))
