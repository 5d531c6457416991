"""Property values: normalization, equality keys and the cross-type sort order."""

from __future__ import annotations

import math
from typing import Any, Iterable, Mapping

from .errors import InvalidValue

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1

_BOOL, _NUM, _TEXT, _LIST, _ABSENT = range(5)


def _normalize_scalar(value: Any) -> Any:
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise InvalidValue(f"integer {value} does not fit in 64 bits")
        return int(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise InvalidValue(f"non-finite float {value!r} is not storable")
        return float(value)
    if isinstance(value, str):
        return value
    # numpy scalars and friends
    if hasattr(value, "item") and not hasattr(value, "__len__"):
        return _normalize_scalar(value.item())
    raise InvalidValue(f"unsupported property value {value!r} ({type(value).__name__})")


def normalize_value(value: Any) -> Any:
    """Return the canonical stored form of ``value``.

    Lists (and tuples, numpy arrays) become tuples of scalars so records stay
    immutable and hashable.
    """
    if isinstance(value, (list, tuple)) or (hasattr(value, "tolist") and hasattr(value, "__len__")):
        items = value.tolist() if hasattr(value, "tolist") else value
        out = []
        for item in items:
            if isinstance(item, (list, tuple)):
                raise InvalidValue("nested lists are not supported as property values")
            out.append(_normalize_scalar(item))
        return tuple(out)
    return _normalize_scalar(value)


def normalize_properties(props: Mapping[str, Any] | None) -> dict[str, Any]:
    if not props:
        return {}
    out = {}
    for key, value in props.items():
        if not isinstance(key, str) or not key:
            raise InvalidValue(f"property keys must be non-empty text, got {key!r}")
        out[key] = normalize_value(value)
    return out


def value_key(value: Any) -> tuple:
    """Hashable equality key; bool never equals a number, 1 == 1.0."""
    if isinstance(value, bool):
        return (_BOOL, value)
    if isinstance(value, (int, float)):
        return (_NUM, value)
    if isinstance(value, str):
        return (_TEXT, value)
    if isinstance(value, tuple):
        return (_LIST, tuple(value_key(v) for v in value))
    raise InvalidValue(f"unsupported property value {value!r}")


def sort_key(value: Any) -> tuple:
    """Total order: bool < numbers < text < lists, absent (None) last."""
    if value is None:
        return (_ABSENT,)
    if isinstance(value, bool):
        return (_BOOL, int(value))
    if isinstance(value, (int, float)):
        return (_NUM, value)
    if isinstance(value, str):
        return (_TEXT, value)
    if isinstance(value, tuple):
        return (_LIST, tuple(sort_key(v) for v in value))
    raise InvalidValue(f"unsupported property value {value!r}")


def props_key(props: Mapping[str, Any]) -> tuple:
    """Canonical, order-independent key of a whole property map."""
    return tuple(sorted((k, value_key(v)) for k, v in props.items()))


def labels_key(labels: Iterable[str]) -> tuple[str, ...]:
    return tuple(sorted(labels))
