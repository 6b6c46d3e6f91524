import json

import numpy as np


def _default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if hasattr(o, "to_dict"):
        return o.to_dict()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def dumps(obj, **kw) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip float repr."""
    kw.setdefault("indent", 2)
    return json.dumps(obj, default=_default, sort_keys=True, allow_nan=True, **kw)
