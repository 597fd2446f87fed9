"""Versioned npz checkpoints with bit-exact float64 round-trip."""

import json

import numpy as np

FORMAT_VERSION = 1


def save(path, sections, meta=None):
    """Write a checkpoint.

    ``sections`` maps a section name to an iterable of (key, array); arrays
    are stored as ``<section>/<key>``. ``meta`` is an arbitrary JSON-able dict.
    """
    payload = {}
    for section, items in sections.items():
        for key, arr in items:
            payload[f"{section}/{key}"] = np.asarray(arr)
    header = {"format_version": FORMAT_VERSION, "meta": meta or {}}
    payload["__header__"] = np.frombuffer(
        json.dumps(header, sort_keys=True).encode(), dtype=np.uint8
    )
    np.savez(path, **payload)


def load(path):
    """Returns (meta, {section: {key: array}})."""
    with np.load(path) as data:
        header = json.loads(bytes(data["__header__"]).decode())
        if header["format_version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint version {header['format_version']}")
        sections = {}
        for full_key in data.files:
            if full_key == "__header__":
                continue
            section, key = full_key.split("/", 1)
            sections.setdefault(section, {})[key] = data[full_key]
    return header["meta"], sections


def restore_params(net, arrays):
    """Copy checkpointed arrays into a net exposing param_items()."""
    seen = set()
    for key, param, _ in net.param_items():
        if key not in arrays:
            raise KeyError(f"checkpoint missing parameter {key}")
        src = arrays[key]
        if src.shape != param.shape:
            raise ValueError(f"shape mismatch for {key}: {src.shape} vs {param.shape}")
        param[...] = src
        seen.add(key)
    extra = set(arrays) - seen
    if extra:
        raise KeyError(f"checkpoint has unknown parameters: {sorted(extra)}")
