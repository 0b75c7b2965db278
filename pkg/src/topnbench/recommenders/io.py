"""Versioned model persistence: fitted estimators round-trip through .npz."""

import io
import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

FORMAT_VERSION = 1

#: Fitted attributes saved per estimator class, in order.
_ARRAY_ATTRS = ("user_factors_", "item_factors_", "item_counts_")
_CSR_ATTRS = ("weighted_", "similarity_")
_SCALAR_ATTRS = ("n_users_", "n_items_")


def save_model(model, path) -> None:
    """Write a fitted recommender to a single versioned .npz artifact."""
    from . import ALGORITHM_CLASSES  # late import avoids a cycle

    class_tag = {cls: tag for tag, cls in ALGORITHM_CLASSES.items()}.get(type(model))
    if class_tag is None:
        raise ValueError(f"unknown recommender class {type(model).__name__}")
    if not hasattr(model, "n_items_"):
        raise ValueError("model is not fitted")

    meta = {
        "format_version": FORMAT_VERSION,
        "algorithm": class_tag,
        "params": model.get_params(),
        "scalars": {name: int(getattr(model, name)) for name in _SCALAR_ATTRS},
    }
    arrays = {"meta": np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8)}
    for name in _ARRAY_ATTRS:
        if hasattr(model, name):
            arrays[name] = np.asarray(getattr(model, name))
    for name in _CSR_ATTRS:
        if hasattr(model, name):
            mat = getattr(model, name).tocsr()
            arrays[f"{name}:data"] = mat.data
            arrays[f"{name}:indices"] = mat.indices
            arrays[f"{name}:indptr"] = mat.indptr
            arrays[f"{name}:shape"] = np.asarray(mat.shape)

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.BytesIO()
    np.savez_compressed(buf, **arrays)
    path.write_bytes(buf.getvalue())


def load_model(path):
    """Reconstruct a fitted recommender saved by :func:`save_model`."""
    from . import ALGORITHM_CLASSES

    with np.load(Path(path)) as npz:
        meta = json.loads(bytes(npz["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(
                f"unsupported model format version {meta.get('format_version')!r}"
            )
        cls = ALGORITHM_CLASSES[meta["algorithm"]]
        model = cls(**meta["params"])
        for name, value in meta["scalars"].items():
            setattr(model, name, value)
        for name in _ARRAY_ATTRS:
            if name in npz:
                setattr(model, name, npz[name])
        for name in _CSR_ATTRS:
            if f"{name}:data" in npz:
                mat = sp.csr_matrix(
                    (npz[f"{name}:data"], npz[f"{name}:indices"], npz[f"{name}:indptr"]),
                    shape=tuple(npz[f"{name}:shape"]),
                )
                setattr(model, name, mat)
    return model
