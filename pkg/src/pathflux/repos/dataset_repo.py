import logging
from pathlib import Path

import numpy as np
import pandas as pd
from wireup import service

from pathflux.common.errors import DatasetValidationError, NotFoundError
from pathflux.model.run_config import RunConfig
from pathflux.model.scm import VARIABLES, Dataset

logger = logging.getLogger(__name__)

COLUMNS = [*VARIABLES, "y"]

Codebook = dict[int, tuple[object, ...]]


def flatten_w(frame: pd.DataFrame, w_columns: list[str]) -> tuple[np.ndarray, Codebook]:
    """Encode the joint levels of several W columns as one code, in sorted level order."""
    missing = [c for c in w_columns if c not in frame.columns]
    if missing:
        msg = f"w_columns {missing} not in the data header {list(frame.columns)}"
        raise DatasetValidationError(msg)
    if frame[w_columns].isna().any(axis=None):
        row = int(np.flatnonzero(frame[w_columns].isna().any(axis=1).to_numpy())[0])
        msg = f"empty value in one of {w_columns}"
        raise DatasetValidationError(msg, row=row)
    keys = list(frame[w_columns].itertuples(index=False, name=None))
    levels = sorted(set(keys))
    position = {level: i for i, level in enumerate(levels)}
    codes = np.array([position[key] for key in keys], dtype=np.int64)
    return codes, dict(enumerate(levels))


def _codes(frame: pd.DataFrame, name: str) -> np.ndarray:
    values = pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=np.float64)
    bad = np.flatnonzero(~np.isfinite(values) | (values != np.round(values)) | (values < 0))
    if bad.size:
        row = int(bad[0])
        msg = f"{name}={frame[name].iloc[row]!r} is not a non-negative integer code"
        raise DatasetValidationError(msg, row=row)
    return values.astype(np.int64)


@service
class DatasetRepo:
    """CSV datasets with header ``w,a,z,m,y`` (or the configured W columns in place of ``w``)."""

    def read(self, path: Path, cfg: RunConfig) -> Dataset:
        if not path.is_file():
            msg = f"data file {str(path)!r} not found"
            raise NotFoundError(msg)
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, na_values=[""])
        required = ["a", "z", "m", "y"] + (cfg.w_columns or ["w"])
        missing = [c for c in required if c not in frame.columns]
        if missing:
            msg = f"data header {list(frame.columns)} lacks column(s) {missing}"
            raise DatasetValidationError(msg)
        if frame.empty:
            msg = "data file has a header but no rows"
            raise DatasetValidationError(msg)

        codebook = None
        if cfg.w_columns:
            w, codebook = flatten_w(frame, cfg.w_columns)
        else:
            w = _codes(frame, "w")
        a, z, m = (_codes(frame, name) for name in ("a", "z", "m"))
        y = pd.to_numeric(frame["y"], errors="coerce").to_numpy(dtype=np.float64)

        cards = cfg.cardinalities.cards() if cfg.cardinalities else None
        data = Dataset.from_columns(w, a, z, m, y, cards=cards, codebook=codebook)
        logger.info("dataset read", extra={"path": str(path), "n": data.n, "cards": data.cards.shape})
        return data

    def write(self, data: Dataset, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame(dict(zip(COLUMNS, (*data.columns(), data.y), strict=True)))
        frame.to_csv(path, index=False, lineterminator="\n")
        logger.info("dataset written", extra={"path": str(path), "n": data.n})
