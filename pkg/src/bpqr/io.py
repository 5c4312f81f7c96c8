"""File formats: panel CSV ingestion, draws CSV, and JSON sidecars.

Panel CSV contract: header ``id,t,y,<covariate names...>``, rows grouped
contiguously by id and sorted by t within id. Draws CSV: one row per kept
draw, columns ``beta_1..k, zeta_*, sigma_alpha2[, alpha_1..n]``. Floats are
written with round-trip repr so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, DataError
from .model import PanelData, PosteriorDraws, build_panel, compute_mundlak_means


def _fmt(x: float) -> str:
    return repr(float(x))


def ingest_panel_csv(path, mundlak_cols=None) -> PanelData:
    """Parse a panel CSV into PanelData with intercept and Mundlak means.

    Raises DataError naming the offending file line for bad outcomes,
    non-numeric covariates, duplicate (id, t) pairs, unsorted t, or
    non-contiguous id blocks.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if len(header) < 3 or header[0] != "id" or header[1] != "t" or header[2] != "y":
            raise DataError(f"{path}: header must start with id,t,y")
        covnames = header[3:]
        if not covnames:
            raise DataError(f"{path}: no covariate columns")

        ids, ts, ys, rows = [], [], [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            ids.append(row[0])
            try:
                ts.append(int(row[1]))
            except ValueError:
                raise DataError(f"{path}:{lineno}: t must be an integer") from None
            if row[2] not in ("0", "1"):
                raise DataError(f"{path}:{lineno}: y must be 0 or 1, got {row[2]!r}")
            ys.append(int(row[2]))
            vals = np.empty(len(covnames))
            for j, cell in enumerate(row[3:]):
                try:
                    vals[j] = float(cell)
                except ValueError:
                    raise DataError(f"{path}:{lineno}: column {covnames[j]!r} "
                                    f"is not numeric: {cell!r}") from None
                if not np.isfinite(vals[j]):
                    raise DataError(f"{path}:{lineno}: column {covnames[j]!r} "
                                    "must be finite")
            rows.append(vals)

    if not rows:
        raise DataError(f"{path}: no data rows")
    ids = np.asarray(ids)
    ts = np.asarray(ts)

    seen_done = set()
    prev_id = None
    prev_t = None
    for i, (ident, t) in enumerate(zip(ids, ts)):
        lineno = i + 2
        if ident != prev_id:
            if ident in seen_done:
                raise DataError(f"{path}:{lineno}: id {ident!r} appears in "
                                "non-contiguous blocks")
            if prev_id is not None:
                seen_done.add(prev_id)
            prev_id = ident
            prev_t = t
        else:
            if t == prev_t:
                raise DataError(f"{path}:{lineno}: duplicate (id, t) = ({ident!r}, {t})")
            if t < prev_t:
                raise DataError(f"{path}:{lineno}: t not sorted within id {ident!r}")
            prev_t = t

    panel = build_panel(ids, np.asarray(ys), np.vstack(rows),
                        colnames=covnames, mundlak_cols=mundlak_cols)
    return panel


def apply_preprocessing(panel: PanelData, demean=(), scale=None) -> tuple:
    """Demean and/or rescale covariate columns, then recompute Mundlak means.

    Returns the transformed panel and a record of the applied operations.
    """
    scale = dict(scale or {})
    X = panel.X.copy()
    record = {"demean": {}, "scale": {}}
    for name in demean:
        if name not in panel.colnames[1:]:
            raise ConfigError(f"cannot demean unknown column {name!r}")
        j = panel.colnames.index(name)
        mean = float(X[:, j].mean())
        X[:, j] -= mean
        record["demean"][name] = mean
    for name, factor in scale.items():
        if name not in panel.colnames[1:]:
            raise ConfigError(f"cannot scale unknown column {name!r}")
        j = panel.colnames.index(name)
        X[:, j] *= float(factor)
        record["scale"][name] = float(factor)
    out = PanelData(ids=panel.ids, lengths=panel.lengths, y=panel.y, X=X,
                    colnames=panel.colnames, mundlak_cols=panel.mundlak_cols)
    return compute_mundlak_means(out), record


def write_panel_csv(path, ids_rows, ts, y, covariates, covnames) -> None:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "t", "y"] + list(covnames))
        for i in range(len(ids_rows)):
            writer.writerow([ids_rows[i], ts[i], int(y[i])]
                            + [_fmt(v) for v in covariates[i]])


def write_draws_csv(path, draws: PosteriorDraws) -> None:
    path = Path(path)
    names = draws.param_names()
    if draws.alpha is not None:
        names = names + [f"alpha_{i + 1}" for i in range(draws.alpha.shape[1])]
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(names)
        base = draws.param_matrix()
        for m in range(draws.kept):
            row = [_fmt(v) for v in base[m]]
            if draws.alpha is not None:
                row += [_fmt(v) for v in draws.alpha[m]]
            writer.writerow(row)


def read_draws_csv(path) -> PosteriorDraws:
    """Load a draws CSV back into a PosteriorDraws (meta sidecar optional)."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty draws file") from None
        cols = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields")
            try:
                cols.append([float(c) for c in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric draw value") from None
    if not cols:
        raise DataError(f"{path}: no draws")
    matrix = np.asarray(cols)

    beta_ix = [j for j, n in enumerate(header) if n.startswith("beta_")]
    zeta_ix = [j for j, n in enumerate(header) if n.startswith("zeta_")]
    alpha_ix = [j for j, n in enumerate(header) if n.startswith("alpha_")]
    sig_ix = [j for j, n in enumerate(header) if n == "sigma_alpha2"]
    if not beta_ix or not sig_ix:
        raise DataError(f"{path}: missing beta_* or sigma_alpha2 columns")

    meta = {}
    meta_path = path.with_name(path.name.replace("draws_", "meta_")).with_suffix(".json")
    if meta_path != path and meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    return PosteriorDraws(
        beta=matrix[:, beta_ix],
        zeta=matrix[:, zeta_ix] if zeta_ix else np.zeros((matrix.shape[0], 0)),
        sigma_alpha_sq=matrix[:, sig_ix[0]],
        alpha=matrix[:, alpha_ix] if alpha_ix else None,
        beta_names=[header[j] for j in beta_ix],
        zeta_names=[header[j] for j in zeta_ix],
        meta=meta,
    )


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")


def quantile_tag(p: float) -> str:
    return f"{p:g}"
