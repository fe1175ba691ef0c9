"""Run a family of test functions through one inequality and fit its constants.

Catalogs:

* ``poincare``: lhs = mu|f - mu f|^q, mass 0 (so d_fit = 0);
* ``ubound``: lhs = mu(g'(N)/N^2 |f|^q) over exterior-cutoff functions;
* ``logsobolev``: lhs = mu(|f|^q |log(|f|^q / mu|f|^q)|^beta).

Confidence intervals come from a block bootstrap with block length
ceil(len / ESS).  Linear functionals are resampled through per-block sums;
the nonlinear lhs of poincare and logsobolev reweight the states directly,
on a chain thinned to at most ``NONLINEAR_CAP`` states.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..errors import InvalidParameter
from ..measures.quadrature import BoltzmannMeasure
from ..measures.sampler import Chain, mcmc_sample
from .estimators import (
    _check_q,
    beta_kernel,
    check_support,
    entropy_from_parts,
    entropy_parts,
    entropy_weighted,
    eta_values,
    f_values,
    grad_norm_q,
    lq_dev_weighted,
)
from .fit import fit_constants, is_feasible
from .functions import TestFunction, apply_exterior_cutoff, base_catalog

CATALOGS = ("poincare", "ubound", "logsobolev")
RESAMPLES = 200
NONLINEAR_CAP = 200_000
CI_LEVEL = 0.95


@dataclass
class InequalityReport:
    catalog: str
    q: float
    seed: int
    rows: list = field(default_factory=list)
    c_fit: Optional[float] = None
    d_fit: Optional[float] = None
    bootstrap_ci: dict = field(default_factory=dict)
    beta: Optional[float] = None
    chain: dict = field(default_factory=dict)
    resamples: int = RESAMPLES

    @property
    def feasible(self) -> bool:
        if self.c_fit is None:
            return not self.rows
        return is_feasible([(r["lhs"], r["energy"], r["mass"]) for r in self.rows], self.c_fit, self.d_fit)

    def summary(self) -> dict:
        return {
            "catalog": self.catalog,
            "q": self.q,
            "beta": self.beta,
            "seed": self.seed,
            "c_fit": self.c_fit,
            "d_fit": self.d_fit,
            "ci": {k: list(v) for k, v in self.bootstrap_ci.items()},
            "resamples": self.resamples,
            "feasible": self.feasible,
            "functions": len(self.rows),
        }

    def to_dict(self) -> dict:
        d = self.summary()
        d["rows"] = [dict(r) for r in self.rows]
        d["chain"] = dict(self.chain)
        return d

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["name", "lhs", "energy", "mass"])
        for r in self.rows:
            w.writerow([r["name"], repr(r["lhs"]), repr(r["energy"]), repr(r["mass"])])
        return buf.getvalue()


def catalog_functions(measure: BoltzmannMeasure, catalog: str, seed: int = 0) -> list[TestFunction]:
    if catalog not in CATALOGS:
        raise InvalidParameter(f"catalog must be one of {CATALOGS}, got {catalog!r}")
    funcs = base_catalog(measure.group, seed)
    if catalog == "ubound":
        funcs = [apply_exterior_cutoff(f, measure.group) for f in funcs]
    return funcs


def _block_layout(length: int, ess: float) -> tuple[int, int]:
    block = max(1, math.ceil(length / max(ess, 1.0)))
    return block, max(length // block, 1)


def _block_sums(v: np.ndarray, block: int, n_blocks: int) -> np.ndarray:
    return v[: block * n_blocks].reshape(n_blocks, block).sum(1)


def run_catalog(
    measure: BoltzmannMeasure,
    q: float,
    catalog_name: str,
    chain: Optional[Chain] = None,
    count: int = 100_000,
    seed: int = 0,
    beta: float = 1.0,
    functions: Optional[Sequence[TestFunction]] = None,
    resamples: int = RESAMPLES,
) -> InequalityReport:
    """Evaluate lhs, energy and mass for every test function, fit (c, d), bootstrap CIs."""
    q = _check_q(q)
    if catalog_name not in CATALOGS:
        raise InvalidParameter(f"catalog must be one of {CATALOGS}, got {catalog_name!r}")
    if chain is None:
        chain = mcmc_sample(measure, count, seed)
    funcs = list(catalog_functions(measure, catalog_name, seed) if functions is None else functions)
    report = InequalityReport(
        catalog=catalog_name,
        q=q,
        seed=int(seed),
        beta=beta if catalog_name == "logsobolev" else None,
        chain=chain.summary(),
        resamples=resamples,
    )
    if not funcs:
        return report

    G = measure.group
    kernel = beta_kernel(beta) if catalog_name == "logsobolev" else None
    eta = eta_values(chain, measure) if catalog_name == "ubound" else None
    per_state = []
    for f in funcs:
        fv = f_values(chain, f)
        en = grad_norm_q(chain, G, f, q)
        ms = np.abs(fv) ** q
        if catalog_name == "poincare":
            lhs, lin_lhs = lq_dev_weighted(fv, q), None
            ms = np.zeros_like(fv)
        elif catalog_name == "ubound":
            check_support(chain, G, fv)
            lin_lhs = eta * ms
            lhs = float(lin_lhs.mean())
        else:
            lhs, lin_lhs = entropy_weighted(fv, q, kernel), None
        report.rows.append({"name": f.name, "lhs": float(lhs), "energy": float(en.mean()), "mass": float(ms.mean())})
        per_state.append((fv, lin_lhs, en, ms))

    rows = [(r["lhs"], r["energy"], r["mass"]) for r in report.rows]
    report.c_fit, report.d_fit = fit_constants(rows)
    if resamples > 0:
        report.bootstrap_ci = _bootstrap(chain, per_state, catalog_name, q, kernel, resamples, seed)
    return report


def _bootstrap(chain, per_state, catalog, q, kernel, resamples, seed) -> dict:
    length = len(chain)
    block, n_blocks = _block_layout(length, chain.ess)
    stride = max(1, math.ceil(length / NONLINEAR_CAP))
    t_block, t_blocks = _block_layout(length // stride, chain.ess / stride)
    used = block * n_blocks

    sums = []
    for fv, lin_lhs, en, ms in per_state:
        entry = {
            "energy": _block_sums(en, block, n_blocks),
            "mass": _block_sums(ms, block, n_blocks),
        }
        if lin_lhs is not None:
            entry["lhs"] = _block_sums(lin_lhs, block, n_blocks)
        else:
            entry["fv"] = fv[::stride][: t_block * t_blocks]
            if catalog == "logsobolev":
                entry["parts"] = entropy_parts(entry["fv"], q)
        sums.append(entry)

    rng = np.random.default_rng([int(seed), 0xB007])
    cs, ds = [], []
    for _ in range(resamples):
        counts = np.bincount(rng.integers(0, n_blocks, n_blocks), minlength=n_blocks) / used
        t_w = None
        rows = []
        for entry in sums:
            e = float(counts @ entry["energy"])
            m = float(counts @ entry["mass"])
            if "lhs" in entry:
                lhs = float(counts @ entry["lhs"])
            else:
                if t_w is None:
                    tc = np.bincount(rng.integers(0, t_blocks, t_blocks), minlength=t_blocks)
                    t_w = np.repeat(tc / (t_block * t_blocks), t_block)
                if catalog == "poincare":
                    lhs = lq_dev_weighted(entry["fv"], q, t_w)
                else:
                    lhs = entropy_from_parts(entry["parts"], kernel, t_w)
            rows.append((lhs, e, m))
        c, d = fit_constants(rows)
        cs.append(c)
        ds.append(d)
    lo, hi = 100 * (1 - CI_LEVEL) / 2, 100 * (1 + CI_LEVEL) / 2
    return {
        "c": (float(np.percentile(cs, lo)), float(np.percentile(cs, hi))),
        "d": (float(np.percentile(ds, lo)), float(np.percentile(ds, hi))),
    }
