"""
Monte Carlo harness for the precision benchmarks:

* K_M = M Var[phi_B] H_alpha against the number of measurements M,
* V_M = M Var[phi_B] swept over the diffusion delta or the photon number N,

with quantum Cramer-Rao reference columns. Each repetition draws its own
stream from ``SeedSequence([master_seed, repetition])`` so results are
reproducible and independent of execution order.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .bayes import DEFAULT_GRID, PriorKind, estimate_prefixes, resolve_prior
from .fockspace import NoiseLevel, ProbeSpec
from .homodyne import LikelihoodModel, fisher_information, sample_homodyne
from .metrology import analytic_qfi, qfi

log = logging.getLogger(__name__)

KM_COLUMNS = ("M", "K_M", "std_error", "cr_ratio_floor")
VM_COLUMNS = ("abscissa", "V_M", "std_error", "cr_coherent", "cr_gauss_noiseless", "cr_gauss_diffused")

FIG3_CASES = ((0.90, np.pi / 18), (0.90, np.pi / 9), (4.12, np.pi / 18), (4.12, np.pi / 9))
FIG3_M = (10, 20, 30, 50, 100, 200, 300)
FIG4_DELTAS = tuple(k * np.pi / 36 for k in range(1, 7))
FIG4_NS = (0.90, 2.0, 4.12, 7.0, 10.0, 14.11)
FIG4_DELTA_CURVES = (0.90, 14.11)
FIG4_N_CURVES = (np.pi / 18, np.pi / 9)


@dataclass(frozen=True)
class RunConfig:
    n: float
    delta: float
    true_phi: float = np.pi / 2
    m_list: tuple[int, ...] = FIG3_M
    repetitions: int = 200
    master_seed: int = 0
    prior_kind: str = PriorKind.UNIFORM.value
    grid: int = DEFAULT_GRID

    def __post_init__(self):
        object.__setattr__(self, "m_list", tuple(int(m) for m in self.m_list))
        object.__setattr__(self, "prior_kind", PriorKind(self.prior_kind).value)
        if not self.n >= 0:
            raise ValueError(f"N must be >= 0, got {self.n}")
        if not self.delta >= 0:
            raise ValueError(f"delta must be >= 0, got {self.delta}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.m_list or min(self.m_list) < 1:
            raise ValueError("every M must be >= 1")

    @property
    def model(self) -> LikelihoodModel:
        return LikelihoodModel.from_mean_photons(self.n, self.delta)


@dataclass(frozen=True)
class CurvePoint:
    abscissa: float
    value: float
    std_error: float
    cr_coherent: float = float("nan")
    cr_gauss_noiseless: float = float("nan")
    cr_gauss_diffused: float = float("nan")
    cr_ratio_floor: float = float("nan")
    extra: dict = field(default_factory=dict, compare=False)


def repetition_rng(master_seed: int, repetition: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, repetition]))


def coherent_qfi(n: float, delta: float) -> float:
    return qfi(ProbeSpec.from_mean_photons("coherent", n), NoiseLevel(delta)).value


def squeezed_qfi(n: float, delta: float) -> float:
    return qfi(ProbeSpec.from_mean_photons("sqvac", n), NoiseLevel(delta)).value


def simulate_estimates(cfg: RunConfig) -> np.ndarray:
    """(repetitions, len(m_list), 2) array of (phi_B, Var[phi_B]).

    Each repetition draws max(M) outcomes once; smaller M use its prefix.
    """
    model = cfg.model
    prior = resolve_prior(cfg.prior_kind, model, cfg.grid)
    m_max = max(cfg.m_list)
    out = np.empty((cfg.repetitions, len(cfg.m_list), 2))
    for r in range(cfg.repetitions):
        sample = sample_homodyne(model, cfg.true_phi, m_max, repetition_rng(cfg.master_seed, r))
        results = estimate_prefixes(model, sample.x, list(cfg.m_list), prior, cfg.grid, cfg.prior_kind)
        out[r] = [(res.phi_b, res.variance) for res in results]
    return out


def _mean_and_se(values: np.ndarray) -> tuple[float, float]:
    r = values.shape[0]
    se = float(np.std(values, ddof=1) / np.sqrt(r)) if r > 1 else 0.0
    return float(np.mean(values)), se


def run_km_curve(cfg: RunConfig) -> list[CurvePoint]:
    h_alpha = coherent_qfi(cfg.n, cfg.delta)
    fisher = float(fisher_information(cfg.model, cfg.true_phi)[0])
    floor = h_alpha / fisher if fisher > 0 else float("inf")
    log.info("K_M curve N=%.4g delta=%.4g: H_alpha=%.6g, homodyne F=%.6g", cfg.n, cfg.delta, h_alpha, fisher)
    est = simulate_estimates(cfg)
    points = []
    for j, m in enumerate(cfg.m_list):
        mean, se = _mean_and_se(est[:, j, 1])
        points.append(CurvePoint(
            abscissa=m, value=m * mean * h_alpha, std_error=m * se * h_alpha,
            cr_coherent=1.0 / h_alpha, cr_ratio_floor=floor,
            extra={"phi_b_mean": float(np.mean(est[:, j, 0])),
                   "phi_b_se": _mean_and_se(est[:, j, 0])[1]},
        ))
    return points


def run_vm_sweep(template: RunConfig, axis: str, values: Iterable[float], m: int = 100) -> list[CurvePoint]:
    """V_M = M Var[phi_B] along ``axis`` ('delta' or 'n'), other settings from ``template``."""
    if axis not in ("delta", "n"):
        raise ValueError(f"sweep axis must be 'delta' or 'n', got {axis!r}")
    values = list(values)
    if not values:
        raise ValueError("sweep grid is empty")
    points = []
    for v in values:
        cfg = replace(template, m_list=(m,), **{axis: float(v)})
        mean, se = _mean_and_se(simulate_estimates(cfg)[:, 0, 1])
        h_alpha = coherent_qfi(cfg.n, cfg.delta)
        h_g0 = analytic_qfi(ProbeSpec.from_mean_photons("sqvac", cfg.n))
        h_g = squeezed_qfi(cfg.n, cfg.delta)
        points.append(CurvePoint(
            abscissa=float(v), value=m * mean, std_error=m * se,
            cr_coherent=1.0 / h_alpha if h_alpha > 0 else float("inf"),
            cr_gauss_noiseless=1.0 / h_g0 if h_g0 > 0 else float("inf"),
            cr_gauss_diffused=1.0 / h_g if h_g > 0 else float("inf"),
        ))
        log.info("V_M sweep %s=%.4g: V=%.6g +- %.2g, 1/H_alpha=%.6g", axis, v, m * mean, m * se, 1 / h_alpha)
    return points


def summarize(points: Sequence[CurvePoint], kind: str = "vm") -> list[dict]:
    """Rows with the fixed column schema of ``kind`` ('km' or 'vm'), sorted by abscissa."""
    if not points:
        raise ValueError("nothing to summarize")
    rows = []
    for p in sorted(points, key=lambda p: p.abscissa):
        if kind == "km":
            rows.append({"M": int(p.abscissa), "K_M": p.value, "std_error": p.std_error,
                         "cr_ratio_floor": p.cr_ratio_floor})
        elif kind == "vm":
            rows.append({"abscissa": p.abscissa, "V_M": p.value, "std_error": p.std_error,
                         "cr_coherent": p.cr_coherent, "cr_gauss_noiseless": p.cr_gauss_noiseless,
                         "cr_gauss_diffused": p.cr_gauss_diffused})
        else:
            raise ValueError(f"unknown table kind {kind!r}")
    return rows


def _fmt(v) -> str:
    return str(v) if isinstance(v, (int, np.integer)) else repr(float(v))


def to_csv(rows: Sequence[dict]) -> str:
    columns = list(rows[0])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    reader = csv.DictReader(io.StringIO(text))
    return [{k: (int(v) if k == "M" else float(v)) for k, v in row.items()} for row in reader]
