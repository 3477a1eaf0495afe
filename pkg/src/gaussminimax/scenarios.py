"""Experiment driver: exponent sweeps, replacement checks, mean-set tables.

Every row derives its own seed from ``(config seed, n, role)``, so rows can
be computed in any order, or concurrently, with identical results.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .bounds import binary_entropy
from .hypotheses import HypothesisPair, kl_null_vs
from .lrtest import DegenerateLr, calibrate_threshold, estimate_beta
from .maximalset import Status, k_unknown_mean, membership, slack_for

Family = Callable[[int], HypothesisPair]


# -- built-in families ---------------------------------------------------------


def constant_family(lam: float = 1.0, a: float = 0.0) -> Family:
    return lambda n: HypothesisPair.diagonal(np.full(n, lam), np.full(n, a))


def alternating_family(lam1: float = 2.0, lam2: float = 0.5, a: float = 0.0) -> Family:
    def make(n: int) -> HypothesisPair:
        lam = np.where(np.arange(n) % 2 == 0, lam1, lam2)
        return HypothesisPair.diagonal(lam, np.full(n, a))

    return make


def ramp_family(c: float = 1.0, a: float = 0.0) -> Family:
    """Variances ``1 + c * i / n`` for ``i = 1..n``."""
    return lambda n: HypothesisPair.diagonal(1.0 + c * np.arange(1, n + 1) / n, np.full(n, a))


def mean_shift_family(a: float = 1.0) -> Family:
    return lambda n: HypothesisPair.diagonal(np.ones(n), np.full(n, a))


FAMILIES: dict[str, Callable[..., Family]] = {
    "constant": constant_family,
    "alternating": alternating_family,
    "ramp": ramp_family,
    "mean_shift": mean_shift_family,
}


def make_family(name: str, params: dict[str, float] | None = None) -> Family:
    try:
        return FAMILIES[name](**(params or {}))
    except KeyError:
        raise ValueError(f"unknown family {name!r}; choose from {sorted(FAMILIES)}") from None


# -- configuration -------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    params: dict[str, float] = field(default_factory=dict)
    n_list: tuple[int, ...] = (16, 64, 256)
    alpha: float = 0.1
    slack_rule: str = "zero"
    slack_c: float = 1.0
    n_samples: int = 100_000
    seed: int = 0
    cand_family: str | None = None
    cand_params: dict[str, float] = field(default_factory=dict)
    workers: int = 1

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_list)
        if not ns or any(b <= a for a, b in zip(ns, ns[1:])) or ns[0] < 1:
            raise ValueError("n_list must be a strictly increasing list of positive sizes")
        object.__setattr__(self, "n_list", ns)
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        slack_for(self.slack_rule, 1, self.slack_c)

    @classmethod
    def from_mapping(cls, cfg: dict[str, Any]) -> "ExperimentConfig":
        slack = cfg.get("slack", "zero")
        rule, c = "zero", 1.0
        if isinstance(slack, dict):
            rule, c = slack.get("rule", "zero"), float(slack.get("c", 1.0))
        elif isinstance(slack, str):
            rule, _, cs = slack.partition(":")
            c = float(cs) if cs else 1.0
        return cls(
            family=cfg["family"],
            params=dict(cfg.get("params", {})),
            n_list=tuple(cfg["n_list"]),
            alpha=float(cfg["alpha"]),
            slack_rule=rule,
            slack_c=c,
            n_samples=int(cfg.get("samples", 100_000)),
            seed=int(cfg.get("seed", 0)),
            cand_family=cfg.get("cand_family"),
            cand_params=dict(cfg.get("cand_params", {})),
            workers=int(cfg.get("workers", 1)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_mapping(json.loads(Path(path).read_text()))

    def slack(self, n: int) -> float:
        return slack_for(self.slack_rule, n, self.slack_c)


def row_seed(seed: int, n: int, role: int) -> int:
    return int(np.random.SeedSequence([seed, n, role]).generate_state(1, np.uint64)[0])


# -- exponent sweep -------------------------------------------------------------


@dataclass(frozen=True)
class ExponentRow:
    """One size of an exponent sweep; all log quantities divided by ``n``.

    ``ci`` is the 3-standard-error half-width of ``log_beta_hat_per_n``.
    A row is flagged when the pair is degenerate or the estimate had no hits;
    zero-hit rows carry the rule-of-three bound ``ln(3/N)/n``.
    """

    n: int
    kl_per_n: float
    log_beta_hat_per_n: float
    lower_per_n: float
    upper_per_n: float
    ci: float
    hits: int
    flagged: bool
    sandwich_ok: bool


def _exponent_row(family: Family, n: int, cfg: ExperimentConfig) -> ExponentRow:
    pair = family(n)
    D = kl_null_vs(pair).kl
    nan = math.nan
    try:
        th = calibrate_threshold(pair, cfg.alpha, cfg.n_samples, row_seed(cfg.seed, n, 0), workers=cfg.workers)
    except DegenerateLr:
        return ExponentRow(n, D / n, nan, nan, nan, nan, 0, True, True)
    est = estimate_beta(pair, pair, th.gamma, cfg.n_samples, row_seed(cfg.seed, n, 1), workers=cfg.workers)
    lower = -(D + binary_entropy(cfg.alpha)) / (1 - cfg.alpha)
    upper = -th.gamma  # -D + mu0 with mu0 = D - gamma
    if est.hits == 0:
        return ExponentRow(n, D / n, math.log(3.0 / cfg.n_samples) / n, lower / n, upper / n, nan, 0, True, True)
    lo, hi = est.log_interval(3.0)
    ok = lower <= hi and lo <= upper
    return ExponentRow(
        n, D / n, est.log_value / n, lower / n, upper / n, 3.0 * est.rel_err / n, est.hits, False, ok
    )


def run_exponent_sweep(cfg: ExperimentConfig, family: Family | None = None) -> list[ExponentRow]:
    """Divergence, estimated miss exponent and its analytic bounds at each size."""
    family = family or make_family(cfg.family, cfg.params)
    return [_exponent_row(family, n, cfg) for n in cfg.n_list]


# -- replacement check ------------------------------------------------------------


@dataclass(frozen=True)
class ReplacementRow:
    """Candidate miss probability under the reference detector versus its bound.

    ``bound = ln beta_ref + mu0 + log_f / 2``; the check holds when
    ``ln beta_cand <= bound + ci`` with ``ci`` three combined standard
    errors. Non-members make the check vacuous.
    """

    n: int
    status: str
    log_f: float
    slack: float
    vacuous: bool
    log_beta_ref: float
    log_beta_cand: float
    mu0: float
    bound: float
    ci: float
    holds: bool


def replacement_row(ref: HypothesisPair, cand: HypothesisPair, cfg: ExperimentConfig, n: int) -> ReplacementRow:
    slack = cfg.slack(n)
    verdict = membership(ref, cand, slack)
    nan = math.nan
    if not verdict.is_member:
        return ReplacementRow(n, verdict.status.value, verdict.log_f, slack, True, nan, nan, nan, nan, nan, True)
    th = calibrate_threshold(ref, cfg.alpha, cfg.n_samples, row_seed(cfg.seed, n, 2), workers=cfg.workers)
    b_ref = estimate_beta(ref, ref, th.gamma, cfg.n_samples, row_seed(cfg.seed, n, 3), workers=cfg.workers)
    b_cand = estimate_beta(ref, cand, th.gamma, cfg.n_samples, row_seed(cfg.seed, n, 4), workers=cfg.workers)
    mu0 = kl_null_vs(ref).kl - th.gamma
    bound = b_ref.log_value + mu0 + 0.5 * verdict.log_f
    ci = 3.0 * math.hypot(b_ref.rel_err, b_cand.rel_err)
    holds = b_cand.log_value <= bound + ci
    return ReplacementRow(
        n, verdict.status.value, verdict.log_f, slack, False,
        b_ref.log_value, b_cand.log_value, mu0, bound, ci, bool(holds),
    )


def run_replacement_check(
    ref_family: Family, cand_family: Family, cfg: ExperimentConfig
) -> list[ReplacementRow]:
    """Check the reference detector's miss bound for a candidate family at each size."""
    return [replacement_row(ref_family(n), cand_family(n), cfg, n) for n in cfg.n_list]


# -- unknown mean, known covariance ---------------------------------------------------


def run_unknown_mean_demo(
    lambdas: ArrayLike, a: ArrayLike, b_grid: Iterable[ArrayLike], slack: float = 0.0
) -> list[dict[str, Any]]:
    """Tabulate ``K(b)`` and membership for candidate means with ``V = M``.

    With unit variances the rows also carry ``(a, b - a)``, and
    ``identity_ok`` records that ``K = 2 (a, b - a)``.
    """
    lam = np.asarray(lambdas, float)
    a = np.asarray(a, float)
    unit = bool(np.all(lam == 1.0))
    rows = []
    for k, b in enumerate(b_grid):
        b = np.asarray(b, float)
        K = k_unknown_mean(lam, a, b)
        row: dict[str, Any] = {"index": k, "K": K, "log_f": -K, "member": K >= -slack, "slack": slack}
        if unit:
            inner = float(a @ (b - a))
            row["inner_a_shift"] = inner
            row["identity_ok"] = math.isclose(K, 2.0 * inner, rel_tol=1e-10, abs_tol=1e-10)
        rows.append(row)
    return rows


# -- CSV output and the full scenario ----------------------------------------------------


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(rows: Sequence[Any], path: str | Path, header: Sequence[str] | None = None) -> None:
    dicts = [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]
    if header is None:
        header = list(dicts[0]) if dicts else []
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for d in dicts:
            w.writerow([_fmt(d.get(h, "")) for h in header])


EXPONENT_HEADER = [f.name for f in fields(ExponentRow)]
REPLACEMENT_HEADER = [f.name for f in fields(ReplacementRow)]
MEMBERSHIP_HEADER = ["n", "status", "log_f", "slack"]


@dataclass
class ScenarioResult:
    exponent: list[ExponentRow]
    replacement: list[ReplacementRow]
    membership: list[dict[str, Any]]

    @property
    def violations(self) -> list[str]:
        out = []
        for r in self.exponent:
            if not r.flagged and not r.sandwich_ok:
                out.append(f"sandwich violated at n={r.n}")
        for r in self.replacement:
            if not r.vacuous and not r.holds:
                out.append(f"replacement bound violated at n={r.n}")
        return out


def run_scenario(cfg: ExperimentConfig, out_dir: str | Path | None = None) -> ScenarioResult:
    """Run the exponent sweep and the replacement check; optionally write the three CSVs."""
    ref_family = make_family(cfg.family, cfg.params)
    cand_family = make_family(cfg.cand_family, cfg.cand_params) if cfg.cand_family else ref_family
    exponent = run_exponent_sweep(cfg, ref_family)
    replacement = run_replacement_check(ref_family, cand_family, cfg)
    member_rows = [
        {"n": r.n, "status": r.status, "log_f": r.log_f, "slack": r.slack} for r in replacement
    ]
    result = ScenarioResult(exponent, replacement, member_rows)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(exponent, out / "exponent.csv", EXPONENT_HEADER)
        write_csv(replacement, out / "replacement.csv", REPLACEMENT_HEADER)
        write_csv(member_rows, out / "membership.csv", MEMBERSHIP_HEADER)
    return result


__all__ = [
    "ExperimentConfig",
    "ExponentRow",
    "FAMILIES",
    "ReplacementRow",
    "ScenarioResult",
    "Status",
    "make_family",
    "run_exponent_sweep",
    "run_replacement_check",
    "run_scenario",
    "run_unknown_mean_demo",
    "write_csv",
]
