"""Channel models and the report records exchanged with the command line."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .moments import (
    BudgetError, exact_moment_conjugate, exact_moment_independent,
    exact_moment_rotated, limit_moment,
)
from .stinespring import ChannelError, input_rank

__all__ = ["KINDS", "ChannelModel", "MomentReport", "SpectrumReport", "fraction_str",
           "parse_fraction", "group_multiplicities"]

KINDS = ("rotated", "independent", "conjugate", "generalized")


def fraction_str(x: Fraction | None) -> str | None:
    if x is None:
        return None
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s) -> Fraction | None:
    return None if s is None or s == "" else Fraction(s)


@dataclass(frozen=True)
class ChannelModel:
    """
    ``kind`` is one of ``rotated``, ``independent``, ``conjugate``, ``generalized``.

    ``t`` is used by the generalized model only. The rotated model takes an
    ``nk x nk`` input, the rank-one projector by default.
    """
    kind: str
    n: int
    k: int
    t: Fraction | None = None
    x: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ChannelError(f"unknown model {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.n < 1 or self.k < 1:
            raise ChannelError("n and k must be positive")
        if self.kind == "generalized":
            if self.t is None:
                raise ChannelError("the generalized model needs t")
            t = self.t if not isinstance(self.t, float) else Fraction(self.t).limit_denominator(10 ** 9)
            object.__setattr__(self, "t", Fraction(t))
            input_rank(self.n, self.k, self.t)
        elif self.t is not None:
            object.__setattr__(self, "t", None)
        if self.x is not None:
            if self.kind != "rotated":
                raise ChannelError("an explicit input is only supported by the rotated model")
            if np.shape(self.x) != (self.n * self.k,) * 2:
                raise ChannelError(f"input must be {self.n * self.k} x {self.n * self.k}")

    @property
    def rank(self) -> int:
        """Input-projector rank ``p_n`` of the generalized model."""
        return input_rank(self.n, self.k, self.t)

    @property
    def output_dim(self) -> int:
        return self.n if self.kind == "rotated" else self.n * self.n

    def with_n(self, n: int) -> ChannelModel:
        return replace(self, n=n)

    def input_matrix(self) -> np.ndarray:
        if self.x is not None:
            return np.asarray(self.x)
        x = np.zeros((self.n * self.k,) * 2)
        x[0, 0] = 1
        return x

    def exact_moment(self, p: int) -> Fraction:
        """Exact ``E[tr(Z^p)]``; raises :class:`BudgetError` when out of reach."""
        if self.kind == "rotated":
            return exact_moment_rotated(self.n, self.k, p, self.x)
        if self.kind == "independent":
            return exact_moment_independent(self.n, self.k, p)
        if self.kind == "conjugate":
            return exact_moment_conjugate(self.n, self.k, p)
        raise BudgetError("no exact moment formula for the generalized model")

    def limit_moment(self, p: int, regime: str = "II") -> Fraction:
        return limit_moment(self.kind, self.n, self.k, p, self.t, regime)


@dataclass
class MomentReport:
    model: str
    n: int
    k: int
    t: Fraction | None
    p: int
    exact: Fraction | None
    asymptotic: Fraction | None
    regime: str = "II"
    mc: object = None  # McEstimate
    seed: int | None = None
    note: str | None = None

    def to_json(self) -> dict:
        out = {
            "model": self.model, "n": self.n, "k": self.k, "t": fraction_str(self.t),
            "p": self.p, "exact": fraction_str(self.exact),
            "asymptotic": fraction_str(self.asymptotic), "regime": self.regime,
            "mc": None,
        }
        if self.mc is not None:
            out["mc"] = dict(self.mc.to_json(), seed=self.seed)
        if self.note:
            out["note"] = self.note
        return out

    CSV_FIELDS = ("model", "n", "k", "t", "p", "exact", "asymptotic", "regime",
                  "mc_mean", "mc_stderr", "mc_samples", "seed")

    def csv_row(self) -> dict:
        j = self.to_json()
        mc = j["mc"] or {}
        row = {f: j.get(f) for f in self.CSV_FIELDS[:8]}
        row.update(mc_mean=mc.get("mean"), mc_stderr=mc.get("stderr"),
                   mc_samples=mc.get("samples"), seed=mc.get("seed"))
        return {k: "" if v is None else v for k, v in row.items()}

    @classmethod
    def from_json(cls, obj: dict) -> MomentReport:
        from ..montecarlo import McEstimate

        mc = obj.get("mc")
        return cls(obj["model"], int(obj["n"]), int(obj["k"]), parse_fraction(obj.get("t")),
                   int(obj["p"]), parse_fraction(obj.get("exact")),
                   parse_fraction(obj.get("asymptotic")), obj.get("regime", "II"),
                   McEstimate(float(mc["mean"]), float(mc["stderr"]), int(mc["samples"])) if mc else None,
                   mc.get("seed") if mc else None, obj.get("note"))


def group_multiplicities(values, rtol: float = 1e-6) -> list[tuple[float, int]]:
    """Runs of (descending) values equal within ``rtol``, as ``(value, multiplicity)``."""
    out = []
    for v in values:
        v = float(v)
        if out and abs(v - out[-1][0]) <= rtol * max(abs(v), abs(out[-1][0]), 1e-300):
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((v, 1))
    return out


@dataclass
class SpectrumReport:
    model: str
    n: int
    k: int
    t: Fraction | None
    eigenvalues: list[float]
    stderr: list[float]
    predicted: list[Fraction]
    samples: int
    seed: int | None = None
    hayden: dict | None = None  # {"min_overlap", "all_hold"}

    def multiplicities(self) -> list[tuple[float, int]]:
        return group_multiplicities(self.eigenvalues)

    def to_json(self) -> dict:
        out = {
            "model": self.model, "n": self.n, "k": self.k, "t": fraction_str(self.t),
            "samples": self.samples, "seed": self.seed,
            "eigenvalues": self.eigenvalues, "stderr": self.stderr,
            "predicted": [fraction_str(x) for x in self.predicted],
            "multiplicities": [[v, m] for v, m in self.multiplicities()],
        }
        if self.hayden is not None:
            out["hayden"] = self.hayden
        return out

    CSV_FIELDS = ("model", "n", "k", "t", "rank", "eigenvalue", "stderr", "predicted",
                  "hayden_min_overlap", "hayden_holds")

    def csv_rows(self) -> list[dict]:
        rows = []
        for i, (e, s) in enumerate(zip(self.eigenvalues, self.stderr)):
            pred = self.predicted[i] if i < len(self.predicted) else Fraction(0)
            rows.append({
                "model": self.model, "n": self.n, "k": self.k,
                "t": fraction_str(self.t) or "", "rank": i + 1, "eigenvalue": e,
                "stderr": s, "predicted": fraction_str(pred),
                "hayden_min_overlap": "" if self.hayden is None else self.hayden["min_overlap"],
                "hayden_holds": "" if self.hayden is None else self.hayden["all_hold"],
            })
        return rows

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=self.CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        w.writerows(self.csv_rows())
        return buf.getvalue()
