"""Three-outcome spin-3/2 POVM on the A-sites, sampled on the stabilizer state."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

import numpy as np

from cmdb_mbqc.lattice import SiteMap
from cmdb_mbqc.pauli import PauliOperator
from cmdb_mbqc.tableau import StabilizerState, project_code_space

TWO_THIRDS = Fraction(2, 3)


class PovmAxis(str, Enum):
    X = "x"
    Y = "y"
    Z = "z"


AXES = (PovmAxis.X, PovmAxis.Y, PovmAxis.Z)

# Pauli letter for sigma_a, and for the operator |0>_a<1| + |1>_a<0| that flips
# the a-basis (sigma_x for z, sigma_z for x and y).
SIGMA = {PovmAxis.X: "X", PovmAxis.Y: "Y", PovmAxis.Z: "Z"}
FLIP = {PovmAxis.X: "Z", PovmAxis.Y: "Z", PovmAxis.Z: "X"}


class PovmError(ValueError):
    pass


def povm_checks(site: tuple[int, int, int], axis: PovmAxis | str, n: int) -> list[PauliOperator]:
    """sigma_a(q1) sigma_a(q2) and sigma_a(q1) sigma_a(q3)."""
    q1, q2, q3 = site
    if len({q1, q2, q3}) != 3:
        raise PovmError("site qubits must be distinct")
    s = SIGMA[PovmAxis(axis)]
    return [
        PauliOperator.from_sparse(n, {q1: s, q2: s}),
        PauliOperator.from_sparse(n, {q1: s, q3: s}),
    ]


def site_weights(state: StabilizerState, site: tuple[int, int, int]) -> dict[PovmAxis, Fraction]:
    """(2/3) <Pi_a> for each axis, Pi_a the projector onto span{|000>_a, |111>_a}."""
    q1, q2, q3 = site
    ops = []
    for a in AXES:
        ops += povm_checks(site, a, state.n)
        ops.append(PauliOperator.from_sparse(state.n, {q2: SIGMA[a], q3: SIGMA[a]}))
    e = state.expectations(ops).reshape(len(AXES), 3)
    return {a: TWO_THIRDS * Fraction(1 + int(e[i].sum()), 4) for i, a in enumerate(AXES)}


def site_probabilities(state: StabilizerState, site: tuple[int, int, int]) -> dict[PovmAxis, Fraction]:
    """Outcome distribution on the AKLT state.

    The weights above sum to the symmetric-subspace weight <Pi_S> of the
    singlet-product state; dividing by it gives the probabilities the POVM has
    on the symmetric (AKLT) state.
    """
    w = site_weights(state, site)
    total = sum(w.values())
    if total == 0:
        raise PovmError("site has no weight in the symmetric subspace")
    return {a: w[a] / total for a in AXES}


def _choose(probs: dict[PovmAxis, Fraction], u: float) -> PovmAxis:
    acc = Fraction(0)
    last = None
    for a in AXES:
        if probs[a] == 0:
            continue
        acc += probs[a]
        last = a
        if u < acc:
            return a
    return last


def sample_site(
    state: StabilizerState,
    site: tuple[int, int, int],
    rng: np.random.Generator | None = None,
    forced_axis: PovmAxis | str | None = None,
) -> tuple[StabilizerState, PovmAxis, Fraction]:
    """Sample (or force) the POVM outcome on one A-site and project onto it.

    A forced outcome reports its true probability; nothing is renormalized.
    One uniform draw is consumed whenever an rng is given, forced or not.
    """
    probs = site_probabilities(state, site)
    u = None if rng is None else float(rng.random())
    if forced_axis is not None:
        axis = PovmAxis(forced_axis)
        if probs[axis] == 0:
            raise PovmError(f"forced axis {axis.value} has probability 0 at site {site}")
    else:
        if rng is None:
            raise PovmError("sampling needs an rng")
        axis = _choose(probs, u)
    state, p = project_code_space(state, povm_checks(site, axis, state.n), log=False)
    if p == 0:
        raise PovmError("projection onto a zero-probability branch")
    if state.history is not None:
        state.history.append(("povm", tuple(site), axis.value))
    return state, axis, probs[axis]


@dataclass
class OutcomeRecord:
    axes: dict[tuple[int, int], PovmAxis] = field(default_factory=dict)
    probabilities: dict[tuple[int, int], Fraction] = field(default_factory=dict)
    site_order: list[tuple[int, int]] = field(default_factory=list)
    seed: int | None = None

    @property
    def total_probability(self) -> Fraction:
        p = Fraction(1)
        for v in self.probabilities.values():
            p *= v
        return p

    def chain_string(self, chain: int) -> str:
        keys = sorted(k for k in self.axes if k[0] == chain)
        return "".join(self.axes[k].value for k in keys)

    def __len__(self) -> int:
        return len(self.axes)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "sites": [
                {
                    "chain": c,
                    "index": i,
                    "axis": self.axes[(c, i)].value,
                    "probability": [self.probabilities[(c, i)].numerator,
                                    self.probabilities[(c, i)].denominator],
                }
                for c, i in self.site_order
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> OutcomeRecord:
        rec = cls(seed=data.get("seed"))
        for s in data["sites"]:
            key = (s["chain"], s["index"])
            rec.site_order.append(key)
            rec.axes[key] = PovmAxis(s["axis"])
            rec.probabilities[key] = Fraction(*s["probability"])
        return rec


def run_all(
    state: StabilizerState,
    site_map: SiteMap,
    rng: np.random.Generator | None = None,
    plan: dict[tuple[int, int], PovmAxis | str] | None = None,
    seed: int | None = None,
) -> tuple[StabilizerState, OutcomeRecord]:
    """POVM on every A-site, chain-major and left to right."""
    record = OutcomeRecord(seed=seed)
    plan = plan or {}
    for key in site_map.site_order():
        site = site_map.site(*key)
        state, axis, p = sample_site(state, site.qubits, rng, plan.get(key))
        record.site_order.append(key)
        record.axes[key] = axis
        record.probabilities[key] = p
    return state, record


def plan_from_strings(strings: list[str] | str) -> dict[tuple[int, int], PovmAxis]:
    """``"xzy"`` or ``["xz", "zy"]`` -> forced-axis plan keyed by (chain, index)."""
    if isinstance(strings, str):
        strings = [strings]
    return {
        (c, i): PovmAxis(ch)
        for c, s in enumerate(strings)
        for i, ch in enumerate(s)
    }
