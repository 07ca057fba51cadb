"""Heisenberg clusters of three and four spins and their closed-form eigenstates.

Three qubits: XXZ couplings J/4 on bonds (1,2), (2,3) and J/2 on (1,3), with
an optional field M/2 sum sigma^z.  Four qubits: isotropic chain 1-2-3 with
coupling J/4 and a star bond J_s/4 between qubits 2 and 4.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Literal

import numpy as np

from .errors import ArgumentError, ClosedFormSingularityError, ValidityRangeError
from .measures import MeasureReport
from .states import PAULIS, PAULI_Z, Observable, PureState, canonical_phase, operator_on

#: below this |J| the four-qubit state Phi_2 is replaced by its J -> 0+ limit
PHI2_LIMIT_J = 1e-12


def _finite(**values: float) -> None:
    for name, v in values.items():
        if not np.isfinite(v):
            raise ArgumentError(f"{name} must be finite, got {v!r}")


def _heisenberg(i: int, j: int, n: int, zz: float = 1.0) -> np.ndarray:
    xx = operator_on({i: PAULIS[0], j: PAULIS[0]}, n)
    yy = operator_on({i: PAULIS[1], j: PAULIS[1]}, n)
    return xx + yy + zz * operator_on({i: PAULIS[2], j: PAULIS[2]}, n)


def _from_terms(terms: dict[str, complex]) -> PureState:
    n = len(next(iter(terms)))
    v = np.zeros(2**n, dtype=complex)
    for bits, amp in terms.items():
        v[int(bits, 2)] += amp
    return PureState.normalized(v)


# three qubits ---------------------------------------------------------------


@dataclass(frozen=True)
class Model3Params:
    J: float = 1.0
    delta: float = 0.0
    M: float = 0.0

    def __post_init__(self):
        _finite(J=self.J, delta=self.delta, M=self.M)

    @property
    def eta(self) -> float:
        return float(np.sqrt(12.0 + self.delta * (self.delta - 4.0)))

    @property
    def chi(self) -> float:
        return self.eta + self.delta - 2.0


def hamiltonian3(p: Model3Params) -> Observable:
    h = p.J / 4 * (_heisenberg(1, 2, 3, p.delta) + _heisenberg(2, 3, 3, p.delta))
    h = h + p.J / 2 * _heisenberg(1, 3, 3, p.delta)
    h = h + p.M / 2 * sum(operator_on({q: PAULI_Z}, 3) for q in (1, 2, 3))
    return Observable(h)


def _magnetization(bits: str) -> int:
    return sum(1 if b == "0" else -1 for b in bits)


def _require_regular(p: Model3Params) -> None:
    # eta > |delta - 2| for real delta, so chi > 0; the guard covers round-off
    if p.eta <= 1e-12 or abs(p.chi) <= 1e-12:
        raise ClosedFormSingularityError(
            f"closed forms are singular at delta={p.delta!r}; use eigensystem3_numeric"
        )


def _psi5_terms(p: Model3Params, flip: bool) -> dict[str, complex]:
    eta, chi = p.eta, p.chi
    s = np.sqrt(chi) / (2 * np.sqrt(eta))
    t = {"011": s, "101": -4 / chi * s, "110": s}
    return {_flip(k) if flip else k: v for k, v in t.items()}


def _psi7_terms(p: Model3Params, flip: bool) -> dict[str, complex]:
    eta, chi = p.eta, p.chi
    s = np.sqrt(2) / (np.sqrt(eta) * np.sqrt(chi))
    t = {"011": s, "101": chi / 2 * s, "110": s}
    return {_flip(k) if flip else k: v for k, v in t.items()}


def _flip(bits: str) -> str:
    return bits.translate(str.maketrans("01", "10"))


def eigensystem3_analytic(p: Model3Params) -> list[tuple[float, PureState]]:
    """The eight closed-form eigenpairs (E_k, psi_k), k = 1..8.

    States carry the canonical phase (largest amplitude real positive).
    Energies include the field shift M/2 times the magnetization.
    """
    _require_regular(p)
    J, d, eta = p.J, p.delta, p.eta
    r = 1 / np.sqrt(2)
    table = [
        (d * J, {"111": 1.0}),
        (d * J, {"000": 1.0}),
        (-J * (1 + d / 2), {"011": -r, "110": r}),
        (-J * (1 + d / 2), {"001": -r, "100": r}),
        (-J / 4 * (eta + d - 2), _psi5_terms(p, False)),
        (-J / 4 * (eta + d - 2), _psi5_terms(p, True)),
        (J / 4 * (eta - d + 2), _psi7_terms(p, False)),
        (J / 4 * (eta - d + 2), _psi7_terms(p, True)),
    ]
    out = []
    for energy, terms in table:
        shift = p.M / 2 * _magnetization(next(iter(terms)))
        out.append((float(energy + shift), canonical_phase(_from_terms(terms))))
    return out


def eigensystem3_numeric(p: Model3Params) -> list[tuple[float, PureState]]:
    """Dense eigensolve, ascending energies, canonical phases."""
    w, v = np.linalg.eigh(hamiltonian3(p).entries)
    return [(float(e), canonical_phase(PureState.normalized(v[:, k]))) for k, e in enumerate(w)]


def psi(k: int, p: Model3Params) -> PureState:
    """Eigenstate psi_k of the three-qubit model, k in 1..8."""
    if not 1 <= k <= 8:
        raise ArgumentError(f"eigenstate index {k} outside 1..8")
    return eigensystem3_analytic(p)[k - 1][1]


def psi5(p: Model3Params) -> PureState:
    return psi(5, p)


def psi6(p: Model3Params) -> PureState:
    return psi(6, p)


def psi7(p: Model3Params) -> PureState:
    return psi(7, p)


def psi8(p: Model3Params) -> PureState:
    return psi(8, p)


def superposition78(p: Model3Params) -> PureState:
    """(psi_7 + psi_8) / sqrt(2), built from the unphased closed forms."""
    _require_regular(p)
    terms = _psi7_terms(p, False) | _psi7_terms(p, True)
    return _from_terms(terms)


# four qubits ----------------------------------------------------------------


@dataclass(frozen=True)
class Model4Params:
    J: float = 2.0
    Js: float = 2.0

    def __post_init__(self):
        _finite(J=self.J, Js=self.Js)

    @cached_property
    def delta(self) -> float:
        J, Js = self.J, self.Js
        return float(np.sqrt(9 * J**2 - 4 * J * Js + 4 * Js**2))

    def _need_delta(self) -> float:
        if self.delta <= 1e-12:
            raise ClosedFormSingularityError(f"delta vanishes at J={self.J!r}, Js={self.Js!r}")
        return self.delta

    @property
    def mu2(self) -> float:
        d = self._need_delta()
        return float(1 / np.sqrt(3 + (9 * self.J - 2 * self.Js) / d))

    @property
    def a1(self) -> float:
        return float(1 / (2 * np.sqrt(2) * self.mu2))

    @property
    def b1(self) -> float:
        d = self._need_delta()
        den = np.sqrt(2) * self.mu2 * (3 * self.J + d)
        if abs(den) <= 1e-12:
            raise ClosedFormSingularityError("b1 denominator vanishes")
        return float((self.Js - self.J) / den)

    @property
    def c1(self) -> float:
        d = self._need_delta()
        J, Js = self.J, self.Js
        # sqrt(18J^2 - 8JJs + 8Js^2) = sqrt(2) delta
        return float(self.mu2 * (3 * J + 2 * Js + d) / (2 * np.sqrt(18 * J**2 - 8 * J * Js + 8 * Js**2)))

    @property
    def a2(self) -> float:
        d = self._need_delta()
        if abs(self.J) < PHI2_LIMIT_J:
            raise ClosedFormSingularityError("a2 diverges as J -> 0; phi2 uses the limit state")
        return float(np.sqrt(4 + (-self.J + 2 * self.Js + d) ** 2 / (2 * self.J**2)))


def hamiltonian4(p: Model4Params) -> Observable:
    h = p.J / 4 * (_heisenberg(1, 2, 4) + _heisenberg(2, 3, 4)) + p.Js / 4 * _heisenberg(2, 4, 4)
    return Observable(h)


def phi1(p: Model4Params) -> PureState:
    a, b, c = p.a1, p.b1, p.c1
    return _from_terms({"1110": a, "1011": b, "0111": -c, "1101": -c})


def phi2(p: Model4Params) -> PureState:
    p._need_delta()
    if abs(p.J) < PHI2_LIMIT_J:
        r = 1 / np.sqrt(2)
        return _from_terms({"0101": -r, "1010": r})
    a2 = p.a2
    g = p.J * a2 / (2 * p.delta)
    return _from_terms(
        {"0011": -1 / a2, "0110": 1 / a2, "1001": -1 / a2, "1100": 1 / a2, "0101": -g, "1010": g}
    )


# closed-form measures -------------------------------------------------------

Which = Literal["psi5", "psi7", "sup78", "phi1", "phi2"]


def _report(pairs: dict, ics: dict, n: int, tangle: float | None = None, q: float | None = None) -> MeasureReport:
    full = {(i, j): float(pairs.get((i, j), 0.0)) for i, j in combinations(range(1, n + 1), 2)}
    ics = {k: float(v) for k, v in ics.items()}
    if q is None:
        q = float(np.mean(np.square(list(ics.values()))))
    return MeasureReport(pair_concurrences=full, i_concurrences=ics, global_q=float(q), tangle3=tangle)


def _psi57_measures(p: Model3Params, sign: float) -> MeasureReport:
    # sign = -1 for psi5, +1 for psi7
    _require_regular(p)
    eta, d = p.eta, p.delta
    c12 = 2 / eta
    c13 = 4 / (eta**2 + sign * (d - 2) * eta)
    ic1 = np.sqrt(1 + 4 / eta**2 - sign * (d - 2) / eta) / np.sqrt(2)
    ic2 = 2 * np.sqrt(2) / eta
    return _report({(1, 2): c12, (2, 3): c12, (1, 3): c13}, {1: ic1, 2: ic2, 3: ic1}, 3, tangle=0.0)


def q_superposition78(delta: float) -> float:
    """Global entanglement of (psi_7 + psi_8)/sqrt(2) as a function of delta."""
    p = Model3Params(1.0, delta)
    eta, chi = p.eta, p.chi
    return float(1 - 8 / (3 * eta**2) - 16 / (3 * eta**2 * chi**2))


def _sup78_measures(p: Model3Params) -> MeasureReport:
    _require_regular(p)
    eta, chi = p.eta, p.chi
    # amplitude moduli of the superposition: x on |011>,|110>,|100>,|001>; y on |101>,|010>
    x2, y2 = 1 / (eta * chi), chi / (4 * eta)
    xy = np.sqrt(x2 * y2)
    c12 = 2 * min(2 * xy, y2)
    c13 = abs(abs(4 * x2 - y2) - y2)
    ic1 = np.sqrt(max(0.0, 1 - 16 * x2 * y2))
    ic2 = np.sqrt(max(0.0, 1 - 16 * x2**2))
    tau = max(0.0, ic1**2 - c12**2 - c13**2)
    return _report(
        {(1, 2): c12, (2, 3): c12, (1, 3): c13},
        {1: ic1, 2: ic2, 3: ic1},
        3,
        tangle=tau,
        q=q_superposition78(p.delta),
    )


def _phi1_measures(p: Model4Params) -> MeasureReport:
    J, Js = p.J, p.Js
    d = p._need_delta()
    k = 1 / (2 * np.sqrt(2))
    c12 = k * np.sqrt(max(0.0, 1 + 8 * J * (J - Js) / d**2 + (-5 * J + 2 * Js) / d))
    c13 = k * np.sqrt(max(0.0, 1 - 4 * J**2 / d**2 + (-J + 2 * Js) / d))
    c14 = (3 * J + 2 * Js + d) / (4 * d)
    c24 = abs((J - Js) * (3 + (9 * J - 2 * Js) / d) / (6 * J + 2 * d))
    pairs = {(1, 2): c12, (2, 3): c12, (1, 3): c13, (1, 4): c14, (3, 4): c14, (2, 4): c24}
    # W-type state: every i-concurrence is carried by pair concurrences
    ics = {i: np.sqrt(sum(c**2 for pr, c in pairs.items() if i in pr)) for i in range(1, 5)}
    q = (5 - 12 * J**2 / d**2 + (-J + 2 * Js) / d) / 8
    return _report(pairs, ics, 4, q=q)


def _phi2_c13(p: Model4Params) -> float:
    J, Js = p.J, p.Js
    on_j_axis, on_js_axis = J == 2, Js == 2
    if (on_j_axis and Js >= 1) or (on_js_axis and J <= 4):
        return 0.0
    if not ((on_j_axis and Js < 2) or (on_js_axis and J > 2)):
        raise ValidityRangeError(
            f"C13 = C24 of phi2 has a closed form only for J=2, Js<2 or Js=2, J>2; got J={J!r}, Js={Js!r}"
        )
    d = p.delta
    s = d * (J - 2 * Js)
    root = np.sqrt(max(0.0, d**2 + s - 4 * J**2)) - np.sqrt(max(0.0, d**2 - s - 4 * J**2))
    return max(0.0, root / (np.sqrt(2) * d))


def _phi2_measures(p: Model4Params) -> MeasureReport:
    J = p.J
    d = p._need_delta()
    if abs(J) < PHI2_LIMIT_J:
        c12 = 0.0
    else:
        c12 = max(0.0, 2 * J / d - 2 / p.a2**2)
    c13 = _phi2_c13(p)
    pairs = {(1, 2): c12, (1, 4): c12, (2, 3): c12, (3, 4): c12, (1, 3): c13, (2, 4): c13}
    return _report(pairs, {i: 1.0 for i in range(1, 5)}, 4, q=1.0)


def closed_form_measures(which: Which, params: Model3Params | Model4Params) -> MeasureReport:
    """Measure report assembled from closed-form expressions only.

    phi2's C13 and C24 exist in closed form only on the J=2 and Js=2 axes;
    elsewhere a ValidityRangeError is raised.
    """
    if which in ("psi5", "psi7", "sup78") and not isinstance(params, Model3Params):
        raise ArgumentError(f"{which} needs Model3Params")
    if which in ("phi1", "phi2") and not isinstance(params, Model4Params):
        raise ArgumentError(f"{which} needs Model4Params")
    if which == "psi5":
        return _psi57_measures(params, -1.0)
    if which == "psi7":
        return _psi57_measures(params, 1.0)
    if which == "sup78":
        return _sup78_measures(params)
    if which == "phi1":
        return _phi1_measures(params)
    if which == "phi2":
        return _phi2_measures(params)
    raise ArgumentError(f"no closed forms for {which!r}")


def state_for(which: str, params: Model3Params | Model4Params) -> PureState:
    builders = {"psi5": psi5, "psi6": psi6, "psi7": psi7, "psi8": psi8, "sup78": superposition78, "phi1": phi1, "phi2": phi2}
    if which not in builders:
        raise ArgumentError(f"unknown model state {which!r}")
    return builders[which](params)
