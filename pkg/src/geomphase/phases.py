"""Geometric phase factors from transported states.

sigma_jk = Phi[<j|phi_k>] with Phi[z] = z/|z| compares the transported state
that started from |k> against the bare reference |j>.  Gauge-invariant
combinations built from them:

* gamma_jk = sigma_jk * sigma_kj   (pair exchange factor),
* gamma_j  = Phi[<j|phi_j>]        (diagonal factor),
* cycle products sigma_{P(k),k} chained around a permutation cycle.

When adiabatic evolution permutes the basis states, the defined entries of
sigma are exactly those pairing each origin with its destination, and the
products obey the permutation identities gamma_12 * gamma_3 = -1
(transposition, one fixed state) and +1 for a full 3-cycle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotAPermutation, NullOverlap

DEFAULT_NULL_TOL = 1e-6
DEFAULT_FIDELITY_THRESHOLD = 0.99


def principal_angle(value: float) -> float:
    """Map an angle to the principal branch (-pi, pi]."""
    a = math.remainder(float(value), 2.0 * math.pi)
    return math.pi if a == -math.pi else a


def phi_of(z: complex, null_tol: float = DEFAULT_NULL_TOL) -> complex:
    """Unit phase factor z/|z|.

    Raises NullOverlap when |z| < null_tol: the corresponding geometric
    phase is undefined there, which is meaningful (it is exactly the
    situation the off-diagonal factors were introduced for).
    """
    if null_tol <= 0:
        raise ValueError("null_tol must be positive")
    mag = abs(z)
    if mag < null_tol:
        raise NullOverlap(f"|overlap| = {mag:.3e} below null tolerance {null_tol:.1e}")
    return z / mag


def _amplitudes(state):
    return state.amplitudes if hasattr(state, "amplitudes") else np.asarray(state)


def sigma_jk(reference_j: np.ndarray, transported_k, null_tol: float = DEFAULT_NULL_TOL) -> complex:
    """Phi[<j|phi_k>] for a bare reference vector and a transported state."""
    z = complex(np.vdot(np.asarray(reference_j), _amplitudes(transported_k)))
    return phi_of(z, null_tol)


def gamma_offdiag(s_jk: complex, s_kj: complex):
    """Pair exchange factor gamma = sigma_jk sigma_kj and its principal arg."""
    g = s_jk * s_kj
    return g, principal_angle(np.angle(g))


def gamma_diag(reference_j, transported_j, null_tol: float = DEFAULT_NULL_TOL):
    """Diagonal factor Phi[<j|phi_j>] and its principal arg."""
    g = sigma_jk(reference_j, transported_j, null_tol)
    return g, principal_angle(np.angle(g))


def gamma_cycle(s_ab: complex, s_bc: complex, s_ca: complex):
    """Ordered product of three phase factors closing a cycle, with arg."""
    g = s_ab * s_bc * s_ca
    return g, principal_angle(np.angle(g))


def detect_permutation(final_overlap_moduli: np.ndarray, threshold: float = DEFAULT_FIDELITY_THRESHOLD):
    """Assign each transported state to its destination basis state.

    final_overlap_moduli[k, j] = |<j|phi_k>| (row per origin k); rows must be
    near unit norm.  Each origin goes to the j of maximal overlap; the
    assignment must be a bijection with every selected |overlap|^2 >=
    threshold, else NotAPermutation is raised (the signature of
    non-adiabatic evolution).

    Returns (perm, min_fidelity) with perm[k] = destination index (0-based).
    """
    m = np.asarray(final_overlap_moduli, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("overlap matrix must be square")
    rows = (m**2).sum(axis=1)
    if np.any(np.abs(rows - 1.0) > 1e-6):
        raise ValueError("overlap rows must be near unit norm")
    perm = m.argmax(axis=1)
    fid = (m.max(axis=1) ** 2).astype(float)
    if len(set(perm.tolist())) != len(perm):
        raise NotAPermutation(
            f"greedy assignment {perm.tolist()} is not bijective", fidelities=fid
        )
    if fid.min() < threshold:
        raise NotAPermutation(
            f"min fidelity {fid.min():.4f} below threshold {threshold}", fidelities=fid
        )
    return perm, float(fid.min())


def permutation_cycles(perm: np.ndarray):
    """Disjoint cycles of a permutation given as perm[k] = destination."""
    seen = [False] * len(perm)
    cycles = []
    for k in range(len(perm)):
        if seen[k]:
            continue
        cyc = [k]
        seen[k] = True
        j = int(perm[k])
        while j != k:
            cyc.append(j)
            seen[j] = True
            j = int(perm[j])
        cycles.append(cyc)
    return cycles


@dataclass
class PhaseReport:
    """Endpoint phase factors, permutation and fidelities of one run.

    sigma holds only the defined entries, keyed by 1-based (j, k) for
    Phi[<j|phi_k>].  gamma12/gamma3/gamma321 are None when the overlaps they
    need are null.  permutation maps 1-based origin -> destination and is
    None when the final states do not realize one.
    """

    sigma: dict = field(default_factory=dict)
    gamma12: complex | None = None
    Gamma12: float | None = None
    gamma3: complex | None = None
    Gamma3: float | None = None
    product_arg: float | None = None
    gamma321: complex | None = None
    Gamma321: float | None = None
    permutation: dict | None = None
    adiabatic: bool = False
    min_fidelity: float = 0.0
    null_overlaps: list = field(default_factory=list)
    fidelities: list = field(default_factory=list)

    def to_json_dict(self):
        def c2j(z):
            return None if z is None else [z.real, z.imag]

        return {
            "sigma": {f"{j}{k}": c2j(v) for (j, k), v in sorted(self.sigma.items())},
            "gamma12": c2j(self.gamma12),
            "Gamma12": self.Gamma12,
            "gamma3": c2j(self.gamma3),
            "Gamma3": self.Gamma3,
            "product_arg": self.product_arg,
            "gamma321": c2j(self.gamma321),
            "Gamma321": self.Gamma321,
            "permutation": (
                None
                if self.permutation is None
                else {str(k): v for k, v in sorted(self.permutation.items())}
            ),
            "adiabatic": self.adiabatic,
            "min_fidelity": self.min_fidelity,
            "null_overlaps": [list(p) for p in self.null_overlaps],
            "fidelities": list(self.fidelities),
        }


def permutation_invariant_check(report: PhaseReport) -> float:
    """arg(gamma12 * gamma3); the adiabatic transposition prediction is pi."""
    if report.gamma12 is None or report.gamma3 is None:
        raise NullOverlap("gamma12 and gamma3 must both be defined")
    return principal_angle(np.angle(report.gamma12 * report.gamma3))


def build_phase_report(
    final_columns: np.ndarray,
    null_tol: float = DEFAULT_NULL_TOL,
    threshold: float = DEFAULT_FIDELITY_THRESHOLD,
) -> PhaseReport:
    """Assemble the endpoint PhaseReport from transported basis columns.

    final_columns[:, k] is the transported state that started from bare
    |k+1>; rows are bare-basis components, so final_columns[j, k] = <j+1|phi_{k+1}>.
    Only the triplet block (first three rows/columns) enters the phase
    factors; a decoupled singlet column is ignored.
    """
    phi = np.asarray(final_columns, dtype=complex)[:3, :3]
    rep = PhaseReport()

    for j in range(3):
        for k in range(3):
            z = phi[j, k]
            if abs(z) >= null_tol:
                rep.sigma[(j + 1, k + 1)] = z / abs(z)
            else:
                rep.null_overlaps.append((j + 1, k + 1))

    if (1, 2) in rep.sigma and (2, 1) in rep.sigma:
        rep.gamma12, rep.Gamma12 = gamma_offdiag(rep.sigma[(1, 2)], rep.sigma[(2, 1)])
    if (3, 3) in rep.sigma:
        rep.gamma3 = rep.sigma[(3, 3)]
        rep.Gamma3 = principal_angle(np.angle(rep.gamma3))
    if rep.gamma12 is not None and rep.gamma3 is not None:
        rep.product_arg = permutation_invariant_check(rep)

    moduli = np.abs(phi.T)  # moduli[k, j] = |<j|phi_k>|
    rep.fidelities = [float(x) for x in (moduli.max(axis=1) ** 2)]
    try:
        perm, min_fid = detect_permutation(moduli, threshold)
        rep.permutation = {k + 1: int(perm[k]) + 1 for k in range(3)}
        rep.min_fidelity = min_fid
        rep.adiabatic = True
    except NotAPermutation as exc:
        rep.permutation = None
        rep.min_fidelity = float(min(exc.fidelities)) if exc.fidelities is not None else 0.0
        rep.adiabatic = False
        return rep

    cycles = permutation_cycles(perm)
    if len(cycles) == 1 and len(cycles[0]) == 3:
        # chain the defined entries sigma_{P(k),k} around the realized cycle
        sigmas = []
        for k in cycles[0]:
            key = (int(perm[k]) + 1, k + 1)
            if key not in rep.sigma:
                sigmas = None
                break
            sigmas.append(rep.sigma[key])
        if sigmas is not None:
            rep.gamma321, rep.Gamma321 = gamma_cycle(*sigmas)
    return rep
