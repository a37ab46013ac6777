"""Impedance-domain model of a transmitter / surface cascade / receiver link.

The whole wireless system is one linear N-port: transmitter antennas, the
elements of each reconfigurable surface in order, then receiver antennas.
Its impedance matrix is held in partitioned form. The channel expressions
here map that partition plus the surface load impedances to the end-to-end
voltage-transfer channel matrix under progressively stronger assumptions:

1. no feedback into the transmitter and none out of the receiver
   (Z_TI = Z_TR = Z_IR = 0),
2. no propagation against the cascade direction between surfaces
   (upper off-diagonal blocks of Z_II are zero),
3. consecutive surfaces only (Z_II is block bidiagonal),
4. matched, uncoupled transmitter and receiver arrays (Z_TT = Z_RR = z0*I),
5. matched, uncoupled surface arrays (each diagonal block of Z_II is z0*I),
6. the transmitter reaches only the first surface and the receiver hears
   only the last one (all other Z_IT / Z_RI blocks and Z_RT are zero).

Assumptions are explicit flags on the network object; a model raises
AssumptionViolated instead of silently zeroing blocks it was not given.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolated,
    DimensionMismatch,
    OpenCircuitSingularity,
    SingularDiagonalBlock,
    SingularMatrix,
)

DEFAULT_Z0 = 50.0
CONDITION_CAP = 1e12

ALL_ASSUMPTIONS = frozenset({1, 2, 3, 4, 5, 6})

# Tolerance, relative to z0, when verifying that a block asserted zero or
# matched actually is.
_BLOCK_TOL = 1e-10


@dataclass(frozen=True)
class Dimensions:
    """Port counts of the cascade: n_t transmit, n_r receive, l surfaces of n_i elements."""

    n_t: int
    n_r: int
    n_i: int
    l: int

    def __post_init__(self):
        for name in ("n_t", "n_r", "n_i", "l"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise DimensionMismatch(f"{name} must be a positive integer, got {value!r}")

    @property
    def n_ports(self) -> int:
        return self.n_t + self.l * self.n_i + self.n_r


def _as_complex(a, name: str, shape: tuple[int, int]) -> np.ndarray:
    arr = np.asarray(a, dtype=complex)
    if arr.shape != shape:
        raise DimensionMismatch(f"{name} must have shape {shape}, got {arr.shape}")
    return arr


def _max_abs(a: np.ndarray) -> float:
    return float(np.abs(a).max()) if a.size else 0.0


@dataclass(frozen=True)
class MultiportNetwork:
    """Partitioned impedance matrix of the full link plus asserted assumptions.

    Blocks follow the transmitter / surfaces / receiver split: z_ii is the
    (l*n_i) x (l*n_i) surface-to-surface block, z_it and z_ri are the stacked
    transmitter-to-surface and surface-to-receiver blocks.
    """

    dims: Dimensions
    z_tt: np.ndarray
    z_ti: np.ndarray
    z_tr: np.ndarray
    z_it: np.ndarray
    z_ii: np.ndarray
    z_ir: np.ndarray
    z_rt: np.ndarray
    z_ri: np.ndarray
    z_rr: np.ndarray
    z0: float = DEFAULT_Z0
    assumptions: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        d = self.dims
        if not (isinstance(self.z0, (int, float)) and np.isfinite(self.z0) and self.z0 > 0):
            raise DimensionMismatch(f"z0 must be a positive real number, got {self.z0!r}")
        object.__setattr__(self, "z0", float(self.z0))
        ni_all = d.l * d.n_i
        spec = {
            "z_tt": (d.n_t, d.n_t),
            "z_ti": (d.n_t, ni_all),
            "z_tr": (d.n_t, d.n_r),
            "z_it": (ni_all, d.n_t),
            "z_ii": (ni_all, ni_all),
            "z_ir": (ni_all, d.n_r),
            "z_rt": (d.n_r, d.n_t),
            "z_ri": (d.n_r, ni_all),
            "z_rr": (d.n_r, d.n_r),
        }
        for name, shape in spec.items():
            object.__setattr__(self, name, _as_complex(getattr(self, name), name, shape))
        flags = frozenset(self.assumptions)
        unknown = flags - ALL_ASSUMPTIONS
        if unknown:
            raise AssumptionViolated(f"unknown assumption ids {sorted(unknown)}; valid ids are 1..6")
        object.__setattr__(self, "assumptions", flags)
        self._check_assumptions()

    # -- block accessors (surface indices are 0-based) ------------------------

    def _sl(self, k: int) -> slice:
        n = self.dims.n_i
        return slice(k * n, (k + 1) * n)

    def surface_block(self, k: int) -> np.ndarray:
        """Z_II diagonal block of surface k (its own array coupling)."""
        return self.z_ii[self._sl(k), self._sl(k)]

    def hop_block(self, k: int) -> np.ndarray:
        """Z_II subdiagonal block from surface k to surface k+1."""
        return self.z_ii[self._sl(k + 1), self._sl(k)]

    def z_it_block(self, k: int) -> np.ndarray:
        """Transmitter-to-surface-k block."""
        return self.z_it[self._sl(k), :]

    def z_ri_block(self, k: int) -> np.ndarray:
        """Surface-k-to-receiver block."""
        return self.z_ri[:, self._sl(k)]

    # -- assumption checking ---------------------------------------------------

    def _check_assumptions(self):
        tol = _BLOCK_TOL * self.z0
        l, n = self.dims.l, self.dims.n_i
        eye_i = self.z0 * np.eye(n)

        def zero(block, what):
            if _max_abs(block) > tol:
                raise AssumptionViolated(f"assumption asserted but {what} is not zero")

        if 1 in self.assumptions:
            zero(self.z_ti, "z_ti")
            zero(self.z_tr, "z_tr")
            zero(self.z_ir, "z_ir")
        if 2 in self.assumptions:
            for j in range(l):
                for i in range(j):
                    zero(self.z_ii[self._sl(i), self._sl(j)], f"z_ii upper block ({i},{j})")
        if 3 in self.assumptions:
            if 2 not in self.assumptions:
                raise AssumptionViolated("assumption 3 requires assumption 2")
            for j in range(l):
                for i in range(j + 2, l):
                    zero(self.z_ii[self._sl(i), self._sl(j)], f"z_ii block ({i},{j})")
        if 4 in self.assumptions:
            if _max_abs(self.z_tt - self.z0 * np.eye(self.dims.n_t)) > tol:
                raise AssumptionViolated("assumption 4 asserted but z_tt != z0*I")
            if _max_abs(self.z_rr - self.z0 * np.eye(self.dims.n_r)) > tol:
                raise AssumptionViolated("assumption 4 asserted but z_rr != z0*I")
        if 5 in self.assumptions:
            for k in range(l):
                if _max_abs(self.surface_block(k) - eye_i) > tol:
                    raise AssumptionViolated(f"assumption 5 asserted but surface block {k} != z0*I")
        if 6 in self.assumptions:
            for k in range(1, l):
                zero(self.z_it_block(k), f"z_it block {k}")
            for k in range(l - 1):
                zero(self.z_ri_block(k), f"z_ri block {k}")
            zero(self.z_rt, "z_rt")

    def require(self, *ids: int):
        missing = sorted(set(ids) - self.assumptions)
        if missing:
            raise AssumptionViolated(
                f"this channel model needs assumption(s) {missing} asserted on the network"
            )

    # -- serialization ----------------------------------------------------------

    def debug_json(self) -> str:
        """Serialize every block as row-major [re, im] pairs, for dumps and diffing."""

        def pairs(a: np.ndarray):
            return [[[float(x.real), float(x.imag)] for x in row] for row in a]

        payload = {
            "dims": {"n_t": self.dims.n_t, "n_r": self.dims.n_r,
                     "n_i": self.dims.n_i, "l": self.dims.l},
            "z0": self.z0,
            "assumptions": sorted(self.assumptions),
            "blocks": {name: pairs(getattr(self, name))
                       for name in ("z_tt", "z_ti", "z_tr", "z_it", "z_ii",
                                    "z_ir", "z_rt", "z_ri", "z_rr")},
        }
        return json.dumps(payload, sort_keys=True)


@dataclass(frozen=True)
class RisLoadStack:
    """Per-surface load impedance matrices terminating the surface elements."""

    loads: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.loads) == 0:
            raise DimensionMismatch("a load stack needs at least one surface")
        fixed = []
        n = None
        for k, z in enumerate(self.loads):
            arr = np.asarray(z, dtype=complex)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise DimensionMismatch(f"load {k} must be square, got shape {arr.shape}")
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise DimensionMismatch(
                    f"load {k} has {arr.shape[0]} ports but earlier loads have {n}")
            fixed.append(arr)
        object.__setattr__(self, "loads", tuple(fixed))

    @property
    def l(self) -> int:
        return len(self.loads)

    @property
    def n_i(self) -> int:
        return self.loads[0].shape[0]

    def is_lossless(self, tol: float = 1e-9) -> bool:
        """True when every load is purely reactive (Z = -Z^H within tol)."""
        return all(_max_abs(z + z.conj().T) <= tol * max(1.0, _max_abs(z)) for z in self.loads)


def _loads_for(net: MultiportNetwork, loads) -> RisLoadStack:
    stack = loads if isinstance(loads, RisLoadStack) else RisLoadStack(tuple(loads))
    if stack.l != net.dims.l or stack.n_i != net.dims.n_i:
        raise DimensionMismatch(
            f"load stack is {stack.l} x {stack.n_i} ports but the network has "
            f"{net.dims.l} surfaces of {net.dims.n_i} elements")
    return stack


def _checked_inv(a: np.ndarray, what: str, cond_cap: float = CONDITION_CAP) -> np.ndarray:
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > cond_cap:
        raise SingularMatrix(what, float(cond))
    return np.linalg.inv(a)


# -- structured inverse ---------------------------------------------------------


def block_subdiagonal_inverse(diagonal_blocks, subdiagonal_blocks,
                              cond_cap: float = CONDITION_CAP) -> list[list[np.ndarray]]:
    """Invert a block matrix whose only nonzero blocks sit on the diagonal and
    the first subdiagonal.

    For M with diagonal blocks D_0..D_{l-1} and subdiagonal blocks S_k mapping
    block column k to block row k+1, the inverse N is block lower triangular:

        N[i][i] = inv(D_i)
        N[i][j] = (-1)^(i-j) inv(D_i) (S_{i-1} inv(D_{i-1})) ... (S_j inv(D_j)),  i > j

    with the factors multiplied in strictly decreasing block order, and
    N[i][j] for i < j exactly the zero matrix. Returns the inverse as a list
    of lists of blocks.
    """
    d = [np.asarray(b, dtype=complex) for b in diagonal_blocks]
    s = [np.asarray(b, dtype=complex) for b in subdiagonal_blocks]
    l = len(d)
    if l == 0:
        raise DimensionMismatch("need at least one diagonal block")
    if len(s) != l - 1:
        raise DimensionMismatch(f"{l} diagonal blocks need {l - 1} subdiagonal blocks, got {len(s)}")
    n = d[0].shape[0] if d[0].ndim == 2 else -1
    for k, b in enumerate(d):
        if b.ndim != 2 or b.shape != (n, n):
            raise DimensionMismatch(f"diagonal block {k} must be {n} x {n}, got shape {b.shape}")
    for k, b in enumerate(s):
        if b.ndim != 2 or b.shape != (n, n):
            raise DimensionMismatch(f"subdiagonal block {k} must be {n} x {n}, got shape {b.shape}")

    d_inv = []
    for k, b in enumerate(d):
        cond = np.linalg.cond(b)
        if not np.isfinite(cond) or cond > cond_cap:
            raise SingularDiagonalBlock(k, float(cond))
        d_inv.append(np.linalg.inv(b))
    sd = [s[k] @ d_inv[k] for k in range(l - 1)]

    out = [[np.zeros((n, n), dtype=complex) for _ in range(l)] for _ in range(l)]
    for i in range(l):
        out[i][i] = d_inv[i]
        acc = d_inv[i]
        for j in range(i - 1, -1, -1):
            acc = -(acc @ sd[j])
            out[i][j] = acc
    return out


# -- channel models --------------------------------------------------------------


def channel_z_general(net: MultiportNetwork, loads) -> np.ndarray:
    """End-to-end channel from the full impedance partition.

    Needs only assumption 1. Computes
    z0 * inv(z0*I + Z_RR) @ (Z_RT - Z_RI inv(Z_I + Z_II) Z_IT) @ inv(Z_TT)
    where Z_I is the block-diagonal matrix of surface loads.
    """
    net.require(1)
    stack = _loads_for(net, loads)
    d = net.dims
    z_i = np.zeros((d.l * d.n_i, d.l * d.n_i), dtype=complex)
    for k, z in enumerate(stack.loads):
        z_i[net._sl(k), net._sl(k)] = z
    y = _checked_inv(z_i + net.z_ii, "z_i + z_ii")
    inner = net.z_rt - net.z_ri @ y @ net.z_it
    left = net.z0 * _checked_inv(net.z0 * np.eye(d.n_r) + net.z_rr, "z0*I + z_rr")
    return left @ inner @ _checked_inv(net.z_tt, "z_tt")


def _cascade_sum(net: MultiportNetwork, diag_blocks) -> np.ndarray:
    """Z_RT minus the double sum of Z_RI,l Ybar[l][k] Z_IT,k over l >= k."""
    hops = [net.hop_block(k) for k in range(net.dims.l - 1)]
    ybar = block_subdiagonal_inverse(diag_blocks, hops)
    acc = net.z_rt.astype(complex).copy()
    for i in range(net.dims.l):
        z_ri_i = net.z_ri_block(i)
        for j in range(i + 1):
            acc -= z_ri_i @ ybar[i][j] @ net.z_it_block(j)
    return acc


def channel_z_cascade(net: MultiportNetwork, loads) -> np.ndarray:
    """Channel using the structured inverse of the block-bidiagonal surface core.

    Needs assumptions 1-3. Algebraically identical to channel_z_general on any
    network satisfying them, but never forms the dense surface inverse.
    """
    net.require(1, 2, 3)
    stack = _loads_for(net, loads)
    d_blocks = [stack.loads[k] + net.surface_block(k) for k in range(net.dims.l)]
    inner = _cascade_sum(net, d_blocks)
    d = net.dims
    left = net.z0 * _checked_inv(net.z0 * np.eye(d.n_r) + net.z_rr, "z0*I + z_rr")
    return left @ inner @ _checked_inv(net.z_tt, "z_tt")


def channel_z_matched(net: MultiportNetwork, loads) -> np.ndarray:
    """Channel for matched, uncoupled arrays everywhere (assumptions 1-5).

    The end-array inverses collapse and the model becomes
    (Z_RT - sum Z_RI,l Ybar[l][k] Z_IT,k) / (2 z0) with the surface diagonal
    blocks reduced to load + z0*I.
    """
    net.require(1, 2, 3, 4, 5)
    tol = _BLOCK_TOL * net.z0
    if _max_abs(net.z_tt - net.z0 * np.eye(net.dims.n_t)) > tol or \
       _max_abs(net.z_rr - net.z0 * np.eye(net.dims.n_r)) > tol:
        raise AssumptionViolated("matched model ran on a network whose end arrays are not z0*I")
    stack = _loads_for(net, loads)
    eye_i = net.z0 * np.eye(net.dims.n_i)
    d_blocks = [stack.loads[k] + eye_i for k in range(net.dims.l)]
    return _cascade_sum(net, d_blocks) / (2.0 * net.z0)


def channel_z_pure_cascade(net: MultiportNetwork, loads) -> np.ndarray:
    """Channel when only the through-cascade path exists (assumptions 1-6).

    H = -(-1)^(l-1)/(2 z0) * Z_RI,l-1 inv(Z_l-1 + z0 I)
        prod_{k=l-2..0} [ Z_hop,k inv(Z_k + z0 I) ] * Z_IT,0
    with the product taken in strictly decreasing surface order.
    """
    net.require(1, 2, 3, 4, 5, 6)
    stack = _loads_for(net, loads)
    l = net.dims.l
    eye_i = net.z0 * np.eye(net.dims.n_i)
    inv_last = _checked_inv(stack.loads[l - 1] + eye_i, f"load {l - 1} + z0*I")
    acc = net.z_ri_block(l - 1) @ inv_last
    for k in range(l - 2, -1, -1):
        inv_k = _checked_inv(stack.loads[k] + eye_i, f"load {k} + z0*I")
        acc = acc @ (net.hop_block(k) @ inv_k)
    sign = -((-1.0) ** (l - 1))
    return (sign / (2.0 * net.z0)) * (acc @ net.z_it_block(0))


# -- impedance / scattering maps --------------------------------------------------


def z_to_scattering(z_load: np.ndarray, z0: float = DEFAULT_Z0) -> np.ndarray:
    """Scattering matrix of a load bank: Theta = inv(Z + z0 I) (Z - z0 I)."""
    z = np.asarray(z_load, dtype=complex)
    if z.ndim != 2 or z.shape[0] != z.shape[1]:
        raise DimensionMismatch(f"load matrix must be square, got shape {z.shape}")
    eye = z0 * np.eye(z.shape[0])
    return _checked_inv(z + eye, "z_load + z0*I") @ (z - eye)


def scattering_to_z(theta: np.ndarray, z0: float = DEFAULT_Z0) -> np.ndarray:
    """Load impedance realizing a scattering matrix: Z = z0 (I + Theta) inv(I - Theta).

    Raises OpenCircuitSingularity when Theta has an eigenvalue at 1, since that
    element is an open circuit with no finite impedance.
    """
    th = np.asarray(theta, dtype=complex)
    if th.ndim != 2 or th.shape[0] != th.shape[1]:
        raise DimensionMismatch(f"scattering matrix must be square, got shape {th.shape}")
    eigs = np.linalg.eigvals(th)
    if np.min(np.abs(eigs - 1.0)) < 1e-9:
        raise OpenCircuitSingularity(
            "scattering matrix has an eigenvalue at 1; the load is an open circuit")
    eye = np.eye(th.shape[0])
    return z0 * (eye + th) @ np.linalg.inv(eye - th)


def normalize_z_to_channel(z_block: np.ndarray, z0: float = DEFAULT_Z0) -> np.ndarray:
    """Convert a transfer impedance block to its channel-matrix normalization."""
    return np.asarray(z_block, dtype=complex) / (2.0 * z0)
