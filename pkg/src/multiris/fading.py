"""Seeded generation of link matrices: rank-1 line-of-sight, Rayleigh, Rician."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cascade import CascadeChannels, SideLinks
from .errors import DimensionMismatch
from .multiport import Dimensions
from .rng import RandomStream


@dataclass(frozen=True)
class LosLink:
    """Rank-1 steering link: path_gain * outer(a, b) with unit-modulus a, b."""

    path_gain: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        if a.ndim != 1 or b.ndim != 1:
            raise DimensionMismatch("steering vectors must be 1-D")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def matrix(self) -> np.ndarray:
        return self.path_gain * np.outer(self.a, self.b)


@dataclass(frozen=True)
class FadingSpec:
    """What statistics a link follows and at what average path gain."""

    kind: str
    path_gain: float = 1.0
    rician_k: float = 0.0

    def __post_init__(self):
        if self.kind not in ("los", "rayleigh", "rician"):
            raise DimensionMismatch(
                f"fading kind must be 'los', 'rayleigh' or 'rician', got {self.kind!r}")
        if not (np.isfinite(self.path_gain) and self.path_gain >= 0):
            raise DimensionMismatch(f"path_gain must be finite and >= 0, got {self.path_gain!r}")
        if not (np.isfinite(self.rician_k) and self.rician_k >= 0):
            raise DimensionMismatch(f"rician_k must be finite and >= 0, got {self.rician_k!r}")


def draw_los_link(rows: int, cols: int, path_gain: float, stream: RandomStream) -> LosLink:
    """Draw a rank-1 link with i.i.d. uniform phases on both sides."""
    rng = stream.generator()
    a = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, rows))
    b = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, cols))
    return LosLink(float(path_gain), a, b)


def gen_los_link(rows: int, cols: int, path_gain: float, stream: RandomStream) -> np.ndarray:
    return draw_los_link(rows, cols, path_gain, stream).matrix()


def gen_rayleigh_link(rows: int, cols: int, path_gain: float, stream: RandomStream) -> np.ndarray:
    """i.i.d. circularly symmetric complex Gaussian entries, per-entry std path_gain."""
    rng = stream.generator()
    re = rng.standard_normal((rows, cols))
    im = rng.standard_normal((rows, cols))
    return path_gain * (re + 1j * im) / np.sqrt(2.0)


def gen_rician_link(rows: int, cols: int, spec: FadingSpec, stream: RandomStream) -> np.ndarray:
    """K-factor mix of a rank-1 specular part and a Rayleigh scatter part.

    The two parts come from separate child streams, so changing K rescales a
    fixed pair of draws instead of producing unrelated channels.
    """
    k = spec.rician_k
    los = gen_los_link(rows, cols, 1.0, stream.child("specular"))
    nlos = gen_rayleigh_link(rows, cols, 1.0, stream.child("scatter"))
    mixed = np.sqrt(k / (k + 1.0)) * los + np.sqrt(1.0 / (k + 1.0)) * nlos
    return spec.path_gain * mixed


def gen_link(rows: int, cols: int, spec: FadingSpec, stream: RandomStream) -> np.ndarray:
    if spec.kind == "los":
        return gen_los_link(rows, cols, spec.path_gain, stream)
    if spec.kind == "rayleigh":
        return gen_rayleigh_link(rows, cols, spec.path_gain, stream)
    return gen_rician_link(rows, cols, spec, stream)


def gen_cascade(dims: Dimensions, fading, stream: RandomStream,
                include_sides: bool = False) -> CascadeChannels:
    """Draw every link of a cascade from independent child streams.

    fading is one FadingSpec applied to all links, or a sequence of l+1 specs
    ordered transmitter-to-surface-1, the l-1 inter-surface hops, then
    surface-l-to-receiver. The sequence form does not cover side links.
    """
    l = dims.l
    if isinstance(fading, FadingSpec):
        specs = [fading] * (l + 1)
        side_spec = fading
    else:
        specs = list(fading)
        if len(specs) != l + 1:
            raise DimensionMismatch(f"a {l}-surface cascade needs {l + 1} fading specs")
        if include_sides:
            raise DimensionMismatch(
                "per-link fading specs do not cover side links; pass one FadingSpec")
        side_spec = None
    h_it_1 = gen_link(dims.n_i, dims.n_t, specs[0], stream.child("it", 0))
    inter = tuple(gen_link(dims.n_i, dims.n_i, specs[1 + k], stream.child("hop", k))
                  for k in range(l - 1))
    h_ri_l = gen_link(dims.n_r, dims.n_i, specs[l], stream.child("ri", l - 1))
    sides = None
    if include_sides:
        h_rt = gen_link(dims.n_r, dims.n_t, side_spec, stream.child("side_rt"))
        h_ri = tuple(gen_link(dims.n_r, dims.n_i, side_spec, stream.child("side_ri", k))
                     for k in range(l - 1))
        h_it = tuple(gen_link(dims.n_i, dims.n_t, side_spec, stream.child("side_it", k))
                     for k in range(1, l))
        sides = SideLinks(h_rt, h_ri, h_it)
    return CascadeChannels(h_it_1, inter, h_ri_l, sides)
