"""Uniform tensor grids and sampled convex potentials.

``+inf`` is stored as ``np.inf``; numpy arithmetic saturates on it and
``PotentialGrid.finite`` is the matching boolean mask.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Grid", "PotentialGrid", "InvalidPotential"]


class InvalidPotential(ValueError):
    pass


def _tuple(v, kind):
    return tuple(kind(x) for x in np.atleast_1d(v))


@dataclass(frozen=True)
class Grid:
    """Uniform grid on the box ``[lo, hi]`` with ``n`` points per axis."""

    lo: tuple
    hi: tuple
    n: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", _tuple(self.lo, float))
        object.__setattr__(self, "hi", _tuple(self.hi, float))
        object.__setattr__(self, "n", _tuple(self.n, int))
        if not (len(self.lo) == len(self.hi) == len(self.n)):
            raise ValueError("lo, hi and n must have the same length")
        if self.dim not in (1, 2):
            raise ValueError("only dimensions 1 and 2 are supported")
        for a, b, m in zip(self.lo, self.hi, self.n):
            if not a < b:
                raise ValueError(f"need lo < hi on every axis, got {a} >= {b}")
            if m < 3:
                raise ValueError("need at least 3 points per axis")

    @classmethod
    def with_spacing(cls, lo, hi, h):
        """Grid on ``[lo, hi]`` whose spacing is as close as possible to ``h``."""
        lo, hi, h = np.atleast_1d(lo), np.atleast_1d(hi), np.atleast_1d(h) * np.ones(len(np.atleast_1d(lo)))
        n = np.maximum(3, np.round((hi - lo) / h).astype(int) + 1)
        return cls(lo, hi, n)

    @property
    def dim(self):
        return len(self.n)

    @property
    def shape(self):
        return self.n

    @property
    def spacing(self):
        return tuple((b - a) / (m - 1) for a, b, m in zip(self.lo, self.hi, self.n))

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    def axes(self):
        return [np.linspace(a, b, m) for a, b, m in zip(self.lo, self.hi, self.n)]

    def mesh(self):
        """Node coordinates, shape ``(dim, *shape)``."""
        return np.array(np.meshgrid(*self.axes(), indexing="ij"))

    def points(self):
        """Node coordinates as an ``(N, dim)`` array in row-major order."""
        return self.mesh().reshape(self.dim, -1).T

    def shifted(self, shift):
        s = np.atleast_1d(shift).astype(float)
        return Grid(np.add(self.lo, s), np.add(self.hi, s), self.n)

    def scaled(self, alpha):
        return Grid(np.multiply(self.lo, alpha), np.multiply(self.hi, alpha), self.n)

    def to_json(self):
        return {"lo": list(self.lo), "hi": list(self.hi), "n": list(self.n)}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["lo"], obj["hi"], obj["n"])


def _segments_contiguous(mask):
    """True when every line of ``mask`` along its last axis is one run."""
    m = mask.reshape(-1, mask.shape[-1]).astype(np.int8)
    starts = np.sum(np.diff(m, axis=1) == 1, axis=1) + m[:, 0]
    return bool(np.all(starts <= 1))


class PotentialGrid:
    """Convex potential ``u`` sampled on a grid, ``+inf`` off its domain.

    ``body`` records a convex body when ``dom(u)`` is known to be that body;
    otherwise the finite region touching the grid edge means the potential
    is a window onto a function finite on the whole space.
    """

    def __init__(self, grid, values, body=None):
        v = np.array(values, dtype=float).reshape(grid.shape)
        if np.any(np.isnan(v)) or np.any(v == -np.inf):
            raise InvalidPotential("values must be finite reals or +inf")
        if not np.any(np.isfinite(v)):
            raise InvalidPotential("potential is not proper (no finite value)")
        fin = np.isfinite(v)
        if not _segments_contiguous(fin) or (v.ndim == 2 and not _segments_contiguous(fin.T)):
            raise InvalidPotential("finite region is not contiguous along grid lines")
        if body is not None and body.dim != grid.dim:
            raise InvalidPotential("body dimension does not match grid")
        v.setflags(write=False)
        self.grid = grid
        self.values = v
        self.body = body

    @classmethod
    def from_function(cls, func, grid, body=None):
        """Sample ``func`` (called with ``dim`` coordinate arrays) on ``grid``.

        With a ``body``, nodes outside it are set to ``+inf``.
        """
        mesh = grid.mesh()
        with np.errstate(all="ignore"):
            vals = np.asarray(func(*mesh), dtype=float) * np.ones(grid.shape)
        if body is not None:
            inside = body.contains(mesh.reshape(grid.dim, -1).T).reshape(grid.shape)
            vals = np.where(inside, vals, np.inf)
        vals = np.where(np.isnan(vals), np.inf, vals)
        return cls(grid, vals, body)

    @property
    def dim(self):
        return self.grid.dim

    @property
    def finite(self):
        return np.isfinite(self.values)

    @property
    def domain_kind(self):
        return "convex-body" if self.body is not None else "whole-space-truncated"

    def touches_edge(self):
        """Per axis, whether the finite region reaches the (lower, upper) grid edge."""
        fin = self.finite
        out = []
        for ax in range(self.dim):
            f = np.moveaxis(fin, ax, 0)
            out.append((bool(f[0].any()), bool(f[-1].any())))
        return out

    def scale(self):
        v = self.values[self.finite]
        return max(1.0, float(np.max(np.abs(v))))

    def with_values(self, values, body=None):
        return PotentialGrid(self.grid, values, body if body is not None else self.body)

    def shifted(self, shift):
        """The potential ``x -> u(x - shift)``, exact on the shifted grid."""
        body = self.body.translated(shift) if self.body is not None else None
        return PotentialGrid(self.grid.shifted(shift), self.values, body)

    def __add__(self, c):
        return PotentialGrid(self.grid, self.values + float(c), self.body)

    def __repr__(self):
        return f"PotentialGrid(grid={self.grid}, domain={self.domain_kind})"
