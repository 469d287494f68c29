"""Circuit geometries: periodic chain, Lieb lattice, square lattice.

Every lattice precomputes its unitary edges grouped into matchings (sets of
site-disjoint pairs) so a whole gate sublayer can be applied in a few
vectorized tableau operations, plus the measured-site list and the regions
used by entanglement observables.

2-D conventions: the Lieb lattice lives on a (2L x 2L) fine grid with unit
cells of 3 sites; corner sites sit at (even, even) and carry the X
measurements, edge-center sites at (odd, even) / (even, odd) host the target
state.  The square lattice is an L x L torus measured on the (x + y) even
sublattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Lattice:
    kind: str
    L: int
    n_sites: int
    edges: np.ndarray                      # (E, 2) site pairs
    measured_sites: np.ndarray             # sites eligible for X measurement
    matchings: list[tuple[np.ndarray, np.ndarray]]
    # chain: [even-offset, odd-offset]; 2-D: one matching per direction in
    # the sublayer order N, S, E, W around each measured site
    coords: dict = field(default_factory=dict, repr=False)

    # ------------------------------------------------------------------
    @classmethod
    def chain(cls, L: int) -> "Lattice":
        if L < 4 or L % 2:
            raise ValueError("chain length must be even and at least 4")
        sites = np.arange(L)
        edges = np.stack([sites, (sites + 1) % L], axis=1)
        even = np.arange(0, L, 2)
        odd = np.arange(1, L, 2)
        matchings = [
            (even, even + 1),              # (0,1), (2,3), ...
            (odd, (odd + 1) % L),          # (1,2), ..., (L-1,0)
        ]
        return cls("chain", L, L, edges, even, matchings)

    @classmethod
    def lieb(cls, L: int) -> "Lattice":
        if L < 2:
            raise ValueError("Lieb lattice needs L >= 2")
        g = 2 * L
        gid = -np.ones((g, g), dtype=np.int64)
        nid = 0
        for x in range(g):
            for y in range(g):
                if x % 2 == 1 and y % 2 == 1:
                    continue
                gid[x, y] = nid
                nid += 1
        corners = [(x, y) for x in range(0, g, 2) for y in range(0, g, 2)]
        dirs = [(0, 1), (0, -1), (1, 0), (-1, 0)]
        matchings = []
        for dx, dy in dirs:
            a = np.array([gid[x, y] for x, y in corners])
            b = np.array([gid[(x + dx) % g, (y + dy) % g] for x, y in corners])
            matchings.append((a, b))
        edges = np.concatenate(
            [np.stack([a, b], axis=1) for a, b in matchings], axis=0)
        measured = np.array([gid[x, y] for x, y in corners])
        lat = cls("lieb", L, 3 * L * L, edges, measured, matchings)
        lat.coords = {"grid": gid, "corners": corners, "span": g}
        return lat

    @classmethod
    def square(cls, L: int) -> "Lattice":
        if L < 4 or L % 2:
            raise ValueError("square lattice needs even L >= 4")
        gid = np.arange(L * L).reshape(L, L)
        matchings = []
        for parity in (0, 1):                     # horizontal bonds
            xs = np.arange(parity, L, 2)
            a = gid[xs].reshape(-1)
            b = gid[(xs + 1) % L].reshape(-1)
            matchings.append((a, b))
        for parity in (0, 1):                     # vertical bonds
            ys = np.arange(parity, L, 2)
            a = gid[:, ys].reshape(-1)
            b = gid[:, (ys + 1) % L].reshape(-1)
            matchings.append((a, b))
        edges = np.concatenate(
            [np.stack([a, b], axis=1) for a, b in matchings], axis=0)
        xs, ys = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
        red = gid[(xs + ys) % 2 == 0]
        lat = cls("square", L, L * L, edges, red, matchings)
        lat.coords = {"grid": gid, "span": L}
        return lat

    @classmethod
    def make(cls, kind: str, L: int) -> "Lattice":
        try:
            factory = {"chain": cls.chain, "lieb": cls.lieb, "square": cls.square}[kind]
        except KeyError:
            raise ValueError(f"unknown lattice kind {kind!r}") from None
        return factory(L)

    # ------------------------------------------------------------------
    # regions

    def half_region(self) -> np.ndarray:
        """Contiguous half of the system (half chain or half plane)."""
        if self.kind == "chain":
            return np.arange(self.L // 2)
        if self.kind == "lieb":
            gid = self.coords["grid"]
            ids = gid[: self.L]                  # fine columns x < L
            return ids[ids >= 0]
        gid = self.coords["grid"]
        return gid[: self.L // 2].reshape(-1)

    def quarter_regions(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Three of the four equal contiguous quarters (1-D) or strips (2-D)."""
        if self.kind == "chain":
            if self.L % 4:
                raise ValueError("quarters need L divisible by 4")
            q = self.L // 4
            return (np.arange(q), np.arange(q, 2 * q), np.arange(2 * q, 3 * q))
        if self.L % 4:
            raise ValueError("strips need L divisible by 4")
        gid = self.coords["grid"]
        span = self.coords["span"]
        w = span // 4
        strips = []
        for k in range(3):
            ids = gid[k * w:(k + 1) * w].reshape(-1)
            strips.append(ids[ids >= 0])
        return tuple(strips)

    def antipodal_pair(self) -> tuple[int, int]:
        """Two antipodal unmeasured sites (chain only)."""
        if self.kind != "chain":
            raise ValueError("antipodal pair defined for the chain")
        return 1, 1 + self.L // 2

    # ------------------------------------------------------------------
    # named operator site sets (consumed by detectors)

    def cat_pairs(self) -> np.ndarray:
        """(L/2, 2) odd-site pairs (i, i+2) hosting the local cat stabilizers."""
        if self.kind != "chain":
            raise ValueError("cat pairs defined for the chain")
        odd = np.arange(1, self.L, 2)
        return np.stack([odd, (odd + 2) % self.L], axis=1)

    def odd_sites(self) -> np.ndarray:
        if self.kind != "chain":
            raise ValueError("odd sites defined for the chain")
        return np.arange(1, self.L, 2)

    def vertex_stars(self) -> np.ndarray:
        """(K, 4) neighbor quadruples around each measured 2-D site."""
        if self.kind == "lieb":
            gid = self.coords["grid"]
            g = self.coords["span"]
            quads = []
            for x, y in self.coords["corners"]:
                quads.append([gid[(x + 1) % g, y], gid[(x - 1) % g, y],
                              gid[x, (y + 1) % g], gid[x, (y - 1) % g]])
            return np.array(quads)
        if self.kind == "square":
            gid = self.coords["grid"]
            g = self.coords["span"]
            quads = []
            for s in self.measured_sites:
                x, y = divmod(int(s), g)
                quads.append([gid[(x + 1) % g, y], gid[(x - 1) % g, y],
                              gid[x, (y + 1) % g], gid[x, (y - 1) % g]])
            return np.array(quads)
        raise ValueError("vertex stars defined for 2-D lattices")

    def plaquettes(self) -> np.ndarray:
        """(L^2, 4) edge-center quadruples around each Lieb plaquette hole."""
        if self.kind != "lieb":
            raise ValueError("plaquettes defined for the Lieb lattice")
        gid = self.coords["grid"]
        g = self.coords["span"]
        quads = []
        for x in range(1, g, 2):
            for y in range(1, g, 2):
                quads.append([gid[(x + 1) % g, y], gid[(x - 1) % g, y],
                              gid[x, (y + 1) % g], gid[x, (y - 1) % g]])
        return np.array(quads)

    def line_symmetries(self) -> list[np.ndarray]:
        """Global product-of-X site sets of the 2-D cluster state."""
        if self.kind == "lieb":
            gid = self.coords["grid"]
            g = self.coords["span"]
            lines = []
            for y0 in range(0, g, 2):
                lines.append(np.array([gid[x, y0] for x in range(1, g, 2)]))
            for x0 in range(0, g, 2):
                lines.append(np.array([gid[x0, y] for y in range(1, g, 2)]))
            return lines
        if self.kind == "square":
            gid = self.coords["grid"]
            g = self.coords["span"]
            lines = []
            for c in range(g):
                lines.append(np.array([gid[x, (x + c) % g] for x in range(g)]))
                lines.append(np.array([gid[x, (c - x) % g] for x in range(g)]))
            return lines
        raise ValueError("line symmetries defined for 2-D lattices")

    def unmeasured_pairs(self) -> np.ndarray:
        """(K, 2) unmeasured-site pairs facing each other across a measured site."""
        if self.kind == "chain":
            return self.cat_pairs()
        gid = self.coords["grid"]
        g = self.coords["span"]
        if self.kind == "lieb":
            centers = self.coords["corners"]
        else:
            centers = [divmod(int(s), g) for s in self.measured_sites]
        pairs = []
        for x, y in centers:
            pairs.append([gid[(x - 1) % g, y], gid[(x + 1) % g, y]])
            pairs.append([gid[x, (y - 1) % g], gid[x, (y + 1) % g]])
        return np.array(pairs)
