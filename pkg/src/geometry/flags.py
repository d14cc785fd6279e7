"""
Partial flags in R^d: types, orthonormal flag bases, the max principal-angle
metric, antipodality margins, attracting flags and finite flag nets.

A flag of type (k_1 < ... < k_m) is stored as a d x d orthonormal basis whose
first k_i columns span the i-th subspace. Nets of flags are stacked into
(n, d, d) arrays so the batched kernels run as vectorized numpy.
"""
import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from src.config.settings import settings
from src.config.logging_config import setup_logging
from src.core.errors import EmptyNet, NoGap, Singular, TypeMismatch
from src.groups.matrices import sym_power_lift

logger = setup_logging(__name__)


@dataclass(frozen=True)
class FlagType:
    dims: Tuple[int, ...]
    d: int

    def __post_init__(self):
        dims = tuple(int(k) for k in self.dims)
        if not dims or any(not 0 < k < self.d for k in dims) or list(dims) != sorted(set(dims)):
            raise TypeMismatch(f"flag type {dims} is not strictly increasing inside (0, {self.d})")
        object.__setattr__(self, "dims", dims)

    @classmethod
    def full(cls, d: int) -> "FlagType":
        return cls(tuple(range(1, d)), d)

    @property
    def is_invariant(self) -> bool:
        return self == opposition_involution(self)

    def to_dict(self) -> dict:
        return {"d": self.d, "dims": list(self.dims)}


def opposition_involution(t: FlagType) -> FlagType:
    """k -> d - k."""
    return FlagType(tuple(sorted(t.d - k for k in t.dims)), t.d)


@dataclass(frozen=True)
class GapVector:
    dims: Tuple[int, ...]
    values: Tuple[float, ...]

    def min(self) -> float:
        return min(self.values)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "values": list(self.values)}


@dataclass(frozen=True, eq=False)
class Flag:
    basis: np.ndarray
    ftype: FlagType

    @classmethod
    def from_matrix(cls, m: np.ndarray, ftype: FlagType) -> "Flag":
        """Flag spanned by the leading columns of an invertible matrix."""
        return cls(_orthonormalize(np.asarray(m, dtype=float)), ftype)

    @property
    def d(self) -> int:
        return self.ftype.d

    def subspace(self, k: int) -> np.ndarray:
        return self.basis[:, :k]

    def to_list(self) -> list:
        return self.basis.tolist()


def _orthonormalize(m: np.ndarray) -> np.ndarray:
    """QR with a positive R diagonal; raises Singular when a column is numerically inside the span of the previous ones."""
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    norms = np.linalg.norm(m, axis=-2)
    if np.any(np.abs(diag) <= settings.SINGULAR_TOL * np.maximum(norms, np.finfo(float).tiny)):
        raise Singular("matrix is numerically singular")
    signs = np.where(diag < 0, -1.0, 1.0)
    return q * signs[..., None, :]


def standard_flag(ftype: FlagType) -> Flag:
    return Flag(np.eye(ftype.d), ftype)


def reversed_flag(ftype: FlagType) -> Flag:
    return Flag(np.eye(ftype.d)[:, ::-1].copy(), ftype)


def random_flag(rng: np.random.Generator, ftype: FlagType) -> Flag:
    return Flag.from_matrix(rng.standard_normal((ftype.d, ftype.d)), ftype)


def _check_same_type(a: FlagType, b: FlagType) -> None:
    if a != b:
        raise TypeMismatch(f"flag types {a.dims} and {b.dims} (d={a.d}, {b.d}) differ")


# ----------------------------------------------------------------
# Metric
# ----------------------------------------------------------------

def _residual_sine(f_k: np.ndarray, g_k: np.ndarray) -> float:
    residual = g_k - f_k @ (f_k.T @ g_k)
    return float(np.linalg.norm(residual, 2))


def flag_distance(F: Flag, G: Flag) -> float:
    """Max over the flag stages of the sine of the largest principal angle."""
    _check_same_type(F.ftype, G.ftype)
    out = 0.0
    for k in F.ftype.dims:
        fk, gk = F.subspace(k), G.subspace(k)
        out = max(out, _residual_sine(fk, gk), _residual_sine(gk, fk))
    return min(out, 1.0)


def _line_sines(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """(n, m) sines between lines spanned by unit rows, summed over the 2x2 minors of [u_i v_j]."""
    out = np.zeros((len(u), len(v)))
    for p, q in itertools.combinations(range(u.shape[1]), 2):
        minor = np.multiply.outer(u[:, p], v[:, q]) - np.multiply.outer(u[:, q], v[:, p])
        out += minor * minor
    return np.sqrt(np.clip(out, 0.0, 1.0))


def _stage_sines(a: np.ndarray, b: np.ndarray, k: int, d: int) -> np.ndarray:
    """(n, m) largest principal-angle sines between the k-stages of two stacks."""
    if k == 1:
        return _line_sines(a[:, :, 0], b[:, :, 0])
    if k == d - 1:
        # hyperplanes: the only nontrivial angle is the one between the normals
        return _line_sines(a[:, :, d - 1], b[:, :, d - 1])
    cross = np.einsum("idk,jdl->ijkl", a[:, :, :k], b[:, :, :k])
    c = np.linalg.svd(cross, compute_uv=False)[..., -1]
    return np.sqrt(np.clip(1.0 - c * c, 0.0, 1.0))


def pairwise_distances(net_a: np.ndarray, ftype: FlagType, net_b: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Batched flag_distance between two stacks of flag bases.

    Hyperplane stages use the normal vector (last basis column), which is
    orthogonal to the stage for orthonormal bases.
    """
    same = net_b is None
    net_b = net_a if same else net_b
    out = np.zeros((len(net_a), len(net_b)))
    if len(net_a) == 0 or len(net_b) == 0:
        return out
    for k in ftype.dims:
        out = np.maximum(out, _stage_sines(net_a, net_b, k, ftype.d))
    if same:
        out = np.maximum(out, out.T)
        np.fill_diagonal(out, 0.0)
    return out


def projector_features(net: np.ndarray, ftype: FlagType) -> np.ndarray:
    """Concatenated stage projectors; Frobenius distance <= sqrt(2 * sum(dims)) * flag_distance."""
    feats = [np.einsum("nik,njk->nij", net[:, :, :k], net[:, :, :k]).reshape(len(net), -1) for k in ftype.dims]
    return np.concatenate(feats, axis=1)


def flag_medoid(net: np.ndarray, ftype: FlagType) -> int:
    """Index of the net point minimizing the largest distance to the others."""
    if len(net) == 0:
        raise EmptyNet("medoid of an empty net")
    dist = pairwise_distances(net, ftype)
    return int(np.argmin(dist.max(axis=1)))


# ----------------------------------------------------------------
# Antipodality
# ----------------------------------------------------------------

def antipodality_margin(F: Flag, G: Flag) -> float:
    """Min over stages k of sigma_min([F_k | G_{d-k}]); zero exactly when some stage meets non-transversally."""
    if G.ftype != opposition_involution(F.ftype):
        raise TypeMismatch(f"type {G.ftype.dims} is not opposite to {F.ftype.dims}")
    d = F.d
    out = np.inf
    for k in F.ftype.dims:
        block = np.hstack([F.subspace(k), G.subspace(d - k)])
        out = min(out, float(np.linalg.svd(block, compute_uv=False)[-1]))
    return out


def batch_antipodality(net_a: np.ndarray, ftype: FlagType, net_b: np.ndarray) -> np.ndarray:
    """(n, m) antipodality margins; net_b holds flags of the opposite type."""
    d = ftype.d
    n, m = len(net_a), len(net_b)
    out = np.full((n, m), np.inf)
    for k in ftype.dims:
        a = np.broadcast_to(net_a[:, None, :, :k], (n, m, d, k))
        b = np.broadcast_to(net_b[None, :, :, :d - k], (n, m, d, d - k))
        block = np.concatenate([a, b], axis=-1)
        out = np.minimum(out, np.linalg.svd(block, compute_uv=False)[..., -1])
    return out


# ----------------------------------------------------------------
# Group action
# ----------------------------------------------------------------

def act(g: np.ndarray, F: Flag) -> Flag:
    """g * F, re-orthonormalized; act(gh, F) = act(g, act(h, F))."""
    g = np.asarray(g, dtype=float)
    if abs(np.linalg.det(g)) <= settings.SINGULAR_TOL * max(1.0, float(np.max(np.abs(g)))) ** g.shape[0]:
        raise Singular("cannot act by a singular matrix")
    return Flag(_orthonormalize(g @ F.basis), F.ftype)


def batch_act(g: np.ndarray, net: np.ndarray) -> np.ndarray:
    if len(net) == 0:
        return net
    return _orthonormalize(np.asarray(g, dtype=float) @ net)


def act_chain(mats: Sequence[np.ndarray], net: np.ndarray) -> np.ndarray:
    """(m_1 ... m_k) * net with m_k applied first, re-orthonormalized after every factor."""
    for m in reversed(list(mats)):
        net = batch_act(m, net)
    return net


# ----------------------------------------------------------------
# Spectral data
# ----------------------------------------------------------------

def singular_gaps(g: np.ndarray, t: FlagType) -> GapVector:
    """log(sigma_k / sigma_{k+1}) for k in the type, singular values descending."""
    s = np.linalg.svd(np.asarray(g, dtype=float), compute_uv=False)
    s = np.maximum(s, np.finfo(float).tiny)
    return GapVector(t.dims, tuple(float(np.log(s[k - 1] / s[k])) for k in t.dims))


def eigen_moduli(g: np.ndarray) -> np.ndarray:
    return np.sort(np.abs(np.linalg.eigvals(np.asarray(g, dtype=float))))[::-1]


def _require_gaps(moduli: np.ndarray, t: FlagType) -> None:
    for k in t.dims:
        if moduli[k] <= 0 or np.log(moduli[k - 1] / moduli[k]) < settings.GAP_FLOOR:
            raise NoGap(f"no eigenvalue gap at dimension {k}")


def _complete_basis(cols: np.ndarray, d: int) -> np.ndarray:
    if cols.shape[1] == d:
        return cols
    rest = scipy.linalg.null_space(cols.T)
    return np.hstack([cols, rest[:, :d - cols.shape[1]]])


def _nested_basis(subspaces: Sequence[Tuple[int, np.ndarray]], d: int) -> np.ndarray:
    """Orthonormal basis adapted to an increasing chain of subspaces given by spanning columns."""
    basis = np.zeros((d, 0))
    for k, span in subspaces:
        proj = span - basis @ (basis.T @ span)
        u, _, _ = np.linalg.svd(proj, full_matrices=False)
        basis = np.hstack([basis, u[:, :k - basis.shape[1]]])
    return _complete_basis(basis, d)


def attracting_flag(g: np.ndarray, t: FlagType, method: str = "schur") -> Flag:
    """
    Attracting flag of a matrix with eigenvalue-modulus gaps at every stage of the type.

    method "schur" reads invariant subspaces from an ordered real Schur form,
    "power" runs orthogonal iteration, "svd" takes left singular vectors of a
    normalized power (coarse; accurate to about the gap ratio to the eighth).

    Raises:
        NoGap: if some |lambda_k| / |lambda_{k+1}| is within the gap floor of 1.
    """
    g = np.asarray(g, dtype=float)
    d = g.shape[0]
    moduli = eigen_moduli(g)
    _require_gaps(moduli, t)
    if method == "schur":
        stages = []
        for k in t.dims:
            threshold = np.sqrt(moduli[k - 1] * moduli[k])
            _, z, sdim = scipy.linalg.schur(g, output="real", sort=lambda re, im: np.hypot(re, im) > threshold)
            if sdim != k:
                raise NoGap(f"complex pair straddles dimension {k}")
            stages.append((k, z[:, :k]))
        return Flag(_nested_basis(stages, d), t)
    if method == "power":
        return Flag(_orthogonal_iteration(g, settings.ATTRACTOR_MAX_ITER), t)
    if method == "svd":
        # the deepest stage must stay above 1e-8 of sigma_1 in g^n
        depth = moduli[max(t.dims) - 1] / moduli[0]
        m = g / np.linalg.norm(g, 2)
        power = 1
        while depth ** (2 * power) >= 1e-8 and power < 256:
            m = m @ m
            m = m / np.linalg.norm(m, 2)
            power *= 2
        u, _, _ = np.linalg.svd(m)
        return Flag(_orthonormalize(u), t)
    raise ValueError(f"unknown attracting-flag method {method!r}")


def _orthogonal_iteration(g: np.ndarray, max_iter: int) -> np.ndarray:
    d = g.shape[0]
    q = _orthonormalize(np.eye(d) + 0.1 * np.tri(d, d, -1).T + 0.05 * np.tri(d, d, -1))
    for _ in range(max_iter):
        nxt = _orthonormalize(g @ q)
        if np.max(np.abs(np.abs(np.sum(nxt * q, axis=0)) - 1.0)) < settings.ORTHONORMAL_TOL:
            return nxt
        q = nxt
    return q


def repelling_flag(g: np.ndarray, t: FlagType, method: str = "schur") -> Flag:
    return attracting_flag(np.linalg.inv(np.asarray(g, dtype=float)), opposition_involution(t), method)


def batch_attracting_flags(mats: np.ndarray, t: FlagType, iterations: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Orthogonal iteration on a stack of matrices.

    Returns:
        (bases, ok) where ok marks matrices whose moduli gaps pass the floor.
    """
    iterations = settings.ATTRACTOR_BATCH_ITER if iterations is None else iterations
    mats = np.asarray(mats, dtype=float)
    n, d, _ = mats.shape
    moduli = np.sort(np.abs(np.linalg.eigvals(mats)), axis=1)[:, ::-1]
    ok = np.ones(n, dtype=bool)
    for k in t.dims:
        with np.errstate(divide="ignore", invalid="ignore"):
            ok &= np.log(moduli[:, k - 1] / moduli[:, k]) >= settings.GAP_FLOOR
    scale = np.linalg.norm(mats, axis=(1, 2))[:, None, None]
    step = mats / np.where(scale > 0, scale, 1.0)
    q = np.broadcast_to(_orthonormalize(np.eye(d) + 0.1 * np.tri(d, d, -1).T + 0.05 * np.tri(d, d, -1)),
                        (n, d, d)).copy()
    for _ in range(iterations):
        q, r = np.linalg.qr(step @ q)
        signs = np.where(np.diagonal(r, axis1=1, axis2=2) < 0, -1.0, 1.0)
        q = q * signs[:, None, :]
    return q, ok


# ----------------------------------------------------------------
# Flag sets
# ----------------------------------------------------------------

@dataclass(eq=False)
class FlagSet:
    """
    Compact set modelled as the union of flag-metric balls of radius r around a net.

    ``boundary`` optionally records the flags bounding the set (arc endpoints),
    used to pick interior samples.
    """
    net: np.ndarray
    ftype: FlagType
    r: float
    label: str = ""
    boundary: Optional[np.ndarray] = None
    meta: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        self.net = np.asarray(self.net, dtype=float).reshape(-1, self.ftype.d, self.ftype.d)
        if self.r < 0:
            raise ValueError("inflation radius must be nonnegative")
        if self.boundary is not None:
            self.boundary = np.asarray(self.boundary, dtype=float).reshape(-1, self.ftype.d, self.ftype.d)

    def __len__(self) -> int:
        return len(self.net)

    def flag(self, i: int) -> Flag:
        return Flag(self.net[i], self.ftype)

    def flags(self) -> List[Flag]:
        return [self.flag(i) for i in range(len(self))]

    def membership_margins(self, points: np.ndarray) -> np.ndarray:
        if len(self) == 0:
            raise EmptyNet(f"set {self.label!r} has no net points")
        points = np.asarray(points, dtype=float).reshape(-1, self.ftype.d, self.ftype.d)
        return self.r - pairwise_distances(points, self.ftype, self.net).min(axis=1)

    def diameter(self) -> float:
        if len(self) == 0:
            raise EmptyNet(f"set {self.label!r} has no net points")
        return float(pairwise_distances(self.net, self.ftype).max()) + 2.0 * self.r

    def transformed(self, g: np.ndarray, label: Optional[str] = None) -> "FlagSet":
        boundary = batch_act(g, self.boundary) if self.boundary is not None else None
        return FlagSet(batch_act(g, self.net), self.ftype, self.r, label or self.label, boundary, dict(self.meta))

    def interior_sample(self) -> np.ndarray:
        """Net points farther than max(c * r, f * diameter) from the recorded boundary flags."""
        if self.boundary is None or len(self.boundary) == 0:
            return self.net
        clearance = max(settings.INTERIOR_CLEARANCE * self.r, settings.INTERIOR_FRACTION * self.diameter())
        to_boundary = pairwise_distances(self.net, self.ftype, self.boundary).min(axis=1)
        keep = to_boundary > clearance
        if not np.any(keep):
            keep = to_boundary == to_boundary.max()
        return self.net[keep]

    def to_dict(self) -> dict:
        out = {
            "label": self.label,
            "type": self.ftype.to_dict(),
            "r": float(self.r),
            "net": self.net.tolist(),
        }
        if self.boundary is not None:
            out["boundary"] = self.boundary.tolist()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "FlagSet":
        ftype = FlagType(tuple(data["type"]["dims"]), int(data["type"]["d"]))
        boundary = data.get("boundary")
        return cls(np.array(data["net"], dtype=float), ftype, float(data["r"]), data.get("label", ""),
                   np.array(boundary, dtype=float) if boundary is not None else None)

    def to_frame(self) -> pd.DataFrame:
        d = self.ftype.d
        cols = [f"b{i}{j}" for i in range(d) for j in range(d)]
        frame = pd.DataFrame(self.net.reshape(len(self), d * d), columns=cols)
        frame.insert(0, "label", self.label)
        return frame


def set_membership_margin(S: FlagSet, F: Flag) -> float:
    """r - min over the net of d(F, p); positive inside the modelled set."""
    _check_same_type(S.ftype, F.ftype)
    return float(S.membership_margins(F.basis[None])[0])


def set_diameter(S: FlagSet) -> float:
    return S.diameter()


def veronese_flag(v: Sequence[float], d: int) -> Flag:
    """Osculating flag in R^d of the Veronese curve at the point [v] of RP^1."""
    a, b = float(v[0]), float(v[1])
    return Flag.from_matrix(sym_power_lift(np.array([[a, -b], [b, a]]), d), FlagType.full(d))
