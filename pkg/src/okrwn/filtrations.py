"""Norm families on a finite-dimensional space and their filtrations.

A family ``t -> H(t)`` of Hermitian positive matrices gives the norms
``||F||_t^2 = F* H(t) F`` and the dual norms ``||u||_{*t}^2 = u* H(t)^{-1} u``.
Jumping numbers are the exponential growth rates of dual norms.  They are
read off the generalized eigenvalues of ``H(t)`` against ``H(0)``.

Entries span many orders of magnitude (``e^{-lambda t}`` with ``t`` up to
``2T = 120``), so every solve and eigenproblem runs in mpmath.  The working
precision grows with the dynamic range of the family.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import mpmath as mp
import numpy as np

from okrwn.errors import ConditioningWarning, InvariantError, OkrwnError, UnsupportedError

COND_GUARD = 1e12
DEFAULT_T = 60.0
BOUNDARY_TOL = 1e-3


# -- mp helpers -------------------------------------------------------------------


def _to_mp(a) -> mp.matrix:
    a = np.asarray(a)
    if a.ndim == 1:
        a = a[:, None]
    m = mp.matrix(a.shape[0], a.shape[1])
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            z = complex(a[i, j])
            m[i, j] = mp.mpc(z.real, z.imag) if z.imag else mp.mpf(z.real)
    return m


def _to_np(m: mp.matrix) -> np.ndarray:
    return np.array([[complex(m[i, j]) for j in range(m.cols)] for i in range(m.rows)])


def _herm_quad(x: mp.matrix, H: mp.matrix):
    """``x* H x`` (real part)."""
    return mp.re((x.H * H * x)[0, 0])


def _solve_pd(H: mp.matrix, b: mp.matrix) -> mp.matrix:
    L = mp.cholesky(H)
    y = mp.lu_solve(L, b)
    return mp.lu_solve(L.H, y)


def _equilibrated_cond(h: np.ndarray) -> float:
    d = np.sqrt(np.abs(np.real(np.diag(h))))
    if (d == 0).any():
        return math.inf
    scaled = h / np.outer(d, d)
    try:
        return float(np.linalg.cond(scaled))
    except np.linalg.LinAlgError:
        return math.inf


def _guard(h: np.ndarray, what: str) -> float:
    c = _equilibrated_cond(h)
    if c > COND_GUARD:
        warnings.warn(f"{what}: condition number {c:.3g} exceeds {COND_GUARD:.0e}; results degraded",
                      ConditioningWarning, stacklevel=3)
    return c


# -- families ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GramFamily:
    """``kind`` is ``diagonal`` (``H(t) = U diag(e^{-lambda t}) U*``), ``sampled``
    (matrices at given times, linear in between) or ``quadrature`` (lazy
    evaluator, cached)."""

    N: int
    kind: str
    lambdas: np.ndarray | None = None
    basis: np.ndarray | None = None
    t_samples: np.ndarray | None = None
    matrices: np.ndarray | None = None
    evaluator: Callable | None = field(default=None, compare=False, repr=False)
    meta: dict = field(default_factory=dict, compare=False)
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def diagonal(cls, lambdas, basis=None) -> "GramFamily":
        lam = np.asarray(lambdas, dtype=float)
        N = len(lam)
        U = np.eye(N, dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
        if U.shape != (N, N):
            raise InvariantError("basis must be N x N", field="basis")
        if abs(np.linalg.det(U)) < 1e-12:
            raise InvariantError("basis must be invertible", field="basis")
        return cls(N, "diagonal", lam, U)

    @classmethod
    def sampled(cls, t_samples, matrices) -> "GramFamily":
        t = np.asarray(t_samples, dtype=float)
        mats = np.asarray(matrices, dtype=complex)
        if mats.ndim != 3 or mats.shape[0] != len(t) or mats.shape[1] != mats.shape[2]:
            raise InvariantError("need one N x N matrix per sample", field="matrices")
        if t[0] != 0 or (np.diff(t) <= 0).any():
            raise InvariantError("samples must start at 0 and increase", field="t_samples")
        fam = cls(mats.shape[1], "sampled", t_samples=t, matrices=mats)
        fam.validate()
        return fam

    @classmethod
    def quadrature_backed(cls, N: int, evaluator: Callable, meta: dict | None = None) -> "GramFamily":
        return cls(N, "quadrature", evaluator=evaluator, meta=dict(meta or {}))

    # evaluation

    def H(self, t: float) -> np.ndarray:
        t = float(t)
        if self.kind == "diagonal":
            U = self.basis
            return (U * np.exp(-self.lambdas * t)) @ U.conj().T
        if self.kind == "sampled":
            ts = self.t_samples
            if t <= ts[0]:
                return self.matrices[0]
            if t >= ts[-1]:
                if t > ts[-1] + 1e-12:
                    raise OkrwnError(f"t={t} beyond the last sample {ts[-1]}")
                return self.matrices[-1]
            i = int(np.searchsorted(ts, t)) - 1
            w = (t - ts[i]) / (ts[i + 1] - ts[i])
            return (1 - w) * self.matrices[i] + w * self.matrices[i + 1]
        if t not in self._cache:
            self._cache[t] = np.asarray(self.evaluator(t), dtype=complex)
        return self._cache[t]

    def H_mp(self, t: float) -> mp.matrix:
        """``H(t)`` at the current mp precision (exact construction for the diagonal kind)."""
        if self.kind == "diagonal":
            U = _to_mp(self.basis)
            D = mp.diag([mp.exp(-mp.mpf(float(l)) * mp.mpf(t)) for l in self.lambdas])
            return U * D * U.H
        return _to_mp(self.H(t))

    def digits(self, t: float) -> int:
        """Working decimal digits for computations at time ``t``."""
        if self.kind == "diagonal":
            spread = float(np.ptp(self.lambdas)) if self.N > 1 else 0.0
            rng = spread * t / math.log(10) + math.log10(max(1.0, np.linalg.cond(self.basis)) ** 2)
        else:
            d0 = np.real(np.diag(self.H(0.0)))
            dt = np.real(np.diag(self.H(t)))
            rng = math.log10(max(d0.max() / max(dt.min(), 1e-300), 1.0))
        return int(30 + 2 * rng)

    def validate(self, t_samples=None, tol: float = 1e-10) -> None:
        """Hermitian positive definite and ``H(t) <= H(0)`` on the samples."""
        ts = self.t_samples if t_samples is None else t_samples
        if ts is None:
            ts = [0.0, 1.0, 5.0]
        h0 = self.H(0.0)
        for t in ts:
            h = self.H(float(t))
            if not np.allclose(h, h.conj().T, atol=tol * np.abs(h).max()):
                raise InvariantError(f"H({t}) is not Hermitian", field="matrices")
            if np.linalg.eigvalsh(h).min() <= 0:
                raise InvariantError(f"H({t}) is not positive definite", field="matrices")
            # H(0) - H(t) >= 0, checked relative to H(0)
            if np.linalg.eigvalsh(h0 - h).min() < -tol * np.abs(h0).max():
                raise InvariantError(f"H({t}) exceeds H(0)", field="matrices")

    def to_json(self) -> dict:
        if self.kind == "diagonal":
            data = {"lambdas": self.lambdas.tolist(), "basis_re": self.basis.real.tolist(),
                    "basis_im": self.basis.imag.tolist()}
        elif self.kind == "sampled":
            data = {"t": self.t_samples.tolist(), "matrices_re": self.matrices.real.tolist(),
                    "matrices_im": self.matrices.imag.tolist()}
        elif "radial" in self.meta:
            data = {"radial": self.meta["radial"]}
        else:
            raise UnsupportedError("quadrature families serialize only as radial specs")
        return {"kind": self.kind, "N": self.N, "data": data}

    @classmethod
    def from_json(cls, obj) -> "GramFamily":
        kind, data = obj["kind"], obj["data"]
        if kind == "diagonal":
            basis = None
            if "basis_re" in data:
                basis = np.asarray(data["basis_re"]) + 1j * np.asarray(data.get("basis_im", 0.0))
            return cls.diagonal(data["lambdas"], basis)
        if kind == "sampled":
            mats = np.asarray(data["matrices_re"]) + 1j * np.asarray(data.get("matrices_im", 0.0))
            return cls.sampled(data["t"], mats)
        if kind in ("quadrature", "quadrature_backed") and "radial" in data:
            from okrwn.toric import fubini_study, radial_gram_family

            spec = data["radial"]
            return radial_gram_family(fubini_study(1, int(spec["d"])), float(spec["lam"]))
        raise InvariantError(f"unknown family kind {kind!r}", field="kind")


# -- dual norms and spectra ----------------------------------------------------------------


def dual_norm(fam: GramFamily, u, t: float) -> float:
    """``u* H(t)^{-1} u`` by a Cholesky solve.

    Diagonal-kind matrices are rebuilt exactly in mp; other kinds carry float
    entries, so a large condition number there is reported.
    """
    if fam.kind != "diagonal":
        _guard(fam.H(t), f"H({t})")
    with mp.workdps(fam.digits(t)):
        x = _to_mp(np.asarray(u, dtype=complex))
        H = fam.H_mp(t)
        return float(mp.re((x.H * _solve_pd(H, x))[0, 0]))


def primal_norm(fam: GramFamily, F, t: float) -> float:
    with mp.workdps(fam.digits(t)):
        x = _to_mp(np.asarray(F, dtype=complex))
        return float(_herm_quad(x, fam.H_mp(t)))


def _log_primal_norm(fam: GramFamily, F, t: float):
    with mp.workdps(fam.digits(t)):
        x = _to_mp(np.asarray(F, dtype=complex))
        return float(mp.log(_herm_quad(x, fam.H_mp(t))))


def _generalized_eig(fam: GramFamily, t: float):
    """Eigenpairs of ``H(0)^{-1} H(t)``; eigenvalues descending, vectors as
    ``x`` with ``x* H(0) x = 1``."""
    L = mp.cholesky(fam.H_mp(0.0))
    Linv = L ** -1
    M = Linv * fam.H_mp(t) * Linv.H
    M = (M + M.H) / 2
    E, Q = mp.eighe(M)
    order = sorted(range(len(E)), key=lambda i: -mp.re(E[i]))
    X = Linv.H * Q
    vals = [mp.re(E[i]) for i in order]
    vecs = mp.matrix(fam.N, fam.N)
    for c, i in enumerate(order):
        for r in range(fam.N):
            vecs[r, c] = X[r, i]
    return vals, vecs


@dataclass(frozen=True)
class JumpingSpectrum:
    values: tuple
    multiplicities: tuple
    dual_bases: tuple  # per jump, N x m array of dual vectors
    rates: tuple  # per eigen-curve extrapolated rate
    intervals: tuple  # per eigen-curve (lo, hi)
    converged: bool
    # per jump, mp columns x_j with u_i* x_j = delta_ij; they span S_alpha exactly
    primal_bases: tuple | None = field(default=None, compare=False, repr=False)

    def V(self, alpha: float, tol: float = 0.0) -> np.ndarray:
        """Dual vectors spanning ``V_alpha = {u : alpha(u) <= alpha}``."""
        cols = [b for a, b in zip(self.values, self.dual_bases) if a <= alpha + tol]
        if not cols:
            return np.zeros((self.N, 0), dtype=complex)
        return np.hstack(cols)

    @property
    def N(self) -> int:
        return sum(self.multiplicities)

    def S(self, alpha: float, tol: float = 0.0) -> np.ndarray:
        """Basis of ``S_alpha``, the annihilator of ``V_alpha``."""
        V = self.V(alpha, tol)
        if V.shape[1] == 0:
            return np.eye(self.N, dtype=complex)
        # F with u* F = 0 for all u in V
        _, s, vh = np.linalg.svd(V.conj().T)
        rank = int((s > 1e-10 * s.max()).sum())
        return vh[rank:].conj().T

    def S_mp(self, alpha: float, tol: float = 0.0):
        """``S_alpha`` as an mp matrix, spanned by the primal eigenvectors of
        the jumps above ``alpha``.  Float bases tilt by ~1e-16 toward slower
        directions, which ``e^{(lambda_max - alpha) t}`` amplifies."""
        if self.primal_bases is None:
            S = self.S(alpha, tol)
            return _to_mp(S) if S.shape[1] else None
        cols = [B for a, B in zip(self.values, self.primal_bases) if a > alpha + tol]
        if not cols:
            return None
        out = mp.matrix(self.N, sum(B.cols for B in cols))
        c = 0
        for B in cols:
            for j in range(B.cols):
                for r in range(self.N):
                    out[r, c] = B[r, j]
                c += 1
        return out

    def snap(self, rate: float, tol: float = 0.05):
        best = min(self.values, key=lambda a: abs(a - rate))
        return best if abs(best - rate) <= tol else None


def jumping_spectrum(fam: GramFamily, T: float = DEFAULT_T, cluster_tol: float = 0.05,
                     agree_tol: float = 0.05) -> JumpingSpectrum:
    """Rates ``-log mu_j(t)/t`` from secants on ``[T/2, T]`` and ``[T, 2T]``.

    The two secants are combined by Richardson extrapolation (exact for
    ``log mu = -alpha t + c log t + d``); curves are clustered into jumps
    within ``cluster_tol``.
    """
    logs = {}
    vecs = None
    with mp.workdps(fam.digits(2 * T)):
        for t in (T / 2, T, 2 * T):
            vals, X = _generalized_eig(fam, t)
            if min(vals) <= 0:
                raise OkrwnError(f"nonpositive generalized eigenvalue at t={t}")
            logs[t] = [float(mp.log(v)) for v in vals]
            if t == 2 * T:
                H0 = fam.H_mp(0.0)
                vecs = _to_np(H0 * X)
                Xmp = X
    r1 = [(a - b) / (T / 2) for a, b in zip(logs[T / 2], logs[T])]
    r2 = [(a - b) / T for a, b in zip(logs[T], logs[2 * T])]
    ext = [2 * b - a for a, b in zip(r1, r2)]
    intervals = tuple((min(a, b, c), max(a, b, c)) for a, b, c in zip(r1, r2, ext))
    converged = all(abs(b - a) < agree_tol * max(1.0, abs(b)) for a, b in zip(r1, r2))

    order = np.argsort(ext)
    groups: list[list[int]] = []
    for i in order:
        if groups and abs(ext[i] - ext[groups[-1][-1]]) <= cluster_tol:
            groups[-1].append(int(i))
        else:
            groups.append([int(i)])
    values = tuple(float(np.mean([ext[i] for i in g])) for g in groups)
    bases, primal = [], []
    for g in groups:
        B = vecs[:, g]
        bases.append(B / np.linalg.norm(B, axis=0))
        P = mp.matrix(fam.N, len(g))
        for c, i in enumerate(g):
            for r in range(fam.N):
                P[r, c] = Xmp[r, i]
        primal.append(P)
    return JumpingSpectrum(values, tuple(len(g) for g in groups), tuple(bases), tuple(ext), intervals, converged,
                           tuple(primal))


# -- quotients ---------------------------------------------------------------------


def _quotient_norm_mp(fam: GramFamily, F, S, t: float):
    """``min ||F + s||_t^2`` over ``s`` in span(S) via the H(t)-normal equations."""
    x = _to_mp(np.asarray(F, dtype=complex))
    H = fam.H_mp(t)
    full = _herm_quad(x, H)
    if S is None or S.cols == 0:
        return full
    B = S
    G = B.H * H * B
    b = B.H * H * x
    z = mp.lu_solve(G, b)
    # a squared norm; clamp rounding below zero
    return max(mp.re(full - (b.H * z)[0, 0]), mp.mpf(0))


@dataclass(frozen=True)
class QuotientTrace:
    alpha: float
    t: tuple
    values: tuple
    degenerate: bool = False

    def is_monotone(self, rel_tol: float = 1e-9) -> bool:
        v = self.values
        return all(b >= a - rel_tol * max(abs(a), abs(b)) for a, b in zip(v, v[1:]))

    def to_rows(self):
        return [(t, v) for t, v in zip(self.t, self.values)]


def quotient_trace(fam: GramFamily, F, alpha: float, t_samples, spectrum: JumpingSpectrum | None = None,
                   tol: float = 1e-9) -> QuotientTrace:
    """``e^{alpha t} ||[F]||_t^2`` in the quotient by ``S_alpha``."""
    spec = spectrum or jumping_spectrum(fam)
    S = spec.S_mp(alpha, tol)
    degenerate = alpha < spec.values[0] - tol or alpha >= spec.values[-1] - tol
    ts = tuple(float(t) for t in t_samples)
    vals = []
    with mp.workdps(fam.digits(max(ts))):
        for t in ts:
            q = _quotient_norm_mp(fam, F, S, t)
            vals.append(float(mp.exp(mp.mpf(alpha) * t) * q))
    return QuotientTrace(float(alpha), ts, tuple(vals), bool(degenerate))


def decay_rate(fam: GramFamily, F, T: float = DEFAULT_T) -> float:
    """Richardson estimate of ``-lim log ||F||_t^2 / t``."""
    l1, l2, l3 = (_log_primal_norm(fam, F, t) for t in (T / 2, T, 2 * T))
    r1 = (l1 - l2) / (T / 2)
    r2 = (l2 - l3) / T
    return 2 * r2 - r1


def s_alpha_membership(fam: GramFamily, F, alpha: float, spectrum: JumpingSpectrum | None = None,
                       T: float = DEFAULT_T):
    """Whether ``int_0^inf ||F||_t^2 e^{t alpha} dt`` converges.

    The measured decay is snapped to the nearest jump.  A snapped decay equal
    to ``alpha`` diverges (False).  An unsnapped decay within 1e-3 of
    ``alpha`` cannot be decided numerically and gives None.
    """
    F = np.asarray(F, dtype=complex)
    if not F.any():
        return True
    spec = spectrum or jumping_spectrum(fam, T)
    r = decay_rate(fam, F, T)
    snapped = spec.snap(r)
    if snapped is not None:
        if abs(snapped - alpha) <= 1e-12:
            return False
        return bool(snapped > alpha)
    if abs(r - alpha) <= BOUNDARY_TOL:
        return None
    return bool(r > alpha)


def annihilator_membership(spectrum: JumpingSpectrum, F, alpha: float, tol: float = 1e-9) -> bool:
    """``u(F) = 0`` for every ``u`` in ``V_alpha``."""
    F = np.asarray(F, dtype=complex)
    V = spectrum.V(alpha)
    if V.shape[1] == 0:
        return True
    scale = max(np.linalg.norm(F), 1e-300)
    return bool(np.abs(V.conj().T @ F).max() <= tol * scale)


def decay_bound_holds(fam: GramFamily, F, alpha: float, spectrum: JumpingSpectrum | None = None,
                      T: float = DEFAULT_T, tol: float = 1e-2) -> bool:
    """``limsup log ||F||_t^2 / t <= -min{alpha_j > alpha}``."""
    F = np.asarray(F, dtype=complex)
    if not F.any():
        return True
    spec = spectrum or jumping_spectrum(fam, T)
    above = [a for a in spec.values if a > alpha]
    if not above:
        return False
    return bool(decay_rate(fam, F, T) >= min(above) - tol)


# -- flat reduction and phase invariance ------------------------------------------------


@dataclass(frozen=True)
class FlatReduction:
    basis: np.ndarray  # columns u_j, orthonormal for the *0 inner product
    lambdas: np.ndarray


def flat_reduction(fam: GramFamily, t: float = 1.0) -> FlatReduction:
    """Dual basis ``u_j`` and exponents with ``||sum a_j u_j||_{*t}^2 = sum |a_j|^2 e^{lambda_j t}``."""
    if fam.kind != "diagonal":
        raise UnsupportedError("flat reduction is implemented for simultaneously diagonalizable families only")
    with mp.workdps(fam.digits(t)):
        vals, X = _generalized_eig(fam, t)
        lam = [float(-mp.log(v) / t) for v in vals]
        U = _to_np(fam.H_mp(0.0) * X)
    order = np.argsort(lam)
    return FlatReduction(U[:, order], np.asarray(lam)[order])


def eigenvalue_invariance_check(fam: GramFamily, s_samples, t: float = 2.0,
                                reduction: FlatReduction | None = None) -> float:
    """Max spread over ``s`` of the eigenvalues of ``U_s^{-1} B_t A_t B_t U_s``.

    Coordinates are taken in the *0-orthonormal basis ``u_j``; there ``A_t``
    is the matrix of ``||.||_{*t}^2``, ``B_t = diag(e^{-t lambda_j/2})`` and
    ``U_s = diag(e^{-i s lambda_j/2})``.
    """
    red = reduction or flat_reduction(fam)
    N = fam.N
    if N == 1:
        return 0.0
    with mp.workdps(fam.digits(t)):
        Ub = _to_mp(red.basis)
        HinvU = mp.matrix(N, N)
        Ht = fam.H_mp(t)
        for j in range(N):
            col = _solve_pd(Ht, Ub[:, j])
            for r in range(N):
                HinvU[r, j] = col[r]
        A = Ub.H * HinvU
        A = (A + A.H) / 2
        B = mp.diag([mp.exp(-mp.mpf(float(l)) * t / 2) for l in red.lambdas])
        spectra = []
        for s in s_samples:
            Us = mp.diag([mp.expj(-mp.mpf(float(s)) * float(l) / 2) for l in red.lambdas])
            M = Us ** -1 * B * A * B * Us
            M = (M + M.H) / 2
            E, _ = mp.eighe(M)
            spectra.append(sorted(float(mp.re(e)) for e in E))
    arr = np.array(spectra)
    return float((arr.max(axis=0) - arr.min(axis=0)).max())


# -- jets and the extension estimate ------------------------------------------------


def _h0_projector(h0: np.ndarray, S: np.ndarray) -> np.ndarray:
    if S.shape[1] == 0:
        return np.zeros_like(h0)
    G = S.conj().T @ h0 @ S
    return S @ np.linalg.solve(G, S.conj().T @ h0)


def jet_norm(fam: GramFamily, F, k: int, inner: str = "h0") -> float:
    """Squared jet norm ``sum_{j<=k} lim e^{alpha_j t} ||F_j||_t^2``.

    ``F = F_1 + ... + F_k + R`` is the decomposition along the filtration
    ``F_{alpha_1} > F_{alpha_2} > ...``, orthogonal in the ``H(0)`` inner
    product (``inner="h0"``; the only choice implemented).
    """
    if fam.kind != "diagonal":
        raise UnsupportedError("jet norms use diagonal asymptotics")
    if inner != "h0":
        raise UnsupportedError(f"inner product {inner!r} is not implemented")
    red = flat_reduction(fam)
    jumps = sorted(set(np.round(red.lambdas, 9)))
    if not 1 <= k <= len(jumps):
        raise InvariantError(f"k must be in 1..{len(jumps)}", field="k")
    F = np.asarray(F, dtype=complex)
    h0 = fam.H(0.0)
    U = red.basis

    def annihilator(alpha):
        V = U[:, red.lambdas <= alpha + 1e-9]
        if V.shape[1] == 0:
            return np.eye(fam.N, dtype=complex)
        _, s, vh = np.linalg.svd(V.conj().T)
        rank = int((s > 1e-10 * s.max()).sum())
        return vh[rank:].conj().T

    projs = [np.eye(fam.N, dtype=complex)] + [_h0_projector(h0, annihilator(a)) for a in jumps[:k]]
    total = 0.0
    for j in range(1, k + 1):
        Fj = projs[j - 1] @ F - projs[j] @ F
        c = U.conj().T @ Fj  # flat coordinates: ||Fj||_t^2 = sum |c_i|^2 e^{-lambda_i t}
        a = jumps[j - 1]
        below = np.abs(c[red.lambdas < a - 1e-9])
        if below.size and below.max() > 1e-9 * max(1.0, np.abs(c).max()):
            return math.inf
        total += float(np.sum(np.abs(c[np.abs(red.lambdas - a) <= 1e-9]) ** 2))
    return total


@dataclass(frozen=True)
class ExtensionReport:
    lhs: float
    rhs: float
    slack: float
    ok: bool
    vacuous: bool = False


def extension_verify(fam: GramFamily, F, alpha: float, T: float = DEFAULT_T,
                     spectrum: JumpingSpectrum | None = None, n_window: int = 9) -> ExtensionReport:
    """Compare the smallest extension norm with the liminf estimate.

    ``lhs = min ||G||_0^2`` over ``G`` in ``F + S_alpha``.  ``rhs`` is the
    minimum of ``e^{alpha t} ||F||_t^2`` over the window ``[T, 2T]``.  When
    that quantity still grows across the window the estimate is infinite and
    the statement is vacuous.
    """
    spec = spectrum or jumping_spectrum(fam, T)
    S = spec.S_mp(alpha, 1e-9)
    with mp.workdps(fam.digits(0.0)):
        lhs = float(_quotient_norm_mp(fam, F, S, 0.0))
    ts = np.linspace(T, 2 * T, n_window)
    logs = [alpha * t + _log_primal_norm(fam, F, t) for t in ts]
    slope = (logs[-1] - logs[-2]) / (ts[-1] - ts[-2])
    if slope > 1e-3:
        return ExtensionReport(lhs, math.inf, math.inf, True, vacuous=True)
    rhs = float(math.exp(min(logs)))
    slack = rhs - lhs
    return ExtensionReport(lhs, rhs, slack, bool(slack >= -1e-8))


def convexity_defect(fam: GramFamily, u, t_samples) -> float:
    """Most negative midpoint second difference of ``t -> log ||u||_{*t}^2``."""
    ts = np.asarray(t_samples, dtype=float)
    logs = np.array([math.log(dual_norm(fam, u, t)) for t in ts])
    return float(min(0.0, (logs[2:] - 2 * logs[1:-1] + logs[:-2]).min())) if len(ts) >= 3 else 0.0
