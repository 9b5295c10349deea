"""Second-moment model of the Gaussian signals in the genie-aided channel.

Every signal is a linear combination of seven independent zero-mean
Gaussians::

    X0G ~ N(0, 1)        common codeword (unit variance, scaled below)
    X11G ~ N(0, P1)      private codeword of user 1
    X22G ~ N(0, P2)      private codeword of user 2
    Zt1 ~ N(0, v1)       genie noises
    Zt2 ~ N(0, v2)
    N1 ~ N(0, 1 - a1^2)  residual channel noises
    N2 ~ N(0, 1 - a2^2)

and the derived signals are

    X1G = X11G + sqrt(P - P1) X0G       X2G = X22G + sqrt(P - P2) X0G
    Zk  = (ak / sqrt(vk)) Ztk + Nk
    Y1G = X1G + c X2G + Z1              Y2G = X2G + c X1G + Z2
    U1G = c X1G + Zt1                   U2G = c X2G + Zt2

plus the innovations ``Xt1G = X11G`` (the part of ``X1G`` not explained by
``X0G``), ``Yt1G = Xt1G + c Xt2G + Z1`` and ``Ut1G = c Xt1G + Zt1`` (and
their user-2 mirrors). Mutual informations are log-determinant differences
of conditional covariances, reported in bits. The conditional parts are
formed by projecting square-root factors rather than by subtracting
covariance blocks, which keeps them accurate at large powers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

import numpy as np

from .core import ChannelParams, GenieParams, PowerAllocation
from .errors import DomainError, SingularCovarianceError

BASE = ("X0G", "X11G", "X22G", "Zt1", "Zt2", "N1", "N2")
LOG2E = 1.0 / math.log(2.0)

Signal = Union[str, Mapping[str, float]]

# Relative cutoff below which a conditional variance direction counts as zero.
_RANK_TOL = 1e-12


@dataclass
class CovarianceModel:
    ch: ChannelParams
    alloc: PowerAllocation
    gp: GenieParams
    base_var: np.ndarray
    maps: dict

    @property
    def names(self):
        return tuple(self.maps)

    def vector(self, signal: Signal) -> np.ndarray:
        """Coefficient row over the base components for a name or a linear combination."""
        if isinstance(signal, str):
            try:
                return self.maps[signal]
            except KeyError:
                raise DomainError(f"unknown signal {signal!r}") from None
        out = np.zeros(len(BASE))
        for name, coeff in signal.items():
            out = out + coeff * self.vector(name)
        return out

    def lift(self, signals: Sequence[Signal]) -> np.ndarray:
        if not signals:
            return np.zeros((0, len(BASE)))
        return np.vstack([self.vector(s) for s in signals])

    def factor(self, signals: Sequence[Signal]) -> np.ndarray:
        """Rows over the standardized base: ``factor(s) @ factor(s).T == cov(s)``."""
        return self.lift(signals) * np.sqrt(self.base_var)

    def cov(self, left: Sequence[Signal], right: Sequence[Signal] | None = None) -> np.ndarray:
        L = self.lift(left)
        R = L if right is None else self.lift(right)
        return (L * self.base_var) @ R.T

    def full_covariance(self) -> np.ndarray:
        return self.cov(list(self.maps))


def build_model(ch: ChannelParams, alloc: PowerAllocation, gp: GenieParams) -> CovarianceModel:
    if gp.v1 <= 0.0 or gp.v2 <= 0.0:
        raise DomainError("genie noise variances must be > 0")
    alloc.check(ch)
    P, c = ch.P, ch.c
    s1 = math.sqrt(P - alloc.P1) if alloc.P1 < P else 0.0
    s2 = math.sqrt(P - alloc.P2) if alloc.P2 < P else 0.0

    base_var = np.array([1.0, alloc.P1, alloc.P2, gp.v1, gp.v2, 1.0 - gp.a1_sq, 1.0 - gp.a2_sq])
    eye = np.eye(len(BASE))
    maps = {name: eye[i] for i, name in enumerate(BASE)}
    maps["X1G"] = maps["X11G"] + s1 * maps["X0G"]
    maps["X2G"] = maps["X22G"] + s2 * maps["X0G"]
    maps["Z1"] = (gp.a1 / math.sqrt(gp.v1)) * maps["Zt1"] + maps["N1"]
    maps["Z2"] = (gp.a2 / math.sqrt(gp.v2)) * maps["Zt2"] + maps["N2"]
    maps["Y1G"] = maps["X1G"] + c * maps["X2G"] + maps["Z1"]
    maps["Y2G"] = maps["X2G"] + c * maps["X1G"] + maps["Z2"]
    maps["U1G"] = c * maps["X1G"] + maps["Zt1"]
    maps["U2G"] = c * maps["X2G"] + maps["Zt2"]
    maps["Xt1G"] = maps["X11G"]
    maps["Xt2G"] = maps["X22G"]
    maps["Yt1G"] = maps["Xt1G"] + c * maps["Xt2G"] + maps["Z1"]
    maps["Yt2G"] = maps["Xt2G"] + c * maps["Xt1G"] + maps["Z2"]
    maps["Ut1G"] = c * maps["Xt1G"] + maps["Zt1"]
    maps["Ut2G"] = c * maps["Xt2G"] + maps["Zt2"]

    model = CovarianceModel(ch, alloc, gp, base_var, maps)
    eig = np.linalg.eigvalsh(model.full_covariance())
    if eig.min() < -1e-10 * max(1.0, eig.max()):
        raise DomainError(f"covariance is not positive semidefinite (min eigenvalue {eig.min()})")
    return model


def _row_basis(G):
    """Orthonormal basis (as rows) of the row space of ``G``."""
    if G.shape[0] == 0:
        return G
    _, sv, Vt = np.linalg.svd(G, full_matrices=False)
    rank = int(np.count_nonzero(sv * sv > _RANK_TOL * max(float(sv.max()) ** 2, 1.0)))
    return Vt[:rank]


def residual_factor(model: CovarianceModel, targets: Sequence[Signal], given: Sequence[Signal]) -> np.ndarray:
    """Whitened factor ``R`` with ``R R^T = Cov(targets | given)``.

    The targets' rows over the standardized base are projected onto the
    orthogonal complement of the rows of ``given``. Working with factors
    rather than covariances keeps the conditioning of large-power models
    in check; the projection is applied twice to wash out rounding.
    """
    T = model.factor(targets)
    if not given:
        return T
    B = _row_basis(model.factor(given))
    for _ in range(2):
        T = T - (T @ B.T) @ B
    return T


def conditional_cov(model: CovarianceModel, targets: Sequence[Signal], given: Sequence[Signal]) -> np.ndarray:
    """Covariance of ``targets`` given ``given``.

    Equal to the Schur complement ``S_tt - S_tg S_gg^+ S_gt`` (pseudo-inverse
    for a degenerate ``given``), computed by orthogonal projection.
    """
    R = residual_factor(model, targets, given)
    return R @ R.T


def _logdet(S, block):
    sign, logdet = np.linalg.slogdet(S)
    if sign <= 0:
        raise SingularCovarianceError(block)
    return logdet


def _label(signals):
    return ",".join(s if isinstance(s, str) else "+".join(f"{v:g}*{k}" for k, v in s.items()) for s in signals)


def gaussian_cmi(
    model: CovarianceModel,
    targets: Sequence[Signal],
    observations: Sequence[Signal],
    conditioners: Sequence[Signal] = (),
) -> float:
    """``I(targets; observations | conditioners)`` in bits.

    Directions of ``targets`` that ``conditioners`` already determine carry no
    information and are projected out first. If a remaining direction is
    determined by the observations, the information is infinite and
    :class:`SingularCovarianceError` is raised.
    """
    targets = list(targets)
    observations = list(observations)
    conditioners = list(conditioners)
    R_c = residual_factor(model, targets, conditioners)
    R_co = residual_factor(model, targets, conditioners + observations)
    U, sv, _ = np.linalg.svd(R_c, full_matrices=False)
    scale = max(float(np.abs(np.diag(model.cov(targets))).max(initial=0.0)), 1.0)
    keep = sv * sv > _RANK_TOL * scale
    if not keep.any():
        return 0.0
    Q = U[:, keep]
    sv_o = np.linalg.svd(Q.T @ R_co, compute_uv=False)
    if sv_o.min() ** 2 <= _RANK_TOL * scale:
        raise SingularCovarianceError(
            f"{_label(targets)} | {_label(conditioners + observations)}",
            "target is determined by the observations; mutual information diverges",
        )
    value = (np.log(sv[keep]).sum() - np.log(sv_o).sum()) * LOG2E
    return max(value, 0.0) if value > -1e-13 else value


def outer_bound_mi_sum(model: CovarianceModel) -> float:
    """Mutual-information form of the genie objective.

    ``(1/2)[I(X1G; Y1G, U1G | X0G) + I(Y1G; X1G, X0G) + I(X2G; Y2G, U2G | X0G) + I(Y2G; X2G, X0G)]``.
    """
    total = 0.0
    for k in (1, 2):
        total += gaussian_cmi(model, [f"X{k}G"], [f"Y{k}G", f"U{k}G"], ["X0G"])
        total += gaussian_cmi(model, [f"Y{k}G"], [f"X{k}G", "X0G"])
    return 0.5 * total


def inner_bound_mi_sum(model: CovarianceModel) -> float:
    """``I(X1G, X0G; Y1G) + I(X2G; Y2G | X0G)``; the superposition rate for ``P1 = P2``."""
    return gaussian_cmi(model, ["X1G", "X0G"], ["Y1G"]) + gaussian_cmi(model, ["X2G"], ["Y2G"], ["X0G"])


def genie_gap(model: CovarianceModel) -> float:
    """``(1/2)[I(X1G; U1G | X0G, Y1G) + I(X2G; U2G | X0G, Y2G)]`` in bits."""
    return 0.5 * (
        gaussian_cmi(model, ["X1G"], ["U1G"], ["X0G", "Y1G"])
        + gaussian_cmi(model, ["X2G"], ["U2G"], ["X0G", "Y2G"])
    )


def markov_check(
    model: CovarianceModel,
    X: Sequence[Signal],
    Y: Sequence[Signal],
    Z: Sequence[Signal],
    rtol: float = 1e-10,
) -> tuple[bool, float]:
    """Gaussian Markov test for ``X -> Y -> Z``.

    Residual is ``max |Cov(X,Z) - Cov(X,Y) Cov(Y)^-1 Cov(Y,Z)|``; the chain
    holds when it is at most ``rtol`` times the scale of ``Cov(X)`` and ``Cov(Z)``.
    """
    S_yy = model.cov(Y)
    w = np.linalg.eigvalsh(S_yy)
    if w.min() <= _RANK_TOL * max(w.max(), 1.0):
        raise SingularCovarianceError(_label(Y), "Cov(Y) is singular")
    S_xz = model.cov(X, Z)
    S_xy = model.cov(X, Y)
    S_yz = model.cov(Y, Z)
    residual = float(np.abs(S_xz - S_xy @ np.linalg.solve(S_yy, S_yz)).max())
    scale = math.sqrt(float(np.diag(model.cov(X)).max()) * float(np.diag(model.cov(Z)).max()))
    return residual <= rtol * max(scale, 1.0), residual


def sample_signals(model: CovarianceModel, names: Sequence[str], n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` joint samples of named signals from the channel equations.

    The signals are generated by writing out the channel, genie and noise
    equations, not through the model's coefficient rows, so moments of
    these samples are an independent check on :meth:`CovarianceModel.cov`.
    Returns an array of shape ``(n, len(names))``.
    """
    ch, alloc, gp = model.ch, model.alloc, model.gp
    P, c = ch.P, ch.c
    x0 = rng.standard_normal(n)
    x11 = math.sqrt(alloc.P1) * rng.standard_normal(n)
    x22 = math.sqrt(alloc.P2) * rng.standard_normal(n)
    zt1 = math.sqrt(gp.v1) * rng.standard_normal(n)
    zt2 = math.sqrt(gp.v2) * rng.standard_normal(n)
    n1 = math.sqrt(1.0 - gp.a1_sq) * rng.standard_normal(n)
    n2 = math.sqrt(1.0 - gp.a2_sq) * rng.standard_normal(n)

    x1 = x11 + math.sqrt(P - alloc.P1) * x0
    x2 = x22 + math.sqrt(P - alloc.P2) * x0
    z1 = gp.a1 / math.sqrt(gp.v1) * zt1 + n1
    z2 = gp.a2 / math.sqrt(gp.v2) * zt2 + n2
    sig = {
        "X0G": x0, "X11G": x11, "X22G": x22, "Zt1": zt1, "Zt2": zt2, "N1": n1, "N2": n2,
        "X1G": x1, "X2G": x2, "Z1": z1, "Z2": z2,
        "Y1G": x1 + c * x2 + z1, "Y2G": x2 + c * x1 + z2,
        "U1G": c * x1 + zt1, "U2G": c * x2 + zt2,
        "Xt1G": x11, "Xt2G": x22,
        "Yt1G": x11 + c * x22 + z1, "Yt2G": x22 + c * x11 + z2,
        "Ut1G": c * x11 + zt1, "Ut2G": c * x22 + zt2,
    }
    try:
        return np.column_stack([sig[name] for name in names])
    except KeyError as exc:
        raise DomainError(f"unknown signal {exc.args[0]!r}") from None


@dataclass
class EntropyCheck:
    estimate: float
    stderr: float
    closed_form: float
    passed: bool

    @property
    def z_score(self) -> float:
        return (self.estimate - self.closed_form) / self.stderr if self.stderr > 0 else 0.0


def gaussian_entropy_bits(S: np.ndarray) -> float:
    """Differential entropy ``(1/2) log2((2 pi e)^n det S)``."""
    n = S.shape[0]
    return 0.5 * (n * math.log(2.0 * math.pi * math.e) + _logdet(S, "entropy")) * LOG2E


def mc_entropy_check(
    model: CovarianceModel,
    names: Sequence[str],
    n_samples: int = 1_000_000,
    seed: int = 0,
    chunk: int = 100_000,
    n_sigma: float = 4.0,
) -> EntropyCheck:
    """Monte Carlo estimate of ``h(names)`` against the log-det closed form.

    The estimate averages ``-log2 p(x)`` with ``p`` the closed-form Gaussian
    density over samples from :func:`sample_signals`. Chunk ``k`` uses a
    Philox stream keyed by ``(seed, k)``.
    """
    S = model.cov(list(names))
    closed = gaussian_entropy_bits(S)
    d = S.shape[0]
    Sinv = np.linalg.inv(S)
    const = 0.5 * (d * math.log(2.0 * math.pi) + _logdet(S, ",".join(names)))
    total = 0.0
    total_sq = 0.0
    done = 0
    k = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        rng = np.random.Generator(np.random.Philox(key=[seed, k]))
        x = sample_signals(model, names, m, rng)
        nll = (const + 0.5 * np.einsum("ij,jk,ik->i", x, Sinv, x)) * LOG2E
        total += float(nll.sum())
        total_sq += float((nll * nll).sum())
        done += m
        k += 1
    mean = total / n_samples
    var = max(total_sq / n_samples - mean * mean, 0.0)
    stderr = math.sqrt(var / n_samples)
    return EntropyCheck(mean, stderr, closed, abs(mean - closed) <= n_sigma * stderr)


def mc_covariance_zscores(
    model: CovarianceModel, names: Sequence[str], n_samples: int = 1_000_000, seed: int = 0
) -> np.ndarray:
    """z-scores of sample covariances of :func:`sample_signals` against :meth:`CovarianceModel.cov`.

    The standard error of a Gaussian product moment is ``sqrt((S_ii S_jj + S_ij^2) / n)``.
    """
    rng = np.random.Generator(np.random.Philox(key=[seed, 0]))
    x = sample_signals(model, names, n_samples, rng)
    emp = x.T @ x / n_samples
    S = model.cov(list(names))
    se = np.sqrt((np.outer(np.diag(S), np.diag(S)) + S * S) / n_samples)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, (emp - S) / np.where(se > 0, se, 1.0), 0.0)
    return z
