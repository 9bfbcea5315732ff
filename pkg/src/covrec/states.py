"""Zero-mean Gaussian states in the complex covariance representation.

A zero-mean ``n``-mode Gaussian state is fully described by the coefficients
of its normally-ordered characteristic function,

    C_N(beta) = exp(beta^dag A_N beta / 2),

where ``beta = (beta_1, beta_1*, ..., beta_n, beta_n*)`` is the interleaved
vector of mode variables and ``A_N`` is a 2n x 2n complex matrix built from

    B_j      = <da_j^dag da_j>        (mean photon number, real >= 0)
    C_j      = <da_j^2>               (single-mode squeezing, complex)
    D_jk     = <da_j da_k>            (anomalous cross-correlation, complex)
    Dbar_jk  = -<da_j^dag da_k>       (normal cross-correlation, complex)

with ``da = a - <a>``.  The per-mode diagonal blocks of ``A_N`` are
``[[-B_j, C_j], [C_j*, -B_j]]`` and the upper cross blocks (mode j rows,
mode k columns, j < k) are ``[[Dbar_jk*, D_jk], [D_jk*, Dbar_jk]]``; the
matrix is Hermitian overall.

Everything here is an immutable value type or a pure function; instances can
be shared freely across threads and processes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

NORMAL = "normal"
SYMMETRIC = "symmetric"

COEFFICIENT_NAMES = ("b1", "b2", "c1", "c2", "d12", "dbar12")


def mode_pairs(n_modes: int) -> tuple[tuple[int, int], ...]:
    """Ordered (j, k) index pairs with j < k for an n-mode system."""
    return tuple(
        (j, k) for j in range(n_modes) for k in range(j + 1, n_modes)
    )


FOUR_MODE_PAIRS = mode_pairs(4)
_FOUR_MODE_PAIR_INDEX = {pair: i for i, pair in enumerate(FOUR_MODE_PAIRS)}


def _require_finite(name, *values):
    for v in values:
        if not np.all(np.isfinite(v)) or not np.all(np.isfinite(np.imag(v))):
            raise ValueError(f"{name} must be finite, got {v!r}")


def pair_index(j: int, k: int) -> int:
    """Position of the unordered detector pair (j, k) in FOUR_MODE_PAIRS."""
    key = (j, k) if j < k else (k, j)
    try:
        return _FOUR_MODE_PAIR_INDEX[key]
    except KeyError:
        raise ValueError(f"invalid four-mode pair ({j}, {k})") from None


@dataclass(frozen=True)
class TwoModeCoefficients:
    """The six covariance coefficients of a zero-mean two-mode Gaussian state.

    Construction only enforces finiteness; whether a coefficient set is an
    admissible quantum state is decided by :func:`physicality_check`, so that
    raw (possibly slightly unphysical) reconstruction results can still be
    represented and reported.
    """

    b1: float
    b2: float
    c1: complex = 0j
    c2: complex = 0j
    d12: complex = 0j
    dbar12: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "b1", float(self.b1))
        object.__setattr__(self, "b2", float(self.b2))
        for name in ("c1", "c2", "d12", "dbar12"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        _require_finite(
            "coefficients", self.b1, self.b2, self.c1, self.c2, self.d12, self.dbar12
        )

    @classmethod
    def vacuum(cls) -> "TwoModeCoefficients":
        return cls(0.0, 0.0)

    def asdict(self) -> dict:
        return {name: getattr(self, name) for name in COEFFICIENT_NAMES}


@dataclass(frozen=True)
class FourModeCoefficients:
    """Covariance coefficients of the four-mode field in front of the detectors.

    ``d`` and ``dbar`` are ordered by :data:`FOUR_MODE_PAIRS`.
    """

    b: tuple
    c: tuple
    d: tuple
    dbar: tuple

    def __post_init__(self):
        object.__setattr__(self, "b", tuple(float(x) for x in self.b))
        object.__setattr__(self, "c", tuple(complex(x) for x in self.c))
        object.__setattr__(self, "d", tuple(complex(x) for x in self.d))
        object.__setattr__(self, "dbar", tuple(complex(x) for x in self.dbar))
        if len(self.b) != 4 or len(self.c) != 4:
            raise ValueError("need exactly four modes")
        if len(self.d) != 6 or len(self.dbar) != 6:
            raise ValueError("need one d / dbar entry per mode pair")
        _require_finite("coefficients", *self.b, *self.c, *self.d, *self.dbar)

    @classmethod
    def vacuum(cls) -> "FourModeCoefficients":
        return cls((0.0,) * 4, (0j,) * 4, (0j,) * 6, (0j,) * 6)

    def d_pair(self, j: int, k: int) -> complex:
        return self.d[pair_index(j, k)]

    def dbar_pair(self, j: int, k: int) -> complex:
        return self.dbar[pair_index(j, k)]


@dataclass(frozen=True, eq=False)
class MultimodeCovariance:
    """A 2n x 2n complex covariance matrix with an ordering tag.

    The matrix must be Hermitian and satisfy the conjugation symmetry of the
    interleaved (beta, beta*) layout: swapping each mode's two slots and
    conjugating every entry reproduces the matrix.  The wrapped array is made
    read-only so instances stay immutable.
    """

    n_modes: int
    matrix: np.ndarray
    ordering: str = NORMAL

    def __post_init__(self):
        if self.ordering not in (NORMAL, SYMMETRIC):
            raise ValueError(f"unknown ordering {self.ordering!r}")
        m = np.array(self.matrix, dtype=complex)
        n = int(self.n_modes)
        if n < 1 or m.shape != (2 * n, 2 * n):
            raise ValueError(
                f"matrix shape {m.shape} does not match {n} modes"
            )
        if not np.all(np.isfinite(m.real)) or not np.all(np.isfinite(m.imag)):
            raise ValueError("covariance entries must be finite")
        scale = max(1.0, float(np.max(np.abs(m))))
        if not np.allclose(m, m.conj().T, atol=1e-9 * scale, rtol=0.0):
            raise ValueError("covariance matrix must be Hermitian")
        swapped = _swap_conjugate(m)
        if not np.allclose(m, swapped, atol=1e-9 * scale, rtol=0.0):
            raise ValueError(
                "covariance matrix violates the (beta, beta*) slot symmetry"
            )
        # Enforce the structure exactly so extract/build round-trips cleanly.
        m = (m + m.conj().T) / 2.0
        m = (m + _swap_conjugate(m)) / 2.0
        m.flags.writeable = False
        object.__setattr__(self, "n_modes", n)
        object.__setattr__(self, "matrix", m)


def _swap_conjugate(m: np.ndarray) -> np.ndarray:
    """Conjugate of the matrix with every mode's (beta, beta*) slots swapped."""
    n2 = m.shape[0]
    perm = np.arange(n2).reshape(-1, 2)[:, ::-1].reshape(-1)
    return m[np.ix_(perm, perm)].conj()


def _assemble(b, c, d, dbar) -> np.ndarray:
    n = len(b)
    m = np.zeros((2 * n, 2 * n), dtype=complex)
    for j in range(n):
        m[2 * j, 2 * j] = -b[j]
        m[2 * j + 1, 2 * j + 1] = -b[j]
        m[2 * j, 2 * j + 1] = c[j]
        m[2 * j + 1, 2 * j] = np.conj(c[j])
    for i, (j, k) in enumerate(mode_pairs(n)):
        m[2 * j, 2 * k] = np.conj(dbar[i])
        m[2 * j, 2 * k + 1] = d[i]
        m[2 * j + 1, 2 * k] = np.conj(d[i])
        m[2 * j + 1, 2 * k + 1] = dbar[i]
        # Hermitian partners in the lower block.
        m[2 * k, 2 * j] = dbar[i]
        m[2 * k, 2 * j + 1] = d[i]
        m[2 * k + 1, 2 * j] = np.conj(d[i])
        m[2 * k + 1, 2 * j + 1] = np.conj(dbar[i])
    return m


def _disassemble(m: MultimodeCovariance):
    a = m.matrix
    n = m.n_modes
    b = [-a[2 * j, 2 * j].real for j in range(n)]
    c = [a[2 * j, 2 * j + 1] for j in range(n)]
    d = [a[2 * j, 2 * k + 1] for j, k in mode_pairs(n)]
    dbar = [a[2 * j + 1, 2 * k + 1] for j, k in mode_pairs(n)]
    return b, c, d, dbar


def build_covariance(coeffs: TwoModeCoefficients) -> MultimodeCovariance:
    """Assemble the normally-ordered 4x4 covariance matrix of a two-mode state."""
    m = _assemble(
        (coeffs.b1, coeffs.b2),
        (coeffs.c1, coeffs.c2),
        (coeffs.d12,),
        (coeffs.dbar12,),
    )
    return MultimodeCovariance(2, m, NORMAL)


def build_four_mode_covariance(coeffs: FourModeCoefficients) -> MultimodeCovariance:
    """Assemble the normally-ordered 8x8 covariance matrix of a four-mode state."""
    m = _assemble(coeffs.b, coeffs.c, coeffs.d, coeffs.dbar)
    return MultimodeCovariance(4, m, NORMAL)


def extract_coefficients(m: MultimodeCovariance) -> TwoModeCoefficients:
    """Read the six two-mode coefficients back out of a covariance matrix.

    Inverse of :func:`build_covariance`; requires normal ordering because the
    coefficients are defined as normally-ordered moments.
    """
    if m.n_modes != 2:
        raise ValueError(f"expected a two-mode covariance, got {m.n_modes} modes")
    if m.ordering != NORMAL:
        raise ValueError("coefficients are defined for normal ordering; convert first")
    b, c, d, dbar = _disassemble(m)
    return TwoModeCoefficients(b[0], b[1], c[0], c[1], d[0], dbar[0])


def extract_four_mode_coefficients(m: MultimodeCovariance) -> FourModeCoefficients:
    """Four-mode analogue of :func:`extract_coefficients`."""
    if m.n_modes != 4:
        raise ValueError(f"expected a four-mode covariance, got {m.n_modes} modes")
    if m.ordering != NORMAL:
        raise ValueError("coefficients are defined for normal ordering; convert first")
    b, c, d, dbar = _disassemble(m)
    return FourModeCoefficients(tuple(b), tuple(c), tuple(d), tuple(dbar))


def to_symmetric_ordering(m: MultimodeCovariance) -> MultimodeCovariance:
    """Convert a normally-ordered covariance to symmetric (Weyl) ordering.

    Standard boson reordering shifts each same-mode photon-number coefficient
    by the half-quantum of vacuum noise, B_j -> B_j + 1/2, leaving all C, D
    and Dbar coefficients untouched; on the assembled matrix this is
    ``A_S = A_N - I/2``.
    """
    if m.ordering != NORMAL:
        raise ValueError("input is already symmetrically ordered")
    a_s = m.matrix - 0.5 * np.eye(2 * m.n_modes)
    return MultimodeCovariance(m.n_modes, a_s, SYMMETRIC)


def _commutator_sign_diag(n_modes: int) -> np.ndarray:
    return np.diag(np.tile([1.0, -1.0], n_modes))


def physicality_check(m: MultimodeCovariance, tol: float = 1e-9) -> bool:
    """Generalized uncertainty test on a symmetrically-ordered covariance.

    Maps the matrix to the Hermitian symmetric-moment form Sigma (entries
    <{dxi_u, dxi_v^dag}>/2 over the interleaved (a, a^dag) operator vector)
    and requires every eigenvalue of ``Sigma + K/2`` to be >= -tol, where
    ``K = diag(+1, -1, ...)`` carries the mode commutators.  Equivalent to the
    usual ``sigma + i Omega/2 >= 0`` condition in the quadrature picture.

    Args:
        m: covariance with ordering "symmetric" (convert with
            :func:`to_symmetric_ordering` first).
        tol: eigenvalue slack absorbing solver round-off.

    Returns:
        True iff the matrix describes a physical state within ``tol``.
    """
    if m.ordering != SYMMETRIC:
        raise ValueError("physicality is checked in symmetric ordering; convert first")
    k = _commutator_sign_diag(m.n_modes)
    sigma = -k @ m.matrix @ k
    test = sigma + 0.5 * k
    eigs = np.linalg.eigvalsh((test + test.conj().T) / 2.0)
    return bool(eigs.min() >= -tol)


def is_physical(state, tol: float = 1e-9) -> bool:
    """Physicality of a coefficient set or covariance, in any ordering."""
    if isinstance(state, TwoModeCoefficients):
        m = build_covariance(state)
    elif isinstance(state, FourModeCoefficients):
        m = build_four_mode_covariance(state)
    else:
        m = state
    if m.ordering == NORMAL:
        m = to_symmetric_ordering(m)
    return physicality_check(m, tol)


def _quadratic_form(matrix: np.ndarray, beta: np.ndarray) -> complex:
    return complex(np.conj(beta) @ matrix @ beta) / 2.0


def char_fn_eval(m: MultimodeCovariance, beta) -> complex:
    """Normally-ordered characteristic function exp(beta^dag A_N beta / 2).

    Args:
        m: normally-ordered covariance.
        beta: complex vector of length 2n in the interleaved layout
            (beta_1, beta_1*, beta_2, beta_2*, ...).
    """
    if m.ordering != NORMAL:
        raise ValueError("characteristic function is defined on normal ordering")
    beta = np.asarray(beta, dtype=complex)
    if beta.shape != (2 * m.n_modes,):
        raise ValueError(f"beta must have length {2 * m.n_modes}")
    if not np.all(np.isfinite(beta.real)) or not np.all(np.isfinite(beta.imag)):
        raise ValueError("beta must be finite")
    return complex(np.exp(_quadratic_form(m.matrix, beta)))


@dataclass(frozen=True)
class IntensityMoments:
    """First- and second-order moments of the integrated intensities W_j."""

    mean_w: tuple
    var_w: tuple
    cross_w: tuple

    def cross(self, j: int, k: int) -> float:
        return self.cross_w[pair_index(j, k)]


def intensity_moments(coeffs: FourModeCoefficients) -> IntensityMoments:
    """Closed-form intensity-fluctuation moments of a four-mode state.

    mean:     <W_j>        = B_j
    variance: <dW_j^2>     = B_j^2 + |C_j|^2
    cross:    <dW_j dW_k>  = |D_jk|^2 + |Dbar_jk|^2   (j != k)
    """
    mean_w = tuple(coeffs.b)
    var_w = tuple(bj**2 + abs(cj) ** 2 for bj, cj in zip(coeffs.b, coeffs.c))
    cross_w = tuple(
        abs(dj) ** 2 + abs(dbj) ** 2 for dj, dbj in zip(coeffs.d, coeffs.dbar)
    )
    return IntensityMoments(mean_w, var_w, cross_w)


# 5-point stencil for the complex Laplacian d^2/dx^2 + d^2/dy^2 of a function
# of one complex variable, sampled at 0 and at +-h, +-ih.
_STENCIL_OFFSETS = (0.0, 1.0, -1.0, 1.0j, -1.0j)
_STENCIL_WEIGHTS = (-4.0, 1.0, 1.0, 1.0, 1.0)


def moment_oracle(m: MultimodeCovariance, j: int, k: int, step: float = 1e-3) -> float:
    """<dW_j dW_k> by numerical differentiation of the characteristic function.

    Forms the fourth-order mixed Wirtinger derivative of C_N at the origin
    minus the product of the two second-order derivatives, using central
    differences of step ``step`` plus one Richardson extrapolation level.
    Exists purely as a verification oracle for :func:`intensity_moments`;
    it never touches the closed-form coefficient algebra.

    The stencil weights sum to zero, so the differences are taken on
    C_N - 1 = expm1(beta^dag A beta / 2), which removes the O(1) constant
    that would otherwise dominate the fourth-difference round-off.
    """
    if m.ordering != NORMAL:
        raise ValueError("moment oracle differentiates the normal-ordered C_N")
    n = m.n_modes
    if j == k or not (0 <= j < n) or not (0 <= k < n):
        raise ValueError(f"need two distinct mode indices below {n}")

    matrix = m.matrix

    def char_m1(zj: complex, zk: complex) -> complex:
        beta = np.zeros(2 * n, dtype=complex)
        beta[2 * j] = zj
        beta[2 * j + 1] = np.conj(zj)
        beta[2 * k] = zk
        beta[2 * k + 1] = np.conj(zk)
        return np.expm1(_quadratic_form(matrix, beta))

    def estimate(h: float) -> float:
        lap_jk = sum(
            wj * wk * char_m1(oj * h, ok * h)
            for oj, wj in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS)
            for ok, wk in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS)
        ) / h**4
        lap_j = sum(
            w * char_m1(o * h, 0.0) for o, w in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS)
        ) / h**2
        lap_k = sum(
            w * char_m1(0.0, o * h) for o, w in zip(_STENCIL_OFFSETS, _STENCIL_WEIGHTS)
        ) / h**2
        # <W_j W_k> - <W_j><W_k>; each Laplacian carries a factor -1/4 from
        # the Wirtinger derivative pair d^2/(dbeta d(-beta*)).
        return (lap_jk / 16.0 - (lap_j / 4.0) * (lap_k / 4.0)).real

    coarse = estimate(step)
    fine = estimate(step / 2.0)
    return (4.0 * fine - coarse) / 3.0
