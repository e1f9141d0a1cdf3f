"""Per-frequency matrices governing recovery from coarse samples.

For a subsampling factor m, the length-L/m grid frequency with index rho
couples the L-grid spectrum indices rho + l*(L/m), l = 0..m-1.  The plain
N x m system matrix collects powers of the transfer values at those nodes
(a Vandermonde matrix); the extended system couples n such blocks with rows
coming from extra samples taken on a coarser shifted lattice.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (CoincidentNodes, EvenM, NonDivisibleLength, ShapeMismatch)


@dataclass
class PlainSystem:
    """Parameter bundle for the plain per-frequency family."""

    a: object
    m: int
    N: int

    def matrix(self, rho):
        return build_plain(self.a, self.m, self.N, rho)

    def matrix_at(self, xi):
        return build_plain_at(self.a, self.m, self.N, xi)


@dataclass
class ExtendedSystem:
    """Parameter bundle for the extended (extra-sample) family."""

    a: object
    m: int
    n: int
    omega: tuple

    def matrix(self, rho):
        return build_extended(self.a, self.m, self.n, self.omega, rho)

    def matrix_at(self, xi):
        return build_extended_at(self.a, self.m, self.n, self.omega, xi)


@dataclass
class KernelBasis:
    """Sign-pattern basis of the null space at a degenerate frequency."""

    vectors: list
    at_frequency: float


@dataclass
class SineMatrices:
    """Kernel-repair products U_k V and U_k W with their smallest singular values."""

    B: np.ndarray
    D: np.ndarray
    smin_B: float
    smin_D: float


def node_indices(L, m, rho):
    """L-grid indices of the m aliased nodes coupled at grid frequency rho."""
    step = L // m
    if rho < 0 or rho >= step:
        raise ValueError(f"rho must lie in [0, {step})")
    return rho + np.arange(m) * step


def build_plain(a, m, N, rho):
    """N x m matrix with entry (r, l) = response[rho + l*(L/m)]**r, exact grid lookups."""
    L = a.L
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide filter length {L}")
    if N < 1:
        raise ValueError("need at least one time row")
    nodes = a.response[node_indices(L, m, rho)]
    return np.vander(nodes, N, increasing=True).T


def build_plain_at(a, m, N, xi):
    """Same matrix with nodes evaluated off the grid at frequency xi."""
    nodes = a.at((xi + np.arange(m)) / m)
    return np.vander(nodes, N, increasing=True).T


def plain_nodes_at(a, m, xi):
    """Transfer values at the m aliased nodes of frequency xi."""
    return a.at((xi + np.arange(m)) / m)


def det_plain(system, rho):
    """Determinant via the node-product formula; exact for the power structure."""
    if system.N != system.m:
        raise ShapeMismatch(f"determinant needs a square system, got N={system.N}, m={system.m}")
    L = system.a.L
    nodes = system.a.response[node_indices(L, system.m, rho)]
    det = 1.0 + 0.0j
    for i in range(system.m):
        for j in range(i + 1, system.m):
            det *= nodes[j] - nodes[i]
    return det


def smin_plain(system, rho):
    """Smallest singular value of the plain matrix at grid index rho."""
    M = build_plain(system.a, system.m, system.N, rho)
    return float(np.linalg.svd(M, compute_uv=False)[-1])


def plain_family(system):
    """Stacked matrices over the whole grid, shape (L/m, N, m)."""
    a, m, N = system.a, system.m, system.N
    L = a.L
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide filter length {L}")
    step = L // m
    idx = np.arange(step)[:, None] + np.arange(m)[None, :] * step
    nodes = a.response[idx]                                   # (step, m)
    return nodes[:, None, :] ** np.arange(N)[None, :, None]   # (step, N, m)


def smin_family(mats):
    """Smallest singular value of each matrix in a stack."""
    return np.linalg.svd(mats, compute_uv=False)[..., -1]


def singular_indices(smins, tol):
    """Grid indices whose smin falls below tol times the grid maximum."""
    smins = np.asarray(smins, dtype=float)
    top = smins.max() if len(smins) else 0.0
    if top <= 0.0:
        return list(range(len(smins)))
    return [int(i) for i in np.nonzero(smins < tol * top)[0]]


def singular_set(system, tol=1e-8):
    """Grid indices where the square plain system loses rank.

    The cutoff is relative: an index counts as singular when its smallest
    singular value is below ``tol`` times the largest smin over the grid.
    """
    if system.N != system.m:
        raise ShapeMismatch("singularity scan expects the square system (N = m)")
    return singular_indices(smin_family(plain_family(system)), tol)


def kernel_basis(m, at):
    """Null-space basis of the square system at a degenerate frequency.

    For odd m the system at frequency 0 (or 1/2) of an even strictly
    decreasing response has an (m-1)/2-dimensional kernel spanned by
    vectors with a single +1/-1 pair: positions (j, m-j) at frequency 0,
    positions (j, m-1-j) at frequency 1/2.
    """
    if m % 2 == 0:
        raise EvenM("kernel characterization requires odd m")
    if m < 3:
        raise ValueError("need m >= 3")
    if at not in (0, 0.0, 0.5):
        raise ValueError("degenerate frequency must be 0 or 0.5")
    vectors = []
    if float(at) == 0.0:
        for j in range(1, (m - 1) // 2 + 1):
            v = np.zeros(m, dtype=int)
            v[j] = 1
            v[m - j] = -1
            vectors.append(v)
    else:
        for j in range((m - 1) // 2):
            v = np.zeros(m, dtype=int)
            v[j] = 1
            v[m - 1 - j] = -1
            vectors.append(v)
    return KernelBasis(vectors=vectors, at_frequency=float(at))


def u_row(c, k, m, n):
    """Length-m row of unit-modulus extra-sample phases.

    Entry l equals exp(-2 pi i c k / (m n)) * exp(-2 pi i c l / m).
    """
    if not 0 <= c < m * n:
        raise ValueError(f"shift c={c} outside [0, {m * n})")
    return np.exp(-2j * np.pi * c * k / (m * n)) * np.exp(-2j * np.pi * c * np.arange(m) / m)


def _check_extended_args(L, m, n, omega):
    if m < 1 or n < 1 or L % (m * n):
        raise NonDivisibleLength(f"m*n = {m * n} does not divide length {L}")
    omega = tuple(sorted(int(c) for c in omega))
    if len(set(omega)) != len(omega):
        raise ValueError("omega must not contain duplicates")
    if omega and not (0 <= omega[0] and omega[-1] < m * n):
        raise ValueError(f"omega entries must lie in [0, {m * n})")
    return omega


def build_extended(a, m, n, omega, rho):
    """Extended (|omega| + m n) x (m n) matrix at grid frequency index rho.

    Top rows hold the extra-sample phases scaled by 1/(m n); below sits the
    block diagonal of the n square plain matrices at the shifted
    frequencies xi + k/n, each scaled by 1/m.  rho indexes the L/m grid.
    """
    L = a.L
    omega = _check_extended_args(L, m, n, omega)
    step = L // m
    if rho < 0 or rho >= step:
        raise ValueError(f"rho must lie in [0, {step})")
    packet_step = L // (m * n)
    A = np.zeros((len(omega) + m * n, m * n), dtype=complex)
    for i, c in enumerate(omega):
        for k in range(n):
            A[i, k * m:(k + 1) * m] = u_row(c, k, m, n) / (m * n)
    off = len(omega)
    for k in range(n):
        block = build_plain(a, m, m, (rho + k * packet_step) % step)
        A[off + k * m:off + (k + 1) * m, k * m:(k + 1) * m] = block / m
    return A


def build_extended_at(a, m, n, omega, xi):
    """Extended matrix with blocks evaluated off the grid at frequency xi."""
    omega = tuple(sorted(int(c) for c in omega))
    A = np.zeros((len(omega) + m * n, m * n), dtype=complex)
    for i, c in enumerate(omega):
        for k in range(n):
            A[i, k * m:(k + 1) * m] = u_row(c, k, m, n) / (m * n)
    off = len(omega)
    for k in range(n):
        block = build_plain_at(a, m, m, xi + k / n)
        A[off + k * m:off + (k + 1) * m, k * m:(k + 1) * m] = block / m
    return A


def build_extended_multi_time(a, m, n, omega, rho, times):
    """Experimental variant: extra samples repeated at evolution steps 0..times-1.

    Appends, for each step t >= 1, rows whose entries carry the extra-sample
    phases weighted by the t-th power of the node transfer values.  More
    rows can only improve the least-squares conditioning; no recovery
    guarantee is claimed for the enlarged system.
    """
    if times < 1:
        raise ValueError("times must be at least 1")
    L = a.L
    omega = _check_extended_args(L, m, n, omega)
    A = build_extended(a, m, n, omega, rho)
    if times == 1:
        return A
    step = L // m
    packet_step = L // (m * n)
    rows = []
    for t in range(1, times):
        for c in omega:
            row = np.zeros(m * n, dtype=complex)
            for k in range(n):
                nodes = a.response[node_indices(L, m, (rho + k * packet_step) % step)]
                row[k * m:(k + 1) * m] = u_row(c, k, m, n) * nodes ** t / (m * n)
            rows.append(row)
    return np.vstack([A, np.array(rows)])


def sine_test_matrices(m, n, k):
    """Products of the extra-sample phase rows with the two kernel bases.

    Uses shifts c = 1..(m-1)/2.  Full rank of both products certifies that
    the extra rows repair the rank loss at the degenerate frequencies.
    """
    if m % 2 == 0:
        raise EvenM("kernel repair matrices require odd m")
    half = (m - 1) // 2
    U = np.array([u_row(c, k, m, n) for c in range(1, half + 1)])
    V = np.array(kernel_basis(m, 0.0).vectors, dtype=float).T
    W = np.array(kernel_basis(m, 0.5).vectors, dtype=float).T
    B = U @ V
    D = U @ W
    smin_B = float(np.linalg.svd(B, compute_uv=False)[-1])
    smin_D = float(np.linalg.svd(D, compute_uv=False)[-1])
    return SineMatrices(B=B, D=D, smin_B=smin_B, smin_D=smin_D)


def gautschi_bound_nodes(nodes):
    """Separation-based bound on the inverse norm of a square power matrix.

    For pairwise distinct nodes x_0..x_{m-1} the spectral norm of the
    inverse is at most

        sqrt(m) * max_i prod_{j != i} (1 + |x_j|) / |x_j - x_i|.
    """
    nodes = np.asarray(nodes, dtype=complex)
    m = len(nodes)
    diffs = np.abs(nodes[None, :] - nodes[:, None])
    off = ~np.eye(m, dtype=bool)
    if np.any(diffs[off] == 0.0):
        raise CoincidentNodes("nodes coincide; separation bound undefined")
    best = 0.0
    for i in range(m):
        prod = 1.0
        for j in range(m):
            if j != i:
                prod *= (1.0 + abs(nodes[j])) / diffs[i, j]
        best = max(best, prod)
    return float(np.sqrt(m) * best)
