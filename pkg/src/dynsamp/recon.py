"""Forward sampling operator and the frequency-domain recovery pipeline.

The measurements are the coarse samples of the evolving signal,
y_l = S_m(a^l * f), plus optional extra samples of the initial state on a
shifted coarser lattice, z_c(k) = f(m n k - c).  Recovery solves one small
least-squares system per frequency packet and reassembles the spectrum.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (LengthMismatch, NonDivisibleLength, PreconditionViolated,
                     RankDeficient, SingularSystem, TooLarge)
from . import spectral, systems
from .filters import evolve

_RCOND = 1e-10


@dataclass
class SampleSet:
    """Measurement bundle: evolution snapshots plus optional extra samples.

    y[l] holds S_m(a^l * f) (length L/m each); extras maps a shift c to
    S_{mn} T_c f (length L/(m n)).
    """

    y: list
    extras: dict = field(default_factory=dict)
    m: int = 1
    n: int = 1
    omega: tuple = ()

    def __post_init__(self):
        self.y = [np.asarray(v, dtype=complex) for v in self.y]
        self.extras = {int(c): np.asarray(v, dtype=complex) for c, v in self.extras.items()}
        self.omega = tuple(sorted(int(c) for c in self.omega))
        if not self.y:
            raise ValueError("need at least one snapshot sequence")
        if len({len(v) for v in self.y}) != 1:
            raise LengthMismatch("snapshot sequences differ in length")
        if self.extras and len({len(v) for v in self.extras.values()}) != 1:
            raise LengthMismatch("extra sample sequences differ in length")
        if set(self.extras) != set(self.omega):
            raise ValueError("extras keys must match omega")

    @property
    def L(self):
        return len(self.y[0]) * self.m

    @property
    def N(self):
        return len(self.y)

    def to_json(self):
        """Serialize to the documented JSON layout (complex as [re, im] pairs)."""
        def pairs(v):
            return [[float(z.real), float(z.imag)] for z in v]
        obj = {
            "m": self.m,
            "n": self.n,
            "omega": list(self.omega),
            "y": [pairs(v) for v in self.y],
            "extras": {str(c): pairs(v) for c, v in sorted(self.extras.items())},
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        obj = json.loads(text) if isinstance(text, str) else text
        def unpairs(v):
            return np.array([complex(re, im) for re, im in v])
        return cls(
            y=[unpairs(v) for v in obj["y"]],
            extras={int(c): unpairs(v) for c, v in obj["extras"].items()},
            m=int(obj["m"]),
            n=int(obj["n"]),
            omega=tuple(obj["omega"]),
        )


def forward(f, a, m, N, n=1, omega=()):
    """Sample the evolving signal: N coarse snapshots plus extra initial samples."""
    f = np.asarray(f, dtype=complex)
    L = len(f)
    if L != a.L:
        raise LengthMismatch(f"signal length {L} != filter length {a.L}")
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide length {L}")
    omega = tuple(sorted(int(c) for c in omega))
    if omega and L % (m * n):
        raise NonDivisibleLength(f"extra factor {m * n} does not divide length {L}")
    y = [spectral.subsample(evolve(f, a, l), m) for l in range(N)]
    extras = {c: spectral.subsample(spectral.shift(f, c), m * n) for c in omega}
    return SampleSet(y=y, extras=extras, m=m, n=n, omega=omega)


def reconstruct_plain(samples, a, m, smin_tol=1e-8, rcond=_RCOND):
    """Recover the signal from the evolution snapshots alone.

    Needs at least m snapshot sequences and a grid with no (near-)singular
    frequency: indices whose smallest singular value drops below
    ``smin_tol`` times the grid maximum abort the solve with
    ``SingularSystem`` -- extra samples are required there.
    """
    if samples.m != m:
        raise PreconditionViolated(f"samples were taken with m={samples.m}, not {m}")
    N = samples.N
    if N < m:
        raise PreconditionViolated(f"need at least m={m} snapshot sequences, got {N}")
    L = samples.L
    if L != a.L:
        raise LengthMismatch(f"samples imply length {L} != filter length {a.L}")
    step = L // m
    mats = systems.plain_family(systems.PlainSystem(a, m, N))
    bad = systems.singular_indices(systems.smin_family(mats), smin_tol)
    if bad:
        raise SingularSystem(bad)

    y_hat = np.array([spectral.dft(v) for v in samples.y])     # (N, step)
    f_hat = np.empty(L, dtype=complex)
    pinvs = np.linalg.pinv(mats, rcond=rcond)
    x = np.einsum("rml,lr->rm", pinvs * m, y_hat)              # solve A x = m * y per rho
    idx = np.arange(step)[:, None] + np.arange(m)[None, :] * step
    f_hat[idx] = x
    return spectral.idft(f_hat)


def _extended_rhs(y_hat, extras_hat, omega, m, n, L, rho):
    """Right-hand side of the packet solve: phased extras then snapshot spectra."""
    step = L // m
    packet_step = L // (m * n)
    rhs = []
    for c in omega:
        rhs.append(np.exp(2j * np.pi * c * rho / L) * extras_hat[c][rho])
    for k in range(n):
        col = (rho + k * packet_step) % step
        for l in range(m):
            rhs.append(y_hat[l][col])
    return np.array(rhs)


def reconstruct_extended(samples, a, m, n, omega, force=False,
                         smin_tol=1e-10, rcond=_RCOND):
    """Recover the signal using evolution snapshots plus extra initial samples.

    Every frequency packet couples the m n spectrum values
    f_hat(rho + k L/(mn) + l L/m) and is solved in the least-squares sense.
    The guarantee regime needs odd n and omega containing 1..(m-1)/2; pass
    ``force=True`` to attempt the solve outside it.  A packet whose matrix
    has smin below ``smin_tol`` times its largest singular value raises
    ``RankDeficient``.
    """
    omega = tuple(sorted(int(c) for c in omega))
    if (samples.m, samples.n, samples.omega) != (m, n, omega):
        raise PreconditionViolated("sample set parameters do not match the requested solve")
    if not force:
        if n % 2 == 0:
            raise PreconditionViolated("guarantee regime needs odd n (use force=True to override)")
        needed = set(range(1, (m - 1) // 2 + 1))
        if not needed.issubset(omega):
            raise PreconditionViolated(
                f"guarantee regime needs omega containing {sorted(needed)} (use force=True)")
    L = samples.L
    if L != a.L:
        raise LengthMismatch(f"samples imply length {L} != filter length {a.L}")
    if L % (m * n):
        raise NonDivisibleLength(f"factor {m * n} does not divide length {L}")
    if samples.N < m:
        raise PreconditionViolated(f"need at least m={m} snapshot sequences, got {samples.N}")

    step = L // m
    packet_step = L // (m * n)
    y_hat = [spectral.dft(samples.y[l]) for l in range(m)]
    extras_hat = {c: spectral.dft(v) for c, v in samples.extras.items()}

    f_hat = np.empty(L, dtype=complex)
    for rho in range(packet_step):
        A = systems.build_extended(a, m, n, omega, rho)
        svals = np.linalg.svd(A, compute_uv=False)
        if svals[-1] < smin_tol * svals[0]:
            raise RankDeficient(rho)
        rhs = _extended_rhs(y_hat, extras_hat, omega, m, n, L, rho)
        x = np.linalg.lstsq(A, rhs, rcond=rcond)[0]
        for k in range(n):
            for l in range(m):
                f_hat[rho + k * packet_step + l * step] = x[k * m + l]
    return spectral.idft(f_hat)


def dense_oracle(a, m, N, n=1, omega=(), max_size=512):
    """Explicit time-domain matrix mapping the signal to all stacked samples.

    Row order matches :func:`stack_samples`: the N snapshot blocks first
    (each L/m rows), then one block of L/(m n) rows per shift in sorted
    omega.  Intended as a brute-force cross-check, hence the size cap.
    """
    L = a.L
    if L > max_size:
        raise TooLarge(f"dense oracle capped at L={max_size}, got {L}")
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide length {L}")
    omega = tuple(sorted(int(c) for c in omega))
    if omega and L % (m * n):
        raise NonDivisibleLength(f"extra factor {m * n} does not divide length {L}")
    rows = []
    t = np.arange(L)
    for l in range(N):
        taps = spectral.idft(a.response ** l)
        for k in range(L // m):
            rows.append(taps[(m * k - t) % L])
    for c in omega:
        for k in range(L // (m * n)):
            row = np.zeros(L, dtype=complex)
            row[(m * n * k - c) % L] = 1.0
            rows.append(row)
    return np.array(rows)


def stack_samples(samples):
    """Flatten a sample set in the dense-oracle row order."""
    parts = [v for v in samples.y]
    parts.extend(samples.extras[c] for c in samples.omega)
    return np.concatenate(parts)


def oracle_solve(a, samples, N=None, max_size=512, rcond=_RCOND):
    """Least-squares recovery through the dense time-domain matrix."""
    N = samples.N if N is None else N
    M = dense_oracle(a, samples.m, N, samples.n, samples.omega, max_size=max_size)
    return np.linalg.lstsq(M, stack_samples(samples), rcond=rcond)[0]
