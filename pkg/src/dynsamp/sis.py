"""Sampling and recovery for signals spanned by integer shifts of a generator.

The signal is f = sum_k c_k phi(. - k) with an L-periodic coefficient
sequence.  Evolution acts through a frequency response defined on the whole
real line; sampling happens at the integers.  The integer-rate system
matrix replaces powers of a grid response by the periodized cross-spectra

    Phi_hat_j(xi) = sum_k a_hat(xi + k)**j * phi_hat(xi + k),

truncated at |k| <= K with a reported tail estimate.  The forward path
never uses those periodizations: it synthesizes f on a fine grid of P
samples per unit, evolves in the fine frequency domain, and samples -- an
independent route against which the reconstruction is validated.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import (NoAdmissibleN, NonDivisibleLength,
                     PreconditionViolated, RankDeficient, SingularSystem,
                     TailTooLarge)
from . import spectral, systems
from .recon import SampleSet

_RCOND = 1e-10


# ---------------------------------------------------------------------------
# generators

@dataclass
class Generator:
    """Generator of the shift-invariant span.

    kind "sinc" is the half-open band indicator (transform chi_[-1/2, 1/2));
    kind "bspline" is the centered cardinal B-spline of the given order;
    kind "table" holds explicit transform samples on the grid q/table_L for
    |q| <= table_K * table_L.
    """

    kind: str
    order: int = 3
    table: np.ndarray = None
    table_L: int = None
    table_K: int = None

    def fourier_at(self, nu):
        """Transform value(s) at real frequency nu."""
        nu = np.asarray(nu, dtype=float)
        if self.kind == "sinc":
            return ((nu >= -0.5) & (nu < 0.5)).astype(float)
        if self.kind == "bspline":
            return np.sinc(nu) ** (self.order + 1)
        if self.kind == "table":
            q = nu * self.table_L
            qi = np.rint(q).astype(int)
            if np.max(np.abs(q - qi)) > 1e-9:
                raise ValueError("table generator queried off its frequency grid")
            half = self.table_K * self.table_L
            vals = np.zeros(np.shape(nu), dtype=complex)
            inside = np.abs(qi) <= half
            vals[inside] = self.table[qi[inside] + half]
            return vals
        raise ValueError(f"unknown generator kind {self.kind!r}")

    def time_at(self, x):
        """Time-domain value(s); only kinds with a closed form support this."""
        x = np.asarray(x, dtype=float)
        if self.kind == "sinc":
            return np.sinc(x)
        if self.kind == "bspline":
            return _bspline_time(x, self.order)
        raise ValueError(f"no closed time-domain form for kind {self.kind!r}")

    @property
    def compact_support(self):
        return self.kind == "bspline"


def _bspline_time(x, order):
    # Centered cardinal B-spline: (order+1)-fold convolution of the unit box,
    # supported on [-(order+1)/2, (order+1)/2].
    d = order
    shiftx = x + (d + 1) / 2.0
    out = np.zeros_like(x, dtype=float)
    for k in range(d + 2):
        term = np.clip(shiftx - k, 0.0, None) ** d
        out += (-1.0) ** k * math.comb(d + 1, k) * term
    return out / math.factorial(d)


def make_generator(spec):
    """Generator from a JSON-style mapping, e.g. {"kind": "bspline", "order": 3}."""
    kind = spec["kind"]
    if kind == "sinc":
        return Generator(kind="sinc")
    if kind == "bspline":
        return Generator(kind="bspline", order=int(spec.get("order", 3)))
    if kind == "table":
        table = np.array([complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                          for v in spec["fourier_values"]])
        L, K = int(spec["L"]), int(spec["K"])
        if len(table) != 2 * K * L + 1:
            raise ValueError(f"table must hold 2*K*L+1 = {2 * K * L + 1} values")
        return Generator(kind="table", table=table, table_L=L, table_K=K)
    raise ValueError(f"unknown generator kind {kind!r}")


def riesz_bounds(gen, L, K):
    """Min and max over the grid of sum_k |phi_hat(xi + k)|^2 (|k| <= K)."""
    k = np.arange(-K, K + 1)
    nu = (np.arange(L) / L)[:, None] + k[None, :]
    s = (np.abs(gen.fourier_at(nu)) ** 2).sum(axis=1)
    return float(s.min()), float(s.max())


# ---------------------------------------------------------------------------
# line filters (frequency responses on the real line)

def identity_response():
    """Evolution that leaves the signal unchanged."""
    return lambda nu: np.ones_like(np.asarray(nu, dtype=float), dtype=complex)


def gaussian_response(alpha):
    """exp(-alpha nu^2); real, even, decaying on the line."""
    return lambda nu: np.exp(-alpha * np.asarray(nu, dtype=float) ** 2).astype(complex)


def heat_line_response(t):
    """Transform of the line diffusion kernel at time t: exp(-4 pi^2 t nu^2)."""
    return gaussian_response(4.0 * np.pi ** 2 * t)


def periodic_response(a):
    """Wrap a grid filter's profile into a 1-periodic response on the line."""
    return lambda nu: a.at(np.mod(np.asarray(nu, dtype=float), 1.0))


def line_filter_from_spec(spec):
    """Line response from a JSON-style mapping."""
    kind = spec["kind"]
    if kind == "identity":
        return identity_response()
    if kind == "gaussian":
        return gaussian_response(float(spec["alpha"]))
    if kind == "heat_line":
        return heat_line_response(float(spec["t"]))
    raise ValueError(f"unknown line filter kind {kind!r}")


# ---------------------------------------------------------------------------
# periodization and the integer-rate system

def periodize_phi(gen, a_hat, j, L, K, tail_tol=1e-12):
    """Periodized cross-spectrum of the j-step evolved generator on the L-grid.

    Returns (values, tail) where values[r] approximates
    sum_k a_hat(r/L + k)**j phi_hat(r/L + k) truncated at |k| <= K and tail
    is the largest |k| = K term magnitude over the grid.  Raises
    TailTooLarge when that term exceeds ``tail_tol`` times the value scale.
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    k = np.arange(-K, K + 1)
    nu = (np.arange(L) / L)[:, None] + k[None, :]
    terms = gen.fourier_at(nu).astype(complex)
    if j:
        terms = terms * a_hat(nu) ** j
    vals = terms.sum(axis=1)
    tail = float((np.abs(terms[:, 0]) + np.abs(terms[:, -1])).max())
    scale = max(float(np.abs(vals).max()), 1e-300)
    if tail > tail_tol * scale:
        raise TailTooLarge(
            f"|k|={K} term is {tail:.3e} > {tail_tol:.1e} * scale {scale:.3e}; increase K")
    return vals, tail


@dataclass
class SISSystem:
    """Integer-rate system data: periodized cross-spectra row per time step."""

    m: int
    L: int
    phi_hat: np.ndarray          # (m, L), row j holds Phi_hat_j on the grid
    tail_bound: float
    K: int = 0


def build_sis_system(gen, a_hat, m, L, K, tail_tol=1e-12):
    """Assemble the m x m per-frequency family for time steps 0..m-1."""
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide length {L}")
    rows = []
    tails = []
    for j in range(m):
        vals, tail = periodize_phi(gen, a_hat, j, L, K, tail_tol)
        rows.append(vals)
        tails.append(tail)
    return SISSystem(m=m, L=L, phi_hat=np.array(rows), tail_bound=max(tails), K=K)


def sis_matrix(system, rho):
    """m x m matrix at grid index rho: entry (j, l) = Phi_hat_j((xi + l)/m)."""
    idx = systems.node_indices(system.L, system.m, rho)
    return system.phi_hat[:, idx]


def sis_family(system):
    """Stacked matrices over the grid, shape (L/m, m, m)."""
    L, m = system.L, system.m
    step = L // m
    idx = np.arange(step)[:, None] + np.arange(m)[None, :] * step
    return np.transpose(system.phi_hat[:, idx], (1, 0, 2))


def sis_singular_set(system, tol=1e-8):
    """Grid indices where the integer-rate family loses rank (relative cutoff)."""
    return systems.singular_indices(systems.smin_family(sis_family(system)), tol)


# ---------------------------------------------------------------------------
# choice of the extra decimation factor

def n_is_admissible(xis, n, tol=1e-9):
    """True when no pairwise difference of the given frequencies equals k/n."""
    xis = list(xis)
    for i in range(len(xis)):
        for j in range(i + 1, len(xis)):
            d = abs(xis[i] - xis[j])
            for k in range(1, n):
                if abs(d - k / n) <= tol:
                    return False
    return True


def choose_n(singular_xis, n_max, n_min=1, tol=1e-9):
    """Smallest admissible extra decimation factor in [n_min, n_max].

    A factor n is admissible when no pairwise difference of the singular
    frequencies equals k/n for k = 1..n-1 (within tol).  Raises
    NoAdmissibleN with the violating differences when the cap is exhausted.
    """
    violations = {}
    for n in range(n_min, n_max + 1):
        bad = None
        xis = list(singular_xis)
        for i in range(len(xis)):
            for j in range(i + 1, len(xis)):
                d = abs(xis[i] - xis[j])
                for k in range(1, n):
                    if abs(d - k / n) <= tol:
                        bad = (d, k)
                        break
                if bad:
                    break
            if bad:
                break
        if bad is None:
            return n
        violations[n] = bad
    raise NoAdmissibleN(n_max, violations)


# ---------------------------------------------------------------------------
# reducibility to the integer-sequence model

@dataclass
class ReducibilityResult:
    reducible: bool
    b_hat: np.ndarray = None       # length-L equivalent grid response if reducible
    witness: tuple = None          # (xi, k) where the ratio test failed


def reducibility_check(gen, a_hat, L, K, support_tol=1e-8, ratio_tol=1e-8):
    """Test whether evolution preserves the generator's span.

    The span is preserved exactly when a_hat(xi + k) is constant over the k
    with phi_hat(xi + k) != 0, for (almost) every xi; the constant defines
    the equivalent integer-rate response b_hat(xi).  Returns the b_hat grid
    values on success, or the first witness (xi, k) where the ratio deviates.
    """
    k = np.arange(-K, K + 1)
    xi = np.arange(L) / L
    nu = xi[:, None] + k[None, :]
    phi = gen.fourier_at(nu)
    avals = a_hat(nu)
    phi_scale = float(np.abs(phi).max())
    b_hat = np.zeros(L, dtype=complex)
    for r in range(L):
        live = np.abs(phi[r]) > support_tol * phi_scale
        if not np.any(live):
            continue
        anchor = np.argmax(np.abs(phi[r]))
        b_hat[r] = avals[r, anchor]
        dev = np.abs(avals[r, live] - b_hat[r])
        if dev.max() > ratio_tol * max(1.0, abs(b_hat[r])):
            k_bad = int(k[live][int(np.argmax(dev))])
            return ReducibilityResult(reducible=False, witness=(float(xi[r]), k_bad))
    return ReducibilityResult(reducible=True, b_hat=b_hat)


# ---------------------------------------------------------------------------
# forward sampling via fine-grid synthesis

def _synthesize_fine(c, gen, P):
    """Values of f = sum_k c_k phi(. - k) on the grid s/P, s = 0..L*P-1.

    Compactly supported generators are summed directly in the time domain
    (exact).  Band-limited and table generators are synthesized from their
    finite frequency content.
    """
    c = np.asarray(c, dtype=complex)
    L = len(c)
    if gen.compact_support:
        x = np.arange(L * P) / P
        offs = (x[:, None] - np.arange(L)[None, :] + L / 2.0) % L - L / 2.0
        return gen.time_at(offs) @ c
    # Frequency route: Fourier coefficient q of the L-periodic f is
    # c_hat(q mod L) * phi_hat(q/L) / L for q in [-LP/2, LP/2).
    c_hat = spectral.dft(c)
    LP = L * P
    bins = np.arange(LP)
    q = np.where(bins < LP // 2, bins, bins - LP)
    coeff = c_hat[np.mod(q, L)] * gen.fourier_at(q / L) / L
    return np.fft.ifft(coeff) * LP


def sis_forward(c, gen, a_hat, m, n=1, omega=(), P=48):
    """Coarse samples of the evolving span signal, plus extra initial samples.

    Synthesizes f on a fine grid of P points per unit, evolves by
    multiplying the fine spectrum with the line response, and samples the
    integers: y_l(k) = (a^l * f)(m k) for l = 0..m-1, extras
    z_c(k) = f(m n k - c).
    """
    c = np.asarray(c, dtype=complex)
    L = len(c)
    if m < 1 or L % m:
        raise NonDivisibleLength(f"factor {m} does not divide length {L}")
    omega = tuple(sorted(int(v) for v in omega))
    if omega and L % (m * n):
        raise NonDivisibleLength(f"extra factor {m * n} does not divide length {L}")
    f_fine = _synthesize_fine(c, gen, P)
    LP = L * P
    F = np.fft.fft(f_fine)
    bins = np.arange(LP)
    q = np.where(bins < LP // 2, bins, bins - LP)
    avals = a_hat(q / L)
    y = []
    for l in range(m):
        w = np.fft.ifft(F * avals ** l)[::P]     # integer samples of a^l * f
        y.append(w[::m].copy())
    f_int = f_fine[::P]
    extras = {cc: spectral.subsample(spectral.shift(f_int, cc), m * n) for cc in omega}
    return SampleSet(y=y, extras=extras, m=m, n=n, omega=omega)


# ---------------------------------------------------------------------------
# reconstruction at the integer rate

def sis_reconstruct(samples, gen, a_hat, m, n, omega, K, force=False,
                    tail_tol=1e-12, smin_tol=1e-10, rcond=_RCOND):
    """Recover the coefficient sequence from a span sample set.

    With extra samples the packet solve mirrors the integer-sequence
    pipeline, except that the extra-sample rows carry the weight
    Phi_hat_0 at each column's frequency (the extras observe f, whose
    spectrum is c_hat * Phi_hat_0).  The guarantee regime expects omega to
    contain 1..m-1; pass force=True to attempt other sets.
    """
    omega = tuple(sorted(int(v) for v in omega))
    if (samples.m, samples.n, samples.omega) != (m, n, omega):
        raise PreconditionViolated("sample set parameters do not match the requested solve")
    L = samples.L
    system = build_sis_system(gen, a_hat, m, L, K, tail_tol)
    step = L // m

    if not omega:
        mats = sis_family(system)
        bad = systems.singular_indices(systems.smin_family(mats), max(smin_tol, 1e-8))
        if bad:
            raise SingularSystem(bad)
        y_hat = np.array([spectral.dft(v) for v in samples.y[:m]])
        c_hat = np.empty(L, dtype=complex)
        pinvs = np.linalg.pinv(mats, rcond=rcond)
        x = np.einsum("rml,lr->rm", pinvs * m, y_hat)
        idx = np.arange(step)[:, None] + np.arange(m)[None, :] * step
        c_hat[idx] = x
        return spectral.idft(c_hat)

    if not force and not set(range(1, m)).issubset(omega):
        raise PreconditionViolated(
            f"span guarantee needs omega containing {list(range(1, m))} (use force=True)")
    if L % (m * n):
        raise NonDivisibleLength(f"factor {m * n} does not divide length {L}")
    packet_step = L // (m * n)
    y_hat = [spectral.dft(v) for v in samples.y[:m]]
    extras_hat = {c: spectral.dft(v) for c, v in samples.extras.items()}

    c_hat = np.empty(L, dtype=complex)
    for rho in range(packet_step):
        cols = np.concatenate([systems.node_indices(L, m, (rho + k * packet_step) % step)
                               for k in range(n)])
        A = np.zeros((len(omega) + m * n, m * n), dtype=complex)
        phi0 = system.phi_hat[0, cols]
        for i, cc in enumerate(omega):
            row = np.concatenate([systems.u_row(cc, k, m, n) for k in range(n)])
            A[i] = row * phi0 / (m * n)
        off = len(omega)
        for k in range(n):
            block = system.phi_hat[:, cols[k * m:(k + 1) * m]]
            A[off + k * m:off + (k + 1) * m, k * m:(k + 1) * m] = block / m
        svals = np.linalg.svd(A, compute_uv=False)
        if svals[-1] < smin_tol * svals[0]:
            raise RankDeficient(rho)
        rhs = []
        for cc in omega:
            rhs.append(np.exp(2j * np.pi * cc * rho / L) * extras_hat[cc][rho])
        for k in range(n):
            col = (rho + k * packet_step) % step
            for j in range(m):
                rhs.append(y_hat[j][col])
        x = np.linalg.lstsq(A, np.array(rhs), rcond=rcond)[0]
        c_hat[cols] = x
    return spectral.idft(c_hat)
