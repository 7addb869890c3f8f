r"""Discrete cavity-mode backend.

The atom sits in a perfectly conducting cube of side ``L``; the wall of
interest is the face ``z = 0`` and the atom's lateral offset from the cube axis
is taken from the configuration, i.e. the cavity position of ``(x, y, z)`` is
``(L/2 + x, L/2 + y, z)``.  Mode functions are the standard box modes

    f_x = N e_x cos(k_x x) sin(k_y y) sin(k_z z)    (and cyclic)

with ``k = pi n / L``, ``N = sqrt(8)`` when every component of ``n`` is
non-zero and ``N = 2`` when one is zero (then a single polarisation, along the
zero axis, survives).  With this normalisation ``int_V |f|^2 = V``.

All energies are second order in the coupling and returned in J.  With
``P(r, r') = <(mu.f(r)) (mu.f(r'))>`` and ``w = omega/(omega + omega0)``:

* interaction   ``E_I(t) = -(4pi/V) sum P(r,r) w + (4pi/V) sum [P(r,r) - P(r,r0)] w cos((omega0+omega) t)``
* atomic        ``E_A(t) = (2pi/V) sum P(r0,r0) w_A + (4pi/V) sum [P(r,r) - P(r,r0)] w_A (1 - cos)``
* field         ``E_F(t)``: the same with ``w_F``

where ``w_A = omega0 omega/(omega0+omega)^2``, ``w_F = omega^2/(omega0+omega)^2`` and
``w_A + w_F = w``.  Every energy carries a factor ``lam^2``.  The sums over
modes are UV divergent; ``k_cutoff`` optionally damps each mode by
``exp(-k/k_cutoff)``, otherwise the grid itself (``|k| <= pi n_max sqrt(3)/L``)
is the cutoff.  Values that depend on it are labelled as such.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import C_CGS, C_SI, CM_PER_M, ERG, HBAR_CGS, PhysicalConfig
from .errors import ConfigError, DomainError

__all__ = [
    "Mode", "ModeGrid", "QuenchState", "StaticReferences", "AsymptoticValues",
    "build_mode_grid", "mode_count", "mode_function", "mode_values", "coupling",
    "couplings", "interaction_energy", "atomic_energy", "field_energy",
    "total_energy", "total_energy_closed_form", "static_references",
    "asymptotic_values", "quench_work", "dressed_state",
]


@dataclass(frozen=True)
class Mode:
    n: tuple
    j: int
    k_vec: tuple      # m^-1
    omega: float      # s^-1


@dataclass(frozen=True, eq=False)
class ModeGrid:
    """All admissible modes with ``0 <= n_i <= n_max``, in a fixed summation order.

    The order is by ``|k|``, then lexicographically by ``n``, then by ``j`` so
    that every reduction over the grid is reproducible bit for bit.
    """

    L: float
    n_max: int
    n: np.ndarray = field(repr=False)            # (N, 3) integer indices
    j: np.ndarray = field(repr=False)            # (N,) polarisation index 1 or 2
    pol: np.ndarray = field(repr=False)          # (N, 3) unit polarisation vectors
    k_cutoff: float | None = None                # m^-1, smooth damping exp(-k/k_cutoff)

    @property
    def k_vec(self) -> np.ndarray:
        return np.pi * self.n / self.L

    @property
    def k(self) -> np.ndarray:
        return np.linalg.norm(self.k_vec, axis=1)

    @property
    def omega(self) -> np.ndarray:
        return C_SI * self.k

    @property
    def volume_cm3(self) -> float:
        return (self.L * CM_PER_M) ** 3

    @property
    def k_max(self) -> float:
        """Sharp grid cutoff ``pi n_max sqrt(3) / L``."""
        return math.pi * self.n_max * math.sqrt(3.0) / self.L

    @property
    def damping(self) -> np.ndarray:
        if self.k_cutoff is None:
            return np.ones(len(self))
        return np.exp(-self.k / self.k_cutoff)

    @property
    def modes(self) -> list[Mode]:
        kv = self.k_vec
        om = self.omega
        return [Mode(tuple(int(v) for v in self.n[i]), int(self.j[i]), tuple(kv[i]), float(om[i]))
                for i in range(len(self))]

    def __len__(self) -> int:
        return int(self.n.shape[0])


def mode_count(n_max: int) -> int:
    """Number of modes: two polarisations with all n_i > 0, one with exactly one zero."""
    return 2 * n_max**3 + 3 * n_max**2


def _polarisations(n) -> list[np.ndarray]:
    n = np.asarray(n, dtype=float)
    zeros = np.flatnonzero(n == 0)
    if zeros.size == 1:
        e = np.zeros(3)
        e[zeros[0]] = 1.0
        return [e]
    khat = n / np.linalg.norm(n)
    e1 = np.cross(khat, [0.0, 0.0, 1.0])
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(khat, e1)
    return [e1, e2]


def build_mode_grid(L: float, n_max: int, k_cutoff: float | None = None) -> ModeGrid:
    if not (L > 0 and math.isfinite(L)):
        raise ConfigError(f"cavity side L must be > 0, got {L!r}")
    if int(n_max) != n_max or n_max < 1:
        raise ConfigError(f"n_max must be a positive integer, got {n_max!r}")
    if k_cutoff is not None and not k_cutoff > 0:
        raise ConfigError("k_cutoff must be > 0")
    n_max = int(n_max)
    rows = []
    for nx in range(n_max + 1):
        for ny in range(n_max + 1):
            for nz in range(n_max + 1):
                n = (nx, ny, nz)
                if sum(v == 0 for v in n) >= 2:
                    continue
                for j, e in enumerate(_polarisations(n), start=1):
                    rows.append((nx * nx + ny * ny + nz * nz, n, j, e))
    rows.sort(key=lambda row: (row[0], row[1], row[2]))
    n_arr = np.array([row[1] for row in rows], dtype=int)
    j_arr = np.array([row[2] for row in rows], dtype=int)
    pol = np.array([row[3] for row in rows], dtype=float)
    return ModeGrid(float(L), n_max, n_arr, j_arr, pol, k_cutoff)


def _box_profile(n: np.ndarray, pol: np.ndarray, L: float, r: np.ndarray) -> np.ndarray:
    """Vectorised mode functions; ``n``/``pol`` are (N, 3), ``r`` is a 3-vector."""
    kr = np.pi * n * (np.asarray(r, dtype=float) / L)
    s, c = np.sin(kr), np.cos(kr)
    norm = np.where(np.sum(n == 0, axis=1) == 1, 2.0, math.sqrt(8.0))
    out = np.empty(n.shape, dtype=float)
    out[:, 0] = c[:, 0] * s[:, 1] * s[:, 2]
    out[:, 1] = s[:, 0] * c[:, 1] * s[:, 2]
    out[:, 2] = s[:, 0] * s[:, 1] * c[:, 2]
    return norm[:, None] * pol * out


def _check_inside(r, L):
    r = np.asarray(r, dtype=float)
    if r.shape != (3,) or np.any(r < 0) or np.any(r > L):
        raise DomainError(f"position {r!r} lies outside the cavity [0, {L}]^3")
    return r


def mode_function(n, j: int, L: float, r) -> np.ndarray:
    """Dimensionless mode function ``f_{n j}(r)``; ``r`` in cavity coordinates (m)."""
    r = _check_inside(r, L)
    n = np.asarray(n, dtype=int)
    if n.shape != (3,) or np.any(n < 0) or np.sum(n == 0) >= 2:
        raise DomainError(f"invalid mode index {n!r}")
    pols = _polarisations(n)
    if j not in range(1, len(pols) + 1):
        raise DomainError(f"mode {tuple(n)} has no polarisation {j}")
    return _box_profile(n[None, :], pols[j - 1][None, :], L, r)[0]


def cavity_position(pos, L: float) -> np.ndarray:
    """Map a configuration position (wall at z = 0, lateral origin on the cube axis)."""
    pos = np.asarray(pos, dtype=float)
    return _check_inside(np.array([0.5 * L + pos[0], 0.5 * L + pos[1], pos[2]]), L)


def mode_values(grid: ModeGrid, pos) -> np.ndarray:
    """``f(r)`` for every mode of the grid, shape (N, 3)."""
    return _box_profile(grid.n, grid.pol, grid.L, cavity_position(pos, grid.L))


def _dipole_projection(cfg: PhysicalConfig, f: np.ndarray) -> np.ndarray:
    """``mu.f`` in statC (mu in statC cm, f dimensionless); isotropic atoms use the rms ``mu |f|/sqrt 3``."""
    mu = cfg.dipole_moment
    if cfg.dipole_direction is None:
        return mu * np.linalg.norm(f, axis=-1) / math.sqrt(3.0)
    return mu * (f @ np.asarray(cfg.dipole_direction))


def coupling(mode: Mode, cfg: PhysicalConfig, L: float, pos=None) -> complex:
    """``eps = -i sqrt(2 pi hbar c / V) sqrt(k) (mu.f(r))`` in erg at ``pos`` (default ``cfg.r``)."""
    pos = cfg.r if pos is None else pos
    f = mode_function(mode.n, mode.j, L, cavity_position(pos, L))
    V = (L * CM_PER_M) ** 3
    k_cm = math.sqrt(sum(x * x for x in mode.k_vec)) / CM_PER_M
    return -1j * math.sqrt(2 * math.pi * HBAR_CGS * C_CGS / V) * math.sqrt(k_cm) * complex(
        _dipole_projection(cfg, f[None, :])[0])


def couplings(grid: ModeGrid, cfg: PhysicalConfig, pos=None) -> np.ndarray:
    """Vectorised :func:`coupling` over the grid (erg)."""
    pos = cfg.r if pos is None else pos
    f = mode_values(grid, pos)
    k_cm = grid.k / CM_PER_M
    return -1j * np.sqrt(2 * math.pi * HBAR_CGS * C_CGS / grid.volume_cm3 * k_cm) * _dipole_projection(cfg, f)


# --------------------------------------------------------------------------
# energies

@dataclass(frozen=True)
class _Sums:
    """Per-mode ingredients shared by all observables (prefactors folded in, erg)."""

    p_rr: np.ndarray       # (2pi/V) P(r, r)
    p_r0r0: np.ndarray     # (2pi/V) P(r0, r0)
    p_rr0: np.ndarray      # (2pi/V) P(r, r0)
    w: np.ndarray
    w_a: np.ndarray
    w_f: np.ndarray
    freq: np.ndarray       # omega0 + omega
    lam2: float

    @property
    def p_diff(self) -> np.ndarray:
        return self.p_rr - self.p_rr0


def _sums(cfg: PhysicalConfig, grid: ModeGrid) -> _Sums:
    if cfg.dipole_direction is None:
        fr = mode_values(grid, cfg.r)
        f0 = mode_values(grid, cfg.r0)
        mu2 = cfg.dipole_moment**2 / 3.0
        P = lambda a, b: mu2 * np.einsum("ij,ij->i", a, b)  # noqa: E731
    else:
        fr = _dipole_projection(cfg, mode_values(grid, cfg.r))
        f0 = _dipole_projection(cfg, mode_values(grid, cfg.r0))
        P = lambda a, b: a * b  # noqa: E731
    scale = 2 * math.pi / grid.volume_cm3 * grid.damping
    om = grid.omega
    om0 = cfg.omega0
    den = om0 + om
    return _Sums(scale * P(fr, fr), scale * P(f0, f0), scale * P(fr, f0),
                 om / den, om0 * om / den**2, om * om / den**2, den, cfg.lam2)


def _time(t):
    arr = np.asarray(t, dtype=float)
    if np.any(~(arr >= 0)):
        raise DomainError("t must be >= 0")
    return arr


def _osc(s: _Sums, weight: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``sum_k weight_k cos(freq_k t)`` for each t."""
    cos = np.cos(np.multiply.outer(t, s.freq))
    return cos @ weight


def _result(value, t_in):
    value = np.asarray(value, dtype=float) * ERG
    return float(value) if np.ndim(t_in) == 0 else value


def interaction_energy(t, cfg: PhysicalConfig, grid: ModeGrid, form: str = "rewritten"):
    """Interaction energy on the partially dressed state (J).

    ``form="rewritten"`` uses the static-plus-oscillation split; ``"direct"``
    uses ``-(4pi/V) sum [P(r,r) w (1 - cos) + P(r,r0) w cos]``.  They are
    algebraically identical.
    """
    ta = _time(t)
    s = _sums(cfg, grid)
    if form == "rewritten":
        e = -2.0 * np.sum(s.p_rr * s.w) + 2.0 * _osc(s, s.p_diff * s.w, ta)
    elif form == "direct":
        e = -2.0 * (np.sum(s.p_rr * s.w) - _osc(s, s.p_rr * s.w, ta) + _osc(s, s.p_rr0 * s.w, ta))
    else:
        raise DomainError(f"unknown form {form!r}")
    return _result(s.lam2 * e, t)


def _global_energy(t, cfg, grid, which, flip_sign):
    ta = _time(t)
    s = _sums(cfg, grid)
    wt = s.w_a if which == "atomic" else s.w_f
    osc = _osc(s, s.p_diff * wt, ta)
    if flip_sign:
        osc = -osc
    e = np.sum(s.p_r0r0 * wt) + 2.0 * (np.sum(s.p_diff * wt) - osc)
    return _result(s.lam2 * e, t)


def atomic_energy(t, cfg: PhysicalConfig, grid: ModeGrid, flip_sign: bool = False):
    """Atomic energy ``<H_A>(t)`` on the partially dressed state (J).

    ``flip_sign`` reverses the oscillating term; it exists only so that the
    conservation check can demonstrate that it detects a broken formula.
    """
    return _global_energy(t, cfg, grid, "atomic", flip_sign)


def field_energy(t, cfg: PhysicalConfig, grid: ModeGrid, flip_sign: bool = False):
    """Field energy ``<H_F>(t)`` on the partially dressed state (J); see :func:`atomic_energy`."""
    return _global_energy(t, cfg, grid, "field", flip_sign)


def total_energy(t, cfg: PhysicalConfig, grid: ModeGrid, flip_sign: bool = False):
    """``E_I + E_A + E_F`` evaluated term by term (J)."""
    e = (np.asarray(interaction_energy(t, cfg, grid))
         + np.asarray(atomic_energy(t, cfg, grid, flip_sign))
         + np.asarray(field_energy(t, cfg, grid)))
    return float(e) if np.ndim(t) == 0 else e


def total_energy_closed_form(cfg: PhysicalConfig, grid: ModeGrid) -> float:
    """Conserved total ``(2pi/V) sum P(r0,r0) w - (4pi/V) sum P(r,r0) w`` (J).

    This is what the three time-dependent energies add up to; it reduces to
    the static total at ``r = r0``.
    """
    s = _sums(cfg, grid)
    return float(s.lam2 * (np.sum(s.p_r0r0 * s.w) - 2.0 * np.sum(s.p_rr0 * s.w)) * ERG)


@dataclass(frozen=True)
class StaticReferences:
    """Fully dressed (equilibrium) energies at the new position, in J.

    All of them are cutoff dependent.
    """

    E_A_stat: float
    E_F_stat: float
    E_I_stat: float
    E_tot_stat: float
    cutoff_dependent: bool = True

    def as_dict(self) -> dict:
        return {"E_A_stat": self.E_A_stat, "E_F_stat": self.E_F_stat,
                "E_I_stat": self.E_I_stat, "E_tot_stat": self.E_tot_stat,
                "cutoff_dependent": self.cutoff_dependent}


def static_references(cfg: PhysicalConfig, grid: ModeGrid) -> StaticReferences:
    s = _sums(cfg, grid)
    ea = float(s.lam2 * np.sum(s.p_rr * s.w_a) * ERG)
    ef = float(s.lam2 * np.sum(s.p_rr * s.w_f) * ERG)
    ei = float(-2.0 * s.lam2 * np.sum(s.p_rr * s.w) * ERG)
    et = float(-s.lam2 * np.sum(s.p_rr * s.w) * ERG)
    return StaticReferences(ea, ef, ei, et)


@dataclass(frozen=True)
class AsymptoticValues:
    """Long-time limits (oscillating terms dropped), in J; cutoff dependent."""

    E_A_inf: float
    E_F_inf: float
    E_I_inf: float
    cutoff_dependent: bool = True

    def as_dict(self) -> dict:
        return {"E_A_inf": self.E_A_inf, "E_F_inf": self.E_F_inf,
                "E_I_inf": self.E_I_inf, "cutoff_dependent": self.cutoff_dependent}


def asymptotic_values(cfg: PhysicalConfig, grid: ModeGrid) -> AsymptoticValues:
    s = _sums(cfg, grid)
    ea = np.sum(s.p_r0r0 * s.w_a) + 2.0 * np.sum(s.p_diff * s.w_a)
    ef = np.sum(s.p_r0r0 * s.w_f) + 2.0 * np.sum(s.p_diff * s.w_f)
    ei = -2.0 * np.sum(s.p_rr * s.w)
    return AsymptoticValues(*(float(s.lam2 * v * ERG) for v in (ea, ef, ei)))


def quench_work(cfg: PhysicalConfig, grid: ModeGrid) -> dict:
    """Excess of the long-time energies over the static ones, ``(2pi/V) sum w_X <(mu.f(r) - mu.f(r0))^2>``.

    Computed directly from the squared displacement of the coupling, not as a
    difference, so that comparing it with ``asymptotic - static`` is a real
    check.
    """
    s = _sums(cfg, grid)
    d2 = s.p_rr - 2.0 * s.p_rr0 + s.p_r0r0
    if cfg.dipole_direction is None:
        # isotropic: <(mu.(f - f0))^2> = mu^2/3 |f - f0|^2, non-negative per mode
        fr = mode_values(grid, cfg.r)
        f0 = mode_values(grid, cfg.r0)
        d2 = (2 * math.pi / grid.volume_cm3 * grid.damping
              * cfg.dipole_moment**2 / 3.0 * np.sum((fr - f0) ** 2, axis=1))
    out = {
        "atomic": float(s.lam2 * np.sum(d2 * s.w_a) * ERG),
        "field": float(s.lam2 * np.sum(d2 * s.w_f) * ERG),
        "total": float(s.lam2 * np.sum(d2 * s.w) * ERG),
    }
    return out


# --------------------------------------------------------------------------
# states

@dataclass(frozen=True)
class QuenchState:
    """Perturbative dressed ground state of the pre-quench Hamiltonian.

    ``amp_single[i]`` multiplies ``|e, 1_i>``.  The two-photon amplitudes
    factorise, ``amp_double[i, i'] = -lam u_i u_i'`` with
    ``u = eps(r0)/(hbar (omega + omega0))``; the dense matrix is built on
    demand from ``u``.
    """

    amp_ground: float
    amp_single: np.ndarray = field(repr=False)
    u: np.ndarray = field(repr=False)
    lam: int = -1
    order: int = 1
    ground_deficit: float = 0.0     # 1 - amp_ground, kept separately to avoid cancellation

    @property
    def amp_double(self) -> np.ndarray:
        if self.order < 2:
            return np.zeros((self.u.size, self.u.size), dtype=complex)
        return -self.lam * np.outer(self.u, self.u)

    def norm_deviation(self) -> float:
        """``|c_g|^2 + sum |c_1|^2 + sum |c_2|^2 - 1`` without forming the matrix."""
        d = self.ground_deficit
        single = float(np.sum(np.abs(self.amp_single) ** 2))
        double = 0.0
        if self.order >= 2:
            double = self.lam**2 * float(np.sum(np.abs(self.u) ** 2)) ** 2
        return (d * d - 2.0 * d + single) + double

    def norm(self) -> float:
        return 1.0 + self.norm_deviation()


def dressed_state(cfg: PhysicalConfig, grid: ModeGrid, order: int = 1) -> QuenchState:
    """First- or second-order dressed ground state at the initial position ``r0``."""
    if order not in (1, 2):
        raise DomainError(f"order must be 1 or 2, got {order!r}")
    eps = couplings(grid, cfg, cfg.r0) * np.sqrt(grid.damping)
    u = eps / (HBAR_CGS * (grid.omega + cfg.omega0))
    lam = cfg.lam
    single = -lam * u
    deficit = 0.0
    if order == 2:
        # denominator read as (omega_k + omega0)^2, matching the first-order amplitudes
        deficit = 0.5 * lam**2 * float(np.sum(np.abs(u) ** 2))
    return QuenchState(1.0 - deficit, single + 0j, u, lam, order, deficit)
