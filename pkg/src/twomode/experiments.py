"""Experiment configuration, figure data, the verification suite and schedules.

Frequencies are in units of the coupling ``lambda`` and the time axis is the
slow time ``tau`` (``= lambda t`` at zero detuning).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import charfunc as cf
from . import dynamics as dyn
from . import oracle as orc
from .errors import ClosedFormDomainError, ConfigError, TwoModeError
from .fock import DEFAULT_EPSILON

POINTS_PER_PI = 512
CSV_DIGITS = 15


@dataclass(frozen=True)
class Grid:
    tau_min: float = 0.0
    tau_max: float = 2 * math.pi
    points: int = 2 * POINTS_PER_PI + 1

    def taus(self) -> np.ndarray:
        return np.linspace(self.tau_min, self.tau_max, self.points)


@dataclass(frozen=True)
class ScenarioConfig:
    alpha_mag: float = 1.0
    alpha_phase: float = 0.0
    Phi: float = 0.0
    beta_mode: str = "balanced"
    beta_mag: float = 0.0
    beta_phase: float = 0.0
    lam: float = 1.0
    phi_pump: float = math.pi / 2
    detuning: float = 0.0
    grid: Grid = field(default_factory=Grid)
    epsilon_trunc: float = DEFAULT_EPSILON
    # keys given explicitly by the user; figure presets yield to these
    explicit: frozenset = frozenset()

    def __post_init__(self):
        if self.grid.points < 2:
            raise ConfigError("need at least 2 grid points", "grid.points")
        if not self.grid.tau_max > self.grid.tau_min:
            raise ConfigError("tau_max must exceed tau_min", "grid.tau_max")
        if not 0 < self.epsilon_trunc <= 1e-3:
            raise ConfigError("epsilon_trunc must lie in (0, 1e-3]", "epsilon_trunc")
        if self.beta_mode not in ("balanced", "explicit"):
            raise ConfigError("beta.mode must be 'balanced' or 'explicit'", "beta.mode")
        if not self.lam > 0:
            raise ConfigError("lambda must be positive", "lambda")
        if self.alpha_mag < 0 or self.beta_mag < 0:
            raise ConfigError("magnitudes must be non-negative", "alpha_mag" if self.alpha_mag < 0 else "beta.mag")

    @property
    def alpha(self) -> complex:
        return self.alpha_mag * np.exp(1j * self.alpha_phase)

    def scenario(self, Phi: float | None = None, alpha_mag: float | None = None) -> dyn.Scenario:
        Phi = self.Phi if Phi is None else Phi
        mag = self.alpha_mag if alpha_mag is None else alpha_mag
        alpha = mag * np.exp(1j * self.alpha_phase)
        if self.beta_mode == "balanced":
            beta = "balanced"
        else:
            beta = self.beta_mag * np.exp(1j * self.beta_phase)
        try:
            # frequencies are in units of lambda, so the coupling is 1
            return dyn.Scenario.build(alpha, Phi, beta, self.phi_pump, self.detuning / self.lam)
        except TwoModeError as exc:
            raise ConfigError(str(exc)) from exc


_SCALARS = {
    "alpha_mag": "alpha_mag",
    "alpha_phase": "alpha_phase",
    "Phi": "Phi",
    "lambda": "lam",
    "phi_pump": "phi_pump",
    "detuning": "detuning",
    "epsilon_trunc": "epsilon_trunc",
}
_IGNORED = {"units", "comment"}


def _number(value, name, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", name)
    if integer and int(value) != value:
        raise ConfigError(f"expected an integer, got {value!r}", name)
    if not math.isfinite(value):
        raise ConfigError("value must be finite", name)
    return int(value) if integer else float(value)


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    kwargs, explicit = {}, set()
    for key, value in data.items():
        if key in _SCALARS:
            kwargs[_SCALARS[key]] = _number(value, key)
            explicit.add(_SCALARS[key])
        elif key == "beta":
            if not isinstance(value, dict):
                raise ConfigError("expected an object", "beta")
            for bkey, bval in value.items():
                if bkey == "mode":
                    kwargs["beta_mode"] = bval
                elif bkey in ("mag", "phase"):
                    kwargs[f"beta_{bkey}"] = _number(bval, f"beta.{bkey}")
                else:
                    raise ConfigError("unknown key", f"beta.{bkey}")
            explicit.add("beta")
        elif key == "grid":
            if not isinstance(value, dict):
                raise ConfigError("expected an object", "grid")
            g = {}
            for gkey, gval in value.items():
                if gkey not in ("tau_min", "tau_max", "points"):
                    raise ConfigError("unknown key", f"grid.{gkey}")
                g[gkey] = _number(gval, f"grid.{gkey}", integer=gkey == "points")
            kwargs["grid"] = Grid(**g)
            explicit.add("grid")
        elif key not in _IGNORED:
            raise ConfigError("unknown key", key)
    return ScenarioConfig(**kwargs, explicit=frozenset(explicit))


def load_config(path: str | Path | None) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from exc
    try:
        return config_from_dict(data)
    except ConfigError as exc:
        if exc.line is None and exc.field is not None:
            raise ConfigError(exc.message, exc.field, _key_line(text, exc.field)) from None
        raise


def _key_line(text, field_name):
    key = '"' + field_name.split(".")[-1] + '"'
    for lineno, line in enumerate(text.splitlines(), 1):
        if key in line:
            return lineno
    return None


def default_config_dict() -> dict:
    c = ScenarioConfig()
    return {
        "units": "frequencies in units of lambda; time axis tau = lambda t",
        "alpha_mag": c.alpha_mag,
        "alpha_phase": c.alpha_phase,
        "Phi": c.Phi,
        "beta": {"mode": c.beta_mode, "mag": c.beta_mag, "phase": c.beta_phase},
        "lambda": c.lam,
        "phi_pump": c.phi_pump,
        "detuning": c.detuning,
        "grid": {"tau_min": c.grid.tau_min, "tau_max": c.grid.tau_max, "points": c.grid.points},
        "epsilon_trunc": c.epsilon_trunc,
    }


def with_overrides(config: ScenarioConfig, grid_points=None, epsilon=None) -> ScenarioConfig:
    """Apply command-line overrides, keeping validation."""
    explicit = set(config.explicit)
    if grid_points is not None:
        config = replace(config, grid=replace(config.grid, points=int(grid_points)))
        explicit.add("grid.points")
    if epsilon is not None:
        config = replace(config, epsilon_trunc=float(epsilon))
    return replace(config, explicit=frozenset(explicit))


# ---------------------------------------------------------------- figures

PHASE_NAMES = {0.0: "0", math.pi / 2: "pi_2", math.pi: "pi"}


@dataclass(frozen=True)
class FigureSpec:
    quantity: str  # "entropy" or "exchange"
    alpha2: float
    phases: tuple
    tau_max: float


FIGURES = {
    "fig1": FigureSpec("entropy", 1.0, (0.0, math.pi / 2, math.pi), 2 * math.pi),
    "fig2": FigureSpec("entropy", 5.0, (0.0, math.pi / 2, math.pi), 2 * math.pi),
    "fig3": FigureSpec("exchange", 5.0, (0.0, math.pi), 5 * math.pi),
    "fig4": FigureSpec("exchange", 5.0, (math.pi / 2,), 5 * math.pi),
}


@dataclass
class FigureData:
    figure_id: str
    header: list
    columns: list  # one array per header entry
    title: str = ""

    @property
    def taus(self):
        return self.columns[0]

    def column(self, name):
        return self.columns[self.header.index(name)]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in zip(*self.columns):
            w.writerow([format(float(v), f".{CSV_DIGITS}g") for v in row])
        return buf.getvalue()


def figure_grid(figure_id: str, config: ScenarioConfig) -> Grid:
    spec = FIGURES[figure_id]
    grid = config.grid
    if "grid" in config.explicit:
        return grid
    points = grid.points if "grid.points" in config.explicit else int(round(spec.tau_max / math.pi * POINTS_PER_PI)) + 1
    return Grid(0.0, spec.tau_max, points)


def run_figure(figure_id: str, config: ScenarioConfig | None = None) -> FigureData:
    """Closed-form curves for one of the four reference figures."""
    if figure_id not in FIGURES:
        raise ConfigError(f"unknown figure {figure_id!r}; choose from {sorted(FIGURES)}", "figure")
    config = config or ScenarioConfig()
    spec = FIGURES[figure_id]
    mag = config.alpha_mag if "alpha_mag" in config.explicit else math.sqrt(spec.alpha2)
    taus = figure_grid(figure_id, config).taus()
    header, columns = ["tau"], [taus]
    symbol = "S" if spec.quantity == "entropy" else "E"
    for Phi in spec.phases:
        s = config.scenario(Phi=Phi, alpha_mag=mag)
        try:
            if spec.quantity == "entropy":
                values = dyn.entropy_closed_form(s, taus)
            else:
                values = dyn.exchange_functional_closed(s, taus)
        except ClosedFormDomainError as exc:
            raise ConfigError(str(exc)) from exc
        header.append(f"{symbol}_Phi_{PHASE_NAMES[Phi]}")
        columns.append(np.asarray(values, dtype=float))
    what = "linear entropy of mode A" if spec.quantity == "entropy" else "state-exchange functional"
    return FigureData(figure_id, header, columns, f"{what}, $|\\alpha|^2 = {mag**2:g}$")


def write_figure(data: FigureData, out: str | Path | None):
    text = data.to_csv()
    if out is None:
        return text
    Path(out).write_text(text)
    return text


# ---------------------------------------------------------------- verification

DEFAULT_ALPHA2 = (1.0, 5.0)
DEFAULT_PHASES = (0.0, math.pi / 2, math.pi)
CHI_TAUS = (0.0, math.pi / 8, math.pi / 4, math.pi / 2)
UNITARITY_CHIS = (0.0, 0.3, 1 / math.sqrt(2), 0.99)
ENTROPY_AT_QUARTER = 0.2900128292  # |alpha|^2 = 1, Phi = 0, tau = pi/4


def chi_pairs(extent=1.5, points=5):
    """5 x 5 grid of complex ``(eta, zeta)`` pairs with moduli up to ``extent``."""
    line = np.linspace(-extent, extent, points)
    etas = line * np.exp(1j * math.pi / 6)
    zetas = line * np.exp(-1j * math.pi / 3)
    return [(complex(e), complex(z)) for e in etas for z in zetas]


def _global_checks(report, rng_seed=7):
    rng = np.random.default_rng(rng_seed)
    taus = np.linspace(0, 4 * math.pi, 1000)
    worst = 0.0
    for chi in UNITARITY_CHIS:
        for phi in (0.0, 0.7, math.pi / 2):
            c = dyn.evolution_coeffs(taus, chi, phi)
            worst = max(worst, np.max(np.abs(np.abs(c.u1) ** 2 + np.abs(c.v1) ** 2 - 1)))
    report.add("coefficients: |u1|^2 + |v1|^2 = 1", 1e-12, worst)

    worst = 0.0
    for chi in (0.3, 1 / math.sqrt(2), -0.5):
        ts, y = orc.integrate_heisenberg(chi, 0.4, 4 * math.pi)
        c = dyn.evolution_coeffs(ts, chi, 0.4)
        ref = np.stack([c.u1, c.v1, c.v2, c.u2], axis=1)
        worst = max(worst, np.max(np.abs(y - ref)))
    report.add("coefficients vs RK4 Heisenberg integration", 1e-8, worst)

    worst_z = worst_bar = 0.0
    for _ in range(200):
        tau, chi, phi = rng.uniform(0, 10), rng.uniform(-0.99, 0.99), rng.uniform(0, 2 * math.pi)
        a, b, eta, zeta = rng.normal(size=4) + 1j * rng.normal(size=4)
        c = dyn.evolution_coeffs(tau, chi, phi)
        z = dyn.z_labels(c, a, b)
        total = abs(a) ** 2 + abs(b) ** 2
        worst_z = max(worst_z, abs(abs(z.z1) ** 2 + abs(z.z3) ** 2 - total), abs(abs(z.z2) ** 2 + abs(z.z4) ** 2 - total))
        eb, zb = cf.bar_parameters(eta, zeta, c)
        worst_bar = max(worst_bar, abs(abs(eb) ** 2 + abs(zb) ** 2 - abs(eta) ** 2 - abs(zeta) ** 2))
    report.add("labels: |z1|^2 + |z3|^2 = |z2|^2 + |z4|^2 = |alpha|^2 + |beta|^2", 1e-12, worst_z)
    report.add("parameter map preserves |eta|^2 + |zeta|^2", 1e-12, worst_bar)

    s = dyn.Scenario.build(1.0, 0.0)
    report.add("S(pi/4) for |alpha|^2 = 1, Phi = 0", 1e-6, abs(float(dyn.entropy_closed_form(s, math.pi / 4)) - ENTROPY_AT_QUARTER))


def _index_of(taus, t):
    i = int(np.argmin(np.abs(taus - t)))
    return i if abs(taus[i] - t) < 1e-9 else None


def scenario_checks(s: dyn.Scenario, taus, label, analytic=None, epsilon=DEFAULT_EPSILON):
    """Every oracle comparison and special-time property for one scenario."""
    oracle = orc.Oracle(s, epsilon=epsilon)
    records = oracle.observe(taus)
    report = orc.verify_against_analytic(s, taus, analytic=analytic, records=records, label=label)
    report.label = f"{label} (n_max={oracle.n_max})"
    Phi = s.cat.Phi
    even_odd = dyn._near_angle(Phi, 0.0) or dyn._near_angle(Phi, math.pi)
    entropy = analytic.get("entropy_a", dyn.entropy_closed_form) if analytic else dyn.entropy_closed_form

    zeros = [k * math.pi / 2 for k in range(9)]
    report.add("closed-form entropy zeros at k pi/2", 1e-9, max(abs(float(entropy(s, t))) for t in zeros))
    oracle_zero = [orc.record(t, oracle.state(t), oracle.exchanged).entropy_a for t in zeros]
    report.add("oracle entropy zeros at k pi/2", 1e-9, max(abs(v) for v in oracle_zero))

    n_max = oracle.n_max
    rotated = dyn.Scenario(dyn.CatSpec(-s.alpha, Phi), -s.beta, s.coupling)
    ref = dyn.initial_state(rotated, n_max)
    psi_a = dyn.joint_state(s, math.pi, n_max)
    fid_a = abs(np.vdot(ref.amps, psi_a.amps)) ** 2 / (ref.norm2 * psi_a.norm2)
    psi_o = oracle.state(math.pi)
    fid_o = abs(np.vdot(ref.amps, psi_o.amps)) ** 2 / (ref.norm2 * psi_o.norm2)
    report.add("recurrence fidelity at tau = pi (closed form)", 1e-10, 1 - fid_a)
    report.add("recurrence fidelity: oracle vs closed form", 1e-8, abs(fid_o - fid_a))

    e_half = dyn.exchange_at_half_period(s.alpha, Phi)
    half_closed = float(dyn.exchange_functional_closed(s, math.pi / 2))
    half_overlap = dyn.exchange_functional_overlap(s, math.pi / 2, n_max)
    report.add("E(pi/2) closed form vs plateau value", 1e-9, abs(half_closed - e_half))
    report.add("E(pi/2) overlap vs plateau value", 1e-9, abs(half_overlap - e_half))
    if even_odd:
        worst = max(abs(float(dyn.exchange_functional_closed(s, t)) - 1) for t in (math.pi / 2, 2.5 * math.pi, 4.5 * math.pi))
        report.add("E = 1 at tau = pi/2, 5pi/2, 9pi/2 (closed form)", 1e-10, worst)
        report.add("E(pi/2) = 1 (overlap)", 1e-10, abs(half_overlap - 1))
    e_three = dyn.exchange_at_three_half_period(s.beta)
    report.add("E(3pi/2) = exp(-4|beta|^2)", 1e-10, abs(float(dyn.exchange_functional_closed(s, 1.5 * math.pi)) - e_three))

    balanced = abs(abs(s.beta) ** 2 - dyn.balanced_intensity(s.alpha, Phi)) < 1e-12
    if balanced:
        n_a = np.array([r.n_a for r in records])
        n_b = np.array([r.n_b for r in records])
        report.add("balanced: oracle n_a drift", 1e-9, np.ptp(n_a))
        report.add("balanced: oracle n_b drift", 1e-9, np.ptp(n_b))
    report.add("<n_A + n_B>: oracle vs closed form", 1e-10, abs(records[0].total_n - dyn.total_excitations(s)))

    if even_odd and balanced:
        var_a = np.array([r.var_a for r in records])
        var_b = np.array([r.var_b for r in records])
        report.add("V(n_A) oscillates (max - min)", 0.0, np.ptp(var_a), comparison=">")
        step = taus[1] - taus[0]
        shift = int(round(math.pi / 2 / step))
        if abs(shift * step - math.pi / 2) < 1e-9 and shift < len(taus):
            dev = np.abs(var_b[:-shift] - var_a[shift:])
            report.add("V(n_B)(tau) = V(n_A)(tau + pi/2) (oracle)", 1e-8, dev.max())

    worst_num = worst_fac = worst_sym = 0.0
    for t in CHI_TAUS:
        psi = oracle.state(t)
        for eta, zeta in chi_pairs():
            closed = cf.chi_N_closed(s, t, eta, zeta)
            worst_num = max(worst_num, abs(closed - cf.chi_N_numeric(psi, eta, zeta)))
            worst_fac = max(worst_fac, abs(closed - cf.chi_N_factorized(s, t, eta, zeta)))
            worst_sym = max(worst_sym, abs(cf.chi_N_closed(s, t, -eta, -zeta) - np.conj(closed)))
    report.add("chi_N closed form vs numeric trace (5x5 grid, 4 times)", 1e-8, worst_num)
    report.add("chi_N factorizes at mapped parameters", 1e-10, worst_fac)
    report.add("chi_N(-eta, -zeta) = conj chi_N(eta, zeta)", 1e-12, worst_sym)
    return report, records


def run_verify(config: ScenarioConfig | None = None, inject_fault: bool = False) -> dict:
    """Run the whole verification suite; returns the JSON-ready report."""
    config = config or ScenarioConfig()
    if abs(config.detuning) > dyn.DETUNING_TOL:
        raise ConfigError("verify requires zero detuning", "detuning")
    taus = config.grid.taus()
    analytic = {"entropy_a": lambda s, t: -dyn.entropy_closed_form(s, t)} if inject_fault else None

    sections = []
    glob = orc.VerificationReport("global")
    _global_checks(glob)
    sections.append(glob)

    entropies = {}
    scenarios = [
        (f"|alpha|^2={a2:g} Phi={PHASE_NAMES[Phi]}", config.scenario(Phi=Phi, alpha_mag=math.sqrt(a2)))
        for a2 in DEFAULT_ALPHA2
        for Phi in DEFAULT_PHASES
    ]
    if config.explicit & {"alpha_mag", "alpha_phase", "Phi", "beta"}:
        scenarios.append(("config scenario", config.scenario()))
    for label, s in scenarios:
        report, records = scenario_checks(s, taus, label, analytic, config.epsilon_trunc)
        sections.append(report)
        entropies[label] = np.array([r.entropy_a for r in records])

    curves = orc.VerificationReport("figure properties")
    fig2 = [entropies[f"|alpha|^2=5 Phi={PHASE_NAMES[p]}"] for p in DEFAULT_PHASES]
    spread = max(np.max(np.abs(x - y)) for i, x in enumerate(fig2) for y in fig2[i + 1 :])
    curves.add("|alpha|^2=5 entropy curves coincide (sup-norm)", 0.01, spread, comparison="<")
    max_s = max(np.max(entropies[f"|alpha|^2=1 Phi={PHASE_NAMES[p]}"]) for p in (0.0,))
    curves.add("|alpha|^2=1, Phi=0 entropy reaches its cycle (max S)", 0.2, max_s, comparison=">")
    yurke = config.scenario(Phi=math.pi / 2, alpha_mag=math.sqrt(5.0))
    e_max = float(np.max(dyn.exchange_functional_closed(yurke, np.linspace(0, 5 * math.pi, 5 * POINTS_PER_PI + 1))))
    curves.add("Phi=pi/2 exchange functional stays below 1", 1 - 1e-3, e_max, comparison="<")
    swept = [
        abs(float(dyn.exchange_functional_closed(config.scenario(Phi=p, alpha_mag=1.0), math.pi / 2)) - dyn.exchange_at_half_period(1.0, p))
        for p in np.linspace(0, 2 * math.pi, 9)
    ]
    curves.add("E(pi/2) plateau over 9 values of Phi", 1e-9, max(swept))
    fixed_beta = math.sqrt(5 * math.tanh(5))
    vals = [
        float(dyn.exchange_functional_closed(dyn.Scenario.build(a, p, fixed_beta), 1.5 * math.pi))
        for a in (1.0, math.sqrt(5))
        for p in DEFAULT_PHASES
    ]
    curves.add("E(3pi/2) independent of alpha and Phi", 1e-10, np.ptp(vals))
    sections.append(curves)

    n_checks = sum(len(sec.checks) for sec in sections)
    failed = [(sec.label, c) for sec in sections for c in sec.checks if not c.passed]
    return {
        "passed": not failed,
        "n_checks": n_checks,
        "n_failed": len(failed),
        "grid": {"tau_min": config.grid.tau_min, "tau_max": config.grid.tau_max, "points": config.grid.points},
        "epsilon_trunc": config.epsilon_trunc,
        "inject_fault": inject_fault,
        "sections": [sec.to_json() for sec in sections],
        "summary": summary_text(sections),
    }


def summary_text(sections) -> str:
    lines = []
    for sec in sections:
        lines.append(f"== {sec.label}")
        for c in sec.checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"  [{mark}] {c.name}: {c.deviation:.3e} {c.comparison} {c.tolerance:g}")
    n = sum(len(s.checks) for s in sections)
    bad = sum(1 for s in sections for c in s.checks if not c.passed)
    lines.append(f"{n - bad}/{n} checks passed")
    return "\n".join(lines) + "\n"


def emit_schedule(config: ScenarioConfig | None = None, n_terms: int = 6) -> dict:
    config = config or ScenarioConfig()
    s = config.scenario()
    return dyn.special_times(s, n_terms).to_json()
