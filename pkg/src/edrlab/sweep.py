"""Measurement-strength sweep and plot-ready result tables."""

from __future__ import annotations

import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from edrlab import bounds, estimators, instruments
from edrlab.errors import ConfigError, InputError, OutputError
from edrlab.states import bloch_axis, parse_state, pauli_observable, stddev

METHODS = ("direct", "three_state", "two_state", "weak_exact", "weak_shots")
INSTRUMENT_TYPES = ("vpbs", "projective", "imperfect_vpbs")
BOUND_KINDS = ("C", "D")
SIG_DIGITS = 12
STAGE_ERROR, STAGE_DISTURBANCE = 0, 1


@dataclass
class SweepConfig:
    signal_state: object = "L"
    A: str = "sigma_z"
    B: str = "sigma_x"
    theta_grid: object = 101
    methods: list = field(default_factory=lambda: list(METHODS))
    probe_strength: float = estimators.DEFAULT_PROBE_STRENGTH
    shots: int = 1_000_000
    seed: int = 0
    extinction: float = 0.0
    relations: list = field(default_factory=lambda: list(bounds.RELATION_NAMES))
    instrument: str = "vpbs"
    commutator_bound: str = "C"
    workers: int = 1

    @classmethod
    def from_mapping(cls, data) -> "SweepConfig":
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping of field names to values")
        data = dict(data)
        inst = data.get("instrument")
        if isinstance(inst, dict):
            inst = dict(inst)
            inst.pop("theta", None)  # theta is swept
            if "extinction" in inst:
                data["extinction"] = inst.pop("extinction")
            data["instrument"] = inst.pop("type", "vpbs")
            if inst:
                raise ConfigError(f"unknown instrument keys {sorted(inst)}; valid: type, theta, extinction")
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown config keys {unknown}; valid keys: {', '.join(sorted(names))}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        self.methods = list(self.methods)
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}; valid names: {', '.join(METHODS)}")
        self.relations = list(self.relations)
        bad = [r for r in self.relations if r not in bounds.RELATION_NAMES]
        if bad:
            raise ConfigError(
                f"unknown relations {bad}; valid names: {', '.join(bounds.RELATION_NAMES)}"
            )
        if self.instrument not in INSTRUMENT_TYPES:
            raise ConfigError(
                f"unknown instrument {self.instrument!r}; valid types: {', '.join(INSTRUMENT_TYPES)}"
            )
        if self.commutator_bound not in BOUND_KINDS:
            raise ConfigError("commutator_bound must be 'C' or 'D'")
        try:
            self.extinction = float(self.extinction)
            self.probe_strength = float(self.probe_strength)
            self.shots = int(self.shots)
            self.seed = int(self.seed)
            self.workers = int(self.workers)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid numeric config value: {exc}") from None
        if self.instrument == "vpbs" and self.extinction != 0.0:
            raise ConfigError("extinction > 0 requires instrument type 'imperfect_vpbs'")
        if not 0.0 <= self.extinction < 1.0:
            raise ConfigError("extinction must lie in [0, 1)")
        if not 0.0 < self.probe_strength <= 1.0:
            raise ConfigError("probe_strength must lie in (0, 1]")
        if self.shots <= 0:
            raise ConfigError("shots must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for name in (self.A, self.B):
            try:
                pauli_observable(name)
            except InputError as exc:
                raise ConfigError(str(exc)) from None
        try:
            parse_state(self.signal_state)
        except InputError as exc:
            raise ConfigError(str(exc)) from None
        self.thetas()

    def thetas(self) -> np.ndarray:
        grid = self.theta_grid
        if isinstance(grid, (int, np.integer)) and not isinstance(grid, bool):
            if grid < 1:
                raise ConfigError("theta_grid point count must be positive")
            return np.linspace(0.0, np.pi / 4, int(grid)) if grid > 1 else np.zeros(1)
        try:
            pts = np.asarray(grid, dtype=float).ravel()
        except (TypeError, ValueError):
            raise ConfigError("theta_grid must be a point count or a list of angles") from None
        if pts.size == 0:
            raise ConfigError("theta_grid is empty")
        if np.any(np.diff(pts) <= 0):
            raise ConfigError("theta_grid must be strictly increasing")
        if pts[0] < 0 or pts[-1] > np.pi / 4 + 1e-12:
            raise ConfigError("theta_grid must lie within [0, pi/4]")
        return np.minimum(pts, np.pi / 4)


@dataclass
class SweepRow:
    theta: float
    strength: float
    eps: dict
    eta: dict
    stderr: dict
    reports: list

    def flat(self) -> dict:
        """Ordered column mapping used by both table formats."""
        out = {"theta": self.theta, "s": self.strength}
        for method in self.eps:
            out[f"eps_{method}"] = self.eps[method]
            out[f"eta_{method}"] = self.eta[method]
            if method in self.stderr:
                out[f"eps_{method}_stderr"], out[f"eta_{method}_stderr"] = self.stderr[method]
        for rep in self.reports:
            name = rep.relation.value
            out[f"rel_{name}_lhs"] = rep.lhs
            out[f"rel_{name}_rhs"] = rep.rhs
            out[f"rel_{name}_slack"] = rep.slack
        return out


def build_instrument(cfg: SweepConfig, theta: float) -> instruments.Instrument:
    if cfg.instrument == "projective":
        return instruments.projective_instrument(pauli_observable(cfg.A))
    if cfg.instrument == "imperfect_vpbs":
        return instruments.imperfect_pbs_instrument(theta, cfg.extinction)
    return instruments.vpbs_instrument(theta)


def _row(cfg: SweepConfig, index: int, theta: float) -> SweepRow:
    A, B = pauli_observable(cfg.A), pauli_observable(cfg.B)
    psi = parse_state(cfg.signal_state).density()
    instr = build_instrument(cfg, theta)
    model = instr.dilation()
    pair = instruments.heisenberg_observables(model, A, B)
    joint = model.joint_state(psi)
    eps = {"direct": instruments.error_direct(model, A, psi)}
    eta = {"direct": instruments.disturbance_direct(model, B, psi)}
    stderr = {}
    probe_a = estimators.WeakProbe.from_strength(A, cfg.probe_strength)
    probe_b = estimators.WeakProbe.from_strength(B, cfg.probe_strength)
    for method in cfg.methods:
        if method == "direct":
            continue
        if method == "three_state":
            eps[method] = estimators.three_state_error(instr, A, psi)
            eta[method] = estimators.three_state_disturbance(instr, B, psi)
        elif method == "two_state":
            eps[method] = estimators.two_state_error(instr, A, psi)
            eta[method] = estimators.two_state_disturbance(instr, B, psi)
        elif method == "weak_exact":
            dist_a = estimators.cascade_distribution(probe_a, instr, B, psi)
            dist_b = estimators.cascade_distribution(probe_b, instr, B, psi)
            eps[method] = estimators.weak_probe_error(dist_a, probe_a.strength)
            eta[method] = estimators.weak_probe_disturbance(dist_b, probe_b.strength)
        elif method == "weak_shots":
            dist_a = estimators.cascade_distribution(probe_a, instr, B, psi)
            dist_b = estimators.cascade_distribution(probe_b, instr, B, psi)
            rec_a = estimators.sample_shots(dist_a, cfg.shots, cfg.seed, (index, STAGE_ERROR))
            rec_b = estimators.sample_shots(dist_b, cfg.shots, cfg.seed, (index, STAGE_DISTURBANCE))
            eps[method], se_a = estimators.estimate_from_counts(rec_a, probe_a.strength, "error")
            eta[method], se_b = estimators.estimate_from_counts(rec_b, probe_b.strength, "disturbance")
            stderr[method] = (se_a, se_b)

    if cfg.commutator_bound == "D":
        c = bounds.mixed_bound_D(A, B, psi)
    else:
        c = bounds.commutator_bound_C(A, B, psi)
    inputs = bounds.RelationInputs(
        eps=eps["direct"],
        eta=eta["direct"],
        sigma_a=stddev(A, psi),
        sigma_b=stddev(B, psi),
        c=c,
        bloch_a=tuple(bloch_axis(A)),
        bloch_b=tuple(bloch_axis(B)),
        ozawa0_term=bounds.ozawa0_term(pair, A, B, joint),
    )
    reports = bounds.evaluate_all(inputs, cfg.relations)
    return SweepRow(float(theta), float(np.cos(2 * theta)), eps, eta, stderr, reports)


def run_sweep(cfg: SweepConfig) -> list[SweepRow]:
    """One row per grid angle, in grid order.

    Shot streams are keyed by ``(seed, row index, stage)``, so the output does
    not depend on ``cfg.workers``.
    """
    cfg.validate()
    thetas = cfg.thetas()
    if cfg.workers == 1:
        return [_row(cfg, i, th) for i, th in enumerate(thetas)]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(lambda it: _row(cfg, *it), enumerate(thetas)))


def _fmt(x: float) -> str:
    return f"{x:.{SIG_DIGITS}g}"


def render_table(rows: list[SweepRow], fmt: str = "csv") -> str:
    if not rows:
        raise InputError("cannot emit an empty table")
    flat = [r.flat() for r in rows]
    header = list(flat[0])
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in flat:
            writer.writerow([_fmt(row[k]) for k in header])
        return buf.getvalue()
    if fmt == "json":
        data = [{k: float(_fmt(row[k])) for k in header} for row in flat]
        return json.dumps(data, indent=2) + "\n"
    raise InputError(f"format must be 'csv' or 'json', not {fmt!r}")


def emit_table(rows: list[SweepRow], fmt: str = "csv", destination=None) -> None:
    """Write the table to ``destination`` (a path) or standard output when ``None``/``"-"``."""
    text = render_table(rows, fmt)
    if destination is None or str(destination) == "-":
        sys.stdout.write(text)
        return
    path = Path(destination)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_config(path) -> dict:
    """Read a YAML (or JSON) config file into a mapping."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise OutputError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must contain a mapping")
    return data


def apply_overrides(data: dict, overrides) -> dict:
    """Apply ``key=value`` strings; dotted keys address nested mappings and
    values are parsed as YAML scalars or lists."""
    data = dict(data)
    for item in overrides or ():
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"override {item!r} is not of the form key=value")
        try:
            value = yaml.safe_load(raw) if raw.strip() else ""
        except yaml.YAMLError:
            value = raw
        parts = key.strip().split(".")
        node = data
        for part in parts[:-1]:
            child = node.get(part)
            if isinstance(child, str) and part == "instrument":
                child = {"type": child}
            elif not isinstance(child, dict):
                child = {}
            node[part] = dict(child)
            node = node[part]
        node[parts[-1]] = value
    return data


__all__ = [
    "METHODS",
    "SweepConfig",
    "SweepRow",
    "apply_overrides",
    "emit_table",
    "load_config",
    "render_table",
    "run_sweep",
]
