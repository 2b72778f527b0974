"""Scenario configuration: JSON schema, validation and the single-run /
sweep executor behind the ``simulate`` command.

A configuration describes one link evaluation. ``beam.w0`` is the only
required field; everything else falls back to the reference design values
(see DEFAULT_CONFIG). Lengths are meters, powers watts, bandwidth Hz;
angles cross this boundary in degrees and RIN / noise figure in dB.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from copy import deepcopy
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .beam import BeamParams
from .channel import ArrayLayout, ChannelMatrix, GainMethod, LayoutKind, build_layout, mimo_matrix
from .channel import write_gains_csv
from .geometry import MisalignmentState
from .linkbudget import LinkParams, Mode, RateReport, aggregate_rate, write_rates_csv

__all__ = [
    "ConfigError",
    "Scenario",
    "DEFAULT_CONFIG",
    "load_config",
    "build_scenario",
    "run_scenario",
]


class ConfigError(ValueError):
    """Configuration rejected; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f"config field '{field}': {message}")
        self.field = field


DEFAULT_CONFIG: dict = {
    "beam": {"wavelength": 850e-9, "w0": None},
    "link": {
        "p_t": 1e-3,
        "bandwidth": 20e9,
        "responsivity": 0.4,
        "rin_db_hz": -155.0,
        "load_resistance": 50.0,
        "noise_figure_db": 5.0,
        "temperature": 290.0,
        "target_ber": 1e-3,
        "n_fft": 64,
    },
    "distance": 2.0,
    "pd": {"radius": 3e-3, "spacing": 6e-3},
    "tx_array": {"kind": "square", "k": 5},
    "rx_array": {"kind": "square", "k": 5},
    "misalignment": {
        "x_de": 0.0,
        "y_de": 0.0,
        "phi_a_deg": 0.0,
        "phi_e_deg": 0.0,
        "psi_a_deg": 0.0,
        "psi_e_deg": 0.0,
    },
    "method": "exact-gmm",
    "mode": "direct",
    "sweep": None,
}

_REQUIRED = {"beam.w0"}

_ARRAY_KINDS = {k.value for k in LayoutKind}
_METHODS = {m.value for m in GainMethod}
_MODES = {m.value for m in Mode}


def _type_name(value) -> str:
    return type(value).__name__


def _merge(defaults: dict, user: dict, prefix: str = "") -> dict:
    out = {}
    for key, default in defaults.items():
        path = f"{prefix}{key}"
        if key not in user:
            out[key] = deepcopy(default)
        elif isinstance(default, dict) and default:
            if not isinstance(user[key], dict):
                raise ConfigError(path, f"expected an object, got {_type_name(user[key])}")
            out[key] = _merge(default, user[key], prefix=path + ".")
        else:
            out[key] = user[key]
    for key in user:
        if key not in defaults:
            raise ConfigError(f"{prefix}{key}", "unknown field")
    return out


def _require_number(cfg: dict, path: str, positive=False, nonneg=False):
    node = cfg
    for part in path.split("."):
        node = node[part]
    if node is None:
        raise ConfigError(path, "missing required field")
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ConfigError(path, f"expected a number, got {_type_name(node)}")
    if positive and node <= 0:
        raise ConfigError(path, f"must be > 0, got {node}")
    if nonneg and node < 0:
        raise ConfigError(path, f"must be >= 0, got {node}")
    return float(node)


def _require_choice(cfg: dict, path: str, choices) -> str:
    node = cfg
    for part in path.split("."):
        node = node[part]
    if node not in choices:
        raise ConfigError(path, f"must be one of {sorted(choices)}, got {node!r}")
    return node


def _validate(cfg: dict) -> dict:
    for path in ("beam.wavelength", "beam.w0", "link.p_t", "link.bandwidth",
                 "link.responsivity", "link.load_resistance", "link.temperature",
                 "link.target_ber", "distance", "pd.radius"):
        _require_number(cfg, path, positive=True)
    for path in ("link.rin_db_hz", "link.noise_figure_db"):
        _require_number(cfg, path)
    _require_number(cfg, "pd.spacing", nonneg=True)
    n_fft = cfg["link"]["n_fft"]
    if not isinstance(n_fft, int) or isinstance(n_fft, bool):
        raise ConfigError("link.n_fft", f"expected an integer, got {_type_name(n_fft)}")
    for side in ("tx_array", "rx_array"):
        kind = _require_choice(cfg, f"{side}.kind", _ARRAY_KINDS)
        k = cfg[side].get("k")
        if kind == "square":
            if not isinstance(k, int) or isinstance(k, bool) or k < 1:
                raise ConfigError(f"{side}.k", "square arrays need an integer k >= 1")
    for field in cfg["misalignment"]:
        _require_number(cfg, f"misalignment.{field}")
    _require_choice(cfg, "method", _METHODS)
    _require_choice(cfg, "mode", _MODES)
    sweep = cfg["sweep"]
    if sweep is not None:
        if not isinstance(sweep, dict):
            raise ConfigError("sweep", f"expected an object, got {_type_name(sweep)}")
        for key in ("parameter", "start", "stop", "steps"):
            if key not in sweep:
                raise ConfigError(f"sweep.{key}", "missing required field")
        unknown = set(sweep) - {"parameter", "start", "stop", "steps", "scale"}
        if unknown:
            raise ConfigError(f"sweep.{sorted(unknown)[0]}", "unknown field")
        param = sweep["parameter"]
        if not isinstance(param, str) or not _sweepable(cfg, param):
            raise ConfigError("sweep.parameter", f"{param!r} is not a sweepable numeric field")
        if not isinstance(sweep["steps"], int) or sweep["steps"] < 2:
            raise ConfigError("sweep.steps", "must be an integer >= 2")
        scale = sweep.get("scale", "linear")
        if scale not in ("linear", "log"):
            raise ConfigError("sweep.scale", f"must be 'linear' or 'log', got {scale!r}")
        if scale == "log" and (sweep["start"] <= 0 or sweep["stop"] <= 0):
            raise ConfigError("sweep.scale", "log scale needs positive start/stop")
        sweep.setdefault("scale", "linear")
    return cfg


def _sweepable(cfg: dict, dotted: str) -> bool:
    node = cfg
    for part in dotted.split("."):
        if not isinstance(node, dict) or part not in node:
            return False
        node = node[part]
    return isinstance(node, (int, float)) and not isinstance(node, bool)


def _set_path(cfg: dict, dotted: str, value: float) -> dict:
    out = deepcopy(cfg)
    node = out
    parts = dotted.split(".")
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value
    return out


def load_config(path) -> dict:
    """Read, default-fill and validate a scenario configuration file."""
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError("<file>", f"cannot read {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<file>", "top level must be a JSON object")
    return _validate(_merge(DEFAULT_CONFIG, raw))


@dataclass(frozen=True)
class Scenario:
    """A fully resolved evaluation: built domain objects plus the resolved
    configuration they came from."""

    beam: BeamParams
    params: LinkParams
    distance: float
    tx: ArrayLayout
    rx: ArrayLayout
    state: MisalignmentState
    method: GainMethod
    mode: Mode
    config: dict

    def channel_matrix(self) -> ChannelMatrix:
        return mimo_matrix(
            self.beam, self.distance, self.tx, self.rx, self.state, self.method
        )

    def rates(self, matrix: ChannelMatrix | None = None) -> RateReport:
        matrix = matrix or self.channel_matrix()
        return aggregate_rate(matrix, self.params, self.mode)


def _build_layout(section: dict, pd_cfg: dict, transmitter: bool) -> ArrayLayout:
    return build_layout(
        section["kind"],
        k=section.get("k"),
        r_pd=pd_cfg["radius"],
        delta=pd_cfg["spacing"],
        transmitter=transmitter,
    )


def build_scenario(cfg: dict) -> Scenario:
    """Instantiate domain objects from a validated configuration."""
    beam = BeamParams(wavelength=cfg["beam"]["wavelength"], waist_radius=cfg["beam"]["w0"])
    link = cfg["link"]
    params = LinkParams(
        p_t=link["p_t"],
        bandwidth=link["bandwidth"],
        responsivity=link["responsivity"],
        rin=10 ** (link["rin_db_hz"] / 10.0),
        load_resistance=link["load_resistance"],
        noise_figure=10 ** (link["noise_figure_db"] / 10.0),
        temperature=link["temperature"],
        target_ber=link["target_ber"],
        n_fft=link["n_fft"],
    )
    mis = cfg["misalignment"]
    state = MisalignmentState(
        x_de=mis["x_de"],
        y_de=mis["y_de"],
        phi_a=math.radians(mis["phi_a_deg"]),
        phi_e=math.radians(mis["phi_e_deg"]),
        psi_a=math.radians(mis["psi_a_deg"]),
        psi_e=math.radians(mis["psi_e_deg"]),
    )
    tx = _build_layout(cfg["tx_array"], cfg["pd"], transmitter=True)
    rx = _build_layout(cfg["rx_array"], cfg["pd"], transmitter=False)
    mode = Mode(cfg["mode"])
    if mode is Mode.DIRECT and tx.n_elements != rx.n_elements:
        raise ConfigError("mode", "direct mode requires equally sized arrays")
    if rx.n_elements < tx.n_elements:
        raise ConfigError("rx_array", "receiver array must not be smaller than transmitter")
    return Scenario(
        beam=beam,
        params=params,
        distance=cfg["distance"],
        tx=tx,
        rx=rx,
        state=state,
        method=GainMethod(cfg["method"]),
        mode=mode,
        config=cfg,
    )


def _sweep_values(sweep: dict) -> np.ndarray:
    if sweep["scale"] == "log":
        return np.geomspace(sweep["start"], sweep["stop"], sweep["steps"])
    return np.linspace(sweep["start"], sweep["stop"], sweep["steps"])


def _sweep_point(cfg: dict, parameter: str, value: float) -> tuple[float, float, float]:
    scenario = build_scenario(_set_path(cfg, parameter, float(value)))
    report = scenario.rates()
    finite = report.per_link_sinr[report.per_link_sinr > 0]
    lo = 10 * math.log10(finite.min()) if finite.size else float("-inf")
    hi = 10 * math.log10(finite.max()) if finite.size else float("-inf")
    return report.aggregate, lo, hi


def run_scenario(config_path, out_dir, threads: int = 1, seed: int = 0) -> list[Path]:
    """Execute a configuration and write gains.csv, rates.csv, meta.json
    and (for sweep configs) sweep.csv into ``out_dir``.

    Outputs are deterministic: rerunning the same configuration produces
    byte-identical CSV files. Sweep rows are emitted in ascending parameter
    order regardless of the worker schedule.
    """
    cfg = load_config(config_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scenario = build_scenario(cfg)
    matrix = scenario.channel_matrix()
    report = scenario.rates(matrix)

    gains_path = out / "gains.csv"
    rates_path = out / "rates.csv"
    write_gains_csv(matrix, gains_path)
    write_rates_csv(report, rates_path)
    written = [gains_path, rates_path]

    if cfg["sweep"] is not None:
        sweep = cfg["sweep"]
        values = _sweep_values(sweep)
        order = np.argsort(values, kind="stable")
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                rows = list(pool.map(lambda v: _sweep_point(cfg, sweep["parameter"], v), values))
        else:
            rows = [_sweep_point(cfg, sweep["parameter"], v) for v in values]
        sweep_path = out / "sweep.csv"
        with open(sweep_path, "w", newline="\n") as fh:
            fh.write(f"{sweep['parameter']},aggregate_rate_bps,min_sinr_db,max_sinr_db\n")
            for idx in order:
                agg, lo, hi = rows[idx]
                fh.write(f"{values[idx]:.11e},{agg:.11e},{lo:.11e},{hi:.11e}\n")
        written.append(sweep_path)

    meta = {
        "tool": "vcselink",
        "version": __version__,
        "seed": seed,
        "config": cfg,
        "outputs": [p.name for p in written] + ["meta.json"],
    }
    meta_path = out / "meta.json"
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    written.append(meta_path)
    return written
