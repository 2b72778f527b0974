"""Electrical-domain link analysis.

DC-biased OFDM signal power, receiver noise variance, per-stream SINR with
and without SVD eigenmode decomposition, adaptive-QAM spectral efficiency
and aggregate throughput, plus small utilities (eye-safety power cap,
normalized mean square error).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .channel import ChannelMatrix

__all__ = [
    "BOLTZMANN",
    "ELEMENTARY_CHARGE",
    "LinkParams",
    "Mode",
    "RateReport",
    "electrical_signal_power",
    "noise_variance",
    "sinr_direct",
    "svd_thin",
    "sinr_svd",
    "sinr_gap",
    "bits_per_symbol",
    "aggregate_rate",
    "eye_safe_power_limit",
    "nmse",
    "write_rates_csv",
    "read_rates_csv",
]

BOLTZMANN = 1.380649e-23  # J/K
ELEMENTARY_CHARGE = 1.602177e-19  # C

_SINR_VALIDITY_LINEAR = 1e3  # 30 dB, upper edge of the adaptive-QAM fit


@dataclass(frozen=True)
class LinkParams:
    """Electrical/optical front-end parameters of one array link.

    Defaults follow the reference design: 1 mW per laser, 20 GHz system
    bandwidth, -155 dB/Hz RIN, 0.4 A/W responsivity, 50 ohm load, 5 dB
    amplifier noise figure, 290 K, target BER 1e-3, 64-point FFT. ``rin``
    and ``noise_figure`` are linear quantities.
    """

    p_t: float = 1e-3
    bandwidth: float = 20e9
    responsivity: float = 0.4
    rin: float = 10 ** (-155 / 10)
    load_resistance: float = 50.0
    noise_figure: float = 10 ** (5 / 10)
    temperature: float = 290.0
    target_ber: float = 1e-3
    n_fft: int = 64

    def __post_init__(self) -> None:
        positive = {
            "p_t": self.p_t,
            "bandwidth": self.bandwidth,
            "responsivity": self.responsivity,
            "rin": self.rin,
            "load_resistance": self.load_resistance,
            "noise_figure": self.noise_figure,
            "temperature": self.temperature,
            "target_ber": self.target_ber,
        }
        for name, value in positive.items():
            if value <= 0:
                raise ValueError(f"{name} must be > 0, got {value}")
        if self.target_ber > 1e-2:
            raise ValueError("target_ber above 1e-2 is outside the QAM fit validity")
        if self.n_fft < 64 or self.n_fft & (self.n_fft - 1):
            raise ValueError("n_fft must be a power of two >= 64")

    @property
    def subcarrier_efficiency(self) -> float:
        """Usable fraction of the OFDM frame, (n_fft - 2)/n_fft."""
        return (self.n_fft - 2) / self.n_fft


class Mode(str, Enum):
    DIRECT = "direct"
    SVD = "svd"


def electrical_signal_power(p_t: float) -> float:
    """Electrical OFDM signal power under the 3-sigma DC bias rule: p_t^2/9.

    The DC bias equals the per-laser optical power and is set to three
    standard deviations of the OFDM envelope, which keeps 99.7% of the
    waveform unclipped.
    """
    if p_t <= 0:
        raise ValueError("p_t must be > 0")
    return p_t * p_t / 9.0


def noise_variance(row_gains, params: LinkParams) -> float:
    """Total receiver-branch noise variance (A^2) for one detector.

    Thermal + shot + RIN; shot and RIN terms depend on the total optical
    power collected from all transmitters, i.e. on the detector's full gain
    row.
    """
    row = np.asarray(row_gains, dtype=float)
    thermal = 4.0 * BOLTZMANN * params.temperature / params.load_resistance
    thermal *= params.bandwidth * params.noise_figure
    photo = params.responsivity * row * params.p_t
    shot = 2.0 * ELEMENTARY_CHARGE * photo.sum() * params.bandwidth
    rin = params.rin * (photo**2).sum() * params.bandwidth
    return float(thermal + shot + rin)


def _as_gains(h) -> np.ndarray:
    return h.gains if isinstance(h, ChannelMatrix) else np.asarray(h, dtype=float)


def sinr_direct(h, i: int, params: LinkParams) -> float:
    """Per-subcarrier SINR of stream ``i`` (0-based) without precoding.

    Requires a square matrix: each transmitter is paired with the detector
    of the same index, the remaining row entries act as crosstalk.
    """
    gains = _as_gains(h)
    if gains.ndim != 2 or gains.shape[0] != gains.shape[1]:
        raise ValueError("direct mode requires a square channel matrix")
    p_elec = electrical_signal_power(params.p_t)
    row = gains[i]
    scale = params.responsivity**2 * p_elec
    signal = scale * row[i] ** 2
    interference = scale * float((row**2).sum() - row[i] ** 2)
    return signal / (interference + noise_variance(row, params))


def svd_thin(h) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD of an N_r x N_t matrix with N_r >= N_t.

    Returns (U, singular_values, V) with descending singular values,
    orthonormal U columns and orthogonal V such that U @ diag(s) @ V.T
    reconstructs the input.
    """
    gains = _as_gains(h)
    if gains.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if gains.shape[0] < gains.shape[1]:
        raise ValueError("svd_thin requires N_r >= N_t")
    u, s, vh = np.linalg.svd(gains, full_matrices=False)
    return u, s, vh.T


def sinr_svd(singular_value: float, sigma_sq: float, params: LinkParams) -> float:
    """Per-subcarrier SNR of one eigenmode stream."""
    p_elec = electrical_signal_power(params.p_t)
    return params.responsivity**2 * singular_value**2 * p_elec / sigma_sq


def sinr_gap(target_ber: float) -> float:
    """SINR penalty of adaptive QAM at the given BER: -ln(5*BER)/1.5."""
    if not 0.0 < target_ber <= 1e-2:
        raise ValueError("target_ber must be in (0, 1e-2]")
    return -math.log(5.0 * target_ber) / 1.5


def bits_per_symbol(gamma: float, target_ber: float) -> float:
    """Adaptive-QAM spectral efficiency log2(1 + gamma/Gap), bits/symbol.

    The fit is validated for SINR up to 30 dB; larger values are accepted
    with a warning.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gamma > _SINR_VALIDITY_LINEAR:
        warnings.warn(
            "SINR above 30 dB is outside the adaptive-QAM fit validity",
            stacklevel=2,
        )
    return math.log2(1.0 + gamma / sinr_gap(target_ber))


@dataclass(frozen=True)
class RateReport:
    """Per-stream SINR/bits/rate breakdown plus the aggregate throughput."""

    per_link_sinr: np.ndarray
    per_link_bits: np.ndarray
    per_link_rate: np.ndarray
    aggregate: float
    mode: Mode | None

    def __post_init__(self) -> None:
        object.__setattr__(self, "per_link_sinr", np.asarray(self.per_link_sinr, dtype=float))
        object.__setattr__(self, "per_link_bits", np.asarray(self.per_link_bits, dtype=float))
        object.__setattr__(self, "per_link_rate", np.asarray(self.per_link_rate, dtype=float))


def aggregate_rate(h, params: LinkParams, mode: Mode | str = Mode.DIRECT) -> RateReport:
    """Aggregate throughput of the array link.

    DIRECT mode needs a square matrix (one stream per matched pair); SVD
    mode needs N_r >= N_t and allocates one stream per singular value, with
    stream i inheriting the branch-i noise variance.
    """
    mode = Mode(mode)
    gains = _as_gains(h)
    n_t = gains.shape[1]
    if mode is Mode.DIRECT:
        sinrs = np.array([sinr_direct(gains, i, params) for i in range(n_t)])
    else:
        _, s, _ = svd_thin(gains)
        sinrs = np.array(
            [sinr_svd(s[i], noise_variance(gains[i], params), params) for i in range(n_t)]
        )
    bits = np.array([bits_per_symbol(g, params.target_ber) for g in sinrs])
    per_rate = params.subcarrier_efficiency * params.bandwidth * bits
    return RateReport(sinrs, bits, per_rate, float(per_rate.sum()), mode)


def eye_safe_power_limit(mpe: float, pupil_diameter: float, eta: float = 1.0) -> float:
    """Maximum safe source power: MPE times the pupil area over the power
    fraction ``eta`` entering the pupil at the most hazardous position."""
    if mpe < 0 or pupil_diameter <= 0:
        raise ValueError("need mpe >= 0 and pupil_diameter > 0")
    if not 0.0 < eta <= 1.0:
        raise ValueError("eta must be in (0, 1]")
    return mpe * math.pi * pupil_diameter**2 / 4.0 / eta


def nmse(exact, approx) -> float:
    """Normalized mean square error sum((e-a)^2)/sum(e^2)."""
    e = np.asarray(exact, dtype=float)
    a = np.asarray(approx, dtype=float)
    if e.shape != a.shape or e.size == 0:
        raise ValueError("nmse needs two equal-length, non-empty vectors")
    denom = float((e**2).sum())
    if denom == 0.0:
        raise ValueError("nmse undefined for an all-zero exact vector")
    return float(((e - a) ** 2).sum()) / denom


def _sinr_db(gamma: float) -> float:
    return 10.0 * math.log10(gamma) if gamma > 0 else float("-inf")


def write_rates_csv(report: RateReport, path) -> None:
    """CSV serialization: link_index, sinr_db, bits_per_symbol, rate_bps
    rows plus an aggregate footer; 12 significant digits, LF endings."""
    with open(path, "w", newline="\n") as fh:
        fh.write("link_index,sinr_db,bits_per_symbol,rate_bps\n")
        rows = zip(report.per_link_sinr, report.per_link_bits, report.per_link_rate)
        for idx, (g, b, r) in enumerate(rows, start=1):
            fh.write(f"{idx},{_sinr_db(g):.11e},{b:.11e},{r:.11e}\n")
        fh.write(f"aggregate,,,{report.aggregate:.11e}\n")


def read_rates_csv(path) -> RateReport:
    """Parse a rates CSV back into a report (value-level inverse of
    :func:`write_rates_csv`; the mode is not part of the file)."""
    sinr_db = []
    bits = []
    rates = []
    aggregate = 0.0
    with open(path, "r", newline="") as fh:
        fh.readline()
        for line in fh:
            cells = line.strip().split(",")
            if not cells or not cells[0]:
                continue
            if cells[0] == "aggregate":
                aggregate = float(cells[3])
                break
            sinr_db.append(float(cells[1]))
            bits.append(float(cells[2]))
            rates.append(float(cells[3]))
    sinr = np.array([10 ** (v / 10.0) if math.isfinite(v) else 0.0 for v in sinr_db])
    return RateReport(sinr, np.array(bits), np.array(rates), aggregate, None)
