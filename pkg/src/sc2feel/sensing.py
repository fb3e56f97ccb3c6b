"""Desk-scale wireless sensing pipeline for micro-Doppler spectrograms.

Moving point primitives generate chirp-frame echoes; an SVD band filter
separates the dominant scattering from clutter; a short-time Fourier
transform over slow time, integrated across range bins, yields the
spectrogram; and SSIM against a clean first-order-only reference measures
quality as a function of sensing transmit power.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

__all__ = [
    "ChirpParams",
    "Primitive",
    "RawFrame",
    "Spectrogram",
    "QualityCurve",
    "GeometryError",
    "synthesize_frame",
    "svd_band_filter",
    "stft_cube",
    "integrated_spectrogram",
    "ssim",
    "quality_vs_power",
    "default_scene",
    "save_spectrogram",
    "load_spectrogram",
    "DEFAULT_CLUTTER_PSD",
]

SPEED_OF_LIGHT = 3.0e8

# Calibrated so that, with the default scene, spectrogram quality saturates
# within the 0..30 dBm sweep while clutter still visibly degrades the low end.
DEFAULT_CLUTTER_PSD = 5e-11  # W/Hz


class GeometryError(ValueError):
    """A primitive's range became non-positive inside the frame."""


@dataclass(frozen=True)
class ChirpParams:
    """Chirp-frame geometry and spectrogram processing parameters."""

    B_s: float = 10e6    # sensing bandwidth, Hz
    T_p: float = 1e-5    # chirp duration, s
    M: int = 25          # chirps per frame
    f_s: float = 10e6    # sampling rate, Hz
    f_c: float = 60e9    # carrier frequency, Hz
    T0: float = 0.5      # unit sensing time, s
    W: int = 16          # STFT window length (slow-time samples)
    Q: int = 8           # STFT overlap
    r_a: int = 1         # first retained singular component (1-based)
    r_b: int = 8         # last retained singular component
    window: Literal["hann", "rect"] = "hann"
    coherent_range_sum: bool = True  # sum complex STFT values across range bins

    def __post_init__(self):
        n_fast = self.f_s * self.T_p
        if not (n_fast > 0 and abs(n_fast - round(n_fast)) < 1e-9):
            raise ValueError(f"f_s*T_p must be a positive integer, got {n_fast!r}")
        if self.M * self.T_p > self.T0 + 1e-12:
            raise ValueError("frame duration M*T_p must fit in the unit sensing time T0")
        if not 0 <= self.Q < self.W:
            raise ValueError(f"requires 0 <= Q < W, got Q={self.Q!r}, W={self.W!r}")
        if self.M < self.W:
            raise ValueError(f"need at least one STFT frame: M={self.M!r} < W={self.W!r}")
        if not 1 <= self.r_a <= self.r_b <= min(self.n_fast, self.M):
            raise ValueError(
                f"SVD band must satisfy 1 <= r_a <= r_b <= {min(self.n_fast, self.M)}, "
                f"got [{self.r_a}, {self.r_b}]"
            )
        if self.window not in ("hann", "rect"):
            raise ValueError(f"unknown window {self.window!r}")

    @property
    def n_fast(self) -> int:
        return int(round(self.f_s * self.T_p))

    @property
    def n_frames(self) -> int:
        # the trailing partial frame is dropped
        return (self.M - self.Q) // (self.W - self.Q)

    @property
    def slow_rate(self) -> float:
        # chirps are transmitted back to back, so the slow-time rate is 1/T_p
        return 1.0 / self.T_p

    def window_values(self) -> np.ndarray:
        if self.window == "rect":
            return np.ones(self.W)
        n = np.arange(self.W)
        return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / self.W))


@dataclass(frozen=True)
class Primitive:
    """Point scatterer with parametric range r(t) = r0 + v*t + a*sin(2*pi*f_m*t)."""

    rcs_gain: float
    r0: float
    v: float = 0.0
    a: float = 0.0
    f_m: float = 0.0
    order: Literal["first", "higher"] = "first"

    def range_at(self, t: np.ndarray) -> np.ndarray:
        return self.r0 + self.v * t + self.a * np.sin(2.0 * np.pi * self.f_m * t)

    def radial_velocity(self, t: np.ndarray) -> np.ndarray:
        return self.v + 2.0 * np.pi * self.f_m * self.a * np.cos(2.0 * np.pi * self.f_m * t)


@dataclass(frozen=True, eq=False)
class RawFrame:
    """One complex chirp frame, with scattering orders kept separately tagged.

    data = first_order + higher_order + noise; the first-order part alone is
    the clean reference the quality metric compares against.
    """

    first_order: np.ndarray
    higher_order: np.ndarray
    noise: np.ndarray
    power_w: float = math.nan
    seed: int | None = None

    @property
    def data(self) -> np.ndarray:
        return self.first_order + self.higher_order + self.noise

    @property
    def shape(self) -> tuple[int, int]:
        return self.first_order.shape

    @classmethod
    def from_array(cls, data: np.ndarray) -> "RawFrame":
        zero = np.zeros_like(data)
        return cls(first_order=np.asarray(data, dtype=complex), higher_order=zero, noise=zero)

    def first_order_only(self) -> "RawFrame":
        zero = np.zeros_like(self.first_order)
        return RawFrame(
            first_order=self.first_order, higher_order=zero, noise=zero,
            power_w=self.power_w, seed=self.seed,
        )


@dataclass(frozen=True, eq=False)
class Spectrogram:
    """Integrated time-frequency map (squared magnitude) with provenance."""

    values: np.ndarray
    power_w: float = math.nan
    seed: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


@dataclass(frozen=True)
class QualityCurve:
    """Mean SSIM versus sensing power and the saturation threshold."""

    powers_w: tuple[float, ...]
    ssim_mean: tuple[float, ...]
    ssim_std: tuple[float, ...]
    threshold_w: float
    saturation_ssim: float
    epsilon: float


def synthesize_frame(
    prims: Sequence[Primitive],
    cp: ChirpParams,
    p_s: float,
    clutter_psd: float,
    seed=None,
) -> RawFrame:
    """Simulate one chirp frame of echoes from the primitive scene.

    Sample (l, m) is taken at t = m*T_p + l/f_s.  Each primitive contributes
    amplitude rcs_gain/r(t)^2 with phase -4*pi*f_c*r(t)/c (de-chirped
    baseband; the fast-time beat structure is integrated out downstream).
    Clutter and receiver noise enter as zero-mean complex Gaussian samples
    with per-sample variance clutter_psd * f_s.
    """
    if p_s < 0.0:
        raise ValueError(f"sensing power must be non-negative, got {p_s!r}")
    if clutter_psd < 0.0:
        raise ValueError(f"clutter PSD must be non-negative, got {clutter_psd!r}")
    if not any(p.order == "first" for p in prims):
        raise ValueError("scene needs at least one first-order primitive")

    fast = np.arange(cp.n_fast) / cp.f_s
    slow = np.arange(cp.M) * cp.T_p
    t = fast[:, None] + slow[None, :]

    shape = (cp.n_fast, cp.M)
    first = np.zeros(shape, dtype=complex)
    higher = np.zeros(shape, dtype=complex)
    amp = math.sqrt(p_s)
    for prim in prims:
        r = prim.range_at(t)
        if np.any(r <= 0.0):
            raise GeometryError(
                f"primitive range reached {float(r.min()):.3g} m inside the frame"
            )
        echo = (prim.rcs_gain / r ** 2) * np.exp(-4j * np.pi * cp.f_c / SPEED_OF_LIGHT * r)
        if prim.order == "first":
            first += echo
        else:
            higher += echo
    first *= amp
    higher *= amp

    if clutter_psd > 0.0:
        rng = np.random.default_rng(seed)
        sigma = math.sqrt(clutter_psd * cp.f_s / 2.0)
        noise = sigma * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    else:
        noise = np.zeros(shape, dtype=complex)

    seed_tag = seed if isinstance(seed, int) else None
    return RawFrame(first_order=first, higher_order=higher, noise=noise,
                    power_w=p_s, seed=seed_tag)


def svd_band_filter(frame: RawFrame, r_a: int, r_b: int) -> RawFrame:
    """Keep singular components r_a..r_b (1-based, inclusive) of the frame.

    The projectors come from the SVD of the composite frame and are applied
    to each tagged component, so the filtered frame still decomposes into
    first-order, higher-order, and noise parts.
    """
    rank_bound = min(frame.shape)
    if not 1 <= r_a <= r_b <= rank_bound:
        raise ValueError(
            f"band must satisfy 1 <= r_a <= r_b <= {rank_bound}, got [{r_a}, {r_b}]"
        )
    u, _, vh = np.linalg.svd(frame.data, full_matrices=False)
    u_band = u[:, r_a - 1:r_b]
    v_band = vh.conj().T[:, r_a - 1:r_b]
    proj_u = u_band @ u_band.conj().T
    proj_v = v_band @ v_band.conj().T
    return RawFrame(
        first_order=proj_u @ frame.first_order @ proj_v,
        higher_order=proj_u @ frame.higher_order @ proj_v,
        noise=proj_u @ frame.noise @ proj_v,
        power_w=frame.power_w,
        seed=frame.seed,
    )


def stft_cube(data: np.ndarray, cp: ChirpParams) -> np.ndarray:
    """Sliding-window DFT over slow time for every fast-time row.

    Returns a complex cube of shape (n_fast, W, n_frames); frame m covers
    slow-time columns [m*(W-Q), m*(W-Q)+W).
    """
    if data.shape != (cp.n_fast, cp.M):
        raise ValueError(f"expected frame shape {(cp.n_fast, cp.M)}, got {data.shape}")
    hop = cp.W - cp.Q
    w = cp.window_values()
    segments = np.stack(
        [data[:, m * hop:m * hop + cp.W] for m in range(cp.n_frames)], axis=2
    )  # (n_fast, W, n_frames)
    windowed = segments * w[None, :, None]
    return np.fft.fft(windowed, axis=1)


def integrated_spectrogram(frame: RawFrame | np.ndarray, cp: ChirpParams) -> Spectrogram:
    """Range-integrated spectrogram of a frame (squared magnitude).

    The STFT cube is summed over the range (fast-time) axis coherently by
    default, matching the linear decomposition of the signal into scattering
    orders; set coherent_range_sum=False for non-coherent magnitude summing.
    """
    if isinstance(frame, RawFrame):
        data, power_w, seed = frame.data, frame.power_w, frame.seed
    else:
        data, power_w, seed = np.asarray(frame, dtype=complex), math.nan, None
    cube = stft_cube(data, cp)
    if cp.coherent_range_sum:
        integrated = np.abs(cube.sum(axis=0))
    else:
        integrated = np.abs(cube).sum(axis=0)
    return Spectrogram(values=integrated ** 2, power_w=power_w, seed=seed)


def _window_stats(x: np.ndarray, wh: int, ww: int) -> tuple[np.ndarray, np.ndarray]:
    views = np.lib.stride_tricks.sliding_window_view(x, (wh, ww))
    mean = views.mean(axis=(-2, -1))
    sq_mean = (views * views).mean(axis=(-2, -1))
    return mean, sq_mean


def ssim(a: Spectrogram | np.ndarray, b: Spectrogram | np.ndarray, win: int = 8) -> float:
    """Mean local structural similarity between two spectrograms.

    Both images are normalized to [0, 1] by their shared maximum; sliding
    windows are win x win, clamped to the image when a dimension is smaller
    (the default chirp geometry yields only a couple of temporal frames).
    Stabilizers follow the conventional (0.01*L)^2 and (0.03*L)^2 with L = 1
    after normalization.
    """
    x = a.values if isinstance(a, Spectrogram) else np.asarray(a, dtype=float)
    y = b.values if isinstance(b, Spectrogram) else np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    shared_max = max(float(x.max()), float(y.max()))
    if shared_max == 0.0:
        return 1.0  # two identically-zero images
    x = x / shared_max
    y = y / shared_max

    wh = min(win, x.shape[0])
    ww = min(win, x.shape[1])
    mu_x, sq_x = _window_stats(x, wh, ww)
    mu_y, sq_y = _window_stats(y, wh, ww)
    views_xy = (
        np.lib.stride_tricks.sliding_window_view(x, (wh, ww))
        * np.lib.stride_tricks.sliding_window_view(y, (wh, ww))
    )
    mu_xy = views_xy.mean(axis=(-2, -1))

    var_x = sq_x - mu_x * mu_x
    var_y = sq_y - mu_y * mu_y
    cov = mu_xy - mu_x * mu_y

    c1 = (0.01) ** 2
    c2 = (0.03) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def _pipeline_spectrogram(frame: RawFrame, cp: ChirpParams) -> Spectrogram:
    return integrated_spectrogram(svd_band_filter(frame, cp.r_a, cp.r_b), cp)


def quality_vs_power(
    prims: Sequence[Primitive],
    cp: ChirpParams,
    powers: Sequence[float],
    clutter_psd: float,
    trials: int,
    seed: int,
    epsilon: float = 0.02,
) -> QualityCurve:
    """Mean SSIM against the clean first-order reference at each power.

    The reference at power p is the noise-free, first-order-only frame pushed
    through the same SVD + spectrogram pipeline.  The reported threshold is
    the smallest power whose mean SSIM reaches (1 - epsilon) times the value
    at the highest swept power.
    """
    powers = [float(p) for p in powers]
    if len(powers) < 1:
        raise ValueError("need at least one power")
    if any(q <= p for p, q in zip(powers, powers[1:])):
        raise ValueError("powers must be strictly increasing")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials!r}")

    means: list[float] = []
    stds: list[float] = []
    for i, p in enumerate(powers):
        clean = synthesize_frame(prims, cp, p, clutter_psd=0.0, seed=None)
        ref = _pipeline_spectrogram(clean.first_order_only(), cp)
        scores = np.empty(trials)
        for trial in range(trials):
            frame = synthesize_frame(prims, cp, p, clutter_psd, seed=[seed, i, trial])
            scores[trial] = ssim(_pipeline_spectrogram(frame, cp), ref)
        means.append(float(scores.mean()))
        stds.append(float(scores.std()))

    saturation = means[-1]
    threshold = powers[-1]
    for p, m in zip(powers, means):
        if m >= (1.0 - epsilon) * saturation:
            threshold = p
            break

    return QualityCurve(
        powers_w=tuple(powers),
        ssim_mean=tuple(means),
        ssim_std=tuple(stds),
        threshold_w=threshold,
        saturation_ssim=saturation,
        epsilon=epsilon,
    )


def default_scene() -> list[Primitive]:
    """Torso-plus-limbs point scene whose micro-Doppler tracks span the STFT
    band at the default chirp timing, with weak higher-order ghosts."""
    return [
        Primitive(rcs_gain=1.0, r0=3.0, v=0.6, a=0.004, f_m=700.0, order="first"),
        Primitive(rcs_gain=0.5, r0=3.1, v=0.6, a=0.009, f_m=1150.0, order="first"),
        Primitive(rcs_gain=0.4, r0=2.9, v=0.6, a=0.007, f_m=900.0, order="first"),
        Primitive(rcs_gain=0.7, r0=4.2, v=0.3, a=0.010, f_m=950.0, order="higher"),
        Primitive(rcs_gain=0.5, r0=4.8, v=0.2, a=0.006, f_m=1250.0, order="higher"),
    ]


def save_spectrogram(spec: Spectrogram, path: str | Path) -> None:
    """Portable dump: one JSON header line, then row-major float64 bytes."""
    path = Path(path)
    header = {
        "shape": list(spec.values.shape),
        "dtype": "float64",
        "order": "C",
        "power_w": None if math.isnan(spec.power_w) else spec.power_w,
        "seed": spec.seed,
    }
    payload = np.ascontiguousarray(spec.values, dtype=np.float64).tobytes()
    with open(path, "wb") as fh:
        fh.write(json.dumps(header).encode("utf-8") + b"\n")
        fh.write(payload)


def load_spectrogram(path: str | Path) -> Spectrogram:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("utf-8"))
        values = np.frombuffer(fh.read(), dtype=np.float64).reshape(header["shape"]).copy()
    power = header.get("power_w")
    return Spectrogram(
        values=values,
        power_w=math.nan if power is None else float(power),
        seed=header.get("seed"),
    )
