"""Emulated prosthesis sensors.

Time is kept in integer microseconds so sample instants and delays are exact.
The insole samples the true ground wrench at its own rate, corrupts it
(calibration gain, repeatability noise, hysteresis), smooths it with a
causal Gaussian FIR and a moving average, and delivers it after a fixed
delay. The load cell is read once per control tick; the IMU samples socket
pitch and rate at its own rate and is held between samples.
"""

import logging
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from core.config import ImuConfig, InsoleConfig, LoadCellConfig, SensorsConfig
from core.types import ImuReading, SensedForces

logger = logging.getLogger(__name__)


def sample_instant(k: int, rate_hz: float) -> int:
    return round(k * 1e6 / rate_hz)


def gaussian_taps(sigma: float, taps: int) -> np.ndarray:
    """Causal half-Gaussian weights, newest sample first."""
    if sigma <= 0.0 or taps <= 1:
        return np.ones(1)
    w = np.exp(-0.5 * (np.arange(taps) / sigma) ** 2)
    return w / w.sum()


def moving_average_gain(frequency: float, rate_hz: float, window: int) -> float:
    """Magnitude response of a ``window``-sample moving average."""
    x = math.pi * frequency / rate_hz
    if math.isclose(math.sin(x), 0.0):
        return 1.0
    return abs(math.sin(window * x) / (window * math.sin(x)))


class DelayLine:
    def __init__(self, delay_us: int):
        if delay_us < 0:
            raise ValueError("delay must be >= 0")
        self.delay_us = delay_us
        self._queue: deque[tuple[int, np.ndarray]] = deque()
        self._current: np.ndarray | None = None

    def push(self, t_us: int, value: np.ndarray) -> None:
        self._queue.append((t_us + self.delay_us, np.asarray(value, dtype=float)))

    def read(self, t_us: int) -> np.ndarray | None:
        while self._queue and self._queue[0][0] <= t_us:
            self._current = self._queue.popleft()[1]
        return self._current


@dataclass
class TrueSignals:
    ground: np.ndarray  # (Fx, Fz, My) on the prosthesis foot
    socket: np.ndarray  # F_f, world
    pitch: float
    pitch_rate: float


class Insole:
    CHANNELS = 2  # F_gz, M_gy

    def __init__(self, cfg: InsoleConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.gain = 1.0 + (rng.uniform(-cfg.accuracy, cfg.accuracy, self.CHANNELS) if cfg.noise else np.zeros(2))
        self.weights = gaussian_taps(cfg.gaussian_sigma, cfg.gaussian_taps)
        self._raw: deque[np.ndarray] = deque(maxlen=len(self.weights))
        self._smooth: deque[np.ndarray] = deque(maxlen=max(1, cfg.moving_average))
        self._last_true = np.zeros(self.CHANNELS)
        self.delay = DelayLine(round(cfg.delay_ms * 1000))
        self._k = 0

    def _corrupt(self, value: np.ndarray) -> np.ndarray:
        if not self.cfg.noise:
            return value
        unloading = np.abs(value) < np.abs(self._last_true)
        hysteresis = np.where(unloading, -0.5, 0.5) * self.cfg.hysteresis
        repeat = self.rng.normal(0.0, self.cfg.repeatability / 3.0, self.CHANNELS)
        return value * (self.gain + hysteresis + repeat)

    def observe(self, t_us: int, ground: np.ndarray) -> None:
        while sample_instant(self._k, self.cfg.rate_hz) <= t_us:
            true = np.array([ground[1], ground[2]])
            self._raw.appendleft(self._corrupt(true))
            self._last_true = true
            raw = np.array(self._raw)
            w = self.weights[: len(raw)]
            self._smooth.append(w @ raw / w.sum())
            self.delay.push(sample_instant(self._k, self.cfg.rate_hz), np.mean(self._smooth, axis=0))
            self._k += 1

    def read(self, t_us: int) -> np.ndarray | None:
        return self.delay.read(t_us)


class LoadCell:
    def __init__(self, cfg: LoadCellConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.limits = np.array([cfg.range_fx, cfg.range_fz, cfg.range_my])

    def read(self, socket: np.ndarray) -> tuple[np.ndarray, bool]:
        value = np.asarray(socket, dtype=float).copy()
        if self.cfg.noise:
            sigma = np.array([self.cfg.noise_force, self.cfg.noise_force, self.cfg.noise_moment])
            value += self.rng.normal(0.0, 1.0, 3) * sigma
        saturated = bool(np.any(np.abs(value) > self.limits))
        if saturated:
            logger.debug("load cell saturated: %s", np.array2string(value, precision=1))
        return np.clip(value, -self.limits, self.limits), saturated


class Imu:
    def __init__(self, cfg: ImuConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self._k = 0
        self.reading = ImuReading()

    def observe(self, t_us: int, pitch: float, pitch_rate: float) -> None:
        while sample_instant(self._k, self.cfg.rate_hz) <= t_us:
            sample, sample_rate = pitch, pitch_rate
            if self.cfg.noise:
                sample += self.rng.normal(0.0, self.cfg.noise_pitch)
                sample_rate += self.rng.normal(0.0, self.cfg.noise_rate)
            self.reading = ImuReading(pitch=float(sample), pitch_rate=float(sample_rate))
            self._k += 1


class SensorSuite:
    def __init__(self, cfg: SensorsConfig, rng: np.random.Generator):
        self.insole = Insole(cfg.insole, rng)
        self.load_cell = LoadCell(cfg.load_cell, rng)
        self.imu = Imu(cfg.imu, rng)

    def observe(self, t_us: int, truth: TrueSignals) -> None:
        """Feed the true signals at a physics step; sensors sample at their own instants."""
        self.insole.observe(t_us, truth.ground)
        self.imu.observe(t_us, truth.pitch, truth.pitch_rate)


def sample_sensors(suite: SensorSuite, t_us: int, truth: TrueSignals) -> tuple[SensedForces, ImuReading]:
    """What the controller sees at a control tick at ``t_us``."""
    suite.observe(t_us, truth)
    F_f, saturated = suite.load_cell.read(truth.socket)
    insole = suite.insole.read(t_us)
    valid = insole is not None
    F_gz, M_gy = (float(insole[0]), float(insole[1])) if valid else (0.0, 0.0)
    sensed = SensedForces(
        F_f=F_f,
        F_gz=F_gz,
        M_gy=M_gy,
        F_gz_valid=valid,
        M_gy_valid=valid,
        saturated=saturated,
    )
    return sensed, suite.imu.reading
