"""Reproducible input stimuli: per-bit toggle streams from a counter-based PRNG."""

import json
from dataclasses import dataclass, field

from .ir import Design

_M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_TWO64 = float(1 << 64)


class StimulusError(Exception):
    pass


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _M64
    return h


class SplitMix64:
    """The splitmix64 counter generator; bit-exact across platforms."""

    def __init__(self, seed: int):
        self.state = seed & _M64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _M64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
        return z ^ (z >> 31)

    def unit(self) -> float:
        return self.next_u64() / _TWO64


@dataclass
class Waveform:
    """A cycle-indexed stream of unsigned words of one width."""

    width: int
    values: list[int]

    def __post_init__(self):
        mask = (1 << self.width) - 1
        for v in self.values:
            if not 0 <= v <= mask:
                raise StimulusError(f"value {v} does not fit in {self.width} bits")

    @property
    def cycles(self) -> int:
        return len(self.values)

    def prefix(self, cycles: int) -> "Waveform":
        return Waveform(self.width, self.values[:cycles])


@dataclass
class PortSpec:
    """Random per-bit behavior, or an explicit vector stream."""

    toggle_rate: float = 0.5
    initial_static_probability: float = 0.5
    vectors: list[int] | None = None

    def __post_init__(self):
        if self.vectors is None:
            if not 0.0 <= self.toggle_rate <= 1.0:
                raise StimulusError(f"toggle_rate {self.toggle_rate} outside [0, 1]")
            if not 0.0 <= self.initial_static_probability <= 1.0:
                raise StimulusError("initial_static_probability outside [0, 1]")


@dataclass
class StimulusConfig:
    cycles: int
    seed: int
    inputs: dict[str, PortSpec] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, raw: dict) -> "StimulusConfig":
        try:
            cycles = int(raw["cycles"])
            seed = int(raw["seed"])
        except (KeyError, TypeError, ValueError) as e:
            raise StimulusError(f"bad stimuli config: {e}") from None
        if cycles < 1:
            raise StimulusError("cycles must be >= 1")
        inputs = {}
        for port, spec in raw.get("inputs", {}).items():
            if not isinstance(spec, dict):
                raise StimulusError(f"port {port!r}: spec must be an object")
            if "vectors" in spec:
                vectors = [int(v, 0) if isinstance(v, str) else int(v) for v in spec["vectors"]]
                inputs[port] = PortSpec(vectors=vectors)
            else:
                inputs[port] = PortSpec(
                    toggle_rate=float(spec.get("toggle_rate", 0.5)),
                    initial_static_probability=float(spec.get("initial_static_probability", 0.5)),
                )
        return cls(cycles, seed, inputs)

    @classmethod
    def from_json(cls, text: str) -> "StimulusConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise StimulusError(f"stimuli config is not valid JSON: {e}") from None
        return cls.from_dict(raw)

    @classmethod
    def from_path(cls, path) -> "StimulusConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        inputs = {}
        for port, spec in self.inputs.items():
            if spec.vectors is not None:
                inputs[port] = {"vectors": [hex(v) for v in spec.vectors]}
            else:
                inputs[port] = {
                    "toggle_rate": spec.toggle_rate,
                    "initial_static_probability": spec.initial_static_probability,
                }
        return {"cycles": self.cycles, "seed": self.seed, "inputs": inputs}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_waveforms(cls, waves: dict[str, Waveform], seed: int = 0) -> "StimulusConfig":
        """Freeze concrete waveforms into a replayable explicit-vector config."""
        cycles = min(w.cycles for w in waves.values())
        inputs = {p: PortSpec(vectors=list(w.values[:cycles])) for p, w in waves.items()}
        return cls(cycles, seed, inputs)


def _bit_stream(seed: int, port: str, bit: int, spec: PortSpec, cycles: int) -> list[int]:
    stream_seed = seed ^ fnv1a64(port.encode("utf-8")) ^ ((bit * _GOLDEN) & _M64)
    gen = SplitMix64(stream_seed)
    bits = []
    value = 1 if gen.unit() < spec.initial_static_probability else 0
    bits.append(value)
    for _ in range(1, cycles):
        if gen.unit() < spec.toggle_rate:
            value ^= 1
        bits.append(value)
    return bits


def generate_stimuli(cfg: StimulusConfig, design: Design) -> dict[str, Waveform]:
    """One waveform per design input. Port streams are independent: each
    (port, bit) pair owns a dedicated generator, so adding or renaming one
    port never disturbs another's stream."""
    waves: dict[str, Waveform] = {}
    for port, width in design.inputs:
        spec = cfg.inputs.get(port)
        if spec is None:
            raise StimulusError(f"no stimuli entry for input port {port!r}")
        if spec.vectors is not None:
            if len(spec.vectors) != cfg.cycles:
                raise StimulusError(
                    f"port {port!r}: {len(spec.vectors)} vectors for {cfg.cycles} cycles"
                )
            for v in spec.vectors:
                if not 0 <= v < (1 << width):
                    raise StimulusError(f"port {port!r}: vector {v:#x} exceeds {width} bits")
            waves[port] = Waveform(width, list(spec.vectors))
            continue
        columns = [_bit_stream(cfg.seed, port, b, spec, cfg.cycles) for b in range(width)]
        values = [
            sum(columns[b][i] << b for b in range(width))
            for i in range(cfg.cycles)
        ]
        waves[port] = Waveform(width, values)
    return waves


def convergence_tolerance(cycles: int) -> float:
    """Sampling tolerance for comparing a measured rate against its target."""
    return 2.0 / (cycles ** 0.5)
