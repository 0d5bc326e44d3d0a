import json
import math

import pytest

from powersat.ir import parse_design
from powersat.stimulus import (
    SplitMix64,
    StimulusConfig,
    StimulusError,
    Waveform,
    convergence_tolerance,
    fnv1a64,
    generate_stimuli,
)

DESIGN = parse_design("""
(module m (input a 8) (input b 1)
  (output y (and a (rep8 b))))
""")


def cfg(cycles=64, seed=1, **ports):
    inputs = {p: spec for p, spec in ports.items()}
    return StimulusConfig.from_dict({"cycles": cycles, "seed": seed, "inputs": inputs})


def word_toggles(w: Waveform) -> float:
    total = 0
    for bit in range(w.width):
        total += sum(
            ((w.values[i] >> bit) ^ (w.values[i + 1] >> bit)) & 1
            for i in range(w.cycles - 1)
        )
    return total / (w.width * (w.cycles - 1))


# reference vectors for the fixed generator primitives
def test_fnv1a64_known_values():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C


def test_splitmix64_known_sequence():
    s = SplitMix64(0)
    assert [s.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF,
        0x6E789E6AA1B965F4,
        0x06C45D188009454F,
    ]
    assert SplitMix64(1234567).next_u64() == 0x599ED017FB08FC85


def test_zero_toggle_rate_freezes():
    waves = generate_stimuli(
        cfg(a={"toggle_rate": 0.0}, b={"toggle_rate": 0.0}), DESIGN
    )
    for w in waves.values():
        assert len(set(w.values)) == 1
        assert word_toggles(w) == 0.0


def test_full_toggle_rate_alternates():
    waves = generate_stimuli(cfg(a={"toggle_rate": 1.0}, b={"toggle_rate": 1.0}), DESIGN)
    a = waves["a"]
    assert word_toggles(a) == 1.0
    assert all(a.values[i] ^ a.values[i + 1] == 0xFF for i in range(a.cycles - 1))


def test_rate_converges_at_scale():
    c = cfg(cycles=10_000, a={"toggle_rate": 0.1}, b={"toggle_rate": 0.5})
    measured = word_toggles(generate_stimuli(c, DESIGN)["a"])
    assert abs(measured - 0.1) <= 0.02


def test_initial_static_probability_extremes():
    ones = generate_stimuli(
        cfg(a={"toggle_rate": 0.0, "initial_static_probability": 1.0},
            b={"toggle_rate": 0.0, "initial_static_probability": 1.0}),
        DESIGN,
    )
    assert ones["a"].values[0] == 0xFF and ones["b"].values[0] == 1
    zeros = generate_stimuli(
        cfg(a={"toggle_rate": 0.0, "initial_static_probability": 0.0},
            b={"toggle_rate": 0.0, "initial_static_probability": 0.0}),
        DESIGN,
    )
    assert zeros["a"].values[0] == 0 and zeros["b"].values[0] == 0


def test_generation_is_deterministic():
    c = cfg(a={"toggle_rate": 0.3}, b={"toggle_rate": 0.7})
    assert generate_stimuli(c, DESIGN) == generate_stimuli(c, DESIGN)


def test_ports_are_independent():
    base = generate_stimuli(cfg(a={"toggle_rate": 0.3}, b={"toggle_rate": 0.7}), DESIGN)
    renamed = parse_design("""
    (module m (input a 8) (input zz 1)
      (output y (and a (rep8 zz))))
    """)
    other = generate_stimuli(
        cfg(a={"toggle_rate": 0.3}, zz={"toggle_rate": 0.7}), renamed
    )
    assert base["a"] == other["a"]


def test_explicit_vectors_pass_through():
    c = cfg(cycles=3, a={"vectors": [1, 2, 3]}, b={"vectors": ["0x1", 0, 1]})
    waves = generate_stimuli(c, DESIGN)
    assert waves["a"].values == [1, 2, 3]
    assert waves["b"].values == [1, 0, 1]


def test_vector_length_must_match_cycles():
    with pytest.raises(StimulusError, match="3 vectors for 4 cycles"):
        generate_stimuli(cfg(cycles=4, a={"vectors": [1, 2, 3]}, b={"vectors": [0] * 4}), DESIGN)


def test_vector_value_must_fit_width():
    with pytest.raises(StimulusError):
        generate_stimuli(cfg(cycles=1, a={"vectors": [0]}, b={"vectors": [2]}), DESIGN)


def test_missing_port_names_the_port():
    with pytest.raises(StimulusError, match="'b'"):
        generate_stimuli(cfg(a={"toggle_rate": 0.5}), DESIGN)


def test_bad_rates_rejected():
    with pytest.raises(StimulusError):
        cfg(a={"toggle_rate": 1.5}, b={"toggle_rate": 0.5})
    with pytest.raises(StimulusError):
        StimulusConfig.from_dict({"cycles": 0, "seed": 1, "inputs": {}})


def test_config_json_roundtrip():
    c = cfg(cycles=5, a={"toggle_rate": 0.25}, b={"vectors": [1, 0, 1, 1, 0]})
    again = StimulusConfig.from_json(c.to_json())
    assert again == c
    assert json.loads(c.to_json())["inputs"]["b"]["vectors"] == ["0x1", "0x0", "0x1", "0x1", "0x0"]


def test_from_waveforms_is_replayable():
    c = cfg(a={"toggle_rate": 0.4}, b={"toggle_rate": 0.9})
    waves = generate_stimuli(c, DESIGN)
    frozen = StimulusConfig.from_waveforms(waves, seed=c.seed)
    assert generate_stimuli(frozen, DESIGN) == waves


def test_convergence_tolerance():
    assert convergence_tolerance(10_000) == pytest.approx(2 / math.sqrt(10_000))


def test_waveform_prefix_and_bounds():
    w = Waveform(2, [0, 1, 2, 3])
    assert w.prefix(2).values == [0, 1]
    with pytest.raises(StimulusError):
        Waveform(2, [4])
