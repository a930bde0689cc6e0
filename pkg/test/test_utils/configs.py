import copy
import pathlib
import typing

CONFIG_DIR = pathlib.Path(__file__).parents[2] / "configs"
SMALL_SAMPLE_RATE_HZ = 200_000.0

_SMALL_BENCH: dict[str, typing.Any] = {
    "description": "10 kHz test mode",
    "environment": {"bath_temperature_k": 300.0},
    "modes": [{"label": "mode1", "mass_kg": 1e-12, "resonance_hz": 10_000.0, "damping_hz": 50.0}],
    "inloop_probe": {"snr": 100.0},
    "outloop_probe": {"snr": 100.0},
    "feedback": {"gain": 0.0, "delay_periods": 0.25},
    "simulation": {"sample_rate_hz": SMALL_SAMPLE_RATE_HZ, "duration_s": 4.0, "seed": 11},
    "analysis": {"segment_length": 32768, "overlap_fraction": 0.5, "seeds_per_gain": 4},
    "sweep": {"gains": [0.0, 8.0, 20.0], "voltages_vrms": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0]},
}


def small_bench_config(
    *,
    duration_s: typing.Optional[float] = None,
    seeds_per_gain: typing.Optional[int] = None,
    force_per_volt: typing.Optional[float] = None,
) -> dict[str, typing.Any]:
    """
    JSON document of a single 10 kHz mode sampled at 200 kHz (quarter period of 5 samples).
    With force_per_volt a resonant drive block is added.
    """
    document = copy.deepcopy(_SMALL_BENCH)
    if duration_s is not None:
        document["simulation"]["duration_s"] = duration_s
    if seeds_per_gain is not None:
        document["analysis"]["seeds_per_gain"] = seeds_per_gain
    if force_per_volt is not None:
        document["drive"] = {"force_per_volt_n_per_v": force_per_volt}
    return document


def tiny_bench_config() -> dict[str, typing.Any]:
    """A 0.2 s record with short segments and one replicate: enough to exercise sweeps quickly."""
    document = small_bench_config(duration_s=0.2, seeds_per_gain=1)
    document["analysis"]["segment_length"] = 8192
    return document
