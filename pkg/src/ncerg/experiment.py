"""Config-driven experiment bundles.

A config is a JSON object (``"version": 1``) with the sections below.
Unknown keys are rejected everywhere.

``algebra``
    ``{"blocks": [{"dim": d, "weight": t}, ...]}``
``operator``
    Any recipe accepted by :func:`ncerg.ds.operator_from_json`, or
    ``{"kind": "random_mixed_unitary", "n_terms": m}`` drawn from the seed.
``sequence``, ``weights``
    Optional; default to ``{"kind": "full"}`` and ``{"kind": "constant"}``.
``input``
    ``{"seed": int, "norm_target": r, "p": p}``; ``x`` is a Ginibre draw
    rescaled to ``||x||_p = r`` (``p`` may be ``"inf"``). The seed is required.
``horizon``
    ``N``, the last average computed.
``probe``
    ``{"eps", "delta", "p", "mode", "samples", "grid_base"}``. ``eps``/``delta``
    feed the witness report; ``samples > 0`` also runs the b.u.e.m. probe.
``outputs``
    ``{"directory": path, "stride": "geometric" | int}``.

:func:`run_experiment` writes ``manifest.json``, ``averages.csv`` and
``report.json``. Files are written with sorted keys and no timestamps, so
the same config and seed give byte-identical output.
"""

import copy
import csv
import json
import logging
import math
from pathlib import Path

import numpy as np

from . import __version__
from .algebra import AlgebraSpec, ginibre, schatten_norm
from .averages import AverageStream, averages_at, theorem31_gap, transfer_identity_check
from .convergence import MODES, au_report, buem_probe
from .ds import MixedUnitary, fixed_space_projector, operator_from_json
from .linalg import EigensolverError
from .sequences import ComplementOfSparse, Full, evens, example_blocks, sequence_from_json
from .weights import ExplicitWeights, weights_from_json

log = logging.getLogger("ncerg")

CONFIG_VERSION = 1
_TOP_KEYS = {"version", "algebra", "operator", "sequence", "weights", "input", "horizon", "probe", "outputs"}
_INPUT_KEYS = {"seed", "norm_target", "p"}
_PROBE_KEYS = {"eps", "delta", "p", "mode", "samples", "grid_base", "horizon"}
_OUTPUT_KEYS = {"directory", "stride"}

PROBE_DEFAULTS = {"eps": None, "delta": 1e-2, "p": 1.0, "mode": "bilateral", "samples": 0, "grid_base": 16, "horizon": 64}


class ConfigError(ValueError):
    """Invalid experiment config; ``problems`` lists every failing field."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))


class ExperimentRuntimeError(RuntimeError):
    pass


def _parse_p(p):
    if p in ("inf", "Infinity", None):
        return math.inf
    p = float(p)
    if not p >= 1:
        raise ValueError(f"p must be >= 1 or 'inf', got {p}")
    return p


class ExperimentConfig:
    """Validated config. ``raw`` keeps the resolved JSON form (defaults filled in)."""

    def __init__(self, raw):
        self.raw = raw
        problems = []

        def section(name, fn):
            try:
                return fn()
            except ConfigError as exc:
                problems.extend(exc.problems)
            except (ValueError, TypeError, KeyError) as exc:
                problems.append(f"{name}: {exc}")
            return None

        if not isinstance(raw, dict):
            raise ConfigError(["config must be a JSON object"])
        extra = set(raw) - _TOP_KEYS
        if extra:
            problems.append(f"unknown top-level fields {sorted(extra)}")
        if raw.get("version") != CONFIG_VERSION:
            problems.append(f"version: expected {CONFIG_VERSION}, got {raw.get('version')!r}")

        self.algebra = section("algebra", lambda: AlgebraSpec.from_json(raw["algebra"]))
        self.sequence = section("sequence", lambda: sequence_from_json(raw.get("sequence", {"kind": "full"})))
        self.weights = section("weights", lambda: weights_from_json(raw.get("weights", {"kind": "constant"})))
        self.input = section("input", lambda: self._input(raw.get("input")))
        self.horizon = section("horizon", lambda: self._horizon(raw.get("horizon")))
        self.probe = section("probe", lambda: self._probe(raw.get("probe", {})))
        self.outputs = section("outputs", lambda: self._outputs(raw.get("outputs", {})))
        self.operator = None
        if self.algebra is not None and self.input is not None:
            rng = np.random.default_rng(self.input["seed"])
            self.operator = section("operator", lambda: build_operator(raw["operator"], self.algebra, rng))
            self._rng = rng
        if problems:
            raise ConfigError(problems)
        if self.probe["eps"] is None:
            self.probe["eps"] = 0.1 * self.algebra.trace_of_identity

    @staticmethod
    def _input(obj):
        if not isinstance(obj, dict) or "seed" not in obj:
            raise ValueError("seed is mandatory")
        extra = set(obj) - _INPUT_KEYS
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        seed = obj["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
        norm = float(obj.get("norm_target", 1.0))
        if not norm > 0:
            raise ValueError("norm_target must be positive")
        return {"seed": seed, "norm_target": norm, "p": _parse_p(obj.get("p", "inf"))}

    @staticmethod
    def _horizon(n):
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ValueError(f"must be a positive integer, got {n!r}")
        return n

    @staticmethod
    def _probe(obj):
        extra = set(obj) - _PROBE_KEYS
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        out = dict(PROBE_DEFAULTS)
        out.update(obj)
        if out["mode"] not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if out["eps"] is not None and not out["eps"] > 0:
            raise ValueError("eps must be positive")
        if not out["delta"] > 0:
            raise ValueError("delta must be positive")
        out["p"] = _parse_p(out["p"])
        return out

    @staticmethod
    def _outputs(obj):
        extra = set(obj) - _OUTPUT_KEYS
        if extra:
            raise ValueError(f"unknown fields {sorted(extra)}")
        stride = obj.get("stride", "geometric")
        if stride != "geometric" and not (isinstance(stride, int) and stride >= 1):
            raise ValueError(f"stride must be 'geometric' or a positive integer, got {stride!r}")
        return {"directory": obj.get("directory"), "stride": stride}

    def draw_input(self):
        """The input ``x``; drawn after the operator from the same seeded stream."""
        x = ginibre(self.algebra, self._rng)
        return x * (self.input["norm_target"] / schatten_norm(x, self.input["p"]))


def build_operator(obj, algebra, rng, allow_hooks=False):
    """Recipe JSON plus the config-only ``random_mixed_unitary`` kind."""
    if obj.get("kind") == "random_mixed_unitary":
        extra = set(obj) - {"kind", "n_terms"}
        if extra:
            raise ValueError(f"operator kind 'random_mixed_unitary': unknown fields {sorted(extra)}")
        return MixedUnitary.random(algebra, int(obj.get("n_terms", 3)), rng)
    return operator_from_json(obj, algebra, allow_hooks=allow_hooks)


def load_config(path):
    """Read a config, or the ``config`` section of a ``manifest.json``."""
    with open(path) as fh:
        raw = json.load(fh)
    if isinstance(raw, dict) and "config" in raw and "library" in raw:
        raw = raw["config"]
    return raw


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("inf" if v > 0 else "-inf" if v < 0 else "nan")
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_json(obj):
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def _resolved(cfg, seed, directory):
    raw = copy.deepcopy(cfg.raw)
    raw.setdefault("sequence", {"kind": "full"})
    raw.setdefault("weights", {"kind": "constant"})
    raw["input"] = dict(raw["input"], seed=seed)
    raw["input"].setdefault("norm_target", 1.0)
    raw["input"].setdefault("p", "inf")
    probe = dict(cfg.probe)
    probe["p"] = "inf" if math.isinf(probe["p"]) else probe["p"]
    raw["probe"] = probe
    raw["outputs"] = {"directory": str(directory), "stride": cfg.outputs["stride"]}
    return raw


def run_experiment(config, out_dir=None, seed=None):
    """Run a config (dict or :class:`ExperimentConfig`) and write the bundle.

    ``out_dir`` and ``seed`` override ``outputs.directory`` and ``input.seed``.
    Returns the report dict.
    """
    raw = config.raw if isinstance(config, ExperimentConfig) else config
    if seed is not None:
        raw = copy.deepcopy(raw)
        raw.setdefault("input", {})["seed"] = int(seed)
    cfg = ExperimentConfig(raw)
    directory = out_dir if out_dir is not None else cfg.outputs["directory"]
    if directory is None:
        raise ConfigError(["outputs.directory: no output directory given"])
    directory = Path(directory)
    try:
        report, rows = _compute(cfg)
    except EigensolverError as exc:
        raise ExperimentRuntimeError(f"eigensolver failed during the experiment: {exc}") from exc

    directory.mkdir(parents=True, exist_ok=True)
    manifest = {
        "library": {"name": "ncerg", "version": __version__},
        "config": _resolved(cfg, cfg.input["seed"], directory),
    }
    (directory / "manifest.json").write_text(dump_json(manifest))
    (directory / "report.json").write_text(dump_json(report))
    with open(directory / "averages.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "residual"])
        for n, r in rows:
            w.writerow([n, repr(float(r))])
    log.info("wrote bundle to %s", directory)
    return report


def _compute(cfg):
    op, seq, beta, N = cfg.operator, cfg.sequence, cfg.weights, cfg.horizon
    x = cfg.draw_input()
    x_norm = schatten_norm(x, np.inf)
    log.info("computing fixed-space projector")
    x_hat = fixed_space_projector(op)(x)
    seq_arg = None if isinstance(seq, Full) else seq

    rows = []
    terminal = None
    for n, m in AverageStream(op, x, beta, seq_arg, N, stride=cfg.outputs["stride"]):
        rows.append((n, schatten_norm(m - x_hat, np.inf)))
        terminal = m
    log.info("averages done, terminal residual %.3e", rows[-1][1])

    probe = cfg.probe
    conv = au_report(
        op, x, probe["eps"], N, x_hat=x_hat, mode=probe["mode"], weights=beta, sequence=seq_arg,
        delta=probe["delta"], grid_base=probe["grid_base"],
    )
    report = {
        "x_norm_inf": x_norm,
        "terminal_residual": rows[-1][1],
        "convergence": conv.to_json(),
    }
    if seq_arg is not None:
        full = averages_at(op, x, [N], beta)[N]
        k_last = int(seq.prefix(N)[-1])
        report["shared_limit"] = {
            "residual": schatten_norm(terminal - full, np.inf),
            "k_last": k_last,
            "bound": 2 * math.sqrt(max(k_last, 1)) / max(k_last, 1) * x_norm + 1e-2 * x_norm,
        }
    if probe["samples"] > 0:
        log.info("running b.u.e.m. probe with %d samples", probe["samples"])
        res = buem_probe(
            op, beta, seq_arg, p=probe["p"], eps=probe["eps"], delta=probe["delta"],
            sample_count=probe["samples"], horizon=probe["horizon"], seed=cfg.input["seed"], mode=probe["mode"],
        )
        report["buem"] = res.to_json()
    return report, rows


def probe_from_config(raw, sample_count=None):
    """Run only the b.u.e.m. probe of a config (default 100 samples)."""
    cfg = ExperimentConfig(raw)
    probe = cfg.probe
    samples = sample_count or probe["samples"] or 100
    seq = None if isinstance(cfg.sequence, Full) else cfg.sequence
    return buem_probe(
        cfg.operator, cfg.weights, seq, p=probe["p"], eps=probe["eps"], delta=probe["delta"],
        sample_count=samples, horizon=probe["horizon"], seed=cfg.input["seed"], mode=probe["mode"],
    )


# --- randomized identity sweeps -----------------------------------------------------


IDENTITY_SEQUENCES = {
    "evens": evens,
    "blocks": example_blocks,
    "complement": lambda: ComplementOfSparse("squares"),
}


def random_identity_instance(rng, max_dim=8, max_n=200):
    """A random ``(op, beta, k, x, n, label)`` for the transfer identities."""
    n_blocks = int(rng.integers(1, 4))
    blocks = [{"dim": int(rng.integers(1, max_dim + 1)), "weight": float(rng.uniform(0.5, 2.0))}
              for _ in range(n_blocks)]
    alg = AlgebraSpec.from_json({"blocks": blocks})
    op = MixedUnitary.random(alg, int(rng.integers(1, 5)), rng)
    label = str(rng.choice(sorted(IDENTITY_SEQUENCES)))
    seq = IDENTITY_SEQUENCES[label]()
    n = int(rng.integers(1, max_n + 1))
    length = int(seq.prefix(n + 1)[-1]) + 2
    mags = rng.uniform(0.0, 2.0, length)
    beta = ExplicitWeights(mags * np.exp(2j * np.pi * rng.uniform(size=length)))
    x = ginibre(alg, rng)
    return op, beta, seq, x, n, label


def identity_sweep(seed, instances):
    """Max normalized residuals of the transfer identities and the gap bound.

    Returns a dict with ``prop31``, ``prop32`` (``residual / (1 + ||x||)``)
    and ``gap_excess`` (``max(measured - bound)``).
    """
    rng = np.random.default_rng(seed)
    out = {"instances": instances, "prop31": 0.0, "prop32": 0.0, "gap_excess": -math.inf}
    for _ in range(instances):
        op, beta, seq, x, n, _label = random_identity_instance(rng)
        scale = 1.0 + schatten_norm(x, np.inf)
        for variant in ("prop31", "prop32"):
            r = transfer_identity_check(variant, op, beta, seq, x, n) / scale
            out[variant] = max(out[variant], r)
        measured, bound = theorem31_gap(op, beta, seq, x, n)
        out["gap_excess"] = max(out["gap_excess"], measured - bound)
    return out
