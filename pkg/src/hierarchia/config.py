"""Experiment configuration documents (YAML).

Complex numbers are written as [re, im] pairs; a plain number is real.
Every diagnostic names the field path and, when known, the line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import CapacityError, ConfigError, DomainError
from .instances import random_hermitian, rng_from
from .model import ModelSpec, swap_matrix
from .tensor import MAX_SIDE

SUITES = ("roundtrip", "vn-hierarchy", "bbgky", "nonlinear-bbgky", "gke", "meanfield", "functional-equality")
FORMATS = ("csv", "json")
DEFAULT_TOLERANCES = {"identity": 1e-10, "roundtrip": 1e-11, "order": 1.9, "slope_low": 0.7, "slope_high": 1.3}


@dataclass
class MeanFieldOptions:
    epsilons: tuple[float, ...] = (1.0, 0.5, 0.25, 0.125)
    t: float = 1.0
    shift: float = 0.0


@dataclass
class ExperimentConfig:
    model: ModelSpec
    seed: int
    times: tuple[float, ...]
    suites: tuple[str, ...]
    output_path: str | None = None
    output_format: str = "csv"
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    meanfield: MeanFieldOptions = field(default_factory=MeanFieldOptions)
    experimental_skrrc: bool = False
    document: bytes = b""


def _to_python(node, path: str, lines: dict):
    """Convert a YAML node tree, remembering the line of every field path."""
    lines[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = str(k.value)
            if key in out:
                raise ConfigError(f"duplicate key {key!r}", f"{path}.{key}".lstrip("."), k.start_mark.line + 1)
            out[key] = _to_python(v, f"{path}.{key}".lstrip("."), lines)
        return out
    if isinstance(node, yaml.SequenceNode):
        return [_to_python(v, f"{path}[{i}]", lines) for i, v in enumerate(node.value)]
    return yaml.safe_load(yaml.serialize(node))


class _Reader:
    def __init__(self, tree, lines):
        self.tree, self.lines = tree, lines

    def line_of(self, path: str) -> int | None:
        """Line of ``path``, else of its nearest ancestor present in the document."""
        probe = path
        while True:
            if probe in self.lines:
                return self.lines[probe]
            if not probe:
                return None
            cut = max(probe.rfind("."), probe.rfind("["))
            probe = probe[:cut] if cut > 0 else ""

    def error(self, path: str, message: str):
        raise ConfigError(message, path, self.line_of(path))

    def get(self, path: str, default=None, required=False):
        node = self.tree
        for part in path.split("."):
            if not isinstance(node, dict) or part not in node:
                if required:
                    self.error(path, "missing required field")
                return default
            node = node[part]
        return node

    def number(self, path: str, value, positive=False, integer=False):
        ok = isinstance(value, (int, float)) and not isinstance(value, bool)
        if integer:
            ok = isinstance(value, int) and not isinstance(value, bool)
        if not ok or not math.isfinite(value):
            self.error(path, f"expected a finite {'integer' if integer else 'number'}, got {value!r}")
        if positive and value <= 0:
            self.error(path, "must be positive")
        return value

    def complex_matrix(self, path: str, value, side: int) -> np.ndarray:
        if not isinstance(value, list) or len(value) != side:
            self.error(path, f"expected a {side}x{side} matrix of [re, im] entries")
        out = np.zeros((side, side), dtype=complex)
        for i, row in enumerate(value):
            if not isinstance(row, list) or len(row) != side:
                self.error(f"{path}[{i}]", f"expected a row of {side} entries")
            for j, z in enumerate(row):
                p = f"{path}[{i}][{j}]"
                if isinstance(z, list):
                    if len(z) != 2:
                        self.error(p, "complex entries are [re, im] pairs")
                    out[i, j] = complex(self.number(p, z[0]), self.number(p, z[1]))
                else:
                    out[i, j] = self.number(p, z)
        return out


def _model(r: _Reader, seed: int) -> ModelSpec:
    d = r.number("model.d", r.get("model.d", required=True), integer=True)
    if d < 2:
        r.error("model.d", "must be >= 2")
    n_max = r.number("model.n_max", r.get("model.n_max", 3), integer=True)
    if n_max < 1:
        r.error("model.n_max", "must be >= 1")
    if d**n_max > MAX_SIDE:
        r.error("model.n_max", f"capacity exceeded: d^n_max = {d ** n_max} > {MAX_SIDE}")
    epsilon = r.number("model.epsilon", r.get("model.epsilon", 1.0))
    if epsilon < 0:
        r.error("model.epsilon", "must be nonnegative")
    rng = rng_from(seed)
    h = _operator(r, "model.h", d, rng)
    phi = _operator(r, "model.phi", d * d, rng, symmetric_d=d)
    if np.max(np.abs(h - h.conj().T)) > 1e-12:
        r.error("model.h", "h is not Hermitian")
    if np.max(np.abs(phi - phi.conj().T)) > 1e-12:
        r.error("model.phi", "phi is not Hermitian")
    sw = swap_matrix(d)
    if np.max(np.abs(sw @ phi @ sw - phi)) > 1e-12:
        r.error("model.phi", "phi is not symmetric under exchange of the two particles")
    try:
        return ModelSpec(d, h, phi, epsilon, n_max)
    except (DomainError, CapacityError) as exc:
        r.error("model", str(exc))


def _operator(r: _Reader, path: str, side: int, rng, symmetric_d: int | None = None) -> np.ndarray:
    value = r.get(path, required=True)
    if isinstance(value, dict) and set(value) <= {"random"}:
        scale = r.number(f"{path}.random", value["random"], positive=True)
        m = random_hermitian(rng, side, scale)
        if symmetric_d is not None:
            sw = swap_matrix(symmetric_d)
            m = 0.5 * (m + sw @ m @ sw)
        return m
    return r.complex_matrix(path, value, side)


def parse_config(document: bytes) -> ExperimentConfig:
    """Parse and validate a configuration document; raises ConfigError."""
    try:
        text = document.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ConfigError(f"document is not UTF-8: {exc}", "", None) from None
    try:
        node = yaml.compose(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"malformed document: {getattr(exc, 'problem', exc)}", "",
                          mark.line + 1 if mark else None) from None
    lines: dict = {}
    tree = _to_python(node, "", lines) if node is not None else {}
    if not isinstance(tree, dict):
        raise ConfigError("top level must be a mapping", "", 1)
    r = _Reader(tree, lines)
    known = {"model", "seed", "times", "suites", "output", "tolerances", "meanfield", "experimental_skrrc"}
    for key in tree:
        if key not in known:
            r.error(key, "unknown field")

    seed = r.number("seed", r.get("seed", 0), integer=True)
    model = _model(r, seed)

    times = r.get("times", [0.3, 1.0])
    if not isinstance(times, list) or not times:
        r.error("times", "times must be a nonempty list")
    times = tuple(float(r.number(f"times[{i}]", x)) for i, x in enumerate(times))

    suites = r.get("suites")
    if not suites:
        r.error("suites", "suites must be nonempty")
    if not isinstance(suites, list):
        r.error("suites", "suites must be a list")
    for i, name in enumerate(suites):
        if name not in SUITES:
            r.error(f"suites[{i}]", f"unknown suite {name!r}; choose from {', '.join(SUITES)}")

    out_path = r.get("output.path")
    fmt = r.get("output.format", "csv")
    if fmt not in FORMATS:
        r.error("output.format", f"format must be one of {FORMATS}")

    tol = dict(DEFAULT_TOLERANCES)
    overrides = r.get("tolerances", {}) or {}
    if not isinstance(overrides, dict):
        r.error("tolerances", "tolerances must be a mapping")
    for k, v in overrides.items():
        if k not in tol:
            r.error(f"tolerances.{k}", "unknown tolerance")
        tol[k] = float(r.number(f"tolerances.{k}", v, positive=True))

    mf = MeanFieldOptions()
    eps = r.get("meanfield.epsilons")
    if eps is not None:
        if not isinstance(eps, list) or not eps:
            r.error("meanfield.epsilons", "must be a nonempty list")
        eps = tuple(float(r.number(f"meanfield.epsilons[{i}]", e, positive=True)) for i, e in enumerate(eps))
        if any(b >= a for a, b in zip(eps, eps[1:])):
            r.error("meanfield.epsilons", "must be strictly decreasing")
        mf.epsilons = eps
    if r.get("meanfield.t") is not None:
        mf.t = float(r.number("meanfield.t", r.get("meanfield.t")))
    if r.get("meanfield.shift") is not None:
        mf.shift = float(r.number("meanfield.shift", r.get("meanfield.shift")))

    skrrc = r.get("experimental_skrrc", False)
    if not isinstance(skrrc, bool):
        r.error("experimental_skrrc", "must be true or false")

    return ExperimentConfig(model, seed, times, tuple(suites), out_path, fmt, tol, mf, skrrc, document)
