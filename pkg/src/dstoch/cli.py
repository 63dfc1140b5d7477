"""Scenario runner.

Usage::

    dstoch <group> <action> --config CONFIG.json [--out DIR] [--format csv|json] [--seed N]

Results go to files under the output directory; stdout gets a single
summary line.  Exit status is 0 on success, 2 for invalid configs or
inputs, 3 for I/O failures.  ``DSTOCH_LOG`` (error, info, debug) sets the
verbosity of diagnostics on stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np
from referencing import Registry, Resource

from . import __version__
from .birkhoff import decompose, reconstruction_error
from .errors import DStochError, ValidationError
from .markov import (
    ChainSchedule,
    entropy_trace,
    ergodicity_report,
    mixing_time_estimate,
    path_distribution,
    path_entropy,
    schedule_path_entropy,
)
from .polytope import contains, export_hat_vertices, is_nested, membership_oracle, min_entropy, orbit_vertices
from .quantum import (
    DensityMatrix,
    UnitaryMatrix,
    diagonal_state,
    fourier_matrix,
    hamiltonian_evolution,
    identity_unitary,
    markov_vs_quantum_gap,
    maximally_mixed,
    measurement_chain,
    momentum_state,
    position_state,
    random_unitary,
    validate_density_matrix,
    validate_hamiltonian,
    validate_unitary,
    zeno_report,
)
from .serialize import (
    complex_matrix_from_json,
    csv_text,
    decomposition_to_json,
    matrix_from_json,
    matrix_to_json,
    path_distribution_rows,
    polytope_to_json,
    vector_from_json,
    vector_to_json,
)
from .stochastic import kl_to_uniform, shannon_entropy, spectral_analysis

log = logging.getLogger("dstoch")

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3

COMMANDS = {
    ("chain", "run"): "chain",
    ("chain", "paths"): "chain",
    ("birkhoff", "decompose"): "birkhoff",
    ("polytope", "vertices"): "polytope",
    ("polytope", "contains"): "polytope",
    ("quantum", "run"): "quantum-chain",
    ("quantum", "zeno"): "zeno",
    ("quantum", "ergodic"): "ergodic",
    ("quantum", "gap"): "markov-gap",
}
KINDS = sorted(set(COMMANDS.values()))


class ConfigParseError(ValidationError):
    pass


class IoError(DStochError):
    pass


@dataclass
class ScenarioConfig:
    kind: str
    inputs: dict
    output_dir: Path
    format: str = "csv"
    seed: int = 0

    def digest(self) -> str:
        """Hash of everything that affects results (the output path does not)."""
        canon = json.dumps(
            {"kind": self.kind, "inputs": self.inputs, "format": self.format, "seed": self.seed},
            sort_keys=True,
            separators=(",", ":"),
        )
        return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------- schemas


def _schema_registry() -> tuple[Registry, dict[str, dict]]:
    base = resources.files("dstoch") / "schemas"
    schemas = {}
    registry = Registry()
    for entry in base.iterdir():
        if entry.name.endswith(".schema.json"):
            doc = json.loads(entry.read_text())
            registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
            schemas[entry.name[: -len(".schema.json")]] = doc
    return registry, schemas


def validate_config_document(doc: Any) -> None:
    if not isinstance(doc, dict) or "kind" not in doc:
        raise ConfigParseError("config must be a JSON object with a 'kind'")
    if doc["kind"] not in KINDS:
        raise ConfigParseError(f"unknown kind {doc['kind']!r}; expected one of {', '.join(KINDS)}")
    registry, schemas = _schema_registry()
    validator = jsonschema.Draft202012Validator(schemas[doc["kind"]], registry=registry)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigParseError(f"{where}: {e.message}")


def load_config(path: Path, out: str | None = None, fmt: str | None = None, seed: int | None = None) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParseError(f"{path}: {exc}") from exc
    validate_config_document(doc)
    return ScenarioConfig(
        kind=doc["kind"],
        inputs=doc["inputs"],
        output_dir=Path(out if out is not None else doc.get("output_dir", "out")),
        format=fmt if fmt is not None else doc.get("format", "csv"),
        seed=seed if seed is not None else doc.get("seed", 0),
    )


# ---------------------------------------------------------------- input builders


def build_unitary(obj: dict) -> UnitaryMatrix:
    if "fourier" in obj:
        return fourier_matrix(obj["fourier"])
    if "identity" in obj:
        return identity_unitary(obj["identity"])
    if "hamiltonian" in obj:
        h = validate_hamiltonian(complex_matrix_from_json(obj["hamiltonian"]))
        return hamiltonian_evolution(h, obj["t"])
    return validate_unitary(complex_matrix_from_json(obj))


def build_state(obj: dict) -> DensityMatrix:
    kind = obj["kind"]
    if kind == "position":
        return position_state(obj["d"], obj["r"])
    if kind == "momentum":
        return momentum_state(obj["d"], obj["r"])
    if kind == "mixed":
        return maximally_mixed(obj["d"])
    if kind == "diagonal":
        return diagonal_state(obj["data"])
    return validate_density_matrix(complex_matrix_from_json({"re": obj["re"], "im": obj.get("im", np.zeros_like(obj["re"]).tolist())}))


def build_evolutions(obj, d: int, rng: np.random.Generator) -> list[UnitaryMatrix]:
    if isinstance(obj, list):
        return [build_unitary(s) for s in obj]
    if "random" in obj:
        return [random_unitary(d, rng) for _ in range(obj["random"])]
    return [build_unitary(obj["repeat"])] * obj["steps"]


def build_schedule(inputs: dict) -> ChainSchedule:
    steps = [matrix_from_json(m) for m in inputs.get("steps", [])]
    steps = steps * inputs.get("repeat", 1)
    return ChainSchedule(vector_from_json(inputs["initial"]), tuple(steps))


# ---------------------------------------------------------------- output


@dataclass
class Emitter:
    config: ScenarioConfig
    command: str
    written: list[Path] = field(default_factory=list)

    @property
    def provenance(self) -> dict:
        return {
            "kind": self.config.kind,
            "command": self.command,
            "config_sha256": self.config.digest(),
            "version": __version__,
        }

    def _header(self) -> str:
        return " ".join(f"{k}={v}" for k, v in self.provenance.items())

    def _write(self, name: str, text: str):
        path = self.config.output_dir / name
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
        log.info("wrote %s", path)
        self.written.append(path)

    def json(self, name: str, payload: dict):
        doc = {"provenance": self.provenance, **payload}
        self._write(f"{name}.json", json.dumps(doc, indent=2) + "\n")

    def table(self, name: str, header: list[str], rows: list[list]):
        """A table in the configured format."""
        rows = [list(r) for r in rows]
        if self.config.format == "json":
            self.json(name, {"columns": header, "rows": [[_jsonable(v) for v in r] for r in rows]})
        else:
            self._write(f"{name}.csv", csv_text(header, rows, comment=self._header()))


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    return v


def _vec_columns(d: int, prefix: str = "x") -> list[str]:
    return [f"{prefix}_{i}" for i in range(d)]


def _complex_list(values) -> list[dict]:
    return [{"re": float(np.real(v)), "im": float(np.imag(v))} for v in values]


# ---------------------------------------------------------------- handlers


def _chain_run(cfg: ScenarioConfig, out: Emitter) -> str:
    schedule = build_schedule(cfg.inputs)
    trace = entropy_trace(schedule)
    rows = [
        [s + 1, *x.tolist(), trace.entropies[s], trace.kl[s]]
        for s, x in enumerate(schedule.states)
    ]
    out.table("chain", ["step", *_vec_columns(schedule.d), "entropy", "kl_to_uniform"], rows)
    summary: dict[str, Any] = {
        "d": schedule.d,
        "horizon": schedule.horizon,
        "entropy_productions": list(trace.productions()),
        "states": [vector_to_json(x) for x in schedule.states],
    }
    if cfg.inputs.get("polytopes", False):
        polys = [orbit_vertices(x) for x in schedule.states]
        for s, p in enumerate(polys, start=1):
            out.table(f"polytope_t{s}", _vec_columns(schedule.d - 1, "hat_x"), export_hat_vertices(p).tolist())
        summary["polytopes"] = [
            {
                "time": s,
                "vertex_count": len(p),
                "min_entropy": min_entropy(p),
                "contains_all_later_states": all(contains(p, y) for y in schedule.states[s - 1:]),
                "nested_in_previous": None if s == 1 else is_nested(p, polys[s - 2]),
            }
            for s, p in enumerate(polys, start=1)
        ]
    if "epsilon" in cfg.inputs:
        rep = ergodicity_report(schedule, cfg.inputs["epsilon"])
        summary["ergodicity"] = {
            "epsilon": rep.epsilon,
            "ergodic_at": rep.ergodic_at,
            "max_deviation": list(rep.max_deviation),
        }
    out.json("chain_summary", summary)
    kl = " -> ".join(f"{v:.4f}" for v in (trace.kl[0], trace.kl[-1]))
    return f"horizon {schedule.horizon}, KL to uniform {kl}"


def _chain_paths(cfg: ScenarioConfig, out: Emitter) -> str:
    schedule = build_schedule(cfg.inputs)
    opts = cfg.inputs.get("paths", {})
    mode = opts.get("mode", "exact")
    dist = path_distribution(
        schedule,
        mode=mode,
        n_samples=opts.get("n_samples"),
        seed=cfg.seed,
        horizon=opts.get("horizon"),
    )
    out.table("paths", ["path", "q"], list(path_distribution_rows(dist, opts.get("skip_zero", False))))
    summary = {"mode": dist.mode, "horizon": dist.horizon, "d": dist.d}
    if dist.is_exact:
        summary["path_entropy"] = path_entropy(dist)
    else:
        summary["n_samples"] = int(dist.samples.shape[0])
        summary["seed"] = cfg.seed
        summary["exact_path_entropy"] = schedule_path_entropy(schedule, dist.horizon)
    out.json("paths_summary", summary)
    return f"{dist.mode} path distribution over {dist.horizon} times"


def _birkhoff(cfg: ScenarioConfig, out: Emitter) -> str:
    D = matrix_from_json(cfg.inputs["matrix"])
    dec = decompose(D)
    err = reconstruction_error(dec, D)
    out.json("decomposition", {**decomposition_to_json(dec), "reconstruction_error": err})
    out.table(
        "decomposition_terms",
        ["term", "perm", "weight"],
        [[i, "-".join(map(str, p.image)), w] for i, (p, w) in enumerate(dec.terms)],
    )
    return f"{len(dec)} terms, reconstruction error {err:.2e}"


def _polytope_vertices(cfg: ScenarioConfig, out: Emitter) -> str:
    p = orbit_vertices(vector_from_json(cfg.inputs["generator"]))
    hat = export_hat_vertices(p)
    out.table("vertices", _vec_columns(p.d - 1, "hat_x"), hat.tolist())
    out.json("polytope", {**polytope_to_json(p), "min_entropy": min_entropy(p)})
    return f"{len(p)} vertices in {p.d - 1} coordinates"


def _polytope_contains(cfg: ScenarioConfig, out: Emitter) -> str:
    p = orbit_vertices(vector_from_json(cfg.inputs["generator"]))
    use_oracle = cfg.inputs.get("oracle", True)
    rows = []
    for y in (vector_from_json(v) for v in cfg.inputs.get("points", [])):
        row = [*y.tolist(), contains(p, y)]
        if use_oracle:
            row.append(membership_oracle(p, y))
        rows.append(row)
    header = [*_vec_columns(p.d, "y"), "contains"] + (["oracle"] if use_oracle else [])
    out.table("membership", header, rows)
    inside = sum(1 for r in rows if r[p.d])
    return f"{inside} of {len(rows)} points inside"


def _quantum_run(cfg: ScenarioConfig, out: Emitter) -> str:
    rng = np.random.default_rng(cfg.seed)
    rho = build_state(cfg.inputs["initial_state"])
    evolutions = build_evolutions(cfg.inputs["evolutions"], rho.d, rng)
    frames = cfg.inputs.get("frames")
    frames = None if frames is None else [build_unitary(f) for f in frames]
    rec = measurement_chain(rho, evolutions, frames)
    d = rho.d
    rows = [
        [s, *x.tolist(), shannon_entropy(x), kl_to_uniform(x)]
        for s, x in enumerate(rec.vectors, start=1)
    ]
    out.table("measurements", ["step", *_vec_columns(d), "entropy", "kl_to_uniform"], rows)
    labels = ["rho"] + [
        lab for s in range(1, len(rec.vectors) + 1) for lab in ((f"rho_{s}",) if s == 1 else (f"evolved_{s}", f"rho_{s}"))
    ]
    out.table("staircase", ["state", "von_neumann_entropy"], list(zip(labels, rec.staircase)))
    for s, k in enumerate(rec.kernels, start=1):
        out.json(f"kernel_{s}_{s + 1}", matrix_to_json(k.data))
    if cfg.inputs.get("polytopes", False):
        polys = [orbit_vertices(x) for x in rec.vectors]
        for s, p in enumerate(polys, start=1):
            out.table(f"polytope_t{s}", _vec_columns(d - 1, "hat_x"), export_hat_vertices(p).tolist())
    return f"{len(rec.vectors)} measurements, entropy {rec.entropies[0]:.4f} -> {rec.entropies[-1]:.4f}"


def _quantum_zeno(cfg: ScenarioConfig, out: Emitter) -> str:
    inp = cfg.inputs
    h = validate_hamiltonian(complex_matrix_from_json(inp["hamiltonian"]))
    rep = zeno_report(h, inp["t_step"], inp["s_max"], vector_from_json(inp["x1"]))
    rows = [
        [s, rep.drift[s - 1], rep.frozen_mass[s - 1], rep.path_entropies[s - 1]]
        for s in range(1, inp["s_max"] + 1)
    ]
    out.table("zeno", ["s", "drift", "frozen_mass", "path_entropy"], rows)
    out.json(
        "zeno_summary",
        {
            "kernel": matrix_to_json(rep.kernel.data),
            "epsilon": rep.epsilon.tolist(),
            "epsilon_max": rep.epsilon_max,
            "frozen_path_probs": list(rep.frozen_path_probs),
            "drift_bound": [10 * s * rep.epsilon_max for s in range(1, inp["s_max"] + 1)],
        },
    )
    return (
        f"epsilon_max {rep.epsilon_max:.3e}, frozen mass {rep.frozen_mass[-1]:.6f}, "
        f"path entropy {rep.path_entropies[-1]:.4f}"
    )


def _quantum_ergodic(cfg: ScenarioConfig, out: Emitter) -> str:
    inp = cfg.inputs
    h = validate_hamiltonian(complex_matrix_from_json(inp["hamiltonian"]))
    V = hamiltonian_evolution(h, inp.get("t", 1.0))
    x1 = vector_from_json(inp["x1"]) if "x1" in inp else None
    rho = diagonal_state(x1) if x1 is not None else maximally_mixed(h.d)
    rec = measurement_chain(rho, [V] * inp["n_steps"])
    D = rec.kernels[0]
    spectrum = spectral_analysis(D)
    rep = ergodicity_report(rec.schedule, inp.get("epsilon", 0.01))
    out.json("kernel", matrix_to_json(D.data))
    out.table("ergodic", ["n", "max_deviation"], [[n, dev] for n, dev in enumerate(rep.max_deviation, start=1)])
    out.table(
        "chain",
        ["step", *_vec_columns(h.d), "entropy", "kl_to_uniform"],
        [[s, *x.tolist(), shannon_entropy(x), kl_to_uniform(x)] for s, x in enumerate(rec.vectors, start=1)],
    )
    try:
        mixing = mixing_time_estimate(D)
    except DStochError:
        mixing = None
    out.json(
        "ergodic_summary",
        {
            "eigenvalues": _complex_list(spectrum.eigenvalues),
            "e_max": spectrum.e_max,
            "mixing_time": mixing,
            "epsilon": rep.epsilon,
            "ergodic_at": rep.ergodic_at,
        },
    )
    return f"e_max {spectrum.e_max:.3f}, ergodic at n={rep.ergodic_at}"


def _quantum_gap(cfg: ScenarioConfig, out: Emitter) -> str:
    inp = cfg.inputs
    rep = markov_vs_quantum_gap(build_state(inp["rho1"]), build_unitary(inp["V12"]), build_unitary(inp["V23"]))
    out.json(
        "gap",
        {
            "D_with_meas": matrix_to_json(rep.D_with_meas.data),
            "D_without": matrix_to_json(rep.D_without.data),
            "max_gap": rep.max_gap,
            "x_with_meas": vector_to_json(rep.x_with_meas),
            "x_without": vector_to_json(rep.x_without),
        },
    )
    return f"max gap {rep.max_gap:.6f}"


HANDLERS: dict[tuple[str, str], Callable[[ScenarioConfig, Emitter], str]] = {
    ("chain", "run"): _chain_run,
    ("chain", "paths"): _chain_paths,
    ("birkhoff", "decompose"): _birkhoff,
    ("polytope", "vertices"): _polytope_vertices,
    ("polytope", "contains"): _polytope_contains,
    ("quantum", "run"): _quantum_run,
    ("quantum", "zeno"): _quantum_zeno,
    ("quantum", "ergodic"): _quantum_ergodic,
    ("quantum", "gap"): _quantum_gap,
}


def run_scenario(config: ScenarioConfig, command: tuple[str, str]) -> tuple[str, list[Path]]:
    """Run one scenario; returns the summary line and the files written."""
    expected = COMMANDS[command]
    if config.kind != expected:
        raise ConfigParseError(f"'{' '.join(command)}' needs a config of kind {expected!r}, got {config.kind!r}")
    out = Emitter(config, "-".join(command))
    summary = HANDLERS[command](config, out)
    return summary, out.written


# ---------------------------------------------------------------- entry point


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dstoch", description="Doubly stochastic Markov chain scenarios")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    groups = parser.add_subparsers(dest="group", required=True)
    actions: dict[str, list[str]] = {}
    for group, action in COMMANDS:
        actions.setdefault(group, []).append(action)
    for group, names in actions.items():
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="action", required=True)
        for name in names:
            ap = sub.add_parser(name)
            ap.add_argument("--config", required=True, type=Path)
            ap.add_argument("--out", default=None)
            ap.add_argument("--format", choices=["csv", "json"], default=None)
            ap.add_argument("--seed", type=int, default=None)
    return parser


def _configure_logging():
    level = os.environ.get("DSTOCH_LOG", "error").lower()
    logging.basicConfig(
        stream=sys.stderr,
        level={"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(level, logging.ERROR),
        format="%(levelname)s %(name)s: %(message)s",
    )


def main(argv: list[str] | None = None) -> int:
    _configure_logging()
    args = _parser().parse_args(argv)
    command = (args.group, args.action)
    try:
        if args.seed is not None and args.seed < 0:
            raise ConfigParseError("--seed must be nonnegative")
        config = load_config(args.config, args.out, args.format, args.seed)
        log.debug("config %s digest %s", args.config, config.digest())
        summary, written = run_scenario(config, command)
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except DStochError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"{' '.join(command)}: {summary}; {len(written)} files in {config.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
