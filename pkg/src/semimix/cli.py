"""Command-line front end.

Configuration is a JSON file; ``--set path=value`` overrides individual
fields (values are parsed as JSON when possible). Every CSV starts with a
comment line carrying the config hash and seed, followed by a header row.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 work guard exceeded.
"""
from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .clt import MeanCovarianceProfile, clt_limit_moment, empirical_clt_moments
from .core import ConfigError, NumericalFailure, SolverSettings, WorkGuardError
from .moments import mean_moment
from .montecarlo import ProfileSampler, mean_cauchy
from .rmt_sim import BlockMatrixSpec, ensemble_spectrum
from .spectral import bin_edges, curve_bin_mass, ks_distance, l1_density_distance, total_mass

log = logging.getLogger("semimix")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_GUARD = 0, 2, 3, 4

DEFAULTS = {
    "solver": {"tol": 1e-3, "max_iter": 10000},
    "monte_carlo": {"M": 1000, "seed": 0},
    "simulate": {"block_N": 100, "n_matrices": 200, "bins": 0.1},
    "clt": {"N_sums": [1, 4, 16, 64], "matrix_N": 200, "trials": 50, "moments": [2, 4]},
    "moments": {"orders": [2, 4, 6]},
}

_MISSING = object()


def _get(cfg: dict, path: str, default=_MISSING):
    node = cfg
    for part in path.split("."):
        if not isinstance(node, dict) or part not in node:
            if default is _MISSING:
                raise ConfigError(f"missing required field '{path}'")
            return default
        node = node[part]
    return node


def _num(cfg, path, kind=float, positive=False, minimum=None):
    value = _get(cfg, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"field '{path}' must be a number, got {value!r}")
    if kind is int:
        if float(value) != int(value):
            raise ConfigError(f"field '{path}' must be an integer, got {value!r}")
        value = int(value)
    else:
        value = float(value)
    if positive and not value > 0:
        raise ConfigError(f"field '{path}' must be positive, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"field '{path}' must be >= {minimum}, got {value!r}")
    return value


def _int_list(cfg, path, minimum=None):
    value = _get(cfg, path)
    if not isinstance(value, list) or not value:
        raise ConfigError(f"field '{path}' must be a non-empty list of integers")
    out = []
    for k, v in enumerate(value):
        if isinstance(v, bool) or not isinstance(v, int) or (minimum is not None and v < minimum):
            raise ConfigError(f"field '{path}[{k}]' must be an integer >= {minimum}, got {v!r}")
        out.append(v)
    return out


@dataclass
class RunConfig:
    raw: dict
    seed: int
    threads: int

    @property
    def digest(self) -> str:
        blob = json.dumps(self.raw, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    @property
    def d(self) -> int:
        return _num(self.raw, "d", int, minimum=1)

    def sampler(self) -> ProfileSampler:
        spec = _get(self.raw, "sampler")
        if not isinstance(spec, dict):
            raise ConfigError("field 'sampler' must be an object")
        spec = dict(spec)
        d = self.d
        if spec.setdefault("d", d) != d:
            raise ConfigError(f"field 'sampler.d' ({spec['d']}) disagrees with 'd' ({d})")
        try:
            return ProfileSampler.from_dict(spec)
        except ConfigError as exc:
            raise ConfigError(f"field 'sampler': {exc}") from None

    def grid(self) -> np.ndarray:
        x_min = _num(self.raw, "grid.x_min")
        x_max = _num(self.raw, "grid.x_max")
        step = _num(self.raw, "grid.step", positive=True)
        _num(self.raw, "grid.epsilon", positive=True)
        if not x_min < x_max:
            raise ConfigError("field 'grid.x_min' must be smaller than 'grid.x_max'")
        n = int(np.floor((x_max - x_min) / step + 1e-9))
        return x_min + step * np.arange(n + 1)

    def settings(self) -> SolverSettings:
        return SolverSettings(
            tol=_num(self.raw, "solver.tol", positive=True),
            max_iter=_num(self.raw, "solver.max_iter", int, minimum=1),
            epsilon=_num(self.raw, "grid.epsilon", positive=True),
        )

    @property
    def M(self) -> int:
        return _num(self.raw, "monte_carlo.M", int, minimum=1)


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(cfg: dict, overrides) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigError(f"override {item!r} must look like path=value")
        path, text = item.split("=", 1)
        node = cfg
        parts = path.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigError(f"override path '{path}' crosses a non-object field")
        node[parts[-1]] = _parse_value(text)
    return cfg


def load_config(path, overrides=(), seed=None, threads=1) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    for section, values in DEFAULTS.items():
        node = raw.setdefault(section, {})
        if not isinstance(node, dict):
            raise ConfigError(f"field '{section}' must be an object")
        for key, val in values.items():
            node.setdefault(key, copy.deepcopy(val))
    raw = apply_overrides(raw, overrides)
    if seed is not None:
        raw["monte_carlo"]["seed"] = seed
    cfg = RunConfig(raw=raw, seed=_num(raw, "monte_carlo.seed", int, minimum=0), threads=threads)
    if threads < 1:
        raise ConfigError("--threads must be >= 1")
    return cfg


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, cfg: RunConfig, command: str, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(f"# semimix {command} config_sha256={cfg.digest} seed={cfg.seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def _theory(cfg: RunConfig):
    res = mean_cauchy(cfg.sampler(), cfg.grid(), cfg.settings(), M=cfg.M, seed=cfg.seed,
                      threads=cfg.threads)
    if res.discarded:
        log.warning("%d of %d draws did not converge and were discarded", res.discarded, res.draws)
    mass = total_mass(res.curve)
    if not 0.97 <= mass <= 1.0:
        log.warning("density integrates to %.5f over the grid", mass)
    return res


def _curve_rows(res, with_density):
    c = res.curve
    for k in range(len(c)):
        row = [c.xs[k], c.g_values[k].real, c.g_values[k].imag]
        if with_density:
            row.append(c.density[k])
        row.append(res.per_point_stderr[k])
        yield row


def cmd_solve(cfg, out: Path):
    res = _theory(cfg)
    return [write_csv(out / "cauchy.csv", cfg, "solve", ["x", "re_g", "im_g", "stderr"],
                      _curve_rows(res, False))]


def cmd_density(cfg, out: Path):
    res = _theory(cfg)
    return [write_csv(out / "density.csv", cfg, "density",
                      ["x", "re_g", "im_g", "density", "stderr"], _curve_rows(res, True))]


def cmd_moments(cfg, out: Path):
    sampler = cfg.sampler()
    orders = _int_list(cfg.raw, "moments.orders", minimum=0)
    rows = []
    for m in orders:
        est = mean_moment(sampler, m, cfg.M, cfg.seed)
        rows.append([m, est.value, est.stderr])
    return [write_csv(out / "moments.csv", cfg, "moments", ["m", "mean_moment", "stderr"], rows)]


def _simulate(cfg):
    spec = BlockMatrixSpec(cfg.d, _num(cfg.raw, "simulate.block_N", int, minimum=1))
    n = _num(cfg.raw, "simulate.n_matrices", int, minimum=1)
    return ensemble_spectrum(cfg.sampler(), spec, n, seed=cfg.seed, threads=cfg.threads)


def cmd_simulate(cfg, out: Path):
    emp = _simulate(cfg)
    width = _num(cfg.raw, "simulate.bins", positive=True)
    edges = bin_edges(emp.samples[0], emp.samples[-1], width)
    counts, _ = np.histogram(emp.samples, bins=edges)
    dens = counts / (len(emp) * width)
    p1 = write_csv(out / "eigenvalues.csv", cfg, "simulate", ["eigenvalue"],
                   ([v] for v in emp.samples))
    p2 = write_csv(out / "histogram.csv", cfg, "simulate",
                   ["bin_left", "bin_right", "count", "density"],
                   zip(edges[:-1], edges[1:], counts, dens))
    return [p1, p2]


def cmd_clt(cfg, out: Path):
    sampler = cfg.sampler()
    cov = MeanCovarianceProfile.from_sampler(sampler)
    n_sums = _int_list(cfg.raw, "clt.N_sums", minimum=1)
    ms = _int_list(cfg.raw, "clt.moments", minimum=0)
    matrix_N = _num(cfg.raw, "clt.matrix_N", int, minimum=1)
    trials = _num(cfg.raw, "clt.trials", int, minimum=1)
    rows = []
    for n_sum in n_sums:
        est = empirical_clt_moments(sampler, n_sum, matrix_N, ms, trials, seed=cfg.seed)
        for m in ms:
            limit = float(clt_limit_moment(cov, m).mean())
            rows.append([n_sum, m, est[m].value, limit, est[m].stderr])
    return [write_csv(out / "clt.csv", cfg, "clt-check",
                      ["N_sum", "m", "empirical", "limit", "stderr"], rows)]


def cmd_compare(cfg, out: Path):
    res = _theory(cfg)
    emp = _simulate(cfg)
    width = _num(cfg.raw, "simulate.bins", positive=True)
    curve = res.curve
    l1 = l1_density_distance(curve, emp, width)
    ks = ks_distance(curve, emp)
    edges = bin_edges(min(curve.xs[0], emp.samples[0]), max(curve.xs[-1], emp.samples[-1]), width)
    theory = curve_bin_mass(curve, edges) / np.diff(edges)
    hist = emp.histogram(edges)
    paths = [
        write_csv(out / "density.csv", cfg, "compare", ["x", "re_g", "im_g", "density", "stderr"],
                  _curve_rows(res, True)),
        write_csv(out / "compare.csv", cfg, "compare",
                  ["bin_left", "bin_right", "empirical_density", "theory_density"],
                  zip(edges[:-1], edges[1:], hist, theory)),
        write_csv(out / "distances.csv", cfg, "compare", ["metric", "value"],
                  [["l1", l1], ["ks", ks], ["draws_discarded", res.discarded]]),
    ]
    print(f"l1={l1:.6f} ks={ks:.6f} discarded={res.discarded}/{res.draws}")
    return paths


COMMANDS = {
    "solve": cmd_solve,
    "density": cmd_density,
    "moments": cmd_moments,
    "simulate": cmd_simulate,
    "clt-check": cmd_clt,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--set", dest="overrides", action="append", default=[],
                        metavar="PATH=VALUE", help="override a config field, e.g. grid.epsilon=0.01")
    common.add_argument("--seed", type=int, default=None, help="overrides monte_carlo.seed")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default="out")
    common.add_argument("-v", "--verbose", action="store_true")
    parser = argparse.ArgumentParser(prog="semimix", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = load_config(args.config, args.overrides, args.seed, args.threads)
        paths = COMMANDS[args.command](cfg, Path(args.out_dir))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except WorkGuardError as exc:
        print(f"work guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    for p in paths:
        log.info("wrote %s", p)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
