"""Command-line experiments: ``synth``, ``eval``, ``ica`` and ``asympt``.

Every command reads an optional INI config, runs its sweep (in parallel with
``--threads``) and writes CSV files into the output directory.

Config layout (all keys optional)::

    [model]
    alpha = 1.0
    kappa = 0.0
    T = 1.0
    N = 64
    sigma = 1.0

    [experiment]
    alphas = 0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0
    Ns = 64
    transforms = identity, dct, haar
    criterion = both          ; R, MSE or both
    seeds = 0, 1, 2, 3, 4
    out = out
    optimize = false          ; eval: also minimize the criterion per point

    [optimizer]
    mu0 = 0.1
    ...                       ; any OptimizerOptions field
"""
from __future__ import annotations

import argparse
import configparser
import io
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import asymptotics, criteria, matio
from .model import ModelParams, ParameterError, build_mixing, synthesize
from .optimizer import OptimizerOptions, RankDeficient, match_basis, multistart
from .stable import NormalizationError
from .transforms import OrthonormalityError, RootBracketError, make_transform, _is_pow2

log = logging.getLogger("sasica")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
DEFAULT_ALPHAS = tuple(round(0.2 * i, 10) for i in range(1, 11))


class ConfigError(ValueError):
    pass


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


def _ints(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.replace(";", ",").split(",") if v.strip())


def _names(text: str) -> tuple[str, ...]:
    return tuple(v.strip().lower() for v in text.split(",") if v.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class ExperimentConfig:
    params: ModelParams = ModelParams()
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    Ns: tuple[int, ...] = (64,)
    transforms: tuple[str, ...] = ("identity", "dct", "haar")
    criterion: str = "both"
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    out: str = "out"
    optimize: bool = False
    optimizer: OptimizerOptions = OptimizerOptions()

    def __post_init__(self):
        if self.criterion.upper() not in ("R", "MSE", "BOTH"):
            raise ConfigError(f"criterion must be R, MSE or both, got {self.criterion!r}")
        if not self.transforms and not self.optimize:
            raise ConfigError("need at least one transform or optimize = true")
        if not self.alphas or not self.Ns or not self.seeds:
            raise ConfigError("alphas, Ns and seeds must be non-empty")

    @property
    def kinds(self) -> tuple[str, ...]:
        c = self.criterion.upper()
        return ("R", "MSE") if c == "BOTH" else (c,)

    # -- INI round trip ----------------------------------------------------

    def to_ini(self) -> str:
        cp = configparser.ConfigParser()
        cp.optionxform = str
        p = self.params
        cp["model"] = {"alpha": repr(p.alpha), "kappa": repr(p.kappa), "T": repr(p.T),
                       "N": str(p.N), "sigma": repr(p.sigma)}
        cp["experiment"] = {
            "alphas": ", ".join(repr(a) for a in self.alphas),
            "Ns": ", ".join(str(n) for n in self.Ns),
            "transforms": ", ".join(self.transforms),
            "criterion": self.criterion,
            "seeds": ", ".join(str(s) for s in self.seeds),
            "out": self.out,
            "optimize": str(self.optimize).lower(),
        }
        cp["optimizer"] = {f.name: repr(getattr(self.optimizer, f.name))
                           if not isinstance(getattr(self.optimizer, f.name), str)
                           else getattr(self.optimizer, f.name)
                           for f in fields(OptimizerOptions)}
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()

    @classmethod
    def from_ini(cls, text: str) -> "ExperimentConfig":
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.optionxform = str
        try:
            cp.read_string(text)
            return cls._from_parser(cp)
        except (configparser.Error, ValueError, TypeError, SyntaxError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    @classmethod
    def _from_parser(cls, cp) -> "ExperimentConfig":
        unknown = set(cp.sections()) - {"model", "experiment", "optimizer"}
        if unknown:
            raise ConfigError(f"unknown sections: {sorted(unknown)}")
        m = cp["model"] if cp.has_section("model") else {}
        known = {"alpha", "kappa", "T", "N", "sigma"}
        if set(m) - known:
            raise ConfigError(f"unknown [model] keys: {sorted(set(m) - known)}")
        d = ModelParams()
        params = ModelParams(alpha=float(m.get("alpha", d.alpha)), kappa=float(m.get("kappa", d.kappa)),
                             T=float(m.get("T", d.T)), N=int(m.get("N", d.N)),
                             sigma=float(m.get("sigma", d.sigma)))
        e = cp["experiment"] if cp.has_section("experiment") else {}
        conv = {"alphas": _floats, "Ns": _ints, "transforms": _names, "criterion": str.strip,
                "seeds": _ints, "out": str.strip, "optimize": _bool}
        if set(e) - set(conv):
            raise ConfigError(f"unknown [experiment] keys: {sorted(set(e) - set(conv))}")
        kw = {k: conv[k](v) for k, v in e.items()}
        if "Ns" not in kw:
            kw["Ns"] = (params.N,)
        o = cp["optimizer"] if cp.has_section("optimizer") else {}
        types = {f.name: f.type for f in fields(OptimizerOptions)}
        if set(o) - set(types):
            raise ConfigError(f"unknown [optimizer] keys: {sorted(set(o) - set(types))}")
        okw = {}
        for k, v in o.items():
            t = types[k]
            if t == "str":
                okw[k] = v.strip()
            elif t == "int":
                okw[k] = int(v)
            elif v.strip() == "None":
                okw[k] = None
            else:
                okw[k] = float(v)
        return cls(params=params, optimizer=OptimizerOptions(**okw), **kw)


def load_config(path) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    return ExperimentConfig.from_ini(text)


# ---------------------------------------------------------------------------

def _write_table(path: Path, header, rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for r in rows:
            fh.write(",".join(v if isinstance(v, str) else repr(float(v)) for v in r) + "\n")


def _tag(x: float) -> str:
    return format(x, "g").replace(".", "p")


def cmd_synth(cfg: ExperimentConfig, out: Path, pool) -> list[Path]:
    seed = cfg.seeds[0]

    def one(a):
        p = cfg.params.with_(alpha=a)
        path = synthesize(p, seed)
        f = out / f"synth_alpha{_tag(a)}.csv"
        _write_table(f, ["k", "s", "w"],
                     [(str(k), s, w) for k, (s, w) in enumerate(zip(path.samples, path.innovations), 1)])
        return f
    return list(pool.map(one, cfg.alphas))


def _eval_point(cfg, a, N, kind):
    p = cfg.params.with_(alpha=a, N=N)
    Linv = build_mixing(p)
    vals = []
    for name in cfg.transforms:
        if name in ("haar", "hwt", "opwav", "opwt") and not _is_pow2(N):
            vals.append(math.nan)
            continue
        H = make_transform(name, p)
        vals.append(criteria.evaluate(kind, H, Linv, a, p.sigma).value)
    if cfg.optimize:
        best, _ = multistart(p, kind, cfg.optimizer, seeds=cfg.seeds)
        vals.append(best.value)
    return vals


def cmd_eval(cfg: ExperimentConfig, out: Path, pool) -> list[Path]:
    header_t = list(cfg.transforms) + (["optimized"] if cfg.optimize else [])
    written = []
    for kind in cfg.kinds:
        if len(cfg.Ns) == 1:
            N = cfg.Ns[0]
            rows = list(pool.map(lambda a: [a] + _eval_point(cfg, a, N, kind), cfg.alphas))
            f = out / f"eval_{kind}_vs_alpha_N{N}.csv"
            _write_table(f, ["alpha"] + header_t, rows)
            written.append(f)
        else:
            for a in cfg.alphas:
                rows = list(pool.map(lambda N: [str(N)] + _eval_point(cfg, a, N, kind), cfg.Ns))
                f = out / f"eval_{kind}_vs_N_alpha{_tag(a)}.csv"
                _write_table(f, ["N"] + header_t, rows)
                written.append(f)
    return written


def cmd_ica(cfg: ExperimentConfig, out: Path, pool) -> list[Path]:
    kinds = cfg.kinds

    def one(job):
        a, kind = job
        p = cfg.params.with_(alpha=a)
        best, runs = multistart(p, kind, cfg.optimizer, seeds=cfg.seeds)
        stem = f"ica_{kind}_alpha{_tag(a)}"
        matio.write_csv(out / f"{stem}_H.csv", best.H_opt.entries)
        best.trace_to_csv(out / f"{stem}_trace.csv")
        refs = ["dct", "klt"] + (["haar", "opwav"] if _is_pow2(p.N) else [])
        rows = [(r, match_basis(best.H_opt, make_transform(r, p))[0]) for r in refs]
        rows += [(f"seed{s}_value", run.value) for s, run in zip(cfg.seeds, runs)]
        _write_table(out / f"{stem}_match.csv", ["reference", "value"], rows)
        return stem
    return list(pool.map(one, [(a, k) for a in cfg.alphas for k in kinds]))


def cmd_asympt(cfg: ExperimentConfig, out: Path, pool) -> list[Path]:
    p = cfg.params
    alphas = [a for a in cfg.alphas if a < 2]
    Ns = cfg.Ns if len(cfg.Ns) > 1 else (16, 64, 256, 1024)
    written = []
    limits = []
    for a in alphas:
        table = asymptotics.nu_table_for(p.kappa, p.T, a, p.sigma, Ns)
        rep = asymptotics.theorem1_check(p.kappa, p.T, a, p.sigma, Ns, map_fn=pool.map,
                                         nu_table=table)
        f = out / f"large_n_alpha{_tag(a)}.csv"
        rep.to_csv(f)
        written.append(f)
        limits.append([a, rep.limit_R, rep.limit_R_bound,
                       asymptotics.limit_mse_opwt(p.kappa, p.T, a, p.sigma), rep.mse_bound,
                       str(int(rep.r_dct_increasing)), str(int(rep.mse_dct_increasing)),
                       str(int(rep.r_opwt_bounded)), str(int(rep.mse_opwt_bounded))])
    f = out / "limits.csv"
    _write_table(f, ["alpha", "limit_R_opwt", "R_bound", "limit_MSE_opwt", "MSE_bound",
                     "R_dct_increasing", "MSE_dct_increasing", "R_opwt_bounded",
                     "MSE_opwt_bounded"], limits)
    written.append(f)
    return written


COMMANDS = {"synth": cmd_synth, "eval": cmd_eval, "ica": cmd_ica, "asympt": cmd_asympt}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sasica",
        description="Transform-domain dependence experiments for stable AR(1) signals.",
        epilog=("Defaults: N=64, kappa=0, T=1, sigma=1, alphas 0.2..2.0 step 0.2, "
                "transforms identity,dct,haar, criterion both, seeds 0..4. "
                "Exit codes: 0 success, 2 config error, 3 numerical failure."),
    )
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", metavar="PATH", help="INI file with [model], [experiment], [optimizer]")
    ap.add_argument("--out", metavar="DIR", help="output directory (overrides config)")
    ap.add_argument("--seed", type=int, metavar="U64", help="single seed (overrides config seeds)")
    ap.add_argument("--threads", type=int, default=1, metavar="K", help="worker threads")
    ap.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("seed must be non-negative")
            cfg = ExperimentConfig(**{**cfg.__dict__, "seeds": (args.seed,)})
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.dump_config:
        sys.stdout.write(cfg.to_ini())
        return EXIT_OK
    out = Path(args.out or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            files = COMMANDS[args.command](cfg, out, pool)
    except (NormalizationError, RootBracketError, OrthonormalityError, RankDeficient,
            FloatingPointError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ParameterError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for f in files:
        log.info("wrote %s", f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
