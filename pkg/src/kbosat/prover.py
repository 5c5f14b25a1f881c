"""Running the engines on files: single problems, corpora and exports."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from .kbo import KboProof
from .logic import Cnf, VarPool, to_dimacs, tseitin
from .pb import PbProblem, kbo_pbc, minimize, objectives, pb_to_cnf, to_opb
from .proof import DecodeTables, SoundnessError, decode, proof_json, render, verify
from .satenc import kbo_sat
from .solver import ResourceLimit, Solver
from .terms import ArityError, ParseError, Trs, load

__all__ = ["RunConfig", "Result", "ConfigError", "prove", "prove_trs", "corpus",
           "export", "build", "import_model", "parse_model", "YES", "MAYBE", "ERROR"]

YES, MAYBE, ERROR = "YES", "MAYBE", "ERROR"
EXIT_CODES = {YES: 0, MAYBE: 1, ERROR: 2}
DEFAULT_BITS = {"trs": 4, "srs": 7}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    engine: str = "pbc"
    bits: Optional[int] = None  # None picks a default from the problem kind
    mode: str = "quasi"
    minimize: str = "none"
    timeout: Optional[float] = 10.0
    emit_dimacs: Optional[str] = None
    emit_opb: Optional[str] = None
    format: str = "text"

    def __post_init__(self):
        if self.engine not in ("sat", "pbc"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.mode not in ("strict", "quasi"):
            raise ConfigError(f"unknown precedence mode {self.mode!r}")
        if self.minimize not in ("none", "weights", "precedence"):
            raise ConfigError(f"unknown objective {self.minimize!r}")
        if self.minimize != "none" and self.engine != "pbc":
            raise ConfigError("minimization needs the pbc engine")
        if self.bits is not None and self.bits < 1:
            raise ConfigError("bits must be at least 1")
        if self.emit_opb and self.engine != "pbc":
            raise ConfigError("OPB export needs the pbc engine")
        if self.format not in ("text", "json"):
            raise ConfigError(f"unknown format {self.format!r}")

    def bits_for(self, trs: Trs) -> int:
        return self.bits if self.bits is not None else DEFAULT_BITS.get(trs.kind, 4)

    @property
    def method(self) -> str:
        return f"{self.engine}({self.bits if self.bits is not None else 'auto'})"


@dataclass
class Result:
    name: str
    verdict: str
    seconds: float = 0.0
    proof: Optional[KboProof] = None
    trs: Optional[Trs] = None
    note: str = ""
    trace: List[int] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def text(self, minimal: bool = True) -> str:
        out = self.verdict + (f"  ({self.note})" if self.note else "") + "\n"
        if self.proof is not None:
            out += render(self.proof, self.trs, minimal=minimal)
        return out

    def as_json(self) -> dict:
        return {
            "problem": self.name,
            "verdict": self.verdict,
            "seconds": round(self.seconds, 4),
            "note": self.note,
            "proof": proof_json(self.proof) if self.proof is not None else None,
        }


@dataclass
class Built:
    """The problem handed to the internal solver, plus how to read its models."""

    cnf: Cnf
    tables: DecodeTables
    pb: Optional[PbProblem] = None


def build(trs: Trs, cfg: RunConfig) -> Built:
    k = cfg.bits_for(trs)
    if cfg.engine == "sat":
        enc = kbo_sat(trs, k, cfg.mode)
        return Built(tseitin(enc.formula, enc.pool), enc.tables)
    p = kbo_pbc(trs, k, cfg.mode)
    if cfg.minimize != "none":
        p.objective = objectives(p, cfg.minimize)
    cnf = pb_to_cnf(p.constraints, VarPool(p.max_var() + 1))
    cnf.num_vars = max(cnf.num_vars, p.max_var())
    return Built(cnf, p.tables, p)


def _solve(built: Built, cfg: RunConfig):
    deadline = time.monotonic() + cfg.timeout if cfg.timeout is not None else None
    solver = Solver(built.cnf.num_vars)
    for clause in built.cnf.clauses:
        if not solver.add_clause(clause):
            return None
    return solver.solve(None, deadline)


def prove_trs(trs: Trs, cfg: RunConfig, name: str = "<input>") -> Result:
    start = time.monotonic()
    res = Result(name, MAYBE, trs=trs)
    try:
        built = build(trs, cfg)
        _write(built, cfg)
        if cfg.minimize != "none":
            opt = minimize(built.pb, timeout=cfg.timeout)
            model, res.trace = opt.model, opt.trace
            if model is not None and not opt.optimal:
                res.note = "objective not proved minimal"
        else:
            model = _solve(built, cfg)
    except ResourceLimit:
        res.note = "timeout"
        model = None
    except OSError as exc:
        res.verdict, res.note = ERROR, str(exc)
        model = None
    if model is not None:
        try:
            res.proof = verify(trs, *decode(model, built.tables))
            res.verdict = YES
        except SoundnessError as exc:
            res.verdict, res.note = ERROR, f"internal soundness error: {exc}"
    res.seconds = time.monotonic() - start
    return res


def prove(path: Union[str, Path], cfg: RunConfig) -> Result:
    """Prove one file; parse and I/O problems give an ERROR result, not an exception."""
    start = time.monotonic()
    name = str(path)
    try:
        trs = load(path)
    except (OSError, ParseError, ArityError, UnicodeDecodeError) as exc:
        return Result(name, ERROR, time.monotonic() - start, note=str(exc))
    return prove_trs(trs, cfg, name)


# --- corpora -------------------------------------------------------------

def corpus_files(directory: Union[str, Path]) -> List[Path]:
    d = Path(directory)
    return sorted(p for p in d.iterdir() if p.suffix in (".trs", ".srs") and p.is_file())


@dataclass
class Report:
    results: List[Result]
    config: RunConfig

    @property
    def summary(self) -> Dict[str, object]:
        return {
            "method": self.config.method,
            "mode": self.config.mode,
            "problems": len(self.results),
            "total_seconds": round(sum(r.seconds for r in self.results), 4),
            "successes": sum(r.verdict == YES for r in self.results),
            "timeouts": sum(r.note == "timeout" for r in self.results),
            "errors": sum(r.verdict == ERROR for r in self.results),
        }

    def as_json(self) -> dict:
        return {"summary": self.summary, "results": [r.as_json() for r in self.results]}

    def text(self) -> str:
        names = [Path(r.name).name for r in self.results]
        width = max([len(n) for n in names] + [7])
        lines = [f"{'problem':<{width}}  verdict  seconds  note"]
        for n, r in zip(names, self.results):
            lines.append(f"{n:<{width}}  {r.verdict:<7}  {r.seconds:7.3f}  {r.note}".rstrip())
        s = self.summary
        lines.append(
            f"{s['method']} {s['mode']}: total time {s['total_seconds']:.3f}s, "
            f"successes {s['successes']}, timeouts {s['timeouts']}, errors {s['errors']}"
        )
        return "\n".join(lines) + "\n"


def corpus(directory: Union[str, Path], cfg: RunConfig) -> Report:
    """Prove every ``.trs``/``.srs`` file of a directory in name order."""
    files = corpus_files(directory)
    return Report([prove(p, cfg) for p in files], cfg)


# --- export and external models ---------------------------------------------

def export(trs: Trs, cfg: RunConfig) -> Built:
    """Write the DIMACS and/or OPB text of the problem the solver would get."""
    built = build(trs, cfg)
    _write(built, cfg)
    return built


def _write(built: Built, cfg: RunConfig):
    if cfg.emit_dimacs:
        Path(cfg.emit_dimacs).write_text(to_dimacs(built.cnf))
    if cfg.emit_opb:
        Path(cfg.emit_opb).write_text(to_opb(built.pb))


def parse_model(text: str) -> Dict[int, bool]:
    """Read a solver model: DIMACS ``v`` lines, bare literals, or OPB ``x3 -x4`` style."""
    model: Dict[int, bool] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line[0] in "cs":
            continue
        if line[0] == "v":
            line = line[1:]
        for tok in line.split():
            neg = tok.startswith("-")
            tok = tok.lstrip("-")
            if tok.startswith("x"):
                tok = tok[1:]
            v = int(tok)
            if v:
                model[v] = not neg
    return model


def import_model(trs: Trs, cfg: RunConfig, model_text: str) -> KboProof:
    """Decode and verify a model an external solver found for :func:`export` output."""
    built = build(trs, cfg)
    model = parse_model(model_text)
    missing = [v for v in built.tables.variables() if v not in model]
    if missing:
        raise ValueError(f"model lacks table variable {missing[0]}")
    return verify(trs, *decode(model, built.tables))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)
