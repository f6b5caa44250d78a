"""Readers and writers: BIF networks, CSV datasets, JSON graphs, priors, configs and reports."""

from __future__ import annotations

import csv
import io as _io
import json
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Any, Iterable, Sequence

import jsonschema
import numpy as np

from .bayesnet import BayesNet, Cpt, Dataset, VariableSpec, config_strides
from .graph import Dag, DirectedEdge
from .priors import PriorClass, PriorSet

BUILTIN_NETWORKS = ("asia", "child", "alarm", "insurance")
DEFAULT_SAMPLE_SIZES = {"asia": 1000, "child": 2000, "alarm": 4000, "insurance": 4000}
ROW_SUM_TOLERANCE = 1e-4


class BifError(ValueError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


# --- BIF -------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<punct>[{}()\[\];,|])
  | (?P<word>[^\s{}()\[\];,|]+)
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # pragma: no cover - the word class matches any other char
            raise BifError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind in ("punct", "word"):
            tokens.append(_Token(kind, chunk, line, pos - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    return tokens


@dataclass
class BifDocument:
    network_name: str
    variables: list[VariableSpec]
    probability_blocks: list[tuple[str, tuple[str, ...], list[tuple[tuple[str, ...] | None, list[float]]]]] = field(
        default_factory=list
    )


class _BifParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("eof", "", 1, 1)
            raise BifError("unexpected end of input", last.line, last.column)
        self.i += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise BifError(f"expected {text!r}, found {tok.text!r}", tok.line, tok.column)
        return tok

    def word(self) -> _Token:
        tok = self.next()
        if tok.kind != "word":
            raise BifError(f"expected a name, found {tok.text!r}", tok.line, tok.column)
        return tok

    def number(self) -> float:
        tok = self.word()
        try:
            return float(tok.text)
        except ValueError:
            raise BifError(f"expected a number, found {tok.text!r}", tok.line, tok.column) from None

    def skip_block(self) -> None:
        """Skip a balanced ``{ ... }`` block (used for ``property`` bodies)."""
        self.expect("{")
        depth = 1
        while depth:
            tok = self.next()
            if tok.text == "{":
                depth += 1
            elif tok.text == "}":
                depth -= 1

    def skip_property(self) -> None:
        while self.next().text != ";":
            pass

    def numbers_until_semicolon(self) -> list[float]:
        values = []
        while True:
            values.append(self.number())
            tok = self.next()
            if tok.text == ";":
                return values
            if tok.text != ",":
                raise BifError(f"expected ',' or ';', found {tok.text!r}", tok.line, tok.column)

    def parse(self) -> BifDocument:
        name = "unknown"
        variables: list[VariableSpec] = []
        blocks = []
        declared_at: dict[str, _Token] = {}
        while self.peek() is not None:
            tok = self.word()
            if tok.text == "network":
                name = self.word().text
                self.skip_block()
            elif tok.text == "variable":
                vtok = self.word()
                if vtok.text in declared_at:
                    raise BifError(f"variable {vtok.text!r} declared twice", vtok.line, vtok.column)
                declared_at[vtok.text] = vtok
                variables.append(self.variable_body(vtok))
            elif tok.text == "probability":
                blocks.append(self.probability_block())
            else:
                raise BifError(f"unexpected keyword {tok.text!r}", tok.line, tok.column)
        return BifDocument(name, variables, blocks)

    def variable_body(self, vtok: _Token) -> VariableSpec:
        self.expect("{")
        spec = None
        while True:
            tok = self.next()
            if tok.text == "}":
                break
            if tok.text == "property":
                self.skip_property()
                continue
            if tok.text != "type":
                raise BifError(f"unexpected {tok.text!r} in variable block", tok.line, tok.column)
            kind = self.word()
            if kind.text != "discrete":
                raise BifError(f"only discrete variables are supported, found {kind.text!r}", kind.line, kind.column)
            self.expect("[")
            card_tok = self.word()
            self.expect("]")
            self.expect("{")
            states = [self.word().text]
            while True:
                sep = self.next()
                if sep.text == "}":
                    break
                if sep.text != ",":
                    raise BifError(f"expected ',' or '}}', found {sep.text!r}", sep.line, sep.column)
                states.append(self.word().text)
            self.expect(";")
            try:
                card = int(card_tok.text)
            except ValueError:
                raise BifError(f"bad cardinality {card_tok.text!r}", card_tok.line, card_tok.column) from None
            if card != len(states):
                raise BifError(
                    f"variable {vtok.text!r} declares {card} states but lists {len(states)}",
                    card_tok.line,
                    card_tok.column,
                )
            spec = VariableSpec(vtok.text, card, tuple(states))
        if spec is None:
            raise BifError(f"variable {vtok.text!r} has no type declaration", vtok.line, vtok.column)
        return spec

    def probability_block(self):
        start = self.expect("(")
        child = self.word()
        parents: list[str] = []
        tok = self.next()
        if tok.text == "|":
            parents.append(self.word().text)
            while True:
                tok = self.next()
                if tok.text == ")":
                    break
                if tok.text != ",":
                    raise BifError(f"expected ',' or ')', found {tok.text!r}", tok.line, tok.column)
                parents.append(self.word().text)
        elif tok.text != ")":
            raise BifError(f"expected '|' or ')', found {tok.text!r}", tok.line, tok.column)
        self.expect("{")
        rows: list[tuple[tuple[str, ...] | None, list[float], _Token]] = []
        while True:
            tok = self.next()
            if tok.text == "}":
                break
            if tok.text == "table":
                rows.append((None, self.numbers_until_semicolon(), tok))
            elif tok.text == "default":
                rows.append((("*default*",), self.numbers_until_semicolon(), tok))
            elif tok.text == "property":
                self.skip_property()
            elif tok.text == "(":
                config = [self.word().text]
                while True:
                    sep = self.next()
                    if sep.text == ")":
                        break
                    if sep.text != ",":
                        raise BifError(f"expected ',' or ')', found {sep.text!r}", sep.line, sep.column)
                    config.append(self.word().text)
                rows.append((tuple(config), self.numbers_until_semicolon(), tok))
            else:
                raise BifError(f"unexpected {tok.text!r} in probability block", tok.line, tok.column)
        return child, tuple(parents), rows, start


def parse_bif_document(text: str) -> BifDocument:
    return _BifParser(text).parse()


def parse_bif(text: str) -> BayesNet:
    """Build a :class:`BayesNet` from BIF text.

    Supports discrete variables, ``table`` rows, per-configuration rows and
    ``default`` rows. A ``table`` for a node with parents lists the child
    state as the slowest index. Rows within 1e-4 of unit sum are
    renormalised; the names of those variables are kept in ``renormalized``.
    """
    doc = parse_bif_document(text)
    index = {v.name: i for i, v in enumerate(doc.variables)}
    variables = doc.variables
    n = len(variables)
    if n == 0:
        raise BifError("document declares no variables")
    tables: dict[int, Cpt] = {}
    renormalized = []
    edges = []
    for child_tok, parents, rows, start in doc.probability_blocks:
        if child_tok.text not in index:
            raise BifError(f"probability block for undeclared variable {child_tok.text!r}", child_tok.line, child_tok.column)
        child = index[child_tok.text]
        if child in tables:
            raise BifError(f"duplicate probability block for {child_tok.text!r}", child_tok.line, child_tok.column)
        parent_idx = []
        for p in parents:
            if p not in index:
                raise BifError(f"undeclared parent {p!r} of {child_tok.text!r}", start.line, start.column)
            parent_idx.append(index[p])
        if len(set(parent_idx)) != len(parent_idx) or child in parent_idx:
            raise BifError(f"bad parent list for {child_tok.text!r}", start.line, start.column)
        r = variables[child].cardinality
        pcards = [variables[p].cardinality for p in parent_idx]
        q = int(np.prod(pcards)) if pcards else 1
        strides = config_strides(pcards) if pcards else np.array([], dtype=np.int64)
        table = np.full((q, r), np.nan)
        default = None
        for config, values, tok in rows:
            if config is None:
                if len(values) != q * r:
                    raise BifError(
                        f"table for {child_tok.text!r} has {len(values)} entries, expected {q * r}", tok.line, tok.column
                    )
                table[:] = np.asarray(values).reshape(r, q).T
                continue
            if len(values) != r:
                raise BifError(
                    f"row for {child_tok.text!r} has {len(values)} entries, expected {r}", tok.line, tok.column
                )
            if config == ("*default*",):
                default = values
                continue
            if len(config) != len(parent_idx):
                raise BifError(f"configuration {config} does not match the parent list", tok.line, tok.column)
            try:
                digits = [variables[p].state_index(s) for p, s in zip(parent_idx, config)]
            except KeyError as exc:
                raise BifError(str(exc.args[0]), tok.line, tok.column) from None
            table[int(np.dot(digits, strides))] = values
        missing = np.isnan(table).any(axis=1)
        if missing.any():
            if default is None:
                raise BifError(f"probability block for {child_tok.text!r} is incomplete", start.line, start.column)
            table[missing] = default
        if np.any(table < 0):
            raise BifError(f"negative probability for {child_tok.text!r}", start.line, start.column)
        sums = table.sum(axis=1)
        if np.any(np.abs(sums - 1.0) > ROW_SUM_TOLERANCE):
            raise BifError(
                f"a row for {child_tok.text!r} sums to {sums[np.argmax(np.abs(sums - 1))]:.6g}", start.line, start.column
            )
        if np.any(np.abs(sums - 1.0) > 1e-12):
            renormalized.append(variables[child].name)
        table = table / sums[:, None]
        tables[child] = Cpt(child, tuple(parent_idx), table)
        edges.extend((p, child) for p in parent_idx)
    for i, v in enumerate(variables):
        if i not in tables:
            raise BifError(f"variable {v.name!r} has no probability block")
    dag = Dag.from_edges(n, edges)
    return BayesNet(dag, tuple(variables), tuple(tables[i] for i in range(n)), doc.network_name, tuple(renormalized))


def read_bif(path: str | os.PathLike) -> BayesNet:
    text = Path(path).read_text(encoding="utf-8")
    bn = parse_bif(text)
    if bn.name in ("", "unknown"):
        bn = BayesNet(bn.dag, bn.variables, bn.cpts, Path(path).stem, bn.renormalized)
    return bn


def load_network(name: str) -> BayesNet:
    """One of the bundled benchmark networks: asia, child, alarm, insurance."""
    key = name.lower()
    if key not in BUILTIN_NETWORKS:
        raise KeyError(f"unknown network {name!r}; bundled: {', '.join(BUILTIN_NETWORKS)}")
    text = resources.files("qbn").joinpath("data").joinpath(f"{key}.bif").read_text(encoding="utf-8")
    bn = parse_bif(text)
    return BayesNet(bn.dag, bn.variables, bn.cpts, key, bn.renormalized)


def resolve_network(source: str) -> BayesNet:
    """A bundled network name or a path to a BIF file."""
    if source.lower() in BUILTIN_NETWORKS and not Path(source).exists():
        return load_network(source)
    return read_bif(source)


# --- CSV datasets ----------------------------------------------------------


def _open_text(target, mode: str):
    if hasattr(target, "write") or hasattr(target, "read"):
        return _nullcontext(target)
    return open(target, mode, encoding="utf-8", newline="")


class _nullcontext:
    def __init__(self, obj):
        self.obj = obj

    def __enter__(self):
        return self.obj

    def __exit__(self, *exc):
        return False


def write_dataset_csv(ds: Dataset, destination: str | os.PathLike | IO[str]) -> None:
    with _open_text(destination, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([v.name for v in ds.variables])
        states = [v.state_names for v in ds.variables]
        for row in ds.rows.tolist():
            writer.writerow([states[j][s] for j, s in enumerate(row)])


def read_dataset_csv(source: str | os.PathLike | IO[str], variables: Sequence[VariableSpec]) -> Dataset:
    """Read a CSV whose header names the variables and whose cells are state names.

    Columns may appear in any order; they are mapped onto ``variables``.
    """
    with _open_text(source, "r") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("CSV input is empty (no header row)") from None
        by_name = {v.name: j for j, v in enumerate(variables)}
        if sorted(header) != sorted(by_name) or len(header) != len(variables):
            raise ValueError(
                f"CSV columns {header} do not match variables {[v.name for v in variables]}"
            )
        order = [by_name[h] for h in header]
        lookup = [{s: k for k, s in enumerate(variables[j].state_names)} for j in order]
        rows = []
        for r, record in enumerate(reader, start=1):
            if len(record) != len(header):
                raise ValueError(f"row {r}: expected {len(header)} cells, found {len(record)}")
            out = [0] * len(variables)
            for c, cell in enumerate(record):
                try:
                    out[order[c]] = lookup[c][cell]
                except KeyError:
                    raise ValueError(
                        f"row {r}, column {header[c]!r}: unknown state {cell!r}"
                    ) from None
            rows.append(out)
    data = np.array(rows, dtype=np.int64).reshape(len(rows), len(variables))
    return Dataset(tuple(variables), data)


def infer_variables(source: str | os.PathLike) -> list[VariableSpec]:
    """Variables from a CSV alone: states are the sorted distinct cell values."""
    with open(source, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        states: list[set[str]] = [set() for _ in header]
        for record in reader:
            for c, cell in enumerate(record):
                states[c].add(cell)
    out = []
    for name, seen in zip(header, states):
        values = sorted(seen)
        while len(values) < 2:
            values.append(f"__unseen{len(values)}")
        out.append(VariableSpec(name, len(values), tuple(values)))
    return out


# --- graphs, priors, logs --------------------------------------------------


def dump_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def graph_to_dict(dag: Dag, names: Sequence[str]) -> dict:
    return {"nodes": list(names), "edges": [[names[t], names[h]] for t, h in dag.sorted_edges()]}


def graph_from_dict(obj: dict, names: Sequence[str] | None = None) -> Dag:
    nodes = list(obj["nodes"])
    if names is not None and sorted(nodes) != sorted(names):
        raise ValueError("graph nodes do not match the variables")
    index = {nm: i for i, nm in enumerate(names if names is not None else nodes)}
    return Dag.from_edges(len(index), [(index[t], index[h]) for t, h in obj["edges"]])


def write_graph(dag: Dag, names: Sequence[str], destination: str | os.PathLike) -> None:
    Path(destination).write_text(dump_json(graph_to_dict(dag, names)), encoding="utf-8")


def read_graph(source: str | os.PathLike, names: Sequence[str] | None = None) -> Dag:
    return graph_from_dict(json.loads(Path(source).read_text(encoding="utf-8")), names)


def priors_to_list(priors: Iterable[tuple[int, int]], names: Sequence[str]) -> list[dict]:
    return [{"tail_name": names[t], "head_name": names[h]} for t, h in priors]


def priors_from_list(items: list[dict], names: Sequence[str]) -> PriorSet:
    index = {nm: i for i, nm in enumerate(names)}
    edges = []
    for k, item in enumerate(items):
        if not isinstance(item, dict) or set(item) != {"tail_name", "head_name"}:
            raise ValueError(f"prior #{k} must be an object with tail_name and head_name")
        for key in ("tail_name", "head_name"):
            if item[key] not in index:
                raise ValueError(f"prior #{k}: unknown variable {item[key]!r}")
        edges.append(DirectedEdge(index[item["tail_name"]], index[item["head_name"]]))
    return PriorSet(tuple(edges))


def read_priors(source: str | os.PathLike, names: Sequence[str]) -> PriorSet:
    text = Path(source).read_text(encoding="utf-8").strip()
    return priors_from_list(json.loads(text) if text else [], names)


def write_priors(priors: Iterable[tuple[int, int]], names: Sequence[str], destination: str | os.PathLike) -> None:
    Path(destination).write_text(dump_json(priors_to_list(priors, names)), encoding="utf-8")


# --- experiment configuration ----------------------------------------------

_PRIOR_CLASSES = [c.value for c in PriorClass if c is not PriorClass.CORRECT] + ["RD", "RI", "Ind", "Irr"]

CONFIG_SCHEMA: dict = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["network"],
    "properties": {
        "network": {
            "oneOf": [
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["bif"],
                    "properties": {"bif": {"type": "string", "minLength": 1}},
                },
                {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["random"],
                    "properties": {
                        "random": {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["nodes", "edges"],
                            "properties": {
                                "nodes": {"type": "integer", "minimum": 2},
                                "edges": {"type": "integer", "minimum": 0},
                                "cardinality": {"type": "integer", "minimum": 2},
                                "concentration": {"type": "number", "exclusiveMinimum": 0},
                            },
                        }
                    },
                },
            ]
        },
        "sample_size": {"type": "integer", "minimum": 1},
        "priors": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "n_correct": {"type": "integer", "minimum": 0},
                    "n_wrong": {"type": "integer", "minimum": 0},
                    "wrong_type": {"enum": _PRIOR_CLASSES + [None]},
                },
            },
        },
        "repetitions": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "methods": {
            "type": "array",
            "minItems": 1,
            "uniqueItems": True,
            "items": {"enum": ["hc", "quasi-hc"]},
        },
        "detector": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "iteration_limit": {"type": "integer", "minimum": 1},
                "suspicion_threshold": {"type": "integer", "minimum": 0},
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "max_iterations": {"type": "integer", "minimum": 1},
                "max_parents": {"type": ["integer", "null"], "minimum": 0},
            },
        },
    },
}


class ConfigError(ValueError):
    def __init__(self, message: str, pointer: str):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


@dataclass(frozen=True)
class PriorSpec:
    n_correct: int = 0
    n_wrong: int = 0
    wrong_type: PriorClass | None = None

    @property
    def label(self) -> str:
        kind = self.wrong_type.short if self.wrong_type else "any"
        return f"({self.n_correct},{self.n_wrong})" + (f" {kind}" if self.n_wrong else "")

    def to_dict(self) -> dict:
        return {
            "n_correct": self.n_correct,
            "n_wrong": self.n_wrong,
            "wrong_type": self.wrong_type.value if self.wrong_type else None,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    network: dict
    sample_size: int | None = None
    priors: tuple[PriorSpec, ...] = (PriorSpec(),)
    repetitions: int = 1
    seed: int = 0
    methods: tuple[str, ...] = ("hc", "quasi-hc")
    iteration_limit: int = 10
    suspicion_threshold: int = 0
    max_iterations: int = 10_000
    max_parents: int | None = None

    @property
    def network_label(self) -> str:
        if "bif" in self.network:
            return Path(self.network["bif"]).stem.lower()
        r = self.network["random"]
        return f"random-{r['nodes']}-{r['edges']}"

    def effective_sample_size(self) -> int:
        if self.sample_size is not None:
            return self.sample_size
        if "bif" in self.network:
            return DEFAULT_SAMPLE_SIZES.get(self.network_label, 2000)
        return 250 * self.network["random"]["nodes"]

    def to_dict(self) -> dict:
        return {
            "network": self.network,
            "sample_size": self.effective_sample_size(),
            "priors": [p.to_dict() for p in self.priors],
            "repetitions": self.repetitions,
            "seed": self.seed,
            "methods": list(self.methods),
            "detector": {"iteration_limit": self.iteration_limit, "suspicion_threshold": self.suspicion_threshold},
            "search": {"max_iterations": self.max_iterations, "max_parents": self.max_parents},
        }


def _pointer(path: Iterable[Any]) -> str:
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in path)


def config_from_dict(obj: Any) -> ExperimentConfig:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(obj), key=lambda e: (len(e.absolute_path), list(map(str, e.absolute_path))))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise ConfigError(err.message, _pointer(err.absolute_path))
    network = obj["network"]
    if "random" in network:
        r = network["random"]
        n, m = r["nodes"], r["edges"]
        if m > n * (n - 1) // 2:
            raise ConfigError(f"{m} edges do not fit a DAG on {n} nodes", "/network/random/edges")
        network = {"random": {"nodes": n, "edges": m, "cardinality": r.get("cardinality", 2),
                              "concentration": float(r.get("concentration", 1.0))}}
    priors = tuple(
        PriorSpec(
            p.get("n_correct", 0),
            p.get("n_wrong", 0),
            PriorClass.parse(p["wrong_type"]) if p.get("wrong_type") else None,
        )
        for p in obj.get("priors", [{}])
    )
    det = obj.get("detector", {})
    search = obj.get("search", {})
    return ExperimentConfig(
        network=network,
        sample_size=obj.get("sample_size"),
        priors=priors,
        repetitions=obj.get("repetitions", 1),
        seed=obj.get("seed", 0),
        methods=tuple(obj.get("methods", ["hc", "quasi-hc"])),
        iteration_limit=det.get("iteration_limit", 10),
        suspicion_threshold=det.get("suspicion_threshold", 0),
        max_iterations=search.get("max_iterations", 10_000),
        max_parents=search.get("max_parents"),
    )


def parse_experiment_config(text: str) -> ExperimentConfig:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} at line {exc.lineno}", "") from None
    return config_from_dict(obj)


def write_report(report: Any, destination: str | os.PathLike | IO[str]) -> None:
    """Serialise with sorted keys so identical reports are byte-identical."""
    text = dump_json(report)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")


def report_to_text(report: Any) -> str:
    buf = _io.StringIO()
    write_report(report, buf)
    return buf.getvalue()
