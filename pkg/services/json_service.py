import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List

import config
from services.adams_service import AObject, AdamsService, BObject, Context
from services.complex_service import FLAVOR_A, FLAVOR_B, TwistedComplex
from services.homalg_service import HomalgService, ShortExactSequence
from services.linalg_service import FPModule, PLocalMatrix
from services.q_service import DiagramData
from utils.errors import ParseError, PreconditionError

logger = logging.getLogger(__name__)

KINDS = ("bobject", "aobject", "pair", "ses", "ladder", "complex", "complex_pair", "diagram")


@dataclass(frozen=True, eq=False)
class InstanceFile:
    context: Context
    kind: str
    payload: Any
    schema_version: str = config.SCHEMA_VERSION


class JSONService:
    """Reads and writes instance files: {schema_version, context, kind, payload}"""

    def __init__(self):
        self.adams = AdamsService()
        self.homalg = HomalgService()

    # reading

    def load(self, path: str) -> InstanceFile:
        try:
            with open(path, encoding="utf-8") as handle:
                text = handle.read()
        except OSError as e:
            raise ParseError(f"Cannot read {path}: {e}")
        return self.loads(text)

    def loads(self, text: str) -> InstanceFile:
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"Invalid JSON: {e}")
        if not isinstance(document, dict):
            raise ParseError("Instance file must be a JSON object")
        version = document.get("schema_version")
        if version != config.SCHEMA_VERSION:
            raise ParseError(f"Unsupported schema_version {version!r}, expected {config.SCHEMA_VERSION!r}")
        kind = document.get("kind")
        if kind not in KINDS:
            raise ParseError(f"Unknown kind {kind!r}")
        context = self._read_context(document.get("context"))
        try:
            payload = getattr(self, f"_read_{kind}")(context, document["payload"])
        except (KeyError, TypeError, IndexError, ValueError) as e:
            raise ParseError(f"Malformed {kind} payload: {e!r}")
        logger.debug(f"Loaded {kind} instance at p={context.p}")
        return InstanceFile(context, kind, payload)

    def _read_context(self, data) -> Context:
        if not isinstance(data, dict) or not isinstance(data.get("p"), int) or not isinstance(data.get("g"), int):
            raise ParseError("context must be an object with integer p and g")
        return Context(data["p"], data["g"])

    def read_matrix(self, p: int, data: List, rows: int, cols: int, name: str) -> PLocalMatrix:
        """A rows×cols matrix written as a list of rows of scalar strings"""
        if not isinstance(data, list) or len(data) != rows or \
                any(not isinstance(r, list) or len(r) != cols for r in data):
            raise ParseError(f"{name} must be a {rows}x{cols} list of rows")
        return PLocalMatrix.from_rows(p, data, cols)

    def _read_context_fields(self, context: Context, data: Dict) -> None:
        prime, generator = data["prime"], data["generator"]
        if not isinstance(prime, int) or not isinstance(generator, int):
            raise ParseError("prime and generator must be integers")
        if (prime, generator) != (context.p, context.g):
            raise PreconditionError(f"Object uses p={prime}, g={generator} inside a p={context.p} file",
                                    clause="context.mismatch")

    def _read_bobject(self, context: Context, data: Dict) -> BObject:
        if not isinstance(data, dict):
            raise ParseError("BObject must be a JSON object")
        p = context.p
        self._read_context_fields(context, data)
        n = data["ngens"]
        if not isinstance(n, int) or n < 0:
            raise ParseError(f"ngens must be a nonnegative integer, got {n!r}")
        raw = data["relations"]
        cols = len(raw[0]) if isinstance(raw, list) and raw and isinstance(raw[0], list) else 0
        relations = self.read_matrix(p, raw, n, cols, "relations")
        psi = self.read_matrix(p, data["psi"], n, n, "psi")
        weights = data.get("weights", [])
        if not all(isinstance(w, int) for w in weights):
            raise ParseError("weights must be integers")
        return BObject(context, FPModule(relations), psi, frozenset(weights))

    def _read_aobject(self, context: Context, data: Dict) -> AObject:
        comps = data["components"]
        if len(comps) != context.period:
            raise ParseError(f"AObject needs {context.period} components")
        return AObject(context, tuple(self.adams.zero_b(context) if c is None else self._read_bobject(context, c)
                                      for c in comps))

    def _read_pair(self, context: Context, data: Dict) -> Dict[str, BObject]:
        return {"source": self._read_bobject(context, data["source"]),
                "target": self._read_bobject(context, data["target"])}

    def _read_ses(self, context: Context, data: Dict) -> ShortExactSequence:
        p = context.p
        sub = self._read_bobject(context, data["sub"])
        middle = self._read_bobject(context, data["middle"])
        quotient = self._read_bobject(context, data["quotient"])
        return ShortExactSequence(
            sub=sub,
            middle=middle,
            quotient=quotient,
            inclusion=self.read_matrix(p, data["inclusion"], middle.ngens, sub.ngens, "inclusion"),
            projection=self.read_matrix(p, data["projection"], quotient.ngens, middle.ngens, "projection"),
        )

    def _read_ladder(self, context: Context, data: Dict) -> Dict[str, Any]:
        p = context.p
        top = self._read_ses(context, data["top"])
        bottom = self._read_ses(context, data["bottom"])
        f_b = self.read_matrix(p, data["f_b"], bottom.sub.ngens, top.sub.ngens, "f_b")
        f_g = self.read_matrix(p, data["f_g"], bottom.quotient.ngens, top.quotient.ngens, "f_g")
        return {"top": top, "bottom": bottom, "f_b": f_b, "f_g": f_g}

    def _read_complex(self, context: Context, data: Dict) -> TwistedComplex:
        p = context.p
        flavor = data["flavor"]
        if flavor == FLAVOR_B:
            window = tuple(self._read_bobject(context, w) for w in data["window"])
            n = len(window)
            if not (len(data["differentials"]) == len(data["alpha"]) == n):
                raise ParseError("window, differentials and alpha must have equal lengths")
            diffs = tuple(self.read_matrix(p, d, window[(i + 1) % n].ngens, window[i].ngens, f"d^{i}")
                          for i, d in enumerate(data["differentials"]))
            alpha = tuple(self.read_matrix(p, a, window[i].ngens, window[i].ngens, f"alpha^{i}")
                          for i, a in enumerate(data["alpha"]))
            return TwistedComplex(context, FLAVOR_B, window, diffs, alpha)
        if flavor == FLAVOR_A:
            if not (len(data["window"]) == len(data["differentials"]) == len(data["alpha"]) == 1):
                raise ParseError("C1-A complexes carry one AObject with one list of differentials and alpha")
            m = self._read_aobject(context, data["window"][0])
            raw_diffs, raw_alpha = data["differentials"][0], data["alpha"][0]
            if len(raw_diffs) != context.period or len(raw_alpha) != context.period:
                raise ParseError(f"C1-A complexes need {context.period} differentials and alpha components")
            comps = m.components
            diffs = tuple(self.read_matrix(p, d, comps[j - 1].ngens, comps[j].ngens, f"D_{j}")
                          for j, d in enumerate(raw_diffs))
            alpha = tuple(self.read_matrix(p, a, comps[j].ngens, comps[j].ngens, f"a_{j}")
                          for j, a in enumerate(raw_alpha))
            return TwistedComplex(context, FLAVOR_A, (m,), (diffs,), (alpha,))
        raise ParseError(f"Unknown complex flavor {flavor!r}")

    def _read_complex_pair(self, context: Context, data: Dict) -> List[TwistedComplex]:
        return [self._read_complex(context, data["first"]), self._read_complex(context, data["second"])]

    def _read_diagram(self, context: Context, data: Dict) -> DiagramData:
        p = context.p
        period = context.period
        g = [self._read_bobject(context, x) for x in data["g"]]
        b = [self._read_bobject(context, x) for x in data["b"]]
        sequences = [self._read_ses(context, x) for x in data["extensions"]]
        if not (len(g) == len(b) == len(data["pi"]) == len(sequences) == period):
            raise ParseError(f"DiagramData needs {period} entries of each kind")
        pi = [self.read_matrix(p, x, b[i].ngens, g[i].ngens, f"pi_{i}") for i, x in enumerate(data["pi"])]
        extensions = tuple(self.homalg.ext_class_of(s) for s in sequences)
        return DiagramData(context, tuple(g), tuple(b), tuple(pi), extensions)

    # writing

    def dumps(self, instance: InstanceFile) -> str:
        document = {
            "schema_version": instance.schema_version,
            "context": {"p": instance.context.p, "g": instance.context.g},
            "kind": instance.kind,
            "payload": getattr(self, f"_write_{instance.kind}")(instance.payload),
        }
        return json.dumps(document, sort_keys=True, ensure_ascii=False, indent=2) + "\n"

    def dump(self, instance: InstanceFile, path: str) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(self.dumps(instance))

    def write_matrix(self, m: PLocalMatrix) -> List[List[str]]:
        return m.to_strings()

    def _write_bobject(self, m: BObject) -> Dict:
        return {"prime": m.context.p, "generator": m.context.g, "ngens": m.ngens,
                "relations": self.write_matrix(m.relations), "psi": self.write_matrix(m.psi),
                "weights": sorted(m.weights)}

    def _write_aobject(self, a: AObject) -> Dict:
        return {"components": [None if c.ngens == 0 else self._write_bobject(c) for c in a.components]}

    def _write_pair(self, pair: Dict[str, BObject]) -> Dict:
        return {"source": self._write_bobject(pair["source"]), "target": self._write_bobject(pair["target"])}

    def _write_ses(self, ses: ShortExactSequence) -> Dict:
        return {
            "sub": self._write_bobject(ses.sub),
            "middle": self._write_bobject(ses.middle),
            "quotient": self._write_bobject(ses.quotient),
            "inclusion": self.write_matrix(ses.inclusion),
            "projection": self.write_matrix(ses.projection),
        }

    def _write_ladder(self, ladder: Dict[str, Any]) -> Dict:
        return {"top": self._write_ses(ladder["top"]), "bottom": self._write_ses(ladder["bottom"]),
                "f_b": self.write_matrix(ladder["f_b"]), "f_g": self.write_matrix(ladder["f_g"])}

    def _write_complex(self, c: TwistedComplex) -> Dict:
        if c.flavor == FLAVOR_A:
            return {
                "flavor": FLAVOR_A,
                "window": [self._write_aobject(c.window[0])],
                "differentials": [[self.write_matrix(d) for d in c.differentials[0]]],
                "alpha": [[self.write_matrix(a) for a in c.alpha[0]]],
            }
        return {
            "flavor": FLAVOR_B,
            "window": [self._write_bobject(w) for w in c.window],
            "differentials": [self.write_matrix(d) for d in c.differentials],
            "alpha": [self.write_matrix(a) for a in c.alpha],
        }

    def _write_complex_pair(self, pair: List[TwistedComplex]) -> Dict:
        return {"first": self._write_complex(pair[0]), "second": self._write_complex(pair[1])}

    def _write_diagram(self, d: DiagramData) -> Dict:
        return {
            "g": [self._write_bobject(x) for x in d.g_objects],
            "b": [self._write_bobject(x) for x in d.b_objects],
            "pi": [self.write_matrix(x) for x in d.pi],
            "extensions": [self._write_ses(d.realization(i)) for i in range(d.context.period)],
        }

    def write_object(self, m: BObject) -> Dict:
        """Public form used inside reports"""
        return self._write_bobject(m)

    def write_aobject(self, a: AObject) -> Dict:
        return self._write_aobject(a)

    def write_complex(self, c: TwistedComplex) -> Dict:
        return self._write_complex(c)

    def write_diagram(self, d: DiagramData) -> Dict:
        return self._write_diagram(d)

    def require_kind(self, instance: InstanceFile, *kinds: str) -> None:
        if instance.kind not in kinds:
            raise ParseError(f"Expected a {' or '.join(kinds)} file, got {instance.kind!r}")

    def same_context(self, *instances: InstanceFile) -> Context:
        first = instances[0].context
        for other in instances[1:]:
            if other.context != first:
                raise PreconditionError("Instance files use different contexts", clause="context.mismatch")
        return first
