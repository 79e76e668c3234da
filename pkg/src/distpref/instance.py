"""Instance files (schema version 1): parsing, validation and construction.

Validation reports every problem it finds, not just the first. Structural
problems are checked with jsonschema first; label references and value
domains are checked afterwards on a structurally valid document.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from .core import MAX_STUDENTS, DistributionalPreference, GroundSet, PriorityRanking
from .matroid import PartitionMatroid, TransversalMatroid, VectorMatroid
from .mechanism import Market, School
from .preferences import (
    Bounds,
    DiversityIndex,
    TypeAssignment,
    additive_preference,
    dichotomous_bounds_preference,
    diversity_preference,
    indifferent_preference,
    matroid_rank_preference,
    pointwise_preference,
    soft_bounds_preference,
)

SCHEMA_VERSION = 1


class InstanceError(ValueError):
    """Raised with every collected problem in ``errors``."""

    def __init__(self, errors: list[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class SchemaError(InstanceError):
    pass


class DanglingReferenceError(InstanceError):
    pass


class DomainError(InstanceError):
    pass


_number = {"oneOf": [{"type": "number"}, {"type": "string", "pattern": r"^-?\d+(/\d+)?$"}]}
_values = {"oneOf": [
    {"type": "array", "items": _number},
    {"type": "object", "additionalProperties": _number},
]}
_labels = {"type": "array", "items": {"type": "string"}}


def _family(name, props=None, required=()):
    props = dict(props or {})
    props["family"] = {"const": name}
    return {
        "type": "object",
        "properties": props,
        "required": ["family", *required],
        "additionalProperties": False,
    }


_bounds = {"type": "object", "additionalProperties": {
    "type": "array", "items": {"type": "integer"}, "minItems": 2, "maxItems": 2}}

PREFERENCE_SCHEMA = {"oneOf": [
    _family("additive", {"values": _values}, ["values"]),
    _family("pointwise", {"values": _values}, ["values"]),
    _family("indifferent"),
    _family("dichotomous", {"bounds": _bounds}, ["bounds"]),
    _family("soft", {"bounds": _bounds, "penalty": {"type": "integer"}}, ["bounds"]),
    _family("diversity", {
        "index": {"enum": ["log", "linear", "table"]},
        "coefficients": {"type": "object", "additionalProperties": _number},
        "table": {"type": "array", "items": {
            "type": "object",
            "properties": {"counts": {"type": "array", "items": {"type": "integer"}}, "value": _number},
            "required": ["counts", "value"],
            "additionalProperties": False,
        }},
    }, ["index"]),
    _family("partition", {"capacities": {"type": "object", "additionalProperties": {"type": "integer"}}},
            ["capacities"]),
    _family("transversal", {"slots": {"type": "array", "items": _labels}}, ["slots"]),
    _family("vector", {"vectors": {"oneOf": [
        {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
        {"type": "object", "additionalProperties": {"type": "array", "items": {"type": "integer"}}},
    ]}}, ["vectors"]),
]}

SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "description": {"type": "string"},
        "students": {"oneOf": [
            _labels,
            {"type": "object", "properties": {"count": {"type": "integer"}, "labels": _labels},
             "required": ["count"], "additionalProperties": False},
        ]},
        "types": {"type": "object", "properties": {
            "names": _labels,
            "assignment": {"type": "object", "additionalProperties": {"type": "string"}},
        }, "required": ["names", "assignment"], "additionalProperties": False},
        "schools": {"type": "array", "items": {
            "type": "object",
            "properties": {
                "id": {"type": "string"},
                "capacity": {"type": "integer"},
                "priority": {"oneOf": [{"const": "identity"}, _labels]},
                "preference": PREFERENCE_SCHEMA,
            },
            "required": ["id", "capacity", "preference"],
            "additionalProperties": False,
        }},
        "student_preferences": {"type": "object", "additionalProperties": _labels},
    },
    "required": ["schema_version", "students", "schools"],
    "additionalProperties": False,
}


@dataclass
class SchoolSpec:
    id: str
    capacity: int
    priority: PriorityRanking
    preference: DistributionalPreference
    family: str


@dataclass
class Instance:
    ground: GroundSet
    types: TypeAssignment | None
    schools: list[SchoolSpec]
    student_preferences: list[tuple[int, ...]] | None
    description: str = ""

    def school_index(self, school_id: str) -> int:
        for i, c in enumerate(self.schools):
            if c.id == school_id:
                return i
        raise KeyError(f"unknown school {school_id!r}")

    def school(self, school_id: str | None = None) -> SchoolSpec:
        """Look up a school; ``None`` is accepted when there is exactly one."""
        if school_id is None:
            if len(self.schools) != 1:
                raise KeyError("instance has several schools; pick one with --school")
            return self.schools[0]
        return self.schools[self.school_index(school_id)]

    def market(self) -> Market:
        if self.student_preferences is None:
            raise KeyError("instance has no student_preferences")
        schools = [School(c.id, c.capacity, c.priority, c.preference) for c in self.schools]
        return Market(self.ground, schools, self.student_preferences)


def _num(x):
    if isinstance(x, str):
        return Fraction(x)
    return x


def _schema_messages(doc) -> list[str]:
    v = jsonschema.Draft202012Validator(SCHEMA)
    out = []
    for e in sorted(v.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path))):
        where = "/".join(map(str, e.absolute_path)) or "<root>"
        # oneOf failures are easier to read via the family name
        msg = e.message
        if e.validator == "oneOf" and isinstance(e.instance, dict) and "family" in e.instance:
            msg = f"invalid or unknown preference family {e.instance.get('family')!r} (or unknown fields)"
        out.append(f"{where}: {msg}")
    return out


class _Builder:
    def __init__(self, doc):
        self.doc = doc
        self.refs: list[str] = []
        self.domain: list[str] = []

    def build(self) -> Instance | None:
        ground = self._ground()
        if ground is None:
            return None
        types = self._types(ground)
        schools = []
        ids = set()
        for i, c in enumerate(self.doc["schools"]):
            where = f"schools/{i}"
            if c["id"] in ids:
                self.domain.append(f"{where}: duplicate school id {c['id']!r}")
            ids.add(c["id"])
            if c["capacity"] < 1:
                self.domain.append(f"{where}: capacity q must be at least 1 (got {c['capacity']})")
            pi = self._priority(ground, c.get("priority", "identity"), where)
            pref = self._preference(ground, types, c["preference"], c["capacity"], where)
            if pi is not None and pref is not None and c["capacity"] >= 1:
                schools.append(SchoolSpec(c["id"], c["capacity"], pi, pref, c["preference"]["family"]))
        if not self.doc["schools"]:
            self.domain.append("schools: at least one school is required")
        prefs = self._student_prefs(ground, ids)
        if self.refs or self.domain:
            return None
        return Instance(ground, types, schools, prefs, self.doc.get("description", ""))

    def _ground(self):
        st = self.doc["students"]
        if isinstance(st, list):
            labels = st
        else:
            labels = st.get("labels")
            n = st["count"]
            if labels is None:
                labels = [f"s{i + 1}" for i in range(max(n, 0))]
            elif len(labels) != n:
                self.domain.append(f"students: count {n} does not match {len(labels)} labels")
        if not labels:
            self.domain.append("students: the student list is empty")
            return None
        if len(labels) > MAX_STUDENTS:
            self.domain.append(f"students: at most {MAX_STUDENTS} students are supported")
            return None
        if len(set(labels)) != len(labels):
            self.domain.append("students: labels must be distinct")
            return None
        return GroundSet(len(labels), tuple(labels))

    def _student(self, ground, label, where):
        try:
            return ground.index(label)
        except (KeyError, ValueError):
            self.refs.append(f"{where}: unknown student {label!r}")
            return None

    def _types(self, ground):
        t = self.doc.get("types")
        if t is None:
            return None
        names = t["names"]
        if len(set(names)) != len(names) or not names:
            self.domain.append("types/names: type names must be distinct and non-empty")
            return None
        tau = [None] * ground.n
        for label, tname in t["assignment"].items():
            s = self._student(ground, label, "types/assignment")
            if tname not in names:
                self.refs.append(f"types/assignment/{label}: unknown type {tname!r}")
            elif s is not None:
                tau[s] = names.index(tname)
        missing = [ground.label(s) for s in range(ground.n) if tau[s] is None]
        if missing:
            absent = [m for m in missing if m not in t["assignment"]]
            if absent:
                self.domain.append(f"types/assignment: no type for students {absent}")
            return None
        return TypeAssignment(tuple(tau), len(names), tuple(names))

    def _priority(self, ground, spec, where):
        if spec == "identity":
            return PriorityRanking.identity(ground.n)
        order = [self._student(ground, x, f"{where}/priority") for x in spec]
        if None in order:
            return None
        if sorted(order) != list(range(ground.n)):
            self.domain.append(f"{where}/priority: must list every student exactly once")
            return None
        return PriorityRanking(order)

    def _vector(self, ground, values, where):
        if isinstance(values, list):
            if len(values) != ground.n:
                self.domain.append(f"{where}: expected {ground.n} values, got {len(values)}")
                return None
            return [_num(v) for v in values]
        out = [None] * ground.n
        for label, v in values.items():
            s = self._student(ground, label, where)
            if s is not None:
                out[s] = _num(v)
        missing = [ground.label(s) for s in range(ground.n) if out[s] is None]
        if missing:
            self.domain.append(f"{where}: missing values for {missing}")
            return None
        return out

    def _need_types(self, types, where):
        if types is None and "types" not in self.doc:
            self.domain.append(f"{where}: this family requires a top-level 'types' block")
        return types

    def _per_type(self, mapping, where, default):
        names = self.doc["types"]["names"]
        out = [default] * len(names)
        for tname, v in mapping.items():
            if tname not in names:
                self.refs.append(f"{where}: unknown type {tname!r}")
            else:
                out[names.index(tname)] = v
        return out

    def _bounds(self, spec, where):
        pairs = self._per_type(spec, f"{where}/bounds", None)
        names = self.doc["types"]["names"]
        floors, ceilings = [], []
        ok = True
        for tname, p in zip(names, pairs):
            if p is None:
                self.domain.append(f"{where}/bounds: no bounds for type {tname!r}")
                ok = False
                continue
            r, c = p
            if r < 0 or c < 0:
                self.domain.append(f"{where}/bounds/{tname}: bounds must be non-negative")
                ok = False
            if r > c:
                self.domain.append(f"{where}/bounds/{tname}: floor {r} exceeds ceiling {c} (need r_t <= p_t)")
                ok = False
            floors.append(r)
            ceilings.append(c)
        return Bounds(tuple(floors), tuple(ceilings)) if ok else None

    def _preference(self, ground, types, spec, q, where):
        fam = spec["family"]
        where = f"{where}/preference"
        if fam in ("additive", "pointwise"):
            vals = self._vector(ground, spec["values"], f"{where}/values")
            if vals is None:
                return None
            return additive_preference(vals) if fam == "additive" else pointwise_preference(vals)
        if fam == "indifferent":
            return indifferent_preference(ground.n)
        if fam == "transversal":
            slots = []
            for k, slot in enumerate(spec["slots"]):
                m = 0
                for label in slot:
                    s = self._student(ground, label, f"{where}/slots/{k}")
                    if s is not None:
                        m |= 1 << s
                slots.append(m)
            return matroid_rank_preference(TransversalMatroid(ground.n, slots))
        if fam == "vector":
            raw = spec["vectors"]
            if isinstance(raw, dict):
                vecs = [None] * ground.n
                for label, v in raw.items():
                    s = self._student(ground, label, f"{where}/vectors")
                    if s is not None:
                        vecs[s] = v
                if any(v is None for v in vecs):
                    self.domain.append(f"{where}/vectors: every student needs a vector")
                    return None
            else:
                vecs = raw
                if len(vecs) != ground.n:
                    self.domain.append(f"{where}/vectors: expected {ground.n} vectors")
                    return None
            if len({len(v) for v in vecs}) != 1:
                self.domain.append(f"{where}/vectors: vectors must share one length")
                return None
            return matroid_rank_preference(VectorMatroid(vecs))
        # type-based families
        if self._need_types(types, where) is None:
            return None
        if fam in ("dichotomous", "soft"):
            b = self._bounds(spec["bounds"], where)
            if b is None:
                return None
            if fam == "dichotomous":
                return dichotomous_bounds_preference(types, b)
            pen = spec.get("penalty")
            if pen is not None and pen < 1:
                self.domain.append(f"{where}/penalty: must be positive")
                return None
            return soft_bounds_preference(types, b, q, pen)
        if fam == "partition":
            caps = self._per_type(spec["capacities"], f"{where}/capacities", 0)
            if any(k < 0 for k in caps):
                self.domain.append(f"{where}/capacities: must be non-negative")
                return None
            return matroid_rank_preference(PartitionMatroid(types.tau, caps))
        if fam == "diversity":
            kind = spec["index"]
            if kind == "log":
                index = DiversityIndex.log(q)
            elif kind == "linear":
                if "coefficients" not in spec:
                    self.domain.append(f"{where}: linear index needs 'coefficients'")
                    return None
                coefs = self._per_type(spec["coefficients"], f"{where}/coefficients", 0)
                index = DiversityIndex.linear([_num(c) for c in coefs], q)
            else:
                if "table" not in spec:
                    self.domain.append(f"{where}: table index needs 'table'")
                    return None
                table = {}
                for row in spec["table"]:
                    if len(row["counts"]) != types.k:
                        self.domain.append(f"{where}/table: counts {row['counts']} need {types.k} entries")
                        return None
                    table[tuple(row["counts"])] = _num(row["value"])
                index = DiversityIndex.table(table, q)
            return diversity_preference(types, index)
        raise AssertionError(fam)  # pragma: no cover - excluded by the schema

    def _student_prefs(self, ground, ids):
        sp = self.doc.get("student_preferences")
        if sp is None:
            return None
        order = [c["id"] for c in self.doc["schools"]]
        out = [()] * ground.n
        for label, lst in sp.items():
            s = self._student(ground, label, "student_preferences")
            where = f"student_preferences/{label}"
            bad = [x for x in lst if x not in ids]
            for x in bad:
                self.refs.append(f"{where}: unknown school {x!r}")
            if len(set(lst)) != len(lst):
                self.domain.append(f"{where}: duplicate schools")
            if s is not None and not bad:
                out[s] = tuple(order.index(x) for x in lst)
        return out


def instance_from_dict(doc) -> Instance:
    errs = _schema_messages(doc)
    if errs:
        raise SchemaError(errs)
    b = _Builder(doc)
    inst = b.build()
    if b.refs:
        raise DanglingReferenceError(b.refs + b.domain)
    if b.domain:
        raise DomainError(b.domain)
    assert inst is not None
    return inst


def parse_instance(text: str) -> Instance:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError([f"not valid JSON: {e}"]) from None
    return instance_from_dict(doc)


def bundled_instances() -> list[str]:
    return sorted(p.name for p in resources.files("distpref").joinpath("data").iterdir()
                  if p.name.endswith(".json"))


def load_instance(ref: str | Path) -> Instance:
    """Load from a path, or by the file name of a bundled instance."""
    p = Path(ref)
    if p.exists():
        return parse_instance(p.read_text())
    name = p.name if p.name.endswith(".json") else p.name + ".json"
    res = resources.files("distpref").joinpath("data").joinpath(name)
    if res.is_file():
        return parse_instance(res.read_text())
    raise FileNotFoundError(f"no instance file or bundled instance named {str(ref)!r}")
