"""Versioned JSON model and certificate files.

Model file::

    {"schema_version": 1,
     "system": {"n": 1, "bumpy": true, "curvature_pinched": false, "group_label": "trivial",
                "geodesics": [{"label": "c1", "initial_index": 2,
                               "blocks": [{"type": "rotation", "rho": "3/2 - 1/2*sqrt(2)"}, ...],
                               "type_tables": {"1": [1, 0]}}]}}

Block types: ``rotation`` (``rho``), ``n1`` (``lambda``, ``b``), ``n2``
(``rho``, ``nontrivial``) and ``hyperbolic`` (``sign``).  Unknown keys are
errors, and every error names the offending field path.
"""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from .iteration import GeodesicModel, mean_index, validate_model
from .jump import JumpCertificate
from .loop_homology import GeodesicSystem
from .normal_form import N1, N2, Hyperbolic, NormalFormDecomposition, Rotation
from .scalar import Surd, format_scalar, parse_scalar

__all__ = [
    "SCHEMA_VERSION",
    "SchemaError",
    "load_system",
    "system_from_dict",
    "system_to_dict",
    "dump_system",
    "load_certificate",
    "certificate_from_dict",
    "certificate_to_dict",
    "dump_certificate",
    "fixture_path",
    "resolve_path",
]

SCHEMA_VERSION = 1
FIXTURES = Path(__file__).with_name("fixtures")


class SchemaError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def resolve_path(path: Union[str, Path]) -> Path:
    """``path`` itself, or the shipped fixture with the same file name."""
    p = Path(path)
    if p.exists():
        return p
    alt = FIXTURES / p.name
    if alt.exists():
        return alt
    raise FileNotFoundError(f"no such file: {path}")


def _read_json(path: Union[str, Path]) -> Any:
    p = resolve_path(path)
    text = p.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError("", f"{p}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _keys(obj, path: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise SchemaError(path, f"expected an object, got {type(obj).__name__}")
    for k in obj:
        if k not in required and k not in optional:
            raise SchemaError(f"{path}.{k}" if path else k, "unknown field")
    for k in sorted(required):
        if k not in obj:
            raise SchemaError(f"{path}.{k}" if path else k, "missing field")


def _int(obj, path: str, minimum=None) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise SchemaError(path, f"expected an integer, got {obj!r}")
    if minimum is not None and obj < minimum:
        raise SchemaError(path, f"must be >= {minimum}, got {obj}")
    return obj


def _bool(obj, path: str) -> bool:
    if not isinstance(obj, bool):
        raise SchemaError(path, f"expected true or false, got {obj!r}")
    return obj


def _str(obj, path: str) -> str:
    if not isinstance(obj, str):
        raise SchemaError(path, f"expected a string, got {obj!r}")
    return obj


def _scalar(obj, path: str) -> Surd:
    if isinstance(obj, bool):
        raise SchemaError(path, f"expected a scalar, got {obj!r}")
    if isinstance(obj, int):
        return Surd(obj)
    if not isinstance(obj, str):
        raise SchemaError(path, f"expected a scalar string such as \"1/3\" or \"-1 + sqrt(2)\", got {obj!r}")
    try:
        return parse_scalar(obj)
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from None


def _fraction(obj, path: str) -> Fraction:
    s = _scalar(obj, path)
    if not s.is_rational():
        raise SchemaError(path, f"expected a rational, got {s}")
    return s.to_fraction()


def _version(doc, path=""):
    v = _int(doc.get("schema_version"), "schema_version") if "schema_version" in doc else None
    if v != SCHEMA_VERSION:
        raise SchemaError("schema_version", f"unsupported schema version {v!r}, expected {SCHEMA_VERSION}")


def _block(obj, path: str):
    if not isinstance(obj, dict) or "type" not in obj:
        raise SchemaError(path, "expected an object with a \"type\" field")
    kind = obj["type"]
    if kind == "rotation":
        _keys(obj, path, {"type", "rho"})
        return Rotation(_scalar(obj["rho"], f"{path}.rho"))
    if kind == "n1":
        _keys(obj, path, {"type", "lambda", "b"})
        lam = _int(obj["lambda"], f"{path}.lambda")
        b = _int(obj["b"], f"{path}.b")
        if lam not in (1, -1):
            raise SchemaError(f"{path}.lambda", f"must be 1 or -1, got {lam}")
        if b not in (-1, 0, 1):
            raise SchemaError(f"{path}.b", f"must be -1, 0 or 1, got {b}")
        return N1(lam, b)
    if kind == "n2":
        _keys(obj, path, {"type", "rho"}, {"nontrivial"})
        return N2(_scalar(obj["rho"], f"{path}.rho"), _bool(obj.get("nontrivial", True), f"{path}.nontrivial"))
    if kind == "hyperbolic":
        _keys(obj, path, {"type"}, {"sign"})
        sign = _int(obj.get("sign", 1), f"{path}.sign")
        if sign not in (1, -1):
            raise SchemaError(f"{path}.sign", f"must be 1 or -1, got {sign}")
        return Hyperbolic(sign)
    raise SchemaError(f"{path}.type", f"unknown block type {kind!r}")


def _geodesic(obj, path: str, n: int, k: int) -> GeodesicModel:
    _keys(obj, path, {"initial_index", "blocks"}, {"label", "type_tables"})
    label = _str(obj.get("label", f"c{k + 1}"), f"{path}.label")
    index = _int(obj["initial_index"], f"{path}.initial_index", 0)
    if not isinstance(obj["blocks"], list):
        raise SchemaError(f"{path}.blocks", "expected a list")
    blocks = tuple(_block(b, f"{path}.blocks[{j}]") for j, b in enumerate(obj["blocks"]))
    for j, b in enumerate(blocks):
        bad = b.problems()
        if bad:
            raise SchemaError(f"{path}.blocks[{j}]", "; ".join(bad))
    decomp = NormalFormDecomposition(2 * n, blocks)
    if decomp.used_dim() != 2 * n:
        raise SchemaError(f"{path}.blocks", f"dimension budget {decomp.used_dim()} != {2 * n}")
    tables = None
    if "type_tables" in obj:
        raw = obj["type_tables"]
        if not isinstance(raw, dict):
            raise SchemaError(f"{path}.type_tables", "expected an object")
        tables = {}
        for key, ks in raw.items():
            kp = f"{path}.type_tables.{key}"
            try:
                m = int(key)
            except ValueError:
                raise SchemaError(kp, "keys must be positive iterate numbers") from None
            if m < 1:
                raise SchemaError(kp, "keys must be positive iterate numbers")
            if not isinstance(ks, list):
                raise SchemaError(kp, "expected a list of type numbers")
            if len(ks) > 4 * n + 1:
                raise SchemaError(kp, f"at most {4 * n + 1} type numbers allowed")
            tables[m] = tuple(_int(x, f"{kp}[{j}]", 0) for j, x in enumerate(ks))
    return GeodesicModel(index, decomp, tables, label)


def system_from_dict(doc) -> GeodesicSystem:
    _keys(doc, "", {"schema_version", "system"}, {"description"})
    _version(doc)
    sysd = doc["system"]
    _keys(sysd, "system", {"n", "geodesics"}, {"bumpy", "curvature_pinched", "group_label"})
    n = _int(sysd["n"], "system.n", 1)
    if not isinstance(sysd["geodesics"], list):
        raise SchemaError("system.geodesics", "expected a list")
    geos = tuple(_geodesic(g, f"system.geodesics[{k}]", n, k) for k, g in enumerate(sysd["geodesics"]))
    system = GeodesicSystem(
        n,
        geos,
        bumpy=_bool(sysd.get("bumpy", True), "system.bumpy"),
        curvature_pinched=_bool(sysd.get("curvature_pinched", False), "system.curvature_pinched"),
        group_label=_str(sysd.get("group_label", ""), "system.group_label"),
    )
    for k, g in enumerate(geos):
        msgs = validate_model(g, bumpy=system.bumpy, curvature_pinched=system.curvature_pinched)
        if msgs:
            raise SchemaError(f"system.geodesics[{k}]", "; ".join(msgs))
        if mean_index(g) <= 0:
            raise SchemaError(f"system.geodesics[{k}]", f"mean index {mean_index(g)} is not positive")
    return system


def load_system(path: Union[str, Path]) -> GeodesicSystem:
    return system_from_dict(_read_json(path))


def _block_to_dict(b) -> dict:
    if isinstance(b, Rotation):
        return {"type": "rotation", "rho": format_scalar(b.rho)}
    if isinstance(b, N1):
        return {"type": "n1", "lambda": b.lam, "b": b.b}
    if isinstance(b, N2):
        return {"type": "n2", "rho": format_scalar(b.rho), "nontrivial": b.nontrivial}
    return {"type": "hyperbolic", "sign": b.sign}


def system_to_dict(s: GeodesicSystem, description: str = "") -> dict:
    geos = []
    for label, g in zip(s.labels(), s.geodesics):
        d = {"label": label, "initial_index": g.initial_index, "blocks": [_block_to_dict(b) for b in g.decomp.blocks]}
        if g.type_tables:
            d["type_tables"] = {str(m): list(ks) for m, ks in sorted(g.type_tables.items())}
        geos.append(d)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "system": {
            "n": s.n,
            "bumpy": s.bumpy,
            "curvature_pinched": s.curvature_pinched,
            "group_label": s.group_label,
            "geodesics": geos,
        },
    }
    if description:
        doc["description"] = description
    return doc


def dump_system(s: GeodesicSystem, path: Union[str, Path], description: str = "") -> None:
    Path(path).write_text(json.dumps(system_to_dict(s, description), indent=2) + "\n")


# -- certificates --------------------------------------------------------

_CERT_FIELDS = {"N", "m", "chi", "Mbar", "M0", "epsilon", "delta", "mbar"}


def _fmt_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def certificate_to_dict(cert: JumpCertificate) -> dict:
    d = {
        "N": cert.N,
        "m": list(cert.m),
        "chi": list(cert.chi),
        "Mbar": cert.Mbar,
        "M0": cert.M0,
        "epsilon": _fmt_fraction(cert.epsilon),
        "delta": _fmt_fraction(cert.delta),
        "mbar": cert.mbar,
    }
    if cert.verification:
        d["verification"] = [dict(r) for r in cert.verification]
    return d


def certificate_from_dict(obj, path: str = "certificate") -> JumpCertificate:
    _keys(obj, path, _CERT_FIELDS, {"verification"})
    N = _int(obj["N"], f"{path}.N", 1)
    for key in ("m", "chi"):
        if not isinstance(obj[key], list):
            raise SchemaError(f"{path}.{key}", "expected a list")
    m = tuple(_int(x, f"{path}.m[{j}]", 1) for j, x in enumerate(obj["m"]))
    chi = tuple(_int(x, f"{path}.chi[{j}]", 0) for j, x in enumerate(obj["chi"]))
    if len(m) != len(chi):
        raise SchemaError(f"{path}.chi", "length differs from m")
    verification = ()
    if "verification" in obj:
        if not isinstance(obj["verification"], list):
            raise SchemaError(f"{path}.verification", "expected a list")
        verification = tuple(obj["verification"])
    return JumpCertificate(
        N,
        m,
        chi,
        _int(obj["Mbar"], f"{path}.Mbar", 1),
        _int(obj["M0"], f"{path}.M0", 1),
        _fraction(obj["epsilon"], f"{path}.epsilon"),
        _fraction(obj["delta"], f"{path}.delta"),
        _int(obj["mbar"], f"{path}.mbar", 1),
        verification,
    )


def certificates_to_doc(certs) -> dict:
    return {"schema_version": SCHEMA_VERSION, "certificates": [certificate_to_dict(c) for c in certs]}


def load_certificates(path: Union[str, Path]) -> list[JumpCertificate]:
    """All certificates of a file holding either ``certificate`` or ``certificates``."""
    doc = _read_json(path)
    if not isinstance(doc, dict):
        raise SchemaError("", "expected an object")
    if "certificates" in doc:
        _keys(doc, "", {"schema_version", "certificates"})
        _version(doc)
        if not isinstance(doc["certificates"], list):
            raise SchemaError("certificates", "expected a list")
        return [certificate_from_dict(c, f"certificates[{j}]") for j, c in enumerate(doc["certificates"])]
    _keys(doc, "", {"schema_version", "certificate"})
    _version(doc)
    return [certificate_from_dict(doc["certificate"])]


def load_certificate(path: Union[str, Path]) -> JumpCertificate:
    return load_certificates(path)[0]


def dump_certificate(cert: JumpCertificate, path: Union[str, Path]) -> None:
    doc = {"schema_version": SCHEMA_VERSION, "certificate": certificate_to_dict(cert)}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
