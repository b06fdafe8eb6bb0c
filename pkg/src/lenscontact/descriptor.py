"""JSON form descriptors.

Only the defining data (lens, tau0, phi0, profile) are stored; tau1, phi1
and everything else are recomputed on load.  Floats are written with
Python's shortest round-trip repr, so parse(print(d)) == d exactly.
"""

import hashlib
import json

from .contact_form import ContactForm, from_triple
from .errors import SchemaError
from .lens_atlas import LensParams
from .profile import ProfileSpec

SCHEMA_VERSION = 1
REQUIRED = ("schema_version", "lens", "tau0", "phi0", "profile")


def to_descriptor(form: ContactForm, meta: dict = None) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "lens": form.lens.to_dict(),
        "tau0": form.tau0,
        "phi0": form.phi0,
        "profile": form.profile.to_dict(),
    }
    if meta:
        d["meta"] = dict(meta)
    return d


def dumps(desc: dict) -> str:
    return json.dumps(desc, indent=2) + "\n"


def digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _require(obj: dict, key: str, where: str):
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"missing field '{where}{key}'")
    return obj[key]


def _number(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"field '{name}' must be a number, got {value!r}")
    return float(value)


def _integer(value, name):
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(f"field '{name}' must be an integer, got {value!r}")
    return value


def parse(text: str) -> dict:
    """Parse and schema-check a descriptor; returns the plain dict."""
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(d, dict):
        raise SchemaError("descriptor must be a JSON object")
    for key in REQUIRED:
        _require(d, key, "")
    if d["schema_version"] != SCHEMA_VERSION:
        raise SchemaError(f"unsupported schema_version {d['schema_version']!r}")
    for key in ("p", "q", "m", "s"):
        _integer(_require(d["lens"], key, "lens."), f"lens.{key}")
    _number(d["tau0"], "tau0")
    _number(d["phi0"], "phi0")
    ptype = _require(d["profile"], "type", "profile.")
    if ptype != "poly-in-u":
        raise SchemaError(f"unsupported profile type {ptype!r}")
    coeffs = _require(d["profile"], "coeffs", "profile.")
    if not isinstance(coeffs, list) or not coeffs:
        raise SchemaError("field 'profile.coeffs' must be a non-empty list")
    for i, c in enumerate(coeffs):
        _number(c, f"profile.coeffs[{i}]")
    return d


def form_from_descriptor(d: dict, validate: bool = True) -> ContactForm:
    lens = LensParams(**{k: d["lens"][k] for k in ("p", "q", "m", "s")})
    spec = ProfileSpec(tuple(d["profile"]["coeffs"]))
    return from_triple(spec, float(d["tau0"]), float(d["phi0"]), lens, validate=validate)


def load(path: str, validate: bool = True) -> ContactForm:
    with open(path) as fh:
        return form_from_descriptor(parse(fh.read()), validate)


def save(form: ContactForm, path: str, meta: dict = None) -> str:
    text = dumps(to_descriptor(form, meta))
    with open(path, "w") as fh:
        fh.write(text)
    return text
