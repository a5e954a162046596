"""Sampled generating curves, the reflection gluing, and their file formats.

CSV layout: ``# key: <json value>`` metadata lines, a header
``<param>,lambda,dlambda,ddlambda`` and one row per sample. Values are
written with ``repr`` so that files round-trip exactly; non-finite entries
appear as ``inf``/``-inf``/``nan``. In JSON, non-finite entries are written as
null and read back as nan.

Mesh layout (OFF): the line ``OFF``, the counts ``V F 0``, V vertex rows
``x1 x2 t`` where (x1, x2) = tanh(rho/2) (cos a, sin a) are ball-model
coordinates of a 2-plane through the axis, then F rows ``3 i j k``.
"""
from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ambient import rho_to_ball_radius
from .errors import ValidationError

SCHEMA = 1
COLUMNS = ("lambda", "dlambda", "ddlambda")


@dataclass
class ProfileCurve:
    """Table of (param, lambda, dlambda, ddlambda) for a generating curve."""

    family: str
    param: str
    samples: np.ndarray
    domain: tuple[float, float]
    endpoint_singular: bool = False
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != 4 or s.shape[0] < 2:
            raise ValidationError("profile samples must be an (m, 4) table with m >= 2")
        if not np.all(np.diff(s[:, 0]) > 0):
            raise ValidationError("profile parameter must be strictly increasing")
        a, b = (float(v) for v in self.domain)
        if s[0, 0] < a or s[-1, 0] > b:
            raise ValidationError("samples leave the declared domain")
        self.samples = s
        self.domain = (a, b)

    @property
    def t(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def lam(self) -> np.ndarray:
        return self.samples[:, 1]

    @property
    def dlam(self) -> np.ndarray:
        return self.samples[:, 2]

    @property
    def ddlam(self) -> np.ndarray:
        return self.samples[:, 3]

    def finite_mask(self) -> np.ndarray:
        return np.all(np.isfinite(self.samples), axis=1)

    def derivative_consistency(self) -> float:
        """Max gap between stored dlambda and the non-uniform centred difference of lambda.

        Only interior samples whose neighbours are finite are used. The gap is
        O(h^2) for a smooth curve.
        """
        t, lam, dlam = self.t, self.lam, self.dlam
        h0, h1 = t[1:-1] - t[:-2], t[2:] - t[1:-1]
        fd = (h0**2 * lam[2:] - h1**2 * lam[:-2] + (h1**2 - h0**2) * lam[1:-1]) / (h0 * h1 * (h0 + h1))
        ok = np.isfinite(lam[2:]) & np.isfinite(lam[:-2]) & np.isfinite(dlam[1:-1])
        return float(np.max(np.abs(fd[ok] - dlam[1:-1][ok]), initial=0.0))

    # -- serialisation ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "kind": "profile-curve",
            "family": self.family,
            "param": self.param,
            "domain": [_json_float(v) for v in self.domain],
            "endpoint_singular": bool(self.endpoint_singular),
            "metadata": self.metadata,
            "columns": [self.param, *COLUMNS],
            "samples": [[_json_float(v) for v in row] for row in self.samples],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ProfileCurve":
        if d.get("kind") != "profile-curve":
            raise ValidationError("not a profile-curve document")
        samples = np.array([[np.nan if v is None else v for v in row] for row in d["samples"]], dtype=float)
        domain = tuple(math.inf if v is None else v for v in d["domain"])
        return cls(d["family"], d["param"], samples, domain, d["endpoint_singular"], d.get("metadata", {}))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ProfileCurve":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        head = {
            "schema": SCHEMA,
            "family": self.family,
            "domain": [_json_float(v) for v in self.domain],
            "endpoint_singular": bool(self.endpoint_singular),
            "metadata": self.metadata,
        }
        for key, val in head.items():
            buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
        buf.write(",".join([self.param, *COLUMNS]) + "\n")
        for row in self.samples:
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ProfileCurve":
        meta, rows = _read_csv(text)
        domain = tuple(math.inf if v is None else v for v in meta["domain"])
        return cls(meta["family"], meta["header"][0], np.array(rows), domain,
                   meta.get("endpoint_singular", False), meta.get("metadata", {}))

    def save(self, path, fmt: str | None = None):
        path = Path(path)
        fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
        path.write_text(self.to_json() if fmt == "json" else self.to_csv())


def _read_csv(text: str) -> tuple[dict, list]:
    """'# key: json' comment lines, a 4-column header, then numeric rows."""
    meta, rows, header = {}, [], None
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = json.loads(val)
        elif line.strip():
            if header is None:
                header = line.strip().split(",")
            else:
                rows.append([float(v) for v in line.split(",")])
    if header is None or len(header) != 4:
        raise ValidationError("profile CSV needs a 4-column header")
    if "domain" not in meta or "family" not in meta:
        raise ValidationError("profile CSV lacks its family/domain comment lines")
    meta["header"] = header
    return meta, rows


def _json_float(v):
    v = float(v)
    return v if math.isfinite(v) else None


def load_profile(path) -> "ProfileCurve | ClosedProfile":
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        d = json.loads(text)
        if d.get("kind") == "closed-profile":
            return ClosedProfile.from_dict(d)
        return ProfileCurve.from_dict(d)
    if "# kind: \"closed-profile\"" in text:
        return ClosedProfile.from_csv(text)
    return ProfileCurve.from_csv(text)


@dataclass
class ClosedProfile:
    """Upper half of a closed curve together with its gluing height t0.

    The lower half is the reflection lambda -> 2 t0 - lambda.
    """

    upper: ProfileCurve
    t0: float

    def __post_init__(self):
        end = self.upper.lam[-1]
        if abs(end - self.t0) > 1e-12 * max(1.0, abs(end)):
            raise ValidationError("gluing height does not match the end of the upper curve")

    @property
    def total_height(self) -> float:
        return 2.0 * self.t0

    def doubled(self) -> tuple[np.ndarray, np.ndarray]:
        """Closed curve (param, height): the upper half out to the end, then the
        reflected half back. The turning sample appears once."""
        t, lam = self.upper.t, self.upper.lam
        lower = 2.0 * self.t0 - lam
        return np.concatenate([t, t[-2::-1]]), np.concatenate([lam, lower[-2::-1]])

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "kind": "closed-profile", "t0": self.t0,
                "total_height": self.total_height, "upper": self.upper.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ClosedProfile":
        return cls(ProfileCurve.from_dict(d["upper"]), d["t0"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    def to_csv(self) -> str:
        """The doubled curve with its t-derivatives; the lower half has them negated.

        The first half of the rows, through the turning sample, is the upper curve.
        """
        param, height = self.doubled()
        dl, ddl = self.upper.dlam, self.upper.ddlam
        d1 = np.concatenate([dl, -dl[-2::-1]])
        d2 = np.concatenate([ddl, -ddl[-2::-1]])
        up = self.upper
        head = {
            "schema": SCHEMA,
            "kind": "closed-profile",
            "t0": self.t0,
            "family": up.family,
            "domain": [_json_float(v) for v in up.domain],
            "endpoint_singular": bool(up.endpoint_singular),
            "metadata": up.metadata,
        }
        buf = io.StringIO()
        for key, val in head.items():
            buf.write(f"# {key}: {json.dumps(val, sort_keys=True)}\n")
        buf.write(f"{up.param},t,dt,ddt\n")
        for row in zip(param, height, d1, d2):
            buf.write(",".join(repr(float(v)) for v in row) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ClosedProfile":
        meta, rows = _read_csv(text)
        if len(rows) % 2 == 0:
            raise ValidationError("closed profile CSV needs an odd number of rows")
        upper = np.array(rows[: len(rows) // 2 + 1])
        domain = tuple(math.inf if v is None else v for v in meta["domain"])
        curve = ProfileCurve(meta["family"], meta["header"][0], upper, domain,
                             meta.get("endpoint_singular", False), meta.get("metadata", {}))
        return cls(curve, meta["t0"])

    def save(self, path, fmt: str | None = None):
        path = Path(path)
        fmt = fmt or ("json" if path.suffix.lower() == ".json" else "csv")
        path.write_text(self.to_json() if fmt == "json" else self.to_csv())


def glue(curve: ProfileCurve) -> ClosedProfile:
    """Glue a curve that ends at a singular endpoint with its reflection."""
    if not curve.endpoint_singular:
        raise ValidationError("only curves with a vertical endpoint can be glued")
    if not np.isclose(curve.t[-1], curve.domain[1], rtol=0, atol=1e-12):
        raise ValidationError("curve does not reach its endpoint")
    return ClosedProfile(curve, float(curve.lam[-1]))


def revolution_mesh(profile, segments: int = 48) -> str:
    """OFF mesh of the surface of revolution swept by a rho-profile."""
    if isinstance(profile, ClosedProfile):
        rho, height = profile.doubled()
        param = profile.upper.param
    else:
        rho, height = profile.t, profile.lam
        param = profile.param
    if param != "rho":
        raise ValidationError("revolution meshes need a profile in the distance parameter rho")
    if not np.all(np.isfinite(height)):
        raise ValidationError("profile contains non-finite heights")
    angles = 2.0 * np.pi * np.arange(segments) / segments
    verts, rings = [], []
    for r_val, h_val in zip(rho, height):
        s = rho_to_ball_radius(float(r_val))
        if s == 0.0:
            rings.append([len(verts)])
            verts.append((0.0, 0.0, float(h_val)))
        else:
            rings.append(list(range(len(verts), len(verts) + segments)))
            verts.extend((s * math.cos(a), s * math.sin(a), float(h_val)) for a in angles)
    faces = []
    for lo, hi in zip(rings[:-1], rings[1:]):
        if len(lo) == 1 and len(hi) == 1:
            continue
        if len(lo) == 1 or len(hi) == 1:
            pole, ring = (lo[0], hi) if len(lo) == 1 else (hi[0], lo)
            faces.extend((pole, ring[k], ring[(k + 1) % segments]) for k in range(segments))
            continue
        for k in range(segments):
            k1 = (k + 1) % segments
            faces.append((lo[k], hi[k], hi[k1]))
            faces.append((lo[k], hi[k1], lo[k1]))
    out = io.StringIO()
    out.write("OFF\n")
    out.write(f"{len(verts)} {len(faces)} 0\n")
    for v in verts:
        out.write(" ".join(f"{c:.17g}" for c in v) + "\n")
    for f in faces:
        out.write(f"3 {f[0]} {f[1]} {f[2]}\n")
    return out.getvalue()
