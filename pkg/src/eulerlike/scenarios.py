"""Scenario files: JSON schema, built-in catalog and the dispatcher to the verifiers.

A scenario names a ``kind`` and gives the structure as expression strings in
coordinates ``x1..xn``.  Sparse antisymmetric tensors are objects whose keys
are comma-separated 1-based indices in increasing order, e.g.
``{"1,2": "x3"}`` for ``x3 d/dx1 ^ d/dx2``.  If ``transversal.adapt`` is
given, the structure is written in coordinates ``m`` and is pulled back along
``m = origin + F w`` so that the transversal becomes ``{x = 0}`` in ``w``.
"""

import copy

import jsonschema
import numpy as np

from .algebroid import AnchoredBundle, LieAlgebroid, algebroid_normal_form, euler_section
from .chart import (AffineChart, Bivector, MatrixField, OneForm, ScalarField, Section, ThreeForm,
                    Transversal, TwoForm, VectorField, interior_product, sharp)
from .dirac import (CourantSection, GCSData, graph_of_bivector, graph_of_twoform, gcs_induced_poisson)
from .errors import EulerLikeError
from .euler import linearize, psi_inverse, psi_inverse_flow
from .flow import FlowConfig
from .normalform import (QuadratureConfig, alpha_for_cosymplectic, dirac_normal_form, gcs_normal_form,
                         gcs_section, weinstein_split)
from .report import SplittingReport

KINDS = ("poisson", "dirac", "gcs", "algebroid", "euler")

_EXPR = {"type": "string", "minLength": 1}
_SPARSE = {"type": "object", "patternProperties": {r"^\s*\d+\s*(,\s*\d+\s*)*$": _EXPR},
           "additionalProperties": False}
_VECTOR = {"type": "array", "items": _EXPR, "minItems": 1}
_MATRIX = {"type": "array", "items": _VECTOR, "minItems": 1}
_POINT = {"type": "array", "items": {"type": "number"}}

SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["name", "kind", "dim", "transversal", "structure"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "description": {"type": "string"},
        "anchor": {"type": "string"},
        "kind": {"enum": list(KINDS)},
        "dim": {"type": "integer", "minimum": 1, "maximum": 12},
        "transversal": {
            "type": "object",
            "required": ["p"],
            "additionalProperties": False,
            "properties": {
                "p": {"type": "integer", "minimum": 0},
                "center": _POINT,
                "adapt": {"type": "array", "items": _POINT},
                "origin": _POINT,
            },
        },
        "structure": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "bivector": _SPARSE,
                "twoform": _SPARSE,
                "eta": _SPARSE,
                "vector": _VECTOR,
                "form": _VECTOR,
                "casimir": _EXPR,
                "expected_omega": _SPARSE,
                "expect_euler": {"type": "boolean"},
                "factors": {
                    "type": "array", "minItems": 1,
                    "items": {
                        "type": "object", "required": ["type"], "additionalProperties": False,
                        "properties": {
                            "type": {"enum": ["complex", "symplectic"]},
                            "dim": {"type": "integer", "minimum": 2},
                            "matrix": _MATRIX,
                            "twoform": _SPARSE,
                        },
                    },
                },
                "bfield": _SPARSE,
                "algebroid": {"enum": ["tangent", "cotangent", "anchored"]},
                "anchor": _MATRIX,
                "section": _VECTOR,
            },
        },
        "sampling": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "radius": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "tolerances": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "tol": {"type": "number", "exclusiveMinimum": 0},
                "rel": {"type": "number", "exclusiveMinimum": 0},
                "abs": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "quadrature": {
            "type": "object", "additionalProperties": False,
            "properties": {
                "nodes": {"type": "integer", "minimum": 1},
                "tol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


class ScenarioError(EulerLikeError, ValueError):
    """Invalid scenario; ``pointer`` locates the offending field (JSON pointer)."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer or "/"
        self.detail = message


def _pointer(path):
    return "/" + "/".join(str(p) for p in path) if path else "/"


def validate_scenario(data):
    """Schema and consistency checks; raises :class:`ScenarioError`."""
    validator = jsonschema.Draft7Validator(SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ScenarioError(e.message, _pointer(e.absolute_path))
    n = data["dim"]
    tv = data["transversal"]
    if tv["p"] > n:
        raise ScenarioError(f"p = {tv['p']} exceeds dim = {n}", "/transversal/p")
    for key in ("center", "origin"):
        if key in tv and len(tv[key]) != n:
            raise ScenarioError(f"expected {n} coordinates", f"/transversal/{key}")
    if "adapt" in tv and (len(tv["adapt"]) != n or any(len(r) != n for r in tv["adapt"])):
        raise ScenarioError(f"expected a {n}x{n} matrix", "/transversal/adapt")
    st = data["structure"]
    for key in ("bivector", "twoform", "eta", "expected_omega", "bfield"):
        rank = 3 if key == "eta" else 2
        for idx in st.get(key, {}):
            ij = [int(s) for s in idx.split(",")]
            if len(ij) != rank or any(not 1 <= i <= n for i in ij) or sorted(set(ij)) != ij:
                raise ScenarioError(f"index {idx!r} must be {rank} increasing integers in 1..{n}",
                                    f"/structure/{key}/{idx}")
    for key in ("vector", "form", "section"):
        if key in st and key != "section" and len(st[key]) != n:
            raise ScenarioError(f"expected {n} components", f"/structure/{key}")
    required = {"poisson": ["bivector"], "gcs": ["factors"], "algebroid": ["algebroid"],
                "euler": ["vector"]}
    for key in required.get(data["kind"], []):
        if key not in st:
            raise ScenarioError(f"'{key}' is required for kind {data['kind']!r}", "/structure")
    if data["kind"] == "dirac" and ("bivector" in st) == ("twoform" in st):
        raise ScenarioError("give exactly one of 'bivector' or 'twoform'", "/structure")
    if data["kind"] == "gcs":
        total = 0
        for i, f in enumerate(st["factors"]):
            if f["type"] == "complex" and "matrix" not in f:
                raise ScenarioError("complex factor needs 'matrix'", f"/structure/factors/{i}")
            if f["type"] == "symplectic" and not ("twoform" in f and "dim" in f):
                raise ScenarioError("symplectic factor needs 'twoform' and 'dim'", f"/structure/factors/{i}")
            total += len(f["matrix"]) if f["type"] == "complex" else f["dim"]
        if total != n:
            raise ScenarioError(f"factor dimensions add up to {total}, not {n}", "/structure/factors")
    return data


# -- building fields from scenario data ---------------------------------------------------


def _sparse(entries):
    return {tuple(int(s) - 1 for s in k.split(",")): v for k, v in entries.items()}


class Scenario:
    """A validated scenario with its fields built in adapted coordinates."""

    def __init__(self, data):
        self.data = validate_scenario(copy.deepcopy(data))
        d = self.data
        self.name, self.kind, self.dim = d["name"], d["kind"], d["dim"]
        tv = d["transversal"]
        self.adapt = None
        if "adapt" in tv:
            self.adapt = AffineChart(np.array(tv["adapt"], dtype=float), tv.get("origin"))
        self.N = Transversal(self.dim, tv["p"], tv.get("center"))
        s = d.get("sampling", {})
        self.samples, self.radius, self.seed = s.get("count", 50), s.get("radius", 0.3), s.get("seed", 0)
        t = d.get("tolerances", {})
        self.tol = t.get("tol", 1e-6)
        self.flow_cfg = FlowConfig(rel_tol=t.get("rel", 1e-10), abs_tol=t.get("abs", 1e-10))
        q = d.get("quadrature", {})
        self.qcfg = QuadratureConfig(nodes=q.get("nodes", 8), tol=q.get("tol", 1e-9))

    def field(self, cls, key, pull=True):
        st, n = self.data["structure"], self.dim
        raw = st[key]
        try:
            if cls in (TwoForm, Bivector, ThreeForm):
                f = cls(_sparse(raw), n)
            else:
                f = cls(raw, n)
        except EulerLikeError as exc:
            raise ScenarioError(str(exc), f"/structure/{key}") from exc
        if pull and self.adapt is not None:
            f = self.adapt.pull(f)
        return f

    def override(self, tol=None, samples=None, radius=None, seed=None, quad_nodes=None):
        if tol is not None:
            self.tol = tol
        if samples is not None:
            self.samples = samples
        if radius is not None:
            self.radius = radius
        if seed is not None:
            self.seed = seed
        if quad_nodes is not None:
            self.qcfg = QuadratureConfig(nodes=quad_nodes, tol=self.qcfg.tol)
        return self


# -- shared checks --------------------------------------------------------------------


def embedding_checks(report, emb, rng, radius, samples=20, tol=1e-6):
    """Flow commutation, pushforward and the agreement of the two inverses of psi."""
    w = emb.N.sample_ball(samples, rng, radius)
    report.add("embedding_pushforward", "linearization", emb.pushforward_residual(w), tol, w)
    res = np.zeros(len(w))
    for t in (0.25, 0.5, 0.75):
        res = np.maximum(res, emb.commutation_residual(w, t))
    report.add("flow_commutation", "tubular embedding", res, tol, w)
    wi = w[: min(10, len(w))]
    m = emb(wi)
    newton = psi_inverse(emb, m)
    flow = psi_inverse_flow(emb, m)
    report.add("inverse_newton", "tubular embedding", np.abs(newton - wi).max(axis=1), 1e-8, wi)
    report.add("inverse_agreement", "tubular embedding", np.abs(newton - flow).max(axis=1), 1e-4, wi)
    return report


def _finish(report, scn, emb):
    rng = np.random.default_rng(scn.seed + 1)
    r = min(scn.radius, emb.domain_radius or scn.radius)
    return embedding_checks(report, emb, rng, r, tol=scn.tol)


# -- runners --------------------------------------------------------------------------


def _run_poisson(scn):
    pi = scn.field(Bivector, "bivector")
    st = scn.data["structure"]
    cas = scn.field(ScalarField, "casimir") if "casimir" in st else None
    rep = weinstein_split(pi, scn.N, samples=scn.samples, radius=scn.radius, tol=scn.tol, qcfg=scn.qcfg,
                          cfg=scn.flow_cfg, seed=scn.seed, casimir=cas, name=scn.name)
    emb, w = rep.extras["embedding"], rep.extras["points"]
    if st.get("expect_euler"):
        X = sharp(pi, rep.extras["alpha"])
        euler = scn.N.euler_field()
        rep.add("alpha_gives_euler_field", "canonical Poisson structure",
                np.abs(X(w) - euler(w)).max(axis=1), 1e-12, w)
    if "expected_omega" in st:
        target = scn.field(TwoForm, "expected_omega", pull=False)
        om = rep.extras["omega"](w)
        rep.add("omega_equals_expected", "canonical Poisson structure",
                np.abs(om - target(w)).max(axis=(1, 2)), 1e-8, w)
    rep.extras["data"] = {"omega_at_center": rep.extras["omega"](scn.N.center).tolist()}
    return _finish(rep, scn, emb)


def _dirac_data(scn):
    """``(E, X, alpha, eta)`` for a Dirac scenario."""
    st = scn.data["structure"]
    eta = scn.field(ThreeForm, "eta") if "eta" in st else None
    if "bivector" in st:
        pi = scn.field(Bivector, "bivector")
        E = graph_of_bivector(pi)
        if "form" in st:
            alpha = scn.field(OneForm, "form")
            X = scn.field(VectorField, "vector") if "vector" in st else sharp(pi, alpha)
        else:
            alpha = alpha_for_cosymplectic(pi, scn.N)
            X = sharp(pi, alpha)
    else:
        om = scn.field(TwoForm, "twoform")
        E = graph_of_twoform(om, eta, check_points=scn.N.sample_ball(8, np.random.default_rng(2), scn.radius))
        X = scn.field(VectorField, "vector") if "vector" in st else scn.N.euler_field()
        alpha = scn.field(OneForm, "form") if "form" in st else interior_product(X, om)
    return E, X, alpha, eta


def _run_dirac(scn):
    E, X, alpha, _ = _dirac_data(scn)
    eps = CourantSection(X, alpha)
    rep = dirac_normal_form(E, scn.N, eps, bg=E.bg, samples=scn.samples, radius=scn.radius, tol=scn.tol,
                            qcfg=scn.qcfg, cfg=scn.flow_cfg, seed=scn.seed, name=scn.name)
    rep.extras["data"] = {"omega_at_center": rep.extras["omega"](scn.N.center).tolist()}
    return _finish(rep, scn, rep.extras["embedding"])


def _gcs_structure(scn):
    st = scn.data["structure"]
    parts = []
    for f in st["factors"]:
        if f["type"] == "complex":
            m = len(f["matrix"])
            parts.append(GCSData.complex(MatrixField(f["matrix"], m)))
        else:
            parts.append(GCSData.symplectic(TwoForm(_sparse(f["twoform"]), f["dim"])))
    J = parts[0]
    for nxt in parts[1:]:
        J = GCSData.product(J, nxt)
    if "bfield" in st:
        J = J.conjugate(scn.field(TwoForm, "bfield", pull=False))
    return J


def _run_gcs(scn):
    J = _gcs_structure(scn)
    rep = gcs_normal_form(J, scn.N, samples=scn.samples, radius=scn.radius, tol=scn.tol, qcfg=scn.qcfg,
                          cfg=scn.flow_cfg, seed=scn.seed, name=scn.name)
    w = rep.extras["points"]
    v = J.validate(w[:10], strict=False)
    worst = np.max([np.asarray(r, dtype=float) for k, r in v.items() if not k.startswith("min_singular")], axis=0)
    rep.add("gcs_structure", "generalized complex structure", worst, 1e-8, w[:10])
    rep.extras["data"] = {"gamma_max": rep.extras["gamma_norm"],
                          "induced_pi_at_center": gcs_induced_poisson(J)(scn.N.center).tolist()}
    return _finish(rep, scn, rep.extras["embedding"])


def _algebroid_data(scn):
    """``(E, eps, kind)`` for an algebroid scenario (``eps`` None means the canonical section)."""
    st, n = scn.data["structure"], scn.dim
    kind = st["algebroid"]
    if kind == "tangent":
        E = LieAlgebroid.tangent(n)
    elif kind == "cotangent":
        if "bivector" not in st:
            raise ScenarioError("cotangent algebroid needs 'bivector'", "/structure")
        E = LieAlgebroid.cotangent(scn.field(Bivector, "bivector"))
    else:
        if "anchor" not in st:
            raise ScenarioError("anchored bundle needs 'anchor'", "/structure")
        E = AnchoredBundle(st["anchor"], n)
    eps = None
    if "section" in st:
        if len(st["section"]) != E.rank:
            raise ScenarioError(f"expected {E.rank} components", "/structure/section")
        eps = Section(st["section"], n)
    return E, eps, kind


def _run_algebroid(scn):
    E, eps, kind = _algebroid_data(scn)
    nf = algebroid_normal_form(E, scn.N, eps=eps, cfg=scn.flow_cfg, radius=scn.radius)
    rng = np.random.default_rng(scn.seed)
    r = min(scn.radius, nf.emb.domain_radius or scn.radius)
    w = scn.N.sample_ball(scn.samples, rng, r)
    rep = SplittingReport(scn.name, scn.seed)
    rep.add("image_in_pullback", "algebroid normal form", nf.image_residual(w), scn.tol, w)
    rep.add("anchor_preservation", "algebroid normal form", nf.anchor_residual(nf.emb(w)), scn.tol, w)
    if kind == "tangent":
        rep.add("tangent_lift_agreement", "tangent lift", nf.tangent_residual(w), scn.tol, w)
    if isinstance(E, LieAlgebroid):
        wb = w[: min(20, len(w))]
        rep.add("bracket_preservation", "algebroid normal form", nf.bracket_residual(wb), 1e-5, wb)
    rep.extras.update({"embedding": nf.emb, "normal_form": nf, "points": w})
    return _finish(rep, scn, nf.emb)


def _run_euler(scn):
    X = scn.field(VectorField, "vector")
    emb = linearize(X, scn.N, scn.flow_cfg, radius=scn.radius)
    rep = SplittingReport(scn.name, scn.seed)
    rng = np.random.default_rng(scn.seed)
    y = scn.N.sample_N(20, rng, emb.domain_radius)
    r0, r1 = emb.zero_section_residual(y)
    rep.add("zero_section", "tubular embedding", np.maximum(r0, r1), 1e-8, y)
    rep.extras["embedding"] = emb
    return embedding_checks(rep, emb, rng, emb.domain_radius, samples=scn.samples, tol=scn.tol)


def euler_like_field(scn):
    """The Euler-like vector field whose embedding a scenario's verifier builds."""
    if not isinstance(scn, Scenario):
        scn = Scenario(scn)
    if scn.kind == "poisson":
        pi = scn.field(Bivector, "bivector")
        return sharp(pi, alpha_for_cosymplectic(pi, scn.N))
    if scn.kind == "dirac":
        return _dirac_data(scn)[1]
    if scn.kind == "gcs":
        J = _gcs_structure(scn)
        return gcs_section(J, alpha_for_cosymplectic(gcs_induced_poisson(J), scn.N))[0]
    if scn.kind == "algebroid":
        E, eps, _ = _algebroid_data(scn)
        return E.anchor_of(euler_section(E, scn.N) if eps is None else eps)
    return scn.field(VectorField, "vector")


def scenario_embedding(scn):
    """Tubular embedding of :func:`euler_like_field`, validated on the scenario's radius."""
    if not isinstance(scn, Scenario):
        scn = Scenario(scn)
    return linearize(euler_like_field(scn), scn.N, scn.flow_cfg, radius=scn.radius)


_RUNNERS = {"poisson": _run_poisson, "dirac": _run_dirac, "gcs": _run_gcs,
            "algebroid": _run_algebroid, "euler": _run_euler}


def run_scenario(scn, **overrides):
    """Run a :class:`Scenario` (or raw dict) and return its :class:`SplittingReport`."""
    if not isinstance(scn, Scenario):
        scn = Scenario(scn)
    scn.override(**overrides)
    return _RUNNERS[scn.kind](scn)


# -- built-in catalog -------------------------------------------------------------------

BUILTINS = {
    "canonical-r4": {
        "name": "canonical-r4",
        "description": "canonical Poisson structure on R^4 around the origin; omega must equal omega_0",
        "anchor": "canonical Poisson structure, Weinstein splitting",
        "kind": "poisson", "dim": 4,
        "transversal": {"p": 0},
        "structure": {"bivector": {"1,3": "-1", "2,4": "-1"},
                      "expected_omega": {"1,3": "1", "2,4": "1"}, "expect_euler": True},
    },
    "so3-star": {
        "name": "so3-star",
        "description": "Lie-Poisson structure of so(3)* split along the z-axis near (0,0,1)",
        "anchor": "Weinstein splitting, Dirac normal form",
        "kind": "poisson", "dim": 3,
        "transversal": {"p": 1, "center": [1.0, 0.0, 0.0],
                        "adapt": [[0, 1, 0], [0, 0, 1], [1, 0, 0]]},
        "structure": {"bivector": {"1,2": "x3", "2,3": "x1", "1,3": "-x2"},
                      "casimir": "x1^2 + x2^2 + x3^2"},
    },
    "heisenberg": {
        "name": "heisenberg",
        "description": "Heisenberg Poisson structure x d/dy ^ d/dz split along the x-axis near (1,0,0)",
        "anchor": "Weinstein splitting",
        "kind": "poisson", "dim": 3,
        "transversal": {"p": 1, "center": [1.0, 0.0, 0.0]},
        "structure": {"bivector": {"2,3": "x1"}},
    },
    "twisted-graph": {
        "name": "twisted-graph",
        "description": "graph of exp(z) dx^dy, twisted by its differential, around the origin",
        "anchor": "Dirac normal form (twisted)",
        "kind": "dirac", "dim": 3,
        "transversal": {"p": 0},
        "structure": {"twoform": {"1,2": "exp(x3)"}, "eta": {"1,2,3": "exp(x3)"},
                      "vector": ["x1 + x3^2", "x2 + x1*x3", "x3"]},
    },
    "gcs-product-shear": {
        "name": "gcs-product-shear",
        "description": "complex x symplectic product on R^4 conjugated by a closed shear B-field; N = complex factor",
        "anchor": "generalized complex splitting",
        "kind": "gcs", "dim": 4,
        "transversal": {"p": 2},
        "structure": {"factors": [{"type": "complex", "matrix": [["0", "-1"], ["1", "0"]]},
                                  {"type": "symplectic", "dim": 2, "twoform": {"1,2": "1"}}],
                      "bfield": {"1,4": "x3", "3,4": "x1"}},
    },
    "tangent-algebroid": {
        "name": "tangent-algebroid",
        "description": "tangent Lie algebroid of R^2 along the x-axis with a nonlinear Euler-like section",
        "anchor": "algebroid normal form, tangent lift",
        "kind": "algebroid", "dim": 2,
        "transversal": {"p": 1},
        "structure": {"algebroid": "tangent", "section": ["x2*x2 + x1*x2", "x2 + x2*x2"]},
    },
}


def builtin(name):
    if name not in BUILTINS:
        raise KeyError(f"unknown builtin scenario {name!r}; try one of {sorted(BUILTINS)}")
    return copy.deepcopy(BUILTINS[name])


def catalog():
    return [{"name": k, "kind": v["kind"], "anchor": v["anchor"], "description": v["description"]}
            for k, v in BUILTINS.items()]
