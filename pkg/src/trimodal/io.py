"""JSON and CSV artifacts with a fixed 17-significant-digit number format."""
from __future__ import annotations

import csv
import io as _io
import json
import math
from dataclasses import asdict

import numpy as np

from .dispersion import Params, theta
from .errors import GridMismatch
from .kernel_finder import KernelSpec, TransversalityReport
from .operators import WaveField


def _number(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    return "%.17g" % x


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: floats as '%.17g', keys in insertion order."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _number(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def params_dict(p: Params) -> dict:
    return {"mu": p.mu, "alpha": p.alpha, "lambda": p.lam, "xi": p.xi}


def params_from(d: dict) -> Params:
    return Params(mu=float(d["mu"]), alpha=float(d["alpha"]), lam=float(d["lambda"]),
                  xi=float(d["xi"]))


def spec_dict(spec: KernelSpec, report: TransversalityReport | None = None) -> dict:
    k1, k2, k3 = spec.wavenumbers
    out = {"k1": k1, "k2": k2, "k3": k3}
    out.update({"xi": spec.xi, "alpha": spec.alpha, "lambda": spec.params.lam,
                "mu": spec.params.mu, "a": spec.a})
    out["thetas"] = [tv.theta for tv in spec.thetas]
    out["regimes"] = [tv.regime.value for tv in spec.thetas]
    out["residuals"] = list(spec.residuals)
    out["exact_dimension"] = spec.exact_dimension
    out["route"] = spec.route
    if report is not None:
        r = asdict(report)
        r["certified"] = report.certified
        out["transversality"] = r
    return out


def spec_from(d: dict) -> KernelSpec:
    ks = (int(d["k1"]), int(d["k2"]), int(d["k3"]))
    p = params_from(d)
    return KernelSpec(ks, p, tuple(theta(p, k) for k in ks), float(d["a"]),
                      d.get("exact_dimension"), tuple(float(r) for r in d["residuals"]),
                      d.get("route", "closed-form"))


def field_dict(w: WaveField) -> dict:
    n_modes, cols = w.phi.shape
    return {"n_modes": n_modes, "n_s": cols - 1, "eta_hat": w.eta, "phi": w.phi.ravel()}


def field_from(d: dict) -> WaveField:
    n, ns = int(d["n_modes"]), int(d["n_s"])
    eta = np.asarray(d["eta_hat"], dtype=float)
    phi = np.asarray(d["phi"], dtype=float)
    if eta.shape != (n,) or phi.size != n * (ns + 1):
        raise GridMismatch("stored field sizes do not match its header")
    return WaveField(eta, phi.reshape(n, ns + 1))


def field_csv(w: WaveField) -> str:
    """Header row (n_modes, n_s), then eta_hat, then phi row by row."""
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow([w.phi.shape[0], w.phi.shape[1] - 1])
    wr.writerow([_number(x) for x in w.eta])
    for row in w.phi:
        wr.writerow([_number(x) for x in row])
    return buf.getvalue()


def field_from_csv(text: str) -> WaveField:
    rows = list(csv.reader(_io.StringIO(text)))
    n, ns = int(rows[0][0]), int(rows[0][1])
    eta = np.array([float(x) for x in rows[1]])
    phi = np.array([[float(x) for x in r] for r in rows[2:]])
    if eta.shape != (n,) or phi.shape != (n, ns + 1):
        raise GridMismatch("stored field sizes do not match its header")
    return WaveField(eta, phi)


def profile_csv(q, height) -> str:
    buf = _io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(["q", "height"])
    for a, b in zip(q, height):
        wr.writerow([_number(a), _number(b)])
    return buf.getvalue()
