"""Certification report assembly and serialization.

Reports are plain nested dicts of JSON-able values wrapped in a dataclass,
so equality and round-trips are exact.  Numbers are serialized with 17
significant digits, which round-trips IEEE doubles bit-exactly; identical
inputs therefore produce byte-identical documents except for the provenance
timestamp.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass

import numpy as np

from . import __version__
from . import bounds as bounds_mod
from . import certify as certify_mod
from . import gamecore as gc
from . import quantum_opt as qo
from . import selftest as st
from .observables import canonical_family


def _fmt_float(v: float) -> str:
    if not np.isfinite(v):
        raise ValueError("reports must not contain non-finite numbers")
    return format(float(v), ".17g")


def render_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = ",\n".join(inner + render_json(v, indent + 1) for v in obj)
        return "[\n" + items + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ",\n".join(
            f'{inner}"{k}": ' + render_json(v, indent + 1) for k, v in obj.items()
        )
        return "{\n" + items + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def flatten(obj, prefix: str = "") -> list[tuple[str, str]]:
    """Dotted-key projection used by the CSV format."""
    rows: list[tuple[str, str]] = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            rows.extend(flatten(v, f"{prefix}.{k}" if prefix else str(k)))
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            rows.extend(flatten(v, f"{prefix}.{i}"))
    elif isinstance(obj, bool):
        rows.append((prefix, "true" if obj else "false"))
    elif isinstance(obj, (float, np.floating)):
        rows.append((prefix, _fmt_float(float(obj))))
    elif obj is None:
        rows.append((prefix, ""))
    else:
        rows.append((prefix, str(obj)))
    return rows


@dataclass(frozen=True)
class CertificationReport:
    n: int
    local_bound: int
    pnc_bound: int
    quantum_value: float
    success_probabilities: dict
    sos: dict
    optimization: dict
    selftest: dict | None
    povm: dict
    randomness: dict
    provenance: dict

    def __post_init__(self):
        if not self.pnc_bound <= self.quantum_value + 1e-9:
            raise ValueError("report violates pnc_bound <= quantum_value")

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "local_bound": self.local_bound,
            "pnc_bound": self.pnc_bound,
            "quantum_value": self.quantum_value,
            "success_probabilities": self.success_probabilities,
            "sos": self.sos,
            "optimization": self.optimization,
            "selftest": self.selftest,
            "povm": self.povm,
            "randomness": self.randomness,
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CertificationReport":
        return cls(
            n=d["n"],
            local_bound=d["local_bound"],
            pnc_bound=d["pnc_bound"],
            quantum_value=d["quantum_value"],
            success_probabilities=d["success_probabilities"],
            sos=d["sos"],
            optimization=d["optimization"],
            selftest=d["selftest"],
            povm=d["povm"],
            randomness=d["randomness"],
            provenance=d["provenance"],
        )

    def to_json(self) -> str:
        return render_json(self.to_dict()) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CertificationReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        rows = flatten(self.to_dict())
        return "key,value\n" + "".join(f"{k},{v}\n" for k, v in rows)

    def to_text(self) -> str:
        rows = flatten(self.to_dict())
        width = max(len(k) for k, _ in rows)
        return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def provenance(seed: int, tol: float, extra: dict | None = None) -> dict:
    out = {
        "seed": seed,
        "tolerance": tol,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    if extra:
        out.update(extra)
    return out


# ---------------------------------------------------------------------------
# Section builders.  Each returns (section dict, list of (check, ok, detail)).
# ---------------------------------------------------------------------------


def bounds_section(n: int) -> tuple[dict, list]:
    local, local_w = bounds_mod.local_bound(n)
    pnc, pnc_w = bounds_mod.pnc_bound(n)
    section = {
        "local_bound": local,
        "local_witness": {"a": list(local_w.a), "b": list(local_w.b)},
        "pnc_bound": pnc,
        "pnc_witness": {"a": list(pnc_w.a), "b": list(pnc_w.b)},
        "pnc_bound_symmetric": bounds_mod.pnc_bound_symmetric(n),
        "local_bound_closed_form": bounds_mod.local_bound_closed_form(n),
        "quantum_ceiling": qo.concavity_bound(n),
    }
    expr = gc.bell_expression(n)
    local_replay = gc.bell_value(expr, bounds_mod.strategy_behavior(local_w, n))
    pnc_replay = gc.bell_value(expr, bounds_mod.strategy_behavior(pnc_w, n))
    checks = [
        ("local witness replays its bound", abs(local_replay - local) < 1e-12, f"{local_replay} vs {local}"),
        ("pnc witness replays its bound", abs(pnc_replay - pnc) < 1e-12, f"{pnc_replay} vs {pnc}"),
        ("pnc bound equals 2n-2", pnc == 2 * n - 2, f"{pnc}"),
        ("closed form matches enumeration", section["local_bound_closed_form"] == local, ""),
        ("local dominates pnc", local >= pnc, ""),
    ]
    return section, checks


def optimization_section(n: int, seed: int, restarts: int, tol: float) -> tuple[dict, list, qo.SeesawResult]:
    result = qo.seesaw(n, seed=seed, restarts=restarts, tol=tol)
    target = qo.concavity_bound(n)
    hits = sum(1 for v in result.restart_values if abs(v - target) <= 1e-6)
    section = {
        "value": result.value,
        "target": target,
        "restart_values": list(result.restart_values),
        "restarts_at_optimum": hits,
        "constrained": result.constrained,
        "parity_residual": result.parity_residual,
        "converged": all(result.converged),
        "best_restart": result.best_restart,
    }
    monotone = all(
        all(b - a >= -1e-9 for a, b in zip(trace, trace[1:])) for trace in result.traces
    )
    checks = [
        ("see-saw reaches the quantum ceiling", abs(result.value - target) <= 1e-6, f"{result.value}"),
        ("see-saw traces are monotone", monotone, ""),
    ]
    return section, checks, result


def sos_section(n: int) -> tuple[dict, list]:
    setup = gc.setup_from_family(canonical_family(n))
    cert = qo.sos_certificate(setup)
    delta = qo.delta_check(setup)
    section = {
        "omegas": [float(w) for w in cert.omegas],
        "residual_max": float(np.max(cert.residuals)),
        "gap": cert.gap,
        "bell_value": cert.bell_value,
        "delta_expectation": delta,
    }
    checks = [
        ("certificate gap closes", abs(cert.gap) <= 1e-9, f"{cert.gap}"),
        ("defect vectors vanish", section["residual_max"] <= 1e-9, ""),
        ("anticommutator sum at its floor", abs(delta + n) <= 1e-9, f"{delta}"),
    ]
    return section, checks


_TARGETS_3 = tuple(
    [f"A{x}" for x in (1, 2, 3)]
    + [f"B{y}" for y in (1, 2, 3)]
    + [f"A{x}B{y}" for x in (1, 2, 3) for y in (1, 2, 3)]
)
_TARGETS_5 = ("ZA", "XA", "YA", "ZB", "XB", "YB")


def selftest_section(n: int, perturb: float = 0.0) -> tuple[dict | None, list]:
    if n not in (3, 5):
        return None, []
    fam = canonical_family(n)
    base = gc.setup_from_family(fam)
    if perturb:
        setup = gc.QuantumSetup(state=st.perturbed_state(perturb), alice=base.alice, bob=base.bob)
    else:
        setup = base
    ops = st.build_selftest_operators(setup)
    residuals = st.verify_relations(ops, setup.state)
    state_run = st.run_isometry(setup, "state")
    targets = _TARGETS_3 if n == 3 else _TARGETS_5
    extraction_errors = {}
    fidelities = {}
    for tgt in targets:
        run = st.run_isometry(setup, tgt)
        extraction_errors[tgt] = run.max_entry_error
        fidelities[tgt] = run.fidelity
    section = {
        "perturbation": perturb,
        "relation_residuals": {k: float(v) for k, v in residuals.items()},
        "residual_max": float(max(residuals.values())),
        "state_fidelity": state_run.fidelity,
        "junk_fidelity": state_run.junk_fidelity,
        "extraction_entry_errors": extraction_errors,
        "extraction_fidelities": fidelities,
        "extraction_entry_error_max": float(max(extraction_errors.values())),
    }
    checks = [
        ("optimum relations hold", section["residual_max"] <= 1e-9, f"{section['residual_max']}"),
        ("state extraction is exact", state_run.fidelity >= 1 - 1e-10, f"{state_run.fidelity}"),
        (
            "measurement extractions are exact",
            section["extraction_entry_error_max"] <= 1e-9,
            f"{section['extraction_entry_error_max']}",
        ),
    ]
    return section, checks


def certify_section(n: int, alpha: float) -> tuple[dict, dict, list]:
    fam = canonical_family(n)
    setup = gc.setup_from_family(fam)
    povm = certify_mod.canonical_povm(fam)
    stats = certify_mod.povm_statistics(setup, povm)
    penalties = certify_mod.penalty_probabilities(setup, povm)
    shifted = certify_mod.shifted_bell_value(setup, povm, alpha)
    plain = qo.setup_bell_value(setup)
    spectrum = [[float(w) for w in np.linalg.eigvalsh(el)] for el in povm.elements]
    completeness = float(
        np.linalg.norm(sum(povm.elements) - np.eye(2), 2)
    )
    rand = certify_mod.randomness_report(setup, povm)
    recon_dev = certify_mod.reconstruction_deviation(stats, povm) if n == 3 else None

    povm_section = {
        "alpha": alpha,
        "element_spectra": spectrum,
        "completeness_deviation": completeness,
        "outcome_probabilities": list(rand.outcome_probabilities),
        "penalty_total": float(penalties.sum()),
        "shifted_bell_value": shifted,
        "bell_value": plain,
        "extremal": rand.extremal,
        "reconstruction_deviation": recon_dev,
    }
    randomness_section = {
        "guessing_probability": rand.guessing_probability,
        "min_entropy_bits": rand.min_entropy_bits,
        "certified": rand.certified,
    }
    expected_extremal = n == 3
    checks = [
        (
            "POVM spectra are {0, 2/n}",
            all(abs(s[0]) <= 1e-9 and abs(s[1] - 2.0 / n) <= 1e-9 for s in spectrum),
            "",
        ),
        ("POVM is complete", completeness <= 1e-9, f"{completeness}"),
        (
            "outcome probabilities are uniform",
            all(abs(p - 1.0 / n) <= 1e-9 for p in rand.outcome_probabilities),
            "",
        ),
        ("shifted value matches the plain value", abs(shifted - plain) <= 1e-9, f"{shifted} vs {plain}"),
        (
            "extremality matches the outcome-count rule",
            rand.extremal == expected_extremal,
            f"extremal={rand.extremal}",
        ),
        (
            "randomness certification matches extremality",
            rand.certified == expected_extremal,
            "",
        ),
    ]
    if n == 3:
        checks.append(("gamma reconstruction round-trips", recon_dev <= 1e-8, f"{recon_dev}"))
        checks.append(
            (
                "min-entropy equals log2(3)",
                abs(rand.min_entropy_bits - 1.584962500721156) <= 1e-9,
                f"{rand.min_entropy_bits}",
            )
        )
    return povm_section, randomness_section, checks


def build_report(
    n: int,
    seed: int = 42,
    restarts: int = 8,
    tol: float = 1e-9,
    alpha: float = 1.0,
) -> tuple[CertificationReport, list]:
    """Full pipeline report plus the list of (check, ok, detail) results."""
    checks: list = []
    bounds_sec, c = bounds_section(n)
    checks.extend(c)
    opt_sec, c, result = optimization_section(n, seed, restarts, tol)
    checks.extend(c)
    sos_sec, c = sos_section(n)
    checks.extend(c)
    self_sec, c = selftest_section(n)
    checks.extend(c)
    povm_sec, rand_sec, c = certify_section(n, alpha)
    checks.extend(c)

    # The bounds detail rides along inside the optimization dict so the
    # top-level schema stays stable across n.
    opt_sec = dict(opt_sec, bounds_detail=bounds_sec)
    succ = {
        "quantum": gc.success_probability_at(n, result.value),
        "pnc": gc.success_probability_at(n, bounds_sec["pnc_bound"]),
        "local": gc.success_probability_at(n, bounds_sec["local_bound"]),
    }
    report = CertificationReport(
        n=n,
        local_bound=bounds_sec["local_bound"],
        pnc_bound=bounds_sec["pnc_bound"],
        quantum_value=result.value,
        success_probabilities=succ,
        sos=sos_sec,
        optimization=opt_sec,
        selftest=self_sec,
        povm=povm_sec,
        randomness=rand_sec,
        provenance=provenance(seed, tol, {"restarts": restarts, "alpha": alpha}),
    )
    return report, checks
