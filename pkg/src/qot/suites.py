"""Named verification suites: closed forms against the SDP, duality, triangles.

Each suite runs a deterministic sweep (grids or seeded random samples),
returns one row per case plus an aggregate verdict, and pins the tolerance
it enforces.  The CLI ``verify`` command and the acceptance tests both run
these drivers, so the checked numbers are identical in both places.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import closedform as cf
from . import cost as cost_mod
from . import linalg, transport

__all__ = ["SuiteOutcome", "SUITES", "run_suite", "suite_names"]

# Tolerances enforced per suite (absolute unless noted).
TOL_GAP_DEMO = 1e-6
TOL_STRONG_DUALITY = 1e-6      # relative to max(1, primal)
TOL_GRID_FORMULA = 1e-5
TOL_WITNESS = 1e-6
TOL_WITNESS_COUPLING = 1e-8
TOL_WITNESS_SLACK = 1e-8
TOL_DIVERGENCE_GRID = 1e-5
TOL_DIVERGENCE_SPOT = 1e-9
TOL_TRIANGLE = -1e-9           # margins must stay above this
TOL_COST_INVARIANCE = 1e-10
TOL_FACTORIZED = 1e-5
TOL_PURIFICATION = 1e-9
TOL_PURIFICATION_SDP = 1e-6
GAP_DEMO_BUDGET_S = 10.0
BIG_SOLVE_BUDGET_S = 5.0


@dataclass
class SuiteOutcome:
    name: str
    passed: bool
    cases: list[dict] = field(default_factory=list)
    worst: dict = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def n_failed(self) -> int:
        return sum(1 for c in self.cases if not c["ok"])

    def summary(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "cases": len(self.cases),
            "failed": self.n_failed,
            "seconds": round(self.seconds, 3),
            **{f"worst_{k}": v for k, v in self.worst.items()},
        }


def _finish(name: str, cases: list[dict], worst: dict, t0: float) -> SuiteOutcome:
    cases.sort(key=lambda c: c["case"])
    passed = all(c["ok"] for c in cases)
    return SuiteOutcome(name, passed, cases, worst, time.perf_counter() - t0)


def _grid(density: int, lo: float = -0.95, hi: float = 0.95) -> np.ndarray:
    return np.linspace(lo, hi, density)


# ---------------------------------------------------------------------------
# Strict linearization gap.
# ---------------------------------------------------------------------------


def suite_gap(density: int, samples: int, seed: int) -> SuiteOutcome:
    t0 = time.perf_counter()
    cases = []
    worst_dev = 0.0
    for p in (1.0, 2.0, 3.0):
        result = transport.gap_demo(p)
        expect_nonlinear = 2.0**p
        expect_linearized = 2.0**p * (1.0 - (math.sqrt(3.0) - 1.0) / 2.0)
        dev = max(
            abs(result.nonlinear - expect_nonlinear),
            abs(result.linearized - expect_linearized),
        )
        worst_dev = max(worst_dev, dev)
        cases.append(
            {
                "case": f"p={p:g}",
                "nonlinear": result.nonlinear,
                "linearized": result.linearized,
                "difference": result.difference,
                "deviation": dev,
                "ok": dev <= TOL_GAP_DEMO and result.linearized < result.nonlinear,
            }
        )
    elapsed = time.perf_counter() - t0
    outcome = _finish("gap", cases, {"deviation": worst_dev, "seconds": elapsed}, t0)
    outcome.passed = outcome.passed and elapsed < GAP_DEMO_BUDGET_S
    return outcome


# ---------------------------------------------------------------------------
# Strong duality on random instances.
# ---------------------------------------------------------------------------


def suite_strong_duality(density: int, samples: int, seed: int) -> SuiteOutcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cases = []
    worst_rel_gap = 0.0
    for family in ("symm", "z"):
        for p in (1.0, 2.0):
            for i in range(samples):
                rho = cf.state_from_bloch(linalg.random_bloch(rng, 0.99))
                omega = cf.state_from_bloch(linalg.random_bloch(rng, 0.99))
                make = transport.symm_instance if family == "symm" else transport.z_instance
                res = transport.wasserstein_distance(make(rho, omega, p))
                rel_gap = res.gap / max(1.0, abs(res.primal_objective))
                worst_rel_gap = max(worst_rel_gap, rel_gap)
                ok = rel_gap <= TOL_STRONG_DUALITY and res.certificate.passed
                if not ok or i < 2:
                    cases.append(
                        {
                            "case": f"{family},p={p:g},i={i:04d}",
                            "primal": res.primal_objective,
                            "dual": res.dual_objective,
                            "rel_gap": rel_gap,
                            "status": res.status,
                            "ok": ok,
                        }
                    )
    outcome = _finish("strong-duality", cases, {"rel_gap": worst_rel_gap}, t0)
    outcome.passed = outcome.passed and worst_rel_gap <= TOL_STRONG_DUALITY
    return outcome


# ---------------------------------------------------------------------------
# Closed-form grids with primal/dual witnesses.
# ---------------------------------------------------------------------------


def _witness_case(
    key: str,
    sdp_value: float,
    formula: float,
    coupling: transport.Coupling,
    cost_matrix: np.ndarray,
    candidates: tuple[transport.DualPotentials, ...],
    rho: np.ndarray,
    omega: np.ndarray,
) -> dict:
    coupling_obj = coupling.objective(cost_matrix)
    check = coupling.check(TOL_WITNESS_COUPLING)
    pot_obj = max(transport.potential_objective(rho, omega, c) for c in candidates)
    slack_min = min(
        linalg.min_eigenvalue(transport.potential_slack(cost_matrix, c, rho.shape[0]))
        for c in candidates
    )
    dev_formula = abs(sdp_value - formula)
    dev_witness = max(
        abs(coupling_obj - pot_obj), abs(coupling_obj - sdp_value), abs(pot_obj - sdp_value)
    )
    return {
        "case": key,
        "sdp": sdp_value,
        "formula": formula,
        "coupling_objective": coupling_obj,
        "potential_objective": pot_obj,
        "formula_deviation": dev_formula,
        "witness_deviation": dev_witness,
        "marginal_deviation": check.max_marginal_deviation,
        "slack_min_eig": slack_min,
        "ok": (
            dev_formula <= TOL_GRID_FORMULA
            and dev_witness <= TOL_WITNESS
            and check.ok
            and slack_min >= -TOL_WITNESS_SLACK
        ),
    }


def _grid_suite(
    name: str,
    density: int,
    state_of: Callable[[float], np.ndarray],
    instance_of: Callable[[np.ndarray, np.ndarray, float], transport.TransportInstance],
    formula_of: Callable[[float, float, float], float],
    coupling_of: Callable[[float, float], transport.Coupling],
    candidates_of: Callable[[float, float, float], tuple[transport.DualPotentials, ...]],
    cost_of: Callable[[float], np.ndarray],
) -> SuiteOutcome:
    t0 = time.perf_counter()
    cases = []
    worst_formula = 0.0
    worst_witness = 0.0
    values = _grid(density)
    for p in (1.0, 2.0):
        cost_matrix = cost_of(p)
        for a in values:
            for b in values:
                rho, omega = state_of(a), state_of(b)
                res = transport.wasserstein_distance(instance_of(rho, omega, p))
                row = _witness_case(
                    f"a={a:+.4f},b={b:+.4f},p={p:g}",
                    res.dp,
                    formula_of(a, b, p),
                    coupling_of(a, b),
                    cost_matrix,
                    candidates_of(a, b, p),
                    rho,
                    omega,
                )
                worst_formula = max(worst_formula, row["formula_deviation"])
                worst_witness = max(worst_witness, row["witness_deviation"])
                if not row["ok"] or (a == values[0] and b == values[0]):
                    cases.append(row)
    outcome = _finish(
        name, cases, {"formula_deviation": worst_formula, "witness_deviation": worst_witness}, t0
    )
    outcome.passed = (
        outcome.passed and worst_formula <= TOL_GRID_FORMULA and worst_witness <= TOL_WITNESS
    )
    return outcome


def suite_symm_commuting(density: int, samples: int, seed: int) -> SuiteOutcome:
    return _grid_suite(
        "symm-commuting",
        density,
        cf.state_z,
        transport.symm_instance,
        cf.d_symm_commuting,
        cf.coupling_symm_commuting,
        lambda a, b, p: cf.potentials_symm_commuting(a, b, p),
        cost_mod.cost_symm,
    )


def suite_z_xy(density: int, samples: int, seed: int) -> SuiteOutcome:
    return _grid_suite(
        "z-xy",
        density,
        cf.state_x,
        transport.z_instance,
        cf.d_z_xy,
        cf.coupling_z_xy,
        cf.potentials_z_xy,
        cost_mod.cost_z,
    )


def suite_z_commuting(density: int, samples: int, seed: int) -> SuiteOutcome:
    return _grid_suite(
        "z-commuting",
        density,
        cf.state_z,
        transport.z_instance,
        cf.d_z_commuting,
        cf.coupling_z_commuting,
        lambda a, b, p: cf.potentials_z_commuting(p),
        cost_mod.cost_z,
    )


# ---------------------------------------------------------------------------
# Divergences.
# ---------------------------------------------------------------------------


def _divergence_sweep(
    name: str,
    values: np.ndarray,
    observables: cost_mod.ObservableSet,
    state_of: Callable[[float], np.ndarray],
    formula_of: Callable[[float, float], float],
    spots: list[tuple[str, float, float]],
) -> SuiteOutcome:
    t0 = time.perf_counter()
    cases = []
    worst = 0.0
    self_cache: dict[float, float] = {}

    def self_distance(a: float) -> float:
        if a not in self_cache:
            state = state_of(a)
            self_cache[a] = transport.wasserstein_distance(
                transport.factorized_instance(state, state, observables, 2.0)
            ).dp
        return self_cache[a]

    for a in values:
        for b in values:
            cross = transport.wasserstein_distance(
                transport.factorized_instance(state_of(a), state_of(b), observables, 2.0)
            ).dp
            d2_sdp = cross - 0.5 * (self_distance(a) + self_distance(b))
            d2_formula = formula_of(a, b)
            dev = abs(d2_sdp - d2_formula)
            worst = max(worst, dev)
            if dev > TOL_DIVERGENCE_GRID or (a == values[0] and b == values[0]):
                cases.append(
                    {
                        "case": f"a={a:+.4f},b={b:+.4f}",
                        "d2_sdp": d2_sdp,
                        "d2_formula": d2_formula,
                        "deviation": dev,
                        "ok": dev <= TOL_DIVERGENCE_GRID,
                    }
                )
    worst_spot = 0.0
    for label, got, expect in spots:
        dev = abs(got - expect)
        worst_spot = max(worst_spot, dev)
        cases.append(
            {
                "case": f"spot:{label}",
                "value": got,
                "expected": expect,
                "deviation": dev,
                "ok": dev <= TOL_DIVERGENCE_SPOT,
            }
        )
    return _finish(name, cases, {"grid_deviation": worst, "spot_deviation": worst_spot}, t0)


def suite_divergence_symm(density: int, samples: int, seed: int) -> SuiteOutcome:
    values = _grid(min(density, 11), -0.9, 0.9)
    axis = lambda v: np.array([0.0, 0.0, v])
    spots = [
        (
            "(1/2,-1/2)",
            cf.divergence_symm_commuting(axis(0.5), axis(-0.5)),
            2.0 * math.sqrt(3.0),
        )
    ]
    return _divergence_sweep(
        "divergence-symm",
        values,
        cost_mod.pauli_triple(),
        cf.state_z,
        lambda a, b: cf.divergence_symm_commuting(axis(a), axis(b)),
        spots,
    )


def suite_divergence_z(density: int, samples: int, seed: int) -> SuiteOutcome:
    values = _grid(min(density, 11), 0.0, 0.9)
    spots = [("(0,1/2)", cf.divergence_z_xy(0.0, 0.5), 1.0 - math.sqrt(3.0) / 2.0)]
    return _divergence_sweep(
        "divergence-z",
        values,
        cost_mod.sigma_z_observable(),
        cf.state_x,
        cf.divergence_z_xy,
        spots,
    )


# ---------------------------------------------------------------------------
# Triangle inequalities (closed forms, random sweeps).
# ---------------------------------------------------------------------------


def _triangle_sweep(name: str, samples: int, seed: int, margin_of, sampler) -> SuiteOutcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cases = []
    worst = np.inf
    for i in range(samples):
        triple = sampler(rng)
        margin = margin_of(*triple)
        worst = min(worst, margin)
        if margin < TOL_TRIANGLE or i == 0:
            cases.append(
                {
                    "case": f"i={i:05d}," + ",".join(f"{v:+.4f}" for v in triple),
                    "margin": margin,
                    "ok": margin >= TOL_TRIANGLE,
                }
            )
    return _finish(name, cases, {"min_margin": float(worst)}, t0)


def suite_triangle_symm(density: int, samples: int, seed: int) -> SuiteOutcome:
    return _triangle_sweep(
        "triangle-symm",
        samples,
        seed,
        cf.triangle_margin_symm,
        lambda rng: tuple(rng.uniform(-1.0, 1.0, 3)),
    )


def suite_triangle_z(density: int, samples: int, seed: int) -> SuiteOutcome:
    return _triangle_sweep(
        "triangle-z",
        samples,
        seed,
        cf.triangle_margin_z,
        lambda rng: tuple(rng.uniform(0.0, 1.0, 3)),
    )


# ---------------------------------------------------------------------------
# Cost identities.
# ---------------------------------------------------------------------------


def suite_costs(density: int, samples: int, seed: int) -> SuiteOutcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    cases = []
    for p in (1.0, 2.0):
        t = 2.0**p
        expected_symm = np.array(
            [[t, 0, 0, -t], [0, 2 * t, 0, 0], [0, 0, 2 * t, 0], [-t, 0, 0, t]], dtype=complex
        )
        exact_symm = bool(np.array_equal(cost_mod.cost_symm(p), expected_symm))
        exact_z = bool(
            np.array_equal(cost_mod.cost_z(p), np.diag([0.0, t, t, 0.0]).astype(complex))
        )
        cases.append({"case": f"matrix,p={p:g}", "symm_exact": exact_symm, "z_exact": exact_z,
                      "ok": exact_symm and exact_z})
    worst = 0.0
    for p in (1.0, 2.0):
        matrix = cost_mod.cost_symm(p)
        for i in range(samples):
            u = linalg.random_unitary(rng, 2)
            dev = cost_mod.check_unitary_invariance(matrix, u)
            worst = max(worst, dev)
            if dev > TOL_COST_INVARIANCE:
                cases.append({"case": f"unitary,p={p:g},i={i:03d}", "deviation": dev, "ok": False})
    cases.append(
        {"case": "unitary-invariance", "worst_deviation": worst, "ok": worst <= TOL_COST_INVARIANCE}
    )
    return _finish("costs", cases, {"invariance_deviation": worst}, t0)


# ---------------------------------------------------------------------------
# Multipartite decomposition.
# ---------------------------------------------------------------------------


def suite_factorized_k3(density: int, samples: int, seed: int) -> SuiteOutcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    observables = cost_mod.pauli_triple()
    cases = []
    worst_dev = 0.0
    worst_time = 0.0
    for i in range(samples):
        a, b = rng.uniform(-0.9, 0.9, 2)
        p = (1.0, 2.0)[i % 2]
        inst = transport.factorized_instance(
            cf.state_z(a), cf.state_z(b), observables, p, transport.MODE_LINEARIZED
        )
        t_solve = time.perf_counter()
        full = transport.wasserstein_distance(inst)
        t_solve = time.perf_counter() - t_solve
        decomposed = transport.solve_linearized_decomposed(inst)
        dev = abs(full.primal_objective - decomposed.total)
        worst_dev = max(worst_dev, dev)
        worst_time = max(worst_time, t_solve)
        cases.append(
            {
                "case": f"i={i:02d},a={a:+.4f},b={b:+.4f},p={p:g}",
                "full": full.primal_objective,
                "decomposed": decomposed.total,
                "deviation": dev,
                "solve_seconds": t_solve,
                "ok": dev <= TOL_FACTORIZED and t_solve < BIG_SOLVE_BUDGET_S,
            }
        )
    return _finish(
        "factorized-k3", cases, {"deviation": worst_dev, "solve_seconds": worst_time}, t0
    )


# ---------------------------------------------------------------------------
# Purification identity.
# ---------------------------------------------------------------------------


def suite_purification(density: int, samples: int, seed: int) -> SuiteOutcome:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    quad_cost = cost_mod.cost_symm(2.0)
    cases = []
    worst_identity = 0.0
    for i in range(samples):
        rho = linalg.random_density(rng, 2)
        value = transport.purification_coupling(rho).objective(quad_cost)
        expect = 8.0 - 4.0 * float(np.trace(linalg.sqrt_psd(rho)).real) ** 2
        dev = abs(value - expect)
        worst_identity = max(worst_identity, dev)
        if dev > TOL_PURIFICATION:
            cases.append({"case": f"random,i={i:03d}", "deviation": dev, "ok": False})
    cases.append(
        {
            "case": "identity-random",
            "worst_deviation": worst_identity,
            "ok": worst_identity <= TOL_PURIFICATION,
        }
    )
    worst_sdp = 0.0
    upper_bound_ok = True
    for a in _grid(density):
        rho = cf.state_z(a)
        purif_value = transport.purification_coupling(rho).objective(quad_cost)
        sdp_value = transport.wasserstein_distance(transport.symm_instance(rho, rho, 2.0)).dp
        dev = abs(purif_value - sdp_value)
        worst_sdp = max(worst_sdp, dev)
        upper_bound_ok = upper_bound_ok and sdp_value <= purif_value + 1e-7
        if dev > TOL_PURIFICATION_SDP:
            cases.append(
                {"case": f"grid,a={a:+.4f}", "purification": purif_value, "sdp": sdp_value,
                 "deviation": dev, "ok": False}
            )
    cases.append(
        {
            "case": "self-distance-grid",
            "worst_deviation": worst_sdp,
            "upper_bound": upper_bound_ok,
            "ok": worst_sdp <= TOL_PURIFICATION_SDP and upper_bound_ok,
        }
    )
    return _finish(
        "purification", cases, {"identity": worst_identity, "sdp_deviation": worst_sdp}, t0
    )


SUITES: dict[str, Callable[[int, int, int], SuiteOutcome]] = {
    "gap": suite_gap,
    "strong-duality": suite_strong_duality,
    "symm-commuting": suite_symm_commuting,
    "z-xy": suite_z_xy,
    "z-commuting": suite_z_commuting,
    "divergence-symm": suite_divergence_symm,
    "divergence-z": suite_divergence_z,
    "triangle-symm": suite_triangle_symm,
    "triangle-z": suite_triangle_z,
    "costs": suite_costs,
    "factorized-k3": suite_factorized_k3,
    "purification": suite_purification,
}

# Per-suite defaults chosen to match the shipped verification targets.
DEFAULTS: dict[str, dict[str, int]] = {
    "gap": {"density": 0, "samples": 0},
    "strong-duality": {"density": 0, "samples": 500},
    "symm-commuting": {"density": 21, "samples": 0},
    "z-xy": {"density": 21, "samples": 0},
    "z-commuting": {"density": 21, "samples": 0},
    "divergence-symm": {"density": 11, "samples": 0},
    "divergence-z": {"density": 11, "samples": 0},
    "triangle-symm": {"density": 0, "samples": 10_000},
    "triangle-z": {"density": 0, "samples": 10_000},
    "costs": {"density": 0, "samples": 100},
    "factorized-k3": {"density": 0, "samples": 20},
    "purification": {"density": 21, "samples": 100},
}


def suite_names() -> list[str]:
    return sorted(SUITES)


def run_suite(
    name: str, *, density: int | None = None, samples: int | None = None, seed: int = 0
) -> SuiteOutcome:
    """Run one named suite; unknown names raise ``KeyError``."""
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; known: {', '.join(suite_names())}")
    defaults = DEFAULTS[name]
    density = defaults["density"] if density is None else density
    samples = defaults["samples"] if samples is None else samples
    return SUITES[name](density, samples, seed)
