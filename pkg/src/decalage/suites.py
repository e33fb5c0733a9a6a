"""The named check batteries shared by the command line and the test suite."""

from __future__ import annotations

from .bockstein import (
    connecting_factorization,
    split_mod_xi,
    verify_reduction_identification,
    verify_mod_xi_subquotient,
)
from .checks import CheckResult
from .complexes import FreeComplex
from .eta import graded_piece, verify_eta_m_cohomology, xi_step_inclusion_holds
from .sites import SheafComplex


def _guard(name: str, fn) -> CheckResult:
    try:
        return fn()
    except Exception as exc:  # a crash is a failed check with the message as witness
        out = CheckResult(name)
        out.fail(error=f"{type(exc).__name__}: {exc}")
        return out


def lemma_battery(K: FreeComplex) -> list:
    """Every stage-level identity for one complex, across all useful m."""
    from .bockstein import bockstein_complex

    results = []
    try:
        bc = bockstein_complex(K)
    except Exception:
        bc = None
    for m in range(0, K.hi + 3):
        results.append(_guard("eta-m.cohomology",
                              lambda m=m: verify_eta_m_cohomology(K, m)))
    for m in range(0, K.hi + 2):
        results.append(_guard("eta-m.graded-piece",
                              lambda m=m: graded_piece(K, m).verify()))
        results.append(_guard("eta-m.mod-xi-subquotient",
                              lambda m=m: verify_mod_xi_subquotient(K, m, bc)))
        results.append(_guard("eta-m.connecting-bockstein",
                              lambda m=m: connecting_factorization(K, m, bc)))
        results.append(_guard("eta-m.mod-xi-splitting",
                              lambda m=m: split_mod_xi(K, m, bc).check))
    results.append(_guard("eta.mod-xi-bockstein-model",
                          lambda: verify_reduction_identification(K, bc)))
    filt = CheckResult("eta-m.filtration-steps")
    for m in range(0, K.hi + 2):
        try:
            filt.expect(xi_step_inclusion_holds(K, m), m=m)
        except Exception as exc:
            filt.fail(m=m, error=str(exc))
    results.append(filt)
    return results


def sheaf_lemma_report(F: SheafComplex, instance_id: str) -> dict:
    """Run the lemma battery on every stalk of an instance."""
    checks = []
    passed = True
    try:
        F.validate()
    except Exception as exc:
        bad = CheckResult("instance.valid")
        bad.fail(error=f"{type(exc).__name__}: {exc}")
        return {"instance": instance_id, "passed": False,
                "checks": [bad.to_json()]}
    for x in F.site.elements:
        for result in lemma_battery(F.stalk(x)):
            record = result.to_json()
            record["stalk"] = x
            checks.append(record)
            passed = passed and result.passed
    return {"instance": instance_id, "passed": passed, "checks": checks}
