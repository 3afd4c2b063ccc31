"""Discrepancy tables, exponent searches and prime witness searches."""

import logging
from fractions import Fraction
from typing import Any, List, Optional, Sequence

from ..config.models import Subcommand
from ..core.errors import IndependencePrecheckFailed, UnresolvedReference
from ..core.primes import prime_range
from ..dsl.ast import WitnessSpec
from ..lab.equidist import (
    ETKParams,
    TorusBox,
    TorusSequence,
    discrepancy,
    discrepancy_mode,
    etk_bound,
    exponent_search,
    witness_search,
)
from .base_experiment import Experiment

logger = logging.getLogger(__name__)


def _fractions(values: Sequence[Any]) -> List[Fraction]:
    return [Fraction(str(v).strip()) for v in values]


class DiscrepancyExperiment(Experiment):
    """Discrepancy of Kronecker sequences against the ETK bound."""

    subcommand = Subcommand.DISCREPANCY

    def execute(self) -> None:
        alpha = [float(Fraction(str(a))) for a in self.argument("alpha", ["0.41421356237309503"])]
        lengths = [int(n) for n in self.argument("n", [100, 1000])]
        heights = [int(h) for h in self.argument("H", [4, 16, 64])]
        equidist = self.settings.equidist
        violations = 0
        for n in lengths:
            X = TorusSequence.kronecker(alpha, n)
            mode = discrepancy_mode(X, equidist.exact_2d_max_points)
            value = float(discrepancy(X, equidist.exact_2d_max_points, equidist.grid_resolution))
            for H in heights:
                params = ETKParams(H, equidist.c_d)
                bound = etk_bound(X, params)
                dominated = value <= bound
                violations += not dominated
                self.report.add_row(
                    {
                        "d": X.dim,
                        "n": n,
                        "H": H,
                        "c_d": params.constant(X.dim),
                        "discrepancy": value,
                        "mode": mode,
                        "etk_bound": bound,
                        "dominated": dominated,
                    }
                )
        self.report.summary = {"rows": len(self.report.rows), "violations": violations}


class EtkSearchExperiment(Experiment):
    """One exponent search: smallest l = f mod R with l * gamma in the box and order at least K."""

    subcommand = Subcommand.ETK_SEARCH

    def box(self, dim: int) -> TorusBox:
        center = self.argument("center")
        if center is not None:
            return TorusBox.around(_fractions(center), Fraction(str(self.argument("radius", "1/20"))))
        low = self.argument("low")
        high = self.argument("high")
        if low is None or high is None:
            return TorusBox.full(dim)
        return TorusBox(tuple(_fractions(low)), tuple(_fractions(high)))

    def execute(self) -> None:
        gammas = _fractions(self.argument("gammas", []))
        if not gammas:
            raise ValueError("etk-search needs --gammas")
        box = self.box(len(gammas))
        R = int(self.argument("R", 1))
        f = int(self.argument("f", 1))
        K = int(self.argument("K", 1))
        l_max = int(self.argument("l_max", 10**6))
        equidist = self.settings.equidist
        row = {"gammas": gammas, "R": R, "f": f, "K": K, "volume": box.volume}
        try:
            result = exponent_search(gammas, box, R, f, K, l_max, equidist.independence_height, equidist.c_d)
        except IndependencePrecheckFailed as exc:
            row.update({"found": False, "relation": list(exc.relation)})
            self.report.add_row(row)
            self.report.summary = {"found": False, "precheck_failed": True}
            return
        row.update(result.as_dict())
        self.report.add_row(row)
        self.report.summary = {"found": result.found, "precheck_failed": False}
        if result.found:
            self.report.summary["l"] = row["l"]


class WitnessExperiment(Experiment):
    """Primes and character exponents meeting a witness declaration."""

    subcommand = Subcommand.WITNESS

    def spec(self) -> WitnessSpec:
        name: Optional[str] = self.argument("witness")
        if name is None:
            decl = self.program.first("witness")
            if decl is None:
                raise UnresolvedReference("The loaded definitions contain no witness declaration")
            node = decl.node
        else:
            node = self.declaration(name, "witness")
        assert isinstance(node, WitnessSpec)
        return node

    def execute(self) -> None:
        spec = self.spec()
        primes: Optional[List[int]] = list(self.run_config.primes) or None
        if primes is None and self.run_config.prime_high is not None:
            primes = prime_range(self.run_config.prime_low or 2, self.run_config.prime_high)
        max_records = self.argument("max_records")
        records = witness_search(
            spec,
            primes,
            int(max_records) if max_records is not None else None,
            self.settings.equidist.independence_height,
            self.run_config.workers,
        )
        for record in records:
            self.report.add_row(record.as_dict())
        self.report.summary = {
            "records": len(records),
            "verified": sum(r.verified for r in records),
            "primes": [r.p for r in records],
        }
