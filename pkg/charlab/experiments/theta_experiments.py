"""Theta-sum tables and closure-algebra checks."""

import itertools
import logging
from typing import Optional

from ..config.models import Subcommand
from ..core.errors import BudgetExceeded
from ..dsl.ast import ThetaSpec
from ..lab.theta import SumPadding, default_padding, theta_combine, theta_eval
from .base_experiment import Experiment

logger = logging.getLogger(__name__)

COMBINATIONS = ("product", "sum", "conjugate")


class ThetaExperiment(Experiment):
    """Theta values at every parameter tuple; with a combination, the combined spec against pointwise arithmetic."""

    subcommand = Subcommand.THETA

    def theta(self, name: str) -> ThetaSpec:
        node = self.declaration(name, "theta")
        assert isinstance(node, ThetaSpec)
        return node

    def execute(self) -> None:
        s1 = self.theta(self.argument("theta", "theta"))
        kind: Optional[str] = self.argument("combine")
        s2: Optional[ThetaSpec] = None
        padding: Optional[SumPadding] = None
        combined: Optional[ThetaSpec] = None
        if kind is not None:
            if kind not in COMBINATIONS:
                raise ValueError(f"Unknown combination '{kind}'; expected one of {', '.join(COMBINATIONS)}")
            if kind != "conjugate":
                s2 = self.theta(self.argument("other", "other"))
            if kind == "sum":
                assert s2 is not None
                padding = default_padding(s1, s2)
            combined = theta_combine(kind, s1, s2, padding)

        max_delta = 0.0
        skipped = []
        for p, e in self.field_sizes():
            desc = self.field(p, e)
            chars = self.characters(desc)
            if chars is None or (padding is not None and not padding.valid_mod(p)):
                skipped.append(desc.q)
                continue
            psi, chi = chars
            if desc.q**s1.arity > self.run_config.budget:
                raise BudgetExceeded(f"{desc.q}^{s1.arity} parameter tuples exceed the budget")
            elements = list(desc.elements())
            for params in itertools.product(elements, repeat=s1.arity):
                value = theta_eval(s1, params, desc, psi, chi)
                row = {"q": desc.q, "params": [desc.format(x) for x in params], "re": value.real, "im": value.imag}
                if combined is not None:
                    if kind == "conjugate":
                        expected = value.conjugate()
                    else:
                        assert s2 is not None
                        other = theta_eval(s2, params, desc, psi, chi)
                        expected = value * other if kind == "product" else value + other
                    actual = theta_eval(combined, params, desc, psi, chi)
                    delta = abs(actual - expected)
                    max_delta = max(max_delta, delta)
                    row.update({"combined_re": actual.real, "combined_im": actual.imag, "delta": delta})
                self.report.add_row(row)
        summary = {"rows": len(self.report.rows), "skipped": skipped}
        if combined is not None:
            summary.update({"combine": kind, "max_delta": max_delta, "fiber_bound": combined.effective_bound})
        self.report.summary = summary
