"""Counting-measure fits, definable integration, Fubini checks and case decompositions."""

import logging
from typing import List, Tuple

from ..config.models import Subcommand
from ..core.errors import OrderTooLarge
from ..dsl.ast import DefinableFormula, PredicateExpr
from ..lab.measure import (
    MIN_FIT_FIELDS,
    case_decompose,
    count_points,
    fit_counts,
    fubini_check,
    integrate_predicate,
    trace_coset_check,
)
from .base_experiment import Experiment

logger = logging.getLogger(__name__)


class MeasureFitExperiment(Experiment):
    """Point counts of a family and the fitted dimension and multiplicity."""

    subcommand = Subcommand.MEASURE_FIT

    def execute(self) -> None:
        formula = self.formula(self.argument("formula", "phi"))
        params = self.params()
        run = self.run_config
        minimum = max(MIN_FIT_FIELDS, self.settings.suite.fit_min_fields)
        if len(self.field_sizes()) < minimum:
            raise ValueError(f"measure-fit needs at least {minimum} fields, got {len(self.field_sizes())}")
        counts: List[Tuple[int, int]] = []
        for extension, primes in self.field_groups():
            counts.extend(
                count_points(formula, primes, params, run.budget, run.workers, run.scan_cap, run.dlog_cap, extension)
            )
        estimate = fit_counts(counts, formula.arity - len(params))
        residuals = dict(estimate.residuals)
        for q, count in estimate.counts:
            self.report.add_row({"q": q, "count": count, "residual": residuals[q]})
        self.report.summary = {
            "d": estimate.d,
            "mu": estimate.mu,
            "mu_num": estimate.mu.numerator,
            "mu_den": estimate.mu.denominator,
            "mu_raw": estimate.mu_raw,
            "C": estimate.C,
            "degenerate": estimate.degenerate,
        }
        self.report.payload = {
            "family": self.argument("formula", "phi"),
            "primes": [p for p, _ in self.field_sizes()],
            "counts": estimate.counts,
            "d": estimate.d,
            "mu_num": estimate.mu.numerator,
            "mu_den": estimate.mu.denominator,
            "C": estimate.C,
            "residuals": estimate.residuals,
        }


class PredicateExperiment(Experiment):
    """Shared lookup of the predicate and its domain."""

    def predicate_and_domain(self) -> Tuple[PredicateExpr, DefinableFormula]:
        node = self.declaration(self.argument("predicate", "f"), "predicate")
        assert isinstance(node, PredicateExpr)
        return node, self.optional_formula(self.argument("domain"), node.arity)


class IntegrateExperiment(PredicateExperiment):
    """Per-field averages of a predicate over a definable set and their decay."""

    subcommand = Subcommand.INTEGRATE

    def execute(self) -> None:
        pred, domain = self.predicate_and_domain()
        run = self.run_config
        reports = []
        for extension, primes in self.field_groups():
            report = integrate_predicate(
                pred,
                domain,
                primes,
                self.params(),
                run.psi_rule,
                run.chi_rule,
                run.order_floor,
                self.program,
                run.budget,
                run.workers,
                run.scan_cap,
                run.dlog_cap,
                extension,
            )
            reports.append(report)
            for value in report.values:
                self.report.add_row(
                    {
                        "q": value.q,
                        "size": value.size,
                        "re": value.value.real,
                        "im": value.value.imag,
                        "abs": abs(value.value),
                        "exact": value.rational,
                    }
                )
        merged = reports[0]
        for extra in reports[1:]:
            merged.values.extend(extra.values)
            merged.skipped.extend(extra.skipped)
        self.report.summary = {
            "fields": len(merged.values),
            "skipped": merged.skipped,
            "bound": merged.bound,
            "within_bound": merged.within_bound,
            "tail_max": merged.tail_max,
            "slope": merged.slope,
        }
        self.report.payload = {
            "values": [(v.q, v.value.real, v.value.imag) for v in merged.values],
            "tail_max": merged.tail_max,
            "slope": merged.slope,
        }


class FubiniExperiment(PredicateExperiment):
    """Direct against iterated averages over a product-structured domain."""

    subcommand = Subcommand.FUBINI

    def execute(self) -> None:
        pred, domain = self.predicate_and_domain()
        split = int(self.argument("split", 1))
        max_delta = 0.0
        hypothesis = True
        for p, e in self.field_sizes():
            desc = self.field(p, e)
            chars = self.characters(desc)
            if chars is None:
                continue
            result = fubini_check(
                pred,
                domain,
                split,
                desc,
                chars[0],
                chars[1],
                self.field_params(desc),
                self.program,
                self.run_config.budget,
                self.run_config.scan_cap,
            )
            row = result.as_dict()
            row["fibers"] = len(result.fiber_sizes)
            self.report.add_row(row)
            max_delta = max(max_delta, result.delta)
            hypothesis = hypothesis and result.hypothesis_holds
        self.report.summary = {"fields": len(self.report.rows), "max_delta": max_delta, "hypothesis": hypothesis}


class DecomposeExperiment(PredicateExperiment):
    """Character-value cells and their ring-formula descriptions."""

    subcommand = Subcommand.DECOMPOSE

    def execute(self) -> None:
        kind = self.argument("kind", "multiplicative")
        trace_cosets = bool(self.argument("trace_cosets", False))
        if not trace_cosets:
            pred, domain = self.predicate_and_domain()
        skipped = []
        for p, e in self.field_sizes():
            desc = self.field(p, e)
            chars = self.characters(desc)
            if chars is None:
                skipped.append(desc.q)
                continue
            psi, chi = chars
            if trace_cosets:
                result = trace_coset_check(desc, psi, self.run_config.scan_cap)
            else:
                try:
                    result = case_decompose(
                        pred,
                        domain,
                        desc,
                        psi,
                        chi,
                        self.field_params(desc),
                        self.program,
                        kind,
                        self.settings.decomposition.max_order,
                        self.run_config.budget,
                        self.run_config.scan_cap,
                    )
                except OrderTooLarge as exc:
                    logger.warning("Skipping F_%s: %s", desc.label, exc)
                    skipped.append(desc.q)
                    continue
            self.report.add_row(
                {
                    "q": result.q,
                    "kind": result.kind,
                    "order": result.order,
                    "cells": len(result.cells),
                    "matching_cells": sum(c.matches for c in result.cells),
                    "partition_ok": result.partition_ok,
                    "delta": result.delta,
                    "all_match": result.all_match,
                }
            )
        self.report.summary = {
            "fields": len(self.report.rows),
            "skipped": skipped,
            "all_match": all(row["all_match"] for row in self.report.rows),
            "max_delta": max((row["delta"] for row in self.report.rows), default=0.0),
        }
