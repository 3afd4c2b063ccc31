"""Base experiment with the field, character and declaration plumbing shared by every subcommand."""

import logging
from abc import ABC, abstractmethod
from typing import Any, ClassVar, Dict, List, Optional, Sequence, Tuple

from ..config.models import RunConfig, Settings, Subcommand
from ..core.characters import AdditiveCharacter, MultiplicativeCharacter, resolve_chi, resolve_psi
from ..core.errors import UnresolvedReference
from ..core.field import FieldDescriptor, FieldElement, make_field
from ..core.primes import prime_range
from ..dsl.ast import BoolConst, DefinableFormula, Node, Program
from ..lab.geometry import AffineVariety
from .reports import Report

logger = logging.getLogger(__name__)


class Experiment(ABC):
    """One subcommand run over a list of fields, filling a Report as it goes."""

    subcommand: ClassVar[Subcommand]

    def __init__(self, run: RunConfig, settings: Settings, program: Optional[Program] = None) -> None:
        """Initialize experiment.

        Args:
            run: Validated command-line run
            settings: Effective configuration settings
            program: Parsed definitions (empty when the subcommand needs none)
        """
        self.run_config = run
        self.settings = settings
        self.program = program or Program()
        self.arguments: Dict[str, Any] = dict(run.arguments)
        self.report = Report(run.subcommand.value, config=self.describe())

    def describe(self) -> Dict[str, Any]:
        """Run parameters recorded in the report; output locations are left out so reruns compare equal."""
        return self.run_config.model_dump(mode="json", exclude={"out", "expectations", "report_format", "workers"})

    # declarations

    def declaration(self, name: str, kind: str) -> Node:
        decl = self.program.get(name, kind)
        if decl is None:
            raise UnresolvedReference(f"No {kind} declaration named '{name}' in the loaded definitions")
        return decl.node

    def argument(self, name: str, default: Any = None) -> Any:
        value = self.arguments.get(name)
        return default if value is None else value

    def formula(self, name: str) -> DefinableFormula:
        node = self.declaration(name, "formula")
        assert isinstance(node, DefinableFormula)
        return node

    def optional_formula(self, name: Optional[str], arity: int) -> DefinableFormula:
        """Named formula, or the whole space F_q^arity when no name is given."""
        if not name:
            return DefinableFormula(BoolConst(True), arity)
        return self.formula(name)

    def variety(self, name: str) -> AffineVariety:
        return AffineVariety.from_formula(self.formula(name))

    # fields

    def field_sizes(self) -> List[Tuple[int, int]]:
        """Explicit p^e sizes, else the prime list with e = 1."""
        if self.run_config.field_sizes:
            return list(self.run_config.field_sizes)
        primes = list(self.run_config.primes)
        if not primes and self.run_config.prime_high is not None:
            primes = prime_range(self.run_config.prime_low or 2, self.run_config.prime_high)
        if not primes:
            raise ValueError(f"'{self.subcommand.value}' needs fields: give --primes, --pmax or --q")
        return [(p, 1) for p in primes]

    def field_groups(self) -> List[Tuple[int, List[int]]]:
        """Field sizes grouped by extension degree, in first-seen order."""
        groups: Dict[int, List[int]] = {}
        for p, e in self.field_sizes():
            groups.setdefault(e, []).append(p)
        return list(groups.items())

    def field(self, p: int, e: int = 1) -> FieldDescriptor:
        return make_field(p, e, dlog_cap=self.run_config.dlog_cap)

    def characters(self, desc: FieldDescriptor) -> Optional[Tuple[AdditiveCharacter, MultiplicativeCharacter]]:
        """Characters named by the run's rules, or None when the field has no matching chi."""
        chi = resolve_chi(desc, self.run_config.chi_rule, self.run_config.order_floor)
        if chi is None:
            logger.debug("No character for rule '%s' over F_%s", self.run_config.chi_rule, desc.label)
            return None
        return resolve_psi(desc, self.run_config.psi_rule), chi

    def field_params(self, desc: FieldDescriptor) -> Tuple[FieldElement, ...]:
        return tuple(desc.element(int(v)) for v in self.params())

    def params(self) -> Sequence[int]:
        return tuple(int(v) for v in self.argument("params", ()))

    # running

    @abstractmethod
    def execute(self) -> None:
        """Fill self.report; rows are appended as each field finishes."""

    def run(self) -> Report:
        """Execute the experiment; on failure the report is marked partial and the error propagates."""
        logger.info("Running %s", self.subcommand.value)
        try:
            self.execute()
        except BaseException:
            self.report.partial = True
            logger.debug("%s stopped after %d rows", self.subcommand.value, len(self.report.rows))
            raise
        return self.report
