"""Exception hierarchy shared by all coplaces modules.

Two broad families matter to the command line front end: input files that
cannot be decoded (`InputFormatError`) and inputs that decode fine but
violate a semantic requirement such as safeness or graph well-formedness
(`AnalysisError`). Everything else derives from `CoplacesError` directly.
"""

from __future__ import annotations


class CoplacesError(Exception):
    """Base class of every error raised by this package."""


class InputFormatError(CoplacesError):
    """A net, equation system or matrix file could not be decoded."""


class AnalysisError(CoplacesError):
    """Input decodes but violates a semantic requirement of the analysis."""


# -- Petri net semantics -----------------------------------------------------

class UnknownTransition(CoplacesError):
    """Transition identifier not present in the net."""


class NotEnabled(CoplacesError):
    """Attempt to fire a transition that is not enabled; a caller bug."""


class NotSafe(AnalysisError):
    """A reachable marking puts two or more tokens in one place."""

    def __init__(self, witness):
        super().__init__(f"net is not 1-bounded, witness marking {witness}")
        self.witness = witness


# -- Net file formats --------------------------------------------------------

class MalformedNet(InputFormatError):
    """Broken XML or a schema violation in a PNML document."""


class UnsupportedNet(InputFormatError):
    """PNML feature outside the plain place/transition subset."""


class NetSyntaxError(InputFormatError):
    """Syntax error in the line-oriented net format."""

    def __init__(self, line: int, column: int, expected: str):
        super().__init__(f"line {line}, column {column}: expected {expected}")
        self.line = line
        self.column = column
        self.expected = expected


class DuplicateId(InputFormatError):
    """A place or transition identifier is declared twice."""

    def __init__(self, name: str, line: int | None = None):
        at = f" (line {line})" if line is not None else ""
        super().__init__(f"duplicate identifier '{name}'{at}")
        self.name = name


class UnknownPlace(InputFormatError):
    """A transition line references a place that was never declared."""

    def __init__(self, name: str, line: int | None = None):
        at = f" (line {line})" if line is not None else ""
        super().__init__(f"unknown place '{name}'{at}")
        self.name = name


# -- Equation systems and token flow graphs ----------------------------------

class EquationSyntaxError(InputFormatError):
    """Unparsable equation line."""

    def __init__(self, line: int, detail: str = ""):
        extra = f": {detail}" if detail else ""
        super().__init__(f"equation syntax error at line {line}{extra}")
        self.line = line


class BadConstant(InputFormatError):
    """Constant outside {0, 1} in an equation."""

    def __init__(self, value: int):
        super().__init__(f"constant {value} not allowed, only 0 and 1 are")
        self.value = value


class DuplicateRemoval(AnalysisError):
    """Two equations remove the same node (well-formedness condition T3)."""

    def __init__(self, node):
        super().__init__(
            f"node '{node}' is removed by more than one equation"
            " (violates single-removal condition T3)")
        self.node = node


class WellFormednessError(AnalysisError):
    """A token flow graph violates one of T1, T2, T3, T4 or acyclicity."""

    def __init__(self, condition: str, nodes, detail: str = ""):
        nodes = tuple(nodes)
        shown = ", ".join(str(n) for n in nodes)
        extra = f": {detail}" if detail else ""
        super().__init__(f"well-formedness condition {condition} violated"
                         f" by {{{shown}}}{extra}")
        self.condition = condition
        self.nodes = nodes


class UnknownNode(CoplacesError):
    """Node identifier not present in the token flow graph."""


# -- Configuration operations ------------------------------------------------

class IllDefinedInput(CoplacesError):
    """Input configuration fails the CBot/CEq well-definedness check."""


class UndefinedAt(CoplacesError):
    def __init__(self, node):
        super().__init__(f"configuration is undefined at node '{node}'")
        self.node = node


class NotAncestor(CoplacesError):
    """There is no path from the source node to the requested target."""


class NotAgglomeration(CoplacesError):
    def __init__(self, node):
        super().__init__(f"node '{node}' heads no agglomeration equation")
        self.node = node


class BadShareSum(CoplacesError):
    """Shares do not form a valid decomposition of the node value."""


class NoTokenAt(CoplacesError):
    def __init__(self, node):
        super().__init__(f"no token at node '{node}'")
        self.node = node


# -- Concurrency kernel ------------------------------------------------------

class IncompleteRootRelation(AnalysisError):
    """Complete-mode computation was given a root relation with holes."""


class InvalidRootRelation(AnalysisError):
    """Root relation does not cover the graph roots or contradicts itself."""


# -- Matrix files ------------------------------------------------------------

class BadHeader(InputFormatError):
    """Matrix file header is missing or inconsistent."""


class RowLengthMismatch(InputFormatError):
    def __init__(self, row: int):
        super().__init__(f"matrix row {row} does not decode"
                         f" to exactly {row + 1} cells")
        self.row = row


class BadSymbol(InputFormatError):
    def __init__(self, row: int, col: int):
        super().__init__(f"bad cell symbol in matrix row {row}, column {col}")
        self.row = row
        self.col = col


class OrderMismatch(InputFormatError):
    """Two matrix documents do not share the same node ordering."""
