"""Synthesis templates: skeleton TSL files with the mined pieces filled in.

The skeletons are kept verbatim. Only the slots in braces, the bound and start
names and (for Taxi) the wall lines are rewritten.
"""
from __future__ import annotations

import re
from typing import Iterable

from ..logic import Trace, UpdateTerm, identity_update
from ..syntax import format_term

GRID_TEMPLATE = """\
inBounds = (gte x B_MIN) && (lte x B_MAX) && (gte y B_MIN) && (lte y B_MAX)
          // && !(eq x w0x && eq y w0y) && !(eq x w00x && eq y w00y) {Taxi}
          // && !(eq x w1x && eq y w1y) && !(eq x w11x && eq y w11y) {Taxi}
xMoves = {discovered_x_updates}
yMoves = {discovered_y_updates}
assume {
    eq x START_X;
    eq y START_Y;
}
guarantee {
    G inBounds;                                       // Stay in bounds
    G ((xMoves && [y <- y]) || ([x <- x] && yMoves));     // Discovered updates
    {mined_tslf_specification};                       // Mined Objective
}
"""

BLACKJACK_TEMPLATE = """\
always assume {
    (gte handValue MIN_HAND) && (lte handValue MAX_HAND);
    (gte dealerCard MIN_DEALER) && (lte dealerCard MAX_DEALER);
}

guarantee {
    {mined_tslf_specification};
}
"""

_SPEC_SLOT = "{mined_tslf_specification};"


def discovered_updates(traces: Iterable[Trace], variable: str) -> list[UpdateTerm]:
    """Non-identity updates of ``variable`` used anywhere in ``traces``, sorted by text."""
    ident = identity_update(variable)
    found = {t for tr in traces for step in tr.steps for t in step
             if isinstance(t, UpdateTerm) and t.target == variable and t != ident}
    return sorted(found, key=format_term)


def _disjunction(updates) -> str:
    parts = [u if isinstance(u, str) else format_term(u) for u in updates]
    return " || ".join(parts) if parts else "false"


def _spec_lines(spec, indent: str) -> str:
    fs = [str(f) for f in spec.formulas()]
    if not fs:
        return "true;"
    return (";\n" + indent).join(fs) + ";"


def _sub(text: str, name: str, value) -> str:
    return re.sub(rf"\b{name}\b", str(value), text)


def emit_grid(spec, x_updates, y_updates, constants: dict) -> str:
    text = GRID_TEMPLATE
    # bounds: the skeleton has one B_MAX; non-square boards need one per axis
    text = text.replace("(lte x B_MAX)", f"(lte x {constants['B_MAX_X']})")
    text = text.replace("(lte y B_MAX)", f"(lte y {constants['B_MAX_Y']})")
    for name in ("B_MIN", "START_X", "START_Y"):
        text = _sub(text, name, constants[name])
    if "w0x" in constants:
        out = []
        for line in text.splitlines():
            if line.rstrip().endswith("{Taxi}"):
                line = line.replace("// ", "", 1).replace(" {Taxi}", "")
                for name in ("w0x", "w0y", "w00x", "w00y", "w1x", "w1y", "w11x", "w11y"):
                    line = _sub(line, name, constants[name])
            out.append(line)
        text = "\n".join(out) + "\n"
    text = text.replace("{discovered_x_updates}", _disjunction(x_updates))
    text = text.replace("{discovered_y_updates}", _disjunction(y_updates))
    return text.replace(_SPEC_SLOT, _spec_lines(spec, "    "))


def emit_blackjack(spec, constants: dict) -> str:
    text = BLACKJACK_TEMPLATE
    for name in ("MIN_HAND", "MAX_HAND", "MIN_DEALER", "MAX_DEALER"):
        text = _sub(text, name, constants[name])
    return text.replace(_SPEC_SLOT, _spec_lines(spec, "    "))


def emit_template(spec, traces, config) -> str:
    """Template text for ``config``'s game, with updates taken from ``traces``."""
    if spec is None:
        raise ValueError("no specification to embed")
    constants = config.board_constants()
    if config.game == "blackjack":
        return emit_blackjack(spec, constants)
    traces = list(traces)
    xs, ys = discovered_updates(traces, "x"), discovered_updates(traces, "y")
    if not xs and not ys:
        raise ValueError("no discovered movement updates to embed")
    return emit_grid(spec, xs, ys, constants)
