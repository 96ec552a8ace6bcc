"""Text formats: the native model file, DOT, PROMELA-style process types, reports."""

from __future__ import annotations

import json
import re
from typing import Dict, Iterable, List, Sequence, Union

from .automata import ActionSignature, InterfaceAutomaton
from .errors import ConstructionError
from .mcheck import ProcessNetwork, Verdict

MODEL_HEADER = "# midlearn interface automaton v1"


def dump_model(ia: InterfaceAutomaton) -> str:
    """Line-oriented model file: signature, states, then one transition per line."""
    sig = ia.signature
    lines = [
        MODEL_HEADER,
        "inputs " + " ".join(sorted(sig.inputs)),
        "outputs " + " ".join(sorted(sig.outputs)),
        "states " + " ".join(str(q) for q in sorted(ia.states)),
        f"initial {ia.initial}",
    ]
    for q in sorted(ia.names):
        lines.append(f"name {q} {ia.names[q]}")
    for q, a, t in sorted(ia.transitions):
        lines.append(f"{q} {sig.label(a)} {t}")
    return "\n".join(lines) + "\n"


def load_model(text: str) -> InterfaceAutomaton:
    inputs: List[str] = []
    outputs: List[str] = []
    states: List[int] = []
    initial = None
    names: Dict[int, str] = {}
    trans = []
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, _, rest = line.partition(" ")
        try:
            if head == "inputs":
                inputs = rest.split()
            elif head == "outputs":
                outputs = rest.split()
            elif head == "states":
                states = [int(x) for x in rest.split()]
            elif head == "initial":
                initial = int(rest)
            elif head == "name":
                q, _, nm = rest.partition(" ")
                names[int(q)] = nm
            else:
                q, label, t = line.split()
                if label[0] not in "?!":
                    raise ValueError(f"label {label!r} lacks ? or !")
                trans.append((int(q), label[1:], int(t)))
        except ValueError as exc:
            raise ConstructionError(f"model line {n}: {exc}") from None
    if initial is None:
        raise ConstructionError("model file has no initial state")
    sig = ActionSignature(inputs, outputs)
    return InterfaceAutomaton(sig, states, initial, trans, names)


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_dot(ia: InterfaceAutomaton, name: str = "ia") -> str:
    sig = ia.signature
    lines = [f"digraph {_dot_quote(name)} {{", "  rankdir=LR;", "  __start [shape=point];"]
    for q in sorted(ia.states):
        label = ia.names.get(q, str(q))
        shape = "circle" if ia.is_quiescent(q) else "doublecircle"
        lines.append(f"  {q} [label={_dot_quote(label)}, shape={shape}];")
    lines.append(f"  __start -> {ia.initial};")
    for q, a, t in sorted(ia.transitions):
        lines.append(f"  {q} -> {t} [label={_dot_quote(sig.label(a))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


_IDENT = re.compile(r"[^A-Za-z0-9_]")


def _ident(s: str) -> str:
    out = _IDENT.sub("_", s)
    return out if out[:1].isalpha() else "a_" + out


def _mtypes(actions: Iterable[str]) -> Dict[str, str]:
    table: Dict[str, str] = {}
    for a in sorted(set(actions)):
        ident = _ident(a)
        if ident in table.values():
            raise ConstructionError(f"action {a!r} collides with another after renaming")
        table[a] = ident
    return table


def _proctype(
    name: str, ia: InterfaceAutomaton, rename, local: set, terminal, mtype: Dict[str, str]
) -> List[str]:
    lines = [f"proctype {_ident(name)}(chan InChannel; chan OutChannel) {{"]
    for q in sorted(ia.states):
        label = ("end_S" if q in terminal else "S") + str(q)
        moves = ia.outgoing(q)
        lines.append(f"{label}:")
        if not moves:
            lines.append("  false;")
            continue
        lines.append("  if")
        for a, t in moves:
            g = rename.get(a, a)
            target = ("end_S" if t in terminal else "S") + str(t)
            if g in local:
                step = f"skip /* {g} */"
            elif a in ia.signature.inputs:
                step = f"InChannel?{mtype[g]}"
            else:
                step = f"OutChannel!{mtype[g]}"
            lines.append(f"  :: atomic {{ {step} -> goto {target} }}")
        lines.append("  fi;")
    lines.append("}")
    return lines


def emit_promela(model: Union[InterfaceAutomaton, ProcessNetwork], name: str = "Model") -> str:
    """One process type per automaton over unbuffered channels, plus ``init``.

    A lone automaton gets its own input and output channel. In a network all
    process types share one rendezvous channel; action names are unique per
    synchronised pair, so each send can only meet its intended receive.
    Actions without a partner become ``skip``. Terminal states carry ``end``
    labels.
    """
    if isinstance(model, InterfaceAutomaton):
        mtype = _mtypes(model.signature.actions)
        lines = ["/* generated by midlearn */", "mtype = { " + ", ".join(mtype.values()) + " };", ""]
        lines += _proctype(name, model, {}, set(), model.states, mtype)
        lines += [
            "",
            "chan env_in = [0] of { mtype };",
            "chan env_out = [0] of { mtype };",
            "",
            "init {",
            f"  run {_ident(name)}(env_in, env_out)",
            "}",
        ]
        return "\n".join(lines) + "\n"

    net = model
    actions = set()
    for p in net.processes:
        actions |= p.inputs | p.outputs
    mtype = _mtypes(actions)
    local = actions - set(net.sync)
    lines = ["/* generated by midlearn */", "mtype = { " + ", ".join(mtype.values()) + " };", ""]
    for p in net.processes:
        terminal = p.terminal
        lines += _proctype(p.name, p.automaton, p.rename, local, terminal, mtype)
        lines.append("")
    lines += ["chan bus = [0] of { mtype };", "", "init {", "  atomic {"]
    lines += [f"    run {_ident(p.name)}(bus, bus);" for p in net.processes]
    lines += ["  }", "}"]
    return "\n".join(lines) + "\n"


TABLE1_COLUMNS = ["Model", "|Q|", "|T|", "#MM", "#EQ", "#Experiments", "Time"]
TABLE2_COLUMNS = ["Model", "#States", "Memory", "Time", "Conclusion"]


def format_table(columns: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    cells = [list(map(str, columns))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[k]) for r in cells) for k in range(len(columns))]
    out = []
    for k, r in enumerate(cells):
        out.append(" | ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if k == 0:
            out.append("-+-".join("-" * w for w in widths))
    return "\n".join(out) + "\n"


def verdict_row(label: str, v: Verdict, timings: bool = True) -> List[object]:
    time_col = f"{v.elapsed:.2f}" if timings else "-"
    return [label, v.states_explored, v.peak_memory_estimate, time_col, v.conclusion]


def to_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
