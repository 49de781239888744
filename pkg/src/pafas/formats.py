"""XML and DOT serialisation of refusal transition systems."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from importlib import resources

from .semantics import Rts

SCHEMA_FILE = "rts.xsd"


def to_xml(rts: Rts) -> str:
    root = ET.Element("rts", root=str(rts.root))
    if rts.reduced:
        root.set("reduced", "true")
    for i, label in enumerate(rts.labels):
        ET.SubElement(root, "node", id=str(i), label=label)
    for s, a, d in rts.actions:
        # attribute order matters for readability only
        el = ET.SubElement(root, "act")
        el.set("from", str(s))
        el.set("to", str(d))
        el.set("label", a)
    for s, u, d in rts.time_edges():
        el = ET.SubElement(root, "time")
        el.set("from", str(s))
        el.set("to", str(d))
        el.set("full", "true" if not u else "false")
        for a in sorted(u):
            ET.SubElement(el, "forbid", a=a)
    ET.indent(root)
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def from_xml(text: str) -> Rts:
    root = ET.fromstring(text)
    if root.tag != "rts":
        raise ValueError(f"expected <rts>, found <{root.tag}>")
    nodes = {int(n.get("id")): n.get("label") for n in root.iter("node")}
    if sorted(nodes) != list(range(len(nodes))):
        raise ValueError("node ids must be 0..n-1")
    labels = [nodes[i] for i in range(len(nodes))]
    actions = sorted((int(e.get("from")), e.get("label"), int(e.get("to"))) for e in root.iter("act"))
    time = {}
    for e in root.iter("time"):
        s = int(e.get("from"))
        if s in time:
            raise ValueError(f"node {s} has two time edges")
        u = frozenset(f.get("a") for f in e.iter("forbid"))
        if (e.get("full") in ("true", "1")) != (not u):
            raise ValueError(f"time edge from {s}: 'full' disagrees with forbidden set")
        time[s] = (u, int(e.get("to")))
    return Rts(int(root.get("root")), labels, actions, time, None,
               reduced=root.get("reduced") in ("true", "1"))


def schema_text() -> str:
    return resources.files("pafas").joinpath("data", SCHEMA_FILE).read_text(encoding="utf-8")


def validate_xml(text: str) -> None:
    """Raise ``xmlschema.XMLSchemaValidationError`` if ``text`` does not match the bundled schema."""
    import xmlschema

    xmlschema.XMLSchema(schema_text()).validate(text)


def _q(s):
    return '"' + s.replace("\\", "\\\\").replace('"', r"\"") + '"'


def to_dot(rts: Rts, highlight=(), name="rts") -> str:
    """Graphviz text. Full time steps are bold blue, constrained ones dashed with their
    forbidden set; edges in ``highlight`` (witness :class:`Edge` items) are red."""
    marked = {(e.src, e.kind, tuple(e.label) if e.kind == "time" else e.label, e.dst) for e in highlight}
    lines = [f"digraph {name} {{", "  node [shape=box, fontname=monospace];"]
    for i, label in enumerate(rts.labels):
        attrs = [f"label={_q(label)}"]
        if i == rts.root:
            attrs.append("peripheries=2")
        lines.append(f"  n{i} [{', '.join(attrs)}];")
    for s, a, d in rts.actions:
        attrs = [f"label={_q(a)}"]
        if a == "tau":
            attrs.append("style=dotted")
        if (s, "act", a, d) in marked:
            attrs.append("color=red")
        lines.append(f"  n{s} -> n{d} [{', '.join(attrs)}];")
    for s, u, d in rts.time_edges():
        if not u:
            attrs = ['label="1"', "style=bold", "color=blue"]
        else:
            attrs = [f"label={_q('U=' + '{' + ','.join(sorted(u)) + '}')}", "style=dashed", "color=gray40"]
        if (s, "time", tuple(sorted(u)), d) in marked:
            attrs = [a for a in attrs if not a.startswith("color=")] + ["color=red"]
        lines.append(f"  n{s} -> n{d} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
