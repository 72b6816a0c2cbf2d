"""Concrete syntax output for terms, protein rules, configurations and spec files."""

from __future__ import annotations

from .terms import (
    Cell, CoFuse, CoPinch, Empty, Fuse, Nu, Par, Pinch, Protein, Star, Zero,
)


def show_protein(p: Protein) -> str:
    return f"{p.name}({','.join(f'{i}{s}' for i, s in enumerate(p.sites, 1))})"


def show_system(t) -> str:
    if isinstance(t, Empty):
        return "<>"
    if isinstance(t, Protein):
        return show_protein(t)
    if isinstance(t, Cell):
        return f"[{show_membrane(t.membrane)}]({show_system(t.body)})"
    if isinstance(t, Par):
        # left-nested chains print flat, right-nested operands keep parentheses
        left = show_system(t.left) if isinstance(t.left, Par) else _sys_operand(t.left)
        right = f"({show_system(t.right)})" if isinstance(t.right, Par) else _sys_operand(t.right)
        return f"{left} * {right}"
    if isinstance(t, Nu):
        return f"new {t.name}. {show_system(t.body)}"
    if isinstance(t, Pinch):
        return f"p({t.name}): {show_system(t.body)}"
    if isinstance(t, Fuse):
        return f"f({t.name}): [{show_membrane(t.membrane)}]({show_system(t.body)})"
    raise TypeError(f"not a system term: {t!r}")


def _sys_operand(t) -> str:
    s = show_system(t)
    return f"({s})" if isinstance(t, (Nu, Pinch, Fuse)) else s


def show_membrane(t) -> str:
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Protein):
        return show_protein(t)
    if isinstance(t, Star):
        left = show_membrane(t.left) if isinstance(t.left, Star) else _mem_operand(t.left)
        right = f"({show_membrane(t.right)})" if isinstance(t.right, Star) else _mem_operand(t.right)
        return f"{left}, {right}"
    if isinstance(t, CoPinch):
        return f"p'({t.name}): {show_membrane(t.body)}"
    if isinstance(t, CoFuse):
        return f"f'({t.name})"
    raise TypeError(f"not a membrane term: {t!r}")


def _mem_operand(t) -> str:
    s = show_membrane(t)
    return f"({s})" if isinstance(t, CoPinch) else s


def show(t) -> str:
    if isinstance(t, (Zero, Star, CoPinch, CoFuse)):
        return show_membrane(t)
    return show_system(t)


def show_group(group, membrane: bool) -> str:
    if not group:
        return "0" if membrane else "<>"
    sep = ", " if membrane else " * "
    return sep.join(show_protein(p) for p in group)


def show_wide(ws) -> str:
    sys_zone = " ; ".join(show_group(g, False) for g in ws.system_groups)
    mem_zone = " ; ".join(show_group(g, True) for g in ws.membrane_groups)
    body = f"< {sys_zone} | {mem_zone} >".replace("<  |", "< |").replace("|  >", "| >")
    if ws.restricted:
        return f"new {','.join(ws.restricted)}. {body}"
    return body


def show_rule(rule) -> str:
    direction = "mono" if rule.direction == "monotone" else "anti"
    if rule.direction == "monotone":
        lhs, rhs = rule.small, rule.big
    else:
        lhs, rhs = rule.big, rule.small
    return f"rule {rule.id} {direction}: {show_wide(lhs)} -> {show_wide(rhs)};"


def show_pinch_config(cfg) -> str:
    return (f"pinch {cfg.id}: P = {show_system(cfg.P)}; P' = {show_system(cfg.Pp)}; "
            f"S = {show_membrane(cfg.S)}; S' = {show_membrane(cfg.Sp)}; Q = {show_system(cfg.Q)};")


def show_fuse_config(cfg) -> str:
    return (f"fuse {cfg.id}: P = {show_system(cfg.P)}; S = {show_membrane(cfg.S)}; "
            f"R = {show_system(cfg.R)}; T = {show_membrane(cfg.T)}; Q = {show_system(cfg.Q)};")


def show_spec(spec) -> str:
    lines = ["signature {"]
    for name, polarity, arity in spec.signature.entries:
        lines.append(f"  {polarity} {name}: {arity};")
    lines.append("}")
    lines += [show_rule(r) for r in spec.protein_rules]
    lines += [show_pinch_config(c) for c in spec.pinch_configs]
    lines += [show_fuse_config(c) for c in spec.fuse_configs]
    lines += [f"system {name} = {show_system(t)};" for name, t in spec.systems.items()]
    return "\n".join(lines) + "\n"
