"""Set expressions: ``union(disk(0,0,1/2), segment(-1,0,1,0))`` and friends.

Grammar (numbers in ``m*2^e``, ``p/q`` or integer form)::

    point(x,y) | segment(x1,y1,x2,y2) | box(x1,y1,x2,y2) | disk(cx,cy,r)
    union(S,S) | affine(S, a,b,c,d, tx,ty) | sierpinski()
    graph(FUNC, lo, hi) | stepgraph() | sqrtgraph()

Nullary constructors may drop their parentheses.
"""

from __future__ import annotations

from .creal import BitFunction, elaborate_expr
from .dyadic import Box, Dyadic
from .errors import ParseError
from .graphfn import GraphFunction, gf_from_bitfunc, gf_sqrt_multivalued, gf_step
from .parsing import Call, Name, Num, parse_tree
from .sets import AffineMap, ComputableSet, ifs_attractor, set_affine, set_primitive, set_union, sierpinski

_ARITY = {"point": 2, "segment": 4, "box": 4, "disk": 3, "union": 2, "affine": 7,
          "sierpinski": 0, "graph": 3, "stepgraph": 0, "sqrtgraph": 0}


def _num(node) -> Dyadic:
    if not isinstance(node, Num):
        raise ParseError("expected a number", pos=getattr(node, "pos", None))
    den = node.value.denominator
    if den & (den - 1):
        raise ParseError(f"coordinate {node.text!r} is not dyadic", pos=node.pos)
    return Dyadic.from_fraction(node.value)


def _graph(node) -> GraphFunction:
    name = node.name
    if name == "stepgraph":
        return gf_step()
    if name == "sqrtgraph":
        return gf_sqrt_multivalued()
    func, lo, hi = node.args
    if isinstance(func, Num):
        raise ParseError("graph() needs a function of x", pos=func.pos)
    lo, hi = _num(lo), _num(hi)
    if lo > hi:
        raise ParseError("graph() domain has lo > hi", pos=node.pos)
    return gf_from_bitfunc(BitFunction(elaborate_expr(func), Box([(lo, hi)])))


def _call(tree):
    if isinstance(tree, Name):
        tree = Call(tree.name, (), tree.pos)
    if not isinstance(tree, Call):
        raise ParseError("expected a set constructor", pos=tree.pos)
    if tree.name not in _ARITY:
        raise ParseError(f"unknown set constructor {tree.name!r}", pos=tree.pos)
    if len(tree.args) != _ARITY[tree.name]:
        raise ParseError(f"{tree.name} takes {_ARITY[tree.name]} argument(s), got {len(tree.args)}",
                         pos=tree.pos)
    return tree


def elaborate_set(tree) -> ComputableSet:
    node = _call(tree)
    name, args = node.name, node.args
    if name in ("graph", "stepgraph", "sqrtgraph"):
        return _graph(node).graph
    if name == "sierpinski":
        return ifs_attractor(sierpinski())
    if name == "union":
        return set_union(elaborate_set(args[0]), elaborate_set(args[1]))
    if name == "affine":
        a, b, c, d, tx, ty = (_num(v) for v in args[1:])
        return set_affine(elaborate_set(args[0]), AffineMap(((a, b), (c, d)), (tx, ty)))
    v = [_num(a) for a in args]
    if name == "point":
        return set_primitive("point", (v[0], v[1]))
    if name == "disk":
        if v[2].sign() < 0:
            raise ParseError("disk radius must be nonnegative", pos=node.pos)
        return set_primitive("disk", (v[0], v[1]), v[2])
    if name == "box" and (v[0] > v[2] or v[1] > v[3]):
        raise ParseError("box corners must be (x_min, y_min, x_max, y_max)", pos=node.pos)
    return set_primitive(name, (v[0], v[1]), (v[2], v[3]))


def parse_set(text: str) -> ComputableSet:
    return elaborate_set(parse_tree(text))


def parse_graph(text: str) -> GraphFunction:
    """A graph constructor as a GraphFunction; any other set is read over its bounding box."""
    node = _call(parse_tree(text))
    if node.name in ("graph", "stepgraph", "sqrtgraph"):
        return _graph(node)
    return GraphFunction.from_set(elaborate_set(node), name=node.name)


__all__ = ["elaborate_set", "parse_graph", "parse_set"]
