"""Seeded random AST generator shared by the expression tests and the
acceptance suite.

Two flavours:
  random_ast      -- exercises the whole grammar, for round-trip tests.
  random_smooth_ast -- avoids log/sqrt/division so that evaluation over all
                       of [-2, 2] stays real; used for derivative-vs-finite-
                       difference checks where we still reject points too
                       close to |u|=0 kinks (abs/spow) at test time.
"""

import random

from intervaldyn.expr import Binary, Const, Spow, Unary, Var

FULL_UNARY = ("neg", "sin", "cos", "exp", "log", "sqrt", "abs")
SMOOTH_UNARY = ("neg", "sin", "cos", "exp")
BINOPS = ("+", "-", "*", "/")


def _const(rng):
    # keep magnitudes tame so exp/pow folding cannot overflow
    v = round(rng.uniform(-4.0, 4.0), 3)
    if v == 0.0:
        v = 1.0
    return Const(v)


def random_ast(rng, depth):
    """Any grammar production, depth-bounded; never Neg(Const) and never a
    Const base under '^' (the parser folds both, so printing them would not
    round-trip)."""
    if depth <= 0:
        return _const(rng) if rng.random() < 0.4 else Var()
    roll = rng.random()
    if roll < 0.15:
        return _const(rng)
    if roll < 0.30:
        return Var()
    if roll < 0.50:
        op = rng.choice(FULL_UNARY)
        arg = random_ast(rng, depth - 1)
        if op == "neg" and isinstance(arg, Const):
            return Const(-arg.value)
        return Unary(op, arg)
    if roll < 0.62:
        base = random_ast(rng, depth - 1)
        if isinstance(base, Const):
            base = Unary("sin", base)
        k = rng.choice([2.0, 3.0, 0.5, 1.5, -1.0, -2.0])
        return Binary("^", base, Const(k))
    if roll < 0.72:
        alpha = rng.choice([1.0, 1.5, 2.0, 2.5, 3.0])
        return Spow(random_ast(rng, depth - 1), alpha)
    op = rng.choice(BINOPS)
    return Binary(op, random_ast(rng, depth - 1), random_ast(rng, depth - 1))


def random_smooth_ast(rng, depth):
    """Polynomial-ish trees: +, -, *, sin, cos, exp(scaled), ^k with k>=2,
    spow, abs.  Everywhere-defined on the real line."""
    if depth <= 0:
        return _const(rng) if rng.random() < 0.4 else Var()
    roll = rng.random()
    if roll < 0.18:
        return _const(rng)
    if roll < 0.36:
        return Var()
    if roll < 0.52:
        op = rng.choice(SMOOTH_UNARY)
        arg = random_smooth_ast(rng, depth - 1)
        if op == "exp":
            # damp the argument so nested exp cannot blow up
            arg = Binary("*", Const(0.25), Unary("sin", arg))
        if op == "neg" and isinstance(arg, Const):
            return Const(-arg.value)
        return Unary(op, arg)
    if roll < 0.62:
        base = random_smooth_ast(rng, depth - 1)
        if isinstance(base, Const):
            base = Unary("cos", base)
        return Binary("^", base, Const(rng.choice([2.0, 3.0, 4.0])))
    if roll < 0.72:
        return Spow(random_smooth_ast(rng, depth - 1),
                    rng.choice([1.0, 1.5, 2.0, 3.0]))
    if roll < 0.80:
        return Unary("abs", random_smooth_ast(rng, depth - 1))
    op = rng.choice(("+", "-", "*"))
    return Binary(op, random_smooth_ast(rng, depth - 1),
                  random_smooth_ast(rng, depth - 1))


def make_rng(seed):
    return random.Random(seed)
