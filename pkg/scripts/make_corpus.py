"""Regenerate the IR files under corpus/.

    python scripts/make_corpus.py [corpus-dir]

Prelude, Demo and the hand-written fixtures are spelled out below; the
Gen* fixtures are produced by cass.synth from fixed seeds.
"""

from __future__ import annotations

import random
import sys
from pathlib import Path

from cass.builders import (
    PRIVATE,
    arrow,
    call,
    cons,
    data,
    ext,
    fcase,
    free,
    fun,
    lit,
    module,
    orr,
    pcons,
    plit,
    rcase,
    tcon,
    tvar,
    v,
)
from cass.ir import FuncType, write_module
from cass.synth import random_module

INT = tcon("Prelude.Int")
BOOL = tcon("Prelude.Bool")
CHAR = tcon("Prelude.Char")
A, B = tvar(0), tvar(1)


def lst(t):
    return tcon("Prelude.List", t)


TRUE, FALSE = cons("Prelude.True"), cons("Prelude.False")
NIL = cons("Prelude.[]")


def prelude():
    types = [
        data("Prelude.Bool", [], ("Prelude.False", []), ("Prelude.True", [])),
        data("Prelude.List", [0], ("Prelude.[]", []), ("Prelude.:", [A, lst(A)])),
        data("Prelude.()", [], ("Prelude.()", [])),
        data("Prelude.Maybe", [0], ("Prelude.Nothing", []), ("Prelude.Just", [A])),
        data("Prelude.Either", [0, 1], ("Prelude.Left", [A]), ("Prelude.Right", [B])),
        data("Prelude.(,)", [0, 1], ("Prelude.(,)", [A, B])),
        data("Prelude.Ordering", [], ("Prelude.LT", []), ("Prelude.EQ", []), ("Prelude.GT", [])),
        data("Prelude.Int", [], external=True),
        data("Prelude.Char", [], external=True),
        data("Prelude.Float", [], external=True),
    ]
    ii_i = arrow(INT, INT, INT)
    ii_b = arrow(INT, INT, BOOL)
    fs = [
        ext("Prelude.+", 2, ii_i),
        ext("Prelude.-", 2, ii_i),
        ext("Prelude.*", 2, ii_i),
        ext("Prelude.div", 2, ii_i),
        ext("Prelude.mod", 2, ii_i),
        ext("Prelude.==", 2, arrow(A, A, BOOL)),
        ext("Prelude.<=", 2, ii_b),
        ext("Prelude.=:=", 2, arrow(A, A, BOOL)),
        ext("Prelude.&", 2, arrow(BOOL, BOOL, BOOL)),
        ext("Prelude.seq", 2, arrow(A, B, B)),
        ext("Prelude.apply", 2, arrow(FuncType(A, B), A, B)),
        ext("Prelude.failed", 0, A),
        ext("Prelude.ensureNotFree", 1, arrow(A, A)),
        ext("Prelude.ord", 1, arrow(CHAR, INT)),
        ext("Prelude.chr", 1, arrow(INT, CHAR)),
        fun("Prelude.?", [1, 2], orr(v(1), v(2)), arrow(A, A, A)),
        fun(
            "Prelude.++", [1, 2],
            fcase(v(1), (pcons("Prelude.[]"), v(2)),
                  (pcons("Prelude.:", 3, 4), cons("Prelude.:", v(3), call("Prelude.++", v(4), v(2))))),
            arrow(lst(A), lst(A), lst(A)),
        ),
        fun("Prelude.not", [1], fcase(v(1), (pcons("Prelude.True"), FALSE), (pcons("Prelude.False"), TRUE)),
            arrow(BOOL, BOOL)),
        fun("Prelude.&&", [1, 2], fcase(v(1), (pcons("Prelude.True"), v(2)), (pcons("Prelude.False"), FALSE)),
            arrow(BOOL, BOOL, BOOL)),
        fun("Prelude.||", [1, 2], fcase(v(1), (pcons("Prelude.True"), TRUE), (pcons("Prelude.False"), v(2))),
            arrow(BOOL, BOOL, BOOL)),
        fun("Prelude.&>", [1, 2], fcase(v(1), (pcons("Prelude.True"), v(2))), arrow(BOOL, A, A)),
        fun("Prelude.if_then_else", [1, 2, 3],
            rcase(v(1), (pcons("Prelude.True"), v(2)), (pcons("Prelude.False"), v(3))), arrow(BOOL, A, A, A)),
        fun("Prelude.id", [1], v(1), arrow(A, A)),
        fun("Prelude.const", [1, 2], v(1), arrow(A, B, A)),
        fun("Prelude.head", [1], fcase(v(1), (pcons("Prelude.:", 2, 3), v(2))), arrow(lst(A), A)),
        fun("Prelude.tail", [1], fcase(v(1), (pcons("Prelude.:", 2, 3), v(3))), arrow(lst(A), lst(A))),
        fun("Prelude.null", [1], fcase(v(1), (pcons("Prelude.[]"), TRUE), (pcons("Prelude.:", 2, 3), FALSE)),
            arrow(lst(A), BOOL)),
        fun(
            "Prelude.length", [1],
            fcase(v(1), (pcons("Prelude.[]"), lit(0)),
                  (pcons("Prelude.:", 2, 3), call("Prelude.+", lit(1), call("Prelude.length", v(3))))),
            arrow(lst(A), INT),
        ),
        fun(
            "Prelude.map", [1, 2],
            fcase(v(2), (pcons("Prelude.[]"), NIL),
                  (pcons("Prelude.:", 3, 4),
                   cons("Prelude.:", call("Prelude.apply", v(1), v(3)), call("Prelude.map", v(1), v(4))))),
            arrow(FuncType(A, B), lst(A), lst(B)),
        ),
        fun(
            "Prelude.foldr", [1, 2, 3],
            fcase(v(3), (pcons("Prelude.[]"), v(2)),
                  (pcons("Prelude.:", 4, 5),
                   call("Prelude.apply", call("Prelude.apply", v(1), v(4)), call("Prelude.foldr", v(1), v(2), v(5))))),
            arrow(FuncType(A, FuncType(B, B)), B, lst(A), B),
        ),
        fun(
            "Prelude.filter", [1, 2],
            fcase(v(2), (pcons("Prelude.[]"), NIL),
                  (pcons("Prelude.:", 3, 4),
                   rcase(call("Prelude.apply", v(1), v(3)),
                         (pcons("Prelude.True"), cons("Prelude.:", v(3), call("Prelude.filter", v(1), v(4)))),
                         (pcons("Prelude.False"), call("Prelude.filter", v(1), v(4)))))),
            arrow(FuncType(A, BOOL), lst(A), lst(A)),
        ),
        fun(
            "Prelude.even", [1],
            rcase(call("Prelude.==", v(1), lit(0)),
                  (pcons("Prelude.True"), TRUE),
                  (pcons("Prelude.False"), call("Prelude.odd", call("Prelude.-", v(1), lit(1))))),
            arrow(INT, BOOL),
        ),
        fun(
            "Prelude.odd", [1],
            rcase(call("Prelude.==", v(1), lit(0)),
                  (pcons("Prelude.True"), FALSE),
                  (pcons("Prelude.False"), call("Prelude.even", call("Prelude.-", v(1), lit(1))))),
            arrow(INT, BOOL),
        ),
        fun("Prelude.fromJust", [1], fcase(v(1), (pcons("Prelude.Just", 2), v(2))), arrow(tcon("Prelude.Maybe", A), A)),
        fun(
            "Prelude.maybe", [1, 2, 3],
            fcase(v(3), (pcons("Prelude.Nothing"), v(1)),
                  (pcons("Prelude.Just", 4), call("Prelude.apply", v(2), v(4)))),
            arrow(B, FuncType(A, B), tcon("Prelude.Maybe", A), B),
        ),
        fun("Prelude.reverse", [1], call("Prelude.rev", v(1), NIL), arrow(lst(A), lst(A))),
        fun(
            "Prelude.rev", [1, 2],
            fcase(v(1), (pcons("Prelude.[]"), v(2)),
                  (pcons("Prelude.:", 3, 4), call("Prelude.rev", v(4), cons("Prelude.:", v(3), v(2))))),
            arrow(lst(A), lst(A), lst(A)),
            PRIVATE,
        ),
        fun("Prelude.unknown", [], free([1], v(1)), A),
        fun(
            "Prelude.compare", [1, 2],
            rcase(call("Prelude.==", v(1), v(2)),
                  (pcons("Prelude.True"), cons("Prelude.EQ")),
                  (pcons("Prelude.False"),
                   rcase(call("Prelude.<=", v(1), v(2)),
                         (pcons("Prelude.True"), cons("Prelude.LT")),
                         (pcons("Prelude.False"), cons("Prelude.GT"))))),
            arrow(INT, INT, tcon("Prelude.Ordering")),
        ),
        fun(
            "Prelude.isDigit", [1],
            fcase(call("Prelude.ord", v(1)), (plit(48), TRUE), (plit(49), TRUE)),
            arrow(CHAR, BOOL),
        ),
    ]
    return module("Prelude", [], types, fs)


def demo():
    C = lambda n: f"Demo.{n}"  # noqa: E731
    color = tcon("Demo.Color")
    types = [
        data("Demo.Color", [], ("Demo.Red", []), ("Demo.Green", []), ("Demo.Blue", [])),
        data("Demo.Rec", [], ("Demo.Rec", [INT, BOOL])),
        data("Demo.T", [], ("Demo.MkT", [arrow(INT, INT)])),
        data("Demo.U", [], ("Demo.MkU", [tcon("Demo.T")])),
        data("Demo.V", [], ("Demo.MkV", [lst(arrow(INT, INT))])),
        data("Demo.Tree", [0], ("Demo.Leaf", []), ("Demo.Node", [tcon("Demo.Tree", A), A, tcon("Demo.Tree", A)])),
        data("Demo.Hidden", [], ("Demo.Hide", [INT]), visibility=PRIVATE),
    ]
    fs = [
        fun(C("?"), [1, 2], orr(v(1), v(2)), arrow(A, A, A)),
        fun(C("coin"), [], call(C("?"), lit(0), lit(1)), INT),
        fun(C("g"), [], call("Prelude.+", call(C("coin")), lit(1)), INT),
        fun(C("not"), [1], fcase(v(1), (pcons("Prelude.True"), FALSE), (pcons("Prelude.False"), TRUE)),
            arrow(BOOL, BOOL)),
        fun(C("cond"), [1, 2], fcase(v(1), (pcons("Prelude.True"), v(2))), arrow(BOOL, A, A)),
        fun(C("useCond"), [1], call(C("cond"), call(C("not"), v(1)), lit(0)), arrow(BOOL, INT)),
        fun(
            C("last"), [1],
            free([2, 3],
                 call("Prelude.&>",
                      call("Prelude.=:=",
                           call("Prelude.++", v(3), cons("Prelude.:", v(2), NIL)),
                           v(1)),
                      v(2))),
            arrow(lst(A), A),
        ),
        fun(C("double"), [1], call("Prelude.+", v(1), v(1)), arrow(INT, INT)),
        fun(C("ident"), [1], v(1), arrow(A, A)),
        fun(C("constZero"), [1], lit(0), arrow(A, INT)),
        fun(
            C("pick"), [1, 2],
            fcase(v(1), (pcons(C("Red")), v(2)), (pcons(C("Green")), lit(0)), (pcons(C("Blue")), v(2))),
            arrow(color, INT, INT),
        ),
        fun(
            C("isRed"), [1],
            fcase(v(1), (pcons(C("Red")), TRUE), (pcons(C("Green")), FALSE), (pcons(C("Blue")), FALSE)),
            arrow(color, BOOL),
        ),
        fun(C("reuse"), [1], fcase(v(1), (pcons(C("Red")), v(1))), arrow(color, color)),
        fun(
            C("orComplete"), [1],
            orr(fcase(v(1), (pcons("Prelude.True"), lit(1)), (pcons("Prelude.False"), lit(0))),
                fcase(v(1), (pcons("Prelude.True"), lit(2)))),
            arrow(BOOL, INT),
        ),
        fun(C("waitFor"), [1], rcase(v(1), (pcons("Prelude.True"), TRUE), (pcons("Prelude.False"), FALSE)),
            arrow(BOOL, BOOL)),
        fun(C("useWait"), [1], fcase(v(1), (pcons("Prelude.True"), call(C("waitFor"), v(1))),
                                     (pcons("Prelude.False"), FALSE)), arrow(BOOL, BOOL)),
        fun(
            C("size"), [1],
            fcase(v(1), (pcons(C("Leaf")), lit(0)),
                  (pcons(C("Node"), 2, 3, 4),
                   call("Prelude.+", call(C("size"), v(2)), call("Prelude.+", lit(1), call(C("size"), v(4)))))),
            arrow(tcon("Demo.Tree", A), INT),
        ),
        fun(C("isEven"), [1], rcase(call("Prelude.==", v(1), lit(0)), (pcons("Prelude.True"), TRUE),
                                    (pcons("Prelude.False"), call(C("isOdd"), call("Prelude.-", v(1), lit(1))))),
            arrow(INT, BOOL)),
        fun(C("isOdd"), [1], rcase(call("Prelude.==", v(1), lit(0)), (pcons("Prelude.True"), FALSE),
                                   (pcons("Prelude.False"), call(C("isEven"), call("Prelude.-", v(1), lit(1))))),
            arrow(INT, BOOL)),
        fun(C("digitVal"), [1], fcase(v(1), (plit("0"), lit(0)), (plit("1"), lit(1))), arrow(CHAR, INT)),
        fun(C("secret"), [1], cons(C("Hide"), v(1)), arrow(INT, tcon("Demo.Hidden")), PRIVATE),
        fun(C("unwrap"), [1], fcase(call(C("secret"), v(1)), (pcons(C("Hide"), 2), v(2))), arrow(INT, INT)),
        fun(C("twice"), [1, 2], call("Prelude.apply", v(1), call("Prelude.apply", v(1), v(2))),
            arrow(arrow(A, A), A, A)),
        fun(C("headOrZero"), [1], fcase(v(1), (pcons("Prelude.[]"), lit(0)),
                                        (pcons("Prelude.:", 2, 3), call("Prelude.head", v(1)))),
            arrow(lst(INT), INT)),
    ]
    return module("Demo", ["Prelude"], types, fs)


def even_odd():
    """Mutual and self recursion, no non-determinism anywhere."""
    M = lambda n: f"EvenOdd.{n}"  # noqa: E731
    nat = tcon("EvenOdd.Nat")
    types = [data("EvenOdd.Nat", [], ("EvenOdd.Z", []), ("EvenOdd.S", [nat]))]
    fs = [
        fun(M("even"), [1], fcase(v(1), (pcons(M("Z")), TRUE), (pcons(M("S"), 2), call(M("odd"), v(2)))),
            arrow(nat, BOOL)),
        fun(M("odd"), [1], fcase(v(1), (pcons(M("Z")), FALSE), (pcons(M("S"), 2), call(M("even"), v(2)))),
            arrow(nat, BOOL)),
        fun(M("add"), [1, 2], fcase(v(1), (pcons(M("Z")), v(2)),
                                    (pcons(M("S"), 3), cons(M("S"), call(M("add"), v(3), v(2))))),
            arrow(nat, nat, nat)),
        fun(M("loop"), [1], call(M("loop"), v(1)), arrow(nat, nat)),
        fun(M("pred"), [1], fcase(v(1), (pcons(M("S"), 2), v(2))), arrow(nat, nat)),
        fun(M("usePred"), [1], call(M("even"), call(M("pred"), v(1))), arrow(nat, BOOL)),
        fun(M("anyNat"), [], free([1], v(1)), nat),
        fun(M("ping"), [1], fcase(v(1), (pcons(M("Z")), call(M("pong"), v(1))),
                                  (pcons(M("S"), 2), orr(v(2), call(M("pong"), v(2))))),
            arrow(nat, nat)),
        fun(M("pong"), [1], call(M("ping"), cons(M("S"), v(1))), arrow(nat, nat)),
    ]
    return module("EvenOdd", ["Prelude"], types, fs)


def main(argv: list[str]) -> None:
    out = Path(argv[1] if len(argv) > 1 else Path(__file__).resolve().parent.parent / "corpus")
    out.mkdir(parents=True, exist_ok=True)
    p = prelude()
    for m in (p, demo(), even_odd()):
        write_module(m, out)
    for i in range(1, 26):
        rng = random.Random(1000 + i)
        m = random_module(
            f"Gen{i:02d}", rng, [p], n_functions=rng.randint(3, 14), n_types=rng.randint(0, 3), depth=3
        )
        write_module(m, out)


if __name__ == "__main__":
    main(sys.argv)
