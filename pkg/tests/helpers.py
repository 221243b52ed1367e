"""Shared programs, scripts and small helpers for the test modules."""

from __future__ import annotations

from pathlib import Path

from invguide.program import parse_property

FIXTURES = Path(__file__).parent / "fixtures"

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: list[str] = []

# assert inside the loop body, as in the running example
FIG2 = "uint32_t x=0;\nwhile (rand()){\nx+=4;\nassert(x!=30);\n}\n"

TOP_ROW_SCRIPT = {
    "propose": {"x != 30": [["assert(x % 2 == 0); // Line B", "assert(x % 4 == 1); // Line B"]]},
    "repair": {"x != 30 | x % 2 == 0@B": ["assert(x % 4 == 0);"]},
}

# x%4==1 ranks first by frequency, so it is attempted before x%2==0
BOTTOM_ROW_SCRIPT = {
    "propose": {"x != 30": [["assert(x % 4 == 1); // Line B", "assert(x % 4 == 1); // Line B",
                             "assert(x % 2 == 0); // Line B"]]},
    "repair": {"x != 30 | x % 2 == 0@B": ["assert(x % 4 == 0);"]},
}


def prop(program, text: str):
    """``pred@line`` or ``pred@Marker``."""
    pred, _, at = text.rpartition("@")
    line = int(at) if at.isdigit() else program.markers[at]
    return parse_property(pred, line, program)


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text()


# Small W=8 programs whose reachable states can be enumerated by hand, each with
# candidate properties; exactness checks every (assumptions, goal) query over them.
EXACT_CORPUS = [
    ("uint8_t x = 0;\nassert(x == 1);\n", ["x == 1@2", "x == 0@2", "x <= 1@2"]),
    ("uint8_t x = rand();\nassert(x == 1);\n", ["x == 1@2", "x != 1@2", "x < 128@2"]),
    (FIG2, ["x != 30@4", "x % 4 == 0@3", "x % 4 == 1@3", "x % 2 == 0@3", "x % 8 == 4@4"]),
    ("uint8_t x = 0;\nwhile (x < 10) {\nx++;\n}\nassert(x == 10);\n",
     ["x == 10@5", "x <= 10@3", "x < 10@3", "x <= 10@2"]),
    ("uint8_t x = 0;\nwhile (rand()) {\nx = x + 1;\n}\nassert(x != 200);\n",
     ["x != 200@5", "x < 200@3", "x < 100@2"]),
    ("uint8_t x = rand() % 4;\nuint8_t y = x * 2;\nassert(y % 2 == 0);\n",
     ["y % 2 == 0@3", "x < 4@2", "y < 8@3", "y == 6@3"]),
    ("uint8_t x = 0;\nuint8_t y = 0;\nwhile (rand()) {\nx++;\ny++;\n}\nassert(x == y);\n",
     ["x == y@7", "x == y@4", "x == y@5", "x < 5@4"]),
    ("uint8_t x = 250;\nx = x + 10;\nassert(x == 4);\n", ["x == 4@3", "x > 250@3", "x == 250@2"]),
    ("uint8_t x = rand();\nif (x > 100) {\nx = 100;\n}\nassert(x <= 100);\n",
     ["x <= 100@5", "x > 100@3", "x <= 200@5"]),
    ("uint8_t x = rand();\nassume(x < 5);\nassert(x < 5);\n", ["x < 5@3", "x < 4@3", "x == 4@3", "x < 5@2"]),
    ("uint8_t n = rand() % 8;\nuint8_t i = 0;\nwhile (i < n) {\ni++;\n}\nassert(i == n);\n",
     ["i == n@6", "i <= n@3", "i <= n@4", "n < 8@3"]),
    ("uint8_t x = 1;\nwhile (rand()) {\nx = x * 2;\n}\nassert(x != 3);\n",
     ["x != 3@5", "x % 2 == 0@3", "x != 3@3", "x < 129@3"]),
    ("uint8_t x = 0;\nwhile (rand()) {\nx += 3;\n}\nassert(x % 3 == 0);\n",
     ["x % 3 == 0@5", "x % 3 == 0@3", "x < 255@3"]),
    ("uint8_t x = 7;\nx = x / 0;\nassert(x == 255);\n", ["x == 255@3", "x == 0@3"]),
    ("uint8_t x = 7;\nx = x % 0;\nassert(x == 7);\n", ["x == 7@3", "x == 0@3"]),
    ("uint8_t a = rand() % 3;\nuint8_t b = rand() % 3;\nassert(a + b < 5);\n",
     ["a + b < 5@3", "a + b < 4@3", "a < 3@2", "b < 3@3"]),
    ("uint8_t x = 0;\nwhile (rand()) {\nif (x < 5) {\nx++;\n} else {\nx = 0;\n}\n}\nassert(x <= 5);\n",
     ["x <= 5@9", "x < 5@4", "x <= 5@2", "x < 5@3"]),
    ("uint8_t x = rand() % 16;\nwhile (x > 0) {\nx--;\n}\nassert(x == 0);\n",
     ["x == 0@5", "x < 16@2", "x < 16@3", "x == 0@3"]),
    ("uint8_t x = rand();\nuint8_t y = (uint8_t) (x * 2);\nassert(y != 1);\n",
     ["y != 1@3", "y % 2 == 0@3", "x < 128@3"]),
    ("uint8_t x = 0;\nuint8_t y = 1;\nwhile (rand()) {\nx = y;\ny = x + 1;\n}\nassert(y == x + 1);\n",
     ["y == x + 1@7", "y == x + 1@4", "y > x@7", "x == 0@5"]),
]


# Six-file benchmark directory: provable with help, provable outright, refutable,
# helped only through a repair, hopeless, and unparseable.
TOY_CORPUS = {
    "a_running.c": (FIG2, TOP_ROW_SCRIPT),
    "b_straight.c": ("uint8_t x = 0;\nx = x + 1;\nassert(x == 1);\n", None),
    "c_refuted.c": ("uint8_t x = 0;\nassert(x == 1);\n", None),
    "d_repaired.c": ("uint8_t x = 0;\nwhile (rand()) {\nx += 2;\nassert(x != 31);\n}\n",
                     {"propose": {"x != 31": ["assert(x % 8 == 0); // Line B"]},
                      "repair": {"x != 31 | x % 8 == 0@B": ["assert(x % 2 == 0);"]}}),
    "e_hopeless.c": (FIG2, None),
    "f_broken.c": ("uint8_t x = 0;\nwhile (x < {\n", None),
}


def write_toy_corpus(directory: Path) -> Path:
    import json

    directory.mkdir(parents=True, exist_ok=True)
    for name, (source, script) in TOY_CORPUS.items():
        (directory / name).write_text(source)
        if script is not None:
            (directory / name).with_suffix(".script.json").write_text(json.dumps(script))
    return directory
