#!/usr/bin/env python3
"""Generates crates/core/content/sample_kb.json: a small arithmetic and
fractions curriculum with a machine-checked question bank."""

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

PER_CELL = 5
WEIGHT = {"easy": 1, "medium": 2, "hard": 3}
ALL_METHODS = ["film", "dynamic_view", "game", "puzzle", "text"]

rng = random.Random(20240101)


def choices_for(answer, spread):
    """Correct answer plus three distinct distractors, shuffled."""
    opts = {answer}
    while len(opts) < 4:
        delta = rng.randint(1, spread) * rng.choice([-1, 1])
        cand = answer + delta
        if isinstance(answer, int) and cand < 0:
            continue
        opts.add(cand)
    opts = list(opts)
    rng.shuffle(opts)
    return [str(o) for o in opts], opts.index(answer)


def frac_choices(answer):
    opts = {answer}
    while len(opts) < 4:
        cand = answer + Fraction(rng.choice([-1, 1]) * rng.randint(1, 3), rng.choice([2, 3, 4, 6, 8, 12]))
        if cand > 0:
            opts.add(cand)
    opts = list(opts)
    rng.shuffle(opts)
    return [str(o) for o in opts], opts.index(answer)


# Each generator returns (body, choices, correct_index) for a difficulty.
def add_basic(d):
    hi = {"easy": 9, "medium": 20, "hard": 50}[d]
    a, b = rng.randint(1, hi), rng.randint(1, hi)
    return (f"What is {a} + {b}?",) + choices_for(a + b, 3)


def add_carry(d):
    hi = {"easy": 99, "medium": 999, "hard": 9999}[d]
    a, b = rng.randint(10, hi), rng.randint(10, hi)
    return (f"Add with carrying: {a} + {b} = ?",) + choices_for(a + b, 10)


def add_words(d):
    a, b = rng.randint(2, {"easy": 10, "medium": 40, "hard": 200}[d]), rng.randint(2, 30)
    return (f"A shelf holds {a} books and {b} more are added. How many books are on the shelf?",) + choices_for(a + b, 4)


def sub_basic(d):
    hi = {"easy": 10, "medium": 30, "hard": 100}[d]
    a = rng.randint(2, hi)
    b = rng.randint(1, a)
    return (f"What is {a} - {b}?",) + choices_for(a - b, 3)


def sub_borrow(d):
    hi = {"easy": 99, "medium": 999, "hard": 9999}[d]
    a = rng.randint(20, hi)
    b = rng.randint(10, a)
    return (f"Subtract with borrowing: {a} - {b} = ?",) + choices_for(a - b, 10)


def mul_tables(d):
    hi = {"easy": 5, "medium": 9, "hard": 12}[d]
    a, b = rng.randint(2, hi), rng.randint(2, hi)
    return (f"What is {a} × {b}?",) + choices_for(a * b, 4)


def mul_multi(d):
    a = rng.randint({"easy": 10, "medium": 20, "hard": 100}[d], {"easy": 20, "medium": 99, "hard": 999}[d])
    b = rng.randint(2, {"easy": 5, "medium": 12, "hard": 30}[d])
    return (f"Multiply: {a} × {b} = ?",) + choices_for(a * b, 12)


def mul_words(d):
    a, b = rng.randint(2, {"easy": 6, "medium": 12, "hard": 25}[d]), rng.randint(2, 12)
    return (f"There are {a} boxes with {b} pencils each. How many pencils are there?",) + choices_for(a * b, 5)


def div_exact(d):
    hi = {"easy": 5, "medium": 10, "hard": 15}[d]
    b, q = rng.randint(2, hi), rng.randint(2, hi)
    return (f"What is {b * q} ÷ {b}?",) + choices_for(q, 2)


def div_remainder(d):
    b = rng.randint(2, {"easy": 5, "medium": 9, "hard": 12}[d])
    a = rng.randint(b + 1, {"easy": 30, "medium": 100, "hard": 500}[d])
    return (f"What is the remainder of {a} ÷ {b}?",) + remainder_choices(a % b, b)


def remainder_choices(r, b):
    opts = {r}
    pool = [x for x in range(0, max(b, 4) + 2) if x != r]
    rng.shuffle(pool)
    for x in pool[:3]:
        opts.add(x)
    opts = list(opts)
    rng.shuffle(opts)
    return [str(o) for o in opts], opts.index(r)


def frac_read(d):
    den = rng.choice({"easy": [2, 3, 4], "medium": [5, 6, 8], "hard": [9, 10, 12]}[d])
    num = rng.randint(1, den - 1)
    return (f"A bar is cut into {den} equal parts and {num} are shaded. What fraction is shaded?",) + frac_choices(Fraction(num, den))


def frac_equiv(d):
    den = rng.choice({"easy": [2, 3, 4], "medium": [3, 4, 5, 6], "hard": [6, 7, 8, 9]}[d])
    num = rng.randint(1, den - 1)
    k = rng.randint(2, {"easy": 3, "medium": 5, "hard": 9}[d])
    return (f"Simplify {num * k}/{den * k}.",) + frac_choices(Fraction(num, den))


def frac_same_den(d):
    den = rng.choice({"easy": [4, 5, 6], "medium": [7, 8, 9], "hard": [10, 12, 15]}[d])
    a, b = rng.randint(1, den // 2), rng.randint(1, den // 2)
    return (f"What is {a}/{den} + {b}/{den}? (simplest form)",) + frac_choices(Fraction(a + b, den))


def frac_diff_den(d):
    dens = {"easy": [2, 4], "medium": [3, 4, 6], "hard": [5, 6, 8, 12]}[d]
    d1, d2 = rng.choice(dens), rng.choice(dens)
    a, b = rng.randint(1, d1), rng.randint(1, d2)
    return (f"What is {a}/{d1} + {b}/{d2}? (simplest form)",) + frac_choices(Fraction(a, d1) + Fraction(b, d2))


CONCEPTS = [
    # id, title, topic, prerequisites, methods, [(section id, title, importance rank, generator)]
    ("addition", "Addition", "arithmetic", [], ALL_METHODS, [
        ("add-basic", "Adding small numbers", 3, add_basic),
        ("add-carry", "Carrying", 2, add_carry),
        ("add-words", "Addition word problems", 1, add_words),
    ]),
    ("subtraction", "Subtraction", "arithmetic", ["addition"], ALL_METHODS, [
        ("sub-basic", "Taking away", 2, sub_basic),
        ("sub-borrow", "Borrowing", 1, sub_borrow),
    ]),
    ("multiplication", "Multiplication", "arithmetic", ["addition"], ["film", "dynamic_view", "game", "text"], [
        ("mul-tables", "Times tables", 3, mul_tables),
        ("mul-multi", "Multi-digit products", 2, mul_multi),
        ("mul-words", "Groups of things", 1, mul_words),
    ]),
    ("division", "Division", "arithmetic", ["multiplication", "subtraction"], ["film", "puzzle", "dynamic_view", "text"], [
        ("div-exact", "Sharing equally", 2, div_exact),
        ("div-remainder", "Remainders", 1, div_remainder),
    ]),
    ("fraction-basics", "What a fraction is", "fractions", ["division"], ALL_METHODS, [
        ("frac-read", "Reading fractions", 2, frac_read),
        ("frac-equiv", "Equivalent fractions", 1, frac_equiv),
    ]),
    ("adding-fractions", "Adding fractions", "fractions", ["fraction-basics", "addition"], ["dynamic_view", "game", "puzzle", "text"], [
        ("frac-same-den", "Same denominator", 2, frac_same_den),
        ("frac-diff-den", "Different denominators", 1, frac_diff_den),
    ]),
]

TOPICS = [
    ("arithmetic", "Whole-number arithmetic"),
    ("fractions", "Fractions"),
]


def build():
    topics = [{"id": tid, "title": title, "concept_ids": [c[0] for c in CONCEPTS if c[2] == tid]} for tid, title in TOPICS]
    concepts, questions = [], []
    for cid, title, _topic, prereqs, methods, sections in CONCEPTS:
        secs = []
        for sid, stitle, rank, gen in sections:
            # Base weight per method; rank keeps the arg-max section the same for every method.
            importance = {m: rank * 2 + (i % 2) for i, m in enumerate(methods)}
            secs.append({"id": sid, "title": stitle, "importance": importance})
            for d in ["easy", "medium", "hard"]:
                seen = set()
                k = 0
                tries = 0
                while k < PER_CELL:
                    tries += 1
                    if tries > 10_000:
                        raise SystemExit(f"{sid}/{d}: generator cannot produce {PER_CELL} distinct questions")
                    body, choices, correct = gen(d)
                    if body in seen:
                        continue
                    seen.add(body)
                    questions.append({
                        "id": f"{sid}-{d}-{k + 1}",
                        "concept_id": cid,
                        "section_id": sid,
                        "difficulty": d,
                        "weight": WEIGHT[d],
                        "body": body,
                        "choices": choices,
                        "correct_index": correct,
                    })
                    k += 1
        concepts.append({
            "id": cid,
            "title": title,
            "sections": secs,
            "prerequisites": prereqs,
            "assets": {m: f"assets/{cid}/{m}" + (".mp4" if m == "film" else ".md" if m == "text" else ".html") for m in methods},
        })
    return {"topics": topics, "concepts": concepts, "questions": questions}


if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "crates/core/content/sample_kb.json"
    out.write_text(json.dumps(build(), indent=2, ensure_ascii=False) + "\n")
    print(f"wrote {out}")
