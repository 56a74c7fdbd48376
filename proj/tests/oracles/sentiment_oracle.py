"""Independent re-evaluation of the shipped sentiment lexica."""
import json
import math
import re
import sys
from pathlib import Path

assets = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[2] / "assets"
manifest = json.loads((assets / "sentiment" / "classifiers.json").read_text())


def load(path):
    lex = {}
    for line in path.read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        tok, _, w = line.partition("\t")
        lex[tok.lower()] = float(w) if w else 1.0
    return lex


def tokens(text):
    return [t for t in re.findall(r"[a-z0-9'’]+", text.lower().replace("’", "'")) if t.strip("'")]


def polarity(text, c):
    lex = load(assets / "sentiment" / c["lexicon"])
    r = c["rules"]
    negators, intens = set(r.get("negators", [])), set(r.get("intensifiers", []))
    window, factor = r.get("negation_window", 0), r.get("intensifier_factor", 1.0)
    toks = tokens(text)
    s, hit, neg, boost = 0.0, False, 0, 1.0
    for t in toks:
        if window and t in negators:
            neg, boost = window, 1.0
            continue
        if t in intens:
            boost = factor
            neg = max(0, neg - 1)
            continue
        if t in lex:
            v = lex[t] * boost
            s += -v if neg else v
            hit = True
        boost = 1.0
        neg = max(0, neg - 1)
    if not hit or s == 0:
        return 0.0
    n = r["normalization"]
    if n == "alpha":
        p = s / math.sqrt(s * s + r.get("alpha", 15))
    elif n == "tanh":
        p = math.tanh(s / r.get("scale", 5))
    else:
        p = r.get("gain", 3) * s / len(toks)
    return max(-1.0, min(1.0, p))


for text in ["I love this, thank you so much!", "This is terrible and you are useless.",
             "This is not good at all.", "The flight was very bad."]:
    print(repr(text), {c["id"]: repr(polarity(text, c)) for c in manifest["classifiers"]})
