"""Classify a handful of regular languages and print their maintenance tier."""
from dynlang.cli import classify

LANGUAGES = [
    ("(aa)*", None),
    ("(a+b)*a(a+b)*", None),
    ("(a+b)*a(a+b)*b(a+b)*", None),
    ("(ab)*", None),
    ("b*", ["a", "b"]),
    ("(a+b)*aa(a+b)*", None),
]

if __name__ == "__main__":
    for src, alpha in LANGUAGES:
        c = classify(src, alpha)
        print("\n".join(c.lines()))
        print()
