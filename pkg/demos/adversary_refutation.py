"""Refute quantifier-free programs that claim to track "some a"."""
from dynlang.fixtures import wrong_prop_programs
from dynlang.lang_frontend import regex_dfa
from dynlang.verify import higman_adversary

if __name__ == "__main__":
    d = regex_dfa("(a+b)*a(a+b)*", ["a", "b"])
    for name, p in sorted(wrong_prop_programs().items()):
        w = higman_adversary(p, d, "a", "b", mode="exact")
        print(f"== {name}")
        if w is None:
            print("no witness found")
            continue
        print(w.summary())
        print("replays:", w.replay(p))
        print(w.to_script())
