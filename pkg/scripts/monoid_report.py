#!/usr/bin/env python3
"""Print the transition monoid of a serialized two-way transducer together
with the class language of every element, enumerated up to a length bound."""
import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from twofst.cli import parse, serialize_monoid
from twofst.monoid import class_language_dfa, is_aperiodic, transition_monoid
from twofst.words import dfa_language_upto, show_word


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("file")
    ap.add_argument("--max-len", type=int, default=4)
    args = ap.parse_args()

    art = parse(args.file)
    if art.kind != "2wt":
        sys.exit("need a two-way transducer file")
    m = transition_monoid(art.value)
    sys.stdout.write(serialize_monoid(m))
    rep = is_aperiodic(m)
    if rep.aperiodic:
        print(f"aperiodic, index {rep.index}")
    else:
        print(f"not aperiodic, witness [{m.element_id(rep.witness)}]")
    print()
    for e in m.elements:
        d = class_language_dfa(m, e)
        sample = [show_word(w) or "eps" for w in dfa_language_upto(d, args.max_len)]
        print(f"[{m.element_id(e)}] up to {args.max_len}: {' '.join(sample) or '-'}")


if __name__ == "__main__":
    main()
