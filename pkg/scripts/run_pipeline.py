#!/usr/bin/env python3
"""Walk the full translation chain on the block-doubling running example and
print the intermediate artifact sizes."""
import os
import sys
import time

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from twofst.machines import block_doubler, block_doubler_fot
from twofst.logic import MonoidRegistry
from twofst.monoid import is_aperiodic, transition_monoid
from twofst.translate import (
    fo_la_to_sf_la,
    fot_to_fo_lookaround,
    sf_la_to_plain,
    twoway_to_fot,
)
from twofst.twoway import simulate
from twofst.fot import fot_eval
from twofst.words import show_word


def stage(name, start):
    print(f"{name:<42s} {time.time() - start:6.2f}s")
    return time.time()


def main():
    t = block_doubler()
    print(f"machine: {len(t.states)} states, {len(t.step)} transitions")
    clock = time.time()

    reg = MonoidRegistry()
    T = twoway_to_fot(t, reg, "M")
    clock = stage(f"machine -> transduction ({len(T.copies)} copies)", clock)

    m = reg.monoid("M")
    rep = is_aperiodic(m)
    print(f"monoid: {len(m.elements)} elements, index {rep.index}")

    T4 = block_doubler_fot()
    la = fot_to_fo_lookaround(T4)
    clock = stage(f"transduction -> jumps ({len(la.transitions)} transitions)", clock)

    sf = fo_la_to_sf_la(la, None, bound=3)
    clock = stage(f"jumps -> walks ({len(sf.states)} states)", clock)

    plain = sf_la_to_plain(sf)
    clock = stage(f"walks -> plain machine ({len(plain.states)} states)", clock)

    rep2 = is_aperiodic(transition_monoid(plain))
    clock = stage(f"plain machine aperiodic: {rep2.aperiodic}", clock)

    w = "aababb"
    print()
    print(f"input            : {w}")
    print(f"machine          : {show_word(simulate(t, w).output)}")
    print(f"transduction     : {show_word(fot_eval(T, w, reg).output)}")
    print(f"plain round trip : {show_word(simulate(plain, w).output)}")


if __name__ == "__main__":
    main()
