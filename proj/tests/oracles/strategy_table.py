#!/usr/bin/env python3
"""Brute-force reference for deterministic strategy pairings.

Each strategy is evaluated from the full action history at every round, with
no shared code with the C++ library. Output lines:
    <A> <B> <rounds> <actions of A> <actions of B>
"""

import sys

T, R, P, S = 5, 3, 1, 0


def points(own, opp):
    return {("C", "C"): R, ("C", "D"): S, ("D", "C"): T, ("D", "D"): P}[(own, opp)]


def move(name, own, opp):
    t = len(own)
    if name == "AC":
        return "C"
    if name == "AD":
        return "D"
    if name == "TFT":
        return "C" if t == 0 else opp[-1]
    if name == "STFT":
        return "D" if t == 0 else opp[-1]
    if name == "GRIM":
        return "D" if "D" in opp else "C"
    if name == "WSLS":
        if t == 0:
            return "C"
        won = points(own[-1], opp[-1]) in (R, T)
        return own[-1] if won else ("D" if own[-1] == "C" else "C")
    raise ValueError(name)


def play(a, b, n):
    xa, xb = [], []
    for _ in range(n):
        ma, mb = move(a, xa, xb), move(b, xb, xa)
        xa.append(ma)
        xb.append(mb)
    return "".join(xa), "".join(xb)


PAIRINGS = [
    ("TFT", "AD"), ("GRIM", "STFT"), ("WSLS", "AD"), ("TFT", "STFT"),
    ("WSLS", "STFT"), ("GRIM", "WSLS"), ("STFT", "STFT"), ("AC", "STFT"),
    ("WSLS", "WSLS"), ("TFT", "GRIM"), ("AD", "WSLS"), ("STFT", "WSLS"),
]


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 12
    for a, b in PAIRINGS:
        xa, xb = play(a, b, n)
        print(a, b, n, xa, xb)


if __name__ == "__main__":
    main()
