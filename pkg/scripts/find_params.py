"""Search for (p, q) pairs with p = h*q - 1 prime, p = 2 mod 3, q prime.

Prints the smallest hit for each requested profile. The outputs are frozen in
``wsnibe.params``; rerun to audit them.
"""
import argparse

from sympy import isprime, nextprime


def find(q_bits, p_bits=None, cofactor=6, safe=False):
    q = 1 << (q_bits - 1)
    while True:
        q = nextprime(q)
        if safe and not isprime((q - 1) // 2):
            continue
        if p_bits is None:
            h = cofactor
        else:
            # smallest multiple of 6 that lands p at exactly p_bits bits
            h = -(-(1 << (p_bits - 1)) // q)
            h += (-h) % 6
        while p_bits is None or (h * q - 1).bit_length() == p_bits:
            p = h * q - 1
            if isprime(p) and p % 3 == 2:
                return p, q, h
            if p_bits is None:
                break
            h += 6
            if h > 6 * 4096:
                break


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--q-bits", type=int, required=True)
    ap.add_argument("--p-bits", type=int)
    ap.add_argument("--safe", action="store_true")
    args = ap.parse_args()
    p, q, h = find(args.q_bits, args.p_bits, safe=args.safe)
    print(f"p = {p}  ({p.bit_length()} bits)")
    print(f"q = {q}  ({q.bit_length()} bits)")
    print(f"h = {h}")


if __name__ == "__main__":
    main()
